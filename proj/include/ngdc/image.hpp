#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace ngdc {

// Dense pixel container: row-major, channel-interleaved floats in [0,1].
// channels is 1 (gray) or 3 (RGB).
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;

    Image() = default;
    Image(int h, int w, int c, float fill = 0.0f);

    float& at(int y, int x, int c) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    float at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    size_t pixel_count() const { return static_cast<size_t>(height) * width; }

    // Throws Error on any invariant violation (shape/data mismatch,
    // non-finite or out-of-range values).
    void validate() const;
};

// 8-bit quantization: round(v*255) half away from zero, clamped to [0,255].
uint8_t quantize8(float v);

// Decodes an 8- or 16-bit PNG (gray or RGB; alpha stripped) and normalizes
// intensities by the bit-depth maximum. Unreadable files and unsupported
// bit depths / color types are reported as distinct errors.
Image load_image(const std::filesystem::path& path);

// Encodes as 8-bit PNG using quantize8.
void save_image(const Image& img, const std::filesystem::path& path);

// Rec.601 luma (0.299, 0.587, 0.114) for 3-channel input; identity copy for
// 1-channel input.
Image to_luma(const Image& img);

}  // namespace ngdc
