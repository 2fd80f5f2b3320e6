#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ngdc/image.hpp"

namespace ngdc {

// Image-shaped value tensor: row-major, channel-interleaved doubles,
// unrestricted finite values.
struct Tensor3 {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(int h, int w, int c, double fill = 0.0);

    double& at(int y, int x, int c) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    size_t size() const { return data.size(); }
    bool same_shape(const Tensor3& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }

    void validate_finite() const;  // throws Error on NaN/inf
};

Tensor3 to_tensor(const Image& img);

// Binary container shared by bank patches and CLI tensors:
//   magic "NGDC", u16 version = 1, u16 height, u16 width, u16 channels,
//   then height*width*channels float32, little-endian, row-major,
//   channel-interleaved.
void write_tensor_file(const Tensor3& t, const std::filesystem::path& path);
Tensor3 read_tensor_file(const std::filesystem::path& path);  // rejects non-finite data

// Same container restricted to the Image invariants ([0,1], 1 or 3 channels).
void write_patch_file(const Image& img, const std::filesystem::path& path);
Image read_patch_file(const std::filesystem::path& path);

}  // namespace ngdc
