#include "ngdc/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

#include "ngdc/error.hpp"

namespace ngdc {

Image::Image(int h, int w, int c, float fill)
    : height(h), width(w), channels(c),
      data(static_cast<size_t>(h) * w * c, fill) {}

void Image::validate() const {
    if (height <= 0 || width <= 0) throw Error("image: non-positive dimensions");
    if (channels != 1 && channels != 3)
        throw Error("image: channels must be 1 or 3, got " + std::to_string(channels));
    if (data.size() != static_cast<size_t>(height) * width * channels)
        throw Error("image: data length does not match height*width*channels");
    for (float v : data) {
        if (!(v >= 0.0f && v <= 1.0f))  // also catches NaN
            throw Error("image: value outside [0,1]");
    }
}

uint8_t quantize8(float v) {
    long q = std::lround(static_cast<double>(v) * 255.0);
    if (q < 0) q = 0;
    if (q > 255) q = 255;
    return static_cast<uint8_t>(q);
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_abort(png_structp, png_const_charp msg) {
    throw Error(std::string("PNG error: ") + msg);
}

void png_quiet_warn(png_structp, png_const_charp) {}

}  // namespace

Image load_image(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw Error("unreadable file: " + path.string());

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw Error("not a PNG file: " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             png_abort, png_quiet_warn);
    if (!png) throw Error("PNG decoder init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error("PNG decoder init failed");
    }

    Image img;
    try {
        png_init_io(png, fp.get());
        png_set_sig_bytes(png, 8);
        png_read_info(png, info);

        const png_uint_32 w = png_get_image_width(png, info);
        const png_uint_32 h = png_get_image_height(png, info);
        const int depth = png_get_bit_depth(png, info);
        const int color = png_get_color_type(png, info);

        if (color == PNG_COLOR_TYPE_PALETTE)
            throw Error("unsupported color type (palette): " + path.string());
        if (depth != 8 && depth != 16)
            throw Error("unsupported bit depth " + std::to_string(depth) + ": " +
                        path.string());
        if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
        png_set_interlace_handling(png);
        png_read_update_info(png, info);

        const int channels = png_get_channels(png, info);
        if (channels != 1 && channels != 3)
            throw Error("unsupported channel count " + std::to_string(channels) +
                        ": " + path.string());

        const size_t rowbytes = png_get_rowbytes(png, info);
        std::vector<unsigned char> raw(static_cast<size_t>(h) * rowbytes);
        std::vector<png_bytep> rows(h);
        for (png_uint_32 y = 0; y < h; ++y) rows[y] = raw.data() + y * rowbytes;
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);

        img = Image(static_cast<int>(h), static_cast<int>(w), channels);
        const size_t samples = img.data.size();
        if (depth == 8) {
            for (size_t i = 0; i < samples; ++i)
                img.data[i] = static_cast<float>(raw[i] / 255.0);
        } else {
            // PNG stores 16-bit samples big-endian.
            for (size_t i = 0; i < samples; ++i) {
                const unsigned v = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
                img.data[i] = static_cast<float>(v / 65535.0);
            }
        }
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void save_image(const Image& img, const std::filesystem::path& path) {
    img.validate();
    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw Error("unwritable path: " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              png_abort, png_quiet_warn);
    if (!png) throw Error("PNG encoder init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("PNG encoder init failed");
    }

    try {
        png_init_io(png, fp.get());
        const int color =
            img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
        png_set_IHDR(png, info, img.width, img.height, 8, color,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                     PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);

        std::vector<unsigned char> row(static_cast<size_t>(img.width) * img.channels);
        for (int y = 0; y < img.height; ++y) {
            const float* src = img.data.data() +
                               static_cast<size_t>(y) * img.width * img.channels;
            for (size_t i = 0; i < row.size(); ++i) row[i] = quantize8(src[i]);
            png_write_row(png, row.data());
        }
        png_write_end(png, nullptr);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
}

Image to_luma(const Image& img) {
    if (img.channels == 1) return img;
    if (img.channels != 3) throw Error("to_luma: channels must be 1 or 3");
    Image out(img.height, img.width, 1);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double r = img.at(y, x, 0);
            const double g = img.at(y, x, 1);
            const double b = img.at(y, x, 2);
            out.at(y, x, 0) = static_cast<float>(0.299 * r + 0.587 * g + 0.114 * b);
        }
    }
    return out;
}

}  // namespace ngdc
