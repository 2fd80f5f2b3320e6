#include "ngdc/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "ngdc/error.hpp"

namespace ngdc {

Tensor3::Tensor3(int h, int w, int c, double fill)
    : height(h), width(w), channels(c),
      data(static_cast<size_t>(h) * w * c, fill) {}

void Tensor3::validate_finite() const {
    if (height <= 0 || width <= 0 || channels <= 0)
        throw Error("tensor: non-positive dimensions");
    if (data.size() != static_cast<size_t>(height) * width * channels)
        throw Error("tensor: data length does not match dimensions");
    for (double v : data)
        if (!std::isfinite(v)) throw Error("tensor: non-finite value");
}

Tensor3 to_tensor(const Image& img) {
    Tensor3 t(img.height, img.width, img.channels);
    for (size_t i = 0; i < img.data.size(); ++i) t.data[i] = img.data[i];
    return t;
}

namespace {

constexpr char kMagic[4] = {'N', 'G', 'D', 'C'};
constexpr uint16_t kVersion = 1;

void put_u16(std::string& buf, uint16_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_f32(std::string& buf, float v) {
    const uint32_t bits = std::bit_cast<uint32_t>(v);
    buf.push_back(static_cast<char>(bits & 0xff));
    buf.push_back(static_cast<char>((bits >> 8) & 0xff));
    buf.push_back(static_cast<char>((bits >> 16) & 0xff));
    buf.push_back(static_cast<char>((bits >> 24) & 0xff));
}

uint16_t take_u16(const unsigned char* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

float take_f32(const unsigned char* p) {
    const uint32_t bits = static_cast<uint32_t>(p[0]) |
                          (static_cast<uint32_t>(p[1]) << 8) |
                          (static_cast<uint32_t>(p[2]) << 16) |
                          (static_cast<uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(bits);
}

void write_container(const std::filesystem::path& path, int h, int w, int c,
                     const float* values, size_t count) {
    if (h < 1 || w < 1 || c < 1 || h > 0xffff || w > 0xffff || c > 0xffff)
        throw Error("tensor file: dimensions out of u16 range");
    std::string buf;
    buf.reserve(12 + count * 4);
    buf.append(kMagic, 4);
    put_u16(buf, kVersion);
    put_u16(buf, static_cast<uint16_t>(h));
    put_u16(buf, static_cast<uint16_t>(w));
    put_u16(buf, static_cast<uint16_t>(c));
    for (size_t i = 0; i < count; ++i) put_f32(buf, values[i]);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("unwritable path: " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error("write failed: " + path.string());
}

struct Container {
    int h, w, c;
    std::vector<float> values;
};

Container read_container(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("unreadable file: " + path.string());
    std::string buf((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    if (buf.size() < 12 || std::memcmp(buf.data(), kMagic, 4) != 0)
        throw Error("not a tensor file: " + path.string());
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
    const uint16_t version = take_u16(p + 4);
    if (version != kVersion)
        throw Error("unsupported tensor file version " + std::to_string(version) +
                    ": " + path.string());
    Container t;
    t.h = take_u16(p + 6);
    t.w = take_u16(p + 8);
    t.c = take_u16(p + 10);
    const size_t count = static_cast<size_t>(t.h) * t.w * t.c;
    if (buf.size() != 12 + count * 4)
        throw Error("truncated tensor file: " + path.string());
    t.values.resize(count);
    for (size_t i = 0; i < count; ++i) t.values[i] = take_f32(p + 12 + i * 4);
    return t;
}

}  // namespace

void write_tensor_file(const Tensor3& t, const std::filesystem::path& path) {
    t.validate_finite();
    std::vector<float> narrow(t.data.size());
    for (size_t i = 0; i < t.data.size(); ++i) {
        if (std::abs(t.data[i]) > std::numeric_limits<float>::max())
            throw Error("tensor file: value exceeds float32 range");
        narrow[i] = static_cast<float>(t.data[i]);
    }
    write_container(path, t.height, t.width, t.channels, narrow.data(),
                    narrow.size());
}

Tensor3 read_tensor_file(const std::filesystem::path& path) {
    const Container c = read_container(path);
    Tensor3 t(c.h, c.w, c.c);
    for (size_t i = 0; i < c.values.size(); ++i) t.data[i] = c.values[i];
    t.validate_finite();
    return t;
}

void write_patch_file(const Image& img, const std::filesystem::path& path) {
    img.validate();
    write_container(path, img.height, img.width, img.channels, img.data.data(),
                    img.data.size());
}

Image read_patch_file(const std::filesystem::path& path) {
    const Container c = read_container(path);
    Image img;
    img.height = c.h;
    img.width = c.w;
    img.channels = c.c;
    img.data = c.values;
    img.validate();
    return img;
}

}  // namespace ngdc
