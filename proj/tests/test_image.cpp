#include <doctest.h>
#include <png.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "ngdc/error.hpp"
#include "ngdc/image.hpp"
#include "test_util.hpp"

using namespace ngdc;
using testutil::TempDir;

namespace {

// Raw libpng writer for formats save_image never produces (16-bit, palette,
// sub-byte depths), so the loader's acceptance/rejection paths can be hit.
void write_png_raw(const std::filesystem::path& path, int w, int h, int depth,
                   int color_type, const std::vector<unsigned char>& rowdata) {
    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    REQUIRE(fp != nullptr);
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    REQUIRE(setjmp(png_jmpbuf(png)) == 0);
    png_init_io(png, fp);
    png_set_IHDR(png, info, w, h, depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    if (color_type == PNG_COLOR_TYPE_PALETTE) {
        png_color pal[2] = {{0, 0, 0}, {255, 255, 255}};
        png_set_PLTE(png, info, pal, 2);
    }
    png_write_info(png, info);
    const size_t rowbytes = png_get_rowbytes(png, info);
    for (int y = 0; y < h; ++y)
        png_write_row(png, const_cast<png_bytep>(rowdata.data() + y * rowbytes));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

}  // namespace

TEST_CASE("quantize8 rounds half away from zero") {
    CHECK(quantize8(1.0f) == 255);
    CHECK(quantize8(0.0f) == 0);
    CHECK(quantize8(0.5f) == 128);  // 127.5 rounds up
    CHECK(quantize8(0.5f / 255.0f) == 1);
    CHECK(quantize8(1.5f / 255.0f) == 2);
}

TEST_CASE("8-bit PNG round trip matches quantization exactly") {
    TempDir dir("png8");
    const Image img = testutil::random_image(11, 13, 17, 3);
    save_image(img, dir / "a.png");
    const Image back = load_image(dir / "a.png");
    REQUIRE(back.height == img.height);
    REQUIRE(back.width == img.width);
    REQUIRE(back.channels == img.channels);
    for (size_t i = 0; i < img.data.size(); ++i) {
        const float expect = static_cast<float>(quantize8(img.data[i]) / 255.0);
        CHECK(back.data[i] == expect);
    }
}

TEST_CASE("8-bit extremes normalize to 0 and 1") {
    TempDir dir("png8x");
    Image img(2, 2, 1);
    img.data = {0.0f, 1.0f, 1.0f, 0.0f};
    save_image(img, dir / "x.png");
    const Image back = load_image(dir / "x.png");
    CHECK(back.data[0] == 0.0f);
    CHECK(back.data[1] == 1.0f);
}

TEST_CASE("16-bit PNG divides by 65535") {
    TempDir dir("png16");
    // One gray pixel of value 32768, big-endian sample.
    write_png_raw(dir / "g16.png", 1, 1, 16, PNG_COLOR_TYPE_GRAY, {0x80, 0x00});
    const Image img = load_image(dir / "g16.png");
    REQUIRE(img.channels == 1);
    CHECK(img.data[0] == static_cast<float>(32768.0 / 65535.0));
    CHECK(img.data[0] == doctest::Approx(0.500008).epsilon(1e-5));
}

TEST_CASE("alpha channels are stripped") {
    TempDir dir("pnga");
    write_png_raw(dir / "rgba.png", 1, 1, 8, PNG_COLOR_TYPE_RGB_ALPHA,
                  {100, 150, 200, 255});
    const Image img = load_image(dir / "rgba.png");
    REQUIRE(img.channels == 3);
    CHECK(img.data[0] == static_cast<float>(100 / 255.0));
    CHECK(img.data[2] == static_cast<float>(200 / 255.0));
}

TEST_CASE("loader reports distinct errors") {
    TempDir dir("pngerr");

    SUBCASE("missing file") {
        CHECK_THROWS_WITH_AS(load_image(dir / "nope.png"),
                             doctest::Contains("unreadable file"), Error);
    }
    SUBCASE("not a PNG") {
        std::ofstream(dir / "junk.png") << "this is not a png";
        CHECK_THROWS_WITH_AS(load_image(dir / "junk.png"),
                             doctest::Contains("not a PNG"), Error);
    }
    SUBCASE("palette color type") {
        write_png_raw(dir / "pal.png", 2, 1, 8, PNG_COLOR_TYPE_PALETTE, {0, 1});
        CHECK_THROWS_WITH_AS(load_image(dir / "pal.png"),
                             doctest::Contains("unsupported color type"), Error);
    }
    SUBCASE("sub-byte bit depth") {
        write_png_raw(dir / "g4.png", 2, 1, 4, PNG_COLOR_TYPE_GRAY, {0x0f});
        CHECK_THROWS_WITH_AS(load_image(dir / "g4.png"),
                             doctest::Contains("unsupported bit depth"), Error);
    }
    SUBCASE("unwritable save path") {
        const Image img(2, 2, 1, 0.5f);
        CHECK_THROWS_WITH_AS(save_image(img, dir / "no" / "such" / "dir.png"),
                             doctest::Contains("unwritable"), Error);
    }
}

TEST_CASE("to_luma uses Rec.601 weights") {
    Image img(1, 3, 3);
    img.at(0, 0, 0) = 1.0f; img.at(0, 0, 1) = 1.0f; img.at(0, 0, 2) = 1.0f;
    img.at(0, 1, 0) = 1.0f; img.at(0, 1, 1) = 0.0f; img.at(0, 1, 2) = 0.0f;
    img.at(0, 2, 0) = 0.2f; img.at(0, 2, 1) = 0.4f; img.at(0, 2, 2) = 0.8f;
    const Image luma = to_luma(img);
    REQUIRE(luma.channels == 1);
    CHECK(luma.at(0, 0, 0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(luma.at(0, 1, 0) == doctest::Approx(0.299).epsilon(1e-6));
    CHECK(luma.at(0, 2, 0) ==
          doctest::Approx(0.299 * 0.2 + 0.587 * 0.4 + 0.114 * 0.8).epsilon(1e-6));
}

TEST_CASE("to_luma elementwise oracle on a random image") {
    const Image img = testutil::random_image(42, 9, 7, 3);
    const Image luma = to_luma(img);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double expect = 0.299 * img.at(y, x, 0) +
                                  0.587 * img.at(y, x, 1) +
                                  0.114 * img.at(y, x, 2);
            CHECK(luma.at(y, x, 0) == doctest::Approx(expect).epsilon(1e-7));
        }
    }
    const Image gray = testutil::random_image(43, 5, 5, 1);
    const Image same = to_luma(gray);
    CHECK(same.data == gray.data);
}

TEST_CASE("Image::validate rejects bad containers") {
    Image img(2, 2, 1, 0.5f);
    CHECK_NOTHROW(img.validate());
    img.data[0] = 1.5f;
    CHECK_THROWS_AS(img.validate(), Error);
    img.data[0] = -0.1f;
    CHECK_THROWS_AS(img.validate(), Error);
    img.data[0] = 0.5f;
    img.data.pop_back();
    CHECK_THROWS_AS(img.validate(), Error);
    Image two_channel(2, 2, 1, 0.0f);
    two_channel.channels = 2;
    two_channel.data.resize(8, 0.0f);
    CHECK_THROWS_AS(two_channel.validate(), Error);
}
