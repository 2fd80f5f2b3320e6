// End-to-end checks of the installed subcommands, driven through the real
// binary (path injected by the build).

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "ngdc/image.hpp"
#include "ngdc/tensor.hpp"
#include "test_util.hpp"

using testutil::TempDir;

namespace {

#ifndef NGDC_CLI_PATH
#error "NGDC_CLI_PATH must be defined by the build"
#endif

int run_cli(const std::string& args) {
    const std::string cmd = std::string(NGDC_CLI_PATH) + " " + args +
                            " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("degrade writes an HR/LR pair per input") {
    TempDir dir("cli_degrade");
    const ngdc::Image img = testutil::random_image(1, 128, 128, 3);
    std::filesystem::create_directories(dir / "in");
    ngdc::save_image(img, dir / "in" / "photo.png");

    REQUIRE(run_cli("degrade --in " + (dir / "in").string() + " --out " +
                    (dir / "out").string() + " --scale 4") == 0);
    const ngdc::Image hr = ngdc::load_image(dir / "out" / "hr" / "photo.png");
    const ngdc::Image lr = ngdc::load_image(dir / "out" / "lr" / "photo.png");
    CHECK(hr.height == 32);
    CHECK(lr.height == 8);
    CHECK(std::filesystem::exists(dir / "out" / "degrade.json"));
}

TEST_CASE("degrade at scale 1 reproduces the quantized input") {
    TempDir dir("cli_scale1");
    const ngdc::Image img = testutil::random_image(2, 32, 32, 3);
    std::filesystem::create_directories(dir / "in");
    ngdc::save_image(img, dir / "in" / "a.png");
    REQUIRE(run_cli("degrade --in " + (dir / "in").string() + " --out " +
                    (dir / "out").string() + " --scale 1") == 0);
    CHECK(testutil::read_bytes(dir / "in" / "a.png") ==
          testutil::read_bytes(dir / "out" / "hr" / "a.png"));
    CHECK(testutil::read_bytes(dir / "in" / "a.png") ==
          testutil::read_bytes(dir / "out" / "lr" / "a.png"));
}

TEST_CASE("corrupt input PNG fails with a nonzero exit and no partial output") {
    TempDir dir("cli_corrupt");
    std::filesystem::create_directories(dir / "in");
    std::ofstream(dir / "in" / "broken.png") << "garbage";
    CHECK(run_cli("degrade --in " + (dir / "in").string() + " --out " +
                  (dir / "out").string() + " --scale 4") != 0);
    CHECK(!std::filesystem::exists(dir / "out"));
}

TEST_CASE("existing non-empty output directory is refused") {
    TempDir dir("cli_owned");
    const ngdc::Image img = testutil::random_image(3, 32, 32, 1);
    std::filesystem::create_directories(dir / "in");
    std::filesystem::create_directories(dir / "out");
    ngdc::save_image(img, dir / "in" / "a.png");
    std::ofstream(dir / "out" / "already.txt") << "x";
    CHECK(run_cli("degrade --in " + (dir / "in").string() + " --out " +
                  (dir / "out").string()) != 0);
    // Pre-existing content is left alone.
    CHECK(std::filesystem::exists(dir / "out" / "already.txt"));
}

TEST_CASE("metrics of identical directories report inf and 1") {
    TempDir dir("cli_metrics");
    std::filesystem::create_directories(dir / "a");
    const ngdc::Image img = testutil::random_image(4, 24, 24, 3);
    ngdc::save_image(img, dir / "a" / "x.png");

    REQUIRE(run_cli("metrics --ref-dir " + (dir / "a").string() + " --test-dir " +
                    (dir / "a").string() + " --out " + (dir / "r.jsonl").string()) ==
            0);
    const std::string report = testutil::read_bytes(dir / "r.jsonl");
    CHECK(report.find("\"psnr_db\":\"inf\"") != std::string::npos);
    CHECK(report.find("\"ssim\":1.0") != std::string::npos);
    CHECK(report.find("\"type\":\"header\"") != std::string::npos);
}

TEST_CASE("metrics rejects mismatched directory contents") {
    TempDir dir("cli_metrics_mismatch");
    std::filesystem::create_directories(dir / "a");
    std::filesystem::create_directories(dir / "b");
    const ngdc::Image img = testutil::random_image(5, 24, 24, 1);
    ngdc::save_image(img, dir / "a" / "x.png");
    ngdc::save_image(img, dir / "b" / "x.png");
    ngdc::save_image(img, dir / "b" / "extra.png");
    CHECK(run_cli("metrics --ref-dir " + (dir / "a").string() + " --test-dir " +
                  (dir / "b").string()) != 0);
}

TEST_CASE("edl mask of a zero tensor is uniform 1/3") {
    TempDir dir("cli_mask");
    ngdc::Tensor3 zero(4, 4, 3, 0.0);
    ngdc::write_tensor_file(zero, dir / "z.pat");
    REQUIRE(run_cli("edl mask --in " + (dir / "z.pat").string() + " --out " +
                    (dir / "m.pat").string()) == 0);
    const ngdc::Tensor3 m = ngdc::read_tensor_file(dir / "m.pat");
    for (double v : m.data)
        CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("edl mask rejects non-finite tensors") {
    TempDir dir("cli_mask_bad");
    ngdc::Image ok(1, 1, 1, 0.5f);
    ngdc::write_patch_file(ok, dir / "bad.pat");
    std::string bytes = testutil::read_bytes(dir / "bad.pat");
    bytes[12] = '\x00';
    bytes[13] = '\x00';
    bytes[14] = '\x80';
    bytes[15] = '\x7f';  // +inf
    {
        std::ofstream out(dir / "bad.pat", std::ios::binary | std::ios::trunc);
        out << bytes;
    }
    CHECK(run_cli("edl mask --in " + (dir / "bad.pat").string() + " --out " +
                  (dir / "m.pat").string()) != 0);
}

TEST_CASE("config file fills unset flags and loses to explicit flags") {
    TempDir dir("cli_config");
    const ngdc::Image img = testutil::random_image(6, 64, 64, 3);
    std::filesystem::create_directories(dir / "in");
    ngdc::save_image(img, dir / "in" / "a.png");
    std::ofstream(dir / "cfg.json") << R"({"scale": 2})";

    // scale comes from the config: 64 -> 32 -> 16.
    REQUIRE(run_cli("degrade --in " + (dir / "in").string() + " --out " +
                    (dir / "o1").string() + " --config " +
                    (dir / "cfg.json").string()) == 0);
    CHECK(ngdc::load_image(dir / "o1" / "hr" / "a.png").height == 32);

    // Explicit flag wins over the config.
    REQUIRE(run_cli("degrade --in " + (dir / "in").string() + " --out " +
                    (dir / "o2").string() + " --config " +
                    (dir / "cfg.json").string() + " --scale 4") == 0);
    CHECK(ngdc::load_image(dir / "o2" / "hr" / "a.png").height == 16);
}

TEST_CASE("bank subcommand writes a deterministic bank directory") {
    TempDir dir("cli_bank");
    std::vector<ngdc::Image> images = {testutil::random_image(7, 48, 48, 3)};
    testutil::write_dataset(dir / "ds", "cli", images);

    const std::string flags = "bank --dataset " + (dir / "ds" / "manifest.json").string() +
                              " --patch-size 8 --bottom-frac 0.1 --out ";
    REQUIRE(run_cli(flags + (dir / "b1").string()) == 0);
    REQUIRE(run_cli(flags + (dir / "b2").string()) == 0);
    CHECK(testutil::read_bytes(dir / "b1" / "bank.json") ==
          testutil::read_bytes(dir / "b2" / "bank.json"));
    CHECK(std::filesystem::exists(dir / "b1" / "patches" / "000000.pat"));

    // Empty dataset: nonzero exit with a diagnostic.
    std::ofstream(dir / "empty.json")
        << R"({"dataset_id": "none", "images": []})";
    CHECK(run_cli("bank --dataset " + (dir / "empty.json").string() + " --out " +
                  (dir / "b3").string()) != 0);
}
