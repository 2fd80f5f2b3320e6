// ngdc — dataset preparation and loss verification tool for real-world
// super-resolution training data: bicubic degradation pairs, noise banks
// distilled by characteristic variance/mean intervals, seeded noise
// injection, PSNR/SSIM reports and gradient self-checks.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ngdc/edl.hpp"
#include "ngdc/error.hpp"
#include "ngdc/gradient_suite.hpp"
#include "ngdc/image.hpp"
#include "ngdc/manifest.hpp"
#include "ngdc/metrics.hpp"
#include "ngdc/noise_bank.hpp"
#include "ngdc/parallel.hpp"
#include "ngdc/pipeline.hpp"
#include "ngdc/resize.hpp"
#include "ngdc/tensor.hpp"

namespace fs = std::filesystem;
using ngdc::Error;

namespace {

// Claims an output directory for one run: it must not already contain
// anything, and everything created is removed again if the run fails.
class OutputDir {
public:
    explicit OutputDir(const fs::path& dir) : dir_(dir) {
        if (fs::exists(dir)) {
            if (!fs::is_directory(dir) || !fs::is_empty(dir))
                throw Error("output path exists and is not an empty directory: " +
                            dir.string());
            created_ = false;
        } else {
            fs::create_directories(dir);
            created_ = true;
        }
        armed_ = true;
    }
    ~OutputDir() {
        if (!armed_) return;
        std::error_code ec;
        if (created_)
            fs::remove_all(dir_, ec);
        else
            for (const auto& e : fs::directory_iterator(dir_, ec))
                fs::remove_all(e.path(), ec);
    }
    void commit() { armed_ = false; }
    const fs::path& path() const { return dir_; }

private:
    fs::path dir_;
    bool created_ = false;
    bool armed_ = false;
};

// Optional JSON config whose keys mirror the flags; explicit flags win.
void apply_config(const CLI::App* cmd, const fs::path& config_path,
                  const std::vector<std::pair<std::string, std::function<void(const nlohmann::json&)>>>& keys) {
    if (config_path.empty()) return;
    std::ifstream in(config_path);
    if (!in) throw Error("unreadable config: " + config_path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("invalid config JSON: " + std::string(e.what()));
    }
    for (const auto& [flag, assign] : keys) {
        const std::string key = flag.substr(2);  // strip leading "--"
        if (!j.contains(key)) continue;
        if (cmd->count(flag) > 0) continue;
        try {
            assign(j.at(key));
        } catch (const nlohmann::json::exception& e) {
            throw Error("config key '" + key + "': " + e.what());
        }
    }
}

std::vector<fs::path> png_inputs(const fs::path& in) {
    std::vector<fs::path> files;
    if (fs::is_directory(in)) {
        for (const auto& e : fs::directory_iterator(in))
            if (e.is_regular_file() && e.path().extension() == ".png")
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
    } else if (fs::exists(in)) {
        files.push_back(in);
    }
    if (files.empty()) throw Error("no PNG inputs at: " + in.string());
    return files;
}

int run_degrade(const fs::path& in, const fs::path& out, int scale) {
    const auto files = png_inputs(in);
    OutputDir dir(out);
    fs::create_directories(dir.path() / "hr");
    fs::create_directories(dir.path() / "lr");

    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    for (const auto& f : files) {
        const ngdc::Image src = ngdc::load_image(f);
        const ngdc::DegradedPair pair = ngdc::degrade_pair(src, scale);
        const std::string name = f.stem().string() + ".png";
        ngdc::save_image(pair.hr, dir.path() / "hr" / name);
        ngdc::save_image(pair.lr, dir.path() / "lr" / name);
        records.push_back({{"id", f.stem().string()},
                           {"hr", "hr/" + name},
                           {"lr", "lr/" + name}});
    }

    nlohmann::ordered_json j;
    j["version"] = 1;
    j["config"] = {{"scale", scale}};
    j["pairs"] = std::move(records);
    std::ofstream manifest(dir.path() / "degrade.json", std::ios::trunc);
    manifest << j.dump(2) << "\n";
    if (!manifest) throw Error("write failed: degrade.json");

    dir.commit();
    return 0;
}

int run_bank(const fs::path& dataset, int patch_size, double bottom_frac,
             const fs::path& out) {
    const ngdc::DatasetManifest manifest = ngdc::load_manifest(dataset);
    const ngdc::NoiseBank bank = ngdc::build_bank(manifest, patch_size, bottom_frac);
    OutputDir dir(out);
    ngdc::save_bank(bank, dir.path());
    dir.commit();
    std::cout << "bank: " << bank.entries.size() << " entries, cati sigma ["
              << bank.cati.sigma_lo << ", " << bank.cati.sigma_hi << "] mean ["
              << bank.cati.mean_lo << ", " << bank.cati.mean_hi << "]\n";
    return 0;
}

int run_distill(const fs::path& target, const fs::path& aux, int scale,
                int patch_size, double bottom_frac, uint64_t seed, bool inject,
                const fs::path& out) {
    const ngdc::DatasetManifest target_m = ngdc::load_manifest(target);
    ngdc::DatasetManifest aux_m;
    if (!aux.empty()) aux_m = ngdc::load_manifest(aux);

    ngdc::DistillConfig cfg;
    cfg.scale = scale;
    cfg.patch_size = patch_size;
    cfg.bottom_frac = bottom_frac;
    cfg.seed = seed;

    ngdc::DistilledDataset d = ngdc::distill(target_m, aux_m, cfg);
    OutputDir dir(out);
    ngdc::emit_pairs(d, dir.path(), inject, seed);
    ngdc::save_bank(d.bank, dir.path() / "bank");
    dir.commit();
    std::cout << "distilled " << d.pairs.size() << " pairs ("
              << target_m.images.size() << " target), bank "
              << d.bank.entries.size() << " entries\n";
    return 0;
}

int run_metrics(const fs::path& ref_dir, const fs::path& test_dir,
                const fs::path& out_file) {
    const auto refs = png_inputs(ref_dir);
    std::vector<fs::path> tests;
    for (const auto& r : refs) {
        const fs::path t = test_dir / r.filename();
        if (!fs::exists(t))
            throw Error("missing test image for " + r.filename().string());
        tests.push_back(t);
    }
    size_t test_count = 0;
    for (const auto& e : fs::directory_iterator(test_dir))
        if (e.is_regular_file() && e.path().extension() == ".png") ++test_count;
    if (test_count != refs.size())
        throw Error("mismatched image counts: " + std::to_string(refs.size()) +
                    " reference vs " + std::to_string(test_count) + " test");

    // Compute everything first so failures leave no partial report.
    std::vector<ngdc::MetricReport> reports;
    reports.reserve(refs.size());
    for (size_t i = 0; i < refs.size(); ++i) {
        const ngdc::Image a = ngdc::load_image(refs[i]);
        const ngdc::Image b = ngdc::load_image(tests[i]);
        reports.push_back(ngdc::evaluate_pair(a, b));
    }

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_file.empty()) {
        file.open(out_file, std::ios::trunc);
        if (!file) throw Error("unwritable path: " + out_file.string());
        os = &file;
    }

    // Header documents the channel conventions: PSNR over RGB MSE, SSIM on luma.
    nlohmann::ordered_json header = {{"type", "header"},
                                     {"version", 1},
                                     {"psnr", "rgb-mse"},
                                     {"ssim", "luma"}};
    *os << header.dump() << "\n";
    for (size_t i = 0; i < refs.size(); ++i) {
        nlohmann::ordered_json rec;
        rec["id"] = refs[i].stem().string();
        if (std::isinf(reports[i].psnr_db))
            rec["psnr_db"] = "inf";
        else
            rec["psnr_db"] = reports[i].psnr_db;
        rec["ssim"] = reports[i].ssim;
        *os << rec.dump() << "\n";
    }
    if (!out_file.empty() && !file) throw Error("write failed: " + out_file.string());
    return 0;
}

int run_check_grads(uint64_t seed) {
    const auto results = ngdc::run_gradient_suite(seed);
    double worst = 0.0;
    for (const auto& r : results) {
        std::printf("%-20s instances=%d  max_rel_err=%.3e\n", r.family.c_str(),
                    r.instances, r.max_rel_err);
        worst = std::max(worst, r.max_rel_err);
    }
    std::printf("max relative error: %.3e\n", worst);
    if (worst >= 1e-4) {
        std::cerr << "gradient check failed (>= 1e-4)\n";
        return 1;
    }
    return 0;
}

int run_mask(const fs::path& in, const fs::path& out) {
    const ngdc::Tensor3 t = ngdc::read_tensor_file(in);
    const ngdc::Mask m = ngdc::softmax_mask(t);
    ngdc::write_tensor_file(m.values, out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"real-world SR data preparation: degradation pairs, noise "
                 "banks, dataset distillation, metrics, loss self-checks"};
    app.require_subcommand(1);

    // degrade
    auto* degrade = app.add_subcommand("degrade", "write an HR/LR pair per input PNG");
    fs::path dg_in, dg_out, dg_config;
    int dg_scale = 4;
    degrade->add_option("--in", dg_in, "input PNG file or directory")->required();
    degrade->add_option("--out", dg_out, "output directory")->required();
    degrade->add_option("--scale", dg_scale, "downscale factor k");
    degrade->add_option("--config", dg_config, "JSON config (flags win)");
    int dg_workers = 0;
    degrade->add_option("--workers", dg_workers, "worker threads (0 = all)");

    // bank
    auto* bank = app.add_subcommand("bank", "build a noise bank from a dataset manifest");
    fs::path bk_dataset, bk_out, bk_config;
    int bk_patch = 64, bk_workers = 0;
    double bk_frac = 0.02;
    bank->add_option("--dataset", bk_dataset, "dataset manifest JSON")->required();
    bank->add_option("--patch-size", bk_patch, "patch size s");
    bank->add_option("--bottom-frac", bk_frac, "bottom variance fraction");
    bank->add_option("--out", bk_out, "output bank directory")->required();
    bank->add_option("--config", bk_config, "JSON config (flags win)");
    bank->add_option("--workers", bk_workers, "worker threads (0 = all)");

    // distill
    auto* distill = app.add_subcommand("distill",
                                       "degrade a target dataset, distill an auxiliary one, emit pairs + bank");
    fs::path ds_target, ds_aux, ds_out, ds_config;
    int ds_scale = 4, ds_patch = 64, ds_workers = 0;
    double ds_frac = 0.02;
    uint64_t ds_seed = 0;
    bool ds_inject = false;
    distill->add_option("--target", ds_target, "target dataset manifest")->required();
    distill->add_option("--aux", ds_aux, "auxiliary dataset manifest");
    distill->add_option("--scale", ds_scale, "downscale factor k");
    distill->add_option("--patch-size", ds_patch, "patch size s");
    distill->add_option("--bottom-frac", ds_frac, "bottom variance fraction");
    distill->add_option("--seed", ds_seed, "root seed for all randomness");
    distill->add_flag("--inject", ds_inject, "inject bank noise into emitted LR images");
    distill->add_option("--out", ds_out, "output directory")->required();
    distill->add_option("--config", ds_config, "JSON config (flags win)");
    distill->add_option("--workers", ds_workers, "worker threads (0 = all)");

    // metrics
    auto* metrics = app.add_subcommand("metrics", "PSNR/SSIM report as JSON lines");
    fs::path mt_ref, mt_test, mt_out;
    metrics->add_option("--ref-dir", mt_ref, "reference PNG directory")->required();
    metrics->add_option("--test-dir", mt_test, "test PNG directory")->required();
    metrics->add_option("--out", mt_out, "report file (default stdout)");

    // edl
    auto* edl = app.add_subcommand("edl", "loss-math utilities");
    edl->require_subcommand(1);
    auto* check = edl->add_subcommand("check-grads", "finite-difference gradient suite");
    uint64_t cg_seed = 0;
    check->add_option("--seed", cg_seed, "suite seed");
    auto* mask = edl->add_subcommand("mask", "softmax mask of a tensor file");
    fs::path mk_in, mk_out;
    mask->add_option("--in", mk_in, "input tensor file")->required();
    mask->add_option("--out", mk_out, "output tensor file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*degrade) {
            apply_config(degrade, dg_config,
                         {{"--scale", [&](const nlohmann::json& v) { dg_scale = v.get<int>(); }},
                          {"--workers", [&](const nlohmann::json& v) { dg_workers = v.get<int>(); }}});
            ngdc::set_worker_count(dg_workers);
            return run_degrade(dg_in, dg_out, dg_scale);
        }
        if (*bank) {
            apply_config(bank, bk_config,
                         {{"--patch-size", [&](const nlohmann::json& v) { bk_patch = v.get<int>(); }},
                          {"--bottom-frac", [&](const nlohmann::json& v) { bk_frac = v.get<double>(); }},
                          {"--workers", [&](const nlohmann::json& v) { bk_workers = v.get<int>(); }}});
            ngdc::set_worker_count(bk_workers);
            return run_bank(bk_dataset, bk_patch, bk_frac, bk_out);
        }
        if (*distill) {
            apply_config(distill, ds_config,
                         {{"--scale", [&](const nlohmann::json& v) { ds_scale = v.get<int>(); }},
                          {"--patch-size", [&](const nlohmann::json& v) { ds_patch = v.get<int>(); }},
                          {"--bottom-frac", [&](const nlohmann::json& v) { ds_frac = v.get<double>(); }},
                          {"--seed", [&](const nlohmann::json& v) { ds_seed = v.get<uint64_t>(); }},
                          {"--inject", [&](const nlohmann::json& v) { ds_inject = v.get<bool>(); }},
                          {"--workers", [&](const nlohmann::json& v) { ds_workers = v.get<int>(); }}});
            ngdc::set_worker_count(ds_workers);
            return run_distill(ds_target, ds_aux, ds_scale, ds_patch, ds_frac,
                               ds_seed, ds_inject, ds_out);
        }
        if (*metrics) return run_metrics(mt_ref, mt_test, mt_out);
        if (*check) return run_check_grads(cg_seed);
        if (*mask) return run_mask(mk_in, mk_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
