#include "ngdc/noise_bank.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "ngdc/error.hpp"
#include "ngdc/rng.hpp"
#include "ngdc/tensor.hpp"

namespace ngdc {

namespace {

// Decimal serialization that round-trips doubles exactly.
std::string decimal(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_decimal(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw Error("bank: malformed decimal value '" + s + "'");
    return v;
}

bool entry_order(const BankEntry& a, const BankEntry& b) {
    if (a.source_id != b.source_id) return a.source_id < b.source_id;
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
}

std::string entry_file_name(size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06zu.pat", index);
    return buf;
}

}  // namespace

size_t cati_selection_count(size_t population, double bottom_frac) {
    const double k = std::ceil(bottom_frac * static_cast<double>(population) - 1e-9);
    size_t n = k < 1.0 ? 1 : static_cast<size_t>(k);
    return std::min(n, population);
}

Cati compute_cati(const std::vector<PatchStats>& stats, double bottom_frac) {
    if (stats.empty()) throw Error("compute_cati: empty statistics list");
    if (!(bottom_frac > 0.0 && bottom_frac <= 1.0))
        throw Error("compute_cati: bottom_frac must be in (0, 1]");

    const size_t k = cati_selection_count(stats.size(), bottom_frac);
    std::vector<size_t> idx(stats.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        if (stats[a].sigma != stats[b].sigma) return stats[a].sigma < stats[b].sigma;
        if (stats[a].mean != stats[b].mean) return stats[a].mean < stats[b].mean;
        return a < b;
    });

    Cati c;
    bool any = false;
    for (size_t i = 0; i < k; ++i) {
        const PatchStats& s = stats[idx[i]];
        if (s.mean <= 0.0) continue;
        if (!any) {
            c.sigma_lo = c.sigma_hi = s.sigma;
            c.mean_lo = c.mean_hi = s.mean;
            any = true;
        } else {
            c.sigma_lo = std::min(c.sigma_lo, s.sigma);
            c.sigma_hi = std::max(c.sigma_hi, s.sigma);
            c.mean_lo = std::min(c.mean_lo, s.mean);
            c.mean_hi = std::max(c.mean_hi, s.mean);
        }
    }
    if (!any)
        throw Error("empty CATI: every selected patch has non-positive mean");
    return c;
}

PatchClass classify_patch(const PatchStats& stats, const Cati& cati) {
    const bool noise = stats.sigma >= cati.sigma_lo && stats.sigma <= cati.sigma_hi &&
                       stats.mean >= cati.mean_lo && stats.mean <= cati.mean_hi;
    return noise ? PatchClass::Noise : PatchClass::Noiseless;
}

NoiseBank build_bank(const DatasetManifest& manifest, int patch_size,
                     double bottom_frac) {
    if (manifest.images.empty())
        throw Error("empty dataset: " + manifest.dataset_id);
    if (patch_size < 2) throw Error("patch size must be >= 2");

    const int n = static_cast<int>(manifest.images.size());
    std::vector<std::vector<PatchStats>> per_image(n);
    std::vector<std::string> errors(n);

    // Pass 1: statistics of every grid patch, per-image slots so the
    // concatenation order does not depend on scheduling.
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        try {
            const Image img = load_image(manifest.images[i].path);
            const Image luma = to_luma(img);
            auto& out = per_image[i];
            for (auto [row, col] : grid_origins(img.height, img.width, patch_size))
                out.push_back(rect_luma_stats(luma, row, col, patch_size));
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (int i = 0; i < n; ++i)
        if (!errors[i].empty()) throw Error(errors[i]);

    std::vector<PatchStats> all_stats;
    for (const auto& v : per_image) all_stats.insert(all_stats.end(), v.begin(), v.end());
    if (all_stats.empty())
        throw Error("dataset has no full patches at size " +
                    std::to_string(patch_size));

    NoiseBank bank;
    bank.patch_size = patch_size;
    bank.bottom_frac = bottom_frac;
    bank.cati = compute_cati(all_stats, bottom_frac);
    bank.source_datasets = {manifest.dataset_id};

    // Pass 2: re-scan and admit every patch inside the CATI.
    std::vector<std::vector<BankEntry>> admitted(n);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        try {
            const Image img = load_image(manifest.images[i].path);
            const Image luma = to_luma(img);
            const std::string source_id =
                manifest.dataset_id + "/" + manifest.images[i].id;
            for (auto [row, col] : grid_origins(img.height, img.width, patch_size)) {
                const PatchStats st = rect_luma_stats(luma, row, col, patch_size);
                if (classify_patch(st, bank.cati) != PatchClass::Noise) continue;
                BankEntry e;
                e.stats = st;
                e.source_id = source_id;
                e.row = row;
                e.col = col;
                e.pixels = extract_patch(img, row, col, patch_size).pixels;
                admitted[i].push_back(std::move(e));
            }
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (int i = 0; i < n; ++i)
        if (!errors[i].empty()) throw Error(errors[i]);

    for (auto& v : admitted)
        for (auto& e : v) bank.entries.push_back(std::move(e));
    std::sort(bank.entries.begin(), bank.entries.end(), entry_order);
    for (size_t i = 0; i < bank.entries.size(); ++i)
        bank.entries[i].file_name = entry_file_name(i);
    return bank;
}

Patch sample_noise(const NoiseBank& bank, uint64_t seed) {
    if (bank.entries.empty()) throw Error("empty noise bank");
    auto eng = make_engine(seed);
    const auto& e = bank.entries[bounded(eng, bank.entries.size())];
    Patch p;
    p.pixels = e.pixels;
    p.source_id = e.source_id;
    p.row = e.row;
    p.col = e.col;
    return p;
}

Image inject_noise(const Image& lr, const Patch& n, uint64_t seed) {
    const Image& np = n.pixels;
    if (np.height != np.width) throw Error("inject_noise: patch must be square");
    if (np.channels != lr.channels && np.channels != 1)
        throw Error("inject_noise: channel mismatch");
    const int s = np.height;

    auto eng = make_engine(seed);
    const int off_row = static_cast<int>(bounded(eng, s));
    const int off_col = static_cast<int>(bounded(eng, s));

    // Per-channel zero-mean residual.
    std::vector<double> mean(np.channels, 0.0);
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x)
            for (int c = 0; c < np.channels; ++c) mean[c] += np.at(y, x, c);
    for (double& m : mean) m /= static_cast<double>(s) * s;

    Image out(lr.height, lr.width, lr.channels);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < lr.height; ++y) {
        const int py = (y + off_row) % s;
        for (int x = 0; x < lr.width; ++x) {
            const int px = (x + off_col) % s;
            for (int c = 0; c < lr.channels; ++c) {
                const int pc = np.channels == 1 ? 0 : c;
                const double r = static_cast<double>(np.at(py, px, pc)) - mean[pc];
                const double v = static_cast<double>(lr.at(y, x, c)) + r;
                out.at(y, x, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
        }
    }
    return out;
}

void save_bank(const NoiseBank& bank, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "patches");

    nlohmann::ordered_json j;
    j["version"] = 1;
    j["patch_size"] = bank.patch_size;
    j["bottom_frac"] = bank.bottom_frac;
    j["cati"] = {{"sigma_lo", decimal(bank.cati.sigma_lo)},
                 {"sigma_hi", decimal(bank.cati.sigma_hi)},
                 {"mean_lo", decimal(bank.cati.mean_lo)},
                 {"mean_hi", decimal(bank.cati.mean_hi)}};
    j["source_datasets"] = bank.source_datasets;
    auto entries = nlohmann::ordered_json::array();
    for (const auto& e : bank.entries) {
        entries.push_back({{"file", e.file_name},
                           {"sigma", decimal(e.stats.sigma)},
                           {"mean", decimal(e.stats.mean)},
                           {"source_id", e.source_id},
                           {"row", e.row},
                           {"col", e.col}});
    }
    j["entries"] = std::move(entries);

    std::ofstream out(dir / "bank.json", std::ios::trunc);
    if (!out) throw Error("unwritable path: " + (dir / "bank.json").string());
    out << j.dump(2) << "\n";
    if (!out) throw Error("write failed: " + (dir / "bank.json").string());

    for (const auto& e : bank.entries)
        write_patch_file(e.pixels, dir / "patches" / e.file_name);
}

NoiseBank load_bank(const std::filesystem::path& dir) {
    std::ifstream in(dir / "bank.json");
    if (!in) throw Error("unreadable bank: " + (dir / "bank.json").string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("invalid bank JSON: " + std::string(e.what()));
    }

    NoiseBank bank;
    try {
        if (j.at("version").get<int>() != 1) throw Error("unsupported bank version");
        bank.patch_size = j.at("patch_size").get<int>();
        bank.bottom_frac = j.at("bottom_frac").get<double>();
        const auto& c = j.at("cati");
        bank.cati.sigma_lo = parse_decimal(c.at("sigma_lo").get<std::string>());
        bank.cati.sigma_hi = parse_decimal(c.at("sigma_hi").get<std::string>());
        bank.cati.mean_lo = parse_decimal(c.at("mean_lo").get<std::string>());
        bank.cati.mean_hi = parse_decimal(c.at("mean_hi").get<std::string>());
        bank.source_datasets =
            j.at("source_datasets").get<std::vector<std::string>>();
        for (const auto& e : j.at("entries")) {
            BankEntry entry;
            entry.file_name = e.at("file").get<std::string>();
            entry.stats.sigma = parse_decimal(e.at("sigma").get<std::string>());
            entry.stats.mean = parse_decimal(e.at("mean").get<std::string>());
            entry.source_id = e.at("source_id").get<std::string>();
            entry.row = e.at("row").get<int>();
            entry.col = e.at("col").get<int>();
            entry.pixels = read_patch_file(dir / "patches" / entry.file_name);
            bank.entries.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error("invalid bank schema: " + std::string(e.what()));
    }
    return bank;
}

}  // namespace ngdc
