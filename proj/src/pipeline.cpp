#include "ngdc/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "ngdc/error.hpp"
#include "ngdc/rng.hpp"

namespace ngdc {

namespace {

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

std::string sanitize(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                        (ch >= '0' && ch <= '9') || ch == '.' || ch == '-' ||
                        ch == '_';
        out.push_back(ok ? ch : '_');
    }
    return out;
}

void validate_config(const DistillConfig& cfg) {
    if (cfg.scale < 1) throw Error("distill: scale must be >= 1");
    if (cfg.patch_size < 2) throw Error("distill: patch size must be >= 2");
    if (!(cfg.bottom_frac > 0.0 && cfg.bottom_frac <= 1.0))
        throw Error("distill: bottom_frac must be in (0, 1]");
}

struct TargetSlot {
    std::vector<PatchStats> stats;
    TrainingPair pair;
};

struct AuxSlot {
    bool selected = false;
    TrainingPair pair;
    std::vector<BankEntry> entries;
};

}  // namespace

DistilledDataset distill(const DatasetManifest& target,
                         const DatasetManifest& aux, const DistillConfig& cfg) {
    validate_config(cfg);
    if (target.images.empty())
        throw Error("empty dataset: " + target.dataset_id);

    DistilledDataset out;
    out.config = cfg;
    out.target_id = target.dataset_id;
    out.aux_id = aux.dataset_id;

    const int nt = static_cast<int>(target.images.size());
    std::vector<TargetSlot> tslots(nt);
    std::vector<std::string> errors(nt);

    // Target phase 1: per-image stats and degraded pair.
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < nt; ++i) {
        try {
            const ManifestImage& mi = target.images[i];
            const Image img = load_image(mi.path);
            const Image luma = to_luma(img);
            TargetSlot& slot = tslots[i];
            for (auto [row, col] : grid_origins(img.height, img.width, cfg.patch_size))
                slot.stats.push_back(rect_luma_stats(luma, row, col, cfg.patch_size));
            const DegradedPair pair = degrade_pair(img, cfg.scale);
            slot.pair = TrainingPair{mi.id, target.dataset_id, pair.hr, pair.lr, "", ""};
        } catch (const std::exception& e) {
            errors[i] = std::string(target.images[i].path.string()) + ": " + e.what();
        }
    }
    for (int i = 0; i < nt; ++i)
        if (!errors[i].empty()) throw Error(errors[i]);

    std::vector<PatchStats> all_stats;
    for (const auto& s : tslots)
        all_stats.insert(all_stats.end(), s.stats.begin(), s.stats.end());
    if (all_stats.empty())
        throw Error("target dataset has no full patches at size " +
                    std::to_string(cfg.patch_size));

    NoiseBank& bank = out.bank;
    bank.patch_size = cfg.patch_size;
    bank.bottom_frac = cfg.bottom_frac;
    bank.cati = compute_cati(all_stats, cfg.bottom_frac);
    bank.source_datasets = {target.dataset_id};

    // Target phase 2: admit CATI-matching patches.
    std::vector<std::vector<BankEntry>> target_entries(nt);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < nt; ++i) {
        try {
            const ManifestImage& mi = target.images[i];
            const Image img = load_image(mi.path);
            const Image luma = to_luma(img);
            const std::string source_id = target.dataset_id + "/" + mi.id;
            for (auto [row, col] : grid_origins(img.height, img.width, cfg.patch_size)) {
                const PatchStats st = rect_luma_stats(luma, row, col, cfg.patch_size);
                if (classify_patch(st, bank.cati) != PatchClass::Noise) continue;
                BankEntry e;
                e.stats = st;
                e.source_id = source_id;
                e.row = row;
                e.col = col;
                e.pixels = extract_patch(img, row, col, cfg.patch_size).pixels;
                target_entries[i].push_back(std::move(e));
            }
        } catch (const std::exception& e) {
            errors[i] = std::string(target.images[i].path.string()) + ": " + e.what();
        }
    }
    for (int i = 0; i < nt; ++i)
        if (!errors[i].empty()) throw Error(errors[i]);

    // Auxiliary phase: an image is kept iff at least one grid patch matches
    // the target CATI; only its matching patches enter the merged bank.
    const int na = static_cast<int>(aux.images.size());
    std::vector<AuxSlot> aslots(na);
    std::vector<std::string> aerrors(na);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < na; ++i) {
        try {
            const ManifestImage& mi = aux.images[i];
            const Image img = load_image(mi.path);
            const Image luma = to_luma(img);
            const std::string source_id = aux.dataset_id + "/" + mi.id;
            AuxSlot& slot = aslots[i];
            for (auto [row, col] : grid_origins(img.height, img.width, cfg.patch_size)) {
                const PatchStats st = rect_luma_stats(luma, row, col, cfg.patch_size);
                if (classify_patch(st, bank.cati) != PatchClass::Noise) continue;
                BankEntry e;
                e.stats = st;
                e.source_id = source_id;
                e.row = row;
                e.col = col;
                e.pixels = extract_patch(img, row, col, cfg.patch_size).pixels;
                slot.entries.push_back(std::move(e));
            }
            if (!slot.entries.empty()) {
                slot.selected = true;
                const DegradedPair pair = degrade_pair(img, cfg.scale);
                slot.pair =
                    TrainingPair{mi.id, aux.dataset_id, pair.hr, pair.lr, "", ""};
            }
        } catch (const std::exception& e) {
            aerrors[i] = std::string(aux.images[i].path.string()) + ": " + e.what();
        }
    }
    for (int i = 0; i < na; ++i)
        if (!aerrors[i].empty()) throw Error(aerrors[i]);

    // Deterministic ordered merge: target pairs first, then selected
    // auxiliary pairs, each in manifest order.
    for (auto& s : tslots) out.pairs.push_back(std::move(s.pair));
    bool aux_contributed = false;
    for (auto& s : aslots) {
        if (!s.selected) continue;
        out.pairs.push_back(std::move(s.pair));
        aux_contributed = true;
    }
    for (auto& v : target_entries)
        for (auto& e : v) bank.entries.push_back(std::move(e));
    for (auto& s : aslots)
        for (auto& e : s.entries) bank.entries.push_back(std::move(e));
    std::sort(bank.entries.begin(), bank.entries.end(), entry_order);
    for (size_t i = 0; i < bank.entries.size(); ++i)
        bank.entries[i].file_name = entry_file_name(i);
    if (aux_contributed) bank.source_datasets.push_back(aux.dataset_id);
    return out;
}

std::filesystem::path emit_pairs(DistilledDataset& d,
                                 const std::filesystem::path& out_dir,
                                 bool inject, uint64_t seed) {
    std::filesystem::create_directories(out_dir / "hr");
    std::filesystem::create_directories(out_dir / "lr");

    const int n = static_cast<int>(d.pairs.size());
    std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        try {
            TrainingPair& p = d.pairs[i];
            const std::string stem =
                sanitize(p.origin_dataset) + "_" + sanitize(p.image_id) + ".png";
            p.hr_path = "hr/" + stem;
            p.lr_path = "lr/" + stem;
            save_image(p.hr, out_dir / p.hr_path);
            if (inject) {
                const std::string key = p.origin_dataset + "/" + p.image_id;
                const Patch noise =
                    sample_noise(d.bank, derive_seed(seed, key, 0));
                const Image lr = inject_noise(p.lr, noise, derive_seed(seed, key, 1));
                save_image(lr, out_dir / p.lr_path);
            } else {
                save_image(p.lr, out_dir / p.lr_path);
            }
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (int i = 0; i < n; ++i)
        if (!errors[i].empty()) throw Error(errors[i]);

    nlohmann::ordered_json j;
    j["version"] = 1;
    j["config"] = {{"scale", d.config.scale},
                   {"patch_size", d.config.patch_size},
                   {"bottom_frac", d.config.bottom_frac},
                   {"seed", d.config.seed},
                   {"inject", inject}};
    j["target_dataset"] = d.target_id;
    j["aux_dataset"] = d.aux_id;
    auto pairs = nlohmann::ordered_json::array();
    for (const auto& p : d.pairs) {
        pairs.push_back({{"id", p.image_id},
                         {"origin_dataset", p.origin_dataset},
                         {"hr", p.hr_path},
                         {"lr", p.lr_path}});
    }
    j["pairs"] = std::move(pairs);

    const auto manifest_path = out_dir / "pairs.json";
    std::ofstream out(manifest_path, std::ios::trunc);
    if (!out) throw Error("unwritable path: " + manifest_path.string());
    out << j.dump(2) << "\n";
    if (!out) throw Error("write failed: " + manifest_path.string());
    return manifest_path;
}

}  // namespace ngdc
