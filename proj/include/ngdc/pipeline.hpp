#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ngdc/manifest.hpp"
#include "ngdc/noise_bank.hpp"
#include "ngdc/resize.hpp"

namespace ngdc {

struct TrainingPair {
    std::string image_id;
    std::string origin_dataset;
    Image hr;
    Image lr;
    // Relative to the emission directory; filled by emit_pairs.
    std::string hr_path;
    std::string lr_path;
};

struct DistillConfig {
    int scale = 4;
    int patch_size = 64;
    double bottom_frac = 0.02;
    uint64_t seed = 0;
};

struct DistilledDataset {
    std::vector<TrainingPair> pairs;  // target first, then auxiliary, manifest order
    NoiseBank bank;                   // merged; CATI fixed by the target
    DistillConfig config;
    std::string target_id;
    std::string aux_id;  // empty when no auxiliary dataset was given
};

// Full collection pass: degrade every target image, derive the target CATI
// and bank, then distill the auxiliary set — an auxiliary image joins the
// output iff at least one of its grid patches matches the target CATI, and
// exactly its matching patches join the merged bank. Per-image I/O errors
// abort the run.
DistilledDataset distill(const DatasetManifest& target,
                         const DatasetManifest& aux, const DistillConfig& cfg);

// Writes hr/ and lr/ PNGs plus pairs.json into out_dir and returns the
// manifest path. When inject is set, each LR image first receives bank noise
// under a per-image sub-seed derived from (seed, image id).
std::filesystem::path emit_pairs(DistilledDataset& d,
                                 const std::filesystem::path& out_dir,
                                 bool inject, uint64_t seed);

}  // namespace ngdc
