#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ngdc/image.hpp"
#include "ngdc/manifest.hpp"
#include "ngdc/patch.hpp"

namespace ngdc {

// Paired closed admission intervals over patch variance and mean.
struct Cati {
    double sigma_lo = 0.0;
    double sigma_hi = 0.0;
    double mean_lo = 0.0;
    double mean_hi = 0.0;
};

enum class PatchClass { Noise, Noiseless };

struct BankEntry {
    std::string file_name;  // relative to the bank's patches/ directory
    PatchStats stats;
    std::string source_id;
    int row = 0;
    int col = 0;
    Image pixels;
};

// Persisted set of admitted noise patches. Entries are sorted
// lexicographically by (source_id, row, col) so builds are deterministic.
struct NoiseBank {
    int patch_size = 0;
    double bottom_frac = 0.0;
    Cati cati;
    std::vector<BankEntry> entries;
    std::vector<std::string> source_datasets;
};

// Number of entries selected for CATI estimation: max(1, ceil(frac * P)).
// ceil is evaluated with a 1e-9 slack so decimal fractions keep their
// intended value (0.02 * 50 must select 1, not 2).
size_t cati_selection_count(size_t population, double bottom_frac);

// Selects the lowest-variance patches (ties broken by smaller mean, then by
// input index), drops zero-mean entries, and spans the survivors' variance
// and mean ranges. Throws "empty CATI" when nothing survives.
Cati compute_cati(const std::vector<PatchStats>& stats, double bottom_frac);

// Noise iff both statistics lie inside the closed intervals.
PatchClass classify_patch(const PatchStats& stats, const Cati& cati);

// Two passes over the manifest: pass 1 derives the CATI from every grid
// patch, pass 2 re-scans and admits every patch classified Noise.
// Entry source ids are "<dataset_id>/<image_id>".
NoiseBank build_bank(const DatasetManifest& manifest, int patch_size,
                     double bottom_frac);

// Uniform seeded choice over entries; same seed, same entry.
Patch sample_noise(const NoiseBank& bank, uint64_t seed);

// Adds the patch's zero-mean residual (per channel) to lr, tiled with a
// seeded phase offset in [0,s)^2 (row offset drawn first), and clamps to
// [0,1]. A 1-channel patch broadcasts across lr's channels.
Image inject_noise(const Image& lr, const Patch& n, uint64_t seed);

// Directory layout: bank.json + patches/NNNNNN.pat (see tensor.hpp for the
// patch container format). Stats are serialized as decimal strings that
// round-trip doubles exactly.
void save_bank(const NoiseBank& bank, const std::filesystem::path& dir);
NoiseBank load_bank(const std::filesystem::path& dir);

}  // namespace ngdc
