#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ngdc/image.hpp"

namespace ngdc {

// One s x s tile of a source image. origin (row, col) is a multiple of the
// patch size in each axis.
struct Patch {
    Image pixels;
    std::string source_id;
    int row = 0;
    int col = 0;
};

// Per-patch luma statistics. sigma is the population variance (divide by
// s^2), so sigma <= 0.25 for values in [0,1].
struct PatchStats {
    double sigma = 0.0;
    double mean = 0.0;
};

// Grid origins at stride s, row-major; trailing partial tiles are dropped.
std::vector<std::pair<int, int>> grid_origins(int height, int width, int s);

// Non-overlapping tiling of img at stride s, row-major order.
// s >= 2 required; a patch size exceeding the image yields an empty list.
std::vector<Patch> extract_patch_grid(const Image& img, int s,
                                      const std::string& source_id = "");

Patch extract_patch(const Image& img, int row, int col, int s,
                    const std::string& source_id = "");

// Statistics of an s x s rectangle of a 1-channel luma image. Used by the
// pipeline passes so luma is converted once per image; patch_stats routes
// through this, keeping the two paths bit-identical.
PatchStats rect_luma_stats(const Image& luma, int row, int col, int s);

PatchStats patch_stats(const Patch& p);

}  // namespace ngdc
