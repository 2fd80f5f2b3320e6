#pragma once

#include <vector>

#include "ngdc/image.hpp"
#include "ngdc/manifest.hpp"
#include "ngdc/noise_bank.hpp"
#include "ngdc/patch.hpp"
#include "ngdc/pipeline.hpp"
#include "ngdc/tensor.hpp"

// Serial reference implementations: direct, definition-level evaluations
// kept independent of the parallel kernels they check. The test suites use
// them as oracles and the benchmark target compares against them.
namespace ngdc::ref {

// Non-separable resampler: every output pixel is a plain 2D weighted sum
// over the widened kernel support with border clamping and per-sample
// renormalization.
Image bicubic_resize_dense(const Image& img, int target_h, int target_w);

// Two-pass statistics: mean first, then mean squared deviation.
PatchStats two_pass_stats(const Patch& p);

// Full stable sort by (sigma, mean), slice, filter, span.
Cati compute_cati_sorted(const std::vector<PatchStats>& stats,
                         double bottom_frac);

// Explicit tile placement: copies of the zero-mean residual laid out from
// (-off_row, -off_col) at stride s, cropped at the borders, added, clamped.
Image inject_tiled(const Image& lr, const Image& patch, int off_row,
                   int off_col);

double mse(const Image& a, const Image& b);

// Direct sliding-window SSIM, one 11x11 weighted pass per valid position.
double ssim_windowed(const Image& a, const Image& b);

// Straight-line serial re-implementation of the collection algorithm:
// simple loops, no phases, no parallelism. Selection, merging and ordering
// logic is written out independently of distill().
DistilledDataset distill_straightline(const DatasetManifest& target,
                                      const DatasetManifest& aux,
                                      const DistillConfig& cfg);

// Extended-precision (long double) softmax for oracle comparisons.
Tensor3 softmax_longdouble(const Tensor3& m);

}  // namespace ngdc::ref
