#pragma once

#include "ngdc/image.hpp"

namespace ngdc {

// Separable cubic convolution with Catmull-Rom coefficient a = -0.5.
// Source coordinates use the center-aligned mapping
//   src = (dst + 0.5) * (src_len / dst_len) - 0.5.
// For downscaling the kernel support is widened by the scale ratio
// (anti-aliasing); weights are renormalized to sum to 1 per output sample.
// Out-of-range taps clamp to the border pixel; output is clamped to [0,1].
//
// Kernel arguments are formed from exact integer numerators and window sums
// use symmetric pair folding, so mirroring the input mirrors the output
// bit-for-bit.
Image bicubic_resize(const Image& img, int target_h, int target_w);

struct DegradedPair {
    Image hr;
    Image lr;
};

// Two successive downscales by k (floor-divided dims): src -> hr -> lr,
// with lr dims taken from hr's dims. Throws if a level would be empty.
DegradedPair degrade_pair(const Image& src, int k);

}  // namespace ngdc
