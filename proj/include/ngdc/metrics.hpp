#pragma once

#include "ngdc/image.hpp"

namespace ngdc {

// Fidelity report for one image pair. psnr_db is +infinity when the images
// are identical.
struct MetricReport {
    double psnr_db = 0.0;
    double ssim = 0.0;
};

// 10*log10(1 / MSE) with peak 1.0; MSE is taken over all channels (RGB when
// present). Returns +infinity for MSE = 0.
double psnr(const Image& a, const Image& b);

// Both metrics for one pair.
MetricReport evaluate_pair(const Image& a, const Image& b);

// Luma-channel SSIM: 11x11 Gaussian window, sigma 1.5, K1 = 0.01, K2 = 0.03,
// peak 1.0, averaged over valid window positions. Requires min dim >= 11.
double ssim(const Image& a, const Image& b);

}  // namespace ngdc
