#include "ngdc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ngdc/error.hpp"

namespace ngdc {

namespace {

constexpr int kWindow = 11;
constexpr int kRadius = kWindow / 2;
constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;  // (K2 * L)^2

// Normalized 1-D Gaussian taps, sigma 1.5. The 2-D window is the outer
// product, which is itself normalized.
std::vector<double> gaussian_taps() {
    std::vector<double> g(kWindow);
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kRadius;
        g[i] = std::exp(-(d * d) / (2.0 * 1.5 * 1.5));
        sum += g[i];
    }
    for (double& v : g) v /= sum;
    return g;
}

// Separable valid-region Gaussian filter: horizontal then vertical.
// in: h x w, out: (h - 10) x (w - 10).
std::vector<double> gauss_valid(const std::vector<double>& in, int h, int w,
                                const std::vector<double>& taps) {
    const int wv = w - kWindow + 1;
    const int hv = h - kWindow + 1;
    std::vector<double> mid(static_cast<size_t>(h) * wv);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < wv; ++x) {
            double s = 0.0;
            for (int k = 0; k < kWindow; ++k) s += taps[k] * in[y * w + x + k];
            mid[static_cast<size_t>(y) * wv + x] = s;
        }
    }
    std::vector<double> out(static_cast<size_t>(hv) * wv);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < hv; ++y) {
        for (int x = 0; x < wv; ++x) {
            double s = 0.0;
            for (int k = 0; k < kWindow; ++k)
                s += taps[k] * mid[static_cast<size_t>(y + k) * wv + x];
            out[static_cast<size_t>(y) * wv + x] = s;
        }
    }
    return out;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
    if (a.height != b.height || a.width != b.width || a.channels != b.channels)
        throw Error("psnr: shape mismatch");
    const size_t row_len = static_cast<size_t>(a.width) * a.channels;
    std::vector<double> row_sum(a.height, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < a.height; ++y) {
        const float* pa = a.data.data() + y * row_len;
        const float* pb = b.data.data() + y * row_len;
        double s = 0.0;
        for (size_t i = 0; i < row_len; ++i) {
            const double d = static_cast<double>(pa[i]) - pb[i];
            s += d * d;
        }
        row_sum[y] = s;
    }
    double total = 0.0;
    for (double s : row_sum) total += s;
    const double mse = total / static_cast<double>(a.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(mse);
}

MetricReport evaluate_pair(const Image& a, const Image& b) {
    return MetricReport{psnr(a, b), ssim(a, b)};
}

double ssim(const Image& a, const Image& b) {
    if (a.height != b.height || a.width != b.width || a.channels != b.channels)
        throw Error("ssim: shape mismatch");
    if (a.height < kWindow || a.width < kWindow)
        throw Error("ssim: image smaller than the 11x11 window");

    const Image la = to_luma(a);
    const Image lb = to_luma(b);
    const int h = la.height, w = la.width;
    const size_t count = static_cast<size_t>(h) * w;
    std::vector<double> xa(count), xb(count), xaa(count), xbb(count), xab(count);
    for (size_t i = 0; i < count; ++i) {
        const double va = la.data[i];
        const double vb = lb.data[i];
        xa[i] = va;
        xb[i] = vb;
        xaa[i] = va * va;
        xbb[i] = vb * vb;
        xab[i] = va * vb;
    }

    const auto taps = gaussian_taps();
    const auto mu_a = gauss_valid(xa, h, w, taps);
    const auto mu_b = gauss_valid(xb, h, w, taps);
    const auto s_aa = gauss_valid(xaa, h, w, taps);
    const auto s_bb = gauss_valid(xbb, h, w, taps);
    const auto s_ab = gauss_valid(xab, h, w, taps);

    const int hv = h - kWindow + 1;
    const int wv = w - kWindow + 1;
    std::vector<double> row_sum(hv, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < hv; ++y) {
        double s = 0.0;
        for (int x = 0; x < wv; ++x) {
            const size_t i = static_cast<size_t>(y) * wv + x;
            const double ma = mu_a[i];
            const double mb = mu_b[i];
            const double var_a = s_aa[i] - ma * ma;
            const double var_b = s_bb[i] - mb * mb;
            const double cov = s_ab[i] - ma * mb;
            const double num = (2.0 * ma * mb + kC1) * (2.0 * cov + kC2);
            const double den = (ma * ma + mb * mb + kC1) * (var_a + var_b + kC2);
            s += num / den;
        }
        row_sum[y] = s;
    }
    double total = 0.0;
    for (double s : row_sum) total += s;
    return total / (static_cast<double>(hv) * wv);
}

}  // namespace ngdc
