#include "ngdc/resize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ngdc/error.hpp"

namespace ngdc {

namespace {

// Catmull-Rom cubic (a = -0.5).
double cubic_kernel(double t) {
    const double at = std::abs(t);
    if (at <= 1.0) return (1.5 * at - 2.5) * at * at + 1.0;
    if (at < 2.0) return ((-0.5 * at + 2.5) * at - 4.0) * at + 2.0;
    return 0.0;
}

// Window sum folding outermost-pair-first. A mirrored tap window is the
// reversed array; pair sums commute, so mirrored inputs fold to bit-equal
// results.
double symmetric_fold(const double* v, int n) {
    double s = 0.0;
    for (int k = 0; k < n / 2; ++k) s += v[k] + v[n - 1 - k];
    if (n & 1) s += v[n / 2];
    return s;
}

struct TapSet {
    int first = 0;               // first source index (pre-clamp)
    std::vector<double> weight;  // normalized, contiguous from `first`
};

// 1-D tap plan for one axis. The kernel argument for output index x and
// source index j is the exact rational
//   t = ((2j+1)*dst - (2x+1)*src) / (2*max(src,dst)),
// which folds the center-aligned mapping and the anti-aliasing ratio into
// one integer numerator. Taps satisfy |t| < 2 strictly.
std::vector<TapSet> make_taps(int src, int dst) {
    const int64_t denom = 2ll * std::max(src, dst);
    const double scale = src > dst ? static_cast<double>(src) / dst : 1.0;
    const double ratio = static_cast<double>(src) / dst;
    std::vector<TapSet> taps(dst);
    std::vector<double> raw;
    for (int x = 0; x < dst; ++x) {
        const double center = (x + 0.5) * ratio - 0.5;
        int lo = static_cast<int>(std::floor(center - 2.0 * scale)) - 1;
        int hi = static_cast<int>(std::ceil(center + 2.0 * scale)) + 1;
        const auto numer = [&](int j) {
            return (2ll * j + 1) * dst - (2ll * x + 1) * src;
        };
        while (lo <= hi && std::llabs(numer(lo)) >= 2 * denom) ++lo;
        while (hi >= lo && std::llabs(numer(hi)) >= 2 * denom) --hi;
        raw.clear();
        for (int j = lo; j <= hi; ++j)
            raw.push_back(cubic_kernel(static_cast<double>(numer(j)) /
                                       static_cast<double>(denom)));
        const double sum = symmetric_fold(raw.data(), static_cast<int>(raw.size()));
        TapSet& t = taps[x];
        t.first = lo;
        t.weight.resize(raw.size());
        for (size_t k = 0; k < raw.size(); ++k) t.weight[k] = raw[k] / sum;
    }
    return taps;
}

int clamp_index(int j, int n) { return j < 0 ? 0 : (j >= n ? n - 1 : j); }

}  // namespace

Image bicubic_resize(const Image& img, int target_h, int target_w) {
    if (img.height <= 0 || img.width <= 0)
        throw Error("bicubic_resize: empty source image");
    if (target_h < 1 || target_w < 1)
        throw Error("bicubic_resize: zero-sized target " +
                    std::to_string(target_h) + "x" + std::to_string(target_w));

    const int c = img.channels;
    const auto htaps = make_taps(img.width, target_w);
    const auto vtaps = make_taps(img.height, target_h);
    size_t max_taps = 1;
    for (const auto& t : htaps) max_taps = std::max(max_taps, t.weight.size());
    for (const auto& t : vtaps) max_taps = std::max(max_taps, t.weight.size());

    // Horizontal pass into a double intermediate (unclamped), then vertical.
    std::vector<double> mid(static_cast<size_t>(img.height) * target_w * c);
#pragma omp parallel
    {
        std::vector<double> acc(max_taps);
#pragma omp for schedule(static)
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < target_w; ++x) {
                const TapSet& t = htaps[x];
                const int n = static_cast<int>(t.weight.size());
                for (int ch = 0; ch < c; ++ch) {
                    for (int k = 0; k < n; ++k) {
                        const int j = clamp_index(t.first + k, img.width);
                        acc[k] = t.weight[k] * img.at(y, j, ch);
                    }
                    mid[(static_cast<size_t>(y) * target_w + x) * c + ch] =
                        symmetric_fold(acc.data(), n);
                }
            }
        }
    }

    Image out(target_h, target_w, c);
#pragma omp parallel
    {
        std::vector<double> acc(max_taps);
#pragma omp for schedule(static)
        for (int y = 0; y < target_h; ++y) {
            const TapSet& t = vtaps[y];
            const int n = static_cast<int>(t.weight.size());
            for (int x = 0; x < target_w; ++x) {
                for (int ch = 0; ch < c; ++ch) {
                    for (int k = 0; k < n; ++k) {
                        const int j = clamp_index(t.first + k, img.height);
                        acc[k] = t.weight[k] *
                                 mid[(static_cast<size_t>(j) * target_w + x) * c + ch];
                    }
                    const double v = symmetric_fold(acc.data(), n);
                    out.at(y, x, ch) =
                        static_cast<float>(std::clamp(v, 0.0, 1.0));
                }
            }
        }
    }
    return out;
}

DegradedPair degrade_pair(const Image& src, int k) {
    if (k < 1) throw Error("degrade_pair: scale factor must be >= 1");
    const int h1 = src.height / k;
    const int w1 = src.width / k;
    if (h1 < 1 || w1 < 1)
        throw Error("degrade_pair: first level would be empty (" +
                    std::to_string(src.height) + "x" + std::to_string(src.width) +
                    " at scale " + std::to_string(k) + ")");
    DegradedPair pair;
    pair.hr = bicubic_resize(src, h1, w1);
    const int h2 = h1 / k;
    const int w2 = w1 / k;
    if (h2 < 1 || w2 < 1)
        throw Error("degrade_pair: second level would be empty");
    pair.lr = bicubic_resize(pair.hr, h2, w2);
    return pair;
}

}  // namespace ngdc
