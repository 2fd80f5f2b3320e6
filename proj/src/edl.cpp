#include "ngdc/edl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ngdc/error.hpp"
#include "ngdc/rng.hpp"

namespace ngdc {

namespace {

constexpr double kLogFloor = 1e-12;

void require_same_shape(const Tensor3& a, const Tensor3& b, const char* who) {
    if (!a.same_shape(b)) throw Error(std::string(who) + ": shape mismatch");
}

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Mean of |a - b| accumulated row by row; the row partials are summed
// serially so the result is worker-count independent.
double mean_abs_diff(const Tensor3& a, const Tensor3& b) {
    std::vector<double> row_sum(a.height, 0.0);
    const size_t row_len = static_cast<size_t>(a.width) * a.channels;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < a.height; ++y) {
        const double* pa = a.data.data() + y * row_len;
        const double* pb = b.data.data() + y * row_len;
        double s = 0.0;
        for (size_t i = 0; i < row_len; ++i) s += std::abs(pa[i] - pb[i]);
        row_sum[y] = s;
    }
    double total = 0.0;
    for (double s : row_sum) total += s;
    return total / static_cast<double>(a.size());
}

double uniform_pm(std::mt19937_64& eng, double lo, double hi) {
    const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

}  // namespace

void Mask::validate() const {
    values.validate_finite();
    for (double v : values.data)
        if (!(v > 0.0 && v < 1.0))
            throw Error("mask: value outside the open interval (0,1)");
}

Mask softmax_mask(const Tensor3& m) {
    m.validate_finite();
    if (m.channels < 2) throw Error("softmax_mask: needs at least 2 channels");
    Mask out;
    out.values = Tensor3(m.height, m.width, m.channels);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            double zmax = m.at(y, x, 0);
            for (int c = 1; c < m.channels; ++c) zmax = std::max(zmax, m.at(y, x, c));
            double sum = 0.0;
            for (int c = 0; c < m.channels; ++c) {
                const double e = std::exp(m.at(y, x, c) - zmax);
                out.values.at(y, x, c) = e;
                sum += e;
            }
            for (int c = 0; c < m.channels; ++c) out.values.at(y, x, c) /= sum;
        }
    }
    return out;
}

Tensor3 softmax_mask_jvp(const Tensor3& m, const Tensor3& v) {
    require_same_shape(m, v, "softmax_mask_jvp");
    const Mask s = softmax_mask(m);
    Tensor3 out(m.height, m.width, m.channels);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            double dot = 0.0;
            for (int c = 0; c < m.channels; ++c)
                dot += s.values.at(y, x, c) * v.at(y, x, c);
            for (int c = 0; c < m.channels; ++c)
                out.at(y, x, c) = s.values.at(y, x, c) * (v.at(y, x, c) - dot);
        }
    }
    return out;
}

Mask complement_mask(const Mask& m_alpha) {
    Mask out;
    out.values = Tensor3(m_alpha.values.height, m_alpha.values.width,
                         m_alpha.values.channels);
    for (size_t i = 0; i < m_alpha.values.data.size(); ++i)
        out.values.data[i] = 1.0 - m_alpha.values.data[i];
    return out;
}

LossGrad pixel_loss(const Tensor3& sr, const Tensor3& hr) {
    require_same_shape(sr, hr, "pixel_loss");
    LossGrad r;
    r.value = mean_abs_diff(sr, hr);
    r.grad = Tensor3(sr.height, sr.width, sr.channels);
    const double inv_n = 1.0 / static_cast<double>(sr.size());
    for (size_t i = 0; i < sr.data.size(); ++i) {
        const double d = sr.data[i] - hr.data[i];
        r.grad.data[i] = d > 0.0 ? inv_n : (d < 0.0 ? -inv_n : 0.0);
    }
    return r;
}

LossGrad perceptual_loss(const Tensor3& sr, const Tensor3& hr,
                         const FeatureExtractor& f) {
    require_same_shape(sr, hr, "perceptual_loss");
    const Tensor3 fs = f.apply(sr);
    const Tensor3 fh = f.apply(hr);
    LossGrad inner = pixel_loss(fs, fh);
    LossGrad r;
    r.value = inner.value;
    r.grad = f.vjp(sr, inner.grad);
    return r;
}

ScoreLossGrad adversarial_loss(std::span<const double> d_sr,
                               std::span<const double> d_hr) {
    if (d_sr.empty() || d_hr.empty())
        throw Error("adversarial_loss: empty score list");
    if (d_sr.size() != d_hr.size())
        throw Error("adversarial_loss: score lists differ in length");
    const size_t n = d_sr.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    double mean_sr = 0.0, mean_hr = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mean_sr += d_sr[i];
        mean_hr += d_hr[i];
    }
    mean_sr *= inv_n;
    mean_hr *= inv_n;

    ScoreLossGrad r;
    r.grad_sr.assign(n, 0.0);
    r.grad_hr.assign(n, 0.0);
    double loss = 0.0;
    double sum_sig_hr = 0.0;  // sum of sigmoid(d_hr[i] - mean_sr) over live terms
    double sum_sig_sr = 0.0;  // sum of 1 - sigmoid(d_sr[i] - mean_hr) over live terms
    std::vector<double> live_hr(n, 0.0), live_sr(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const double sig_hr = stable_sigmoid(d_hr[i] - mean_sr);
        const double p1 = 1.0 - sig_hr;
        loss += -std::log(std::max(p1, kLogFloor));
        if (p1 > kLogFloor) {
            live_hr[i] = sig_hr;
            sum_sig_hr += sig_hr;
        }
        const double sig_sr = stable_sigmoid(d_sr[i] - mean_hr);
        loss += -std::log(std::max(sig_sr, kLogFloor));
        if (sig_sr > kLogFloor) {
            live_sr[i] = 1.0 - sig_sr;
            sum_sig_sr += 1.0 - sig_sr;
        }
    }
    r.value = loss * inv_n;
    for (size_t i = 0; i < n; ++i) {
        r.grad_hr[i] = inv_n * live_hr[i] + inv_n * inv_n * sum_sig_sr;
        r.grad_sr[i] = -inv_n * live_sr[i] - inv_n * inv_n * sum_sig_hr;
    }
    return r;
}

CompositeLossGrad edl_composite_loss(const Tensor3& i_x, const Tensor3& i_y,
                                     const Mask& m_alpha, const Tensor3& hr,
                                     const FeatureExtractor& f,
                                     std::span<const double> d_sr,
                                     std::span<const double> d_hr) {
    require_same_shape(i_x, i_y, "edl_composite_loss");
    require_same_shape(i_x, hr, "edl_composite_loss");
    require_same_shape(i_x, m_alpha.values, "edl_composite_loss");
    m_alpha.validate();

    const Mask m_beta = complement_mask(m_alpha);
    CompositeLossGrad r;
    r.masked_x = Tensor3(i_x.height, i_x.width, i_x.channels);
    r.masked_y = Tensor3(i_x.height, i_x.width, i_x.channels);
    for (size_t i = 0; i < i_x.data.size(); ++i) {
        r.masked_x.data[i] = m_alpha.values.data[i] * i_x.data[i];
        r.masked_y.data[i] = m_beta.values.data[i] * i_y.data[i];
    }
    Tensor3 fused(i_x.height, i_x.width, i_x.channels);
    for (size_t i = 0; i < fused.data.size(); ++i)
        fused.data[i] = r.masked_x.data[i] + r.masked_y.data[i];

    const ScoreLossGrad adv = adversarial_loss(d_sr, d_hr);
    const LossGrad per = perceptual_loss(fused, hr, f);
    const LossGrad pix = pixel_loss(r.masked_y, hr);

    r.adversarial_term = adv.value;
    r.perceptual_term = per.value;
    r.pixel_term = pix.value;
    r.value = adv.value + per.value + pix.value;

    r.grad_ix = Tensor3(i_x.height, i_x.width, i_x.channels);
    r.grad_iy = Tensor3(i_x.height, i_x.width, i_x.channels);
    for (size_t i = 0; i < i_x.data.size(); ++i) {
        r.grad_ix.data[i] = m_alpha.values.data[i] * per.grad.data[i];
        r.grad_iy.data[i] =
            m_beta.values.data[i] * (per.grad.data[i] + pix.grad.data[i]);
    }
    return r;
}

LossGrad weighted_baseline_loss(const Tensor3& sr, const Tensor3& hr,
                                const LossWeights& w, const FeatureExtractor& f,
                                std::span<const double> d_sr,
                                std::span<const double> d_hr) {
    require_same_shape(sr, hr, "weighted_baseline_loss");
    if (w.alpha < 0.0 || w.beta < 0.0 || w.gamma < 0.0)
        throw Error("weighted_baseline_loss: negative weight");
    if (w.alpha == 0.0 && w.beta == 0.0 && w.gamma == 0.0)
        throw Error("weighted_baseline_loss: all weights zero");

    LossGrad r;
    r.grad = Tensor3(sr.height, sr.width, sr.channels);
    double value = 0.0;
    if (w.alpha > 0.0) value += w.alpha * adversarial_loss(d_sr, d_hr).value;
    if (w.beta > 0.0) {
        const LossGrad per = perceptual_loss(sr, hr, f);
        value += w.beta * per.value;
        for (size_t i = 0; i < r.grad.data.size(); ++i)
            r.grad.data[i] += w.beta * per.grad.data[i];
    }
    if (w.gamma > 0.0) {
        const LossGrad pix = pixel_loss(sr, hr);
        value += w.gamma * pix.value;
        for (size_t i = 0; i < r.grad.data.size(); ++i)
            r.grad.data[i] += w.gamma * pix.grad.data[i];
    }
    r.value = value;
    return r;
}

// --- ConvStackExtractor ---------------------------------------------------

namespace {

// 3x3 correlation with zero padding, channel mixing: out[o] += K[o][i] * in[i].
void conv3x3(const Tensor3& in, const std::vector<double>& k,
             const std::vector<double>& bias, Tensor3& out) {
    const int h = in.height, w = in.width, c = in.channels;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int co = 0; co < c; ++co) {
                double acc = bias[co];
                for (int ci = 0; ci < c; ++ci) {
                    for (int ky = 0; ky < 3; ++ky) {
                        const int sy = y + ky - 1;
                        if (sy < 0 || sy >= h) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int sx = x + kx - 1;
                            if (sx < 0 || sx >= w) continue;
                            acc += k[((co * c + ci) * 3 + ky) * 3 + kx] *
                                   in.at(sy, sx, ci);
                        }
                    }
                }
                out.at(y, x, co) = acc;
            }
        }
    }
}

// Transpose of conv3x3: scatters the cotangent back through the kernel.
void conv3x3_transpose(const Tensor3& cot, const std::vector<double>& k,
                       Tensor3& out) {
    const int h = cot.height, w = cot.width, c = cot.channels;
    std::fill(out.data.begin(), out.data.end(), 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int co = 0; co < c; ++co) {
                const double g = cot.at(y, x, co);
                if (g == 0.0) continue;
                for (int ci = 0; ci < c; ++ci) {
                    for (int ky = 0; ky < 3; ++ky) {
                        const int sy = y + ky - 1;
                        if (sy < 0 || sy >= h) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int sx = x + kx - 1;
                            if (sx < 0 || sx >= w) continue;
                            out.at(sy, sx, ci) +=
                                g * k[((co * c + ci) * 3 + ky) * 3 + kx];
                        }
                    }
                }
            }
        }
    }
}

Tensor3 tanh_map(const Tensor3& x) {
    Tensor3 out(x.height, x.width, x.channels);
    for (size_t i = 0; i < x.data.size(); ++i) out.data[i] = std::tanh(x.data[i]);
    return out;
}

}  // namespace

ConvStackExtractor::ConvStackExtractor(uint64_t seed, int channels)
    : channels_(channels) {
    if (channels < 1) throw Error("ConvStackExtractor: channels must be >= 1");
    auto eng = make_engine(mix64(seed));
    const size_t klen = static_cast<size_t>(channels) * channels * 9;
    const double scale = 1.0 / std::sqrt(9.0 * channels);
    w1_.resize(klen);
    w2_.resize(klen);
    b1_.resize(channels);
    b2_.resize(channels);
    for (auto& v : w1_) v = uniform_pm(eng, -1.0, 1.0) * scale;
    for (auto& v : b1_) v = uniform_pm(eng, -0.1, 0.1);
    for (auto& v : w2_) v = uniform_pm(eng, -1.0, 1.0) * scale;
    for (auto& v : b2_) v = uniform_pm(eng, -0.1, 0.1);
}

Tensor3 ConvStackExtractor::apply(const Tensor3& x) const {
    if (x.channels != channels_)
        throw Error("ConvStackExtractor: expected " + std::to_string(channels_) +
                    " channels, got " + std::to_string(x.channels));
    Tensor3 y1(x.height, x.width, x.channels);
    conv3x3(x, w1_, b1_, y1);
    const Tensor3 a1 = tanh_map(y1);
    Tensor3 y2(x.height, x.width, x.channels);
    conv3x3(a1, w2_, b2_, y2);
    return tanh_map(y2);
}

Tensor3 ConvStackExtractor::vjp(const Tensor3& x, const Tensor3& cotangent) const {
    if (x.channels != channels_ || !x.same_shape(cotangent))
        throw Error("ConvStackExtractor: vjp shape mismatch");
    Tensor3 y1(x.height, x.width, x.channels);
    conv3x3(x, w1_, b1_, y1);
    const Tensor3 a1 = tanh_map(y1);
    Tensor3 y2(x.height, x.width, x.channels);
    conv3x3(a1, w2_, b2_, y2);
    const Tensor3 out = tanh_map(y2);

    Tensor3 g2(x.height, x.width, x.channels);
    for (size_t i = 0; i < g2.data.size(); ++i)
        g2.data[i] = cotangent.data[i] * (1.0 - out.data[i] * out.data[i]);
    Tensor3 ga(x.height, x.width, x.channels);
    conv3x3_transpose(g2, w2_, ga);
    for (size_t i = 0; i < ga.data.size(); ++i)
        ga.data[i] *= 1.0 - a1.data[i] * a1.data[i];
    Tensor3 gx(x.height, x.width, x.channels);
    conv3x3_transpose(ga, w1_, gx);
    return gx;
}

// --- grad_check -------------------------------------------------------------

double grad_check(const std::function<double(std::span<const double>)>& loss,
                  std::span<const double> x0, std::span<const double> analytic,
                  double epsilon, uint64_t seed, size_t min_coords) {
    if (!(epsilon >= 1e-6 && epsilon <= 1e-3))
        throw Error("grad_check: epsilon must lie in [1e-6, 1e-3]");
    if (x0.size() != analytic.size())
        throw Error("grad_check: gradient length mismatch");
    if (x0.empty()) throw Error("grad_check: empty input");

    std::vector<size_t> coords(x0.size());
    std::iota(coords.begin(), coords.end(), size_t{0});
    if (coords.size() > min_coords) {
        auto eng = make_engine(seed);
        for (size_t i = 0; i < min_coords; ++i) {
            const size_t j = i + bounded(eng, coords.size() - i);
            std::swap(coords[i], coords[j]);
        }
        coords.resize(min_coords);
    }

    std::vector<double> x(x0.begin(), x0.end());
    double max_rel = 0.0;
    for (size_t idx : coords) {
        const double saved = x[idx];
        x[idx] = saved + epsilon;
        const double f_plus = loss(x);
        x[idx] = saved - epsilon;
        const double f_minus = loss(x);
        x[idx] = saved;
        if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
            throw Error("grad_check: non-finite loss at perturbed point");
        const double numeric = (f_plus - f_minus) / (2.0 * epsilon);
        const double a = analytic[idx];
        const double rel = std::abs(a - numeric) /
                           std::max({std::abs(a), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

}  // namespace ngdc
