#include "ngdc/gradient_suite.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "ngdc/edl.hpp"
#include "ngdc/error.hpp"
#include "ngdc/rng.hpp"
#include "ngdc/tensor.hpp"

namespace ngdc {

namespace {

constexpr double kEps = 1e-5;

double uniform(std::mt19937_64& eng, double lo, double hi) {
    const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

Tensor3 random_tensor(std::mt19937_64& eng, int h, int w, int c, double lo,
                      double hi) {
    Tensor3 t(h, w, c);
    for (auto& v : t.data) v = uniform(eng, lo, hi);
    return t;
}

// Counterpart tensor with every element pushed a macroscopic distance away,
// keeping L1 terms clear of the sign boundary during FD probing.
Tensor3 offset_tensor(std::mt19937_64& eng, const Tensor3& base) {
    Tensor3 t(base.height, base.width, base.channels);
    for (size_t i = 0; i < t.data.size(); ++i) {
        const double gap = uniform(eng, 0.05, 0.3);
        t.data[i] = base.data[i] + (eng() & 1 ? gap : -gap);
    }
    return t;
}

double min_abs_gap(const Tensor3& a, const Tensor3& b) {
    double m = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < a.data.size(); ++i)
        m = std::min(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

struct Dims {
    int h, w, c;
};

Dims pick_dims(std::mt19937_64& eng) {
    return {4 + static_cast<int>(bounded(eng, 4)),
            4 + static_cast<int>(bounded(eng, 4)), 3};
}

std::vector<double> random_scores(std::mt19937_64& eng, size_t n) {
    std::vector<double> s(n);
    for (auto& v : s) v = uniform(eng, -2.0, 2.0);
    return s;
}

double check_pixel(uint64_t seed) {
    auto eng = make_engine(seed);
    const Dims d = pick_dims(eng);
    const Tensor3 hr = random_tensor(eng, d.h, d.w, d.c, 0.0, 1.0);
    const Tensor3 sr = offset_tensor(eng, hr);
    const LossGrad g = pixel_loss(sr, hr);
    const auto loss = [&](std::span<const double> x) {
        Tensor3 t(d.h, d.w, d.c);
        std::copy(x.begin(), x.end(), t.data.begin());
        return pixel_loss(t, hr).value;
    };
    return grad_check(loss, sr.data, g.grad.data, kEps, mix64(seed));
}

double check_perceptual(uint64_t seed, bool identity) {
    auto eng = make_engine(seed);
    const Dims d = pick_dims(eng);
    const IdentityExtractor ident;
    const ConvStackExtractor conv(seed ^ 0x5eedf00dull, d.c);
    const FeatureExtractor& f =
        identity ? static_cast<const FeatureExtractor&>(ident) : conv;

    // Resample until the feature-space gaps stay clear of the L1 kink.
    Tensor3 hr, sr;
    for (int attempt = 0;; ++attempt) {
        if (attempt > 64) throw Error("gradient suite: no well-posed instance");
        hr = random_tensor(eng, d.h, d.w, d.c, 0.0, 1.0);
        sr = offset_tensor(eng, hr);
        if (min_abs_gap(f.apply(sr), f.apply(hr)) > 1e-3) break;
    }
    const LossGrad g = perceptual_loss(sr, hr, f);
    const auto loss = [&](std::span<const double> x) {
        Tensor3 t(d.h, d.w, d.c);
        std::copy(x.begin(), x.end(), t.data.begin());
        return perceptual_loss(t, hr, f).value;
    };
    return grad_check(loss, sr.data, g.grad.data, kEps, mix64(seed));
}

double check_adversarial(uint64_t seed) {
    auto eng = make_engine(seed);
    const size_t n = 4 + bounded(eng, 6);
    const std::vector<double> d_sr = random_scores(eng, n);
    const std::vector<double> d_hr = random_scores(eng, n);
    const ScoreLossGrad g = adversarial_loss(d_sr, d_hr);

    std::vector<double> x(d_sr);
    x.insert(x.end(), d_hr.begin(), d_hr.end());
    std::vector<double> analytic(g.grad_sr);
    analytic.insert(analytic.end(), g.grad_hr.begin(), g.grad_hr.end());
    const auto loss = [n](std::span<const double> v) {
        return adversarial_loss(v.subspan(0, n), v.subspan(n)).value;
    };
    return grad_check(loss, x, analytic, kEps, mix64(seed));
}

double check_composite(uint64_t seed) {
    auto eng = make_engine(seed);
    const Dims d = pick_dims(eng);
    const ConvStackExtractor f(seed ^ 0xc0ffeeull, d.c);
    const Mask m = softmax_mask(random_tensor(eng, d.h, d.w, d.c, -1.5, 1.5));
    const std::vector<double> d_sr = random_scores(eng, 6);
    const std::vector<double> d_hr = random_scores(eng, 6);

    Tensor3 hr, i_x, i_y;
    for (int attempt = 0;; ++attempt) {
        if (attempt > 64) throw Error("gradient suite: no well-posed instance");
        hr = random_tensor(eng, d.h, d.w, d.c, 0.0, 1.0);
        i_x = random_tensor(eng, d.h, d.w, d.c, -1.0, 2.0);
        i_y = random_tensor(eng, d.h, d.w, d.c, -1.0, 2.0);
        const CompositeLossGrad probe =
            edl_composite_loss(i_x, i_y, m, hr, f, d_sr, d_hr);
        Tensor3 fused(d.h, d.w, d.c);
        for (size_t i = 0; i < fused.data.size(); ++i)
            fused.data[i] = probe.masked_x.data[i] + probe.masked_y.data[i];
        if (min_abs_gap(f.apply(fused), f.apply(hr)) > 1e-3 &&
            min_abs_gap(probe.masked_y, hr) > 1e-3)
            break;
    }
    const CompositeLossGrad g = edl_composite_loss(i_x, i_y, m, hr, f, d_sr, d_hr);

    const size_t len = i_x.data.size();
    std::vector<double> x(i_x.data);
    x.insert(x.end(), i_y.data.begin(), i_y.data.end());
    std::vector<double> analytic(g.grad_ix.data);
    analytic.insert(analytic.end(), g.grad_iy.data.begin(), g.grad_iy.data.end());
    const auto loss = [&, len](std::span<const double> v) {
        Tensor3 tx(d.h, d.w, d.c), ty(d.h, d.w, d.c);
        std::copy(v.begin(), v.begin() + len, tx.data.begin());
        std::copy(v.begin() + len, v.end(), ty.data.begin());
        return edl_composite_loss(tx, ty, m, hr, f, d_sr, d_hr).value;
    };
    return grad_check(loss, x, analytic, kEps, mix64(seed), 128);
}

double check_baseline(uint64_t seed) {
    auto eng = make_engine(seed);
    const Dims d = pick_dims(eng);
    const ConvStackExtractor f(seed ^ 0xba5e11ull, d.c);
    const LossWeights w{uniform(eng, 0.2, 1.5), uniform(eng, 0.2, 1.5),
                        uniform(eng, 0.2, 1.5)};
    const std::vector<double> d_sr = random_scores(eng, 5);
    const std::vector<double> d_hr = random_scores(eng, 5);

    Tensor3 hr, sr;
    for (int attempt = 0;; ++attempt) {
        if (attempt > 64) throw Error("gradient suite: no well-posed instance");
        hr = random_tensor(eng, d.h, d.w, d.c, 0.0, 1.0);
        sr = offset_tensor(eng, hr);
        if (min_abs_gap(f.apply(sr), f.apply(hr)) > 1e-3) break;
    }
    const LossGrad g = weighted_baseline_loss(sr, hr, w, f, d_sr, d_hr);
    const auto loss = [&](std::span<const double> x) {
        Tensor3 t(d.h, d.w, d.c);
        std::copy(x.begin(), x.end(), t.data.begin());
        return weighted_baseline_loss(t, hr, w, f, d_sr, d_hr).value;
    };
    return grad_check(loss, sr.data, g.grad.data, kEps, mix64(seed));
}

// JVP vs central differences on whole-tensor outputs, sampled coordinates.
double check_softmax_jvp(uint64_t seed) {
    auto eng = make_engine(seed);
    const Dims d = pick_dims(eng);
    const Tensor3 m = random_tensor(eng, d.h, d.w, d.c, -3.0, 3.0);
    const Tensor3 v = random_tensor(eng, d.h, d.w, d.c, -1.0, 1.0);
    const Tensor3 analytic = softmax_mask_jvp(m, v);

    Tensor3 plus(m.height, m.width, m.channels), minus = plus;
    for (size_t i = 0; i < m.data.size(); ++i) {
        plus.data[i] = m.data[i] + kEps * v.data[i];
        minus.data[i] = m.data[i] - kEps * v.data[i];
    }
    const Mask sp = softmax_mask(plus);
    const Mask sm = softmax_mask(minus);

    double max_rel = 0.0;
    const size_t total = m.data.size();
    const size_t samples = std::min<size_t>(total, 128);
    auto pick = make_engine(mix64(seed));
    for (size_t k = 0; k < samples; ++k) {
        const size_t i = bounded(pick, total);
        const double numeric =
            (sp.values.data[i] - sm.values.data[i]) / (2.0 * kEps);
        const double a = analytic.data[i];
        const double rel = std::abs(a - numeric) /
                           std::max({std::abs(a), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

}  // namespace

std::vector<SuiteResult> run_gradient_suite(uint64_t seed,
                                            int instances_per_family) {
    struct Family {
        const char* name;
        double (*check)(uint64_t);
    };
    static const auto check_perceptual_identity = [](uint64_t s) {
        return check_perceptual(s, true);
    };
    static const auto check_perceptual_conv = [](uint64_t s) {
        return check_perceptual(s, false);
    };
    const Family families[] = {
        {"pixel", check_pixel},
        {"perceptual-identity", +check_perceptual_identity},
        {"perceptual-conv", +check_perceptual_conv},
        {"adversarial", check_adversarial},
        {"composite", check_composite},
        {"baseline", check_baseline},
        {"softmax-jvp", check_softmax_jvp},
    };

    std::vector<SuiteResult> results;
    for (const Family& fam : families) {
        SuiteResult r;
        r.family = fam.name;
        r.instances = instances_per_family;
        for (int i = 0; i < instances_per_family; ++i) {
            const uint64_t s = derive_seed(seed, fam.name, static_cast<uint64_t>(i));
            r.max_rel_err = std::max(r.max_rel_err, fam.check(s));
        }
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace ngdc
