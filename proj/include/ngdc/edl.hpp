#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "ngdc/tensor.hpp"

namespace ngdc {

// Per-pixel, per-channel soft weights in (0,1). Masks from softmax_mask sum
// to 1 across channels at every pixel.
struct Mask {
    Tensor3 values;
    void validate() const;  // open-interval range + finiteness
};

// Relative importance of the adversarial / perceptual / pixel terms in the
// single-image weighted loss. At least one weight must be positive.
struct LossWeights {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

// Deterministic differentiable feature map. vjp(x, g) applies the transposed
// Jacobian at x to the cotangent g, which is what the losses need to push
// gradients back through the map.
class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual Tensor3 apply(const Tensor3& x) const = 0;
    virtual Tensor3 vjp(const Tensor3& x, const Tensor3& cotangent) const = 0;
};

class IdentityExtractor final : public FeatureExtractor {
public:
    Tensor3 apply(const Tensor3& x) const override { return x; }
    Tensor3 vjp(const Tensor3&, const Tensor3& cotangent) const override {
        return cotangent;
    }
};

// Fixed-seed stand-in for a pretrained feature network: two 3x3 convolution
// layers (zero padding, same channel count) each followed by tanh. Weights
// are drawn once from the seed, so the map is deterministic and smooth.
class ConvStackExtractor final : public FeatureExtractor {
public:
    ConvStackExtractor(uint64_t seed, int channels);
    Tensor3 apply(const Tensor3& x) const override;
    Tensor3 vjp(const Tensor3& x, const Tensor3& cotangent) const override;
    int channels() const { return channels_; }

private:
    int channels_;
    std::vector<double> w1_, w2_;  // [out][in][ky][kx], 3x3
    std::vector<double> b1_, b2_;
};

struct LossGrad {
    double value = 0.0;
    Tensor3 grad;  // w.r.t. the first (reconstructed) argument
};

struct ScoreLossGrad {
    double value = 0.0;
    std::vector<double> grad_sr;
    std::vector<double> grad_hr;
};

struct CompositeLossGrad {
    double value = 0.0;
    double adversarial_term = 0.0;
    double perceptual_term = 0.0;
    double pixel_term = 0.0;
    Tensor3 grad_ix;
    Tensor3 grad_iy;
    // The adversarial term's image dependence: a caller-side discriminator
    // scores these masked products.
    Tensor3 masked_x;  // m_alpha . i_x
    Tensor3 masked_y;  // m_beta  . i_y
};

// Per-pixel channel softmax with max-subtraction. channels >= 2 and finite
// input required.
Mask softmax_mask(const Tensor3& m);

// Directional derivative of softmax_mask at m in direction v.
Tensor3 softmax_mask_jvp(const Tensor3& m, const Tensor3& v);

// Elementwise 1 - v; the exclusionary complement.
Mask complement_mask(const Mask& m_alpha);

// Mean absolute deviation over all elements; gradient sign(sr - hr)/count
// with sign(0) := 0.
LossGrad pixel_loss(const Tensor3& sr, const Tensor3& hr);

// pixel_loss in feature space; gradient via the extractor's VJP.
LossGrad perceptual_loss(const Tensor3& sr, const Tensor3& hr,
                         const FeatureExtractor& f);

// Relativistic average adversarial loss over one score per sample:
//   (1/N) sum_i { -log(1 - sigmoid(d_hr[i] - mean(d_sr)))
//                 -log(sigmoid(d_sr[i] - mean(d_hr))) }
// with log arguments floored at 1e-12.
ScoreLossGrad adversarial_loss(std::span<const double> d_sr,
                               std::span<const double> d_hr);

// Exclusionary dual-branch composition with unit term weights:
//   adv(scores) + per(m_a.i_x + m_b.i_y, hr) + pix(m_b.i_y, hr),
// m_b = 1 - m_a. Gradients are w.r.t. i_x and i_y; the scores are caller
// inputs, so the adversarial term contributes no image gradient here.
CompositeLossGrad edl_composite_loss(const Tensor3& i_x, const Tensor3& i_y,
                                     const Mask& m_alpha, const Tensor3& hr,
                                     const FeatureExtractor& f,
                                     std::span<const double> d_sr,
                                     std::span<const double> d_hr);

// Fixed-weight single-image baseline: alpha*adv + beta*per + gamma*pix.
// Gradient w.r.t. sr.
LossGrad weighted_baseline_loss(const Tensor3& sr, const Tensor3& hr,
                                const LossWeights& w, const FeatureExtractor& f,
                                std::span<const double> d_sr,
                                std::span<const double> d_hr);

// Central-difference check of an analytic gradient on a seeded coordinate
// subsample (all coordinates when fewer than min_coords). Relative error
// uses max(|analytic|, |numeric|, 1e-8) as denominator. epsilon must lie in
// [1e-6, 1e-3]; evaluation is in 64-bit floating point throughout.
double grad_check(const std::function<double(std::span<const double>)>& loss,
                  std::span<const double> x0, std::span<const double> analytic,
                  double epsilon, uint64_t seed, size_t min_coords = 64);

}  // namespace ngdc
