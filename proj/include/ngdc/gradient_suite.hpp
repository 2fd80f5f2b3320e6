#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ngdc {

struct SuiteResult {
    std::string family;
    int instances = 0;
    double max_rel_err = 0.0;
};

// Finite-difference verification of every analytic gradient the loss module
// exposes: pixel, perceptual (identity and conv-stack extractor),
// adversarial, composite, weighted baseline, and the softmax JVP. Inputs are
// seeded and constructed away from the L1 non-differentiability set.
std::vector<SuiteResult> run_gradient_suite(uint64_t seed,
                                            int instances_per_family = 20);

}  // namespace ngdc
