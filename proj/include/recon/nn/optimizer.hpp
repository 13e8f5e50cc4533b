#pragma once

#include "recon/series.hpp"

#include <cstdint>

namespace recon::nn {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adaptive-moment optimizer state over one flat parameter vector.
struct OptimizerState {
    AdamConfig config;
    Vector first_moment;
    Vector second_moment;
    std::uint64_t step = 0;

    OptimizerState(std::size_t parameter_count, AdamConfig cfg);
};

/// One bias-corrected Adam update of `params` in place.
void optimizer_step(OptimizerState& state, Eigen::Ref<Vector> params, const Vector& grads);

}  // namespace recon::nn
