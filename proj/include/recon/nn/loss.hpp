#pragma once

#include "recon/series.hpp"

namespace recon::nn {

struct LossConfig {
    double sparsity_weight = 1e-3;  ///< beta; 0 disables the penalty
    double sparsity_target = 0.05;  ///< desired mean activation of each hidden unit
};

/// Mean squared difference between a target and its reconstruction.
double reconstruction_loss(const Vector& x, const Vector& z);
/// d reconstruction_loss / dz.
Vector reconstruction_loss_grad(const Vector& x, const Vector& z);

/**
 * beta * sum_j KL(target || mean activation of unit j), with the batch mean
 * clamped to [1e-6, 1 - 1e-6]. `hidden` holds one sample per column.
 */
double sparsity_penalty(const Matrix& hidden, const LossConfig& cfg);
/// d sparsity_penalty / d hidden, same shape as `hidden`; zero where the mean is clamped.
Matrix sparsity_penalty_grad(const Matrix& hidden, const LossConfig& cfg);

double kl_bernoulli(double target, double estimate);

}  // namespace recon::nn
