#include "recon/nn/loss.hpp"

#include "recon/error.hpp"

#include <algorithm>
#include <cmath>

namespace recon::nn {

namespace {

constexpr double kClampLo = 1e-6;
constexpr double kClampHi = 1.0 - 1e-6;

}  // namespace

double reconstruction_loss(const Vector& x, const Vector& z) {
    if (x.size() != z.size() || x.size() == 0)
        throw InvalidArgument("reconstruction_loss needs equal nonzero lengths");
    return (x - z).squaredNorm() / static_cast<double>(x.size());
}

Vector reconstruction_loss_grad(const Vector& x, const Vector& z) {
    if (x.size() != z.size() || x.size() == 0)
        throw InvalidArgument("reconstruction_loss needs equal nonzero lengths");
    return (2.0 / static_cast<double>(x.size())) * (z - x);
}

double kl_bernoulli(double target, double estimate) {
    return target * std::log(target / estimate) + (1.0 - target) * std::log((1.0 - target) / (1.0 - estimate));
}

double sparsity_penalty(const Matrix& hidden, const LossConfig& cfg) {
    if (cfg.sparsity_weight == 0.0 || hidden.cols() == 0) return 0.0;
    const Vector mean = hidden.rowwise().mean();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < mean.size(); ++j)
        sum += kl_bernoulli(cfg.sparsity_target, std::clamp(mean(j), kClampLo, kClampHi));
    return cfg.sparsity_weight * sum;
}

Matrix sparsity_penalty_grad(const Matrix& hidden, const LossConfig& cfg) {
    Matrix g = Matrix::Zero(hidden.rows(), hidden.cols());
    if (cfg.sparsity_weight == 0.0 || hidden.cols() == 0) return g;
    const Vector mean = hidden.rowwise().mean();
    const double rho = cfg.sparsity_target;
    const double per_sample = cfg.sparsity_weight / static_cast<double>(hidden.cols());
    for (Eigen::Index j = 0; j < mean.size(); ++j) {
        const double m = mean(j);
        if (m < kClampLo || m > kClampHi) continue;
        g.row(j).setConstant(per_sample * (-rho / m + (1.0 - rho) / (1.0 - m)));
    }
    return g;
}

}  // namespace recon::nn
