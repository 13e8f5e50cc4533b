#include "recon/nn/optimizer.hpp"

#include "recon/error.hpp"

#include <cmath>

namespace recon::nn {

OptimizerState::OptimizerState(std::size_t n, AdamConfig cfg)
    : config(cfg),
      first_moment(Vector::Zero(static_cast<Eigen::Index>(n))),
      second_moment(Vector::Zero(static_cast<Eigen::Index>(n))) {}

void optimizer_step(OptimizerState& s, Eigen::Ref<Vector> params, const Vector& grads) {
    if (params.size() != grads.size() || params.size() != s.first_moment.size())
        throw InvalidArgument("optimizer_step: parameter, gradient, and state sizes differ");
    const auto& c = s.config;
    ++s.step;
    const double t = static_cast<double>(s.step);
    const double correction1 = 1.0 - std::pow(c.beta1, t);
    const double correction2 = 1.0 - std::pow(c.beta2, t);
    for (Eigen::Index k = 0; k < params.size(); ++k) {
        const double g = grads(k);
        double& m = s.first_moment(k);
        double& v = s.second_moment(k);
        m = c.beta1 * m + (1.0 - c.beta1) * g;
        v = c.beta2 * v + (1.0 - c.beta2) * g * g;
        params(k) -= c.learning_rate * (m / correction1) / (std::sqrt(v / correction2) + c.epsilon);
    }
}

}  // namespace recon::nn
