#pragma once

#include "recon/series.hpp"

#include <string_view>

namespace recon::nn {

enum class Activation { sigmoid, tanh, identity };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

double activate(Activation a, double v);
/// Derivative expressed through the activation output y = act(v).
double activate_grad_from_output(Activation a, double y);
void activate_inplace(Activation a, Eigen::Ref<Matrix> m);

/// y = act(W x + b); W is out x in.
struct DenseParams {
    Matrix W;
    Vector b;
    Activation activation = Activation::identity;

    Eigen::Index in() const noexcept { return W.cols(); }
    Eigen::Index out() const noexcept { return W.rows(); }
    /// Same shapes and activation, all entries zero.
    DenseParams zeros_like() const;
};

struct DenseCache {
    Vector input;
    Vector output;
};

Vector dense_forward(const DenseParams& p, const Vector& x);
Vector dense_forward(const DenseParams& p, const Vector& x, DenseCache& cache);

/// Accumulates parameter gradients into `grads` and returns dL/dx.
Vector backward_dense(const DenseParams& p, const DenseCache& cache, const Vector& d_output,
                      DenseParams& grads);

}  // namespace recon::nn
