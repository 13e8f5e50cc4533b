#include "recon/nn/dense.hpp"

#include "recon/error.hpp"

#include <cmath>
#include <string>

namespace recon::nn {

std::string_view to_string(Activation a) {
    switch (a) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
    }
    return "identity";
}

Activation activation_from_string(std::string_view s) {
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "tanh") return Activation::tanh;
    if (s == "identity") return Activation::identity;
    throw InvalidArgument("unknown activation `" + std::string(s) + "`");
}

double activate(Activation a, double v) {
    switch (a) {
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-v));
    case Activation::tanh: return std::tanh(v);
    case Activation::identity: return v;
    }
    return v;
}

double activate_grad_from_output(Activation a, double y) {
    switch (a) {
    case Activation::sigmoid: return y * (1.0 - y);
    case Activation::tanh: return 1.0 - y * y;
    case Activation::identity: return 1.0;
    }
    return 1.0;
}

void activate_inplace(Activation a, Eigen::Ref<Matrix> m) {
    if (a == Activation::identity) return;
    m = m.unaryExpr([a](double v) { return activate(a, v); });
}

DenseParams DenseParams::zeros_like() const {
    return {Matrix::Zero(W.rows(), W.cols()), Vector::Zero(b.size()), activation};
}

Vector dense_forward(const DenseParams& p, const Vector& x) {
    if (x.size() != p.in())
        throw InvalidArgument("dense input has length " + std::to_string(x.size()) + ", expected " +
                              std::to_string(p.in()));
    Vector y = p.W * x + p.b;
    activate_inplace(p.activation, y);
    return y;
}

Vector dense_forward(const DenseParams& p, const Vector& x, DenseCache& cache) {
    cache.input = x;
    cache.output = dense_forward(p, x);
    return cache.output;
}

Vector backward_dense(const DenseParams& p, const DenseCache& cache, const Vector& d_output,
                      DenseParams& grads) {
    if (cache.input.size() != p.in() || cache.output.size() != p.out())
        throw InvalidState("dense cache does not match layer shape");
    if (d_output.size() != p.out()) throw InvalidArgument("dense output gradient has wrong length");
    if (grads.W.rows() != p.out() || grads.W.cols() != p.in() || grads.b.size() != p.out())
        throw InvalidArgument("dense gradient buffer has wrong shape");
    Vector da(d_output.size());
    for (Eigen::Index k = 0; k < da.size(); ++k)
        da(k) = d_output(k) * activate_grad_from_output(p.activation, cache.output(k));
    grads.W.noalias() += da * cache.input.transpose();
    grads.b += da;
    return p.W.transpose() * da;
}

}  // namespace recon::nn
