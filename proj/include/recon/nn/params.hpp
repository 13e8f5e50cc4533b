#pragma once

#include "recon/nn/dense.hpp"
#include "recon/nn/lstm.hpp"

#include <concepts>
#include <string>
#include <type_traits>

namespace recon::nn {

/// Dense encoder (sigmoid) followed by a dense decoder.
struct DenseAutoencoder {
    DenseParams encoder;
    DenseParams decoder;

    DenseAutoencoder zeros_like() const { return {encoder.zeros_like(), decoder.zeros_like()}; }
};

/// LSTM encoder over the window's time steps; its final read-out y_N feeds a dense decoder.
struct LstmAutoencoder {
    LstmParams cell;
    DenseParams decoder;

    LstmAutoencoder zeros_like() const { return {cell.zeros_like(), decoder.zeros_like()}; }
};

// Visitors call f(name, tensor) for every weight matrix and bias vector in a
// fixed order. That order defines flat packing, initialization draws, and the
// on-disk tensor order.

template <class P, class F>
    requires std::same_as<std::remove_const_t<P>, DenseParams>
void for_each_tensor(P& p, F&& f, const std::string& prefix = "") {
    f(prefix + "W", p.W);
    f(prefix + "b", p.b);
}

template <class P, class F>
    requires std::same_as<std::remove_const_t<P>, LstmParams>
void for_each_tensor(P& p, F&& f, const std::string& prefix = "") {
    f(prefix + "W_ix", p.W_ix);
    f(prefix + "W_im", p.W_im);
    f(prefix + "W_ic", p.W_ic);
    f(prefix + "b_i", p.b_i);
    f(prefix + "W_fx", p.W_fx);
    f(prefix + "W_fm", p.W_fm);
    f(prefix + "W_fc", p.W_fc);
    f(prefix + "b_f", p.b_f);
    f(prefix + "W_cx", p.W_cx);
    f(prefix + "W_cm", p.W_cm);
    f(prefix + "b_c", p.b_c);
    f(prefix + "W_ox", p.W_ox);
    f(prefix + "W_om", p.W_om);
    f(prefix + "W_oc", p.W_oc);
    f(prefix + "b_o", p.b_o);
    f(prefix + "W_ym", p.W_ym);
    f(prefix + "b_y", p.b_y);
}

template <class P, class F>
    requires std::same_as<std::remove_const_t<P>, DenseAutoencoder>
void for_each_tensor(P& p, F&& f, const std::string& prefix = "") {
    for_each_tensor(p.encoder, f, prefix + "encoder.");
    for_each_tensor(p.decoder, f, prefix + "decoder.");
}

template <class P, class F>
    requires std::same_as<std::remove_const_t<P>, LstmAutoencoder>
void for_each_tensor(P& p, F&& f, const std::string& prefix = "") {
    for_each_tensor(p.cell, f, prefix + "cell.");
    for_each_tensor(p.decoder, f, prefix + "decoder.");
}

template <class P>
std::size_t parameter_count(const P& p) {
    std::size_t n = 0;
    for_each_tensor(p, [&](const std::string&, const auto& t) { n += static_cast<std::size_t>(t.size()); });
    return n;
}

/// Concatenates every tensor (column-major within a tensor) in visiting order.
template <class P>
Vector pack(const P& p) {
    Vector out(static_cast<Eigen::Index>(parameter_count(p)));
    Eigen::Index at = 0;
    for_each_tensor(p, [&](const std::string&, const auto& t) {
        out.segment(at, t.size()) = Eigen::Map<const Vector>(t.data(), t.size());
        at += t.size();
    });
    return out;
}

template <class P>
void unpack(P& p, const Vector& flat) {
    Eigen::Index at = 0;
    for_each_tensor(p, [&](const std::string&, auto& t) {
        Eigen::Map<Vector>(t.data(), t.size()) = flat.segment(at, t.size());
        at += t.size();
    });
}

}  // namespace recon::nn
