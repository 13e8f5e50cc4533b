#pragma once

#include "recon/series.hpp"

#include <vector>

namespace recon::nn {

/// Full peephole matrices W_ic, W_fc, W_oc, or their diagonal restriction.
enum class Peephole { full, diagonal };

/**
 * Peephole LSTM cell with a linear read-out:
 *
 *   i_n = sigma(W_ix x_n + W_im m_{n-1} + W_ic c_{n-1} + b_i)
 *   f_n = sigma(W_fx x_n + W_fm m_{n-1} + W_fc c_{n-1} + b_f)
 *   c_n = f_n . c_{n-1} + i_n . tanh(W_cx x_n + W_cm m_{n-1} + b_c)
 *   o_n = sigma(W_ox x_n + W_om m_{n-1} + W_oc c_n + b_o)
 *   m_n = o_n . tanh(c_n)
 *   y_n = W_ym m_n + b_y
 *
 * Sizes: input D, hidden H, output O. Under Peephole::diagonal the
 * off-diagonal entries of the three peephole matrices stay zero.
 */
struct LstmParams {
    Matrix W_ix, W_im, W_ic;
    Vector b_i;
    Matrix W_fx, W_fm, W_fc;
    Vector b_f;
    Matrix W_cx, W_cm;
    Vector b_c;
    Matrix W_ox, W_om, W_oc;
    Vector b_o;
    Matrix W_ym;
    Vector b_y;
    Peephole peephole = Peephole::full;

    static LstmParams zeros(Eigen::Index input, Eigen::Index hidden, Eigen::Index output,
                            Peephole peephole = Peephole::full);
    LstmParams zeros_like() const { return zeros(input_size(), hidden_size(), output_size(), peephole); }

    Eigen::Index input_size() const noexcept { return W_ix.cols(); }
    Eigen::Index hidden_size() const noexcept { return W_ix.rows(); }
    Eigen::Index output_size() const noexcept { return W_ym.rows(); }

    /// Throws InvalidArgument when any tensor disagrees with (D, H, O).
    void check_shapes() const;
    /// Zeroes peephole off-diagonals when `mode` is the diagonal restriction.
    void apply_peephole_restriction(Peephole mode);
};

struct LstmState {
    Vector m;
    Vector c;

    static LstmState zeros(Eigen::Index hidden) { return {Vector::Zero(hidden), Vector::Zero(hidden)}; }
};

struct LstmStepCache {
    Vector x, m_prev, c_prev;
    Vector i, f, g, c, o, c_tanh, m;
};

struct LstmCache {
    Eigen::Index input = 0, hidden = 0, output = 0;
    std::vector<LstmStepCache> steps;
};

struct LstmStepResult {
    LstmState state;
    Vector y;
};

LstmStepResult lstm_step(const LstmParams& p, const Vector& x, const LstmState& prev);

struct LstmForwardResult {
    std::vector<Vector> ys;
    LstmState final_state;
    LstmCache cache;
};

/// Runs the cell over `xs` from the zero state.
LstmForwardResult lstm_forward(const LstmParams& p, const std::vector<Vector>& xs);

/**
 * Backpropagation through time. `d_ys[n]` is dL/dy_n (one per step).
 * Accumulates into `grads` and returns dL/dx_n for every step.
 */
std::vector<Vector> backward_lstm(const LstmParams& p, const LstmCache& cache,
                                  const std::vector<Vector>& d_ys, LstmParams& grads);

}  // namespace recon::nn
