#include "recon/nn/batch_kernels.hpp"

#include "recon/error.hpp"

#include <omp.h>

#include <cmath>
#include <string>
#include <vector>

namespace recon::nn {

namespace {

using Array = Eigen::ArrayXXd;

Eigen::Index chunk_count(Eigen::Index cols) { return (cols + kChunkColumns - 1) / kChunkColumns; }

struct ChunkRange {
    Eigen::Index begin;
    Eigen::Index size;
};

ChunkRange chunk(Eigen::Index c, Eigen::Index cols) {
    const Eigen::Index begin = c * kChunkColumns;
    return {begin, std::min(kChunkColumns, cols - begin)};
}

Matrix sigmoid(const Matrix& a) {
    return (1.0 / (1.0 + (-a.array()).exp())).matrix();
}

Matrix affine(const Matrix& W, const Eigen::Ref<const Matrix>& x, const Vector& b) {
    Matrix a = W * x;
    a.colwise() += b;
    return a;
}

void check_batch(const Matrix& inputs, const Matrix& targets, Eigen::Index in_dim, Eigen::Index out_dim) {
    if (inputs.rows() != in_dim) throw InvalidArgument("batch inputs have the wrong row count");
    if (targets.rows() != out_dim || targets.cols() != inputs.cols())
        throw InvalidArgument("batch targets do not match the network output shape");
    if (inputs.cols() == 0) throw InvalidArgument("empty batch");
}

template <class Net>
void reduce_chunks(std::vector<Net>& parts, Net& out) {
    Vector total = pack(parts.front());
    for (std::size_t c = 1; c < parts.size(); ++c) total += pack(parts[c]);
    unpack(out, total);
}

// ---------------------------------------------------------------- dense ----

double dense_loss_serial(const DenseAutoencoder& net, const Matrix& X, const Matrix& T, const LossConfig& loss,
                         DenseAutoencoder* grads) {
    const Eigen::Index n = X.cols();
    std::vector<DenseCache> enc(static_cast<std::size_t>(n));
    Matrix hidden(net.encoder.out(), n);
    for (Eigen::Index s = 0; s < n; ++s)
        hidden.col(s) = dense_forward(net.encoder, X.col(s), enc[static_cast<std::size_t>(s)]);
    const Matrix d_sparse = grads ? sparsity_penalty_grad(hidden, loss) : Matrix();
    if (grads) *grads = net.zeros_like();
    double total = 0.0;
    for (Eigen::Index s = 0; s < n; ++s) {
        DenseCache dec;
        const Vector z = dense_forward(net.decoder, hidden.col(s), dec);
        const Vector t = T.col(s);
        total += reconstruction_loss(t, z);
        if (!grads) continue;
        const Vector dz = reconstruction_loss_grad(t, z) / static_cast<double>(n);
        const Vector dh = backward_dense(net.decoder, dec, dz, grads->decoder) + d_sparse.col(s);
        backward_dense(net.encoder, enc[static_cast<std::size_t>(s)], dh, grads->encoder);
    }
    return total / static_cast<double>(n) + sparsity_penalty(hidden, loss);
}

double dense_loss_parallel(const DenseAutoencoder& net, const Matrix& X, const Matrix& T, const LossConfig& loss,
                           DenseAutoencoder* grads) {
    const Eigen::Index n = X.cols();
    const Eigen::Index chunks = chunk_count(n);
    if (net.encoder.activation != Activation::sigmoid)
        throw InvalidArgument("dense autoencoder kernels expect a sigmoid encoder");
    Matrix hidden(net.encoder.out(), n);

#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < chunks; ++c) {
        const auto [b, w] = chunk(c, n);
        hidden.middleCols(b, w) = sigmoid(affine(net.encoder.W, X.middleCols(b, w), net.encoder.b));
    }

    const Matrix d_sparse = grads ? sparsity_penalty_grad(hidden, loss) : Matrix();
    const double out_dim = static_cast<double>(net.decoder.out());
    const bool identity_out = net.decoder.activation == Activation::identity;
    std::vector<double> chunk_loss(static_cast<std::size_t>(chunks), 0.0);
    std::vector<DenseAutoencoder> parts;
    if (grads) parts.assign(static_cast<std::size_t>(chunks), net.zeros_like());

#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < chunks; ++c) {
        const auto [b, w] = chunk(c, n);
        const auto h = hidden.middleCols(b, w);
        Matrix z = affine(net.decoder.W, h, net.decoder.b);
        activate_inplace(net.decoder.activation, z);
        const Matrix err = z - T.middleCols(b, w);
        chunk_loss[static_cast<std::size_t>(c)] = err.squaredNorm() / out_dim;
        if (!grads) continue;
        DenseAutoencoder& g = parts[static_cast<std::size_t>(c)];
        Matrix dz = err * (2.0 / (out_dim * static_cast<double>(n)));
        if (!identity_out)
            dz.array() *= z.unaryExpr([&](double y) { return activate_grad_from_output(net.decoder.activation, y); }).array();
        g.decoder.W.noalias() = dz * h.transpose();
        g.decoder.b = dz.rowwise().sum();
        Matrix dh = net.decoder.W.transpose() * dz + d_sparse.middleCols(b, w);
        dh.array() *= h.array() * (1.0 - h.array());
        g.encoder.W.noalias() = dh * X.middleCols(b, w).transpose();
        g.encoder.b = dh.rowwise().sum();
    }

    double total = 0.0;
    for (double v : chunk_loss) total += v;
    if (grads) {
        *grads = net.zeros_like();
        reduce_chunks(parts, *grads);
    }
    return total / static_cast<double>(n) + sparsity_penalty(hidden, loss);
}

// ----------------------------------------------------------------- lstm ----

Eigen::Index window_steps(const LstmAutoencoder& net, const Matrix& X) {
    const Eigen::Index channels = net.cell.input_size();
    if (X.rows() % channels != 0) throw InvalidArgument("lstm batch rows are not a multiple of the channel count");
    return X.rows() / channels;
}

std::vector<Vector> column_to_sequence(const Eigen::Ref<const Vector>& col, Eigen::Index channels) {
    std::vector<Vector> seq;
    for (Eigen::Index k = 0; k < col.size() / channels; ++k) seq.emplace_back(col.segment(k * channels, channels));
    return seq;
}

double lstm_loss_serial(const LstmAutoencoder& net, const Matrix& X, const Matrix& T, LstmAutoencoder* grads) {
    const Eigen::Index n = X.cols();
    const Eigen::Index channels = net.cell.input_size();
    if (grads) *grads = net.zeros_like();
    double total = 0.0;
    for (Eigen::Index s = 0; s < n; ++s) {
        const LstmForwardResult fwd = lstm_forward(net.cell, column_to_sequence(X.col(s), channels));
        DenseCache dec;
        const Vector z = dense_forward(net.decoder, fwd.ys.back(), dec);
        const Vector t = T.col(s);
        total += reconstruction_loss(t, z);
        if (!grads) continue;
        const Vector dz = reconstruction_loss_grad(t, z) / static_cast<double>(n);
        std::vector<Vector> dys(fwd.ys.size(), Vector::Zero(net.cell.output_size()));
        dys.back() = backward_dense(net.decoder, dec, dz, grads->decoder);
        backward_lstm(net.cell, fwd.cache, dys, grads->cell);
    }
    return total / static_cast<double>(n);
}

struct BatchStep {
    Matrix i, f, g, c, o, c_tanh, m;
};

// Forward over one chunk; returns per-step activations.
std::vector<BatchStep> lstm_chunk_forward(const LstmParams& p, const Eigen::Ref<const Matrix>& X, Eigen::Index steps) {
    const Eigen::Index h = p.hidden_size();
    const Eigen::Index d = p.input_size();
    const Eigen::Index w = X.cols();
    std::vector<BatchStep> out(static_cast<std::size_t>(steps));
    Matrix m_prev = Matrix::Zero(h, w);
    Matrix c_prev = Matrix::Zero(h, w);
    for (Eigen::Index k = 0; k < steps; ++k) {
        BatchStep& s = out[static_cast<std::size_t>(k)];
        const auto x = X.middleRows(k * d, d);
        Matrix a = affine(p.W_ix, x, p.b_i);
        a.noalias() += p.W_im * m_prev;
        a.noalias() += p.W_ic * c_prev;
        s.i = sigmoid(a);
        a = affine(p.W_fx, x, p.b_f);
        a.noalias() += p.W_fm * m_prev;
        a.noalias() += p.W_fc * c_prev;
        s.f = sigmoid(a);
        a = affine(p.W_cx, x, p.b_c);
        a.noalias() += p.W_cm * m_prev;
        s.g = a.array().tanh().matrix();
        s.c = (s.f.array() * c_prev.array() + s.i.array() * s.g.array()).matrix();
        a = affine(p.W_ox, x, p.b_o);
        a.noalias() += p.W_om * m_prev;
        a.noalias() += p.W_oc * s.c;
        s.o = sigmoid(a);
        s.c_tanh = s.c.array().tanh().matrix();
        s.m = (s.o.array() * s.c_tanh.array()).matrix();
        m_prev = s.m;
        c_prev = s.c;
    }
    return out;
}

double lstm_loss_parallel(const LstmAutoencoder& net, const Matrix& X, const Matrix& T, LstmAutoencoder* grads) {
    const Eigen::Index n = X.cols();
    const Eigen::Index chunks = chunk_count(n);
    const Eigen::Index steps = window_steps(net, X);
    const LstmParams& p = net.cell;
    const Eigen::Index h = p.hidden_size();
    const Eigen::Index d = p.input_size();
    const double out_dim = static_cast<double>(net.decoder.out());
    if (net.decoder.activation != Activation::identity)
        throw InvalidArgument("lstm autoencoder kernels expect an identity decoder");

    std::vector<double> chunk_loss(static_cast<std::size_t>(chunks), 0.0);
    std::vector<LstmAutoencoder> parts;
    if (grads) parts.assign(static_cast<std::size_t>(chunks), net.zeros_like());

#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < chunks; ++c) {
        const auto [b, w] = chunk(c, n);
        const auto x_chunk = X.middleCols(b, w);
        const std::vector<BatchStep> fwd = lstm_chunk_forward(p, x_chunk, steps);
        const Matrix y = affine(p.W_ym, fwd.back().m, p.b_y);
        const Matrix z = affine(net.decoder.W, y, net.decoder.b);
        const Matrix err = z - T.middleCols(b, w);
        chunk_loss[static_cast<std::size_t>(c)] = err.squaredNorm() / out_dim;
        if (!grads) continue;

        LstmAutoencoder& g = parts[static_cast<std::size_t>(c)];
        const Matrix dz = err * (2.0 / (out_dim * static_cast<double>(n)));
        g.decoder.W.noalias() = dz * y.transpose();
        g.decoder.b = dz.rowwise().sum();
        const Matrix dy = net.decoder.W.transpose() * dz;
        g.cell.W_ym.noalias() = dy * fwd.back().m.transpose();
        g.cell.b_y = dy.rowwise().sum();

        Matrix dm = p.W_ym.transpose() * dy;
        Matrix dc_next = Matrix::Zero(h, w);
        const Matrix zeros = Matrix::Zero(h, w);
        for (Eigen::Index k = steps; k-- > 0;) {
            const BatchStep& s = fwd[static_cast<std::size_t>(k)];
            const Matrix& m_prev = k > 0 ? fwd[static_cast<std::size_t>(k - 1)].m : zeros;
            const Matrix& c_prev = k > 0 ? fwd[static_cast<std::size_t>(k - 1)].c : zeros;
            const auto x = x_chunk.middleRows(k * d, d);

            const Matrix da_o = (dm.array() * s.c_tanh.array() * s.o.array() * (1.0 - s.o.array())).matrix();
            Matrix dc = (dm.array() * s.o.array() * (1.0 - s.c_tanh.array().square())).matrix() + dc_next;
            dc.noalias() += p.W_oc.transpose() * da_o;
            const Matrix da_i = (dc.array() * s.g.array() * s.i.array() * (1.0 - s.i.array())).matrix();
            const Matrix da_f = (dc.array() * c_prev.array() * s.f.array() * (1.0 - s.f.array())).matrix();
            const Matrix da_g = (dc.array() * s.i.array() * (1.0 - s.g.array().square())).matrix();

            g.cell.W_ix.noalias() += da_i * x.transpose();
            g.cell.W_im.noalias() += da_i * m_prev.transpose();
            g.cell.W_ic.noalias() += da_i * c_prev.transpose();
            g.cell.b_i += da_i.rowwise().sum();
            g.cell.W_fx.noalias() += da_f * x.transpose();
            g.cell.W_fm.noalias() += da_f * m_prev.transpose();
            g.cell.W_fc.noalias() += da_f * c_prev.transpose();
            g.cell.b_f += da_f.rowwise().sum();
            g.cell.W_cx.noalias() += da_g * x.transpose();
            g.cell.W_cm.noalias() += da_g * m_prev.transpose();
            g.cell.b_c += da_g.rowwise().sum();
            g.cell.W_ox.noalias() += da_o * x.transpose();
            g.cell.W_om.noalias() += da_o * m_prev.transpose();
            g.cell.W_oc.noalias() += da_o * s.c.transpose();
            g.cell.b_o += da_o.rowwise().sum();

            if (k == 0) break;
            dm.noalias() = p.W_im.transpose() * da_i;
            dm.noalias() += p.W_fm.transpose() * da_f;
            dm.noalias() += p.W_cm.transpose() * da_g;
            dm.noalias() += p.W_om.transpose() * da_o;
            dc_next = (s.f.array() * dc.array()).matrix();
            dc_next.noalias() += p.W_ic.transpose() * da_i;
            dc_next.noalias() += p.W_fc.transpose() * da_f;
        }
    }

    double total = 0.0;
    for (double v : chunk_loss) total += v;
    if (grads) {
        *grads = net.zeros_like();
        reduce_chunks(parts, *grads);
        grads->cell.apply_peephole_restriction(p.peephole);
    }
    return total / static_cast<double>(n);
}

}  // namespace

double dense_autoencoder_loss(const DenseAutoencoder& net, const Matrix& inputs, const Matrix& targets,
                              const LossConfig& loss, DenseAutoencoder* grads, Exec exec) {
    check_batch(inputs, targets, net.encoder.in(), net.decoder.out());
    return exec == Exec::serial ? dense_loss_serial(net, inputs, targets, loss, grads)
                                : dense_loss_parallel(net, inputs, targets, loss, grads);
}

Matrix dense_encoder_activations(const DenseAutoencoder& net, const Matrix& inputs, Exec exec) {
    if (inputs.rows() != net.encoder.in()) throw InvalidArgument("batch inputs have the wrong row count");
    const Eigen::Index n = inputs.cols();
    Matrix hidden(net.encoder.out(), n);
    if (exec == Exec::serial) {
        for (Eigen::Index s = 0; s < n; ++s) hidden.col(s) = dense_forward(net.encoder, inputs.col(s));
        return hidden;
    }
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < chunk_count(n); ++c) {
        const auto [b, w] = chunk(c, n);
        Matrix a = affine(net.encoder.W, inputs.middleCols(b, w), net.encoder.b);
        activate_inplace(net.encoder.activation, a);
        hidden.middleCols(b, w) = a;
    }
    return hidden;
}

Matrix dense_autoencoder_predict(const DenseAutoencoder& net, const Matrix& inputs, Exec exec) {
    const Matrix hidden = dense_encoder_activations(net, inputs, exec);
    const Eigen::Index n = inputs.cols();
    Matrix out(net.decoder.out(), n);
    if (exec == Exec::serial) {
        for (Eigen::Index s = 0; s < n; ++s) out.col(s) = dense_forward(net.decoder, hidden.col(s));
        return out;
    }
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < chunk_count(n); ++c) {
        const auto [b, w] = chunk(c, n);
        Matrix z = affine(net.decoder.W, hidden.middleCols(b, w), net.decoder.b);
        activate_inplace(net.decoder.activation, z);
        out.middleCols(b, w) = z;
    }
    return out;
}

double lstm_autoencoder_loss(const LstmAutoencoder& net, const Matrix& inputs, const Matrix& targets,
                             LstmAutoencoder* grads, Exec exec) {
    net.cell.check_shapes();
    window_steps(net, inputs);
    check_batch(inputs, targets, inputs.rows(), net.decoder.out());
    if (net.decoder.in() != net.cell.output_size())
        throw InvalidArgument("lstm decoder input does not match the cell read-out size");
    return exec == Exec::serial ? lstm_loss_serial(net, inputs, targets, grads)
                                : lstm_loss_parallel(net, inputs, targets, grads);
}

Matrix lstm_autoencoder_predict(const LstmAutoencoder& net, const Matrix& inputs, Exec exec) {
    net.cell.check_shapes();
    const Eigen::Index steps = window_steps(net, inputs);
    const Eigen::Index n = inputs.cols();
    Matrix out(net.decoder.out(), n);
    if (exec == Exec::serial) {
        for (Eigen::Index s = 0; s < n; ++s) {
            const auto fwd = lstm_forward(net.cell, column_to_sequence(inputs.col(s), net.cell.input_size()));
            out.col(s) = dense_forward(net.decoder, fwd.ys.back());
        }
        return out;
    }
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < chunk_count(n); ++c) {
        const auto [b, w] = chunk(c, n);
        const auto fwd = lstm_chunk_forward(net.cell, inputs.middleCols(b, w), steps);
        const Matrix y = affine(net.cell.W_ym, fwd.back().m, net.cell.b_y);
        Matrix z = affine(net.decoder.W, y, net.decoder.b);
        activate_inplace(net.decoder.activation, z);
        out.middleCols(b, w) = z;
    }
    return out;
}

}  // namespace recon::nn
