#include "recon/nn/init.hpp"

#include "recon/error.hpp"

#include <cmath>

namespace recon::nn {

namespace {

void fill_glorot(Matrix& m, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.uniform(-bound, bound);
}

void fill_tensor(Matrix& m, Rng& rng) { fill_glorot(m, rng); }
void fill_tensor(Vector& v, Rng&) { v.setZero(); }

}  // namespace

DenseParams init_dense(Eigen::Index in, Eigen::Index out, Activation act, Rng& rng) {
    if (in < 1 || out < 1) throw InvalidArgument("dense layer dimensions must be positive");
    DenseParams p{Matrix(out, in), Vector(out), act};
    for_each_tensor(p, [&](const std::string&, auto& t) { fill_tensor(t, rng); });
    return p;
}

LstmParams init_lstm(Eigen::Index d, Eigen::Index h, Eigen::Index o, Peephole peephole, Rng& rng) {
    if (d < 1 || h < 1 || o < 1) throw InvalidArgument("lstm dimensions must be positive");
    LstmParams p = LstmParams::zeros(d, h, o, peephole);
    for_each_tensor(p, [&](const std::string&, auto& t) { fill_tensor(t, rng); });
    p.b_f.setOnes();
    p.apply_peephole_restriction(peephole);
    return p;
}

DenseAutoencoder init_dense_autoencoder(Eigen::Index dim, Eigen::Index hidden, std::uint64_t seed) {
    Rng rng(seed);
    DenseAutoencoder net;
    net.encoder = init_dense(dim, hidden, Activation::sigmoid, rng);
    net.decoder = init_dense(hidden, dim, Activation::identity, rng);
    return net;
}

LstmAutoencoder init_lstm_autoencoder(Eigen::Index channels, Eigen::Index hidden, Eigen::Index code,
                                      Eigen::Index window_dim, Peephole peephole, std::uint64_t seed) {
    Rng rng(seed);
    LstmAutoencoder net;
    net.cell = init_lstm(channels, hidden, code, peephole, rng);
    net.decoder = init_dense(code, window_dim, Activation::identity, rng);
    return net;
}

}  // namespace recon::nn
