#pragma once

#include "recon/nn/params.hpp"
#include "recon/rng.hpp"

#include <cstdint>

namespace recon::nn {

// Weights ~ U[-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))] per
// matrix (fan_in = columns, fan_out = rows), drawn in visiting order; biases
// zero except the LSTM forget-gate bias, which starts at 1.

DenseParams init_dense(Eigen::Index in, Eigen::Index out, Activation act, Rng& rng);
LstmParams init_lstm(Eigen::Index input, Eigen::Index hidden, Eigen::Index output, Peephole peephole, Rng& rng);

DenseAutoencoder init_dense_autoencoder(Eigen::Index dim, Eigen::Index hidden, std::uint64_t seed);
LstmAutoencoder init_lstm_autoencoder(Eigen::Index channels, Eigen::Index hidden, Eigen::Index code,
                                      Eigen::Index window_dim, Peephole peephole, std::uint64_t seed);

}  // namespace recon::nn
