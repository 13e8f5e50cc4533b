#pragma once

#include "recon/nn/loss.hpp"
#include "recon/nn/params.hpp"

namespace recon::nn {

/**
 * Execution route for the batch kernels.
 *
 * serial   - per-sample reference built from dense_forward/backward_dense and
 *            lstm_forward/backward_lstm; kept as the oracle for the batched path.
 * parallel - samples are cut into fixed chunks of kChunkColumns columns,
 *            each chunk runs as matrix-matrix products on an OpenMP thread,
 *            and chunk results are summed in chunk order. Output does not
 *            depend on the thread count.
 */
enum class Exec { serial, parallel };

inline constexpr Eigen::Index kChunkColumns = 8;

// Batches hold one sample per column. For the LSTM network a column is a
// flattened window: rows [k*L, (k+1)*L) are the L channels at window step k.
//
// Loss = mean over samples of reconstruction_loss(target, output)
//        (+ sparsity penalty on the encoder activations for the dense network).
// When `grads` is non-null it is overwritten with dLoss/dparams.

double dense_autoencoder_loss(const DenseAutoencoder& net, const Matrix& inputs, const Matrix& targets,
                              const LossConfig& loss, DenseAutoencoder* grads, Exec exec);
Matrix dense_autoencoder_predict(const DenseAutoencoder& net, const Matrix& inputs, Exec exec);
Matrix dense_encoder_activations(const DenseAutoencoder& net, const Matrix& inputs, Exec exec);

double lstm_autoencoder_loss(const LstmAutoencoder& net, const Matrix& inputs, const Matrix& targets,
                             LstmAutoencoder* grads, Exec exec);
Matrix lstm_autoencoder_predict(const LstmAutoencoder& net, const Matrix& inputs, Exec exec);

}  // namespace recon::nn
