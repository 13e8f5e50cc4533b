#pragma once

#include "recon/nn/batch_kernels.hpp"
#include "recon/nn/optimizer.hpp"
#include "recon/series.hpp"

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

namespace recon {

enum class ModelKind { AE, DAE, EDAE_NN, EDAE_LSTM, IM, ELM };

inline constexpr ModelKind kAllModelKinds[] = {ModelKind::AE,        ModelKind::DAE, ModelKind::EDAE_NN,
                                               ModelKind::EDAE_LSTM, ModelKind::IM,  ModelKind::ELM};

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

enum class EdaeVariant { nn, lstm };

struct TrainConfig {
    WindowConfig window{5, 5};
    std::size_t dense_hidden = 64;
    std::size_t lstm_hidden = 32;
    std::size_t lstm_code = 4;   ///< size of the cell read-out y fed to the decoder
    nn::Peephole peephole = nn::Peephole::full;
    nn::LossConfig loss;
    nn::AdamConfig optimizer;
    std::size_t epochs = 200;
    std::size_t batch_size = 32;
    double rho_train = 0.2;
    std::uint64_t seed = 0;
    std::size_t elm_hidden = 100;
    double elm_lambda = 1e-6;
    nn::Exec exec = nn::Exec::parallel;

    void validate() const;
};

/// Extreme learning machine: frozen random sigmoid layer, ridge-solved read-out.
struct ElmParams {
    Matrix hidden_W;  ///< hidden x features
    Vector hidden_b;
    Matrix output_W;  ///< outputs x hidden
    double lambda = 1e-6;

    Matrix hidden(const Matrix& features) const;  ///< features: one sample per column
    Matrix predict(const Matrix& features) const;
};

struct TrainingMeta {
    double final_loss = 0.0;
    std::size_t epochs = 0;
    std::uint64_t seed = 0;
};

using ModelParams = std::variant<std::monostate, nn::DenseAutoencoder, nn::LstmAutoencoder, ElmParams>;

struct TrainedModel {
    ModelKind kind = ModelKind::IM;
    std::size_t channels = 0;
    WindowConfig window;
    NormParams norm;
    ModelParams params;
    TrainingMeta meta;

    /// Throws InvalidArgument when params disagree with kind/window/channels.
    void check_consistency() const;
};

/// Plain autoencoder: the corrupted data is both input and target; no window.
TrainedModel train_ae(const CorruptedSeries& corrupted, const TrainConfig& cfg);
/// Fresh corruption each epoch, loss against the clean data; no window.
TrainedModel train_dae(const TimeSeries& clean, const TrainConfig& cfg);
/// Fake-initialized neighbor windows, reconstructing the full clean window.
TrainedModel train_edae(const TimeSeries& clean, const TrainConfig& cfg, EdaeVariant variant);
TrainedModel baseline_im(const CorruptedSeries& corrupted);
TrainedModel baseline_elm(const TimeSeries& clean, const TrainConfig& cfg);

/// Trains `kind`. AE consumes `corrupted`; every other trained kind learns from `clean`.
TrainedModel train_model(ModelKind kind, const TimeSeries& clean, const CorruptedSeries& corrupted,
                         const TrainConfig& cfg);

/// Replaces masked entries with model output; observed entries are copied verbatim.
TimeSeries reconstruct(const TrainedModel& model, const CorruptedSeries& corrupted,
                       nn::Exec exec = nn::Exec::parallel);

/// The regression problem ELM is fitted on: one column per time step.
struct ElmSystem {
    Matrix features;  ///< neighbor windows without the center block, normalized
    Matrix targets;   ///< clean center vectors, normalized
    NormParams norm;
};
ElmSystem elm_training_system(const TimeSeries& clean, const TrainConfig& cfg);

/// Seed for an independent random stream derived from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0);

}  // namespace recon
