#include "recon/models.hpp"

#include "recon/error.hpp"
#include "recon/nn/init.hpp"
#include "recon/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <functional>
#include <numeric>
#include <string>

namespace recon {

namespace {

enum Stream : std::uint64_t { init_stream = 1, shuffle_stream = 2, corrupt_stream = 3, elm_stream = 4 };

/// Samples (one per column) built from a series and a window.
Matrix window_matrix(const Matrix& values, const WindowConfig& w, const std::vector<std::size_t>& times) {
    const auto dim = static_cast<Eigen::Index>(w.dimension(static_cast<std::size_t>(values.cols())));
    Matrix out(dim, static_cast<Eigen::Index>(times.size()));
    for (std::size_t k = 0; k < times.size(); ++k) expand_window_into(values, times[k], w, out.col(static_cast<Eigen::Index>(k)));
    return out;
}

std::vector<std::size_t> all_times(std::size_t n) {
    std::vector<std::size_t> t(n);
    std::iota(t.begin(), t.end(), std::size_t{0});
    return t;
}

/// Window matrix with the center block removed.
Matrix neighbor_matrix(const Matrix& values, const WindowConfig& w, const std::vector<std::size_t>& times) {
    const Matrix full = window_matrix(values, w, times);
    const Eigen::Index channels = values.cols();
    const Eigen::Index center = static_cast<Eigen::Index>(w.k_back) * channels;
    Matrix out(full.rows() - channels, full.cols());
    out.topRows(center) = full.topRows(center);
    out.bottomRows(full.rows() - center - channels) = full.bottomRows(full.rows() - center - channels);
    return out;
}

struct EpochData {
    Matrix inputs;
    Matrix targets;
};

template <class Net, class LossFn>
double fit(Net& net, const TrainConfig& cfg, const std::function<EpochData(std::size_t)>& epoch_data,
           LossFn&& loss_fn) {
    nn::OptimizerState opt(nn::parameter_count(net), cfg.optimizer);
    Vector flat = nn::pack(net);
    Rng shuffle(derive_seed(cfg.seed, shuffle_stream));
    Net grads = net.zeros_like();
    double last_epoch_loss = 0.0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const EpochData data = epoch_data(epoch);
        const auto n = static_cast<std::size_t>(data.inputs.cols());
        std::vector<std::size_t> order = all_times(n);
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle.index(i)]);
        double sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(n, start + cfg.batch_size);
            Matrix x(data.inputs.rows(), static_cast<Eigen::Index>(stop - start));
            Matrix t(data.targets.rows(), x.cols());
            for (std::size_t k = start; k < stop; ++k) {
                x.col(static_cast<Eigen::Index>(k - start)) = data.inputs.col(static_cast<Eigen::Index>(order[k]));
                t.col(static_cast<Eigen::Index>(k - start)) = data.targets.col(static_cast<Eigen::Index>(order[k]));
            }
            sum += loss_fn(net, x, t, &grads);
            ++batches;
            nn::optimizer_step(opt, flat, nn::pack(grads));
            nn::unpack(net, flat);
        }
        last_epoch_loss = sum / static_cast<double>(std::max<std::size_t>(batches, 1));
    }
    return last_epoch_loss;
}

CorruptedSeries epoch_corruption(const TimeSeries& clean, const TrainConfig& cfg, std::size_t epoch) {
    return corrupt_series(clean, cfg.rho_train, derive_seed(cfg.seed, corrupt_stream, epoch));
}

/// Training data is transposed: columns are samples.
Matrix columns(const TimeSeries& s) { return s.values().transpose(); }

TrainConfig without_window(const TrainConfig& cfg) {
    TrainConfig c = cfg;
    c.window = {0, 0};
    return c;
}

TrainedModel make_model(ModelKind kind, const TimeSeries& data, const WindowConfig& window, NormParams norm,
                        const TrainConfig& cfg) {
    TrainedModel m;
    m.kind = kind;
    m.channels = data.channels();
    m.window = window;
    m.norm = std::move(norm);
    m.meta.seed = cfg.seed;
    m.meta.epochs = cfg.epochs;
    return m;
}

void require_times(const CorruptedSeries& c, const TrainedModel& m) {
    if (c.series().channels() != m.channels)
        throw InvalidArgument("series has " + std::to_string(c.series().channels()) + " channels, model expects " +
                              std::to_string(m.channels));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
    return splitmix64(splitmix64(base ^ splitmix64(stream)) + index);
}

std::string_view to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::AE: return "AE";
    case ModelKind::DAE: return "DAE";
    case ModelKind::EDAE_NN: return "EDAE_NN";
    case ModelKind::EDAE_LSTM: return "EDAE_LSTM";
    case ModelKind::IM: return "IM";
    case ModelKind::ELM: return "ELM";
    }
    return "IM";
}

ModelKind model_kind_from_string(std::string_view name) {
    for (ModelKind k : kAllModelKinds)
        if (to_string(k) == name) return k;
    throw InvalidArgument("unknown method `" + std::string(name) + "`");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
    if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
    if (!(rho_train >= 0.0 && rho_train <= 1.0)) throw InvalidArgument("rho_train must lie in [0, 1]");
    if (dense_hidden < 1 || lstm_hidden < 1 || lstm_code < 1 || elm_hidden < 1)
        throw InvalidArgument("hidden sizes must be positive");
    if (!(elm_lambda >= 0.0)) throw InvalidArgument("elm_lambda must be nonnegative");
    if (!(loss.sparsity_weight >= 0.0)) throw InvalidArgument("sparsity_weight must be nonnegative");
    if (!(loss.sparsity_target > 0.0 && loss.sparsity_target < 1.0))
        throw InvalidArgument("sparsity_target must lie in (0, 1)");
    if (!(optimizer.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
}

Matrix ElmParams::hidden(const Matrix& features) const {
    if (features.rows() != hidden_W.cols()) throw InvalidArgument("elm features have the wrong length");
    Matrix h(hidden_W.rows(), features.cols());
    const Eigen::Index n = features.cols();
    const Eigen::Index chunks = (n + nn::kChunkColumns - 1) / nn::kChunkColumns;
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < chunks; ++c) {
        const Eigen::Index b = c * nn::kChunkColumns;
        const Eigen::Index w = std::min(nn::kChunkColumns, n - b);
        Matrix a = hidden_W * features.middleCols(b, w);
        a.colwise() += hidden_b;
        h.middleCols(b, w) = (1.0 / (1.0 + (-a.array()).exp())).matrix();
    }
    return h;
}

Matrix ElmParams::predict(const Matrix& features) const { return output_W * hidden(features); }

void TrainedModel::check_consistency() const {
    if (channels < 1) throw InvalidArgument("model has no channels");
    if (norm.channels() != channels) throw InvalidArgument("normalization does not match channel count");
    const auto L = static_cast<Eigen::Index>(channels);
    const auto dim = static_cast<Eigen::Index>(window.dimension(channels));
    auto fail = [](const char* what) { throw InvalidArgument(std::string("inconsistent model: ") + what); };
    switch (kind) {
    case ModelKind::IM:
        if (!std::holds_alternative<std::monostate>(params)) fail("IM carries parameters");
        break;
    case ModelKind::AE:
    case ModelKind::DAE:
    case ModelKind::EDAE_NN: {
        const auto* net = std::get_if<nn::DenseAutoencoder>(&params);
        if (!net) fail("expected dense autoencoder parameters");
        if ((kind != ModelKind::EDAE_NN) && window.span() != 1) fail("AE/DAE use no window");
        if (kind == ModelKind::EDAE_NN && window.span() < 2) fail("EDAE needs a window");
        if (net->encoder.in() != dim || net->decoder.out() != dim) fail("dense autoencoder width");
        if (net->encoder.b.size() != net->encoder.out() || net->decoder.in() != net->encoder.out() ||
            net->decoder.b.size() != net->decoder.out())
            fail("dense autoencoder layer shapes");
        break;
    }
    case ModelKind::EDAE_LSTM: {
        const auto* net = std::get_if<nn::LstmAutoencoder>(&params);
        if (!net) fail("expected lstm autoencoder parameters");
        if (window.span() < 2) fail("EDAE needs a window");
        net->cell.check_shapes();
        if (net->cell.input_size() != L) fail("lstm input size");
        if (net->decoder.in() != net->cell.output_size() || net->decoder.out() != dim ||
            net->decoder.b.size() != dim)
            fail("lstm decoder shape");
        break;
    }
    case ModelKind::ELM: {
        const auto* elm = std::get_if<ElmParams>(&params);
        if (!elm) fail("expected ELM parameters");
        if (window.span() < 2) fail("ELM needs a window");
        if (elm->hidden_W.cols() != dim - L || elm->hidden_b.size() != elm->hidden_W.rows() ||
            elm->output_W.rows() != L || elm->output_W.cols() != elm->hidden_W.rows())
            fail("ELM shapes");
        break;
    }
    }
}

TrainedModel train_ae(const CorruptedSeries& corrupted, const TrainConfig& cfg_in) {
    cfg_in.validate();
    const TrainConfig cfg = without_window(cfg_in);
    const TimeSeries& data = corrupted.series();
    for (std::size_t l = 0; l < data.channels(); ++l)
        if (corrupted.mask().flags().col(static_cast<Eigen::Index>(l)).all()) throw UnreconstructableChannel(l);
    NormParams norm = fit_norm(data, corrupted.mask());
    TrainedModel model = make_model(ModelKind::AE, data, cfg.window, norm, cfg);
    const Matrix x = columns(apply_norm(data, norm));
    auto net = nn::init_dense_autoencoder(x.rows(), static_cast<Eigen::Index>(cfg.dense_hidden),
                                          derive_seed(cfg.seed, init_stream));
    model.meta.final_loss = fit(
        net, cfg, [&](std::size_t) { return EpochData{x, x}; },
        [&](const nn::DenseAutoencoder& n, const Matrix& in, const Matrix& t, nn::DenseAutoencoder* g) {
            return nn::dense_autoencoder_loss(n, in, t, cfg.loss, g, cfg.exec);
        });
    model.params = std::move(net);
    return model;
}

TrainedModel train_dae(const TimeSeries& clean, const TrainConfig& cfg_in) {
    cfg_in.validate();
    const TrainConfig cfg = without_window(cfg_in);
    NormParams norm = fit_norm(clean, CorruptionMask::none(clean.length(), clean.channels()));
    TrainedModel model = make_model(ModelKind::DAE, clean, cfg.window, norm, cfg);
    const Matrix target = columns(apply_norm(clean, norm));
    auto net = nn::init_dense_autoencoder(target.rows(), static_cast<Eigen::Index>(cfg.dense_hidden),
                                          derive_seed(cfg.seed, init_stream));
    model.meta.final_loss = fit(
        net, cfg,
        [&](std::size_t epoch) {
            return EpochData{columns(apply_norm(epoch_corruption(clean, cfg, epoch).series(), norm)), target};
        },
        [&](const nn::DenseAutoencoder& n, const Matrix& in, const Matrix& t, nn::DenseAutoencoder* g) {
            return nn::dense_autoencoder_loss(n, in, t, cfg.loss, g, cfg.exec);
        });
    model.params = std::move(net);
    return model;
}

TrainedModel train_edae(const TimeSeries& clean, const TrainConfig& cfg, EdaeVariant variant) {
    cfg.validate();
    if (cfg.window.span() < 2) throw InvalidArgument("EDAE needs k_back + k_fwd >= 1");
    NormParams norm = fit_norm(clean, CorruptionMask::none(clean.length(), clean.channels()));
    const ModelKind kind = variant == EdaeVariant::nn ? ModelKind::EDAE_NN : ModelKind::EDAE_LSTM;
    TrainedModel model = make_model(kind, clean, cfg.window, norm, cfg);
    const TimeSeries clean_n = apply_norm(clean, norm);
    const auto times = all_times(clean.length());
    const Matrix target = window_matrix(clean_n.values(), cfg.window, times);
    auto epoch_data = [&](std::size_t epoch) {
        const TimeSeries filled = apply_norm(init_fake_values(epoch_corruption(clean, cfg, epoch)), norm);
        return EpochData{window_matrix(filled.values(), cfg.window, times), target};
    };
    const auto dim = target.rows();
    if (variant == EdaeVariant::nn) {
        auto net = nn::init_dense_autoencoder(dim, static_cast<Eigen::Index>(cfg.dense_hidden),
                                              derive_seed(cfg.seed, init_stream));
        model.meta.final_loss =
            fit(net, cfg, epoch_data,
                [&](const nn::DenseAutoencoder& n, const Matrix& in, const Matrix& t, nn::DenseAutoencoder* g) {
                    return nn::dense_autoencoder_loss(n, in, t, cfg.loss, g, cfg.exec);
                });
        model.params = std::move(net);
    } else {
        auto net = nn::init_lstm_autoencoder(static_cast<Eigen::Index>(clean.channels()),
                                             static_cast<Eigen::Index>(cfg.lstm_hidden),
                                             static_cast<Eigen::Index>(cfg.lstm_code), dim, cfg.peephole,
                                             derive_seed(cfg.seed, init_stream));
        model.meta.final_loss =
            fit(net, cfg, epoch_data,
                [&](const nn::LstmAutoencoder& n, const Matrix& in, const Matrix& t, nn::LstmAutoencoder* g) {
                    return nn::lstm_autoencoder_loss(n, in, t, g, cfg.exec);
                });
        model.params = std::move(net);
    }
    return model;
}

TrainedModel baseline_im(const CorruptedSeries& corrupted) {
    const TimeSeries& s = corrupted.series();
    TrainedModel m;
    m.kind = ModelKind::IM;
    m.channels = s.channels();
    m.window = {0, 0};
    m.norm = fit_norm(s, corrupted.mask());
    return m;
}

ElmSystem elm_training_system(const TimeSeries& clean, const TrainConfig& cfg) {
    if (cfg.window.span() < 2) throw InvalidArgument("ELM needs k_back + k_fwd >= 1");
    ElmSystem sys;
    sys.norm = fit_norm(clean, CorruptionMask::none(clean.length(), clean.channels()));
    const CorruptedSeries corrupted = corrupt_series(clean, cfg.rho_train, derive_seed(cfg.seed, corrupt_stream));
    const TimeSeries filled = apply_norm(init_fake_values(corrupted), sys.norm);
    const auto times = all_times(clean.length());
    sys.features = neighbor_matrix(filled.values(), cfg.window, times);
    sys.targets = columns(apply_norm(clean, sys.norm));
    return sys;
}

TrainedModel baseline_elm(const TimeSeries& clean, const TrainConfig& cfg) {
    cfg.validate();
    ElmSystem sys = elm_training_system(clean, cfg);
    TrainedModel model = make_model(ModelKind::ELM, clean, cfg.window, sys.norm, cfg);
    model.meta.epochs = 1;

    ElmParams elm;
    elm.lambda = cfg.elm_lambda;
    const auto hid = static_cast<Eigen::Index>(cfg.elm_hidden);
    Rng rng(derive_seed(cfg.seed, elm_stream));
    elm.hidden_W.resize(hid, sys.features.rows());
    for (Eigen::Index k = 0; k < elm.hidden_W.size(); ++k) elm.hidden_W.data()[k] = rng.uniform(-1.0, 1.0);
    elm.hidden_b.resize(hid);
    for (Eigen::Index k = 0; k < hid; ++k) elm.hidden_b(k) = rng.uniform(-1.0, 1.0);

    const Matrix h = elm.hidden(sys.features);
    Matrix gram = h * h.transpose();
    gram.diagonal().array() += elm.lambda;
    const Matrix rhs = h * sys.targets.transpose();
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) throw NumericFailure("ELM normal equations are not positive definite");
    Matrix beta = llt.solve(rhs);
    for (int pass = 0; pass < 2; ++pass) beta += llt.solve(rhs - gram * beta);
    if (!beta.allFinite()) throw NumericFailure("ELM solve produced non-finite weights");
    elm.output_W = beta.transpose();

    model.meta.final_loss = (elm.output_W * h - sys.targets).squaredNorm() / static_cast<double>(sys.targets.size());
    model.params = std::move(elm);
    return model;
}

TrainedModel train_model(ModelKind kind, const TimeSeries& clean, const CorruptedSeries& corrupted,
                         const TrainConfig& cfg) {
    switch (kind) {
    case ModelKind::AE: return train_ae(corrupted, cfg);
    case ModelKind::DAE: return train_dae(clean, cfg);
    case ModelKind::EDAE_NN: return train_edae(clean, cfg, EdaeVariant::nn);
    case ModelKind::EDAE_LSTM: return train_edae(clean, cfg, EdaeVariant::lstm);
    case ModelKind::IM: return baseline_im(corrupted);
    case ModelKind::ELM: return baseline_elm(clean, cfg);
    }
    throw InvalidArgument("unknown model kind");
}

TimeSeries reconstruct(const TrainedModel& model, const CorruptedSeries& corrupted, nn::Exec exec) {
    require_times(corrupted, model);
    if (model.kind == ModelKind::IM) return init_fake_values(corrupted);
    model.check_consistency();

    const auto& mask = corrupted.mask();
    std::vector<std::size_t> times;
    for (std::size_t t = 0; t < mask.rows(); ++t)
        if (mask.row_has_corruption(t)) times.push_back(t);
    Matrix out_values = corrupted.series().values();
    if (times.empty()) return corrupted.series();

    const Eigen::Index L = static_cast<Eigen::Index>(model.channels);
    Matrix predicted;  // L x times, normalized
    switch (model.kind) {
    case ModelKind::AE:
    case ModelKind::DAE: {
        const Matrix x = window_matrix(apply_norm(corrupted.series(), model.norm).values(), model.window, times);
        predicted = nn::dense_autoencoder_predict(std::get<nn::DenseAutoencoder>(model.params), x, exec);
        break;
    }
    case ModelKind::EDAE_NN:
    case ModelKind::EDAE_LSTM: {
        const TimeSeries filled = apply_norm(init_fake_values(corrupted), model.norm);
        const Matrix x = window_matrix(filled.values(), model.window, times);
        const Matrix z = model.kind == ModelKind::EDAE_NN
                             ? nn::dense_autoencoder_predict(std::get<nn::DenseAutoencoder>(model.params), x, exec)
                             : nn::lstm_autoencoder_predict(std::get<nn::LstmAutoencoder>(model.params), x, exec);
        predicted = z.middleRows(static_cast<Eigen::Index>(model.window.k_back) * L, L);
        break;
    }
    case ModelKind::ELM: {
        const TimeSeries filled = apply_norm(init_fake_values(corrupted), model.norm);
        predicted = std::get<ElmParams>(model.params).predict(neighbor_matrix(filled.values(), model.window, times));
        break;
    }
    case ModelKind::IM: break;
    }
    if (!predicted.allFinite()) throw NumericFailure("model produced non-finite reconstructions");

    for (std::size_t k = 0; k < times.size(); ++k)
        for (Eigen::Index l = 0; l < L; ++l)
            if (mask(times[k], static_cast<std::size_t>(l)))
                out_values(static_cast<Eigen::Index>(times[k]), l) =
                    model.norm.inverse(static_cast<std::size_t>(l), predicted(l, static_cast<Eigen::Index>(k)));
    return corrupted.series().with_values(std::move(out_values));
}

}  // namespace recon
