#include "recon/error.hpp"
#include "recon/evaluation.hpp"
#include "recon/models.hpp"
#include "recon/nn/init.hpp"
#include "recon/rng.hpp"
#include "recon/synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <optional>

using namespace recon;

namespace {

// Straight scan outward from each masked entry; shares no code with the library.
Matrix brute_force_neighbor_mean(const Matrix& values, const BoolMatrix& mask) {
    Matrix out = values;
    for (Eigen::Index l = 0; l < values.cols(); ++l)
        for (Eigen::Index t = 0; t < values.rows(); ++t) {
            if (!mask(t, l)) continue;
            std::optional<double> left, right;
            for (Eigen::Index k = t - 1; k >= 0 && !left; --k)
                if (!mask(k, l)) left = values(k, l);
            for (Eigen::Index k = t + 1; k < values.rows() && !right; ++k)
                if (!mask(k, l)) right = values(k, l);
            if (left && right)
                out(t, l) = (*left + *right) / 2.0;
            else
                out(t, l) = left ? *left : *right;
        }
    return out;
}

TrainConfig quick_config(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.seed = seed;
    cfg.window = {2, 2};
    cfg.dense_hidden = 8;
    cfg.lstm_hidden = 6;
    cfg.elm_hidden = 20;
    return cfg;
}

TimeSeries small_power(std::uint64_t seed) {
    PowerProfileConfig p;
    p.days = 1;
    p.samples_per_day = 240;
    p.seed = seed;
    return generate_power_profile(p);
}

double masked_std(const TimeSeries& s, const CorruptionMask& m) {
    std::vector<double> v;
    for (std::size_t t = 0; t < s.length(); ++t)
        for (std::size_t l = 0; l < s.channels(); ++l)
            if (m(t, l)) v.push_back(s(t, l));
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

TEST_CASE("model kind names") {
    for (ModelKind k : kAllModelKinds) CHECK(model_kind_from_string(to_string(k)) == k);
    CHECK(to_string(ModelKind::EDAE_LSTM) == "EDAE_LSTM");
    CHECK_THROWS_AS(model_kind_from_string("GRU"), InvalidArgument);
}

TEST_CASE("train config validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.rho_train = 1.2;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("IM matches the brute-force neighbor scan") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        Matrix m(60, 3);
        for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.uniform(-5.0, 5.0);
        const TimeSeries s(m);
        const CorruptedSeries c = corrupt_series(s, 0.1 + 0.04 * static_cast<double>(seed % 10), seed + 100);
        const TimeSeries rec = reconstruct(baseline_im(c), c);
        const Matrix oracle = brute_force_neighbor_mean(c.series().values(), c.mask().flags());
        CHECK(rec.values() == oracle);
        CHECK(rec.values() == init_fake_values(c).values());
    }
    const Matrix gap{{2.0}, {0.0}, {4.0}};
    BoolMatrix f(3, 1);
    f << false, true, false;
    CHECK(reconstruct(baseline_im(CorruptedSeries(TimeSeries(gap), CorruptionMask(f))),
                      CorruptedSeries(TimeSeries(gap), CorruptionMask(f)))(1, 0) == 3.0);
}

TEST_CASE("ELM output weights solve the ridge normal equations") {
    const TimeSeries clean = small_power(1);
    TrainConfig cfg = quick_config(5);
    cfg.elm_hidden = 100;
    const TrainedModel model = baseline_elm(clean, cfg);
    const auto& elm = std::get<ElmParams>(model.params);
    const ElmSystem sys = elm_training_system(clean, cfg);

    // H^T is samples x hidden; the normal equations read (H H^T + lambda I) W^T = H T^T.
    const Matrix h = elm.hidden(sys.features);
    Matrix lhs = h * h.transpose();
    lhs.diagonal().array() += elm.lambda;
    const Matrix rhs = h * sys.targets.transpose();
    const double residual = (lhs * elm.output_W.transpose() - rhs).norm() / rhs.norm();
    CHECK(residual < 1e-8);
    CHECK(elm.lambda == 1e-6);
    CHECK(elm.hidden_W.rows() == 100);
    CHECK(elm.hidden_W.cols() == static_cast<Eigen::Index>(2 * 2 * 3));  // window without the center block

    cfg.elm_lambda = 1e14;
    const TrainedModel heavy = baseline_elm(clean, cfg);
    const auto& heavy_elm = std::get<ElmParams>(heavy.params);
    CHECK(heavy_elm.output_W.cwiseAbs().maxCoeff() < 1e-8);
    CHECK(heavy_elm.predict(sys.features).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("reconstruct touches masked entries only") {
    const TimeSeries clean = small_power(2);
    const CorruptedSeries c = corrupt_series(clean, 0.3, 4);
    for (ModelKind kind : kAllModelKinds) {
        CAPTURE(to_string(kind));
        const TrainedModel m = train_model(kind, clean, c, quick_config(6));
        CHECK_NOTHROW(m.check_consistency());
        const TimeSeries rec = reconstruct(m, c);
        REQUIRE(rec.values().rows() == clean.values().rows());
        for (std::size_t t = 0; t < clean.length(); ++t)
            for (std::size_t l = 0; l < clean.channels(); ++l)
                if (!c.mask()(t, l)) REQUIRE(rec(t, l) == c.series()(t, l));

        const CorruptedSeries untouched = corrupt_series(clean, 0.0, 4);
        CHECK(reconstruct(m, untouched).values() == clean.values());
    }
}

TEST_CASE("reconstruct routes agree") {
    const TimeSeries clean = small_power(3);
    const CorruptedSeries c = corrupt_series(clean, 0.2, 5);
    for (ModelKind kind : {ModelKind::AE, ModelKind::DAE, ModelKind::EDAE_NN, ModelKind::EDAE_LSTM}) {
        CAPTURE(to_string(kind));
        const TrainedModel m = train_model(kind, clean, c, quick_config(7));
        const Matrix a = reconstruct(m, c, nn::Exec::serial).values();
        const Matrix b = reconstruct(m, c, nn::Exec::parallel).values();
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("reconstruct rejects a mismatched series") {
    const TimeSeries clean = small_power(4);
    const CorruptedSeries c = corrupt_series(clean, 0.2, 5);
    const TrainedModel m = train_model(ModelKind::DAE, clean, c, quick_config(8));
    const TimeSeries one = generate_random_sequence({.n = 50, .seed = 1});
    CHECK_THROWS_AS(reconstruct(m, corrupt_series(one, 0.2, 1)), InvalidArgument);
}

TEST_CASE("training is deterministic and seed-dependent") {
    const TimeSeries clean = small_power(5);
    const CorruptedSeries c = corrupt_series(clean, 0.2, 6);
    for (ModelKind kind : {ModelKind::AE, ModelKind::DAE, ModelKind::EDAE_NN, ModelKind::EDAE_LSTM, ModelKind::ELM}) {
        CAPTURE(to_string(kind));
        const TimeSeries a = reconstruct(train_model(kind, clean, c, quick_config(9)), c);
        const TimeSeries b = reconstruct(train_model(kind, clean, c, quick_config(9)), c);
        const TimeSeries other = reconstruct(train_model(kind, clean, c, quick_config(10)), c);
        CHECK(a.values() == b.values());
        CHECK(a.values() != other.values());
    }
}

TEST_CASE("training does not depend on the execution route") {
    const TimeSeries clean = small_power(6);
    const CorruptedSeries c = corrupt_series(clean, 0.2, 7);
    TrainConfig serial = quick_config(11);
    serial.exec = nn::Exec::serial;
    TrainConfig parallel = quick_config(11);
    for (ModelKind kind : {ModelKind::DAE, ModelKind::EDAE_LSTM}) {
        const Matrix a = reconstruct(train_model(kind, clean, c, serial), c).values();
        const Matrix b = reconstruct(train_model(kind, clean, c, parallel), c).values();
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("DAE gives every all-zero input the same output") {
    const TimeSeries clean = generate_random_sequence({.n = 400, .seed = 3});
    TrainConfig cfg = quick_config(12);
    cfg.epochs = 20;
    const TrainedModel m = train_dae(clean, cfg);
    const CorruptedSeries probe = corrupt_series(clean, 0.5, 13);
    const TimeSeries rec = reconstruct(m, probe);
    CHECK(masked_std(rec, probe.mask()) < 1e-9);
}

TEST_CASE("DAE with no training corruption learns the clean map") {
    const TimeSeries clean = generate_random_sequence({.n = 300, .seed = 4});
    TrainConfig a = quick_config(14);
    a.rho_train = 0.0;
    const TrainedModel dae = train_dae(clean, a);
    const TrainedModel ae = train_ae(corrupt_series(clean, 0.0, 1), a);
    const auto& d = std::get<nn::DenseAutoencoder>(dae.params);
    const auto& e = std::get<nn::DenseAutoencoder>(ae.params);
    CHECK(nn::pack(d) == nn::pack(e));
}

TEST_CASE("AE on uncorrupted data reconstructs closely") {
    const TimeSeries clean = generate_random_sequence({.n = 1000, .seed = 21});
    TrainConfig cfg;
    cfg.seed = 22;
    const TrainedModel m = train_ae(corrupt_series(clean, 0.0, 0), cfg);
    const auto& net = std::get<nn::DenseAutoencoder>(m.params);
    const TimeSeries n = apply_norm(clean, m.norm);
    const Matrix z = nn::dense_autoencoder_predict(net, n.values().transpose(), nn::Exec::parallel);
    const TimeSeries rec = denormalize(clean.with_values(z.transpose()), m.norm);
    const double err = nmse(clean, rec, CorruptionMask::none(1000, 1), NmseScope::all);
    MESSAGE("clean-data AE NMSE " << err);
    CHECK(err < 0.05);
}

TEST_CASE("loss falls over the first 50 optimizer steps") {
    const TimeSeries clean = generate_random_sequence({.n = 200, .seed = 30});
    const CorruptedSeries c = corrupt_series(clean, 0.2, 31);
    const auto [clean_n, norm] = normalize(clean, CorruptionMask::none(200, 1));
    const Matrix corrupted_n = apply_norm(c.series(), norm).values().transpose();
    const WindowConfig window{2, 2};
    const TimeSeries filled = apply_norm(init_fake_values(c), norm);
    Matrix win_in(5, 200), win_target(5, 200);
    for (std::size_t t = 0; t < 200; ++t) {
        win_in.col(static_cast<Eigen::Index>(t)) = expand_window(filled, t, window);
        win_target.col(static_cast<Eigen::Index>(t)) = expand_window(clean_n, t, window);
    }
    const nn::LossConfig loss;

    auto run = [](auto net, auto loss_fn) {
        nn::OptimizerState opt(nn::parameter_count(net), nn::AdamConfig{});
        auto grads = net.zeros_like();
        const double first = loss_fn(net, &grads);
        for (int step = 0; step < 50; ++step) {
            loss_fn(net, &grads);
            Vector flat = nn::pack(net);
            optimizer_step(opt, flat, nn::pack(grads));
            nn::unpack(net, flat);
        }
        return std::pair{first, loss_fn(net, static_cast<decltype(&grads)>(nullptr))};
    };

    SUBCASE("AE") {
        auto [a, b] = run(nn::init_dense_autoencoder(1, 16, 1), [&](const auto& n, auto* g) {
            return nn::dense_autoencoder_loss(n, corrupted_n, corrupted_n, loss, g, nn::Exec::parallel);
        });
        CHECK(b < a);
    }
    SUBCASE("DAE") {
        const Matrix target = clean_n.values().transpose();
        auto [a, b] = run(nn::init_dense_autoencoder(1, 16, 2), [&](const auto& n, auto* g) {
            return nn::dense_autoencoder_loss(n, corrupted_n, target, loss, g, nn::Exec::parallel);
        });
        CHECK(b < a);
    }
    SUBCASE("NN-EDAE") {
        auto [a, b] = run(nn::init_dense_autoencoder(5, 16, 3), [&](const auto& n, auto* g) {
            return nn::dense_autoencoder_loss(n, win_in, win_target, loss, g, nn::Exec::parallel);
        });
        CHECK(b < a);
    }
    SUBCASE("LSTM-EDAE") {
        auto [a, b] = run(nn::init_lstm_autoencoder(1, 8, 4, 5, nn::Peephole::full, 4), [&](const auto& n, auto* g) {
            return nn::lstm_autoencoder_loss(n, win_in, win_target, g, nn::Exec::parallel);
        });
        CHECK(b < a);
    }
}

TEST_CASE("EDAE and ELM need a neighbor window") {
    const TimeSeries clean = small_power(7);
    TrainConfig cfg = quick_config(1);
    cfg.window = {0, 0};
    CHECK_THROWS_AS(train_edae(clean, cfg, EdaeVariant::nn), InvalidArgument);
    CHECK_THROWS_AS(baseline_elm(clean, cfg), InvalidArgument);
}

TEST_CASE("AE rejects a channel with nothing observed") {
    Matrix m = Matrix::Ones(10, 2);
    BoolMatrix f = BoolMatrix::Constant(10, 2, false);
    f.col(0).setConstant(true);
    const CorruptedSeries c{TimeSeries{m}, CorruptionMask{f}};
    CHECK_THROWS_AS(train_ae(c, quick_config(1)), UnreconstructableChannel);
    CHECK_THROWS_AS(reconstruct(baseline_im(c), c), UnreconstructableChannel);
}
