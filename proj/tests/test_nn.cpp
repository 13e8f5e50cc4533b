#include "gradcheck.hpp"

#include "recon/error.hpp"
#include "recon/nn/batch_kernels.hpp"
#include "recon/nn/init.hpp"
#include "recon/nn/loss.hpp"
#include "recon/nn/optimizer.hpp"
#include "recon/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace recon;
using namespace recon::nn;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
    Matrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.uniform(-scale, scale);
    return m;
}

// A random cell with every tensor populated, so every gradient path is live.
LstmParams random_lstm(Eigen::Index d, Eigen::Index h, Eigen::Index o, Rng& rng, Peephole mode = Peephole::full) {
    LstmParams p = LstmParams::zeros(d, h, o, mode);
    for_each_tensor(p, [&](const std::string&, auto& t) {
        for (Eigen::Index k = 0; k < t.size(); ++k) t.data()[k] = rng.uniform(-0.6, 0.6);
    });
    p.apply_peephole_restriction(mode);
    return p;
}

std::vector<Vector> random_sequence(Eigen::Index d, std::size_t n, Rng& rng) {
    std::vector<Vector> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(random_matrix(d, 1, rng, 1.5).col(0));
    return xs;
}

// L = sum_n w_n . y_n + 0.5 |y_n|^2, so dL/dy_n = w_n + y_n.
double lstm_probe_loss(const LstmParams& p, const std::vector<Vector>& xs, const std::vector<Vector>& w) {
    const auto fwd = lstm_forward(p, xs);
    double l = 0.0;
    for (std::size_t n = 0; n < xs.size(); ++n) l += w[n].dot(fwd.ys[n]) + 0.5 * fwd.ys[n].squaredNorm();
    return l;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

TEST_CASE("dense_forward small cases") {
    DenseParams p{Matrix::Zero(3, 2), Vector::Zero(3), Activation::sigmoid};
    Vector x(2);
    x << 0.7, -2.0;
    CHECK(dense_forward(p, x).isApproxToConstant(0.5));

    DenseParams id{Matrix::Identity(2, 2), Vector::Zero(2), Activation::identity};
    CHECK(dense_forward(id, x) == x);

    DenseParams q{Matrix{{1.0, 2.0}}, Vector::Constant(1, 0.5), Activation::identity};
    CHECK(dense_forward(q, Vector::Ones(2))(0) == 3.5);

    CHECK_THROWS_AS(dense_forward(q, Vector::Ones(3)), InvalidArgument);
}

TEST_CASE("activation names round trip") {
    for (Activation a : {Activation::sigmoid, Activation::tanh, Activation::identity})
        CHECK(activation_from_string(to_string(a)) == a);
    CHECK_THROWS_AS(activation_from_string("relu"), InvalidArgument);
}

TEST_CASE("lstm_step with zero parameters") {
    const LstmParams p = LstmParams::zeros(3, 4, 2);
    Vector x(3);
    x << 1.0, -2.0, 0.5;
    const auto out = lstm_step(p, x, LstmState::zeros(4));
    CHECK(out.state.c.isZero());
    CHECK(out.state.m.isZero());
    CHECK(out.y.isZero());

    const auto fwd = lstm_forward(p, {x, x, x});
    const LstmStepCache& s = fwd.cache.steps.front();
    CHECK(s.i.isApproxToConstant(0.5));
    CHECK(s.f.isApproxToConstant(0.5));
    CHECK(s.o.isApproxToConstant(0.5));
    for (const Vector& y : fwd.ys) CHECK(y.isZero());
}

TEST_CASE("lstm gates stay inside (0,1)") {
    Rng rng(5);
    const LstmParams p = random_lstm(3, 6, 2, rng);
    const auto fwd = lstm_forward(p, random_sequence(3, 12, rng));
    for (const auto& s : fwd.cache.steps) {
        for (const Vector* g : {&s.i, &s.f, &s.o}) {
            CHECK((g->array() > 0.0).all());
            CHECK((g->array() < 1.0).all());
        }
        CHECK((s.c_tanh.array().abs() < 1.0).all());
        CHECK((s.g.array().abs() < 1.0).all());
    }
}

TEST_CASE("saturated forget gate carries the cell through") {
    LstmParams p = LstmParams::zeros(2, 3, 1);
    p.b_f.setConstant(20.0);
    p.b_i.setConstant(-20.0);
    LstmState prev = LstmState::zeros(3);
    prev.c << 0.8, -1.3, 2.0;
    Vector x(2);
    x << 0.4, -0.9;
    const auto out = lstm_step(p, x, prev);

    // Oracle: with W = 0 the cell is sigma(20) * c + sigma(-20) * tanh(0).
    const Vector expected = sigmoid(20.0) * prev.c;
    CHECK((out.state.c - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((out.state.c - prev.c).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("lstm_forward of length one equals lstm_step") {
    Rng rng(9);
    const LstmParams p = random_lstm(3, 4, 2, rng);
    const Vector x = random_matrix(3, 1, rng).col(0);
    const auto fwd = lstm_forward(p, {x});
    const auto step = lstm_step(p, x, LstmState::zeros(4));
    CHECK(fwd.ys.front() == step.y);
    CHECK(fwd.final_state.c == step.state.c);
    CHECK(fwd.final_state.m == step.state.m);
}

TEST_CASE("lstm output depends on input order") {
    Rng rng(11);
    const LstmParams p = random_lstm(2, 5, 3, rng);
    std::vector<Vector> xs = random_sequence(2, 6, rng);
    const Vector forward_y = lstm_forward(p, xs).ys.back();
    std::reverse(xs.begin(), xs.end());
    const Vector reversed_y = lstm_forward(p, xs).ys.back();
    CHECK((forward_y - reversed_y).norm() > 1e-6);
}

TEST_CASE("lstm rejects mismatched input") {
    const LstmParams p = LstmParams::zeros(3, 4, 2);
    CHECK_THROWS_AS(lstm_step(p, Vector::Zero(2), LstmState::zeros(4)), InvalidArgument);
    CHECK_THROWS_AS(lstm_forward(p, {}), InvalidArgument);
}

TEST_CASE("reconstruction loss") {
    CHECK(reconstruction_loss(Vector::Ones(4), Vector::Ones(4)) == 0.0);
    CHECK(reconstruction_loss(Vector::Ones(2), Vector::Zero(2)) == 1.0);
    CHECK(reconstruction_loss(Vector::Constant(1, 2.0), Vector::Constant(1, -1.0)) == 9.0);
    CHECK_THROWS_AS(reconstruction_loss(Vector::Ones(2), Vector::Ones(3)), InvalidArgument);
}

TEST_CASE("sparsity penalty") {
    LossConfig cfg;
    cfg.sparsity_weight = 0.0;
    CHECK(sparsity_penalty(Matrix::Constant(3, 4, 0.7), cfg) == 0.0);

    cfg.sparsity_weight = 2.0;
    CHECK(sparsity_penalty(Matrix::Constant(3, 4, 0.05), cfg) == doctest::Approx(0.0).epsilon(1e-15));

    // One unit whose batch mean is 0.5.
    Matrix h(1, 2);
    h << 0.2, 0.8;
    const double kl = 0.05 * std::log(0.05 / 0.5) + 0.95 * std::log(0.95 / 0.5);
    CHECK(kl == doctest::Approx(0.4944).epsilon(1e-3));
    CHECK(sparsity_penalty(h, cfg) == doctest::Approx(2.0 * kl).epsilon(1e-14));

    // Saturated activations are clamped rather than producing infinities.
    CHECK(std::isfinite(sparsity_penalty(Matrix::Zero(2, 3), cfg)));
    CHECK(std::isfinite(sparsity_penalty(Matrix::Ones(2, 3), cfg)));
}

TEST_CASE("dense backward matches finite differences") {
    Rng rng(21);
    for (Activation act : {Activation::sigmoid, Activation::tanh, Activation::identity}) {
        DenseParams p{random_matrix(4, 5, rng), random_matrix(4, 1, rng).col(0), act};
        const Vector x = random_matrix(5, 1, rng).col(0);
        const Vector w = random_matrix(4, 1, rng).col(0);
        auto loss = [&](const DenseParams& q) { return w.dot(dense_forward(q, x)); };
        DenseCache cache;
        dense_forward(p, x, cache);
        DenseParams grads = p.zeros_like();
        backward_dense(p, cache, w, grads);
        const auto r = test::check_gradients<DenseParams>(p, loss, grads);
        CHECK(r.max_rel_error < 1e-5);
    }
}

TEST_CASE("dense backward: zero upstream gradient gives zero gradients") {
    Rng rng(22);
    DenseParams p{random_matrix(3, 4, rng), Vector::Ones(3), Activation::sigmoid};
    DenseCache cache;
    dense_forward(p, Vector::Ones(4), cache);
    DenseParams grads = p.zeros_like();
    const Vector dx = backward_dense(p, cache, Vector::Zero(3), grads);
    CHECK(pack(grads).isZero(0.0));
    CHECK(dx.isZero(0.0));

    DenseCache wrong;
    wrong.input = Vector::Ones(2);
    wrong.output = Vector::Ones(3);
    CHECK_THROWS_AS(backward_dense(p, wrong, Vector::Ones(3), grads), InvalidState);
}

TEST_CASE("dense autoencoder gradients with sparsity penalty") {
    const DenseAutoencoder net = init_dense_autoencoder(6, 5, 31);
    Rng rng(32);
    const Matrix X = random_matrix(6, 7, rng);
    const Matrix T = random_matrix(6, 7, rng);
    LossConfig cfg;
    cfg.sparsity_weight = 0.5;
    cfg.sparsity_target = 0.1;
    REQUIRE(parameter_count(net) <= 200);
    for (Exec exec : {Exec::serial, Exec::parallel}) {
        DenseAutoencoder grads;
        dense_autoencoder_loss(net, X, T, cfg, &grads, exec);
        auto loss = [&](const DenseAutoencoder& q) { return dense_autoencoder_loss(q, X, T, cfg, nullptr, exec); };
        const auto r = test::check_gradients<DenseAutoencoder>(net, loss, grads);
        CHECK(r.max_rel_error < 1e-5);
    }
}

TEST_CASE("lstm BPTT matches finite differences") {
    Rng rng(41);
    for (Peephole mode : {Peephole::full, Peephole::diagonal}) {
        const LstmParams p = random_lstm(3, 4, 2, rng, mode);
        REQUIRE(parameter_count(p) <= 200);
        const auto xs = random_sequence(3, 5, rng);
        std::vector<Vector> w;
        for (int n = 0; n < 5; ++n) w.push_back(random_matrix(2, 1, rng).col(0));

        const auto fwd = lstm_forward(p, xs);
        std::vector<Vector> d_ys;
        for (std::size_t n = 0; n < xs.size(); ++n) d_ys.push_back(w[n] + fwd.ys[n]);
        LstmParams grads = p.zeros_like();
        backward_lstm(p, fwd.cache, d_ys, grads);

        auto loss = [&](const LstmParams& q) { return lstm_probe_loss(q, xs, w); };
        if (mode == Peephole::full) {
            const auto r = test::check_gradients<LstmParams>(p, loss, grads);
            CHECK(r.max_rel_error < 1e-5);
            // Every peephole path receives gradient.
            CHECK(grads.W_ic.cwiseAbs().minCoeff() > 0.0);
            CHECK(grads.W_fc.cwiseAbs().minCoeff() > 0.0);
            CHECK(grads.W_oc.cwiseAbs().minCoeff() > 0.0);
        } else {
            // Off-diagonal peepholes are not parameters here; their gradient is zero.
            for (const Matrix* m : {&grads.W_ic, &grads.W_fc, &grads.W_oc}) {
                Matrix off = *m;
                off.diagonal().setZero();
                CHECK(off.isZero(0.0));
            }
            // Compare only on the free parameters.
            const Vector analytic = pack(grads);
            const Vector base = pack(p);
            LstmParams probe = p;
            double worst = 0.0;
            LstmParams free_mask = p.zeros_like();
            for_each_tensor(free_mask, [](const std::string&, auto& t) { t.setOnes(); });
            free_mask.apply_peephole_restriction(Peephole::diagonal);
            const Vector free = pack(free_mask);
            for (Eigen::Index k = 0; k < base.size(); ++k) {
                if (free(k) == 0.0) continue;
                Vector s = base;
                s(k) += 1e-5;
                unpack(probe, s);
                const double up = loss(probe);
                s(k) = base(k) - 1e-5;
                unpack(probe, s);
                const double num = (up - loss(probe)) / 2e-5;
                const double a = analytic(k);
                worst = std::max(worst, std::abs(num - a) / std::max({std::abs(num), std::abs(a), 1e-6}));
            }
            CHECK(worst < 1e-5);
        }
    }
}

TEST_CASE("lstm zero upstream gradient gives zero gradients") {
    Rng rng(43);
    const LstmParams p = random_lstm(3, 4, 2, rng);
    const auto xs = random_sequence(3, 4, rng);
    const auto fwd = lstm_forward(p, xs);
    LstmParams grads = p.zeros_like();
    backward_lstm(p, fwd.cache, std::vector<Vector>(4, Vector::Zero(2)), grads);
    CHECK(pack(grads).isZero(0.0));

    const LstmParams other = random_lstm(3, 5, 2, rng);
    LstmParams other_grads = other.zeros_like();
    CHECK_THROWS_AS(backward_lstm(other, fwd.cache, std::vector<Vector>(4, Vector::Zero(2)), other_grads),
                    InvalidState);
}

TEST_CASE("single-step read-out gradient equals the dense backward on the same graph") {
    Rng rng(47);
    const LstmParams p = random_lstm(3, 4, 3, rng);
    const Vector x = random_matrix(3, 1, rng).col(0);
    const Vector dy = random_matrix(3, 1, rng).col(0);
    const auto fwd = lstm_forward(p, {x});
    LstmParams grads = p.zeros_like();
    backward_lstm(p, fwd.cache, {dy}, grads);

    DenseParams readout{p.W_ym, p.b_y, Activation::identity};
    DenseCache cache;
    dense_forward(readout, fwd.final_state.m, cache);
    DenseParams dense_grads = readout.zeros_like();
    backward_dense(readout, cache, dy, dense_grads);
    CHECK((grads.W_ym - dense_grads.W).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((grads.b_y - dense_grads.b).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("lstm autoencoder gradients") {
    const LstmAutoencoder net = init_lstm_autoencoder(2, 3, 2, 6, Peephole::full, 51);
    REQUIRE(parameter_count(net) <= 200);
    Rng rng(52);
    // Window of three steps over two channels.
    const Matrix X = random_matrix(6, 5, rng);
    const Matrix T = random_matrix(6, 5, rng);
    for (Exec exec : {Exec::serial, Exec::parallel}) {
        LstmAutoencoder grads;
        lstm_autoencoder_loss(net, X, T, &grads, exec);
        auto loss = [&](const LstmAutoencoder& q) { return lstm_autoencoder_loss(q, X, T, nullptr, exec); };
        const auto r = test::check_gradients<LstmAutoencoder>(net, loss, grads);
        CHECK(r.max_rel_error < 1e-5);
    }
}

TEST_CASE("optimizer step") {
    OptimizerState st(3, AdamConfig{});
    Vector params(3);
    params << 1.0, -2.0, 0.5;
    const Vector before = params;
    optimizer_step(st, params, Vector::Zero(3));
    CHECK(params == before);
    CHECK(st.step == 1);

    Vector g(3);
    g << 0.3, -0.1, 2.0;
    for (int i = 0; i < 100; ++i) optimizer_step(st, params, g);
    CHECK(st.step == 101);
    CHECK(params(0) < before(0));
    CHECK(params(1) > before(1));
    CHECK(params(2) < before(2));

    CHECK_THROWS_AS(optimizer_step(st, params, Vector::Zero(2)), InvalidArgument);
}

TEST_CASE("parameter initialization") {
    const LstmAutoencoder a = init_lstm_autoencoder(3, 8, 4, 33, Peephole::full, 77);
    const LstmAutoencoder b = init_lstm_autoencoder(3, 8, 4, 33, Peephole::full, 77);
    CHECK(pack(a) == pack(b));
    CHECK(a.cell.b_f.isApproxToConstant(1.0, 0.0));
    CHECK(a.cell.b_i.isZero(0.0));
    CHECK(a.decoder.b.isZero(0.0));

    const LstmAutoencoder diag = init_lstm_autoencoder(3, 8, 4, 33, Peephole::diagonal, 77);
    Matrix off = diag.cell.W_oc;
    off.diagonal().setZero();
    CHECK(off.isZero(0.0));

    const double bound = std::sqrt(6.0 / (8.0 + 3.0));
    CHECK(a.cell.W_ix.cwiseAbs().maxCoeff() <= bound);

    Rng rng(78);
    const DenseParams wide = init_dense(10000, 1, Activation::identity, rng);
    const double wide_bound = std::sqrt(6.0 / 10001.0);
    CHECK(wide.W.cwiseAbs().maxCoeff() <= wide_bound);
    CHECK(std::abs(wide.W.mean()) < wide_bound / 10.0);
}
