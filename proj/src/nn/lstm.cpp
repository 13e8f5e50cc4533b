#include "recon/nn/lstm.hpp"

#include "recon/error.hpp"

#include <cmath>
#include <string>

namespace recon::nn {

namespace {

Vector sigmoid(const Vector& a) {
    return a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Vector tanh_of(const Vector& a) {
    return a.unaryExpr([](double v) { return std::tanh(v); });
}

void require(bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("lstm parameter shape mismatch: ") + what);
}

void keep_diagonal(Matrix& m) {
    const Vector d = m.diagonal();
    m.setZero();
    m.diagonal() = d;
}

}  // namespace

LstmParams LstmParams::zeros(Eigen::Index d, Eigen::Index h, Eigen::Index o, Peephole peephole) {
    LstmParams p;
    for (Matrix* m : {&p.W_ix, &p.W_fx, &p.W_cx, &p.W_ox}) *m = Matrix::Zero(h, d);
    for (Matrix* m : {&p.W_im, &p.W_ic, &p.W_fm, &p.W_fc, &p.W_cm, &p.W_om, &p.W_oc}) *m = Matrix::Zero(h, h);
    for (Vector* v : {&p.b_i, &p.b_f, &p.b_c, &p.b_o}) *v = Vector::Zero(h);
    p.W_ym = Matrix::Zero(o, h);
    p.b_y = Vector::Zero(o);
    p.peephole = peephole;
    return p;
}

void LstmParams::check_shapes() const {
    const Eigen::Index d = input_size(), h = hidden_size(), o = output_size();
    require(d > 0 && h > 0 && o > 0, "empty dimension");
    for (const Matrix* m : {&W_ix, &W_fx, &W_cx, &W_ox}) require(m->rows() == h && m->cols() == d, "input weights");
    for (const Matrix* m : {&W_im, &W_ic, &W_fm, &W_fc, &W_cm, &W_om, &W_oc})
        require(m->rows() == h && m->cols() == h, "recurrent/peephole weights");
    for (const Vector* v : {&b_i, &b_f, &b_c, &b_o}) require(v->size() == h, "gate bias");
    require(W_ym.cols() == h && b_y.size() == o, "read-out");
}

void LstmParams::apply_peephole_restriction(Peephole mode) {
    if (mode != Peephole::diagonal) return;
    keep_diagonal(W_ic);
    keep_diagonal(W_fc);
    keep_diagonal(W_oc);
}

namespace {

LstmStepCache step_cached(const LstmParams& p, const Vector& x, const Vector& m_prev, const Vector& c_prev) {
    LstmStepCache s;
    s.x = x;
    s.m_prev = m_prev;
    s.c_prev = c_prev;
    s.i = sigmoid(p.W_ix * x + p.W_im * m_prev + p.W_ic * c_prev + p.b_i);
    s.f = sigmoid(p.W_fx * x + p.W_fm * m_prev + p.W_fc * c_prev + p.b_f);
    s.g = tanh_of(p.W_cx * x + p.W_cm * m_prev + p.b_c);
    s.c = s.f.cwiseProduct(c_prev) + s.i.cwiseProduct(s.g);
    s.o = sigmoid(p.W_ox * x + p.W_om * m_prev + p.W_oc * s.c + p.b_o);
    s.c_tanh = tanh_of(s.c);
    s.m = s.o.cwiseProduct(s.c_tanh);
    return s;
}

}  // namespace

LstmStepResult lstm_step(const LstmParams& p, const Vector& x, const LstmState& prev) {
    p.check_shapes();
    if (x.size() != p.input_size())
        throw InvalidArgument("lstm input has length " + std::to_string(x.size()) + ", expected " +
                              std::to_string(p.input_size()));
    if (prev.m.size() != p.hidden_size() || prev.c.size() != p.hidden_size())
        throw InvalidArgument("lstm state has the wrong hidden size");
    LstmStepCache s = step_cached(p, x, prev.m, prev.c);
    Vector y = p.W_ym * s.m + p.b_y;
    return {{std::move(s.m), std::move(s.c)}, std::move(y)};
}

LstmForwardResult lstm_forward(const LstmParams& p, const std::vector<Vector>& xs) {
    p.check_shapes();
    if (xs.empty()) throw InvalidArgument("lstm_forward needs a nonempty sequence");
    LstmForwardResult r;
    r.cache.input = p.input_size();
    r.cache.hidden = p.hidden_size();
    r.cache.output = p.output_size();
    r.cache.steps.reserve(xs.size());
    Vector m = Vector::Zero(p.hidden_size());
    Vector c = Vector::Zero(p.hidden_size());
    for (const Vector& x : xs) {
        if (x.size() != p.input_size()) throw InvalidArgument("lstm sequence element has wrong length");
        r.cache.steps.push_back(step_cached(p, x, m, c));
        m = r.cache.steps.back().m;
        c = r.cache.steps.back().c;
        r.ys.push_back(p.W_ym * m + p.b_y);
    }
    r.final_state = {std::move(m), std::move(c)};
    return r;
}

std::vector<Vector> backward_lstm(const LstmParams& p, const LstmCache& cache,
                                  const std::vector<Vector>& d_ys, LstmParams& g) {
    if (cache.input != p.input_size() || cache.hidden != p.hidden_size() || cache.output != p.output_size() ||
        cache.steps.empty())
        throw InvalidState("lstm cache does not belong to these parameters");
    if (d_ys.size() != cache.steps.size())
        throw InvalidArgument("need one output gradient per cached step");
    g.check_shapes();
    if (g.hidden_size() != p.hidden_size() || g.input_size() != p.input_size() || g.output_size() != p.output_size())
        throw InvalidArgument("lstm gradient buffer has the wrong shape");

    const Eigen::Index h = p.hidden_size();
    std::vector<Vector> d_xs(cache.steps.size());
    Vector dm_next = Vector::Zero(h);  // dL/dm_n arriving from step n+1
    Vector dc_next = Vector::Zero(h);  // dL/dc_n arriving from step n+1

    for (std::size_t n = cache.steps.size(); n-- > 0;) {
        const LstmStepCache& s = cache.steps[n];
        const Vector& dy = d_ys[n];
        if (dy.size() != p.output_size()) throw InvalidArgument("lstm output gradient has wrong length");

        g.W_ym.noalias() += dy * s.m.transpose();
        g.b_y += dy;
        const Vector dm = p.W_ym.transpose() * dy + dm_next;

        const Vector da_o = dm.cwiseProduct(s.c_tanh).cwiseProduct(s.o.cwiseProduct(Vector::Ones(h) - s.o));
        const Vector dc = dm.cwiseProduct(s.o).cwiseProduct(Vector::Ones(h) - s.c_tanh.cwiseAbs2()) +
                          p.W_oc.transpose() * da_o + dc_next;
        const Vector da_i = dc.cwiseProduct(s.g).cwiseProduct(s.i.cwiseProduct(Vector::Ones(h) - s.i));
        const Vector da_f = dc.cwiseProduct(s.c_prev).cwiseProduct(s.f.cwiseProduct(Vector::Ones(h) - s.f));
        const Vector da_g = dc.cwiseProduct(s.i).cwiseProduct(Vector::Ones(h) - s.g.cwiseAbs2());

        g.W_ix.noalias() += da_i * s.x.transpose();
        g.W_im.noalias() += da_i * s.m_prev.transpose();
        g.W_ic.noalias() += da_i * s.c_prev.transpose();
        g.b_i += da_i;
        g.W_fx.noalias() += da_f * s.x.transpose();
        g.W_fm.noalias() += da_f * s.m_prev.transpose();
        g.W_fc.noalias() += da_f * s.c_prev.transpose();
        g.b_f += da_f;
        g.W_cx.noalias() += da_g * s.x.transpose();
        g.W_cm.noalias() += da_g * s.m_prev.transpose();
        g.b_c += da_g;
        g.W_ox.noalias() += da_o * s.x.transpose();
        g.W_om.noalias() += da_o * s.m_prev.transpose();
        g.W_oc.noalias() += da_o * s.c.transpose();
        g.b_o += da_o;

        dm_next = p.W_im.transpose() * da_i + p.W_fm.transpose() * da_f + p.W_cm.transpose() * da_g +
                  p.W_om.transpose() * da_o;
        dc_next = s.f.cwiseProduct(dc) + p.W_ic.transpose() * da_i + p.W_fc.transpose() * da_f;
        d_xs[n] = p.W_ix.transpose() * da_i + p.W_fx.transpose() * da_f + p.W_cx.transpose() * da_g +
                  p.W_ox.transpose() * da_o;
    }
    g.apply_peephole_restriction(p.peephole);
    return d_xs;
}

}  // namespace recon::nn
