#include "recon/model_io.hpp"

#include "recon/error.hpp"
#include "recon/fs_util.hpp"
#include "recon/rng.hpp"

#include <bit>
#include <cstring>

namespace recon {

namespace {

constexpr std::string_view kMagic = "RCNMODEL";

static_assert(std::endian::native == std::endian::little, "model I/O assumes a little-endian host");

class Writer {
public:
    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.append(s);
    }
    void raw(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
    std::string& buffer() { return buf_; }

private:
    std::string buf_;
};

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    std::uint32_t u32() { return pod<std::uint32_t>(); }
    std::uint64_t u64() { return pod<std::uint64_t>(); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const std::uint32_t n = u32();
        return std::string(take(n));
    }
    std::string_view take(std::size_t n) {
        if (n > bytes_.size() - pos_) throw CorruptFile("model file is truncated");
        auto out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    template <class T>
    T pod() {
        T v;
        std::memcpy(&v, take(sizeof v).data(), sizeof v);
        return v;
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

std::uint32_t activation_code(nn::Activation a) { return static_cast<std::uint32_t>(a); }

nn::Activation activation_from_code(std::uint32_t c) {
    if (c > 2) throw CorruptFile("unknown activation code in model file");
    return static_cast<nn::Activation>(c);
}

template <class T>
void write_tensor(Writer& w, const std::string& name, const T& t) {
    w.str(name);
    const auto rows = static_cast<std::uint64_t>(t.rows());
    const auto cols = static_cast<std::uint64_t>(t.cols());
    w.u64(rows);
    w.u64(cols);
    for (Eigen::Index r = 0; r < t.rows(); ++r)
        for (Eigen::Index c = 0; c < t.cols(); ++c) w.f64(t(r, c));
}

template <class T>
void read_tensor(Reader& r, const std::string& expected, T& t) {
    const std::string name = r.str();
    if (name != expected) throw ShapeMismatch("expected tensor `" + expected + "`, found `" + name + "`");
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (rows > (1u << 24) || cols > (1u << 24)) throw CorruptFile("implausible tensor shape for " + name);
    if constexpr (T::ColsAtCompileTime == 1) {
        if (cols != 1) throw ShapeMismatch("tensor `" + name + "` must be a column vector");
        t.resize(static_cast<Eigen::Index>(rows));
    } else {
        t.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    }
    if (rows * cols * 8 > r.remaining()) throw CorruptFile("model file is truncated");
    for (Eigen::Index i = 0; i < t.rows(); ++i)
        for (Eigen::Index j = 0; j < t.cols(); ++j) t(i, j) = r.f64();
}

template <class Net>
void write_net(Writer& w, const Net& net) {
    std::uint32_t count = 0;
    nn::for_each_tensor(net, [&](const std::string&, const auto&) { ++count; });
    w.u32(count);
    nn::for_each_tensor(net, [&](const std::string& name, const auto& t) { write_tensor(w, name, t); });
}

template <class Net>
void read_net(Reader& r, Net& net) {
    std::uint32_t expected = 0;
    nn::for_each_tensor(net, [&](const std::string&, const auto&) { ++expected; });
    if (r.u32() != expected) throw ShapeMismatch("unexpected tensor count in model file");
    nn::for_each_tensor(net, [&](const std::string& name, auto& t) { read_tensor(r, name, t); });
}

void write_elm(Writer& w, const ElmParams& e) {
    w.u32(3);
    write_tensor(w, "hidden.W", e.hidden_W);
    write_tensor(w, "hidden.b", e.hidden_b);
    write_tensor(w, "output.W", e.output_W);
}

void read_elm(Reader& r, ElmParams& e) {
    if (r.u32() != 3) throw ShapeMismatch("unexpected tensor count in model file");
    read_tensor(r, "hidden.W", e.hidden_W);
    read_tensor(r, "hidden.b", e.hidden_b);
    read_tensor(r, "output.W", e.output_W);
}

}  // namespace

std::string serialize_model(const TrainedModel& m) {
    m.check_consistency();
    Writer w;
    w.raw(kMagic.data(), kMagic.size());
    w.u32(kModelFormatVersion);
    w.str(to_string(m.kind));
    w.u64(m.channels);
    w.u64(m.window.k_back);
    w.u64(m.window.k_fwd);
    w.u64(m.meta.seed);
    w.u64(m.meta.epochs);
    w.f64(m.meta.final_loss);
    for (std::size_t l = 0; l < m.channels; ++l) {
        w.f64(m.norm.min[l]);
        w.f64(m.norm.max[l]);
    }

    std::uint32_t enc_act = 0, dec_act = 0, peephole = 0;
    double lambda = 0.0;
    if (const auto* d = std::get_if<nn::DenseAutoencoder>(&m.params)) {
        enc_act = activation_code(d->encoder.activation);
        dec_act = activation_code(d->decoder.activation);
    } else if (const auto* l = std::get_if<nn::LstmAutoencoder>(&m.params)) {
        dec_act = activation_code(l->decoder.activation);
        peephole = l->cell.peephole == nn::Peephole::diagonal ? 1 : 0;
    } else if (const auto* e = std::get_if<ElmParams>(&m.params)) {
        lambda = e->lambda;
    }
    w.u32(enc_act);
    w.u32(dec_act);
    w.u32(peephole);
    w.f64(lambda);

    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, std::monostate>) w.u32(0);
            else if constexpr (std::is_same_v<P, ElmParams>) write_elm(w, p);
            else write_net(w, p);
        },
        m.params);

    w.u64(fnv1a64(w.buffer()));
    return std::move(w.buffer());
}

TrainedModel deserialize_model(std::string_view bytes) {
    Reader r(bytes);
    if (r.remaining() < kMagic.size() || r.take(kMagic.size()) != kMagic) throw CorruptFile("not a model file");
    const std::uint32_t version = r.u32();
    if (version != kModelFormatVersion)
        throw VersionMismatch("model format version " + std::to_string(version) + " is not supported (expected " +
                              std::to_string(kModelFormatVersion) + ")");
    if (bytes.size() < 8) throw CorruptFile("model file is truncated");
    const std::string_view body = bytes.substr(0, bytes.size() - 8);
    std::uint64_t stored = 0;
    std::memcpy(&stored, bytes.data() + bytes.size() - 8, 8);
    if (fnv1a64(body) != stored) throw CorruptFile("model file checksum mismatch (truncated or damaged)");
    Reader rb(body);
    rb.take(kMagic.size());
    rb.u32();

    TrainedModel m;
    try {
        m.kind = model_kind_from_string(rb.str());
    } catch (const InvalidArgument& e) {
        throw CorruptFile(e.what());
    }
    m.channels = rb.u64();
    m.window.k_back = rb.u64();
    m.window.k_fwd = rb.u64();
    m.meta.seed = rb.u64();
    m.meta.epochs = rb.u64();
    m.meta.final_loss = rb.f64();
    if (m.channels == 0 || m.channels > (1u << 20)) throw CorruptFile("implausible channel count");
    for (std::size_t l = 0; l < m.channels; ++l) {
        m.norm.min.push_back(rb.f64());
        m.norm.max.push_back(rb.f64());
    }
    const auto enc_act = activation_from_code(rb.u32());
    const auto dec_act = activation_from_code(rb.u32());
    const std::uint32_t peephole = rb.u32();
    const double lambda = rb.f64();

    switch (m.kind) {
    case ModelKind::IM:
        if (rb.u32() != 0) throw ShapeMismatch("IM model carries tensors");
        break;
    case ModelKind::AE:
    case ModelKind::DAE:
    case ModelKind::EDAE_NN: {
        nn::DenseAutoencoder net;
        read_net(rb, net);
        net.encoder.activation = enc_act;
        net.decoder.activation = dec_act;
        m.params = std::move(net);
        break;
    }
    case ModelKind::EDAE_LSTM: {
        nn::LstmAutoencoder net;
        read_net(rb, net);
        net.cell.peephole = peephole == 1 ? nn::Peephole::diagonal : nn::Peephole::full;
        net.decoder.activation = dec_act;
        m.params = std::move(net);
        break;
    }
    case ModelKind::ELM: {
        ElmParams e;
        read_elm(rb, e);
        e.lambda = lambda;
        m.params = std::move(e);
        break;
    }
    }
    if (rb.remaining() != 0) throw CorruptFile("trailing bytes after model payload");
    try {
        m.check_consistency();
    } catch (const InvalidArgument& e) {
        throw ShapeMismatch(e.what());
    }
    return m;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_model(model));
}

TrainedModel load_model(const std::filesystem::path& path) { return deserialize_model(read_file(path)); }

}  // namespace recon
