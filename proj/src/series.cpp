#include "recon/series.hpp"

#include "recon/error.hpp"
#include "recon/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace recon {

namespace {

std::vector<std::string> default_names(Eigen::Index cols) {
    std::vector<std::string> names;
    for (Eigen::Index l = 0; l < cols; ++l) names.push_back("ch" + std::to_string(l));
    return names;
}

}  // namespace

TimeSeries::TimeSeries(Matrix values, std::vector<std::string> channel_names, double dt)
    : values_(std::move(values)), names_(std::move(channel_names)), dt_(dt) {
    if (values_.rows() < 1 || values_.cols() < 1)
        throw InvalidArgument("time series needs at least one sample and one channel");
    if (names_.size() != static_cast<std::size_t>(values_.cols()))
        throw InvalidArgument("expected " + std::to_string(values_.cols()) +
                              " channel names, got " + std::to_string(names_.size()));
    if (!values_.allFinite()) throw InvalidArgument("time series contains non-finite values");
}

TimeSeries::TimeSeries(Matrix values, double dt)
    : TimeSeries(values, default_names(values.cols()), dt) {}

TimeSeries TimeSeries::with_values(Matrix values) const {
    return TimeSeries(std::move(values), names_, dt_);
}

CorruptionMask::CorruptionMask(BoolMatrix flags)
    : flags_(std::move(flags)), count_(static_cast<std::size_t>(flags_.count())) {}

CorruptionMask CorruptionMask::none(std::size_t rows, std::size_t cols) {
    return CorruptionMask(BoolMatrix::Constant(static_cast<Eigen::Index>(rows),
                                               static_cast<Eigen::Index>(cols), false));
}

CorruptedSeries::CorruptedSeries(TimeSeries series, CorruptionMask mask, double rho)
    : series_(std::move(series)), mask_(std::move(mask)), rho_(rho) {
    if (mask_.rows() != series_.length() || mask_.cols() != series_.channels())
        throw InvalidArgument("mask shape does not match series shape");
    if (!(rho_ >= 0.0 && rho_ <= 1.0)) throw InvalidArgument("rho must lie in [0, 1]");
    if (mask_.corrupted_count() > 0) {
        Matrix v = series_.values();
        for (Eigen::Index t = 0; t < v.rows(); ++t)
            for (Eigen::Index l = 0; l < v.cols(); ++l)
                if (mask_.flags()(t, l)) v(t, l) = 0.0;
        series_ = series_.with_values(std::move(v));
    }
}

CorruptedSeries::CorruptedSeries(TimeSeries series, CorruptionMask mask)
    : CorruptedSeries(series, mask,
                      static_cast<double>(mask.corrupted_count()) /
                          static_cast<double>(series.length() * series.channels())) {}

double NormParams::forward(std::size_t l, double v) const {
    if (degenerate(l)) return 0.5;
    return (v - min[l]) / (max[l] - min[l]);
}

double NormParams::inverse(std::size_t l, double u) const {
    if (degenerate(l)) return min[l];
    return u * (max[l] - min[l]) + min[l];
}

CorruptedSeries corrupt_series(const TimeSeries& clean, double rho, std::uint64_t seed) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidArgument("rho must lie in [0, 1]");
    const std::size_t rows = clean.length();
    const std::size_t cols = clean.channels();
    const std::size_t total = rows * cols;
    const auto count = static_cast<std::size_t>(std::llround(rho * static_cast<double>(total)));

    // Partial Fisher-Yates over row-major positions t*L + l.
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.index(total - i));
        std::swap(order[i], order[j]);
    }
    BoolMatrix flags = BoolMatrix::Constant(static_cast<Eigen::Index>(rows),
                                            static_cast<Eigen::Index>(cols), false);
    for (std::size_t i = 0; i < count; ++i)
        flags(static_cast<Eigen::Index>(order[i] / cols), static_cast<Eigen::Index>(order[i] % cols)) = true;
    return CorruptedSeries(clean, CorruptionMask(std::move(flags)), rho);
}

TimeSeries init_fake_values(const CorruptedSeries& corrupted) {
    const auto& mask = corrupted.mask().flags();
    Matrix v = corrupted.series().values();
    const Eigen::Index rows = v.rows();
    std::vector<Eigen::Index> left(static_cast<std::size_t>(rows));
    for (Eigen::Index l = 0; l < v.cols(); ++l) {
        if (mask.col(l).all()) throw UnreconstructableChannel(static_cast<std::size_t>(l));
        Eigen::Index last = -1;
        for (Eigen::Index t = 0; t < rows; ++t) {
            if (!mask(t, l)) last = t;
            left[static_cast<std::size_t>(t)] = last;
        }
        Eigen::Index next = -1;
        for (Eigen::Index t = rows - 1; t >= 0; --t) {
            if (!mask(t, l)) {
                next = t;
                continue;
            }
            const Eigen::Index prev = left[static_cast<std::size_t>(t)];
            if (prev >= 0 && next >= 0)
                v(t, l) = 0.5 * (v(prev, l) + v(next, l));
            else
                v(t, l) = prev >= 0 ? v(prev, l) : v(next, l);
        }
    }
    return corrupted.series().with_values(std::move(v));
}

void expand_window_into(const Matrix& values, std::size_t t, const WindowConfig& cfg,
                        Eigen::Ref<Vector> out) {
    const auto rows = static_cast<std::ptrdiff_t>(values.rows());
    const Eigen::Index cols = values.cols();
    if (t >= static_cast<std::size_t>(rows)) throw InvalidArgument("window center out of range");
    if (out.size() != static_cast<Eigen::Index>(cfg.span()) * cols)
        throw InvalidArgument("window output has the wrong length");
    const auto first = static_cast<std::ptrdiff_t>(t) - static_cast<std::ptrdiff_t>(cfg.k_back);
    for (std::size_t k = 0; k < cfg.span(); ++k) {
        const auto s = std::clamp<std::ptrdiff_t>(first + static_cast<std::ptrdiff_t>(k), 0, rows - 1);
        out.segment(static_cast<Eigen::Index>(k) * cols, cols) = values.row(s).transpose();
    }
}

Vector expand_window(const TimeSeries& series, std::size_t t, const WindowConfig& cfg) {
    Vector out(static_cast<Eigen::Index>(cfg.dimension(series.channels())));
    expand_window_into(series.values(), t, cfg, out);
    return out;
}

std::vector<WindowSample> build_window_dataset(const TimeSeries& clean,
                                               const CorruptedSeries& corrupted,
                                               const WindowConfig& cfg) {
    if (clean.length() != corrupted.series().length() ||
        clean.channels() != corrupted.series().channels())
        throw InvalidArgument("clean and corrupted series differ in shape");
    const TimeSeries filled = init_fake_values(corrupted);
    std::vector<WindowSample> out;
    out.reserve(clean.length());
    for (std::size_t t = 0; t < clean.length(); ++t)
        out.push_back({expand_window(filled, t, cfg), expand_window(clean, t, cfg),
                       cfg.k_back * clean.channels()});
    return out;
}

NormParams fit_norm(const TimeSeries& series, const CorruptionMask& mask) {
    if (mask.rows() != series.length() || mask.cols() != series.channels())
        throw InvalidArgument("mask shape does not match series shape");
    NormParams p;
    for (std::size_t l = 0; l < series.channels(); ++l) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t t = 0; t < series.length(); ++t) {
            if (mask(t, l)) continue;
            lo = std::min(lo, series(t, l));
            hi = std::max(hi, series(t, l));
        }
        if (lo > hi) lo = hi = 0.0;  // nothing observed
        p.min.push_back(lo);
        p.max.push_back(hi);
    }
    return p;
}

TimeSeries apply_norm(const TimeSeries& series, const NormParams& norm) {
    if (norm.channels() != series.channels())
        throw InvalidArgument("normalization parameters do not match channel count");
    Matrix v = series.values();
    for (Eigen::Index l = 0; l < v.cols(); ++l)
        for (Eigen::Index t = 0; t < v.rows(); ++t)
            v(t, l) = norm.forward(static_cast<std::size_t>(l), v(t, l));
    return series.with_values(std::move(v));
}

std::pair<TimeSeries, NormParams> normalize(const TimeSeries& series, const CorruptionMask& mask) {
    NormParams p = fit_norm(series, mask);
    return {apply_norm(series, p), std::move(p)};
}

TimeSeries denormalize(const TimeSeries& series, const NormParams& norm) {
    if (norm.channels() != series.channels())
        throw InvalidArgument("normalization parameters do not match channel count");
    Matrix v = series.values();
    for (Eigen::Index l = 0; l < v.cols(); ++l)
        for (Eigen::Index t = 0; t < v.rows(); ++t)
            v(t, l) = norm.inverse(static_cast<std::size_t>(l), v(t, l));
    return series.with_values(std::move(v));
}

}  // namespace recon
