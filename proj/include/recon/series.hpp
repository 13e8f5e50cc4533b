#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <vector>

namespace recon {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// T x L matrix of measurements; row t is the L-vector observed at time t.
class TimeSeries {
public:
    TimeSeries(Matrix values, std::vector<std::string> channel_names, double dt = 1.0);
    /// Channels named ch0..ch{L-1}.
    explicit TimeSeries(Matrix values, double dt = 1.0);

    const Matrix& values() const noexcept { return values_; }
    const std::vector<std::string>& channel_names() const noexcept { return names_; }
    double dt() const noexcept { return dt_; }
    std::size_t length() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t channels() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    double operator()(std::size_t t, std::size_t l) const { return values_(t, l); }

    TimeSeries with_values(Matrix values) const;

private:
    Matrix values_;
    std::vector<std::string> names_;
    double dt_;
};

class CorruptionMask {
public:
    explicit CorruptionMask(BoolMatrix flags);
    static CorruptionMask none(std::size_t rows, std::size_t cols);

    const BoolMatrix& flags() const noexcept { return flags_; }
    bool operator()(std::size_t t, std::size_t l) const { return flags_(t, l); }
    std::size_t rows() const noexcept { return static_cast<std::size_t>(flags_.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(flags_.cols()); }
    std::size_t corrupted_count() const noexcept { return count_; }
    bool row_has_corruption(std::size_t t) const { return flags_.row(t).any(); }

private:
    BoolMatrix flags_;
    std::size_t count_;
};

/// A series whose masked entries hold exactly 0.
class CorruptedSeries {
public:
    /// Zeroes the masked entries of `series`; rho is the nominal proportion.
    CorruptedSeries(TimeSeries series, CorruptionMask mask, double rho);
    /// rho is taken as the observed masked fraction.
    CorruptedSeries(TimeSeries series, CorruptionMask mask);

    const TimeSeries& series() const noexcept { return series_; }
    const CorruptionMask& mask() const noexcept { return mask_; }
    double rho() const noexcept { return rho_; }

private:
    TimeSeries series_;
    CorruptionMask mask_;
    double rho_;
};

struct WindowConfig {
    std::size_t k_back = 0;
    std::size_t k_fwd = 0;

    std::size_t span() const noexcept { return k_back + k_fwd + 1; }
    std::size_t dimension(std::size_t channels) const noexcept { return span() * channels; }
    bool operator==(const WindowConfig&) const = default;
};

struct WindowSample {
    Vector input;
    Vector target;
    std::size_t center_index = 0;  ///< offset of the x_t block inside input/target
};

/// Per-channel min/max over observed entries; maps observed data onto [0, 1].
struct NormParams {
    std::vector<double> min;
    std::vector<double> max;

    std::size_t channels() const noexcept { return min.size(); }
    bool degenerate(std::size_t l) const { return !(max[l] > min[l]); }
    double forward(std::size_t l, double v) const;
    double inverse(std::size_t l, double u) const;
    bool operator==(const NormParams&) const = default;
};

/// Exactly round(rho*T*L) entries, drawn uniformly without replacement, set to 0.
CorruptedSeries corrupt_series(const TimeSeries& clean, double rho, std::uint64_t seed);

/**
 * Fills each masked entry with the mean of the nearest observed sample to its
 * left and to its right in the same channel, or copies the single side that
 * exists. Observed entries are returned untouched.
 */
TimeSeries init_fake_values(const CorruptedSeries& corrupted);

/// [x_{t-k_back}; ...; x_t; ...; x_{t+k_fwd}], out-of-range times clamped to the edge.
Vector expand_window(const TimeSeries& series, std::size_t t, const WindowConfig& cfg);
void expand_window_into(const Matrix& values, std::size_t t, const WindowConfig& cfg,
                        Eigen::Ref<Vector> out);

std::vector<WindowSample> build_window_dataset(const TimeSeries& clean,
                                               const CorruptedSeries& corrupted,
                                               const WindowConfig& cfg);

NormParams fit_norm(const TimeSeries& series, const CorruptionMask& mask);
TimeSeries apply_norm(const TimeSeries& series, const NormParams& norm);
std::pair<TimeSeries, NormParams> normalize(const TimeSeries& series, const CorruptionMask& mask);
TimeSeries denormalize(const TimeSeries& series, const NormParams& norm);

}  // namespace recon
