#include "recon/synthetic.hpp"

#include "recon/error.hpp"
#include "recon/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace recon {

double sinc_unnormalized(double r) {
    return r == 0.0 ? 1.0 : std::sin(r) / r;
}

double random_sequence_value(double r, double e1, double noise_scale) {
    return 1.0 + r * 0.05 + sinc_unnormalized(r) + noise_scale * e1;
}

TimeSeries generate_random_sequence(const RandomSeqConfig& cfg) {
    if (cfg.n < 1) throw InvalidArgument("random sequence needs n >= 1");
    if (!(cfg.noise_scale >= 0.0)) throw InvalidArgument("noise_scale must be nonnegative");
    Rng rng(cfg.seed);
    std::vector<double> r(cfg.n), x(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        const double e1 = rng.normal();
        const double e2 = cfg.r_noise == NoiseShape::gaussian ? rng.normal() : rng.uniform();
        r[i] = cfg.r_offset + cfg.r_span * e2;
        x[i] = random_sequence_value(r[i], e1, cfg.noise_scale);
    }
    Matrix values(static_cast<Eigen::Index>(cfg.n), 1);
    if (cfg.sort_by_r) {
        std::vector<std::size_t> order(cfg.n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return r[a] < r[b]; });
        for (std::size_t i = 0; i < cfg.n; ++i) values(static_cast<Eigen::Index>(i), 0) = x[order[i]];
    } else {
        for (std::size_t i = 0; i < cfg.n; ++i) values(static_cast<Eigen::Index>(i), 0) = x[i];
    }
    return TimeSeries(std::move(values), {"x"}, 1.0);
}

TimeSeries generate_power_profile(const PowerProfileConfig& cfg) {
    if (cfg.days < 1 || cfg.samples_per_day < 1)
        throw InvalidArgument("power profile needs days >= 1 and samples_per_day >= 1");
    if (!(cfg.noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be nonnegative");
    const std::size_t rows = cfg.days * cfg.samples_per_day;
    Matrix values(static_cast<Eigen::Index>(rows), 3);
    Rng rng(cfg.seed);
    const double spd = static_cast<double>(cfg.samples_per_day);
    for (std::size_t t = 0; t < rows; ++t) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(t % cfg.samples_per_day) / spd;
        for (Eigen::Index l = 0; l < 3; ++l) {
            const double shift = static_cast<double>(l) * std::numbers::pi / 6.0;
            const double noise = cfg.noise_sigma > 0.0 ? cfg.noise_sigma * rng.normal() : 0.0;
            values(static_cast<Eigen::Index>(t), l) =
                cfg.base_load + cfg.daily_amplitude * std::sin(phase - shift) + noise;
        }
    }
    return TimeSeries(std::move(values), {"Pa", "Pb", "Pc"}, 86400.0 / spd);
}

}  // namespace recon
