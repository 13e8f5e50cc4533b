#pragma once

#include "recon/series.hpp"

#include <cstdint>

namespace recon {

enum class NoiseShape { gaussian, uniform };

/// Noisy sinc test sequence x(n) = 1 + 0.05 r(n) + sin(r)/r + noise_scale*e1(n),
/// r(n) = r_offset + r_span*e2(n).
struct RandomSeqConfig {
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    double noise_scale = 0.4;
    double r_offset = -10.0;
    double r_span = 20.0;
    NoiseShape r_noise = NoiseShape::gaussian;  ///< distribution of e2
    bool sort_by_r = true;                      ///< reorder samples by ascending r so neighbors share a curve position
};

struct PowerProfileConfig {
    std::size_t days = 2;
    std::size_t samples_per_day = 1440;
    double base_load = 100.0;
    double daily_amplitude = 30.0;
    double noise_sigma = 2.5;
    std::uint64_t seed = 0;
};

/// sin(r)/r with the analytic limit 1 at r = 0.
double sinc_unnormalized(double r);

/// One noiseless-plus-noise sample of the sinc sequence for given r and e1.
double random_sequence_value(double r, double e1, double noise_scale);

/// Draw order per sample: e1 = normal(), then e2 = normal() or uniform().
TimeSeries generate_random_sequence(const RandomSeqConfig& cfg);

/// Three channels Pa, Pb, Pc: base + amplitude*sin(2*pi*(day fraction) - l*pi/6) + noise.
TimeSeries generate_power_profile(const PowerProfileConfig& cfg);

}  // namespace recon
