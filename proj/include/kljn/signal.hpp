#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "kljn/constants.hpp"

namespace kljn::signal {

// Band-limited white noise description: one-sided spectral density S on
// [0, B], zero above B. T_eff/R are carried along when S was derived from a
// resistor via the Johnson formula.
struct NoiseSpec {
    double spectral_density = 0.0;  // V^2/Hz
    double bandwidth = 0.0;         // Hz
    double T_eff = -1.0;            // K, < 0 means "not set"
    double source_resistance = -1.0;  // Ohm, < 0 means "not set"

    void validate() const;
};

struct SampledSignal {
    std::vector<double> samples;  // V
    double dt = 0.0;              // s

    void validate() const;
    double duration() const { return dt * static_cast<double>(samples.size()); }
};

// S(f) = 4*k*T*R
double johnson_spectral_density(double T_eff, double R);

// NoiseSpec from a resistor at effective temperature T_eff.
NoiseSpec johnson_noise_spec(double T_eff, double R, double bandwidth);

// Frequency-domain synthesis: independent Gaussian spectral coefficients
// with magnitude set by S on (0, B], zero elsewhere, inverse-transformed.
// Deterministic in (spec, n, dt, seed).
SampledSignal generate_band_limited_gaussian(const NoiseSpec& spec, std::size_t n,
                                             double dt, std::uint64_t seed);

// Welch averaged periodogram: Hann window, 50% overlap, one-sided.
// segment_len must be a power of two, <= signal length.
std::vector<std::pair<double, double>> estimate_psd(const SampledSignal& sig,
                                                    std::size_t segment_len);

// Mean of the squared samples over [first, last) sample indices.
double mean_square(const SampledSignal& sig, std::size_t first, std::size_t last);
double mean_square(const SampledSignal& sig);

// First zero crossing of the sinc autocorrelation of ideal band-limited
// noise: 1/(2B).
double correlation_time(const NoiseSpec& spec);

// Mean PSD over bins with f in [f_lo, f_hi]. Throws if no bin falls in range.
double mean_in_band(const std::vector<std::pair<double, double>>& psd, double f_lo,
                    double f_hi);

// Empirical autocorrelation coefficient at an integer lag.
double autocorrelation(const SampledSignal& sig, std::size_t lag);

}  // namespace kljn::signal
