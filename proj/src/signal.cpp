#include "kljn/signal.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "kljn/rng.hpp"

namespace kljn::signal {

namespace {

// FFTW planner calls are not thread safe; executions on plan-local arrays are.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    double* real = nullptr;
    fftw_complex* cplx = nullptr;
    fftw_plan plan = nullptr;

    ~FftwBuffer() {
        if (plan) fftw_destroy_plan(plan);
        if (real) fftw_free(real);
        if (cplx) fftw_free(cplx);
    }
};

}  // namespace

void NoiseSpec::validate() const {
    if (!(spectral_density >= 0.0))
        throw std::invalid_argument("NoiseSpec: spectral density must be >= 0");
    if (!(bandwidth > 0.0)) throw std::invalid_argument("NoiseSpec: bandwidth must be > 0");
    if (T_eff >= 0.0 && source_resistance >= 0.0) {
        const double expect = johnson_spectral_density(T_eff, source_resistance);
        const double scale = std::max(expect, spectral_density);
        if (scale > 0.0 && std::fabs(expect - spectral_density) > 1e-9 * scale)
            throw std::invalid_argument("NoiseSpec: S inconsistent with 4*k*T_eff*R");
    }
}

void SampledSignal::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("SampledSignal: dt must be > 0");
    if (samples.empty()) throw std::invalid_argument("SampledSignal: length must be >= 1");
}

double johnson_spectral_density(double T_eff, double R) {
    if (T_eff < 0.0) throw std::invalid_argument("johnson_spectral_density: T_eff < 0");
    if (R < 0.0) throw std::invalid_argument("johnson_spectral_density: R < 0");
    return 4.0 * k_boltzmann * T_eff * R;
}

NoiseSpec johnson_noise_spec(double T_eff, double R, double bandwidth) {
    NoiseSpec spec;
    spec.spectral_density = johnson_spectral_density(T_eff, R);
    spec.bandwidth = bandwidth;
    spec.T_eff = T_eff;
    spec.source_resistance = R;
    spec.validate();
    return spec;
}

SampledSignal generate_band_limited_gaussian(const NoiseSpec& spec, std::size_t n,
                                             double dt, std::uint64_t seed) {
    spec.validate();
    if (n < 1) throw std::invalid_argument("generate: n must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("generate: dt must be > 0");
    const double B = spec.bandwidth;
    if (dt > 0.5 / B + 1e-15 / B)
        throw std::invalid_argument("generate: Nyquist violation, need dt <= 1/(2B)");
    if (static_cast<double>(n) * dt * B < 1.0 - 1e-12)
        throw std::invalid_argument("generate: record too short, need n*dt*B >= 1");

    SampledSignal out;
    out.dt = dt;
    out.samples.assign(n, 0.0);
    if (spec.spectral_density == 0.0) return out;

    const std::size_t half = n / 2 + 1;
    FftwBuffer buf;
    buf.real = fftw_alloc_real(n);
    buf.cplx = fftw_alloc_complex(half);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        buf.plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), buf.cplx, buf.real,
                                        FFTW_ESTIMATE);
    }

    // One-sided PSD S in a bin of width df = 1/(n*dt) means each of the two
    // conjugate coefficients carries S/(2*n*dt) expected squared magnitude.
    Rng rng(seed);
    const double df = 1.0 / (static_cast<double>(n) * dt);
    const double sigma = std::sqrt(spec.spectral_density / (4.0 * static_cast<double>(n) * dt));
    buf.cplx[0][0] = 0.0;  // zero mean
    buf.cplx[0][1] = 0.0;
    for (std::size_t k = 1; k < half; ++k) {
        const double f = static_cast<double>(k) * df;
        const bool nyquist_bin = (n % 2 == 0) && (k == half - 1);
        if (f <= B && !nyquist_bin) {
            buf.cplx[k][0] = sigma * rng.gaussian();
            buf.cplx[k][1] = sigma * rng.gaussian();
        } else {
            buf.cplx[k][0] = 0.0;
            buf.cplx[k][1] = 0.0;
        }
    }
    fftw_execute(buf.plan);
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = buf.real[i];
    return out;
}

std::vector<std::pair<double, double>> estimate_psd(const SampledSignal& sig,
                                                    std::size_t segment_len) {
    sig.validate();
    const std::size_t n = sig.samples.size();
    if (segment_len < 2 || segment_len > n)
        throw std::invalid_argument("estimate_psd: segment_len out of range");
    if ((segment_len & (segment_len - 1)) != 0)
        throw std::invalid_argument("estimate_psd: segment_len must be a power of two");

    const std::size_t L = segment_len;
    const std::size_t half = L / 2 + 1;
    std::vector<double> window(L);
    double wsum2 = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) /
                                          static_cast<double>(L)));
        wsum2 += window[i] * window[i];
    }

    FftwBuffer buf;
    buf.real = fftw_alloc_real(L);
    buf.cplx = fftw_alloc_complex(half);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        buf.plan = fftw_plan_dft_r2c_1d(static_cast<int>(L), buf.real, buf.cplx,
                                        FFTW_ESTIMATE);
    }

    std::vector<double> acc(half, 0.0);
    const std::size_t hop = L / 2;  // 50% overlap
    std::size_t n_segments = 0;
    for (std::size_t start = 0; start + L <= n; start += hop) {
        for (std::size_t i = 0; i < L; ++i) buf.real[i] = sig.samples[start + i] * window[i];
        fftw_execute(buf.plan);
        for (std::size_t k = 0; k < half; ++k) {
            acc[k] += buf.cplx[k][0] * buf.cplx[k][0] + buf.cplx[k][1] * buf.cplx[k][1];
        }
        ++n_segments;
    }

    const double df = 1.0 / (static_cast<double>(L) * sig.dt);
    const double norm = sig.dt / (wsum2 * static_cast<double>(n_segments));
    std::vector<std::pair<double, double>> psd(half);
    for (std::size_t k = 0; k < half; ++k) {
        const bool edge = (k == 0) || (L % 2 == 0 && k == half - 1);
        const double one_sided = edge ? 1.0 : 2.0;
        psd[k] = {static_cast<double>(k) * df, one_sided * norm * acc[k]};
    }
    return psd;
}

double mean_square(const SampledSignal& sig, std::size_t first, std::size_t last) {
    sig.validate();
    if (first >= last || last > sig.samples.size())
        throw std::invalid_argument("mean_square: empty or out-of-bounds window");
    double s = 0.0;
    for (std::size_t i = first; i < last; ++i) s += sig.samples[i] * sig.samples[i];
    return s / static_cast<double>(last - first);
}

double mean_square(const SampledSignal& sig) {
    return mean_square(sig, 0, sig.samples.size());
}

double correlation_time(const NoiseSpec& spec) {
    if (!(spec.bandwidth > 0.0))
        throw std::invalid_argument("correlation_time: bandwidth must be > 0");
    return 1.0 / (2.0 * spec.bandwidth);
}

double mean_in_band(const std::vector<std::pair<double, double>>& psd, double f_lo,
                    double f_hi) {
    double acc = 0.0;
    std::size_t count = 0;
    for (const auto& [f, s] : psd) {
        if (f >= f_lo && f <= f_hi) {
            acc += s;
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("mean_in_band: no bins in range");
    return acc / static_cast<double>(count);
}

double autocorrelation(const SampledSignal& sig, std::size_t lag) {
    sig.validate();
    const std::size_t n = sig.samples.size();
    if (lag >= n) throw std::invalid_argument("autocorrelation: lag >= length");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) den += sig.samples[i] * sig.samples[i];
    for (std::size_t i = 0; i + lag < n; ++i) num += sig.samples[i] * sig.samples[i + lag];
    return num / den;
}

}  // namespace kljn::signal
