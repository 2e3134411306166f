#include "kljn/attack.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "kljn/constants.hpp"
#include "kljn/rng.hpp"
#include "kljn/stats.hpp"

namespace kljn::attack {

namespace {

using protocol::Bit;

// Fit the scalar threshold minimizing training error under the fixed rule
// "statistic < threshold -> H". Candidates are midpoints of the pooled sorted
// sample (plus the two outer extremes); ties resolve to the lowest threshold.
struct ThresholdFit {
    double threshold = 0.0;
    double training_error = 0.0;
};

ThresholdFit fit_threshold(const std::vector<double>& stats_low,
                           const std::vector<double>& stats_high) {
    std::vector<double> pooled = stats_low;
    pooled.insert(pooled.end(), stats_high.begin(), stats_high.end());
    std::sort(pooled.begin(), pooled.end());
    std::vector<double> candidates;
    candidates.push_back(pooled.front() - 1.0);
    for (std::size_t i = 0; i + 1 < pooled.size(); ++i)
        candidates.push_back(0.5 * (pooled[i] + pooled[i + 1]));
    candidates.push_back(pooled.back() + 1.0);

    const double n = static_cast<double>(stats_low.size() + stats_high.size());
    ThresholdFit best{candidates.front(), 2.0};
    for (double thr : candidates) {
        std::size_t wrong = 0;
        for (double s : stats_low)
            if (s < thr) ++wrong;  // low class misread as H
        for (double s : stats_high)
            if (!(s < thr)) ++wrong;  // high class misread as L
        const double err = static_cast<double>(wrong) / n;
        if (err < best.training_error - 1e-12) best = {thr, err};
    }
    return best;
}

Calibration summarize(const std::vector<double>& stats_low,
                      const std::vector<double>& stats_high) {
    Calibration cal;
    cal.mean_low = mean(stats_low);
    cal.mean_high = mean(stats_high);
    cal.sd_low = stddev(stats_low);
    cal.sd_high = stddev(stats_high);
    const double pooled_sd =
        std::sqrt(0.5 * (cal.sd_low * cal.sd_low + cal.sd_high * cal.sd_high));
    cal.separation =
        pooled_sd > 0.0 ? std::fabs(cal.mean_low - cal.mean_high) / pooled_sd : 0.0;
    const auto fit = fit_threshold(stats_low, stats_high);
    cal.threshold = fit.threshold;
    cal.training_error = fit.training_error;
    // the physics predicts mean_low > mean_high (lower resistor charges the
    // cable faster); anything else means the classes are not usable
    cal.low_quality = cal.separation < 0.5 || cal.mean_low <= cal.mean_high;
    cal.calibrated = true;
    return cal;
}

}  // namespace

void EveConfig::validate(const circuit::CableModel& cable) const {
    cable.validate();
    if (!(window_fraction > 0.0 && window_fraction <= 1.0))
        throw std::invalid_argument("EveConfig: window_fraction must lie in (0, 1]");
    if (tap_node < 0 || tap_node >= cable.n_nodes())
        throw std::invalid_argument("EveConfig: tap_node not a valid cable node");
}

double transient_statistic(const circuit::Trace& trace, const EveConfig& eve,
                           const signal::NoiseSpec& spec) {
    const double window = eve.window_fraction * signal::correlation_time(spec);
    if (!(trace.dt > 0.0))
        throw std::invalid_argument("transient_statistic: trace has no samples");
    const std::size_t nw = static_cast<std::size_t>(window / trace.dt);
    if (nw < 2 || nw > trace.size())
        throw std::invalid_argument(
            "transient_statistic: sampling window outside the recorded trace");
    const auto& v = trace.at_node(eve.tap_node);
    double s = 0.0;
    if (eve.statistic == TransientStatistic::early_mean_square) {
        // mean-square growth rate of the departure from the switching instant
        for (std::size_t i = 1; i < nw; ++i) {
            const double d = v[i] - v[0];
            s += d * d;
        }
        return s / (static_cast<double>(nw - 1) * window);
    }
    for (std::size_t i = 1; i < nw; ++i) s += std::fabs(v[i] - v[i - 1]);
    return s / static_cast<double>(nw - 1);
}

EveConfig calibrate_transient_classifier(const protocol::KljnParams& params,
                                         EveConfig eve, std::size_t n_training,
                                         std::uint64_t rng_seed) {
    params.validate();
    eve.validate(params.cable);
    if (n_training < 100)
        throw std::invalid_argument(
            "calibrate_transient_classifier: needs n_training >= 100 per class");
    const auto spec =
        signal::johnson_noise_spec(params.T_eff, params.R_L, params.bandwidth);
    Rng far(derive_seed(rng_seed, {0xfa4}));
    std::vector<double> stats_low, stats_high;
    circuit::CircuitState state;
    for (std::size_t i = 0; i < 2 * n_training; ++i) {
        const Bit near = (i % 2 == 0) ? Bit::L : Bit::H;
        const Bit remote = far.coin() ? Bit::H : Bit::L;
        auto res = protocol::run_kljn_period(params, derive_seed(rng_seed, {i}),
                                             state, near, remote);
        state = std::move(res.final_state);
        const double s = transient_statistic(res.fine_trace, eve, spec);
        (near == Bit::L ? stats_low : stats_high).push_back(s);
    }
    eve.calibration = summarize(stats_low, stats_high);
    return eve;
}

EveConfig calibrate_transient_classifier(const protocol::RrrtParams& params,
                                         const circuit::CableModel& cable,
                                         EveConfig eve, std::size_t n_training,
                                         std::uint64_t rng_seed) {
    params.validate();
    eve.validate(cable);
    if (n_training < 100)
        throw std::invalid_argument(
            "calibrate_transient_classifier: needs n_training >= 100 per class");
    const auto spec =
        signal::johnson_noise_spec(params.T_min, params.R_min, params.bandwidth);
    std::vector<double> stats_low, stats_high;
    circuit::CircuitState state;
    std::uint64_t i = 0;
    while (stats_low.size() < n_training || stats_high.size() < n_training) {
        auto res = protocol::run_rrrt_period(params, derive_seed(rng_seed, {i}),
                                             cable, state);
        ++i;
        state = std::move(res.final_state);
        const auto& o = res.outcome;
        if (o.alice_R == o.bob_R) continue;
        auto& bucket = o.alice_bit == Bit::H ? stats_high : stats_low;
        if (bucket.size() >= n_training) continue;
        bucket.push_back(transient_statistic(res.fine_trace, eve, spec));
    }
    eve.calibration = summarize(stats_low, stats_high);
    return eve;
}

protocol::Bit transient_attack_guess(const circuit::Trace& trace,
                                     const EveConfig& eve,
                                     const signal::NoiseSpec& spec) {
    if (!eve.calibration.calibrated)
        throw std::invalid_argument("transient_attack_guess: classifier not calibrated");
    const double s = transient_statistic(trace, eve, spec);
    // lower charging rate -> larger near-end resistor; exact threshold -> L
    return s < eve.calibration.threshold ? Bit::H : Bit::L;
}

AttackStats estimate_eve_success(const protocol::KljnParams& params,
                                 const EveConfig& eve, std::size_t n_periods,
                                 std::uint64_t rng_seed) {
    params.validate();
    eve.validate(params.cable);
    if (!eve.calibration.calibrated)
        throw std::invalid_argument("estimate_eve_success: classifier not calibrated");
    const auto spec =
        signal::johnson_noise_spec(params.T_eff, params.R_L, params.bandwidth);
    AttackStats stats;
    circuit::CircuitState state;
    for (std::size_t p = 0; p < n_periods; ++p) {
        auto res = protocol::run_kljn_period(params, derive_seed(rng_seed, {p}), state);
        state = std::move(res.final_state);
        const auto& o = res.outcome;
        if (!o.kept) continue;
        ++stats.n_secure_bits;
        const Bit guess = transient_attack_guess(res.fine_trace, eve, spec);
        if (guess == o.alice_bit) ++stats.n_correct;
    }
    if (stats.n_secure_bits < 500)
        throw std::runtime_error(
            "estimate_eve_success: fewer than 500 secure bits; increase n_periods");
    stats.p = static_cast<double>(stats.n_correct) /
              static_cast<double>(stats.n_secure_bits);
    const auto ci = wilson_interval(stats.n_correct, stats.n_secure_bits);
    stats.ci_low = ci.lo;
    stats.ci_high = ci.hi;
    return stats;
}

AttackStats estimate_eve_success(const protocol::RrrtParams& params,
                                 const circuit::CableModel& cable,
                                 const EveConfig& eve, std::size_t n_periods,
                                 std::uint64_t rng_seed) {
    params.validate();
    eve.validate(cable);
    if (!eve.calibration.calibrated)
        throw std::invalid_argument("estimate_eve_success: classifier not calibrated");
    const auto spec =
        signal::johnson_noise_spec(params.T_min, params.R_min, params.bandwidth);
    AttackStats stats;
    circuit::CircuitState state;
    for (std::size_t p = 0; p < n_periods; ++p) {
        auto res =
            protocol::run_rrrt_period(params, derive_seed(rng_seed, {p}), cable, state);
        state = std::move(res.final_state);
        const auto& o = res.outcome;
        if (!o.kept) continue;
        ++stats.n_secure_bits;
        const Bit guess = transient_attack_guess(res.fine_trace, eve, spec);
        if (guess == o.alice_bit) ++stats.n_correct;
    }
    if (stats.n_secure_bits < 500)
        throw std::runtime_error(
            "estimate_eve_success: fewer than 500 secure bits; increase n_periods");
    stats.p = static_cast<double>(stats.n_correct) /
              static_cast<double>(stats.n_secure_bits);
    const auto ci = wilson_interval(stats.n_correct, stats.n_secure_bits);
    stats.ci_low = ci.lo;
    stats.ci_high = ci.hi;
    return stats;
}

// --- DC circuit -------------------------------------------------------------

void DcScenario::validate() const {
    if (!(U0 > 0.0)) throw std::invalid_argument("DcScenario: U0 must be positive");
    if (!(R_E >= 0.0)) throw std::invalid_argument("DcScenario: R_E must be >= 0");
    if (!(temperature > 0.0))
        throw std::invalid_argument("DcScenario: temperature must be positive");
    if (!(averaging_time > 0.0))
        throw std::invalid_argument("DcScenario: averaging_time must be positive");
    if (!(bandwidth > 0.0))
        throw std::invalid_argument("DcScenario: bandwidth must be positive");
}

DcObservation observe_dc(const DcScenario& scenario, double U_A, double U_B,
                         Rng& rng) {
    scenario.validate();
    const double four_kt = 4.0 * k_boltzmann * scenario.temperature;
    const double two_tau = 2.0 * scenario.averaging_time;
    double e_A = 0.0, e_B = 0.0, e_E = 0.0;
    if (scenario.include_noise) {
        // time-averaged Johnson source of each resistor: variance S / (2 tau)
        e_A = std::sqrt(four_kt * 1.0 / two_tau) * rng.gaussian();
        e_B = std::sqrt(four_kt * 1.0 / two_tau) * rng.gaussian();
        e_E = std::sqrt(four_kt * scenario.R_E / two_tau) * rng.gaussian();
    }
    DcObservation obs;
    // loop: U_A + e_A + I*1 + e_E + I*R_E + e_B + I*1 = U_B
    obs.I = (U_B - U_A - e_A - e_B - e_E) / (2.0 + scenario.R_E);
    obs.U_AE = U_A + e_A + obs.I;
    obs.U_BE = obs.U_AE + e_E + obs.I * scenario.R_E;
    return obs;
}

std::pair<double, double> dc_eve_voltage_only(double U_AE_avg, double U_BE_avg,
                                              double R_E) {
    if (R_E < 0.0) throw std::invalid_argument("dc_eve_voltage_only: R_E must be >= 0");
    if (R_E == 0.0)
        throw std::runtime_error(
            "dc_eve_voltage_only: singular at R_E = 0, the system is not invertible");
    const double I = (U_BE_avg - U_AE_avg) / R_E;
    return {U_AE_avg - I, U_BE_avg + I};
}

std::pair<double, double> dc_eve_full(double U_E_avg, double I_avg) {
    return {U_E_avg - I_avg, U_E_avg + I_avg};
}

std::vector<ContinuityRow> run_continuity_experiment(
    const std::vector<double>& grid, const DcScenario& scenario,
    std::size_t n_trials, std::uint64_t rng_seed) {
    scenario.validate();
    if (grid.empty())
        throw std::invalid_argument("run_continuity_experiment: empty R_E grid");
    for (double g : grid)
        if (!(g >= 0.0))
            throw std::invalid_argument(
                "run_continuity_experiment: grid values must be >= 0");
    if (n_trials < 500)
        throw std::invalid_argument(
            "run_continuity_experiment: needs n_trials >= 500 per grid point");

    std::vector<ContinuityRow> rows;
    rows.reserve(grid.size());
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        DcScenario sc = scenario;
        sc.R_E = grid[gi];
        Rng rng(derive_seed(rng_seed, {gi}));
        std::size_t correct = 0;
        std::vector<double> residuals;
        residuals.reserve(n_trials);
        for (std::size_t t = 0; t < n_trials; ++t) {
            const double U_A = rng.coin() ? sc.U0 : -sc.U0;
            const double U_B = rng.coin() ? sc.U0 : -sc.U0;
            const auto obs = observe_dc(sc, U_A, U_B, rng);
            double U_A_est = 0.0;
            if (sc.mode == DcEveMode::voltage_only) {
                U_A_est = dc_eve_voltage_only(obs.U_AE, obs.U_BE, sc.R_E).first;
            } else {
                // full Eve reads the tap adjacent to the side she reconstructs
                U_A_est = dc_eve_full(obs.U_AE, obs.I).first;
            }
            if ((U_A_est > 0.0) == (U_A > 0.0)) ++correct;
            residuals.push_back(U_A_est - U_A);
        }
        ContinuityRow row;
        row.R_E = sc.R_E;
        row.mode = sc.mode;
        row.noise = sc.include_noise;
        row.n = n_trials;
        row.p = static_cast<double>(correct) / static_cast<double>(n_trials);
        const auto ci = wilson_interval(correct, n_trials);
        row.ci_low = ci.lo;
        row.ci_high = ci.hi;
        row.est_std = stddev(residuals);
        rows.push_back(row);
    }
    return rows;
}

std::vector<double> default_resistance_grid() {
    std::vector<double> grid;
    // 5 points per decade over [1e-4, 1e1]
    for (int i = -20; i <= 5; ++i) grid.push_back(std::pow(10.0, 0.2 * i));
    return grid;
}

}  // namespace kljn::attack
