#include "kljn/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "kljn/constants.hpp"
#include "kljn/rng.hpp"
#include "kljn/signal.hpp"
#include "kljn/stats.hpp"

namespace kljn::protocol {

namespace {

std::size_t auto_segment_len(std::size_t n) {
    std::size_t seg = 64;
    while (seg * 2 <= n / 4 && seg < 16384) seg *= 2;
    return seg;
}

std::vector<int> recording_nodes(const circuit::CableModel& cable) {
    std::vector<int> nodes = cable.tap_nodes;
    nodes.push_back(0);
    nodes.push_back(cable.n_nodes() / 2);
    nodes.push_back(cable.n_nodes() - 1);
    return nodes;
}

struct SimulatedPeriod {
    circuit::Trace fine;
    circuit::Trace coarse;
    circuit::CircuitState final_state;
};

SimulatedPeriod simulate_two_phase(const circuit::LoopConfig& cfg,
                                   double bit_period, double transient_capture,
                                   double fine_dt, double coarse_dt,
                                   const circuit::CircuitState& prev_state) {
    const double tc = std::min(transient_capture, bit_period / 2.0);
    auto [fine, mid_state] =
        circuit::simulate_period(cfg, tc, fine_dt, prev_state,
                                 recording_nodes(cfg.cable), 0.0);
    auto [coarse, final_state] =
        circuit::simulate_period(cfg, bit_period - tc, coarse_dt, mid_state,
                                 recording_nodes(cfg.cable), tc);
    return {std::move(fine), std::move(coarse), std::move(final_state)};
}

signal::SampledSignal make_source(double T, double R, double bandwidth,
                                  double bit_period, double dt,
                                  std::uint64_t seed) {
    const auto spec = signal::johnson_noise_spec(T, R, bandwidth);
    const std::size_t n = static_cast<std::size_t>(bit_period / dt) + 4;
    return signal::generate_band_limited_gaussian(spec, n, dt, seed);
}

}  // namespace

void KljnParams::validate() const {
    if (!(R_L > 0.0 && R_H > R_L))
        throw std::invalid_argument("KljnParams: requires 0 < R_L < R_H");
    if (!(T_eff > 0.0)) throw std::invalid_argument("KljnParams: T_eff must be positive");
    if (!(bandwidth > 0.0))
        throw std::invalid_argument("KljnParams: bandwidth must be positive");
    if (!(bit_period * bandwidth >= 100.0))
        throw std::invalid_argument(
            "KljnParams: requires bit_period * bandwidth >= 100 (measurability)");
    if (switching == SwitchingMode::symmetric_ramp && !(ramp_time > 0.0))
        throw std::invalid_argument("KljnParams: symmetric_ramp needs ramp_time > 0");
    if (!(ramp_time < bit_period))
        throw std::invalid_argument("KljnParams: requires ramp_time < bit_period");
    if (!(transient_capture > 0.0 && transient_capture <= bit_period / 2.0))
        throw std::invalid_argument(
            "KljnParams: transient_capture must lie in (0, bit_period/2]");
    if (!(measurement_band_fraction > 0.0 && measurement_band_fraction <= 1.0))
        throw std::invalid_argument(
            "KljnParams: measurement_band_fraction must lie in (0, 1]");
    cable.validate();
}

void RrrtParams::validate() const {
    if (!(R_min > 0.0 && R_max > R_min))
        throw std::invalid_argument("RrrtParams: requires 0 < R_min < R_max");
    if (!(T_min > 0.0 && T_max > T_min))
        throw std::invalid_argument("RrrtParams: requires 0 < T_min < T_max");
    if (!(resolution_threshold > 0.0 && resolution_threshold < 0.5))
        throw std::invalid_argument(
            "RrrtParams: resolution_threshold must lie in (0, 0.5)");
    if (!(bandwidth > 0.0))
        throw std::invalid_argument("RrrtParams: bandwidth must be positive");
    if (!(bit_period * bandwidth >= 100.0))
        throw std::invalid_argument(
            "RrrtParams: requires bit_period * bandwidth >= 100");
    if (!(transient_capture > 0.0 && transient_capture <= bit_period / 2.0))
        throw std::invalid_argument(
            "RrrtParams: transient_capture must lie in (0, bit_period/2]");
}

double measure_loop_resistance(const circuit::Trace& trace, double T_eff,
                               double bandwidth, double band_fraction) {
    if (!(T_eff > 0.0))
        throw std::invalid_argument("measure_loop_resistance: T_eff must be positive");
    if (!(bandwidth > 0.0))
        throw std::invalid_argument(
            "measure_loop_resistance: bandwidth must be positive");
    const auto current = trace.current_signal();
    // small slack: the transient-capture prefix shaves a few samples off
    if (current.samples.size() * current.dt * bandwidth < 99.0)
        throw std::invalid_argument(
            "measure_loop_resistance: trace too short, needs duration * bandwidth >= 100");
    const std::size_t seg = auto_segment_len(current.samples.size());
    const auto psd = signal::estimate_psd(current, seg);
    const double df = 1.0 / (static_cast<double>(seg) * current.dt);
    const double f_hi = std::max(band_fraction * bandwidth, df);
    const double s_i = signal::mean_in_band(psd, df, f_hi);
    if (!(s_i > 0.0))
        throw std::runtime_error(
            "measure_loop_resistance: measured in-band current density is zero");
    return 4.0 * k_boltzmann * T_eff / s_i;
}

BitDecision decide_bit(double r_loop_est, double own_R, const KljnParams& params) {
    if (!(r_loop_est > 0.0))
        throw std::invalid_argument("decide_bit: R_loop estimate must be positive");
    if (own_R != params.R_L && own_R != params.R_H)
        throw std::invalid_argument("decide_bit: own_R must be R_L or R_H");
    // The cable's series resistance r_c is in the loop but contributes no
    // noise, so the raw inversion reads (X + r_c)^2 / X where X is the sum of
    // the two noisy resistors. Both r_c and the candidate resistors are
    // public: classify the estimate to the nearest hypothesis prediction on a
    // log scale (the estimate's spread grows with its size). Exact midpoint
    // goes to L.
    const double r_cable = static_cast<double>(params.cable.n_segments) *
                           params.cable.series_resistance_per_segment;
    const auto predicted = [r_cable](double x) {
        return (x + r_cable) * (x + r_cable) / x;
    };
    const double pred_l = predicted(own_R + params.R_L);
    const double pred_h = predicted(own_R + params.R_H);
    BitDecision out;
    out.decision = std::log(r_loop_est / pred_l) > std::log(pred_h / r_loop_est)
                       ? Decision::remote_H
                       : Decision::remote_L;
    const bool own_high = own_R == params.R_H;
    const bool remote_high = out.decision == Decision::remote_H;
    out.discard = own_high == remote_high;
    return out;
}

PeriodResult run_kljn_period(const KljnParams& params, std::uint64_t rng_seed,
                             const circuit::CircuitState& prev_state,
                             Bit forced_alice, Bit forced_bob) {
    params.validate();
    const bool alice_high = forced_alice == Bit::H;
    const bool bob_high = forced_bob == Bit::H;

    circuit::LoopConfig cfg;
    cfg.R_A = alice_high ? params.R_H : params.R_L;
    cfg.R_B = bob_high ? params.R_H : params.R_L;
    cfg.cable = params.cable;
    const double dt_c = params.coarse_dt();
    cfg.source_A.waveform = make_source(params.T_eff, cfg.R_A, params.bandwidth,
                                        params.bit_period, dt_c,
                                        derive_seed(rng_seed, {0}));
    cfg.source_B.waveform = make_source(params.T_eff, cfg.R_B, params.bandwidth,
                                        params.bit_period, dt_c,
                                        derive_seed(rng_seed, {1}));
    if (params.switching == SwitchingMode::symmetric_ramp) {
        cfg.source_A.ramp_time = params.ramp_time;
        cfg.source_B.ramp_time = params.ramp_time;
    }

    auto sim = simulate_two_phase(cfg, params.bit_period, params.transient_capture,
                                  params.fine_dt(), dt_c, prev_state);

    PeriodResult result;
    result.fine_trace = std::move(sim.fine);
    result.coarse_trace = std::move(sim.coarse);
    result.final_state = std::move(sim.final_state);

    PeriodOutcome& o = result.outcome;
    o.alice_bit = alice_high ? Bit::H : Bit::L;
    o.bob_bit = bob_high ? Bit::H : Bit::L;
    o.pair_class = alice_high ? (bob_high ? PairClass::HH : PairClass::HL)
                              : (bob_high ? PairClass::LH : PairClass::LL);
    o.alice_R = cfg.R_A;
    o.alice_T = params.T_eff;
    o.bob_R = cfg.R_B;
    o.bob_T = params.T_eff;

    o.r_loop_estimate =
        measure_loop_resistance(result.coarse_trace, params.T_eff, params.bandwidth,
                                params.measurement_band_fraction);
    const auto alice = decide_bit(o.r_loop_estimate, cfg.R_A, params);
    const auto bob = decide_bit(o.r_loop_estimate, cfg.R_B, params);
    o.alice_decision = alice.decision;
    o.bob_decision = bob.decision;
    o.kept = !alice.discard && !bob.discard;
    const bool alice_wrong = (alice.decision == Decision::remote_H) != bob_high;
    const bool bob_wrong = (bob.decision == Decision::remote_H) != alice_high;
    o.error = alice_wrong || bob_wrong;
    return result;
}

PeriodResult run_kljn_period(const KljnParams& params, std::uint64_t rng_seed,
                             const circuit::CircuitState& prev_state) {
    Rng bits(derive_seed(rng_seed, {2}));
    const Bit a = bits.coin() ? Bit::H : Bit::L;
    const Bit b = bits.coin() ? Bit::H : Bit::L;
    return run_kljn_period(params, rng_seed, prev_state, a, b);
}

std::pair<double, double> solve_remote_parameters(double S_u_meas, double S_i_meas,
                                                  double own_R, double own_T) {
    if (!(S_u_meas > 0.0 && S_i_meas > 0.0 && own_R > 0.0 && own_T > 0.0))
        throw std::invalid_argument(
            "solve_remote_parameters: all inputs must be positive");
    const double a = 4.0 * k_boltzmann * own_T * own_R;
    const double b = S_u_meas - S_i_meas * own_R * own_R;
    const double denom = a - b;
    if (!(denom > 0.0))
        throw std::runtime_error(
            "solve_remote_parameters: estimation failure, no physical remote resistance");
    const double remote_R = own_R * (a + b) / denom;
    if (!(remote_R > 0.0))
        throw std::runtime_error(
            "solve_remote_parameters: estimation failure, non-positive remote resistance");
    const double sum = own_R + remote_R;
    const double remote_T =
        (S_i_meas * sum * sum / (4.0 * k_boltzmann) - own_T * own_R) / remote_R;
    if (!(remote_T > 0.0))
        throw std::runtime_error(
            "solve_remote_parameters: estimation failure, non-positive remote temperature");
    return {remote_R, remote_T};
}

PeriodResult run_rrrt_period(const RrrtParams& params, std::uint64_t rng_seed,
                             const circuit::CableModel& cable,
                             const circuit::CircuitState& prev_state,
                             double forced_R_A, double forced_T_A,
                             double forced_R_B, double forced_T_B) {
    params.validate();
    cable.validate();

    circuit::LoopConfig cfg;
    cfg.R_A = forced_R_A;
    cfg.R_B = forced_R_B;
    cfg.cable = cable;
    const double dt_c = params.coarse_dt();
    cfg.source_A.waveform = make_source(forced_T_A, cfg.R_A, params.bandwidth,
                                        params.bit_period, dt_c,
                                        derive_seed(rng_seed, {0}));
    cfg.source_B.waveform = make_source(forced_T_B, cfg.R_B, params.bandwidth,
                                        params.bit_period, dt_c,
                                        derive_seed(rng_seed, {1}));

    auto sim = simulate_two_phase(cfg, params.bit_period, params.transient_capture,
                                  params.fine_dt(), dt_c, prev_state);

    PeriodResult result;
    result.fine_trace = std::move(sim.fine);
    result.coarse_trace = std::move(sim.coarse);
    result.final_state = std::move(sim.final_state);

    PeriodOutcome& o = result.outcome;
    o.alice_R = forced_R_A;
    o.alice_T = forced_T_A;
    o.bob_R = forced_R_B;
    o.bob_T = forced_T_B;
    o.alice_bit = forced_R_A > forced_R_B ? Bit::H : Bit::L;
    o.bob_bit = forced_R_B > forced_R_A ? Bit::H : Bit::L;
    o.pair_class = o.alice_bit == Bit::H ? PairClass::HL : PairClass::LH;

    const auto& coarse = result.coarse_trace;
    const auto current = coarse.current_signal();
    const std::size_t seg = auto_segment_len(current.samples.size());
    const double df = 1.0 / (static_cast<double>(seg) * current.dt);
    const double f_hi = std::max(params.measurement_band_fraction * params.bandwidth, df);
    const double s_i = signal::mean_in_band(signal::estimate_psd(current, seg), df, f_hi);
    const int far_node = cable.n_nodes() - 1;
    const double s_u_alice = signal::mean_in_band(
        signal::estimate_psd(coarse.node_signal(0), seg), df, f_hi);
    const double s_u_bob = signal::mean_in_band(
        signal::estimate_psd(coarse.node_signal(far_node), seg), df, f_hi);

    // Each party sees the remote resistor in series with the cable, whose
    // total resistance is public knowledge, so it is subtracted back out.
    const double r_cable = static_cast<double>(cable.n_segments) *
                           cable.series_resistance_per_segment;
    bool alice_keep = false, bob_keep = false;
    try {
        const auto [r_raw, t_est] =
            solve_remote_parameters(s_u_alice, s_i, forced_R_A, forced_T_A);
        (void)t_est;
        const double r_est = r_raw - r_cable;
        if (r_est <= 0.0) throw std::runtime_error("remote estimate below cable");
        o.alice_decision = r_est > forced_R_A ? Decision::remote_H : Decision::remote_L;
        alice_keep = std::fabs(forced_R_A - r_est) / std::max(forced_R_A, r_est) >=
                     params.resolution_threshold;
    } catch (const std::runtime_error&) {
        o.alice_decision = Decision::remote_L;
    }
    try {
        const auto [r_raw, t_est] =
            solve_remote_parameters(s_u_bob, s_i, forced_R_B, forced_T_B);
        (void)t_est;
        const double r_est = r_raw - r_cable;
        if (r_est <= 0.0) throw std::runtime_error("remote estimate below cable");
        o.bob_decision = r_est > forced_R_B ? Decision::remote_H : Decision::remote_L;
        bob_keep = std::fabs(forced_R_B - r_est) / std::max(forced_R_B, r_est) >=
                   params.resolution_threshold;
    } catch (const std::runtime_error&) {
        o.bob_decision = Decision::remote_L;
    }
    o.kept = alice_keep && bob_keep && forced_R_A != forced_R_B;
    const bool alice_wrong =
        (o.alice_decision == Decision::remote_H) != (o.bob_bit == Bit::H);
    const bool bob_wrong =
        (o.bob_decision == Decision::remote_H) != (o.alice_bit == Bit::H);
    o.error = alice_wrong || bob_wrong;
    return result;
}

PeriodResult run_rrrt_period(const RrrtParams& params, std::uint64_t rng_seed,
                             const circuit::CableModel& cable,
                             const circuit::CircuitState& prev_state) {
    Rng draws(derive_seed(rng_seed, {2}));
    const double R_A = draws.log_uniform(params.R_min, params.R_max);
    const double T_A = draws.log_uniform(params.T_min, params.T_max);
    const double R_B = draws.log_uniform(params.R_min, params.R_max);
    const double T_B = draws.log_uniform(params.T_min, params.T_max);
    return run_rrrt_period(params, rng_seed, cable, prev_state, R_A, T_A, R_B, T_B);
}

ProtocolStats estimate_bit_error(const KljnParams& params, std::size_t n_periods,
                                 std::uint64_t rng_seed) {
    if (n_periods < 100)
        throw std::invalid_argument("estimate_bit_error: needs n_periods >= 100");
    ProtocolStats stats;
    stats.n_periods = n_periods;
    circuit::CircuitState state;
    for (std::size_t p = 0; p < n_periods; ++p) {
        auto result =
            run_kljn_period(params, derive_seed(rng_seed, {p}), state);
        state = std::move(result.final_state);
        const auto& o = result.outcome;
        if (!o.kept) continue;
        ++stats.n_kept;
        if (o.error) {
            ++stats.n_errors;
        } else {
            stats.key_bits.push_back(o.alice_bit == Bit::H ? '1' : '0');
        }
    }
    if (stats.n_kept > 0) {
        stats.q = static_cast<double>(stats.n_errors) /
                  static_cast<double>(stats.n_kept);
        const auto ci = wilson_interval(stats.n_errors, stats.n_kept);
        stats.q_ci_low = ci.lo;
        stats.q_ci_high = ci.hi;
    } else {
        stats.q_ci_high = 1.0;
    }
    return stats;
}

}  // namespace kljn::protocol
