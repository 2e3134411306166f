#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kljn/circuit.hpp"

namespace kljn::protocol {

enum class SwitchingMode { abrupt, symmetric_ramp };

// Plain KLJN: both parties own an identical (R_L, R_H) pair kept at a common
// effective temperature.
struct KljnParams {
    double R_L = 1e3;           // Ohm
    double R_H = 1e5;           // Ohm
    double T_eff = 1e18;        // K
    double bandwidth = 1e4;     // Hz
    double bit_period = 0.1;    // s
    SwitchingMode switching = SwitchingMode::abrupt;
    double ramp_time = 0.0;     // s, symmetric_ramp only
    circuit::CableModel cable;
    // Initial stretch of each period simulated at the fine step so the
    // switching transient is resolved for Eve.
    double transient_capture = 8e-6;  // s
    // R_loop measurement band upper edge as a fraction of the bandwidth; kept
    // very low because the cable's shunt capacitance distorts the current
    // spectrum roughly as f^2, which at the default cable would swamp the
    // small HH-loop current well inside the band. On an ideal wire a wider
    // band trades that bias for lower estimator variance.
    double measurement_band_fraction = 0.025;

    double coarse_dt() const { return 1.0 / (100.0 * bandwidth); }
    double fine_dt() const { return 1.0 / (2000.0 * bandwidth); }
    void validate() const;
};

// RRRT defense: both parties draw (R, T) from a continuum each period.
struct RrrtParams {
    double R_min = 125.0;       // Ohm
    double R_max = 8000.0;      // Ohm
    // Narrow temperature spread: a party whose T*R product is far below the
    // remote one contributes almost nothing to the loop spectra and cannot
    // resolve the remote resistance, so wide T ranges wreck reconciliation.
    double T_min = 5e17;        // K
    double T_max = 2e18;        // K
    double bandwidth = 1e4;     // Hz
    double bit_period = 0.1;    // s
    double resolution_threshold = 0.02;  // relative R difference for a tie
    double transient_capture = 8e-6;     // s
    double measurement_band_fraction = 0.1;

    double coarse_dt() const { return 1.0 / (100.0 * bandwidth); }
    double fine_dt() const { return 1.0 / (2000.0 * bandwidth); }
    void validate() const;
};

enum class Bit { L, H };
enum class Decision { remote_L, remote_H };
enum class PairClass { LL, LH, HL, HH };

struct PeriodOutcome {
    Bit alice_bit = Bit::L;
    Bit bob_bit = Bit::L;
    PairClass pair_class = PairClass::LL;
    bool kept = false;
    Decision alice_decision = Decision::remote_L;
    Decision bob_decision = Decision::remote_L;
    bool error = false;  // some decision mismatches the true remote bit
    double r_loop_estimate = 0.0;  // Ohm (KLJN path)
    // RRRT extras: the actual draws
    double alice_R = 0.0, alice_T = 0.0, bob_R = 0.0, bob_T = 0.0;
};

struct PeriodResult {
    circuit::Trace fine_trace;    // switching transient, fine dt
    circuit::Trace coarse_trace;  // remainder of the period, coarse dt
    PeriodOutcome outcome;
    circuit::CircuitState final_state;
};

struct ProtocolStats {
    std::size_t n_periods = 0;
    std::size_t n_kept = 0;
    std::size_t n_errors = 0;  // among kept periods
    double q = 0.0;            // bit error rate over kept periods
    double q_ci_low = 0.0;
    double q_ci_high = 0.0;
    std::string key_bits;      // '0'/'1' per kept error-free period
};

// One KLJN bit period: both parties draw a uniform bit (or use the forced
// values), the loop is simulated with carry-over from prev_state, and both
// parties decide the remote bit from the shared coarse trace.
PeriodResult run_kljn_period(const KljnParams& params, std::uint64_t rng_seed,
                             const circuit::CircuitState& prev_state);
PeriodResult run_kljn_period(const KljnParams& params, std::uint64_t rng_seed,
                             const circuit::CircuitState& prev_state,
                             Bit forced_alice, Bit forced_bob);

// R_loop = 4 k T_eff / (mean in-band S_i); band = [first Welch bin,
// band_fraction * bandwidth].
double measure_loop_resistance(const circuit::Trace& trace, double T_eff,
                               double bandwidth, double band_fraction = 0.1);

// Remote estimate R_loop_est - own_R classified to the nearest of {R_L, R_H};
// midpoint ties go to L. Also reports whether the period is discarded
// (decided remote equals own bit).
struct BitDecision {
    Decision decision = Decision::remote_L;
    bool discard = false;
};
BitDecision decide_bit(double r_loop_est, double own_R, const KljnParams& params);

// One RRRT period over the given cable. Each party draws (R, T) log-uniformly,
// measures (S_u, S_i), solves for the remote pair, and bit-compares
// resistances ("the party with the higher resistance has the high bit").
PeriodResult run_rrrt_period(const RrrtParams& params, std::uint64_t rng_seed,
                             const circuit::CableModel& cable,
                             const circuit::CircuitState& prev_state);
PeriodResult run_rrrt_period(const RrrtParams& params, std::uint64_t rng_seed,
                             const circuit::CableModel& cable,
                             const circuit::CircuitState& prev_state,
                             double forced_R_A, double forced_T_A,
                             double forced_R_B, double forced_T_B);

// Inversion of analytic_loop_spectra for the party knowing (own_R, own_T):
//   R_B = R_A (a + b) / (a - b),  a = 4 k T_A R_A,  b = S_u - S_i R_A^2
// then T_B by back-substitution into S_i. Throws on non-physical solutions.
std::pair<double, double> solve_remote_parameters(double S_u_meas, double S_i_meas,
                                                  double own_R, double own_T);

// Monte Carlo q over kept periods (chained state carry-over).
ProtocolStats estimate_bit_error(const KljnParams& params, std::size_t n_periods,
                                 std::uint64_t rng_seed);

}  // namespace kljn::protocol
