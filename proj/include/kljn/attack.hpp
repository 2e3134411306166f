#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "kljn/circuit.hpp"
#include "kljn/protocol.hpp"
#include "kljn/rng.hpp"
#include "kljn/signal.hpp"

namespace kljn::attack {

// Early-window statistic on the switching transient at the tap node.
enum class TransientStatistic { early_mean_square, mean_abs_delta };

// Fitted threshold plus the training-set summary it came from.
struct Calibration {
    bool calibrated = false;
    double threshold = 0.0;
    double mean_low = 0.0;   // statistic mean, near-end low resistor
    double mean_high = 0.0;  // statistic mean, near-end high resistor
    double sd_low = 0.0;
    double sd_high = 0.0;
    // |mean_low - mean_high| / pooled sd
    double separation = 0.0;
    double training_error = 0.0;
    // classes overlap badly (or are ordered the wrong way round); the
    // threshold is still produced
    bool low_quality = false;
};

struct EveConfig {
    int tap_node = 1;
    // fraction of the noise correlation time used as the sampling window
    double window_fraction = 0.1;
    TransientStatistic statistic = TransientStatistic::early_mean_square;
    Calibration calibration;

    void validate(const circuit::CableModel& cable) const;
};

struct AttackStats {
    std::size_t n_secure_bits = 0;
    std::size_t n_correct = 0;
    double p = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

// The configured early-window statistic of the trace at the tap node; the
// window is window_fraction * correlation_time(spec) from the first sample.
double transient_statistic(const circuit::Trace& trace, const EveConfig& eve,
                           const signal::NoiseSpec& spec);

// Runs n_training forced periods per near-end class {R_L, R_H} (far end
// drawn uniformly) and fits the scalar threshold minimizing training error
// under the fixed rule "statistic below threshold -> near end is H".
EveConfig calibrate_transient_classifier(const protocol::KljnParams& params,
                                         EveConfig eve, std::size_t n_training,
                                         std::uint64_t rng_seed);

// Same fit against RRRT traffic; classes are labeled by the shared bit
// (whether the near end drew the higher resistance).
EveConfig calibrate_transient_classifier(const protocol::RrrtParams& params,
                                         const circuit::CableModel& cable,
                                         EveConfig eve, std::size_t n_training,
                                         std::uint64_t rng_seed);

// Thresholds the early-window statistic: lower charging rate means the
// near-end resistor is larger, so statistic < threshold -> H; ties -> L.
protocol::Bit transient_attack_guess(const circuit::Trace& trace,
                                     const EveConfig& eve,
                                     const signal::NoiseSpec& spec);

// Runs the protocol and applies the attack per period; correctness is
// counted only on kept (secure) bits, where the near-end guess pins down the
// whole LH/HL arrangement. Requires >= 500 secure bits.
AttackStats estimate_eve_success(const protocol::KljnParams& params,
                                 const EveConfig& eve, std::size_t n_periods,
                                 std::uint64_t rng_seed);
AttackStats estimate_eve_success(const protocol::RrrtParams& params,
                                 const circuit::CableModel& cable,
                                 const EveConfig& eve, std::size_t n_periods,
                                 std::uint64_t rng_seed);

// --- DC circuit with Eve's series resistor ---------------------------------

enum class DcEveMode { voltage_only, voltage_and_current };

// Two 1 Ohm resistors with secret DC sources +-U0 at the ends, Eve's R_E in
// the middle. With noise enabled each resistor contributes a Johnson source
// whose time-averaged value is Gaussian with variance 4kTR / (2 tau).
struct DcScenario {
    double U0 = 1.0;            // V, bit encoded as +-U0
    double R_E = 1.0;           // Ohm
    double temperature = 4e20;  // K (effective)
    bool include_noise = false;
    double averaging_time = 1.0;  // s
    double bandwidth = 1e4;       // Hz
    DcEveMode mode = DcEveMode::voltage_and_current;

    void validate() const;
};

// What Eve's instruments read for one trial (time-averaged).
struct DcObservation {
    double U_AE = 0.0;  // tap on Alice's side of R_E
    double U_BE = 0.0;  // tap on Bob's side of R_E
    double I = 0.0;     // loop current, positive from Bob's side toward Alice
};

DcObservation observe_dc(const DcScenario& scenario, double U_A, double U_B,
                         Rng& rng);

// Voltage-only Eve: loop current from the drop across R_E, then both sources
// through the known 1 Ohm resistors. Exact in the noiseless case for R_E > 0;
// R_E = 0 is singular.
std::pair<double, double> dc_eve_voltage_only(double U_AE_avg, double U_BE_avg,
                                              double R_E);

// Full Eve with a current measurement: (U_E - I * 1 Ohm, U_E + I * 1 Ohm).
std::pair<double, double> dc_eve_full(double U_E_avg, double I_avg);

struct ContinuityRow {
    double R_E = 0.0;
    DcEveMode mode = DcEveMode::voltage_and_current;
    bool noise = false;
    std::size_t n = 0;
    double p = 0.0;  // probability of guessing Alice's bit
    double ci_low = 0.0;
    double ci_high = 0.0;
    double est_std = 0.0;  // sample std of U_A_est - U_A
};

// Per grid point: n_trials random +-U0 bit pairs, simulated taps, the
// selected Eve, correctness of the sign of U_A_est and the estimator spread.
std::vector<ContinuityRow> run_continuity_experiment(
    const std::vector<double>& grid, const DcScenario& scenario,
    std::size_t n_trials, std::uint64_t rng_seed);

// Log-spaced 5 points/decade over [1e-4, 1e1] Ohm.
std::vector<double> default_resistance_grid();

}  // namespace kljn::attack
