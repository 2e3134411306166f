#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "kljn/signal.hpp"

namespace kljn::circuit {

// Spatially discretized wire: n_segments series (r,l) branches with the shunt
// capacitance split across the nodes (half segments at the two ends).
// n_segments == 1 with zero series elements collapses to a single shared node.
struct CableModel {
    int n_segments = 32;
    double series_resistance_per_segment = 150.0;  // Ohm
    double series_inductance_per_segment = 1.875e-4;   // H
    double shunt_capacitance_per_segment = 1.875e-10;  // F
    std::vector<int> tap_nodes{1};

    void validate() const;
    bool single_node() const;
    int n_nodes() const;
    double total_capacitance() const;
    double total_inductance() const;
    // sqrt(l/c) of the ladder, 0 when degenerate
    double characteristic_impedance() const;
    // n * sqrt(l*c), the LC wavefront transit time
    double transit_time() const;
};

// Per-side drive: a DC level or a sampled waveform (linear interpolation),
// scaled by the switching envelope. ramp_time == 0 means abrupt.
struct SourceDrive {
    signal::SampledSignal waveform;  // empty -> DC drive
    double dc = 0.0;
    double ramp_time = 0.0;

    double envelope(double t) const;
    double at(double t) const;
};

struct LoopConfig {
    double R_A = 1000.0;
    double R_B = 10000.0;
    SourceDrive source_A;
    SourceDrive source_B;
    CableModel cable;

    void validate() const;
};

struct CircuitState {
    std::vector<double> node_voltages;     // V, one per cable node
    std::vector<double> inductor_currents;  // A, one per segment (RLC mode)
};

// Recorded samples for a subset of nodes plus the loop current at Alice's
// entry. All series share dt and length.
struct Trace {
    double dt = 0.0;
    std::vector<int> nodes;
    std::vector<std::vector<double>> node_v;  // [node index in `nodes`][sample]
    std::vector<double> entry_current;

    std::size_t size() const { return entry_current.size(); }
    const std::vector<double>& at_node(int node) const;
    signal::SampledSignal node_signal(int node) const;
    signal::SampledSignal current_signal() const;
    void dump_csv(std::ostream& os) const;
};

struct SpectraPair {
    double S_u = 0.0;  // V^2/Hz
    double S_i = 0.0;  // A^2/Hz
};

// Implicit-trapezoidal stepper over the tridiagonal ladder system.
// Unconditionally stable for the passive network; matrices are factored once
// per (config, dt).
class LoopSolver {
public:
    LoopSolver(const LoopConfig& config, double dt);

    CircuitState initial_state() const;
    // Advance from t to t+dt in place.
    void step(CircuitState& state, double t);
    double dt() const { return dt_; }
    double entry_current(const CircuitState& state, double t) const;

private:
    void assemble();
    std::vector<double> pack(const CircuitState& state) const;
    void unpack(const std::vector<double>& x, CircuitState& state) const;

    const LoopConfig config_;
    double dt_;
    std::size_t dim_ = 0;
    bool has_inductors_ = false;
    // P x' = Q x + (b(t)+b(t+dt))/2, both tridiagonal; P pre-factored.
    std::vector<double> p_lower_, p_diag_, p_upper_;   // factored in-place
    std::vector<double> q_lower_, q_diag_, q_upper_;
    std::vector<double> thomas_w_, thomas_d_;
    std::vector<double> x_, y_, rhs_;
    std::size_t steps_since_check_ = 0;
};

// One trapezoidal step (convenience wrapper; protocol code uses LoopSolver).
CircuitState step(const CircuitState& state, const LoopConfig& config, double t,
                  double dt);

// Simulate [t0, t0+duration], recording `record_nodes` (deduplicated, must be
// valid) every step. Returns the trace and the final state for carry-over.
std::pair<Trace, CircuitState> simulate_period(const LoopConfig& config,
                                               double duration, double dt,
                                               const CircuitState& initial,
                                               const std::vector<int>& record_nodes,
                                               double t0 = 0.0);

// Ideal (zero-impedance) wire spectra for resistors R_A at T_A and R_B at T_B:
//   S_i = 4k (T_A R_A + T_B R_B) / (R_A + R_B)^2
//   S_u = 4k (T_A R_A R_B^2 + T_B R_B R_A^2) / (R_A + R_B)^2
SpectraPair analytic_loop_spectra(double R_A, double T_A, double R_B, double T_B);

// Early-transient charging of C through R toward band-limited Johnson noise;
// returns the mean |dU/dt| over [0, window], averaged over n_trials.
double charging_rate_demo(double R, double C, double B, double T_eff, double window,
                          double dt = 0.0, std::size_t n_trials = 256,
                          std::uint64_t seed = 1);

double stored_energy(const CircuitState& state, const LoopConfig& config);

}  // namespace kljn::circuit
