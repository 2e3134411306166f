#include "kljn/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "kljn/constants.hpp"
#include "kljn/rng.hpp"

namespace kljn::circuit {

void CableModel::validate() const {
    if (n_segments < 1) throw std::invalid_argument("CableModel: n_segments must be >= 1");
    if (series_resistance_per_segment < 0.0 || series_inductance_per_segment < 0.0 ||
        shunt_capacitance_per_segment < 0.0)
        throw std::invalid_argument("CableModel: element values must be >= 0");
    if (n_segments > 1 && series_resistance_per_segment == 0.0 &&
        series_inductance_per_segment == 0.0)
        throw std::invalid_argument(
            "CableModel: need series resistance or inductance when n_segments > 1");
    if (!(shunt_capacitance_per_segment > 0.0))
        throw std::invalid_argument("CableModel: shunt capacitance must be > 0");
    for (int tap : tap_nodes) {
        if (tap < 0 || tap >= n_nodes())
            throw std::invalid_argument("CableModel: tap node out of range");
    }
}

bool CableModel::single_node() const {
    return n_segments == 1 && series_resistance_per_segment == 0.0 &&
           series_inductance_per_segment == 0.0;
}

int CableModel::n_nodes() const { return single_node() ? 1 : n_segments + 1; }

double CableModel::total_capacitance() const {
    return shunt_capacitance_per_segment * static_cast<double>(n_segments);
}

double CableModel::total_inductance() const {
    return series_inductance_per_segment * static_cast<double>(n_segments);
}

double CableModel::characteristic_impedance() const {
    if (series_inductance_per_segment == 0.0) return 0.0;
    return std::sqrt(series_inductance_per_segment / shunt_capacitance_per_segment);
}

double CableModel::transit_time() const {
    return static_cast<double>(n_segments) *
           std::sqrt(series_inductance_per_segment * shunt_capacitance_per_segment);
}

double SourceDrive::envelope(double t) const {
    if (ramp_time <= 0.0) return 1.0;
    if (t <= 0.0) return 0.0;
    return std::min(t / ramp_time, 1.0);
}

double SourceDrive::at(double t) const {
    double v = dc;
    if (!waveform.samples.empty()) {
        const double pos = t / waveform.dt;
        if (pos <= 0.0) {
            v = waveform.samples.front();
        } else {
            const auto i = static_cast<std::size_t>(pos);
            if (i + 1 >= waveform.samples.size()) {
                v = waveform.samples.back();
            } else {
                const double frac = pos - static_cast<double>(i);
                v = waveform.samples[i] * (1.0 - frac) + waveform.samples[i + 1] * frac;
            }
        }
    }
    return v * envelope(t);
}

void LoopConfig::validate() const {
    if (!(R_A > 0.0) || !(R_B > 0.0))
        throw std::invalid_argument("LoopConfig: R_A and R_B must be > 0");
    if (source_A.ramp_time < 0.0 || source_B.ramp_time < 0.0)
        throw std::invalid_argument("LoopConfig: ramp_time must be >= 0");
    cable.validate();
}

const std::vector<double>& Trace::at_node(int node) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] == node) return node_v[i];
    }
    throw std::invalid_argument("Trace: node not recorded");
}

signal::SampledSignal Trace::node_signal(int node) const {
    return signal::SampledSignal{at_node(node), dt};
}

signal::SampledSignal Trace::current_signal() const {
    return signal::SampledSignal{entry_current, dt};
}

void Trace::dump_csv(std::ostream& os) const {
    os << "t";
    for (int n : nodes) os << ",node_" << n;
    os << ",I_entry\n";
    char buf[64];
    for (std::size_t s = 0; s < size(); ++s) {
        std::snprintf(buf, sizeof(buf), "%.12g", dt * static_cast<double>(s + 1));
        os << buf;
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            std::snprintf(buf, sizeof(buf), ",%.12g", node_v[n][s]);
            os << buf;
        }
        std::snprintf(buf, sizeof(buf), ",%.12g", entry_current[s]);
        os << buf << "\n";
    }
}

LoopSolver::LoopSolver(const LoopConfig& config, double dt) : config_(config), dt_(dt) {
    config_.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("LoopSolver: dt must be > 0");
    assemble();
}

void LoopSolver::assemble() {
    const CableModel& cab = config_.cable;
    const int N = cab.n_segments;
    has_inductors_ = !cab.single_node() && cab.series_inductance_per_segment > 0.0;
    dim_ = cab.single_node() ? 1
                             : (has_inductors_ ? static_cast<std::size_t>(2 * N + 1)
                                               : static_cast<std::size_t>(N + 1));

    // C xdot = A x + b; P = C/dt - A/2, Q = C/dt + A/2, both tridiagonal.
    std::vector<double> a_lower(dim_, 0.0), a_diag(dim_, 0.0), a_upper(dim_, 0.0);
    std::vector<double> c_diag(dim_, 0.0);

    const double cs = cab.shunt_capacitance_per_segment;
    const double ls = cab.series_inductance_per_segment;
    const double rs = cab.series_resistance_per_segment;

    auto node_cap = [&](int i) {
        if (cab.single_node()) return cs;
        return (i == 0 || i == N) ? cs / 2.0 : cs;
    };

    if (cab.single_node()) {
        c_diag[0] = node_cap(0);
        a_diag[0] = -(1.0 / config_.R_A + 1.0 / config_.R_B);
    } else if (has_inductors_) {
        for (int i = 0; i <= N; ++i) {
            const std::size_t row = static_cast<std::size_t>(2 * i);
            c_diag[row] = node_cap(i);
            if (i == 0) a_diag[row] -= 1.0 / config_.R_A;
            if (i == N) a_diag[row] -= 1.0 / config_.R_B;
            if (i > 0) a_lower[row] = 1.0;    // + J_i
            if (i < N) a_upper[row] = -1.0;   // - J_{i+1}
        }
        for (int i = 1; i <= N; ++i) {
            const std::size_t row = static_cast<std::size_t>(2 * i - 1);
            c_diag[row] = ls;
            a_lower[row] = 1.0;   // + V_{i-1}
            a_diag[row] = -rs;
            a_upper[row] = -1.0;  // - V_i
        }
    } else {
        const double g = 1.0 / rs;
        for (int i = 0; i <= N; ++i) {
            const std::size_t row = static_cast<std::size_t>(i);
            c_diag[row] = node_cap(i);
            double gd = 0.0;
            if (i > 0) {
                a_lower[row] = g;
                gd += g;
            }
            if (i < N) {
                a_upper[row] = g;
                gd += g;
            }
            if (i == 0) gd += 1.0 / config_.R_A;
            if (i == N) gd += 1.0 / config_.R_B;
            a_diag[row] = -gd;
        }
    }

    p_lower_.resize(dim_);
    p_diag_.resize(dim_);
    p_upper_.resize(dim_);
    q_lower_.resize(dim_);
    q_diag_.resize(dim_);
    q_upper_.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        p_lower_[i] = -a_lower[i] / 2.0;
        p_diag_[i] = c_diag[i] / dt_ - a_diag[i] / 2.0;
        p_upper_[i] = -a_upper[i] / 2.0;
        q_lower_[i] = a_lower[i] / 2.0;
        q_diag_[i] = c_diag[i] / dt_ + a_diag[i] / 2.0;
        q_upper_[i] = a_upper[i] / 2.0;
    }

    // Thomas factorization of P (constant over the run).
    thomas_w_.assign(dim_, 0.0);
    thomas_d_.assign(dim_, 0.0);
    thomas_d_[0] = p_diag_[0];
    for (std::size_t i = 1; i < dim_; ++i) {
        thomas_w_[i] = p_lower_[i] / thomas_d_[i - 1];
        thomas_d_[i] = p_diag_[i] - thomas_w_[i] * p_upper_[i - 1];
    }

    x_.assign(dim_, 0.0);
    y_.assign(dim_, 0.0);
    rhs_.assign(dim_, 0.0);
}

CircuitState LoopSolver::initial_state() const {
    CircuitState st;
    st.node_voltages.assign(static_cast<std::size_t>(config_.cable.n_nodes()), 0.0);
    if (has_inductors_)
        st.inductor_currents.assign(static_cast<std::size_t>(config_.cable.n_segments), 0.0);
    return st;
}

std::vector<double> LoopSolver::pack(const CircuitState& state) const {
    const int N = config_.cable.n_segments;
    if (state.node_voltages.size() != static_cast<std::size_t>(config_.cable.n_nodes()))
        throw std::invalid_argument("CircuitState: node dimension mismatch");
    if (has_inductors_ &&
        state.inductor_currents.size() != static_cast<std::size_t>(N))
        throw std::invalid_argument("CircuitState: inductor dimension mismatch");
    std::vector<double> x(dim_);
    if (has_inductors_) {
        for (int i = 0; i <= N; ++i) x[static_cast<std::size_t>(2 * i)] = state.node_voltages[static_cast<std::size_t>(i)];
        for (int i = 1; i <= N; ++i)
            x[static_cast<std::size_t>(2 * i - 1)] = state.inductor_currents[static_cast<std::size_t>(i - 1)];
    } else {
        for (std::size_t i = 0; i < dim_; ++i) x[i] = state.node_voltages[i];
    }
    return x;
}

void LoopSolver::unpack(const std::vector<double>& x, CircuitState& state) const {
    const int N = config_.cable.n_segments;
    if (has_inductors_) {
        state.node_voltages.resize(static_cast<std::size_t>(N + 1));
        state.inductor_currents.resize(static_cast<std::size_t>(N));
        for (int i = 0; i <= N; ++i) state.node_voltages[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(2 * i)];
        for (int i = 1; i <= N; ++i)
            state.inductor_currents[static_cast<std::size_t>(i - 1)] = x[static_cast<std::size_t>(2 * i - 1)];
    } else {
        state.node_voltages.assign(x.begin(), x.end());
        state.inductor_currents.clear();
    }
}

void LoopSolver::step(CircuitState& state, double t) {
    x_ = pack(state);

    const double ua0 = config_.source_A.at(t) / config_.R_A;
    const double ua1 = config_.source_A.at(t + dt_) / config_.R_A;
    const double ub0 = config_.source_B.at(t) / config_.R_B;
    const double ub1 = config_.source_B.at(t + dt_) / config_.R_B;

    // rhs = Q x + (b(t) + b(t+dt))/2
    for (std::size_t i = 0; i < dim_; ++i) {
        double r = q_diag_[i] * x_[i];
        if (i > 0) r += q_lower_[i] * x_[i - 1];
        if (i + 1 < dim_) r += q_upper_[i] * x_[i + 1];
        rhs_[i] = r;
    }
    if (config_.cable.single_node()) {
        rhs_[0] += (ua0 + ua1) / 2.0 + (ub0 + ub1) / 2.0;
    } else {
        rhs_[0] += (ua0 + ua1) / 2.0;
        rhs_[dim_ - 1] += (ub0 + ub1) / 2.0;
    }

    // Thomas solve with pre-factored P
    y_[0] = rhs_[0];
    for (std::size_t i = 1; i < dim_; ++i) y_[i] = rhs_[i] - thomas_w_[i] * y_[i - 1];
    x_[dim_ - 1] = y_[dim_ - 1] / thomas_d_[dim_ - 1];
    for (std::size_t i = dim_ - 1; i-- > 0;)
        x_[i] = (y_[i] - p_upper_[i] * x_[i + 1]) / thomas_d_[i];

    if (++steps_since_check_ >= 512) {
        steps_since_check_ = 0;
        if (!std::isfinite(x_[0]))
            throw std::runtime_error("LoopSolver: solver divergence, non-finite state");
    }
    unpack(x_, state);
}

double LoopSolver::entry_current(const CircuitState& state, double t) const {
    return (config_.source_A.at(t) - state.node_voltages[0]) / config_.R_A;
}

CircuitState step(const CircuitState& state, const LoopConfig& config, double t,
                  double dt) {
    LoopSolver solver(config, dt);
    CircuitState out = state;
    solver.step(out, t);
    if (!std::isfinite(out.node_voltages[0]))
        throw std::runtime_error("step: solver divergence, non-finite state");
    return out;
}

std::pair<Trace, CircuitState> simulate_period(const LoopConfig& config,
                                               double duration, double dt,
                                               const CircuitState& initial,
                                               const std::vector<int>& record_nodes,
                                               double t0) {
    if (duration < 0.0) throw std::invalid_argument("simulate_period: negative duration");
    LoopSolver solver(config, dt);

    Trace trace;
    trace.dt = dt;
    trace.nodes = record_nodes;
    std::sort(trace.nodes.begin(), trace.nodes.end());
    trace.nodes.erase(std::unique(trace.nodes.begin(), trace.nodes.end()),
                      trace.nodes.end());
    for (int n : trace.nodes) {
        if (n < 0 || n >= config.cable.n_nodes())
            throw std::invalid_argument("simulate_period: record node out of range");
    }
    trace.node_v.resize(trace.nodes.size());

    CircuitState state = initial;
    if (state.node_voltages.empty()) state = solver.initial_state();
    const auto n_steps = static_cast<std::size_t>(std::llround(duration / dt));
    if (n_steps == 0) return {trace, state};

    for (auto& v : trace.node_v) v.reserve(n_steps);
    trace.entry_current.reserve(n_steps);

    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = t0 + static_cast<double>(k) * dt;
        solver.step(state, t);
        for (std::size_t ni = 0; ni < trace.nodes.size(); ++ni)
            trace.node_v[ni].push_back(
                state.node_voltages[static_cast<std::size_t>(trace.nodes[ni])]);
        trace.entry_current.push_back(solver.entry_current(state, t + dt));
    }
    if (!std::isfinite(state.node_voltages[0]))
        throw std::runtime_error("simulate_period: solver divergence");
    return {trace, state};
}

SpectraPair analytic_loop_spectra(double R_A, double T_A, double R_B, double T_B) {
    if (!(R_A > 0.0) || !(R_B > 0.0))
        throw std::invalid_argument("analytic_loop_spectra: resistances must be > 0");
    if (T_A < 0.0 || T_B < 0.0)
        throw std::invalid_argument("analytic_loop_spectra: temperatures must be >= 0");
    const double sum = R_A + R_B;
    SpectraPair sp;
    sp.S_i = 4.0 * k_boltzmann * (T_A * R_A + T_B * R_B) / (sum * sum);
    sp.S_u = 4.0 * k_boltzmann * (T_A * R_A * R_B * R_B + T_B * R_B * R_A * R_A) /
             (sum * sum);
    return sp;
}

double charging_rate_demo(double R, double C, double B, double T_eff, double window,
                          double dt, std::size_t n_trials, std::uint64_t seed) {
    if (!(R > 0.0) || !(C > 0.0) || !(B > 0.0))
        throw std::invalid_argument("charging_rate_demo: R, C, B must be > 0");
    if (T_eff < 0.0) throw std::invalid_argument("charging_rate_demo: T_eff < 0");
    if (!(window > 0.0) || window > 0.1 * R * C + 1e-15 * R * C)
        throw std::invalid_argument(
            "charging_rate_demo: window must be in (0, 0.1*R*C] (early transient)");
    if (n_trials == 0) throw std::invalid_argument("charging_rate_demo: n_trials == 0");
    if (dt <= 0.0) dt = std::min(window / 100.0, 1.0 / (20.0 * B));
    const auto n_steps = std::max<std::size_t>(2, static_cast<std::size_t>(window / dt));
    if (T_eff == 0.0) return 0.0;

    const signal::NoiseSpec spec = signal::johnson_noise_spec(T_eff, R, B);
    double acc = 0.0;
    for (std::size_t trial = 0; trial < n_trials; ++trial) {
        const auto noise = signal::generate_band_limited_gaussian(
            spec, n_steps + 1, dt, derive_seed(seed, {0x6368617267ull, trial}));
        // trapezoidal step of C charging through R toward the noise voltage
        const double a = C / dt + 0.5 / R;
        const double b = C / dt - 0.5 / R;
        double v = 0.0;
        double slope_sum = 0.0;
        for (std::size_t k = 0; k < n_steps; ++k) {
            const double vn =
                (b * v + (noise.samples[k] + noise.samples[k + 1]) / (2.0 * R)) / a;
            slope_sum += std::fabs(vn - v) / dt;
            v = vn;
        }
        acc += slope_sum / static_cast<double>(n_steps);
    }
    return acc / static_cast<double>(n_trials);
}

double stored_energy(const CircuitState& state, const LoopConfig& config) {
    const CableModel& cab = config.cable;
    const int N = cab.n_segments;
    double e = 0.0;
    for (int i = 0; i < cab.n_nodes(); ++i) {
        const double c = cab.single_node()
                             ? cab.shunt_capacitance_per_segment
                             : ((i == 0 || i == N) ? cab.shunt_capacitance_per_segment / 2.0
                                                   : cab.shunt_capacitance_per_segment);
        const double v = state.node_voltages[static_cast<std::size_t>(i)];
        e += 0.5 * c * v * v;
    }
    for (double j : state.inductor_currents)
        e += 0.5 * cab.series_inductance_per_segment * j * j;
    return e;
}

}  // namespace kljn::circuit
