// Release gate: one self-contained check per acceptance criterion. Every
// criterion prints exactly one PASS/FAIL line with the measured numbers; the
// process exit status is the number of failures. Run with a criterion number
// (1-9) to check just that one, or with no arguments for the full gate.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kljn/attack.hpp"
#include "kljn/circuit.hpp"
#include "kljn/harness.hpp"
#include "kljn/privacy.hpp"
#include "kljn/protocol.hpp"
#include "kljn/rng.hpp"
#include "kljn/signal.hpp"
#include "kljn/stats.hpp"

using namespace kljn;

namespace {

std::string config_path(const char* name) {
    return std::string(KLJN_CONFIG_DIR) + "/" + name;
}

struct Line {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0,
                double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

// 1. Transient attack on plain KLJN, shipped default config: Eve's success
//    probability is decisively above 1/2 over at least 2000 secure bits.
Line criterion_attack_success() {
    auto c = harness::load_config(config_path("attack_transient.toml"));
    const auto eve = attack::calibrate_transient_classifier(
        c.kljn, c.eve, c.n_training, derive_seed(c.master_seed, {0}));
    const auto st = attack::estimate_eve_success(c.kljn, eve, c.n_periods,
                                                 derive_seed(c.master_seed, {1}));
    const bool pass = st.n_secure_bits >= 2000 && st.p >= 0.65 && st.ci_low > 0.5;
    return {pass, fmt("p = %.4f, 95%% CI [%.4f, %.4f], %.0f secure bits "
                      "(need p >= 0.65, CI above 0.5, >= 2000 bits)",
                      st.p, st.ci_low, st.ci_high,
                      static_cast<double>(st.n_secure_bits))};
}

// 2. The same attack against the random-resistance defense is blind: success
//    indistinguishable from coin flipping over at least 2000 secure bits.
Line criterion_defense_immunity() {
    auto c = harness::load_config(config_path("defend_rrrt.toml"));
    const auto eve = attack::calibrate_transient_classifier(
        c.rrrt, c.kljn.cable, c.eve, c.n_training, derive_seed(c.master_seed, {0}));
    const auto st = attack::estimate_eve_success(c.rrrt, c.kljn.cable, eve,
                                                 c.n_periods,
                                                 derive_seed(c.master_seed, {1}));
    const bool pass = st.n_secure_bits >= 2000 && st.p >= 0.47 && st.p <= 0.53 &&
                      st.ci_low < 0.5 && st.ci_high > 0.5;
    return {pass, fmt("p = %.4f, 95%% CI [%.4f, %.4f], %.0f secure bits "
                      "(need p in [0.47, 0.53], CI containing 0.5, >= 2000 bits)",
                      st.p, st.ci_low, st.ci_high,
                      static_cast<double>(st.n_secure_bits))};
}

// 3. Privacy amplification: four XOR stages push any starting advantage in
//    [0.7, 0.8] below 0.5006 at an exact 16x length cost, and a Monte Carlo
//    eavesdropper matches the recursion within 3 sigma at 2^20 bits.
Line criterion_privacy() {
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double p0 = 0.7 + 0.001 * i;
        const double p4 = privacy::predicted_p_after_stages(p0, 4);
        worst = std::max(worst, p4);
        if (!(p4 > 0.5 && p4 < 0.5006))
            return {false, fmt("recursion leaves the band at p0 = %.3f "
                               "(p4 = %.7f)", p0, p4)};
    }

    privacy::KeyMaterial key;
    key.bits.assign(1600, 0);
    key.eve_p = 0.75;
    const auto [out, rep] = privacy::amplify(key, 4);
    if (out.bits.size() != 100 || rep.slowdown_factor != 16.0)
        return {false, fmt("length bookkeeping wrong: 1600 -> %.0f, slowdown %.1f",
                           static_cast<double>(out.bits.size()),
                           rep.slowdown_factor)};

    // correctness of Eve's guess propagates through XOR as "both or neither"
    const std::size_t n = 1ull << 20;
    Rng rng(20250301);
    std::vector<int> correct(n);
    for (auto& c : correct) c = rng.uniform01() < 0.75 ? 1 : 0;
    for (int stage = 0; stage < 4; ++stage) {
        std::vector<int> next(correct.size() / 2);
        for (std::size_t i = 0; i < next.size(); ++i)
            next[i] = correct[2 * i] == correct[2 * i + 1] ? 1 : 0;
        correct.swap(next);
    }
    double emp = 0.0;
    for (int c : correct) emp += c;
    emp /= static_cast<double>(correct.size());
    const double pred = privacy::predicted_p_after_stages(0.75, 4);
    const double sigma =
        std::sqrt(pred * (1.0 - pred) / static_cast<double>(correct.size()));
    const double z = std::fabs(emp - pred) / sigma;
    const bool pass = z <= 3.0;
    return {pass, fmt("max p4 = %.7f < 0.5006, 16x reduction exact, Monte Carlo "
                      "|z| = %.2f <= 3", worst, z)};
}

// 4. Loop resistance recovery from the current spectrum at BT = 1e4, plus a
//    bit error rate below 1% there and not increasing with BT.
Line criterion_loop_resistance() {
    circuit::CableModel wire;
    wire.n_segments = 1;
    wire.series_resistance_per_segment = 0.0;
    wire.series_inductance_per_segment = 0.0;
    wire.shunt_capacitance_per_segment = 1e-10;
    wire.tap_nodes = {0};

    protocol::KljnParams p;
    p.cable = wire;
    p.bit_period = 1.0;  // BT = 1e4
    p.measurement_band_fraction = 0.9;
    const auto res = protocol::run_kljn_period(p, 424242, circuit::CircuitState{},
                                               protocol::Bit::L, protocol::Bit::H);
    const double target = p.R_L + p.R_H;
    const double rel = std::fabs(res.outcome.r_loop_estimate - target) / target;

    protocol::KljnParams q = p;
    q.measurement_band_fraction = 0.1;
    q.bit_period = 0.1;  // BT = 1e3
    const auto lo = protocol::estimate_bit_error(q, 200, 7);
    q.bit_period = 1.0;  // BT = 1e4
    const auto hi = protocol::estimate_bit_error(q, 200, 7);

    const bool pass = rel <= 0.02 && hi.q < 0.01 && hi.q <= lo.q;
    return {pass, fmt("R_loop off by %.2f%% (limit 2%%); q = %.4f at BT = 1e4 "
                      "vs %.4f at BT = 1e3", 100.0 * rel, hi.q, lo.q)};
}

// 5. Early charging rate scales as 1/sqrt(R): quadrupling R halves the slope.
Line criterion_rate_scaling() {
    const double C = 1e-5, B = 1e4, T = 1e18, R = 1000.0;
    const double s1 = circuit::charging_rate_demo(R, C, B, T, 0.1 * R * C);
    const double s4 = circuit::charging_rate_demo(4.0 * R, C, B, T, 0.1 * R * C);
    const double ratio = s1 / s4;
    const bool pass = std::fabs(ratio - 2.0) <= 0.2;
    return {pass, fmt("slope ratio R vs 4R = %.3f (need 2.0 +- 10%%)", ratio)};
}

// 6. LH and HL periods are statistically indistinguishable on the wire: a
//    two-sample KS test on per-period mean-square midpoint voltage does not
//    reject at alpha = 0.01 with 1000 periods per class.
Line criterion_lh_hl_indistinguishable() {
    protocol::KljnParams p;  // defaults: full cable, 0.1 s periods
    const int mid = p.cable.n_nodes() / 2;
    circuit::CircuitState state;
    std::vector<double> ms_lh, ms_hl;
    for (std::size_t i = 0; i < 2000; ++i) {
        const bool lh = (i % 2) == 0;
        const auto res = protocol::run_kljn_period(
            p, derive_seed(606060, {i}), state,
            lh ? protocol::Bit::L : protocol::Bit::H,
            lh ? protocol::Bit::H : protocol::Bit::L);
        state = res.final_state;
        const auto sig = res.coarse_trace.node_signal(mid);
        (lh ? ms_lh : ms_hl).push_back(signal::mean_square(sig));
    }
    const auto [d, pval] = ks_two_sample(ms_lh, ms_hl);
    const bool pass = pval >= 0.01;
    return {pass, fmt("KS D = %.4f, p-value = %.3f over 1000 periods/class "
                      "(reject below 0.01)", d, pval)};
}

// 7. DC continuity experiment: the full eavesdropper is exact everywhere
//    including R_E = 0; the voltage-only estimator spread scales as
//    1/sqrt(R_E); p has no discontinuous jump across the grid; and the
//    voltage-only inversion refuses R_E = 0.
Line criterion_continuity() {
    // (a) noiseless full Eve: p = 1 at every grid point including 0
    std::vector<double> grid{0.0};
    for (double r : attack::default_resistance_grid()) grid.push_back(r);
    attack::DcScenario sc;
    sc.include_noise = false;
    sc.mode = attack::DcEveMode::voltage_and_current;
    for (const auto& row : attack::run_continuity_experiment(grid, sc, 500, 77))
        if (row.p != 1.0)
            return {false, fmt("noiseless full Eve p = %.3f at R_E = %.2g",
                               row.p, row.R_E)};

    // (b) voltage-only spread ratio across two decades of R_E
    attack::DcScenario noisy;
    noisy.include_noise = true;
    noisy.mode = attack::DcEveMode::voltage_only;
    const auto spread = attack::run_continuity_experiment({1e-4, 1e-2}, noisy,
                                                          4000, 78);
    const double ratio = spread[0].est_std / spread[1].est_std;
    if (std::fabs(ratio - 10.0) > 1.5)
        return {false, fmt("spread ratio across two decades = %.2f "
                           "(need 10 +- 15%%)", ratio)};

    // (c) no adjacent jump in p beyond 3 binomial sigma, noise on
    attack::DcScenario cont;
    cont.include_noise = true;
    cont.mode = attack::DcEveMode::voltage_and_current;
    cont.temperature = 2e22;  // noise strong enough that p sits well below 1
    const auto rows = attack::run_continuity_experiment(
        attack::default_resistance_grid(), cont, 2000, 79);
    double worst_z = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double n = static_cast<double>(rows[i].n);
        const double var = rows[i].p * (1.0 - rows[i].p) / n +
                           rows[i - 1].p * (1.0 - rows[i - 1].p) / n;
        worst_z = std::max(worst_z,
                           std::fabs(rows[i].p - rows[i - 1].p) / std::sqrt(var));
    }
    if (worst_z > 3.0)
        return {false, fmt("adjacent p jump of %.2f sigma (limit 3)", worst_z)};

    // (d) voltage-only inversion is singular at R_E = 0
    bool threw = false;
    try {
        attack::dc_eve_voltage_only(1.0, 2.0, 0.0);
    } catch (const std::runtime_error&) {
        threw = true;
    }
    if (!threw) return {false, "voltage-only inversion accepted R_E = 0"};

    return {true, fmt("full Eve exact on all %.0f grid points incl. 0; spread "
                      "ratio %.2f; worst adjacent jump %.2f sigma; R_E = 0 "
                      "rejected", static_cast<double>(grid.size()), ratio,
                      worst_z)};
}

// 8. Symmetric linear ramping is not a defense: the attack CI still excludes
//    a fair coin.
Line criterion_ramp_not_a_defense() {
    protocol::KljnParams p;  // defaults except the switching style
    p.switching = protocol::SwitchingMode::symmetric_ramp;
    p.ramp_time = 2e-6;
    attack::EveConfig eve;
    const auto cal = attack::calibrate_transient_classifier(
        p, eve, 150, derive_seed(1, {0}));
    const auto st = attack::estimate_eve_success(p, cal, 2200, derive_seed(1, {1}));
    const bool pass = st.ci_low > 0.5;
    return {pass, fmt("p = %.4f, 95%% CI [%.4f, %.4f] over %.0f secure bits "
                      "(CI must exclude 0.5)", st.p, st.ci_low, st.ci_high,
                      static_cast<double>(st.n_secure_bits))};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 9. Determinism: identical config and seed give byte-identical CSV output.
Line criterion_determinism() {
    const auto base = std::filesystem::temp_directory_path() / "kljn_acceptance";
    std::filesystem::remove_all(base);
    for (const char* experiment : {"scaling-demo", "continuity"}) {
        harness::ExperimentConfig c;
        c.experiment = experiment;
        c.master_seed = 4;
        c.n_trials = experiment == std::string("continuity") ? 500 : 128;
        c.output_dir = (base / "a").string();
        const auto r1 = harness::run_experiment(c);
        c.output_dir = (base / "b").string();
        const auto r2 = harness::run_experiment(c);
        if (r1.summary != r2.summary)
            return {false, std::string("summary differs for ") + experiment};
        for (std::size_t i = 0; i < r1.csv_paths.size(); ++i)
            if (slurp(r1.csv_paths[i]) != slurp(r2.csv_paths[i]))
                return {false, std::string("CSV differs for ") + experiment};
    }
    return {true, "repeated runs byte-identical (scaling-demo, continuity)"};
}

Line run_criterion(int id) {
    switch (id) {
        case 1: return criterion_attack_success();
        case 2: return criterion_defense_immunity();
        case 3: return criterion_privacy();
        case 4: return criterion_loop_resistance();
        case 5: return criterion_rate_scaling();
        case 6: return criterion_lh_hl_indistinguishable();
        case 7: return criterion_continuity();
        case 8: return criterion_ramp_not_a_defense();
        case 9: return criterion_determinism();
        default: throw std::invalid_argument("criterion id must be 1-9");
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> ids;
    if (argc > 1) {
        for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
    } else {
        for (int i = 1; i <= 9; ++i) ids.push_back(i);
    }
    int failures = 0;
    for (int id : ids) {
        Line line;
        try {
            line = run_criterion(id);
        } catch (const std::exception& e) {
            line = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %d: %s — %s\n", id, line.pass ? "PASS" : "FAIL",
                    line.detail.c_str());
        std::fflush(stdout);
        if (!line.pass) ++failures;
    }
    return failures;
}
