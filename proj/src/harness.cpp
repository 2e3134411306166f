#include "kljn/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "kljn/privacy.hpp"
#include "kljn/rng.hpp"
#include "kljn/signal.hpp"
#include "kljn/stats.hpp"

namespace kljn::harness {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// strip an unquoted trailing comment
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

[[noreturn]] void parse_fail(const std::string& msg) {
    throw std::invalid_argument("config: " + msg);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) parse_fail(key + ": malformed number '" + v + "'");
        return d;
    } catch (const std::invalid_argument&) {
        parse_fail(key + ": malformed number '" + v + "'");
    } catch (const std::out_of_range&) {
        parse_fail(key + ": number out of range '" + v + "'");
    }
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    if (v.empty() || v[0] == '-')
        parse_fail(key + ": expects a non-negative integer, got '" + v + "'");
    try {
        std::size_t pos = 0;
        const std::uint64_t u = std::stoull(v, &pos);
        if (pos != v.size()) parse_fail(key + ": malformed integer '" + v + "'");
        return u;
    } catch (const std::invalid_argument&) {
        parse_fail(key + ": malformed integer '" + v + "'");
    } catch (const std::out_of_range&) {
        parse_fail(key + ": integer out of range '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    parse_fail(key + ": expects true or false, got '" + v + "'");
}

std::string to_string_value(const std::string& key, const std::string& v) {
    if (v.size() < 2 || v.front() != '"' || v.back() != '"')
        parse_fail(key + ": expects a quoted string, got '" + v + "'");
    return v.substr(1, v.size() - 2);
}

std::vector<int> to_int_array(const std::string& key, const std::string& v) {
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        parse_fail(key + ": expects an array like [1, 2], got '" + v + "'");
    std::vector<int> out;
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) parse_fail(key + ": empty array element");
        out.push_back(static_cast<int>(to_uint(key, item)));
    }
    return out;
}

protocol::SwitchingMode to_switching(const std::string& key, const std::string& v) {
    const std::string s = to_string_value(key, v);
    if (s == "abrupt") return protocol::SwitchingMode::abrupt;
    if (s == "symmetric_ramp") return protocol::SwitchingMode::symmetric_ramp;
    parse_fail(key + ": expects \"abrupt\" or \"symmetric_ramp\", got \"" + s + "\"");
}

attack::TransientStatistic to_statistic(const std::string& key, const std::string& v) {
    const std::string s = to_string_value(key, v);
    if (s == "early_mean_square") return attack::TransientStatistic::early_mean_square;
    if (s == "mean_abs_delta") return attack::TransientStatistic::mean_abs_delta;
    parse_fail(key + ": expects \"early_mean_square\" or \"mean_abs_delta\", got \"" +
               s + "\"");
}

attack::DcEveMode to_dc_mode(const std::string& key, const std::string& v) {
    const std::string s = to_string_value(key, v);
    if (s == "voltage_only") return attack::DcEveMode::voltage_only;
    if (s == "voltage_and_current") return attack::DcEveMode::voltage_and_current;
    parse_fail(key + ": expects \"voltage_only\" or \"voltage_and_current\", got \"" +
               s + "\"");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_csv(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void assign(ExperimentConfig& c, const std::string& section, const std::string& key,
            const std::string& value) {
    const std::string full = section.empty() ? key : section + "." + key;
    using H = std::function<void()>;
    const std::map<std::string, H> handlers = {
        {"experiment", [&] { c.experiment = to_string_value(full, value); }},
        {"master_seed", [&] { c.master_seed = to_uint(full, value); }},
        {"n_periods", [&] { c.n_periods = to_uint(full, value); }},
        {"n_trials", [&] { c.n_trials = to_uint(full, value); }},
        {"n_training", [&] { c.n_training = to_uint(full, value); }},
        {"output_dir", [&] { c.output_dir = to_string_value(full, value); }},
        {"kljn.R_L", [&] { c.kljn.R_L = to_double(full, value); }},
        {"kljn.R_H", [&] { c.kljn.R_H = to_double(full, value); }},
        {"kljn.T_eff", [&] { c.kljn.T_eff = to_double(full, value); }},
        {"kljn.bandwidth", [&] { c.kljn.bandwidth = to_double(full, value); }},
        {"kljn.bit_period", [&] { c.kljn.bit_period = to_double(full, value); }},
        {"kljn.switching", [&] { c.kljn.switching = to_switching(full, value); }},
        {"kljn.ramp_time", [&] { c.kljn.ramp_time = to_double(full, value); }},
        {"kljn.transient_capture",
         [&] { c.kljn.transient_capture = to_double(full, value); }},
        {"kljn.measurement_band_fraction",
         [&] { c.kljn.measurement_band_fraction = to_double(full, value); }},
        {"cable.n_segments",
         [&] { c.kljn.cable.n_segments = static_cast<int>(to_uint(full, value)); }},
        {"cable.series_resistance_per_segment",
         [&] { c.kljn.cable.series_resistance_per_segment = to_double(full, value); }},
        {"cable.series_inductance_per_segment",
         [&] { c.kljn.cable.series_inductance_per_segment = to_double(full, value); }},
        {"cable.shunt_capacitance_per_segment",
         [&] { c.kljn.cable.shunt_capacitance_per_segment = to_double(full, value); }},
        {"cable.tap_nodes", [&] { c.kljn.cable.tap_nodes = to_int_array(full, value); }},
        {"rrrt.R_min", [&] { c.rrrt.R_min = to_double(full, value); }},
        {"rrrt.R_max", [&] { c.rrrt.R_max = to_double(full, value); }},
        {"rrrt.T_min", [&] { c.rrrt.T_min = to_double(full, value); }},
        {"rrrt.T_max", [&] { c.rrrt.T_max = to_double(full, value); }},
        {"rrrt.bandwidth", [&] { c.rrrt.bandwidth = to_double(full, value); }},
        {"rrrt.bit_period", [&] { c.rrrt.bit_period = to_double(full, value); }},
        {"rrrt.resolution_threshold",
         [&] { c.rrrt.resolution_threshold = to_double(full, value); }},
        {"rrrt.transient_capture",
         [&] { c.rrrt.transient_capture = to_double(full, value); }},
        {"rrrt.measurement_band_fraction",
         [&] { c.rrrt.measurement_band_fraction = to_double(full, value); }},
        {"attack.tap_node",
         [&] { c.eve.tap_node = static_cast<int>(to_uint(full, value)); }},
        {"attack.window_fraction",
         [&] { c.eve.window_fraction = to_double(full, value); }},
        {"attack.statistic", [&] { c.eve.statistic = to_statistic(full, value); }},
        {"dc.U0", [&] { c.dc.U0 = to_double(full, value); }},
        {"dc.temperature", [&] { c.dc.temperature = to_double(full, value); }},
        {"dc.include_noise", [&] { c.dc.include_noise = to_bool(full, value); }},
        {"dc.averaging_time", [&] { c.dc.averaging_time = to_double(full, value); }},
        {"dc.bandwidth", [&] { c.dc.bandwidth = to_double(full, value); }},
        {"dc.mode", [&] { c.dc.mode = to_dc_mode(full, value); }},
        {"privacy.p0", [&] { c.privacy.p0 = to_double(full, value); }},
        {"privacy.stages", [&] { c.privacy.stages = to_uint(full, value); }},
    };
    const auto it = handlers.find(full);
    if (it == handlers.end()) parse_fail("unknown key '" + full + "'");
    it->second();
}

}  // namespace

void PrivacyParams::validate() const {
    if (!(p0 >= 0.5 && p0 <= 1.0))
        throw std::invalid_argument("PrivacyParams: p0 must lie in [0.5, 1]");
    if (stages > 62) throw std::invalid_argument("PrivacyParams: stages out of range");
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "kljn-exchange", "attack-transient", "defend-rrrt", "amplify",
        "continuity",    "psd-check",        "scaling-demo"};
    return names;
}

void ExperimentConfig::validate() const {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), experiment) == names.end()) {
        std::string all;
        for (const auto& n : names) all += (all.empty() ? "" : ", ") + n;
        throw std::invalid_argument("config: experiment must be one of {" + all +
                                    "}, got '" + experiment + "'");
    }
    kljn.validate();
    rrrt.validate();
    eve.validate(kljn.cable);
    dc.validate();
    privacy.validate();
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig config;
    std::string section;
    std::stringstream ss(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(ss, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                parse_fail("line " + std::to_string(line_no) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            parse_fail("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            parse_fail("line " + std::to_string(line_no) + ": expected key = value");
        assign(config, section, key, value);
    }
    if (config.experiment.empty()) parse_fail("missing required key 'experiment'");
    config.validate();
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "experiment = \"" << c.experiment << "\"\n";
    out << "master_seed = " << c.master_seed << "\n";
    out << "n_periods = " << c.n_periods << "\n";
    out << "n_trials = " << c.n_trials << "\n";
    out << "n_training = " << c.n_training << "\n";
    out << "output_dir = \"" << c.output_dir << "\"\n";
    out << "\n[kljn]\n";
    out << "R_L = " << fmt(c.kljn.R_L) << "\n";
    out << "R_H = " << fmt(c.kljn.R_H) << "\n";
    out << "T_eff = " << fmt(c.kljn.T_eff) << "\n";
    out << "bandwidth = " << fmt(c.kljn.bandwidth) << "\n";
    out << "bit_period = " << fmt(c.kljn.bit_period) << "\n";
    out << "switching = \""
        << (c.kljn.switching == protocol::SwitchingMode::abrupt ? "abrupt"
                                                                : "symmetric_ramp")
        << "\"\n";
    out << "ramp_time = " << fmt(c.kljn.ramp_time) << "\n";
    out << "transient_capture = " << fmt(c.kljn.transient_capture) << "\n";
    out << "measurement_band_fraction = " << fmt(c.kljn.measurement_band_fraction)
        << "\n";
    out << "\n[cable]\n";
    out << "n_segments = " << c.kljn.cable.n_segments << "\n";
    out << "series_resistance_per_segment = "
        << fmt(c.kljn.cable.series_resistance_per_segment) << "\n";
    out << "series_inductance_per_segment = "
        << fmt(c.kljn.cable.series_inductance_per_segment) << "\n";
    out << "shunt_capacitance_per_segment = "
        << fmt(c.kljn.cable.shunt_capacitance_per_segment) << "\n";
    out << "tap_nodes = [";
    for (std::size_t i = 0; i < c.kljn.cable.tap_nodes.size(); ++i)
        out << (i ? ", " : "") << c.kljn.cable.tap_nodes[i];
    out << "]\n";
    out << "\n[rrrt]\n";
    out << "R_min = " << fmt(c.rrrt.R_min) << "\n";
    out << "R_max = " << fmt(c.rrrt.R_max) << "\n";
    out << "T_min = " << fmt(c.rrrt.T_min) << "\n";
    out << "T_max = " << fmt(c.rrrt.T_max) << "\n";
    out << "bandwidth = " << fmt(c.rrrt.bandwidth) << "\n";
    out << "bit_period = " << fmt(c.rrrt.bit_period) << "\n";
    out << "resolution_threshold = " << fmt(c.rrrt.resolution_threshold) << "\n";
    out << "transient_capture = " << fmt(c.rrrt.transient_capture) << "\n";
    out << "measurement_band_fraction = " << fmt(c.rrrt.measurement_band_fraction)
        << "\n";
    out << "\n[attack]\n";
    out << "tap_node = " << c.eve.tap_node << "\n";
    out << "window_fraction = " << fmt(c.eve.window_fraction) << "\n";
    out << "statistic = \""
        << (c.eve.statistic == attack::TransientStatistic::early_mean_square
                ? "early_mean_square"
                : "mean_abs_delta")
        << "\"\n";
    out << "\n[dc]\n";
    out << "U0 = " << fmt(c.dc.U0) << "\n";
    out << "temperature = " << fmt(c.dc.temperature) << "\n";
    out << "include_noise = " << (c.dc.include_noise ? "true" : "false") << "\n";
    out << "averaging_time = " << fmt(c.dc.averaging_time) << "\n";
    out << "bandwidth = " << fmt(c.dc.bandwidth) << "\n";
    out << "mode = \""
        << (c.dc.mode == attack::DcEveMode::voltage_only ? "voltage_only"
                                                         : "voltage_and_current")
        << "\"\n";
    out << "\n[privacy]\n";
    out << "p0 = " << fmt(c.privacy.p0) << "\n";
    out << "stages = " << c.privacy.stages << "\n";
    return out.str();
}

namespace {

std::string write_csv(const ExperimentConfig& c, const std::string& name,
                      const std::string& header,
                      const std::vector<std::string>& rows) {
    std::filesystem::create_directories(c.output_dir);
    const std::string path = (std::filesystem::path(c.output_dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << header << "\n";
    for (const auto& r : rows) out << r << "\n";
    return path;
}

std::string prob_line(const std::string& label, double p, double lo, double hi) {
    return label + " = " + fmt_csv(p) + "  (95% CI [" + fmt_csv(lo) + ", " +
           fmt_csv(hi) + "])";
}

Report run_kljn_exchange(const ExperimentConfig& c) {
    const std::size_t n = c.n_periods ? c.n_periods : 200;
    const auto stats = protocol::estimate_bit_error(c.kljn, n, c.master_seed);
    std::vector<std::string> rows{
        std::to_string(stats.n_periods) + "," + std::to_string(stats.n_kept) + "," +
        std::to_string(stats.n_errors) + "," + fmt_csv(stats.q) + "," +
        fmt_csv(stats.q_ci_low) + "," + fmt_csv(stats.q_ci_high)};
    const auto path = write_csv(c, "kljn_exchange.csv",
                                "n_periods,n_kept,n_errors,q,q_ci_low,q_ci_high", rows);
    std::ostringstream s;
    s << "kljn-exchange: " << stats.n_periods << " periods, " << stats.n_kept
      << " kept, " << stats.n_errors << " errors\n"
      << prob_line("bit error rate q", stats.q, stats.q_ci_low, stats.q_ci_high)
      << "\nkey bits: " << stats.key_bits.size() << "\n";
    return {s.str(), {path}};
}

std::string attack_csv_row(const attack::AttackStats& st, const attack::Calibration& cal) {
    return std::to_string(st.n_secure_bits) + "," + std::to_string(st.n_correct) +
           "," + fmt_csv(st.p) + "," + fmt_csv(st.ci_low) + "," + fmt_csv(st.ci_high) +
           "," + fmt_csv(cal.separation) + "," + fmt_csv(cal.threshold) + "," +
           fmt_csv(cal.training_error);
}

constexpr const char* kAttackHeader =
    "n_secure_bits,n_correct,p,ci_low,ci_high,separation,threshold,training_error";

Report run_attack_transient(const ExperimentConfig& c) {
    const std::size_t n = c.n_periods ? c.n_periods : 4600;
    const auto eve = attack::calibrate_transient_classifier(
        c.kljn, c.eve, c.n_training, derive_seed(c.master_seed, {0}));
    const auto st =
        attack::estimate_eve_success(c.kljn, eve, n, derive_seed(c.master_seed, {1}));
    const auto path = write_csv(c, "attack_transient.csv", kAttackHeader,
                                {attack_csv_row(st, eve.calibration)});
    std::ostringstream s;
    s << "attack-transient: " << st.n_secure_bits << " secure bits\n"
      << prob_line("Eve success p", st.p, st.ci_low, st.ci_high) << "\n"
      << "training separation = " << fmt_csv(eve.calibration.separation) << " sd\n";
    return {s.str(), {path}};
}

Report run_defend_rrrt(const ExperimentConfig& c) {
    const std::size_t n = c.n_periods ? c.n_periods : 6000;
    const auto eve = attack::calibrate_transient_classifier(
        c.rrrt, c.kljn.cable, c.eve, c.n_training, derive_seed(c.master_seed, {0}));
    const auto st = attack::estimate_eve_success(c.rrrt, c.kljn.cable, eve, n,
                                                 derive_seed(c.master_seed, {1}));
    const auto path = write_csv(c, "defend_rrrt.csv", kAttackHeader,
                                {attack_csv_row(st, eve.calibration)});
    std::ostringstream s;
    s << "defend-rrrt: " << st.n_secure_bits << " secure bits\n"
      << prob_line("Eve success p", st.p, st.ci_low, st.ci_high) << "\n"
      << "training separation = " << fmt_csv(eve.calibration.separation) << " sd\n";
    return {s.str(), {path}};
}

Report run_amplify(const ExperimentConfig& c) {
    const std::size_t n = c.n_trials ? c.n_trials : (std::size_t{1} << 20);
    if (n < (std::size_t{1} << c.privacy.stages))
        throw std::invalid_argument("amplify: n_trials shorter than 2^stages");
    Rng rng(derive_seed(c.master_seed, {0}));
    std::vector<int> truth(n), eve(n);
    for (std::size_t i = 0; i < n; ++i) {
        truth[i] = rng.coin() ? 1 : 0;
        eve[i] = rng.uniform01() < c.privacy.p0 ? truth[i] : 1 - truth[i];
    }
    std::vector<std::string> rows;
    std::ostringstream s;
    s << "amplify: " << n << " input bits, p0 = " << fmt_csv(c.privacy.p0) << "\n";
    std::vector<int> t = truth, e = eve;
    for (std::size_t stage = 0; stage <= c.privacy.stages; ++stage) {
        if (stage > 0) {
            t = privacy::xor_stage(t);
            e = privacy::xor_stage(e);
        }
        std::size_t correct = 0;
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t[i] == e[i]) ++correct;
        const double empirical = static_cast<double>(correct) /
                                 static_cast<double>(t.size());
        const double predicted = privacy::predicted_p_after_stages(c.privacy.p0, stage);
        const auto [eps, mi] = privacy::leak_metrics(predicted);
        const auto ci = wilson_interval(correct, t.size());
        rows.push_back(std::to_string(stage) + "," + std::to_string(t.size()) + "," +
                       fmt_csv(predicted) + "," + fmt_csv(empirical) + "," +
                       fmt_csv(ci.lo) + "," + fmt_csv(ci.hi) + "," + fmt_csv(eps) +
                       "," + fmt_csv(mi));
        s << "stage " << stage << ": len " << t.size() << ", "
          << prob_line("empirical p", empirical, ci.lo, ci.hi)
          << ", predicted = " << fmt_csv(predicted) << "\n";
    }
    const auto path = write_csv(
        c, "amplify.csv",
        "stage,length,predicted_p,empirical_p,ci_low,ci_high,epsilon,mutual_information",
        rows);
    s << "slowdown factor = " << (std::size_t{1} << c.privacy.stages) << "\n";
    return {s.str(), {path}};
}

Report run_continuity(const ExperimentConfig& c) {
    const std::size_t n = c.n_trials ? c.n_trials : 2000;
    const auto grid = attack::default_resistance_grid();
    std::vector<double> grid_with_zero = grid;
    grid_with_zero.insert(grid_with_zero.begin(), 0.0);

    std::vector<std::string> rows;
    std::ostringstream s;
    s << "continuity: " << n << " trials per grid point\n";
    struct Sweep {
        const char* label;
        attack::DcEveMode mode;
        bool noise;
        const std::vector<double>* grid;
    };
    // the voltage-only Eve is singular at R_E = 0, so her sweeps skip it
    const Sweep sweeps[] = {
        {"noiseless full", attack::DcEveMode::voltage_and_current, false,
         &grid_with_zero},
        {"noisy voltage-only", attack::DcEveMode::voltage_only, true, &grid},
        {"noisy full", attack::DcEveMode::voltage_and_current, true, &grid_with_zero},
    };
    for (std::size_t si = 0; si < 3; ++si) {
        attack::DcScenario sc = c.dc;
        sc.mode = sweeps[si].mode;
        sc.include_noise = sweeps[si].noise;
        const auto table = attack::run_continuity_experiment(
            *sweeps[si].grid, sc, n, derive_seed(c.master_seed, {si}));
        double p_min = 1.0, p_max = 0.0;
        for (const auto& r : table) {
            rows.push_back(
                fmt_csv(r.R_E) + "," +
                (r.mode == attack::DcEveMode::voltage_only ? "voltage_only"
                                                           : "voltage_and_current") +
                "," + (r.noise ? "true" : "false") + "," + std::to_string(r.n) + "," +
                fmt_csv(r.p) + "," + fmt_csv(r.ci_low) + "," + fmt_csv(r.ci_high) +
                "," + fmt_csv(r.est_std));
            p_min = std::min(p_min, r.p);
            p_max = std::max(p_max, r.p);
        }
        s << sweeps[si].label << ": p in [" << fmt_csv(p_min) << ", " << fmt_csv(p_max)
          << "] over " << sweeps[si].grid->size() << " grid points\n";
    }
    const auto path = write_csv(c, "continuity.csv",
                                "R_E,mode,noise,n,p,ci_lo,ci_hi,est_std", rows);
    return {s.str(), {path}};
}

Report run_psd_check(const ExperimentConfig& c) {
    const std::size_t n = c.n_trials ? c.n_trials : (std::size_t{1} << 17);
    const auto spec =
        signal::johnson_noise_spec(c.kljn.T_eff, c.kljn.R_L, c.kljn.bandwidth);
    const double dt = c.kljn.coarse_dt();
    const auto sig = signal::generate_band_limited_gaussian(
        spec, n, dt, derive_seed(c.master_seed, {0}));
    const auto psd = signal::estimate_psd(sig, 1024);
    std::vector<std::string> rows;
    for (const auto& [f, p] : psd) {
        if (f > 1.5 * c.kljn.bandwidth) break;
        const double theory = f <= c.kljn.bandwidth ? spec.spectral_density : 0.0;
        rows.push_back(fmt_csv(f) + "," + fmt_csv(p) + "," + fmt_csv(theory));
    }
    const auto path = write_csv(c, "psd_check.csv", "f,S_est,S_theory", rows);
    const double in_band = signal::mean_in_band(psd, 0.1 * c.kljn.bandwidth,
                                                0.9 * c.kljn.bandwidth);
    std::ostringstream s;
    s << "psd-check: " << n << " samples at dt = " << fmt_csv(dt) << "\n"
      << "in-band mean / target density = "
      << fmt_csv(in_band / spec.spectral_density) << "\n";
    return {s.str(), {path}};
}

Report run_scaling_demo(const ExperimentConfig& c) {
    const std::size_t n = c.n_trials ? c.n_trials : 256;
    const double C = 1e-5;
    const double window = 0.1 * c.kljn.R_L * C;
    std::vector<std::string> rows;
    std::vector<double> rates;
    for (int k = 0; k < 4; ++k) {
        const double R = c.kljn.R_L * std::pow(4.0, k);
        const double rate =
            circuit::charging_rate_demo(R, C, c.kljn.bandwidth, c.kljn.T_eff, window,
                                        0.0, n, derive_seed(c.master_seed, {0}));
        rates.push_back(rate);
        rows.push_back(fmt_csv(R) + "," + fmt_csv(rate));
    }
    const auto path = write_csv(c, "scaling_demo.csv", "R,mean_abs_rate", rows);
    std::ostringstream s;
    s << "scaling-demo: early |dU/dt| vs R (expected ~ 1/sqrt(R))\n";
    for (std::size_t k = 0; k + 1 < rates.size(); ++k)
        s << "rate(" << fmt_csv(c.kljn.R_L * std::pow(4.0, k)) << ") / rate("
          << fmt_csv(c.kljn.R_L * std::pow(4.0, k + 1))
          << ") = " << fmt_csv(rates[k] / rates[k + 1]) << " (expect 2)\n";
    return {s.str(), {path}};
}

}  // namespace

Report run_experiment(const ExperimentConfig& config) {
    config.validate();
    if (config.experiment == "kljn-exchange") return run_kljn_exchange(config);
    if (config.experiment == "attack-transient") return run_attack_transient(config);
    if (config.experiment == "defend-rrrt") return run_defend_rrrt(config);
    if (config.experiment == "amplify") return run_amplify(config);
    if (config.experiment == "continuity") return run_continuity(config);
    if (config.experiment == "psd-check") return run_psd_check(config);
    return run_scaling_demo(config);
}

}  // namespace kljn::harness
