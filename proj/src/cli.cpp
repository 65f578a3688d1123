#include "frpr/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace frpr::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
    throw ConfigError("config key '" + key + "': " + why);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) bad_key(key, "trailing characters in '" + value + "'");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        bad_key(key, "expected a number, got '" + value + "'");
    }
}

long parse_long(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) bad_key(key, "trailing characters in '" + value + "'");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        bad_key(key, "expected an integer, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_key(key, "expected true/false, got '" + value + "'");
}

Command parse_command(const std::string& value) {
    if (value == "simulate") return Command::simulate;
    if (value == "bifurcate") return Command::bifurcate;
    if (value == "stability-scan") return Command::stability_scan;
    if (value == "equilibrium") return Command::equilibrium;
    if (value == "spike-metrics") return Command::spike_metrics;
    bad_key("command", "unknown command '" + value + "'");
}

std::string command_name(Command c) {
    switch (c) {
        case Command::simulate: return "simulate";
        case Command::bifurcate: return "bifurcate";
        case Command::stability_scan: return "stability-scan";
        case Command::equilibrium: return "equilibrium";
        case Command::spike_metrics: return "spike-metrics";
    }
    return "simulate";
}

void apply_one(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "command") c.command = parse_command(value);
    else if (key == "alpha") c.alpha = parse_double(key, value);
    else if (key == "step-size") c.step_size = parse_double(key, value);
    else if (key == "t-end") c.t_end = parse_double(key, value);
    else if (key == "window") {
        const long w = parse_long(key, value);
        if (w < 0) bad_key(key, "must be >= 0");
        c.window = static_cast<std::size_t>(w);
    } else if (key == "corrector-iterations") c.corrector_iterations = static_cast<int>(parse_long(key, value));
    else if (key == "gates") {
        if (value == "smooth") c.gates = GateVariant::smooth;
        else if (value == "nonsmooth") c.gates = GateVariant::nonsmooth;
        else bad_key(key, "expected smooth|nonsmooth, got '" + value + "'");
    } else if (key == "preset") {
        if (value == "code") c.params = canonical_params();
        else if (value == "table") c.params = table_params();
        else bad_key(key, "expected code|table, got '" + value + "'");
        c.preset = value;
    } else if (key == "param") {
        if (value != "alpha" && value != "i-sapp" && value != "i-dapp")
            bad_key(key, "expected alpha|i-sapp|i-dapp, got '" + value + "'");
        c.param = value;
    } else if (key == "from") c.from = parse_double(key, value);
    else if (key == "to") c.to = parse_double(key, value);
    else if (key == "steps") c.steps = parse_long(key, value);
    else if (key == "increment") c.increment = parse_double(key, value);
    else if (key == "transient-cut") c.transient_cut = parse_double(key, value);
    else if (key == "threshold") {
        if (value == "auto") c.threshold_auto = true;
        else {
            c.threshold = parse_double(key, value);
            c.threshold_auto = false;
        }
    } else if (key == "warm-start") c.warm_start = parse_bool(key, value);
    else if (key == "with-currents") c.with_currents = parse_bool(key, value);
    else if (key == "threads") {
        const long t = parse_long(key, value);
        if (t < 1) bad_key(key, "must be >= 1");
        c.threads = static_cast<unsigned>(t);
    } else if (key == "output") c.output = value;
    else if (key == "g-leak") c.params.g_leak = parse_double(key, value);
    else if (key == "g-na") c.params.g_na = parse_double(key, value);
    else if (key == "g-kdr") c.params.g_kdr = parse_double(key, value);
    else if (key == "g-ca") c.params.g_ca = parse_double(key, value);
    else if (key == "g-kahp") c.params.g_kahp = parse_double(key, value);
    else if (key == "g-kc") c.params.g_kc = parse_double(key, value);
    else if (key == "v-na") c.params.v_na = parse_double(key, value);
    else if (key == "v-ca") c.params.v_ca = parse_double(key, value);
    else if (key == "v-k") c.params.v_k = parse_double(key, value);
    else if (key == "v-leak") c.params.v_leak = parse_double(key, value);
    else if (key == "p") c.params.p = parse_double(key, value);
    else if (key == "g-c") c.params.g_c = parse_double(key, value);
    else if (key == "i-sapp") c.params.i_sapp = parse_double(key, value);
    else if (key == "i-dapp") c.params.i_dapp = parse_double(key, value);
    else if (key == "i-syn") c.params.i_syn = parse_double(key, value);
    else if (key == "r-m") c.params.r_m = parse_double(key, value);
    else if (key == "tau-m") c.params.tau_m = parse_double(key, value);
    else if (key == "voltage-offset") c.params.voltage_offset = parse_double(key, value);
    else bad_key(key, "unknown key");
}

void validate(const RunConfig& c) {
    if (!(c.alpha > 0.0) || c.alpha > 1.0) bad_key("alpha", "must satisfy 0 < alpha <= 1");
    if (!(c.step_size > 0.0)) bad_key("step-size", "must be > 0");
    if (!(c.t_end > 0.0)) bad_key("t-end", "must be > 0");
    if (c.step_size > c.t_end) bad_key("step-size", "must not exceed t-end");
    if (c.window == 1) bad_key("window", "must be 0 (full) or >= 2");
    if (c.corrector_iterations < 1) bad_key("corrector-iterations", "must be >= 1");
    if (!c.params.valid()) bad_key("p", "invalid model parameters (conductances >= 0, 0 < p < 1)");
    if (c.command == Command::bifurcate) {
        if (c.steps < 1) bad_key("steps", "must be >= 1");
        if (c.steps > 1 && !(c.from < c.to)) bad_key("from", "must be < to");
        if (!(c.transient_cut < c.t_end)) bad_key("transient-cut", "must precede t-end");
        if (c.param == "alpha" && (c.from <= 0.0 || c.to > 1.0))
            bad_key("from", "alpha sweep must stay within (0, 1]");
    }
    if (c.command == Command::stability_scan) {
        if (c.param == "alpha") bad_key("param", "stability-scan expects i-sapp or i-dapp");
        if (!(c.increment > 0.0)) bad_key("increment", "must be > 0");
        if (!(c.from < c.to)) bad_key("from", "must be < to");
    }
    if (c.command == Command::spike_metrics && !(c.transient_cut < c.t_end))
        bad_key("transient-cut", "must precede t-end");
}

struct Output {
    std::ofstream file;
    std::ostream* stream;
    explicit Output(const std::string& path) {
        if (path.empty()) {
            stream = &std::cout;
        } else {
            file.open(path);
            if (!file) throw ComputeError("cannot open output file '" + path + "'");
            stream = &file;
        }
    }
    std::ostream& out() { return *stream; }
};

void write_manifest(const RunConfig& c, const std::string& status, const std::string& detail) {
    if (c.output.empty()) return;
    std::ofstream m(c.output + ".manifest");
    std::time_t now = std::time(nullptr);
    char stamp[64];
    std::strftime(stamp, sizeof stamp, "%FT%TZ", std::gmtime(&now));
    m << "# generated " << stamp << "\n";
    m << "command = " << command_name(c.command) << "\n";
    m << "status = " << status << "\n";
    if (!detail.empty()) m << detail << "\n";
}

SolverConfig solver_config(const RunConfig& c) {
    SolverConfig s;
    s.step_size = c.step_size;
    s.t_end = c.t_end;
    s.memory = c.window == 0 ? MemoryPolicy::full() : MemoryPolicy::window(c.window);
    s.corrector_iterations = c.corrector_iterations;
    return s;
}

int run_simulate(const RunConfig& c, std::ostream& diag) {
    const FractionalOrder alpha(c.alpha);
    Trajectory trajectory;
    try {
        trajectory = solve_caputo_abm(make_rhs(c.params, alpha, c.gates),
                                      canonical_initial_state().to_vector(), alpha, solver_config(c));
    } catch (const NonFiniteState& e) {
        write_manifest(c, "failed", "error = non-finite state at step " + std::to_string(e.step_index));
        diag << "simulate: diverged at step " << e.step_index << "\n";
        return 1;
    }
    Output out(c.output);
    out.out() << "t,Vs,Vd,h,n,s,c,q,Ca";
    if (c.with_currents) out.out() << ",ILeakS,INa,IKDR,ILeakD,ICa,IKCa,IKAHP,ISD";
    out.out() << "\n";
    for (Eigen::Index k = 0; k < trajectory.size(); ++k) {
        out.out() << format_double(trajectory.times[k]);
        for (Eigen::Index i = 0; i < 8; ++i) out.out() << ',' << format_double(trajectory.states(i, k));
        if (c.with_currents) {
            const CurrentBreakdown cb = currents(trajectory.states.col(k), c.params, c.gates);
            for (double v : {cb.i_leak_soma, cb.i_na, cb.i_kdr, cb.i_leak_dend, cb.i_ca, cb.i_kca,
                             cb.i_kahp, cb.i_sd})
                out.out() << ',' << format_double(v);
        }
        out.out() << "\n";
    }
    write_manifest(c, "ok", "");
    return 0;
}

int run_bifurcate(const RunConfig& c, std::ostream& diag) {
    std::vector<double> values(static_cast<std::size_t>(c.steps));
    if (c.steps == 1) {
        values[0] = c.from;
    } else {
        const double span = (c.to - c.from) / static_cast<double>(c.steps - 1);
        for (long i = 0; i < c.steps; ++i) values[static_cast<std::size_t>(i)] = c.from + span * i;
    }
    const SweepParameter parameter = c.param == "alpha" ? SweepParameter::alpha
                                     : c.param == "i-sapp" ? SweepParameter::i_sapp
                                                           : SweepParameter::i_dapp;
    const BifurcationScan scan =
        bifurcation_scan(parameter, values, c.params, FractionalOrder(c.alpha), solver_config(c),
                         c.transient_cut, canonical_initial_state(), c.gates, c.threads);

    Output out(c.output);
    out.out() << "param,peak_value\n";
    for (std::size_t i = 0; i < values.size(); ++i)
        for (double peak : scan.samples[i])
            out.out() << format_double(values[i]) << ',' << format_double(peak) << "\n";

    std::string failed_list;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (scan.failed[i]) failed_list += (failed_list.empty() ? "" : ",") + std::to_string(i);
    if (!failed_list.empty()) {
        write_manifest(c, "partial", "failed-cells = " + failed_list);
        diag << "bifurcate: " << std::count(scan.failed.begin(), scan.failed.end(), true)
             << " cell(s) diverged\n";
        return 1;
    }
    write_manifest(c, "ok", "");
    return 0;
}

int run_stability_scan(const RunConfig& c, std::ostream& diag) {
    const ScanParameter parameter =
        c.param == "i-sapp" ? ScanParameter::i_sapp : ScanParameter::i_dapp;
    const StableIntervalReport report = scan_stable_intervals(
        parameter, c.from, c.to, c.increment, c.params, FractionalOrder(c.alpha),
        canonical_initial_state().to_vector(), c.gates, c.warm_start);

    const double threshold = c.alpha * M_PI / 2.0;
    Output out(c.output);
    out.out() << "param,verdict,residual,min_arg,threshold\n";
    for (const ScanCell& cell : report.cells) {
        out.out() << format_double(cell.value) << ','
                  << (cell.stable ? "asymptotically_stable" : "unstable") << ','
                  << format_double(cell.residual) << ',' << format_double(cell.min_arg) << ','
                  << format_double(threshold) << "\n";
    }
    diag << "stability-scan " << report.parameter_name << " in [" << c.from << ", " << c.to
         << "], increment " << c.increment << ":\n";
    if (report.stable_intervals.empty()) diag << "  no stable interval\n";
    for (const auto& [a, b] : report.stable_intervals)
        diag << "  stable interval [" << format_double(a) << ", " << format_double(b) << "]\n";
    if (report.failed_cells > 0)
        diag << "  " << report.failed_cells << " cell(s) without converged equilibrium\n";
    write_manifest(c, "ok",
                   report.failed_cells > 0
                       ? "non-converged-cells = " + std::to_string(report.failed_cells)
                       : "");
    return 0;
}

int run_equilibrium(const RunConfig& c, std::ostream& diag) {
    const EquilibriumReport report = equilibrium_report(
        c.params, FractionalOrder(c.alpha), canonical_initial_state().to_vector(), c.gates);
    Output out(c.output);
    out.out() << "component,value\n";
    const char* names[8] = {"Vs", "Vd", "h", "n", "s", "c", "q", "Ca"};
    for (int i = 0; i < 8; ++i)
        out.out() << names[i] << ',' << format_double(report.point[i]) << "\n";
    out.out() << "residual," << format_double(report.residual_norm) << "\n";
    out.out() << "verdict," << (report.verdict == StabilityVerdict::asymptotically_stable
                                    ? "asymptotically_stable"
                                    : "unstable")
              << "\n";
    out.out() << "eig_re,eig_im\n";
    for (int i = 0; i < 8; ++i)
        out.out() << format_double(report.spectrum[i].real()) << ','
                  << format_double(report.spectrum[i].imag()) << "\n";
    if (!report.converged) {
        write_manifest(c, "partial", "error = equilibrium solve did not converge");
        diag << "equilibrium: no convergence (best residual " << report.residual_norm << ")\n";
        return 1;
    }
    write_manifest(c, "ok", "");
    return 0;
}

int run_spike_metrics(const RunConfig& c, std::ostream& diag) {
    const FractionalOrder alpha(c.alpha);
    Trajectory trajectory;
    try {
        trajectory = solve_caputo_abm(make_rhs(c.params, alpha, c.gates),
                                      canonical_initial_state().to_vector(), alpha, solver_config(c));
    } catch (const NonFiniteState& e) {
        write_manifest(c, "failed", "error = non-finite state at step " + std::to_string(e.step_index));
        diag << "spike-metrics: diverged at step " << e.step_index << "\n";
        return 1;
    }
    const double threshold = c.threshold_auto
                                 ? default_peak_threshold(trajectory, idx::v_soma, c.transient_cut)
                                 : c.threshold;
    SpikeTrain all = detect_peaks(trajectory, idx::v_soma, threshold);
    SpikeTrain spikes;  // post-transient view
    for (std::size_t i = 0; i < all.peak_times.size(); ++i) {
        if (all.peak_times[i] < c.transient_cut) continue;
        spikes.peak_times.push_back(all.peak_times[i]);
        spikes.peak_values.push_back(all.peak_values[i]);
    }
    for (std::size_t i = 1; i < spikes.peak_times.size(); ++i)
        spikes.isi.push_back(spikes.peak_times[i] - spikes.peak_times[i - 1]);
    spikes.refractory_estimate = all.refractory_estimate;

    double mean_isi = 0.0, cv = 0.0;
    if (!spikes.isi.empty()) {
        for (double v : spikes.isi) mean_isi += v;
        mean_isi /= static_cast<double>(spikes.isi.size());
        double var = 0.0;
        for (double v : spikes.isi) var += (v - mean_isi) * (v - mean_isi);
        cv = std::sqrt(var / static_cast<double>(spikes.isi.size())) / mean_isi;
    }
    const IsiModes modes = split_isi_modes(spikes.isi);

    Output out(c.output);
    out.out() << "metric,value\n";
    out.out() << "threshold," << format_double(threshold) << "\n";
    out.out() << "spike_count," << spikes.peak_times.size() << "\n";
    out.out() << "mean_isi," << format_double(mean_isi) << "\n";
    out.out() << "isi_cv," << format_double(cv) << "\n";
    out.out() << "isi_mode_low," << format_double(modes.bimodal ? modes.low_mean : 0.0) << "\n";
    out.out() << "isi_mode_high," << format_double(modes.bimodal ? modes.high_mean : 0.0) << "\n";
    out.out() << "refractory_estimate,"
              << format_double(spikes.refractory_estimate.value_or(0.0)) << "\n";
    write_manifest(c, "ok", "");
    return 0;
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::map<std::string, std::string> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string text = trim(line);
        if (text.empty()) continue;
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config file line " + std::to_string(line_no) + ": expected key = value");
        entries[trim(text.substr(0, eq))] = trim(text.substr(eq + 1));
    }
    return entries;
}

void apply_overrides(RunConfig& config, const std::map<std::string, std::string>& overrides) {
    // preset resets the whole parameter block, so it must precede overrides
    if (auto it = overrides.find("preset"); it != overrides.end())
        apply_one(config, "preset", it->second);
    for (const auto& [key, value] : overrides) {
        if (key == "preset") continue;
        apply_one(config, key, value);
    }
    validate(config);
}

std::string emit_config(const RunConfig& c) {
    std::ostringstream out;
    out << "command = " << command_name(c.command) << "\n";
    out << "alpha = " << format_double(c.alpha) << "\n";
    out << "step-size = " << format_double(c.step_size) << "\n";
    out << "t-end = " << format_double(c.t_end) << "\n";
    out << "window = " << c.window << "\n";
    out << "corrector-iterations = " << c.corrector_iterations << "\n";
    out << "gates = " << (c.gates == GateVariant::smooth ? "smooth" : "nonsmooth") << "\n";
    out << "preset = " << c.preset << "\n";
    out << "param = " << c.param << "\n";
    out << "from = " << format_double(c.from) << "\n";
    out << "to = " << format_double(c.to) << "\n";
    out << "steps = " << c.steps << "\n";
    out << "increment = " << format_double(c.increment) << "\n";
    out << "transient-cut = " << format_double(c.transient_cut) << "\n";
    out << "threshold = " << (c.threshold_auto ? std::string("auto") : format_double(c.threshold))
        << "\n";
    out << "warm-start = " << (c.warm_start ? "true" : "false") << "\n";
    out << "with-currents = " << (c.with_currents ? "true" : "false") << "\n";
    out << "threads = " << c.threads << "\n";
    out << "output = " << c.output << "\n";
    const NeuronParams& p = c.params;
    out << "g-leak = " << format_double(p.g_leak) << "\n";
    out << "g-na = " << format_double(p.g_na) << "\n";
    out << "g-kdr = " << format_double(p.g_kdr) << "\n";
    out << "g-ca = " << format_double(p.g_ca) << "\n";
    out << "g-kahp = " << format_double(p.g_kahp) << "\n";
    out << "g-kc = " << format_double(p.g_kc) << "\n";
    out << "v-na = " << format_double(p.v_na) << "\n";
    out << "v-ca = " << format_double(p.v_ca) << "\n";
    out << "v-k = " << format_double(p.v_k) << "\n";
    out << "v-leak = " << format_double(p.v_leak) << "\n";
    out << "p = " << format_double(p.p) << "\n";
    out << "g-c = " << format_double(p.g_c) << "\n";
    out << "i-sapp = " << format_double(p.i_sapp) << "\n";
    out << "i-dapp = " << format_double(p.i_dapp) << "\n";
    out << "i-syn = " << format_double(p.i_syn) << "\n";
    out << "r-m = " << format_double(p.r_m) << "\n";
    out << "tau-m = " << format_double(p.tau_m) << "\n";
    out << "voltage-offset = " << format_double(p.voltage_offset) << "\n";
    return out.str();
}

int run(const RunConfig& config, std::ostream& diagnostics) {
    switch (config.command) {
        case Command::simulate: return run_simulate(config, diagnostics);
        case Command::bifurcate: return run_bifurcate(config, diagnostics);
        case Command::stability_scan: return run_stability_scan(config, diagnostics);
        case Command::equilibrium: return run_equilibrium(config, diagnostics);
        case Command::spike_metrics: return run_spike_metrics(config, diagnostics);
    }
    return 0;
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

unsigned threads_from_environment() {
    if (const char* env = std::getenv("FRPR_THREADS")) {
        const long v = std::atol(env);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    return 1;
}

}  // namespace frpr::cli
