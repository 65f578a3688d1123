#pragma once

#include "frpr/analysis.hpp"
#include "frpr/pinsky_rinzel.hpp"
#include "frpr/stability.hpp"

#include <iosfwd>
#include <map>
#include <string>

namespace frpr::cli {

/// Invalid configuration; the message names the offending key. Exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Computation failed after configuration was accepted. Exit code 1; partial
/// outputs stay on disk with a manifest noting what failed.
class ComputeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Command { simulate, bifurcate, stability_scan, equilibrium, spike_metrics };

struct RunConfig {
    Command command = Command::simulate;
    double alpha = 0.95;

    // solver
    double step_size = 0.05;
    double t_end = 1000.0;
    std::size_t window = 0;  // grid points; 0 = full memory
    int corrector_iterations = 1;
    GateVariant gates = GateVariant::smooth;
    std::string preset = "code";  // code | table
    NeuronParams params = canonical_params();

    // sweep / scan
    std::string param = "alpha";  // alpha | i-sapp | i-dapp
    double from = 0.7;
    double to = 1.0;
    long steps = 100;          // bifurcate cells
    double increment = 0.001;  // stability-scan grid
    double transient_cut = 500.0;
    double threshold = 0.0;  // spike threshold; used when threshold_auto is false
    bool threshold_auto = true;
    bool warm_start = true;

    bool with_currents = false;
    unsigned threads = 1;
    std::string output;  // empty = stdout (no manifest)

    bool operator==(const RunConfig&) const = default;
};

/// Key=value text, '#' comments, one pair per line.
std::map<std::string, std::string> parse_config_file(const std::string& path);

/// Applies overrides in key order: preset first, then everything else.
/// Unknown keys, malformed values and violated invariants raise ConfigError
/// naming the key.
void apply_overrides(RunConfig& config, const std::map<std::string, std::string>& overrides);

/// Full key=value rendering; parsing it back reproduces `config` exactly.
std::string emit_config(const RunConfig& config);

/// Executes the configured command. Returns the process exit code
/// (0 ok, 1 compute failure with partial outputs preserved).
int run(const RunConfig& config, std::ostream& diagnostics);

/// 17-significant-digit round-trip-safe float rendering used in all CSVs.
std::string format_double(double value);

unsigned threads_from_environment();

}  // namespace frpr::cli
