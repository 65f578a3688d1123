#include "frpr/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <string>

namespace {

using frpr::cli::RunConfig;

struct CliState {
    std::string config_path;
    std::string emit_path;
    std::map<std::string, std::string> overrides;
};

void add_common_options(CLI::App* cmd, CliState& state) {
    auto bind = [cmd, &state](const std::string& key, const std::string& desc) {
        cmd->add_option_function<std::string>(
            "--" + key, [&state, key](const std::string& v) { state.overrides[key] = v; }, desc);
    };
    bind("alpha", "Caputo derivative order, 0 < alpha <= 1");
    bind("step", "solver step size [ms]");
    bind("t-end", "integration end time [ms]");
    bind("window", "memory window in grid points (0 = full history)");
    bind("corrector-iterations", "corrector sweeps per step");
    bind("gates", "rate-function variant: smooth|nonsmooth");
    bind("preset", "parameter preset: code|table");
    bind("param", "swept parameter: alpha|i-sapp|i-dapp");
    bind("from", "sweep lower bound");
    bind("to", "sweep upper bound");
    bind("steps", "number of sweep cells");
    bind("increment", "stability scan increment");
    bind("transient-cut", "discard samples before this time [ms]");
    bind("threshold", "spike threshold [mV] or 'auto'");
    bind("warm-start", "seed scan cells from the previous solution: true|false");
    bind("with-currents", "append per-step current columns: true|false");
    bind("threads", "parallel scan workers");
    bind("i-sapp", "somatic injection [uA/cm^2]");
    bind("i-dapp", "dendritic injection [uA/cm^2]");
    bind("output", "output CSV path (default stdout)");
    cmd->add_option_function<std::vector<std::string>>(
        "--set",
        [&state](const std::vector<std::string>& pairs) {
            for (const std::string& pair : pairs) {
                const std::size_t eq = pair.find('=');
                if (eq == std::string::npos)
                    throw CLI::ValidationError("--set expects key=value, got '" + pair + "'");
                state.overrides[pair.substr(0, eq)] = pair.substr(eq + 1);
            }
        },
        "override any config key (key=value, repeatable)");
    cmd->add_option("--config", state.config_path, "key=value config file; flags take precedence");
    cmd->add_option("--emit-config", state.emit_path, "write the resolved configuration here");
}

// step -> step-size alias keeps the flag short while the config key stays explicit
void canonicalize(std::map<std::string, std::string>& overrides) {
    if (auto it = overrides.find("step"); it != overrides.end()) {
        overrides["step-size"] = it->second;
        overrides.erase(it);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractional-order Pinsky-Rinzel neuron toolkit"};
    app.require_subcommand(1);

    CliState state;
    const char* names[5] = {"simulate", "bifurcate", "stability-scan", "equilibrium",
                            "spike-metrics"};
    const char* descriptions[5] = {
        "integrate the model and emit a trajectory CSV",
        "sweep a parameter and emit post-transient V_s peak values",
        "scan an injection current for Matignon-stable equilibria",
        "locate an equilibrium and report its spectrum and verdict",
        "spike train statistics of a single run"};
    for (int i = 0; i < 5; ++i) {
        CLI::App* cmd = app.add_subcommand(names[i], descriptions[i]);
        add_common_options(cmd, state);
        cmd->callback([&state, name = std::string(names[i])] { state.overrides["command"] = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RunConfig config;
        config.threads = frpr::cli::threads_from_environment();
        if (!state.config_path.empty())
            frpr::cli::apply_overrides(config, frpr::cli::parse_config_file(state.config_path));
        canonicalize(state.overrides);
        frpr::cli::apply_overrides(config, state.overrides);
        if (!state.emit_path.empty()) {
            std::ofstream out(state.emit_path);
            out << frpr::cli::emit_config(config);
        }
        return frpr::cli::run(config, std::cerr);
    } catch (const frpr::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const frpr::cli::ComputeError& e) {
        std::cerr << "compute error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
