#pragma once

#include "frpr/fde_solver.hpp"
#include "frpr/pinsky_rinzel.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace frpr {

class InsufficientSpikes : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SpikeTrain {
    std::vector<double> peak_times;   // ms, strictly increasing
    std::vector<double> peak_values;  // mV
    std::vector<double> isi;          // ms, successive differences
    std::optional<double> refractory_estimate;  // ms
};

/// Local maxima y[i-1] < y[i] >= y[i+1] at or above `threshold`, with
/// parabolic sub-step refinement of peak time and value.
SpikeTrain detect_peaks(const Trajectory& trajectory, Eigen::Index component, double threshold);

/// Default detection threshold: 10 mV above the post-cut mean of the component.
double default_peak_threshold(const Trajectory& trajectory, Eigen::Index component,
                              double transient_cut);

struct TransientEstimate {
    double t_transient = 0.0;
    std::string method;
};

/// Smallest window start t such that (mean, amplitude) statistics over
/// [t, t+window] agree with every later window within `tolerance` of the
/// trace's global amplitude. Falls back to t_end/2 with a "not-converged"
/// tag when no window qualifies.
TransientEstimate estimate_transient(const Trajectory& trajectory, Eigen::Index component,
                                     double window, double tolerance);

struct Periodicity {
    bool periodic = false;
    double period = 0.0;  // mean ISI when periodic
    double isi_cv = 0.0;
};

/// Periodic iff the ISI coefficient of variation is below rel_tol.
/// Requires at least 5 ISIs; throws InsufficientSpikes otherwise.
Periodicity periodicity_test(const SpikeTrain& spikes, double rel_tol);

/// Post-t_min samples projected to the (V_s, V_d) plane.
std::vector<std::pair<double, double>> attractor_section(const Trajectory& trajectory, double t_min);

enum class SweepParameter { alpha, i_sapp, i_dapp };

struct BifurcationScan {
    std::string parameter_name;
    std::vector<double> parameter_values;
    std::vector<std::vector<double>> samples;  // post-transient V_s peak values per cell
    std::vector<bool> failed;                  // integration diverged (NonFiniteState)
};

/// Independent trajectory per parameter value (restart from `initial`, no
/// continuation); cells may run on `threads` workers, results are aggregated
/// by cell index so the output does not depend on scheduling.
BifurcationScan bifurcation_scan(SweepParameter parameter, const std::vector<double>& values,
                                 const NeuronParams& base_params, FractionalOrder base_alpha,
                                 const SolverConfig& solver, double transient_cut,
                                 const NeuronState& initial, GateVariant gates = GateVariant::smooth,
                                 unsigned threads = 1);

/// Number of distinct values after rounding to multiples of bin_width.
int distinct_value_count(const std::vector<double>& values, double bin_width);

struct IsiModes {
    double low_mean = 0.0;   // fast (intra-burst) mode
    double high_mean = 0.0;  // slow (inter-burst) mode
    bool bimodal = false;
};

/// Splits sorted ISIs at the largest multiplicative gap.
IsiModes split_isi_modes(const std::vector<double>& isi);

}  // namespace frpr
