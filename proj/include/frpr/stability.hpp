#pragma once

#include "frpr/pinsky_rinzel.hpp"

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace frpr {

class NoConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class StabilityVerdict { asymptotically_stable, unstable };

struct EquilibriumSolve {
    Vec8 point = Vec8::Zero();
    double residual_inf = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
};

struct EquilibriumReport {
    Vec8 point;
    double residual_norm;
    Mat8 jacobian;
    Eigen::Matrix<std::complex<double>, 8, 1> spectrum;
    StabilityVerdict verdict;
    double alpha;
    bool converged;
};

/// Damped Newton (2-norm merit line search with step halving, at most 200
/// iterations) on the full 8-equation vector field; the equilibrium location
/// does not depend on alpha. If Newton stalls on a fold, a deterministic
/// gate-elimination sweep over V_s supplies root candidates, the one nearest
/// the seed is polished.
EquilibriumSolve find_equilibrium(const NeuronParams& params, FractionalOrder alpha, const Vec8& seed,
                                  GateVariant gates = GateVariant::smooth);

/// Central-difference Jacobian of a generic vector field, step
/// delta_i = max(1e-6, 1e-6 |x_i|).
Eigen::MatrixXd numerical_jacobian(const RhsFunction& f, const Eigen::VectorXd& x);

/// Jacobian of the neuron vector field at `state`.
Mat8 numerical_jacobian(const NeuronParams& params, const Vec8& state, FractionalOrder alpha,
                        GateVariant gates = GateVariant::smooth);

/// Dense nonsymmetric spectrum with the residual guarantee
/// |J v - lambda v| <= 1e-8 |J| per eigenpair; throws NoConvergence otherwise.
Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& matrix);

/// Smallest |arg(lambda)| over the spectrum; arg of 0 counts as 0.
double min_abs_arg(const Eigen::VectorXcd& spectrum);

/// Matignon criterion: asymptotically stable iff |arg(lambda)| > alpha*pi/2
/// strictly for every eigenvalue.
StabilityVerdict matignon_test(const Eigen::VectorXcd& spectrum, FractionalOrder alpha);

/// find_equilibrium + Jacobian + spectrum + Matignon verdict in one report.
EquilibriumReport equilibrium_report(const NeuronParams& params, FractionalOrder alpha,
                                     const Vec8& seed, GateVariant gates = GateVariant::smooth);

enum class ScanParameter { i_sapp, i_dapp };

struct ScanCell {
    double value = 0.0;
    bool converged = false;
    double residual = std::numeric_limits<double>::infinity();
    double min_arg = 0.0;
    bool stable = false;
};

struct StableIntervalReport {
    std::string parameter_name;
    double lo = 0.0;
    double hi = 0.0;
    double increment = 0.0;
    std::vector<std::pair<double, double>> stable_intervals;
    std::vector<ScanCell> cells;
    std::size_t failed_cells = 0;
};

/// Grid scan of an injection current; each cell seeds Newton from the
/// previous converged solution (else the canonical seed), applies the
/// Matignon test, and maximal stable runs become intervals. Non-converged
/// cells count as unstable.
StableIntervalReport scan_stable_intervals(ScanParameter parameter, double lo, double hi,
                                           double increment, const NeuronParams& base_params,
                                           FractionalOrder alpha, const Vec8& seed,
                                           GateVariant gates = GateVariant::smooth,
                                           bool warm_start = true);

}  // namespace frpr
