#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace frpr {

/// Caputo derivative order, restricted to 0 < alpha <= 1.
class FractionalOrder {
public:
    explicit FractionalOrder(double alpha) : alpha_(alpha) {
        if (!(alpha > 0.0) || alpha > 1.0) {
            throw std::invalid_argument("FractionalOrder: alpha must satisfy 0 < alpha <= 1, got " +
                                        std::to_string(alpha));
        }
    }
    double value() const { return alpha_; }

private:
    double alpha_;
};

/// History handling for the fractional solver. A window of L grid points
/// moves the Caputo lower terminal to the window start (short-memory
/// principle); window_points == 0 keeps the full history.
struct MemoryPolicy {
    std::size_t window_points = 0;

    static MemoryPolicy full() { return {0}; }
    static MemoryPolicy window(std::size_t points) { return {points}; }
    bool is_full() const { return window_points == 0; }
};

struct SolverConfig {
    double step_size = 0.05;  // ms
    double t_end = 1000.0;    // ms
    MemoryPolicy memory = MemoryPolicy::full();
    int corrector_iterations = 1;
};

/// Uniform-grid solution. Column k of `states` is the state at times[k].
struct Trajectory {
    Eigen::VectorXd times;
    Eigen::MatrixXd states;
    double alpha = 1.0;
    double step_size = 0.0;

    Eigen::Index size() const { return times.size(); }
    double t_end() const { return times.size() > 0 ? times[times.size() - 1] : 0.0; }
};

/// Pure vector field: writes f(t, y) into dydt (same dimension as y).
using RhsFunction = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;

/// Thrown when integration produces NaN/inf; signals divergence, not a bug.
class NonFiniteState : public std::runtime_error {
public:
    explicit NonFiniteState(std::size_t step)
        : std::runtime_error("non-finite state at step " + std::to_string(step)), step_index(step) {}
    std::size_t step_index;
};

class ConvergenceFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adams-Bashforth weights b_{j,n+1} = (n+1-j)^a - (n-j)^a, j = 0..n.
Eigen::VectorXd predictor_weights(FractionalOrder alpha, Eigen::Index n);

/// Adams-Moulton weights a_{j,n+1}: a_0 = n^{a+1} - (n-a)(n+1)^a and
/// a_j = (n-j+2)^{a+1} + (n-j)^{a+1} - 2(n-j+1)^{a+1} for 1 <= j <= n.
Eigen::VectorXd corrector_weights(FractionalOrder alpha, Eigen::Index n);

/// Predictor-corrector Adams-Bashforth-Moulton integration of
/// D^alpha y = f(t, y), y(0) = y0, on the uniform grid of `config`.
Trajectory solve_caputo_abm(const RhsFunction& rhs, const Eigen::VectorXd& y0, FractionalOrder alpha,
                            const SolverConfig& config);

/// Classical fixed-step RK4 on the same grid; cross-check for alpha = 1.
Trajectory solve_classical_reference(const RhsFunction& rhs, const Eigen::VectorXd& y0,
                                     const SolverConfig& config);

/// One-parameter Mittag-Leffler function E_alpha(z) by power series with
/// term-ratio stopping at relative 1e-14.
double mittag_leffler(FractionalOrder alpha, double z);

}  // namespace frpr
