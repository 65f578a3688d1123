#include "frpr/fde_solver.hpp"

#include <cmath>

namespace frpr {

namespace {

void validate(const SolverConfig& config) {
    if (!(config.step_size > 0.0)) throw std::invalid_argument("SolverConfig: step_size must be > 0");
    if (!(config.t_end > 0.0)) throw std::invalid_argument("SolverConfig: t_end must be > 0");
    if (config.step_size > config.t_end)
        throw std::invalid_argument("SolverConfig: step_size must not exceed t_end");
    if (config.corrector_iterations < 1)
        throw std::invalid_argument("SolverConfig: corrector_iterations must be >= 1");
    if (!config.memory.is_full() && config.memory.window_points < 2)
        throw std::invalid_argument("SolverConfig: memory window must span at least 2 grid points");
}

Eigen::Index grid_steps(const SolverConfig& config) {
    return static_cast<Eigen::Index>(std::ceil(config.t_end / config.step_size - 1e-9));
}

Eigen::VectorXd uniform_grid(double h, Eigen::Index n_steps) {
    Eigen::VectorXd t(n_steps + 1);
    for (Eigen::Index k = 0; k <= n_steps; ++k) t[k] = static_cast<double>(k) * h;
    return t;
}

// Weight of the window-start node in the corrector sum, n_local steps in.
double corrector_anchor_weight(double alpha, double n_local) {
    return std::pow(n_local, alpha + 1.0) - (n_local - alpha) * std::pow(n_local + 1.0, alpha);
}

}  // namespace

Eigen::VectorXd predictor_weights(FractionalOrder alpha, Eigen::Index n) {
    const double a = alpha.value();
    Eigen::VectorXd b(n + 1);
    for (Eigen::Index j = 0; j <= n; ++j) {
        const double k = static_cast<double>(n - j);
        b[j] = std::pow(k + 1.0, a) - std::pow(k, a);
    }
    return b;
}

Eigen::VectorXd corrector_weights(FractionalOrder alpha, Eigen::Index n) {
    const double a = alpha.value();
    Eigen::VectorXd w(n + 1);
    w[0] = corrector_anchor_weight(a, static_cast<double>(n));
    for (Eigen::Index j = 1; j <= n; ++j) {
        const double k = static_cast<double>(n - j);
        w[j] = std::pow(k + 2.0, a + 1.0) + std::pow(k, a + 1.0) - 2.0 * std::pow(k + 1.0, a + 1.0);
    }
    return w;
}

Trajectory solve_caputo_abm(const RhsFunction& rhs, const Eigen::VectorXd& y0, FractionalOrder alpha,
                            const SolverConfig& config) {
    validate(config);
    const double a = alpha.value();
    const double h = config.step_size;
    const Eigen::Index n_steps = grid_steps(config);
    const Eigen::Index dim = y0.size();

    Trajectory out;
    out.alpha = a;
    out.step_size = h;
    out.times = uniform_grid(h, n_steps);
    out.states.resize(dim, n_steps + 1);
    out.states.col(0) = y0;
    if (!y0.allFinite()) throw NonFiniteState(0);

    // Lag-indexed kernels shared by every step: predictor c[k] = b_{n-k,n+1},
    // corrector interior d[k] = a_{n-k,n+1} (k = lag n - j).
    Eigen::VectorXd kernel_pred(n_steps), kernel_corr(n_steps);
    for (Eigen::Index k = 0; k < n_steps; ++k) {
        const double kk = static_cast<double>(k);
        kernel_pred[k] = std::pow(kk + 1.0, a) - std::pow(kk, a);
        kernel_corr[k] = std::pow(kk + 2.0, a + 1.0) + std::pow(kk, a + 1.0) -
                         2.0 * std::pow(kk + 1.0, a + 1.0);
    }
    const double ha_pred = std::pow(h, a) / std::tgamma(a + 1.0);
    const double ha_corr = std::pow(h, a) / std::tgamma(a + 2.0);

    Eigen::MatrixXd history(dim, n_steps + 1);  // f(t_j, y_j)
    Eigen::VectorXd f_scratch(dim);
    rhs(0.0, y0, f_scratch);
    if (!f_scratch.allFinite()) throw NonFiniteState(0);
    history.col(0) = f_scratch;

    Eigen::Matrix<double, Eigen::Dynamic, 2> weights(n_steps + 1, 2);
    Eigen::Matrix<double, Eigen::Dynamic, 2> sums(dim, 2);
    Eigen::VectorXd y_cur(dim);

    const std::size_t window = config.memory.window_points;
    for (Eigen::Index n = 0; n < n_steps; ++n) {
        Eigen::Index j0 = 0;
        if (window > 0) {
            const Eigen::Index lo = n + 1 - static_cast<Eigen::Index>(window);
            if (lo > 0) j0 = lo;
        }
        const Eigen::Index m = n + 1 - j0;  // history nodes in the sums
        const double n_local = static_cast<double>(n - j0);

        weights.col(0).head(m) = kernel_pred.head(m).reverse();
        weights.col(1).head(m) = kernel_corr.head(m).reverse();
        weights(0, 1) = corrector_anchor_weight(a, n_local);

        sums.noalias() = history.middleCols(j0, m) * weights.topRows(m);

        const auto anchor = out.states.col(j0);
        const double t_next = out.times[n + 1];
        y_cur = anchor + ha_pred * sums.col(0);
        for (int it = 0; it < config.corrector_iterations; ++it) {
            if (!y_cur.allFinite()) throw NonFiniteState(static_cast<std::size_t>(n + 1));
            rhs(t_next, y_cur, f_scratch);
            y_cur = anchor + ha_corr * (f_scratch + sums.col(1));
        }
        if (!y_cur.allFinite()) throw NonFiniteState(static_cast<std::size_t>(n + 1));
        out.states.col(n + 1) = y_cur;
        rhs(t_next, y_cur, f_scratch);
        if (!f_scratch.allFinite()) throw NonFiniteState(static_cast<std::size_t>(n + 1));
        history.col(n + 1) = f_scratch;
    }
    return out;
}

Trajectory solve_classical_reference(const RhsFunction& rhs, const Eigen::VectorXd& y0,
                                     const SolverConfig& config) {
    validate(config);
    const double h = config.step_size;
    const Eigen::Index n_steps = grid_steps(config);
    const Eigen::Index dim = y0.size();

    Trajectory out;
    out.alpha = 1.0;
    out.step_size = h;
    out.times = uniform_grid(h, n_steps);
    out.states.resize(dim, n_steps + 1);
    out.states.col(0) = y0;
    if (!y0.allFinite()) throw NonFiniteState(0);

    Eigen::VectorXd k1(dim), k2(dim), k3(dim), k4(dim), y(dim);
    for (Eigen::Index n = 0; n < n_steps; ++n) {
        const double t = out.times[n];
        y = out.states.col(n);
        rhs(t, y, k1);
        rhs(t + 0.5 * h, y + 0.5 * h * k1, k2);
        rhs(t + 0.5 * h, y + 0.5 * h * k2, k3);
        rhs(t + h, y + h * k3, k4);
        out.states.col(n + 1) = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!out.states.col(n + 1).allFinite()) throw NonFiniteState(static_cast<std::size_t>(n + 1));
    }
    return out;
}

double mittag_leffler(FractionalOrder alpha, double z) {
    if (z == 0.0) return 1.0;
    const double a = alpha.value();
    const double log_abs_z = std::log(std::abs(z));
    const bool negative = z < 0.0;
    double sum = 0.0;
    for (int k = 0; k < 10000; ++k) {
        double term = std::exp(static_cast<double>(k) * log_abs_z - std::lgamma(a * k + 1.0));
        if (!std::isfinite(term))
            throw ConvergenceFailure("mittag_leffler: term overflow at k = " + std::to_string(k));
        if (negative && (k % 2 == 1)) term = -term;
        sum += term;
        if (k > 2 && std::abs(term) <= 1e-14 * std::abs(sum)) return sum;
    }
    throw ConvergenceFailure("mittag_leffler: series did not converge within 10000 terms");
}

}  // namespace frpr
