#include "frpr/stability.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace frpr {

namespace {

constexpr double kResidualTol = 1e-10;
constexpr int kMaxIterations = 200;
constexpr double kStepCap = 50.0;

Vec8 system_rhs(const NeuronParams& params, FractionalOrder alpha, GateVariant gates, const Vec8& x) {
    return rhs(0.0, x, params, alpha, gates);
}

EquilibriumSolve damped_newton(const NeuronParams& params, FractionalOrder alpha, GateVariant gates,
                               const Vec8& seed, int max_iterations) {
    EquilibriumSolve out;
    out.point = seed;
    Vec8 f = system_rhs(params, alpha, gates, out.point);
    if (!f.allFinite()) return out;
    out.residual_inf = f.lpNorm<Eigen::Infinity>();

    for (int it = 0; it < max_iterations; ++it) {
        out.iterations = it;
        if (out.residual_inf < kResidualTol) {
            out.converged = true;
            return out;
        }
        const Mat8 jac = numerical_jacobian(params, out.point, alpha, gates);
        Vec8 step = jac.partialPivLu().solve(f);
        if (!step.allFinite()) return out;
        const double step_norm = step.lpNorm<Eigen::Infinity>();
        if (step_norm > kStepCap) step *= kStepCap / step_norm;

        const double merit = f.squaredNorm();
        double lambda = 1.0;
        bool advanced = false;
        while (lambda > 1e-14) {
            const Vec8 trial = out.point - lambda * step;
            const Vec8 f_trial = system_rhs(params, alpha, gates, trial);
            if (f_trial.allFinite() && f_trial.squaredNorm() < merit) {
                out.point = trial;
                f = f_trial;
                out.residual_inf = f.lpNorm<Eigen::Infinity>();
                advanced = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!advanced) return out;  // stalled (fold or local merit minimum)
    }
    out.converged = out.residual_inf < kResidualTol;
    return out;
}

// Exact gate/calcium elimination at equilibrium: every state component is a
// closed-form function of (V_s, V_d), and the somatic equation is linear in
// V_d. This reduces the fixed-point condition to one scalar equation in V_s.
Vec8 assemble_from_voltages(double v_s, double v_d, const NeuronParams& params, GateVariant gates) {
    Vec8 x;
    x[idx::v_soma] = v_s;
    x[idx::v_dend] = v_d;
    x[idx::h] = gate_steady_and_tau(Gate::h, v_s, params).steady;
    x[idx::n] = gate_steady_and_tau(Gate::n, v_s, params).steady;
    const double s = gate_steady_and_tau(Gate::s, v_d, params).steady;
    x[idx::s] = s;
    const double i_ca = params.g_ca * s * s * (v_d - params.v_ca);
    const double ca = -0.13 * i_ca / 0.075;
    x[idx::ca] = ca;
    if (gates == GateVariant::smooth) {
        const SmoothCaGates g = smooth_ca_gates(v_d, ca, params);
        x[idx::c] = g.c_inf;
        x[idx::q] = g.q_inf;
    } else {
        const NonSmoothCaGates g = nonsmooth_ca_gates(v_d, ca, params);
        x[idx::c] = g.alpha_c / (g.alpha_c + g.beta_c);
        x[idx::q] = g.alpha_q / (g.alpha_q + g.beta_q);
    }
    return x;
}

double dendritic_voltage_on_soma_nullcline(double v_s, const NeuronParams& params) {
    const double m_inf = gate_steady_and_tau(Gate::m, v_s, params).steady;
    const double h_inf = gate_steady_and_tau(Gate::h, v_s, params).steady;
    const double n_inf = gate_steady_and_tau(Gate::n, v_s, params).steady;
    const double i_leak = params.g_leak * (v_s - params.v_leak);
    const double i_na = params.g_na * m_inf * m_inf * h_inf * (v_s - params.v_na);
    const double i_kdr = params.g_kdr * n_inf * (v_s - params.v_k);
    return v_s + (i_leak + i_na + i_kdr - params.i_sapp / params.p) * params.p / params.g_c;
}

double reduced_residual(double v_s, const NeuronParams& params, FractionalOrder alpha,
                        GateVariant gates) {
    const double v_d = dendritic_voltage_on_soma_nullcline(v_s, params);
    const Vec8 x = assemble_from_voltages(v_s, v_d, params, gates);
    return system_rhs(params, alpha, gates, x)[idx::v_dend];
}

std::vector<Vec8> reduction_candidates(const NeuronParams& params, FractionalOrder alpha,
                                       GateVariant gates) {
    constexpr double lo = -150.0, hi = 150.0, coarse = 0.05;
    std::vector<Vec8> candidates;
    double prev_v = lo;
    double prev_g = reduced_residual(lo, params, alpha, gates);
    for (double v = lo + coarse; v <= hi + 0.5 * coarse; v += coarse) {
        const double g = reduced_residual(v, params, alpha, gates);
        if (std::isfinite(prev_g) && std::isfinite(g) && prev_g != 0.0 &&
            ((prev_g < 0.0) != (g < 0.0))) {
            double a = prev_v, b = v, ga = prev_g;
            for (int it = 0; it < 200 && (b - a) > 1e-14; ++it) {
                const double mid = 0.5 * (a + b);
                const double gm = reduced_residual(mid, params, alpha, gates);
                if (!std::isfinite(gm)) break;
                if ((gm < 0.0) == (ga < 0.0)) {
                    a = mid;
                    ga = gm;
                } else {
                    b = mid;
                }
            }
            const double v_s = 0.5 * (a + b);
            const double v_d = dendritic_voltage_on_soma_nullcline(v_s, params);
            candidates.push_back(assemble_from_voltages(v_s, v_d, params, gates));
        }
        prev_v = v;
        prev_g = g;
    }
    return candidates;
}

}  // namespace

EquilibriumSolve find_equilibrium(const NeuronParams& params, FractionalOrder alpha, const Vec8& seed,
                                  GateVariant gates) {
    EquilibriumSolve direct = damped_newton(params, alpha, gates, seed, kMaxIterations);
    if (direct.converged) return direct;

    EquilibriumSolve best = direct;
    double best_distance = std::numeric_limits<double>::infinity();
    for (const Vec8& candidate : reduction_candidates(params, alpha, gates)) {
        EquilibriumSolve polished = damped_newton(params, alpha, gates, candidate, 50);
        if (!polished.converged) continue;
        const double distance = (polished.point - seed).norm();
        if (!best.converged || distance < best_distance) {
            best = polished;
            best_distance = distance;
        }
    }
    return best;
}

Eigen::MatrixXd numerical_jacobian(const RhsFunction& f, const Eigen::VectorXd& x) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd jac(n, n);
    Eigen::VectorXd xp = x, xm = x, fp(n), fm(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double delta = std::max(1e-6, 1e-6 * std::abs(x[j]));
        xp[j] = x[j] + delta;
        xm[j] = x[j] - delta;
        f(0.0, xp, fp);
        f(0.0, xm, fm);
        jac.col(j) = (fp - fm) / (2.0 * delta);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return jac;
}

Mat8 numerical_jacobian(const NeuronParams& params, const Vec8& state, FractionalOrder alpha,
                        GateVariant gates) {
    return numerical_jacobian(make_rhs(params, alpha, gates), state);
}

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& matrix) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(matrix, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success) throw NoConvergence("eigenvalue iteration did not converge");
    const Eigen::VectorXcd values = solver.eigenvalues();
    const Eigen::MatrixXcd vectors = solver.eigenvectors();
    const double scale = matrix.norm();
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const double residual = (matrix * vectors.col(i) - values[i] * vectors.col(i)).norm();
        if (residual > 1e-8 * std::max(scale, 1e-300))
            throw NoConvergence("eigenpair residual above 1e-8 |J|");
    }
    return values;
}

double min_abs_arg(const Eigen::VectorXcd& spectrum) {
    double smallest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
        const std::complex<double> z = spectrum[i];
        const double a = (z == std::complex<double>(0.0, 0.0)) ? 0.0 : std::abs(std::arg(z));
        smallest = std::min(smallest, a);
    }
    return smallest;
}

StabilityVerdict matignon_test(const Eigen::VectorXcd& spectrum, FractionalOrder alpha) {
    return min_abs_arg(spectrum) > alpha.value() * M_PI / 2.0 ? StabilityVerdict::asymptotically_stable
                                                              : StabilityVerdict::unstable;
}

EquilibriumReport equilibrium_report(const NeuronParams& params, FractionalOrder alpha,
                                     const Vec8& seed, GateVariant gates) {
    const EquilibriumSolve solve = find_equilibrium(params, alpha, seed, gates);
    EquilibriumReport report;
    report.point = solve.point;
    report.residual_norm = solve.residual_inf;
    report.converged = solve.converged;
    report.alpha = alpha.value();
    report.jacobian = numerical_jacobian(params, solve.point, alpha, gates);
    report.spectrum = eigenvalues(report.jacobian);
    report.verdict = matignon_test(report.spectrum, alpha);
    return report;
}

StableIntervalReport scan_stable_intervals(ScanParameter parameter, double lo, double hi,
                                           double increment, const NeuronParams& base_params,
                                           FractionalOrder alpha, const Vec8& seed, GateVariant gates,
                                           bool warm_start) {
    if (!(increment > 0.0)) throw std::invalid_argument("scan_stable_intervals: increment must be > 0");
    if (!(lo < hi)) throw std::invalid_argument("scan_stable_intervals: require lo < hi");

    StableIntervalReport report;
    report.parameter_name = parameter == ScanParameter::i_sapp ? "i-sapp" : "i-dapp";
    report.lo = lo;
    report.hi = hi;
    report.increment = increment;

    const auto n_cells = static_cast<std::size_t>(std::floor((hi - lo) / increment + 1e-9)) + 1;
    report.cells.resize(n_cells);

    const double threshold = alpha.value() * M_PI / 2.0;
    bool have_warm = false;
    Vec8 warm = seed;
    for (std::size_t i = 0; i < n_cells; ++i) {
        const double value = lo + static_cast<double>(i) * increment;
        NeuronParams params = base_params;
        (parameter == ScanParameter::i_sapp ? params.i_sapp : params.i_dapp) = value;

        const Vec8 cell_seed = (warm_start && have_warm) ? warm : seed;
        const EquilibriumSolve solve = find_equilibrium(params, alpha, cell_seed, gates);

        ScanCell& cell = report.cells[i];
        cell.value = value;
        cell.converged = solve.converged;
        cell.residual = solve.residual_inf;
        if (solve.converged) {
            const Eigen::VectorXcd spectrum =
                eigenvalues(numerical_jacobian(params, solve.point, alpha, gates));
            cell.min_arg = min_abs_arg(spectrum);
            cell.stable = cell.min_arg > threshold;
            warm = solve.point;
            have_warm = true;
        } else {
            ++report.failed_cells;
            have_warm = false;
        }
    }

    for (std::size_t i = 0; i < n_cells;) {
        if (!report.cells[i].stable) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n_cells && report.cells[j + 1].stable) ++j;
        report.stable_intervals.emplace_back(report.cells[i].value, report.cells[j].value);
        i = j + 1;
    }
    return report;
}

}  // namespace frpr
