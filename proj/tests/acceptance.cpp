// Acceptance suite: one verdict line per criterion, exit code = number of
// failed criteria. Every tolerance is fixed here, in code.

#include "frpr/analysis.hpp"
#include "frpr/cli.hpp"
#include "frpr/fde_solver.hpp"
#include "frpr/pinsky_rinzel.hpp"
#include "frpr/stability.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

using namespace frpr;

namespace {

int failures = 0;
std::vector<std::string> details;

void note(const std::string& line) { details.push_back(line); }

void verdict(int id, const std::string& name, bool pass) {
    for (const std::string& line : details) std::printf("    %s\n", line.c_str());
    details.clear();
    std::printf("criterion %d [%s]: %s\n", id, name.c_str(), pass ? "PASS" : "FAIL");
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const RhsFunction decay = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) { dydt = -y; };

Eigen::VectorXd one() {
    Eigen::VectorXd y(1);
    y[0] = 1.0;
    return y;
}

double max_error_vs_ml(const Trajectory& traj, double alpha) {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < traj.size(); ++k) {
        const double ref = mittag_leffler(FractionalOrder(alpha), -std::pow(traj.times[k], alpha));
        worst = std::max(worst, std::abs(traj.states(0, k) - ref));
    }
    return worst;
}

Trajectory run_model(double alpha, double i_sapp, double t_end, double h, std::size_t window,
                     double i_dapp = 0.0) {
    NeuronParams params = canonical_params();
    params.i_sapp = i_sapp;
    params.i_dapp = i_dapp;
    SolverConfig config{h, t_end, window == 0 ? MemoryPolicy::full() : MemoryPolicy::window(window),
                        1};
    const FractionalOrder order(alpha);
    return solve_caputo_abm(make_rhs(params, order, GateVariant::smooth),
                            canonical_initial_state().to_vector(), order, config);
}

SpikeTrain spikes_after(const Trajectory& traj, double cut) {
    const double threshold = default_peak_threshold(traj, idx::v_soma, cut);
    const SpikeTrain all = detect_peaks(traj, idx::v_soma, threshold);
    SpikeTrain out;
    for (std::size_t i = 0; i < all.peak_times.size(); ++i) {
        if (all.peak_times[i] < cut) continue;
        out.peak_times.push_back(all.peak_times[i]);
        out.peak_values.push_back(all.peak_values[i]);
    }
    for (std::size_t i = 1; i < out.peak_times.size(); ++i)
        out.isi.push_back(out.peak_times[i] - out.peak_times[i - 1]);
    return out;
}

double isi_cv(const SpikeTrain& spikes) {
    if (spikes.isi.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : spikes.isi) mean += v;
    mean /= static_cast<double>(spikes.isi.size());
    double var = 0.0;
    for (double v : spikes.isi) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(spikes.isi.size())) / mean;
}

// ---------------------------------------------------------------------------

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    for (double alpha : {0.8, 0.95, 1.0}) {
        SolverConfig config{1e-3, 2.0, MemoryPolicy::full(), 1};
        const Trajectory traj = solve_caputo_abm(decay, one(), FractionalOrder(alpha), config);
        const double err = max_error_vs_ml(traj, alpha);
        note(fmt("alpha=%.2f: max error vs Mittag-Leffler %.2e (tolerance 1e-4)", alpha, err));
        pass = pass && err < 1e-4;
        if (alpha == 1.0) {
            double exp_err = 0.0;
            for (Eigen::Index k = 0; k < traj.size(); ++k)
                exp_err = std::max(exp_err, std::abs(traj.states(0, k) - std::exp(-traj.times[k])));
            note(fmt("alpha=1.00: max error vs exp(-t) %.2e (tolerance 1e-4)", exp_err));
            pass = pass && exp_err < 1e-4;
        }
    }
    const double elapsed = seconds_since(t0);
    note(fmt("runtime %.2f s (bound 10 s)", elapsed));
    pass = pass && elapsed < 10.0;
    verdict(1, "solver oracle: D^a y = -y vs Mittag-Leffler series", pass);
}

void criterion_2() {
    SolverConfig coarse{0.02, 2.0, MemoryPolicy::full(), 1};
    SolverConfig fine{0.01, 2.0, MemoryPolicy::full(), 1};
    const double e1 =
        max_error_vs_ml(solve_caputo_abm(decay, one(), FractionalOrder(0.95), coarse), 0.95);
    const double e2 =
        max_error_vs_ml(solve_caputo_abm(decay, one(), FractionalOrder(0.95), fine), 0.95);
    note(fmt("error(h=0.02)=%.3e error(h=0.01)=%.3e ratio=%.2f (need >= 1.8)", e1, e2, e1 / e2));
    verdict(2, "convergence order under step halving", e1 / e2 >= 1.8);
}

void criterion_3() {
    bool pass = true;

    // regular spiking at I_Sapp = 2.5, window t in [100, 500]
    const Trajectory regular = run_model(1.0, 2.5, 500.0, 0.05, 0);
    const SpikeTrain reg_spikes = spikes_after(regular, 100.0);
    const double cv = isi_cv(reg_spikes);
    note(fmt("I_Sapp=2.5: %.0f spikes in [100,500] (need >= 20), ISI CV %.3f (need < 0.2)",
             static_cast<double>(reg_spikes.peak_times.size()), cv));
    pass = pass && reg_spikes.peak_times.size() >= 20 && cv < 0.2;

    // burst grouping at I_Sapp = 0.75 (no time window fixed for this clause;
    // the inter-burst mode needs a few burst cycles to show up)
    const Trajectory bursting = run_model(1.0, 0.75, 2000.0, 0.05, 0);
    const SpikeTrain burst_spikes = spikes_after(bursting, 100.0);
    const IsiModes modes = split_isi_modes(burst_spikes.isi);
    if (modes.bimodal) {
        note(fmt("I_Sapp=0.75: ISI modes %.1f / %.1f ms, ratio %.1f (need > 3)", modes.low_mean,
                 modes.high_mean, modes.high_mean / modes.low_mean));
        pass = pass && modes.high_mean / modes.low_mean > 3.0;
    } else {
        note("I_Sapp=0.75: no bimodal ISI split found");
        pass = false;
    }
    verdict(3, "integer-order firing modes", pass);
}

void criterion_4() {
    const Trajectory traj = run_model(0.95, 0.75, 2000.0, 0.05, 0);
    const SpikeTrain spikes = spikes_after(traj, 400.0);
    bool pass = false;
    if (spikes.isi.size() >= 5) {
        const Periodicity p = periodicity_test(spikes, 0.1);
        if (p.periodic)
            note(fmt("periodic with period %.2f ms (need 67 +- 5), ISI CV %.3f", p.period, p.isi_cv));
        else
            note(fmt("aperiodic: ISI CV %.3f (rel_tol 0.1), %.0f spikes post-400", p.isi_cv,
                     static_cast<double>(spikes.peak_times.size())));
        pass = p.periodic && std::abs(p.period - 67.0) <= 5.0;
    } else {
        note(fmt("only %.0f spikes post-transient; periodicity test needs 5 ISIs",
                 static_cast<double>(spikes.peak_times.size())));
    }
    verdict(4, "fractional periodic regime (alpha=0.95, I_Sapp=0.75)", pass);
}

void criterion_5() {
    const Trajectory traj = run_model(0.95, 2.5, 4000.0, 0.05, 0);
    const SpikeTrain spikes = spikes_after(traj, 500.0);
    bool pass = false;
    if (spikes.isi.size() >= 5) {
        const Periodicity p = periodicity_test(spikes, 0.1);
        note(fmt("ISI CV %.3f over %.0f spikes (aperiodic expected)", p.isi_cv,
                 static_cast<double>(spikes.peak_times.size())));
        pass = !p.periodic;
    } else {
        note("too few spikes for the periodicity test");
    }
    const Eigen::Index start =
        static_cast<Eigen::Index>(std::ceil(500.0 / traj.step_size - 1e-9));
    const auto vd = traj.states.row(idx::v_dend).segment(start, traj.size() - start);
    note(fmt("post-transient V_d range [%.2f, %.2f] (needs to lie within [-10, 55])",
             vd.minCoeff(), vd.maxCoeff()));
    pass = pass && vd.minCoeff() >= -10.0 && vd.maxCoeff() <= 55.0;
    verdict(5, "fractional chaotic regime (alpha=0.95, I_Sapp=2.5)", pass);
}

void criterion_6() {
    const auto t0 = std::chrono::steady_clock::now();
    const int cells = 150;
    bool low_band_ok = true;
    int low_band_worst = 0;
    double low_band_worst_alpha = 0.0;
    int high_band_best = 0;
    double high_band_best_alpha = 0.0;
    int failed_cells = 0;

    for (int i = 0; i < cells; ++i) {
        const double alpha = 0.7 + 0.3 * static_cast<double>(i) / (cells - 1);
        // step-size / memory policy by stability band (verified empirically):
        // windowed restarts destabilize the scheme below alpha ~ 0.78
        double h = 0.05;
        std::size_t window = 6000;  // 300 ms
        if (alpha < 0.72) {
            h = 0.025;
            window = 0;
        } else if (alpha < 0.78) {
            h = 0.035;
            window = 0;
        }
        int distinct = -1;
        try {
            const Trajectory traj = run_model(alpha, 2.5, 1500.0, h, window);
            const SpikeTrain spikes = spikes_after(traj, 500.0);
            distinct = distinct_value_count(spikes.peak_values, 0.5);
        } catch (const NonFiniteState&) {
            ++failed_cells;
        }
        if (alpha <= 0.90) {
            if (distinct < 0 || distinct > 4) low_band_ok = false;
            if (distinct > low_band_worst) {
                low_band_worst = distinct;
                low_band_worst_alpha = alpha;
            }
        }
        if (alpha >= 0.94 && distinct > high_band_best) {
            high_band_best = distinct;
            high_band_best_alpha = alpha;
        }
    }
    note(fmt("low band (alpha <= 0.90): worst distinct-peak count %.0f at alpha=%.3f (need <= 4 "
             "everywhere)",
             static_cast<double>(low_band_worst), low_band_worst_alpha));
    note(fmt("high band (alpha >= 0.94): best distinct-peak count %.0f at alpha=%.3f (need >= 10 "
             "somewhere)",
             static_cast<double>(high_band_best), high_band_best_alpha));
    if (failed_cells > 0) note(fmt("%.0f cells diverged", static_cast<double>(failed_cells)));
    note(fmt("runtime %.0f s (150 cells, t_end=1500, windowed where stable)", seconds_since(t0)));
    verdict(6, "bifurcation structure over the alpha sweep",
            low_band_ok && high_band_best >= 10 && failed_cells == 0);
}

struct ReferenceEquilibrium {
    double i_sapp;
    Vec8 point;
    std::vector<std::complex<double>> spectrum;
};

std::vector<ReferenceEquilibrium> reference_equilibria() {
    ReferenceEquilibrium e1, e2;
    e1.i_sapp = 0.75;
    e1.point << 1.0225, 0.9267, 0.9950, 0.0088, 0.0149, 0.0117, 0.0456, 0.5355;
    e1.spectrum = {{-3.3066, 0}, {-2.4601, 0}, {-1.0242, 0},       {-0.3830, 0},
                   {-0.3123, 0}, {-0.0749, 0}, {0.0007, 0.0005},   {0.0007, -0.0005}};
    e2.i_sapp = 2.5;
    e2.point << 2.6161, 2.4916, 0.9929, 0.0239, 0.0170, 0.0132, 0.0448, 0.6876;
    e2.spectrum = {{-3.2804, 0}, {-2.3217, 0}, {-0.9954, 0}, {-0.3453, 0},
                   {-0.2856, 0}, {-0.0748, 0}, {0.0039, 0},  {-0.0000, 0}};
    return {e1, e2};
}

EquilibriumReport report_for(double i_sapp) {
    NeuronParams params = canonical_params();
    params.i_sapp = i_sapp;
    params.i_dapp = 0.0;
    return equilibrium_report(params, FractionalOrder(0.95),
                              canonical_initial_state().to_vector());
}

void criterion_7() {
    bool pass = true;
    for (const ReferenceEquilibrium& ref : reference_equilibria()) {
        const EquilibriumReport rep = report_for(ref.i_sapp);
        const bool residual_ok = rep.converged && rep.residual_norm < 1e-10;
        note(fmt("I_Sapp=%.2f: residual %.2e (hard bound 1e-10)", ref.i_sapp, rep.residual_norm));

        const double point_diff = (rep.point - ref.point).cwiseAbs().maxCoeff();
        note(fmt("I_Sapp=%.2f: max |component - reported| = %.4f (tolerance 0.05); ours V_s=%.4f "
                 "vs reported %.4f",
                 ref.i_sapp, point_diff, rep.point[idx::v_soma], ref.point[idx::v_soma]));

        std::vector<std::complex<double>> ours(rep.spectrum.data(), rep.spectrum.data() + 8);
        std::vector<std::complex<double>> theirs = ref.spectrum;
        auto by_re_im = [](std::complex<double> a, std::complex<double> b) {
            return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
        };
        std::sort(ours.begin(), ours.end(), by_re_im);
        std::sort(theirs.begin(), theirs.end(), by_re_im);
        double eig_diff = 0.0;
        for (int i = 0; i < 8; ++i) eig_diff = std::max(eig_diff, std::abs(ours[i] - theirs[i]));
        note(fmt("I_Sapp=%.2f: max eigenvalue mismatch %.4f (tolerance 0.05)", ref.i_sapp,
                 eig_diff));

        pass = pass && residual_ok && point_diff <= 0.05 && eig_diff <= 0.05;
    }
    verdict(7, "equilibria vs the reported points and spectra", pass);
}

void criterion_8() {
    bool pass = true;
    for (const ReferenceEquilibrium& ref : reference_equilibria()) {
        const EquilibriumReport rep = report_for(ref.i_sapp);
        const bool unstable = rep.verdict == StabilityVerdict::unstable;
        note(fmt("I_Sapp=%.2f: min |arg| = %.4f vs threshold %.4f -> ", ref.i_sapp,
                 min_abs_arg(rep.spectrum), 0.95 * M_PI / 2.0) +
             (unstable ? "unstable" : "stable"));
        pass = pass && rep.converged && unstable;
    }
    verdict(8, "Matignon verdicts at alpha=0.95 (both unstable)", pass);
}

void criterion_9() {
    const auto t0 = std::chrono::steady_clock::now();
    const double inc = 0.001;  // desk-scale increment sanctioned by the gate
    const Vec8 seed = canonical_initial_state().to_vector();
    const FractionalOrder alpha(0.95);
    bool pass = true;

    struct Case {
        ScanParameter parameter;
        double base_i_sapp;
        double expect_lo;  // NaN marks "stable from the scan edge"
        double expect_hi;
    };
    const Case cases[3] = {
        {ScanParameter::i_sapp, 2.5, -1.2579, 0.0268},
        {ScanParameter::i_dapp, 2.5, std::nan(""), -2.5471},
        {ScanParameter::i_dapp, 0.75, std::nan(""), -0.7449},
    };
    for (const Case& c : cases) {
        NeuronParams params = canonical_params();
        params.i_sapp = c.base_i_sapp;
        const StableIntervalReport rep =
            scan_stable_intervals(c.parameter, -4.0, 4.0, inc, params, alpha, seed);
        const char* name = c.parameter == ScanParameter::i_sapp ? "I_Sapp" : "I_Dapp";
        if (rep.stable_intervals.size() != 1) {
            note(std::string(name) +
                 fmt(" scan: %.0f stable intervals (expected exactly 1)",
                     static_cast<double>(rep.stable_intervals.size())));
            pass = false;
            continue;
        }
        const auto [lo, hi] = rep.stable_intervals.front();
        char line[256];
        std::snprintf(line, sizeof line,
                      "%s scan (base I_Sapp=%.2f): stable interval [%.4f, %.4f]", name,
                      c.base_i_sapp, lo, hi);
        note(line);
        if (std::isnan(c.expect_lo)) {
            if (std::abs(lo - (-4.0)) > inc + 1e-9) {
                note(fmt("  left endpoint %.4f should sit at the scan edge -4", lo));
                pass = false;
            }
        } else if (std::abs(lo - c.expect_lo) > 0.05) {
            note(fmt("  left endpoint %.4f vs reported %.4f differs by %.4f (tolerance 0.05)", lo,
                     c.expect_lo, std::abs(lo - c.expect_lo)));
            pass = false;
        }
        if (std::abs(hi - c.expect_hi) > 0.05) {
            note(fmt("  right endpoint %.4f vs reported %.4f differs by %.4f (tolerance 0.05)", hi,
                     c.expect_hi, std::abs(hi - c.expect_hi)));
            pass = false;
        }
    }
    const double elapsed = seconds_since(t0);
    note(fmt("runtime %.1f s for three 8001-cell scans (bound 300 s)", elapsed));
    pass = pass && elapsed < 300.0;
    verdict(9, "stable injection intervals", pass);
}

void criterion_10() {
    bool pass = true;

    {  // weight-sum telescoping identity
        bool ok = true;
        for (double alpha : {0.5, 0.9, 1.0}) {
            const Eigen::Index n = 5000;
            const Eigen::VectorXd b = predictor_weights(FractionalOrder(alpha), n);
            long double sum = 0.0L;
            for (Eigen::Index j = 0; j <= n; ++j) sum += b[j];
            const long double expected = std::pow(static_cast<long double>(n + 1), alpha);
            ok = ok && std::abs(static_cast<double>(sum - expected)) <=
                           1e-12 * static_cast<double>(expected);
        }
        note(std::string("weight-sum telescoping identity: ") + (ok ? "ok" : "violated"));
        pass = pass && ok;
    }
    {  // alpha = 1 classical equivalence
        SolverConfig config{0.01, 10.0, MemoryPolicy::full(), 1};
        const Trajectory abm = solve_caputo_abm(decay, one(), FractionalOrder(1.0), config);
        const Trajectory rk4 = solve_classical_reference(decay, one(), config);
        const bool ok = (abm.states - rk4.states).cwiseAbs().maxCoeff() < 1e-4;
        note(std::string("alpha=1 classical equivalence: ") + (ok ? "ok" : "violated"));
        pass = pass && ok;
    }
    {  // memory-window bit identity
        SolverConfig full{0.01, 2.0, MemoryPolicy::full(), 1};
        SolverConfig windowed{0.01, 2.0, MemoryPolicy::window(300), 1};
        const bool ok =
            solve_caputo_abm(decay, one(), FractionalOrder(0.8), full).states ==
            solve_caputo_abm(decay, one(), FractionalOrder(0.8), windowed).states;
        note(std::string("memory-window bit identity: ") + (ok ? "ok" : "violated"));
        pass = pass && ok;
    }
    {  // equilibrium alpha-independence
        const Vec8 seed = canonical_initial_state().to_vector();
        const EquilibriumSolve a = find_equilibrium(canonical_params(), FractionalOrder(0.8), seed);
        const EquilibriumSolve b = find_equilibrium(canonical_params(), FractionalOrder(0.95), seed);
        const bool ok =
            a.converged && b.converged && (a.point - b.point).lpNorm<Eigen::Infinity>() < 1e-8;
        note(std::string("equilibrium alpha-independence: ") + (ok ? "ok" : "violated"));
        pass = pass && ok;
    }
    {  // Matignon monotonicity in alpha
        std::mt19937 rng(123);
        std::uniform_real_distribution<double> mag(-3.0, 3.0);
        std::uniform_real_distribution<double> ord(0.05, 1.0);
        bool ok = true;
        for (int trial = 0; trial < 100; ++trial) {
            Eigen::VectorXcd spec(8);
            for (Eigen::Index i = 0; i < 8; ++i) spec[i] = std::complex<double>(mag(rng), mag(rng));
            double a1 = ord(rng), a2 = ord(rng);
            if (a1 < a2) std::swap(a1, a2);
            if (matignon_test(spec, FractionalOrder(a1)) ==
                StabilityVerdict::asymptotically_stable)
                ok = ok && matignon_test(spec, FractionalOrder(a2)) ==
                               StabilityVerdict::asymptotically_stable;
        }
        note(std::string("Matignon monotonicity in alpha: ") + (ok ? "ok" : "violated"));
        pass = pass && ok;
    }
    {  // numerical Jacobian recovers a linear vector field
        std::mt19937 rng(321);
        std::uniform_real_distribution<double> coin(-2.0, 2.0);
        Eigen::MatrixXd a(8, 8);
        for (Eigen::Index i = 0; i < 8; ++i)
            for (Eigen::Index j = 0; j < 8; ++j) a(i, j) = coin(rng);
        const RhsFunction linear = [a](double, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
            dydt = a * y;
        };
        Eigen::VectorXd x(8);
        x << 1.0, -0.5, 0.25, 2.0, 0.0, -1.5, 3.0, 0.125;
        const bool ok = (numerical_jacobian(linear, x) - a).cwiseAbs().maxCoeff() < 1e-8;
        note(std::string("Jacobian vs analytic linear system: ") + (ok ? "ok" : "violated"));
        pass = pass && ok;
    }
    verdict(10, "property suites", pass);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    std::printf("%d of 10 criteria failed\n", failures);
    return failures;
}
