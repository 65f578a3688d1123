#include "frpr/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace frpr {

namespace {

Eigen::Index first_index_at_or_after(const Trajectory& trajectory, double t) {
    const double h = trajectory.step_size;
    if (h <= 0.0) return 0;
    const auto k = static_cast<Eigen::Index>(std::ceil(t / h - 1e-9));
    return std::clamp<Eigen::Index>(k, 0, trajectory.size() - 1);
}

// time from the downward half-height crossing after a peak to the next
// upward crossing; half-height is measured above the inter-peak minimum
std::optional<double> refractory_from_trace(const Trajectory& trajectory, Eigen::Index component,
                                            const std::vector<Eigen::Index>& peak_indices) {
    if (peak_indices.size() < 2) return std::nullopt;
    const auto& row = trajectory.states.row(component);
    double total = 0.0;
    int count = 0;
    for (std::size_t p = 0; p + 1 < peak_indices.size(); ++p) {
        const Eigen::Index a = peak_indices[p];
        const Eigen::Index b = peak_indices[p + 1];
        double low = row[a];
        for (Eigen::Index i = a; i <= b; ++i) low = std::min(low, row[i]);
        const double level = low + 0.5 * (row[a] - low);
        Eigen::Index down = -1;
        for (Eigen::Index i = a; i < b; ++i) {
            if (row[i] >= level && row[i + 1] < level) {
                down = i + 1;
                break;
            }
        }
        if (down < 0) continue;
        for (Eigen::Index i = down; i < b; ++i) {
            if (row[i] < level && row[i + 1] >= level) {
                total += trajectory.times[i + 1] - trajectory.times[down];
                ++count;
                break;
            }
        }
    }
    if (count == 0) return std::nullopt;
    return total / count;
}

}  // namespace

SpikeTrain detect_peaks(const Trajectory& trajectory, Eigen::Index component, double threshold) {
    SpikeTrain out;
    const Eigen::Index n = trajectory.size();
    if (n < 3) return out;
    const auto& row = trajectory.states.row(component);
    const double h = trajectory.step_size;

    std::vector<Eigen::Index> indices;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        const double y0 = row[i - 1], y1 = row[i], y2 = row[i + 1];
        if (y0 < y1 && y1 >= y2 && y1 >= threshold) {
            indices.push_back(i);
            // vertex of the parabola through the three samples
            const double denom = y0 - 2.0 * y1 + y2;
            double shift = 0.0, value = y1;
            if (denom < 0.0) {
                shift = 0.5 * (y0 - y2) / denom;
                value = y1 - 0.25 * (y0 - y2) * shift;
            }
            out.peak_times.push_back(trajectory.times[i] + shift * h);
            out.peak_values.push_back(value);
        }
    }
    for (std::size_t i = 1; i < out.peak_times.size(); ++i)
        out.isi.push_back(out.peak_times[i] - out.peak_times[i - 1]);
    out.refractory_estimate = refractory_from_trace(trajectory, component, indices);
    return out;
}

double default_peak_threshold(const Trajectory& trajectory, Eigen::Index component,
                              double transient_cut) {
    const Eigen::Index start = first_index_at_or_after(trajectory, transient_cut);
    const Eigen::Index m = trajectory.size() - start;
    return trajectory.states.row(component).segment(start, m).mean() + 10.0;
}

TransientEstimate estimate_transient(const Trajectory& trajectory, Eigen::Index component,
                                     double window, double tolerance) {
    if (!(window > 0.0)) throw std::invalid_argument("estimate_transient: window must be > 0");
    if (trajectory.t_end() < 2.0 * window)
        throw std::invalid_argument("estimate_transient: need t_end >= 2*window");

    const auto& row = trajectory.states.row(component);
    const auto points_per_window =
        static_cast<Eigen::Index>(std::floor(window / trajectory.step_size + 1e-9));
    const Eigen::Index n_windows = trajectory.size() / points_per_window;

    std::vector<double> means(n_windows), amplitudes(n_windows);
    for (Eigen::Index w = 0; w < n_windows; ++w) {
        const auto seg = row.segment(w * points_per_window, points_per_window);
        means[w] = seg.mean();
        amplitudes[w] = seg.maxCoeff() - seg.minCoeff();
    }
    const double scale = std::max(row.maxCoeff() - row.minCoeff(), 1e-12);

    for (Eigen::Index w = 0; w + 1 < n_windows; ++w) {
        bool settled = true;
        for (Eigen::Index later = w + 1; later < n_windows; ++later) {
            if (std::abs(means[later] - means[w]) > tolerance * scale ||
                std::abs(amplitudes[later] - amplitudes[w]) > tolerance * scale) {
                settled = false;
                break;
            }
        }
        if (settled)
            return {static_cast<double>(w) * window, "windowed-stats"};
    }
    return {trajectory.t_end() / 2.0, "not-converged"};
}

Periodicity periodicity_test(const SpikeTrain& spikes, double rel_tol) {
    if (spikes.isi.size() < 5)
        throw InsufficientSpikes("periodicity_test: need at least 5 inter-spike intervals, have " +
                                 std::to_string(spikes.isi.size()));
    double mean = 0.0;
    for (double v : spikes.isi) mean += v;
    mean /= static_cast<double>(spikes.isi.size());
    double var = 0.0;
    for (double v : spikes.isi) var += (v - mean) * (v - mean);
    var /= static_cast<double>(spikes.isi.size());
    const double cv = std::sqrt(var) / mean;

    Periodicity out;
    out.isi_cv = cv;
    out.periodic = cv < rel_tol;
    out.period = out.periodic ? mean : 0.0;
    return out;
}

std::vector<std::pair<double, double>> attractor_section(const Trajectory& trajectory, double t_min) {
    if (t_min >= trajectory.t_end())
        throw std::invalid_argument("attractor_section: t_min must precede t_end");
    std::vector<std::pair<double, double>> section;
    for (Eigen::Index i = first_index_at_or_after(trajectory, t_min); i < trajectory.size(); ++i)
        section.emplace_back(trajectory.states(idx::v_soma, i), trajectory.states(idx::v_dend, i));
    return section;
}

BifurcationScan bifurcation_scan(SweepParameter parameter, const std::vector<double>& values,
                                 const NeuronParams& base_params, FractionalOrder base_alpha,
                                 const SolverConfig& solver, double transient_cut,
                                 const NeuronState& initial, GateVariant gates, unsigned threads) {
    if (values.empty()) throw std::invalid_argument("bifurcation_scan: values must be nonempty");
    if (transient_cut >= solver.t_end)
        throw std::invalid_argument("bifurcation_scan: transient_cut must precede t_end");

    BifurcationScan scan;
    scan.parameter_name = parameter == SweepParameter::alpha ? "alpha"
                          : parameter == SweepParameter::i_sapp ? "i-sapp"
                                                                : "i-dapp";
    scan.parameter_values = values;
    scan.samples.resize(values.size());
    std::vector<unsigned char> failed(values.size(), 0);  // vector<bool> bits would race

    const Eigen::VectorXd y0 = initial.to_vector();
    auto run_cell = [&](std::size_t i) {
        NeuronParams params = base_params;
        double alpha_value = base_alpha.value();
        switch (parameter) {
            case SweepParameter::alpha: alpha_value = values[i]; break;
            case SweepParameter::i_sapp: params.i_sapp = values[i]; break;
            case SweepParameter::i_dapp: params.i_dapp = values[i]; break;
        }
        try {
            const FractionalOrder alpha(alpha_value);
            const Trajectory trajectory = solve_caputo_abm(make_rhs(params, alpha, gates), y0, alpha, solver);
            const double threshold = default_peak_threshold(trajectory, idx::v_soma, transient_cut);
            const SpikeTrain spikes = detect_peaks(trajectory, idx::v_soma, threshold);
            std::vector<double> peaks;
            for (std::size_t k = 0; k < spikes.peak_times.size(); ++k)
                if (spikes.peak_times[k] >= transient_cut) peaks.push_back(spikes.peak_values[k]);
            scan.samples[i] = std::move(peaks);
        } catch (const NonFiniteState&) {
            failed[i] = 1;
        } catch (const std::invalid_argument&) {
            failed[i] = 1;  // e.g. alpha outside (0, 1]
        }
    };

    if (threads <= 1 || values.size() <= 1) {
        for (std::size_t i = 0; i < values.size(); ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next.fetch_add(1); i < values.size(); i = next.fetch_add(1))
                run_cell(i);
        };
        std::vector<std::thread> pool;
        const unsigned n_workers = std::min<unsigned>(threads, static_cast<unsigned>(values.size()));
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    scan.failed.assign(failed.begin(), failed.end());
    return scan;
}

int distinct_value_count(const std::vector<double>& values, double bin_width) {
    std::vector<long long> bins;
    bins.reserve(values.size());
    for (double v : values) bins.push_back(std::llround(v / bin_width));
    std::sort(bins.begin(), bins.end());
    bins.erase(std::unique(bins.begin(), bins.end()), bins.end());
    return static_cast<int>(bins.size());
}

IsiModes split_isi_modes(const std::vector<double>& isi) {
    IsiModes out;
    if (isi.size() < 2) return out;
    std::vector<double> sorted = isi;
    std::sort(sorted.begin(), sorted.end());
    std::size_t split = 0;
    double best_ratio = 1.0;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        if (sorted[i] <= 0.0) continue;
        const double ratio = sorted[i + 1] / sorted[i];
        if (ratio > best_ratio) {
            best_ratio = ratio;
            split = i + 1;
        }
    }
    if (split == 0 || split == sorted.size()) return out;
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < split; ++i) lo += sorted[i];
    for (std::size_t i = split; i < sorted.size(); ++i) hi += sorted[i];
    out.low_mean = lo / static_cast<double>(split);
    out.high_mean = hi / static_cast<double>(sorted.size() - split);
    out.bimodal = true;
    return out;
}

}  // namespace frpr
