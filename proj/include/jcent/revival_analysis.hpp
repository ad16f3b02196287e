#pragma once

// Time scans of the entanglement measures and revival bookkeeping.
// Grids are in scaled time gt; the m-th revival sits near gt = 2 pi alpha m.

#include "entanglement.hpp"
#include "error.hpp"
#include "field_dynamics.hpp"
#include "state_assembly.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace jcent {

enum class ScanMethod { exact_oracle, closed_form };
enum class CrfSource { exact, approx };
enum class Measure { concurrence, weak_inseparability, x, y, I1, I2 };

inline constexpr double max_recommended_spacing = 0.05;

struct ScanOptions {
    ScanMethod method = ScanMethod::closed_form;
    CrfSource crf = CrfSource::exact;  // closed_form only; the oracle always uses exact sums
    Q3Variant q3_variant = Q3Variant::general;
    int nu_max = 0;        // 0 picks the smallest value covering the grid
    unsigned threads = 0;  // 0 uses hardware concurrency
};

struct ScanRow {
    double gt = 0.0;
    CrfValues crf;
    double concurrence = 0.0;
    double weak_inseparability = 0.0;
};

struct ScanSeries {
    FieldParams params;
    int n_qubits = 0;
    ScanMethod method = ScanMethod::closed_form;
    CrfSource crf = CrfSource::exact;
    std::vector<double> grid;
    std::vector<ScanRow> rows;
    std::vector<std::string> warnings;

    std::vector<double> values(Measure m) const {
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) {
            switch (m) {
            case Measure::concurrence: out.push_back(r.concurrence); break;
            case Measure::weak_inseparability: out.push_back(r.weak_inseparability); break;
            case Measure::x: out.push_back(r.crf.x); break;
            case Measure::y: out.push_back(r.crf.y); break;
            case Measure::I1: out.push_back(r.crf.I1); break;
            case Measure::I2: out.push_back(r.crf.I2); break;
            }
        }
        return out;
    }
};

inline std::string_view to_string(ScanMethod m) noexcept {
    return m == ScanMethod::exact_oracle ? "exact-oracle" : "closed-form";
}

/// Uniform grid of steps + 1 points on [0, gt_max].
inline std::vector<double> uniform_grid(double gt_max, int steps) {
    if (steps < 1 || !(gt_max > 0.0)) throw Error(ErrorCode::invalid_grid, "need steps >= 1 and gt_max > 0");
    std::vector<double> g(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) g[k] = gt_max * k / steps;
    return g;
}

namespace detail {

inline ScanRow scan_point(const JcField& field, int n_qubits, double gt, const ScanOptions& opt, int nu_max) {
    const double t = gt / field.params().g();
    ScanRow row;
    row.gt = gt;
    if (opt.method == ScanMethod::exact_oracle) {
        row.crf = field.crf_exact(t);
        const XState xs = x_part(exact_qubit_density(n_qubits, field.gram_exact(t)));
        row.concurrence = concurrence_x(xs).value;
        row.weak_inseparability = weak_inseparability(ghz_diagonal_twirl(xs)).value;
    } else {
        row.crf = opt.crf == CrfSource::exact ? field.crf_exact(t) : crf_approx(field.params(), t, nu_max);
        const GhzDiagonalSingleZ st = xstate_closed_form(n_qubits, row.crf);
        row.concurrence = (n_qubits == 3 && opt.q3_variant == Q3Variant::literal)
                              ? std::max(0.0, q3(row.crf, Q3Variant::literal))
                              : concurrence_x(st).value;
        row.weak_inseparability = weak_inseparability(st).value;
    }
    return row;
}

} // namespace detail

/// Evaluates every grid point independently (optionally on several threads);
/// rows come back in grid order regardless of scheduling.
inline ScanSeries scan(const JcField& field, int n_qubits, std::span<const double> grid, const ScanOptions& opt = {}) {
    if (grid.empty()) throw Error(ErrorCode::invalid_grid, "empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw Error(ErrorCode::invalid_grid, "grid must be strictly increasing");
    if (n_qubits < 2) throw Error(ErrorCode::invalid_n, "need N >= 2");
    if (opt.method == ScanMethod::exact_oracle && n_qubits > default_max_qubits)
        throw Error(ErrorCode::dimension_overflow, "exact oracle is limited to N <= 12");

    ScanSeries out{field.params(), n_qubits, opt.method, opt.crf, {grid.begin(), grid.end()}, {}, {}};
    double widest = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) widest = std::max(widest, grid[i] - grid[i - 1]);
    if (widest > max_recommended_spacing)
        out.warnings.push_back("grid-too-coarse: spacing " + std::to_string(widest) +
                               " exceeds 0.05 and may alias the Rabi oscillations");

    const double gt_max = std::max(std::abs(grid.front()), std::abs(grid.back()));
    const int nu_max = opt.nu_max > 0 ? opt.nu_max : required_nu_max(field.params(), gt_max);

    out.rows.resize(grid.size());
    unsigned workers = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, grid.size()));

    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            out.rows[i] = detail::scan_point(field, n_qubits, grid[i], opt, nu_max);
    };

    if (workers <= 1) {
        run_range(0, grid.size());
        return out;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (grid.size() + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(grid.size(), begin + chunk);
            pool.emplace_back([&, w, begin, end] {
                try {
                    run_range(begin, end);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

inline ScanSeries scan(const FieldParams& params, int n_qubits, std::span<const double> grid, const ScanOptions& opt = {}) {
    return scan(JcField(params), n_qubits, grid, opt);
}

struct RevivalWindow {
    int m = 0;
    double gt_begin = 0.0;
    double gt_end = 0.0;
    double peak = 0.0;
    double peak_gt = 0.0;
};

struct RevivalReport {
    std::vector<RevivalWindow> windows;  // ordered by m
    std::optional<double> death_time;    // empty if the measure is still alive at the end

    const RevivalWindow* window(int m) const {
        for (const auto& w : windows)
            if (w.m == m) return &w;
        return nullptr;
    }
};

inline constexpr double default_revival_threshold = 1e-3;

/// Local maxima above threshold are assigned to revival index
/// m = round(gt / period); each m keeps its highest maximum as the peak and
/// the span of above-threshold points nearest to it as the interval.
inline RevivalReport detect_revivals(std::span<const double> grid, std::span<const double> values, double period,
                                     double threshold = default_revival_threshold, double zero_tol = 0.0) {
    if (grid.size() != values.size()) throw Error(ErrorCode::shape_mismatch, "grid and values differ in length");
    if (!(period > 0.0)) throw Error(ErrorCode::invalid_parameter, "revival period must be positive");
    RevivalReport rep;
    const std::size_t n = grid.size();
    auto index_of = [&](double gt) { return static_cast<int>(std::lround(gt / period)); };

    for (std::size_t i = 0; i < n; ++i) {
        const double v = values[i];
        if (!(v > threshold)) continue;
        const bool left_ok = i == 0 || v >= values[i - 1];
        const bool right_ok = i + 1 == n || v >= values[i + 1];
        const int m = index_of(grid[i]);
        auto it = std::find_if(rep.windows.begin(), rep.windows.end(), [m](const auto& w) { return w.m == m; });
        if (it == rep.windows.end()) {
            if (!(left_ok && right_ok)) continue;
            rep.windows.push_back({m, grid[i], grid[i], v, grid[i]});
            continue;
        }
        if (left_ok && right_ok && v > it->peak) {
            it->peak = v;
            it->peak_gt = grid[i];
        }
    }
    // window intervals: every above-threshold point belonging to an m with a peak
    for (auto& w : rep.windows) {
        bool first = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(values[i] > threshold) || index_of(grid[i]) != w.m) continue;
            if (first) w.gt_begin = grid[i];
            w.gt_end = grid[i];
            first = false;
        }
    }
    std::sort(rep.windows.begin(), rep.windows.end(), [](const auto& a, const auto& b) { return a.m < b.m; });

    std::optional<std::size_t> last_alive;
    for (std::size_t i = 0; i < n; ++i)
        if (values[i] > zero_tol) last_alive = i;
    if (!last_alive)
        rep.death_time = grid.front();
    else if (*last_alive + 1 < n)
        rep.death_time = grid[*last_alive + 1];
    return rep;
}

inline RevivalReport detect_revivals(const ScanSeries& series, Measure measure,
                                     double threshold = default_revival_threshold) {
    const auto v = series.values(measure);
    return detect_revivals(series.grid, v, series.params.revival_gt(1), threshold);
}

struct PermanenceReport {
    bool permanent = false;
    std::optional<double> first_death;          // start of the first sustained zero run
    std::optional<double> first_revival_after;  // first gt after that with measure > 0
};

/// Before the collapse the measures touch zero on the Rabi time scale and
/// recover, so a death only counts once the measure has stayed at zero for
/// min_dead_span (one Rabi period, pi/alpha in gt, for the series overload).
/// Permanent iff the measure is zero everywhere after that death; a series
/// that never dies is not permanent.
inline PermanenceReport permanence_check(std::span<const double> grid, std::span<const double> values, double period,
                                         double min_dead_span, double zero_tol = 0.0) {
    if (grid.size() != values.size()) throw Error(ErrorCode::shape_mismatch, "grid and values differ in length");
    if (grid.empty() || grid.front() > 1e-12 || grid.back() < 2.5 * period)
        throw Error(ErrorCode::insufficient_horizon, "series must cover gt in [0, 2.5 * 2 pi alpha]");
    PermanenceReport rep;
    const std::size_t n = values.size();
    std::size_t i = 0;
    while (i < n) {
        if (values[i] > zero_tol) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && values[j] <= zero_tol) ++j;
        if (j == n || grid[j] - grid[i] >= min_dead_span) break;
        i = j;
    }
    if (i == n) return rep;
    rep.first_death = grid[i];
    for (; i < n; ++i)
        if (values[i] > zero_tol) {
            rep.first_revival_after = grid[i];
            return rep;
        }
    rep.permanent = true;
    return rep;
}

inline PermanenceReport permanence_check(const ScanSeries& series, Measure measure = Measure::concurrence) {
    const auto v = series.values(measure);
    return permanence_check(series.grid, v, series.params.revival_gt(1), std::numbers::pi / series.params.alpha());
}

} // namespace jcent
