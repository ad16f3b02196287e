#pragma once

// Run configuration, CSV emission and the four driver commands behind the
// command-line tool. Everything writes to caller-supplied streams so the
// commands can be exercised without touching the filesystem.

#include "entanglement.hpp"
#include "error.hpp"
#include "field_dynamics.hpp"
#include "revival_analysis.hpp"
#include "state_assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace jcent {

enum class RunMethod { exact, approx };

inline constexpr double default_grid_spacing = 0.02;

struct RunConfig {
    double alpha = 10.0;
    double g = 1.0;
    double omega = 0.0;
    int n_qubits = 2;
    std::optional<double> t_max;  // gt units; defaults to three revival periods
    std::optional<int> steps;     // defaults to spacing 0.02
    RunMethod method = RunMethod::approx;
    Q3Variant q3_variant = Q3Variant::general;
    std::optional<int> nu_max;
    std::string out;  // empty: stdout for simulate/figures, no CSV for validate
    std::uint64_t seed = 20240601;
    unsigned threads = 0;

    double resolved_t_max() const { return t_max.value_or(3.0 * 2.0 * std::numbers::pi * alpha); }
    int resolved_steps() const {
        return steps.value_or(static_cast<int>(std::ceil(resolved_t_max() / default_grid_spacing)));
    }
    FieldParams field_params() const { return FieldParams(alpha, g, omega); }
    std::vector<double> grid() const { return uniform_grid(resolved_t_max(), resolved_steps()); }

    ScanOptions scan_options() const {
        ScanOptions o;
        o.method = method == RunMethod::exact ? ScanMethod::exact_oracle : ScanMethod::closed_form;
        o.crf = method == RunMethod::exact ? CrfSource::exact : CrfSource::approx;
        o.q3_variant = q3_variant;
        o.nu_max = nu_max.value_or(0);
        o.threads = threads;
        return o;
    }

    /// Throws invalid_config (or the FieldParams error) with an actionable message.
    void validate() const {
        field_params();
        if (n_qubits < 2) throw Error(ErrorCode::invalid_config, "n_qubits must be >= 2");
        if (t_max && !(*t_max > 0.0)) throw Error(ErrorCode::invalid_config, "t_max must be > 0");
        if (resolved_steps() < 2) throw Error(ErrorCode::invalid_config, "steps must be >= 2");
        if (nu_max) {
            const int need = required_nu_max(field_params(), resolved_t_max());
            if (*nu_max < need)
                throw Error(ErrorCode::invalid_config, "nu_max must be >= " + std::to_string(need) +
                                                           " for t_max=" + std::to_string(resolved_t_max()));
        }
    }

    /// Sets one key from its textual value; accepts '-' or '_' as separator.
    void set(std::string key, const std::string& value) {
        std::replace(key.begin(), key.end(), '-', '_');
        auto bad = [&](std::string_view what) {
            return Error(ErrorCode::invalid_config, "bad value '" + value + "' for " + key + ": " + std::string(what));
        };
        auto to_double = [&] {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(value, &used);
            } catch (const std::exception&) {
                throw bad("expected a number");
            }
            if (used != value.size()) throw bad("expected a number");
            return v;
        };
        auto to_long = [&] {
            std::size_t used = 0;
            long long v = 0;
            try {
                v = std::stoll(value, &used);
            } catch (const std::exception&) {
                throw bad("expected an integer");
            }
            if (used != value.size()) throw bad("expected an integer");
            return v;
        };
        if (key == "alpha") alpha = to_double();
        else if (key == "g") g = to_double();
        else if (key == "omega") omega = to_double();
        else if (key == "n_qubits") n_qubits = static_cast<int>(to_long());
        else if (key == "t_max") t_max = to_double();
        else if (key == "steps") steps = static_cast<int>(to_long());
        else if (key == "method") {
            if (value == "exact") method = RunMethod::exact;
            else if (value == "approx") method = RunMethod::approx;
            else throw bad("expected exact|approx");
        } else if (key == "q3_variant") {
            if (value == "general") q3_variant = Q3Variant::general;
            else if (value == "literal") q3_variant = Q3Variant::literal;
            else throw bad("expected general|literal");
        } else if (key == "nu_max") nu_max = static_cast<int>(to_long());
        else if (key == "out") out = value;
        else if (key == "seed") seed = static_cast<std::uint64_t>(to_long());
        else if (key == "threads") threads = static_cast<unsigned>(to_long());
        else throw Error(ErrorCode::invalid_config, "unknown key '" + key + "'");
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace detail

/// key = value lines; '#' starts a comment.
inline void apply_config_text(std::string_view text, RunConfig& cfg) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = detail::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::invalid_config, "line " + std::to_string(lineno) + ": expected key = value");
        cfg.set(detail::trim(std::string_view(body).substr(0, eq)), detail::trim(std::string_view(body).substr(eq + 1)));
    }
}

inline void apply_config_file(const std::filesystem::path& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_failure, "cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    apply_config_text(buf.str(), cfg);
}

/// Shortest form that round-trips: %.17g.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void header(std::initializer_list<std::string_view> cols) {
        bool first = true;
        for (auto c : cols) {
            if (!first) os_ << ',';
            os_ << c;
            first = false;
        }
        os_ << '\n';
    }

    void row(std::initializer_list<double> vals) {
        bool first = true;
        for (double v : vals) {
            if (!first) os_ << ',';
            os_ << format_double(v);
            first = false;
        }
        os_ << '\n';
        if (!os_) throw Error(ErrorCode::io_failure, "write failed");
    }

private:
    std::ostream& os_;
};

// ---- simulate ---------------------------------------------------------------

inline ScanSeries cmd_simulate(const RunConfig& cfg, std::ostream& csv) {
    cfg.validate();
    const auto grid = cfg.grid();
    const ScanSeries series = scan(cfg.field_params(), cfg.n_qubits, grid, cfg.scan_options());
    CsvWriter w(csv);
    w.header({"gt", "x", "y", "I1", "I2", "C_N", "S"});
    for (const auto& r : series.rows)
        w.row({r.gt, r.crf.x, r.crf.y, r.crf.I1, r.crf.I2, r.concurrence, r.weak_inseparability});
    return series;
}

// ---- validate ---------------------------------------------------------------

struct GeometryCheck {
    int samples = 0;
    double max_distance_error = 0.0;  // |D(state, closest) - max(0, |z1| - c)|
    double worst_search_gain = 0.0;   // largest amount a random candidate beat the closest state by
    int separability_mismatches = 0;  // fully_separable != (S == 0)
};

/// Random GHZ-diagonal single-z states (N = 2..6) against their closest fully
/// separable state and against randomly searched separable competitors.
inline GeometryCheck separability_geometry_check(int samples, std::uint64_t seed, int candidates = 16) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_n(2, 6);
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto random_pops = [&](std::size_t d) {
        std::vector<double> p(d);
        double s = 0.0;
        for (auto& v : p) s += (v = expo(rng));
        for (auto& v : p) v /= 2.0 * s;
        return p;
    };
    auto random_phase = [&] { return std::polar(1.0, 2.0 * std::numbers::pi * unit(rng)); };

    GeometryCheck out;
    out.samples = samples;
    for (int k = 0; k < samples; ++k) {
        const int n = pick_n(rng);
        const std::size_t d = std::size_t{1} << (n - 1);
        const auto pops = random_pops(d);
        const GhzDiagonalSingleZ st(n, pops, pops[0] * unit(rng) * random_phase());
        const GhzDiagonalSingleZ near = closest_fully_separable(st);
        const double claimed = std::max(0.0, std::abs(st.z1()) - st.c());
        const double dist = trace_distance(st, near);
        out.max_distance_error = std::max(out.max_distance_error, std::abs(dist - claimed));
        if (fully_separable(st) != (weak_inseparability(st).value == 0.0)) ++out.separability_mismatches;

        for (int j = 0; j < candidates; ++j) {
            std::vector<double> cp;
            if (j % 2 == 0) {
                // small perturbation of the closest state
                cp = pops;
                double s = 0.0;
                for (auto& v : cp) s += (v = std::max(0.0, v + 1e-3 * gauss(rng) * v));
                for (auto& v : cp) v /= 2.0 * s;
            } else {
                cp = random_pops(d);
            }
            const double cmin = *std::min_element(cp.begin() + 1, cp.end());
            const double zmax = std::min(cmin, cp[0]);
            const cplx zc = (j % 2 == 0) ? near.z1() * (zmax / std::max(std::abs(near.z1()), zmax) * unit(rng))
                                         : zmax * unit(rng) * random_phase();
            const GhzDiagonalSingleZ cand(n, cp, zc);
            out.worst_search_gain = std::max(out.worst_search_gain, claimed - trace_distance(st, cand));
        }
    }
    return out;
}

struct Q3Row {
    int m = 0;
    double peak_literal = 0.0;
    double peak_general = 0.0;
    double peak_oracle = 0.0;           // full X-part of the exact three-qubit state
    double peak_oracle_twirled = 0.0;   // same state twirled onto the single-z family
};

struct ValidationSummary {
    int n_qubits = 0;
    std::size_t points = 0;
    double max_x_err = 0.0, max_y_err = 0.0, max_I_err = 0.0;
    double max_modeled_err = 0.0;       // diagonal and z_1: closed form vs oracle X-part
    double max_full_x_err = 0.0;        // every X-part element, z_{i>=2} included
    double max_discarded_coherence = 0.0;
    double max_concurrence_err = 0.0;   // closed form vs oracle full X-part
    double max_twirled_concurrence_err = 0.0;
    double max_weak_insep_err = 0.0;    // closed form vs twirled oracle
    double max_density_trace_err = 0.0, max_density_herm_err = 0.0, min_density_eig = 0.0;
    std::vector<Q3Row> q3_table;
    std::string q3_verdict;
    GeometryCheck geometry;
};

inline constexpr double consistency_band = 0.02;

inline std::string q3_verdict(const std::vector<Q3Row>& rows) {
    bool general_ok = true, literal_ok = true;
    for (const auto& r : rows) {
        general_ok = general_ok && std::abs(r.peak_general - r.peak_oracle) <= consistency_band;
        literal_ok = literal_ok && std::abs(r.peak_literal - r.peak_oracle) <= consistency_band;
    }
    if (general_ok && !literal_ok) return "oracle sides with the general-N formula";
    if (literal_ok && !general_ok) return "oracle sides with the literal formula";
    if (general_ok) return "oracle cannot separate the variants on this grid";
    return "oracle matches neither variant";
}

/// Oracle-versus-approximation comparison over the configured grid. The
/// closed forms are fed exact collapse/revival values so that state-model
/// errors are not mixed with asymptotic errors; the latter are reported first.
inline ValidationSummary cmd_validate(const RunConfig& cfg, std::ostream& text, std::ostream* csv = nullptr,
                                      int geometry_samples = 10000) {
    cfg.validate();
    const int n = cfg.n_qubits;
    if (n > default_max_qubits) throw Error(ErrorCode::dimension_overflow, "validate runs the exact oracle, N <= 12");
    const FieldParams params = cfg.field_params();
    const JcField field(params);
    const auto grid = cfg.grid();
    const int nu_max = cfg.nu_max.value_or(required_nu_max(params, grid.back()));
    const double period = params.revival_gt(1);

    ValidationSummary s;
    s.n_qubits = n;
    s.points = grid.size();
    std::vector<double> lit(grid.size()), gen(grid.size()), orc3(grid.size()), orc3_tw(grid.size());

    std::optional<CsvWriter> w;
    if (csv) {
        w.emplace(*csv);
        w->header({"gt", "x_err", "y_err", "I_err", "modeled_err", "full_x_err", "C_closed", "C_oracle", "C_twirled",
                   "S_closed", "S_oracle", "Q3_general", "Q3_literal", "C3_oracle"});
    }

    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid[k] / params.g();
        const CrfValues ex = field.crf_exact(t);
        const CrfValues ap = crf_approx(params, t, nu_max);
        const double x_err = std::abs(ap.x - ex.x), y_err = std::abs(ap.y - ex.y);
        const double i_err = std::abs(cplx(ap.I1, ap.I2) - cplx(ex.I1, ex.I2));
        s.max_x_err = std::max(s.max_x_err, x_err);
        s.max_y_err = std::max(s.max_y_err, y_err);
        s.max_I_err = std::max(s.max_I_err, i_err);

        const PhiGram gram = field.gram_exact(t);
        const DensityMatrix rho = exact_qubit_density(n, gram);
        const DensityReport rep = validate_density(rho);
        s.max_density_trace_err = std::max(s.max_density_trace_err, rep.trace_error);
        s.max_density_herm_err = std::max(s.max_density_herm_err, rep.hermiticity_error);
        s.min_density_eig = std::min(s.min_density_eig, rep.min_eigenvalue);

        const XState oracle = x_part(rho);
        const GhzDiagonalSingleZ closed = xstate_closed_form(n, ex);
        const XState cx = closed.to_xstate();
        double modeled = std::abs(cx.z[0] - oracle.z[0]), full = modeled;
        for (std::size_t i = 0; i < oracle.pairs(); ++i) {
            modeled = std::max({modeled, std::abs(cx.a[i] - oracle.a[i]), std::abs(cx.b[i] - oracle.b[i])});
            full = std::max({full, modeled, std::abs(cx.z[i] - oracle.z[i])});
            if (i > 0) s.max_discarded_coherence = std::max(s.max_discarded_coherence, std::abs(oracle.z[i]));
        }
        s.max_modeled_err = std::max(s.max_modeled_err, modeled);
        s.max_full_x_err = std::max(s.max_full_x_err, full);

        const GhzDiagonalSingleZ twirled = ghz_diagonal_twirl(oracle);
        const double c_closed = concurrence_x(closed).value;
        const double c_oracle = concurrence_x(oracle).value;
        const double c_tw = concurrence_x(twirled).value;
        const double s_closed = weak_inseparability(closed).value;
        const double s_oracle = weak_inseparability(twirled).value;
        s.max_concurrence_err = std::max(s.max_concurrence_err, std::abs(c_closed - c_oracle));
        s.max_twirled_concurrence_err = std::max(s.max_twirled_concurrence_err, std::abs(c_closed - c_tw));
        s.max_weak_insep_err = std::max(s.max_weak_insep_err, std::abs(s_closed - s_oracle));

        gen[k] = std::max(0.0, q3(ex, Q3Variant::general));
        lit[k] = std::max(0.0, q3(ex, Q3Variant::literal));
        const XState ox3 = n == 3 ? oracle : x_part(exact_qubit_density(3, gram));
        orc3[k] = concurrence_x(ox3).value;
        orc3_tw[k] = concurrence_x(ghz_diagonal_twirl(ox3)).value;

        if (w)
            w->row({grid[k], x_err, y_err, i_err, modeled, full, c_closed, c_oracle, c_tw, s_closed, s_oracle, gen[k],
                    lit[k], orc3[k]});
    }

    const int m_last = static_cast<int>(std::floor(grid.back() / period + 0.5));
    for (int m = 1; m <= m_last; ++m) {
        Q3Row row{m};
        for (std::size_t k = 0; k < grid.size(); ++k) {
            if (std::abs(grid[k] - m * period) > 0.5 * period) continue;
            row.peak_literal = std::max(row.peak_literal, lit[k]);
            row.peak_general = std::max(row.peak_general, gen[k]);
            row.peak_oracle = std::max(row.peak_oracle, orc3[k]);
            row.peak_oracle_twirled = std::max(row.peak_oracle_twirled, orc3_tw[k]);
        }
        s.q3_table.push_back(row);
    }
    s.q3_verdict = q3_verdict(s.q3_table);
    s.geometry = separability_geometry_check(geometry_samples, cfg.seed);

    auto f = [](double v) { return format_double(v); };
    text << "alpha=" << f(cfg.alpha) << " N=" << n << " points=" << grid.size() << " gt_max=" << f(grid.back())
         << " nu_max=" << nu_max << "\n";
    text << "[crf] max|x_approx-x_exact|=" << f(s.max_x_err) << " max|y_approx-y_exact|=" << f(s.max_y_err)
         << " max|I_approx-I_exact|=" << f(s.max_I_err) << "\n";
    text << "[state] max modeled-element error=" << f(s.max_modeled_err)
         << " max full X-part element error=" << f(s.max_full_x_err)
         << " max discarded |z_i>=2|=" << f(s.max_discarded_coherence) << "\n";
    text << "[measures] max|C_closed-C_oracle|=" << f(s.max_concurrence_err)
         << " max|C_closed-C_twirled|=" << f(s.max_twirled_concurrence_err)
         << " max|S_closed-S_oracle|=" << f(s.max_weak_insep_err) << "\n";
    text << "[density] max trace error=" << f(s.max_density_trace_err)
         << " max hermiticity error=" << f(s.max_density_herm_err) << " min eigenvalue=" << f(s.min_density_eig)
         << "\n";
    text << "[q3] m peak_literal peak_general peak_oracle peak_oracle_twirled\n";
    for (const auto& r : s.q3_table)
        text << "[q3] " << r.m << ' ' << f(r.peak_literal) << ' ' << f(r.peak_general) << ' ' << f(r.peak_oracle)
             << ' ' << f(r.peak_oracle_twirled) << "\n";
    text << "[q3] verdict: " << s.q3_verdict << "\n";
    text << "[geometry] samples=" << s.geometry.samples << " seed=" << cfg.seed
         << " max distance error=" << f(s.geometry.max_distance_error)
         << " worst search gain=" << f(s.geometry.worst_search_gain)
         << " separability mismatches=" << s.geometry.separability_mismatches << "\n";
    return s;
}

// ---- figures ----------------------------------------------------------------

enum class FigureId { fig1, fig2, fig3 };

inline std::vector<FigureId> parse_figures(std::string_view name) {
    if (name == "fig1") return {FigureId::fig1};
    if (name == "fig2") return {FigureId::fig2};
    if (name == "fig3") return {FigureId::fig3};
    if (name == "all") return {FigureId::fig1, FigureId::fig2, FigureId::fig3};
    throw Error(ErrorCode::unknown_figure, "unknown figure '" + std::string(name) + "' (expected fig1|fig2|fig3|all)");
}

inline std::string_view to_string(FigureId f) noexcept {
    switch (f) {
    case FigureId::fig1: return "fig1";
    case FigureId::fig2: return "fig2";
    case FigureId::fig3: return "fig3";
    }
    return "?";
}

/// fig1: gt,x,I1,I2   fig2: gt,C2,C3   fig3: gt,S3,S4,S5
inline void cmd_figure(FigureId fig, const RunConfig& cfg, std::ostream& csv) {
    cfg.validate();
    const FieldParams params = cfg.field_params();
    const JcField field(params);
    const auto grid = cfg.grid();
    const ScanOptions opt = cfg.scan_options();
    CsvWriter w(csv);
    switch (fig) {
    case FigureId::fig1: {
        const int nu_max = cfg.nu_max.value_or(required_nu_max(params, grid.back()));
        w.header({"gt", "x", "I1", "I2"});
        for (double gt : grid) {
            const double t = gt / params.g();
            const CrfValues c = cfg.method == RunMethod::exact ? field.crf_exact(t) : crf_approx(params, t, nu_max);
            w.row({gt, c.x, c.I1, c.I2});
        }
        break;
    }
    case FigureId::fig2: {
        const auto c2 = scan(field, 2, grid, opt).values(Measure::concurrence);
        const auto c3 = scan(field, 3, grid, opt).values(Measure::concurrence);
        w.header({"gt", "C2", "C3"});
        for (std::size_t k = 0; k < grid.size(); ++k) w.row({grid[k], c2[k], c3[k]});
        break;
    }
    case FigureId::fig3: {
        std::array<std::vector<double>, 3> s;
        for (int n = 3; n <= 5; ++n) s[n - 3] = scan(field, n, grid, opt).values(Measure::weak_inseparability);
        w.header({"gt", "S3", "S4", "S5"});
        for (std::size_t k = 0; k < grid.size(); ++k) w.row({grid[k], s[0][k], s[1][k], s[2][k]});
        break;
    }
    }
}

/// Writes <dir>/figN.csv for each requested figure; returns the paths written.
inline std::vector<std::filesystem::path> cmd_figures(std::string_view figure, const RunConfig& cfg,
                                                      const std::filesystem::path& dir) {
    const auto figs = parse_figures(figure);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::vector<std::filesystem::path> written;
    for (auto f : figs) {
        const auto path = dir / (std::string(to_string(f)) + ".csv");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
        cmd_figure(f, cfg, out);
        written.push_back(path);
    }
    return written;
}

// ---- flow -------------------------------------------------------------------

inline constexpr std::array<double, 11> flow_grid_fractions{0.0, 0.5, 0.75, 0.9, 0.95, 1.0, 1.05, 1.1, 1.25, 1.5, 2.0};

/// flow_diagnostics on gt = pi alpha * fraction; the collapse centre is fraction 1.
inline std::vector<FlowReport> cmd_flow(const RunConfig& cfg, std::ostream& text) {
    cfg.validate();
    const FieldParams params = cfg.field_params();
    const JcField field(params);
    const double centre = std::numbers::pi * params.alpha();
    std::vector<FlowReport> reports;
    text << "alpha=" << format_double(cfg.alpha) << " N=" << cfg.n_qubits
         << " collapse centre gt=" << format_double(centre) << "\n";
    text << "gt/(pi alpha) gt product_fidelity |resonator_overlap| resonator_concurrence\n";
    for (double frac : flow_grid_fractions) {
        const double gt = centre * frac;
        const FlowReport r = flow_diagnostics(field, cfg.n_qubits, gt / params.g());
        reports.push_back(r);
        text << format_double(frac) << ' ' << format_double(gt) << ' ' << format_double(r.product_fidelity) << ' '
             << (r.resonator_overlap ? format_double(std::abs(*r.resonator_overlap)) : std::string("n/a")) << ' '
             << format_double(r.resonator_concurrence) << "\n";
    }
    return reports;
}

} // namespace jcent
