#pragma once

// Entanglement measures for X-states and GHZ-diagonal single-z states.
//
// All-party concurrence of an X-matrix:   C_N = 2 max(0, |z_i| - w_i)
// Weak inseparability (twice the trace distance to the fully separable set)
// for GHZ-diagonal single-z states:       S = 2 max(0, |z_1| - c),  c = min_{i>=2} b_i

#include "error.hpp"
#include "field_dynamics.hpp"
#include "state_assembly.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace jcent {

struct MeasureResult {
    double value = 0.0;
    std::size_t witness_index = 1;  // 1-based pair index that attains the maximum
    double coherence = 0.0;         // |z_i| of the witness pair
    double threshold = 0.0;         // w_i (concurrence) or c (weak inseparability)
};

inline MeasureResult concurrence_x(const XState& state) {
    const std::size_t d = state.pairs();
    std::vector<double> roots(d);
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        roots[i] = std::sqrt(std::max(0.0, state.a[i] * state.b[i]));
        total += roots[i];
    }
    MeasureResult best;
    double best_gap = -1e300;
    for (std::size_t i = 0; i < d; ++i) {
        const double w = total - roots[i];
        const double gap = std::abs(state.z[i]) - w;
        if (gap > best_gap) {
            best_gap = gap;
            best.witness_index = i + 1;
            best.coherence = std::abs(state.z[i]);
            best.threshold = w;
        }
    }
    best.value = 2.0 * std::max(0.0, best_gap);
    return best;
}

inline MeasureResult concurrence_x(const GhzDiagonalSingleZ& state) { return concurrence_x(state.to_xstate()); }

inline MeasureResult weak_inseparability(const GhzDiagonalSingleZ& state) {
    MeasureResult r;
    r.witness_index = state.c_index() + 1;
    r.coherence = std::abs(state.z1());
    r.threshold = state.c();
    r.value = 2.0 * std::max(0.0, r.coherence - r.threshold);
    return r;
}

/// Necessary and sufficient for this family: |z_1| - min b_i <= 0.
inline bool fully_separable(const GhzDiagonalSingleZ& state) { return std::abs(state.z1()) - state.c() <= 0.0; }

/// Same populations, z_1 shrunk onto the separability boundary with its phase kept.
inline GhzDiagonalSingleZ closest_fully_separable(const GhzDiagonalSingleZ& state) {
    const double mag = std::abs(state.z1());
    if (mag == 0.0 || fully_separable(state)) return state;
    return state.with_z1(detail::rescale_onto(state.z1(), state.c()));
}

/// D = 1/2 Tr|rho - tau| via the eigenvalues of the Hermitian difference.
inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& tau) {
    if (rho.dim() != tau.dim())
        throw Error(ErrorCode::shape_mismatch, "trace distance between different dimensions");
    const Eigen::MatrixXcd diff = rho.matrix() - tau.matrix();
    const Eigen::MatrixXcd herm = 0.5 * (diff + diff.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

/// X-matrix difference splits into 2x2 blocks [[da, dz], [dz*, db]].
inline double trace_distance(const XState& rho, const XState& tau) {
    if (rho.n_qubits != tau.n_qubits || rho.pairs() != tau.pairs())
        throw Error(ErrorCode::shape_mismatch, "trace distance between different X-state sizes");
    double sum = 0.0;
    for (std::size_t i = 0; i < rho.pairs(); ++i) {
        const double da = rho.a[i] - tau.a[i];
        const double db = rho.b[i] - tau.b[i];
        const double dz = std::abs(rho.z[i] - tau.z[i]);
        const double mid = 0.5 * (da + db);
        const double rad = std::hypot(0.5 * (da - db), dz);
        sum += std::abs(mid + rad) + std::abs(mid - rad);
    }
    return 0.5 * sum;
}

inline double trace_distance(const GhzDiagonalSingleZ& rho, const GhzDiagonalSingleZ& tau) {
    return trace_distance(rho.to_xstate(), tau.to_xstate());
}

/// Two-qubit concurrence argument, C_2 = max(0, Q_2).
inline double q2(const CrfValues& c) {
    return 0.5 * (c.I1 * c.I1 + 2.0 * c.x * c.x - 2.0 * c.y * c.y - c.I2 * c.I2 - 1.0);
}

enum class Q3Variant {
    general,  // three-qubit specialisation of the general-N off-diagonal
    literal,  // alternative cubic terms 3 I1^2 x and 3 I2^2 y
};

/// Three-qubit concurrence argument Q_3 = 2(|X_eee,ggg| - 3 X_eeg,eeg), C_3 = max(0, Q_3).
inline double q3(const CrfValues& c, Q3Variant variant = Q3Variant::general) {
    double re, im;
    if (variant == Q3Variant::literal) {
        re = c.I1 * c.I1 * c.I1 + 3.0 * c.I1 * c.I1 * c.x;
        im = c.I2 * c.I2 * c.I2 + 3.0 * c.I2 * c.I2 * c.y;
    } else {
        re = c.I1 * c.I1 * c.I1 + 3.0 * c.I1 * c.x * c.x;
        im = c.I2 * c.I2 * c.I2 + 3.0 * c.I2 * c.y * c.y;
    }
    const double corner = std::hypot(re, im) / 8.0;
    const double mixed = (1.0 - c.x * c.x) / 8.0;
    return 2.0 * (corner - 3.0 * mixed);
}

struct SnApprox {
    double value = 0.0;
    bool even_n_warning = false;  // the estimate assumes odd N
};

/// Weak inseparability with c replaced by the mean population:
/// S_N ~ 2^-N [(1-x)^N + (1+x)^N - 2], clipped at zero.
inline SnApprox s_n_approx(int n_qubits, double x) {
    if (n_qubits < 2) throw Error(ErrorCode::invalid_n, "need N >= 2");
    const double v = std::ldexp(std::pow(1.0 - x, n_qubits) + std::pow(1.0 + x, n_qubits) - 2.0, -n_qubits);
    return {std::max(0.0, v), n_qubits % 2 == 0};
}

struct FlowReport {
    double t = 0.0;
    double product_fidelity = 0.0;
    std::optional<cplx> resonator_overlap;  // <phi0~|phi2~>; empty if one branch field vanishes
    double resonator_concurrence = 0.0;
};

inline constexpr double flow_branch_floor = 1e-14;
inline constexpr double flow_degenerate_limit = 1e-10;

/// Compares the exact global state with the collapse-centre product form
///   (|e> + i|g>)/sqrt2 ^N  (x)  (phi0~^N + phi2~^N)/norm,
/// and measures the entanglement held by the fields alone: each resonator's
/// span {phi0~, phi2~} is orthonormalised (phi0~ first) into an effective qubit.
inline FlowReport flow_diagnostics(const JcField& field, int n_qubits, double t,
                                   int max_qubits = default_max_qubits) {
    if (n_qubits < 2) throw Error(ErrorCode::invalid_n, "flow diagnostics need N >= 2");
    if (n_qubits > max_qubits)
        throw Error(ErrorCode::dimension_overflow, "N=" + std::to_string(n_qubits) + " exceeds " +
                                                       std::to_string(max_qubits));
    const PhiGram gram = field.gram_exact(t);
    const int n = n_qubits;
    FlowReport rep;
    rep.t = t;

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const cplx on_e = inv_sqrt2;                 // <q|e>
    const cplx on_g = cplx(0.0, -1.0) * inv_sqrt2;  // <q|g>, q = (|e> + i|g>)/sqrt2

    const double norm0 = std::sqrt(gram(0, 0).real());
    const double norm2 = std::sqrt(std::max(0.0, gram(2, 2).real()));
    const bool two_branches = gram(2, 2).real() > flow_branch_floor && gram(0, 0).real() > flow_branch_floor;

    std::vector<std::pair<int, double>> terms{{0, norm0}};
    cplx s{};
    if (two_branches) {
        s = gram(0, 2) / (norm0 * norm2);
        if (std::abs(s) > 1.0 - flow_degenerate_limit)
            throw Error(ErrorCode::degenerate_span, "resonator branch fields are parallel, |s|=" +
                                                        std::to_string(std::abs(s)));
        terms.emplace_back(2, norm2);
        rep.resonator_overlap = s;
    }

    // <q^N (x) F | Psi> with Psi = (branch1^N + branch2^N)/sqrt2
    cplx overlap{};
    for (const auto& [beta, nb] : terms) {
        const cplx c1 = (on_e * gram(beta, 0) + on_g * gram(beta, 1)) / nb;
        const cplx c2 = (on_e * gram(beta, 2) + on_g * gram(beta, 3)) / nb;
        overlap += std::pow(c1, n) + std::pow(c2, n);
    }
    const double field_norm_sq = two_branches ? 2.0 + 2.0 * std::pow(s, n).real() : 1.0;
    overlap /= std::sqrt(2.0) * std::sqrt(field_norm_sq);
    rep.product_fidelity = std::min(1.0, std::norm(overlap));

    if (!two_branches) {
        rep.resonator_concurrence = 0.0;
        return rep;
    }

    // phi2~ = s u0 + r u1 in the orthonormal basis {u0 = phi0~, u1}
    const double r = std::sqrt(std::max(0.0, 1.0 - std::norm(s)));
    const std::size_t dim = std::size_t{1} << n;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
    psi(0) += 1.0;
    for (std::size_t k = 0; k < dim; ++k) {
        cplx amp = 1.0;
        for (int q = 0; q < n; ++q) amp *= ((k >> (n - 1 - q)) & 1u) ? cplx(r) : s;
        psi(static_cast<Eigen::Index>(k)) += amp;
    }
    psi.normalize();
    const DensityMatrix field_state(n, psi * psi.adjoint());
    rep.resonator_concurrence = concurrence_x(x_part(field_state)).value;
    return rep;
}

inline FlowReport flow_diagnostics(const FieldParams& params, int n_qubits, double t) {
    return flow_diagnostics(JcField(params), n_qubits, t);
}

} // namespace jcent
