#pragma once

// N-qubit states for the GHZ start (|e...e> + |g...g>)/sqrt2 with every qubit
// driven by its own coherent field.
//
// Basis convention: big-endian bit strings with e -> 0 and g -> 1, so
// |e...e> is index 0 and |g...g> is index 2^N - 1. X-state pair i (0-based
// here, 1-based in the usual notation) couples basis index i with its bit
// complement 2^N - 1 - i: a_i sits at (i,i), b_i at the complement and z_i at
// (i, complement).

#include "error.hpp"
#include "field_dynamics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace jcent {

inline constexpr int default_max_qubits = 12;

namespace detail {

// z with its phase kept and |z| == bound, never a rounding step above it.
inline cplx rescale_onto(cplx z, double bound) {
    const double mag = std::abs(z);
    if (mag == 0.0 || bound == 0.0) return {};
    cplx out = z * (bound / mag);
    while (std::abs(out) > bound) out *= 1.0 - 0x1p-52;
    return out;
}

} // namespace detail

class DensityMatrix {
public:
    DensityMatrix(int n_qubits, Eigen::MatrixXcd entries) : n_qubits_(n_qubits), m_(std::move(entries)) {
        if (n_qubits < 1 || n_qubits > 30)
            throw Error(ErrorCode::invalid_n, "qubit count out of range: " + std::to_string(n_qubits));
        const Eigen::Index dim = Eigen::Index{1} << n_qubits;
        if (m_.rows() != dim || m_.cols() != dim)
            throw Error(ErrorCode::shape_mismatch, "matrix is not 2^N x 2^N for N=" + std::to_string(n_qubits));
    }

    int n_qubits() const noexcept { return n_qubits_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }
    const Eigen::MatrixXcd& matrix() const noexcept { return m_; }
    cplx operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

private:
    int n_qubits_;
    Eigen::MatrixXcd m_;
};

/// N-qubit X-matrix: pairs i = 0..d-1, d = 2^(N-1).
struct XState {
    int n_qubits = 0;
    std::vector<double> a;
    std::vector<double> b;
    std::vector<cplx> z;

    std::size_t pairs() const noexcept { return a.size(); }

    /// w_i = sum over j != i of sqrt(a_j b_j).
    double w(std::size_t i) const {
        double s = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j)
            if (j != i) s += std::sqrt(a[j] * b[j]);
        return s;
    }

    /// Empty string when the invariants hold within tol.
    std::string check(double tol = 1e-10) const {
        const std::size_t d = std::size_t{1} << (n_qubits - 1);
        if (n_qubits < 1 || a.size() != d || b.size() != d || z.size() != d) return "inconsistent sizes";
        double total = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            if (a[i] < -tol || b[i] < -tol) return "negative population at pair " + std::to_string(i + 1);
            if (std::abs(z[i]) > std::sqrt(std::max(0.0, a[i] * b[i])) + tol)
                return "|z| exceeds sqrt(ab) at pair " + std::to_string(i + 1);
            total += a[i] + b[i];
        }
        if (std::abs(total - 1.0) > tol) return "populations sum to " + std::to_string(total);
        return {};
    }

    DensityMatrix to_density() const {
        const Eigen::Index dim = Eigen::Index{1} << n_qubits;
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
        for (std::size_t i = 0; i < a.size(); ++i) {
            const Eigen::Index r = static_cast<Eigen::Index>(i);
            const Eigen::Index c = dim - 1 - r;
            m(r, r) = a[i];
            m(c, c) = b[i];
            m(r, c) = z[i];
            m(c, r) = std::conj(z[i]);
        }
        return {n_qubits, std::move(m)};
    }
};

/// GHZ-diagonal X-state with a single non-zero anti-diagonal pair:
///   a_1 = b_1 = pop(0), a_i = b_i = pop(i-1), z_1 = z, z_i = 0 for i >= 2.
class GhzDiagonalSingleZ {
public:
    GhzDiagonalSingleZ(int n_qubits, std::vector<double> pops, cplx z1, double tol = 1e-10)
        : n_qubits_(n_qubits), pops_(std::move(pops)), z1_(z1) {
        if (n_qubits < 2) throw Error(ErrorCode::invalid_n, "need at least two qubits");
        if (pops_.size() != (std::size_t{1} << (n_qubits - 1)))
            throw Error(ErrorCode::shape_mismatch, "expected 2^(N-1) populations");
        const std::string problem = to_xstate().check(tol);
        if (!problem.empty()) throw Error(ErrorCode::not_a_state, "GHZ-diagonal state: " + problem);
    }

    int n_qubits() const noexcept { return n_qubits_; }
    std::size_t pairs() const noexcept { return pops_.size(); }
    const std::vector<double>& pops() const noexcept { return pops_; }
    double pop(std::size_t i) const { return pops_[i]; }
    cplx z1() const noexcept { return z1_; }

    /// c = min of the populations b_i over pairs i >= 2.
    double c() const { return *std::min_element(pops_.begin() + 1, pops_.end()); }
    std::size_t c_index() const {
        return static_cast<std::size_t>(std::min_element(pops_.begin() + 1, pops_.end()) - pops_.begin());
    }

    GhzDiagonalSingleZ with_z1(cplx z1) const { return {n_qubits_, pops_, z1}; }

    XState to_xstate() const {
        XState x;
        x.n_qubits = n_qubits_;
        x.a = pops_;
        x.b = pops_;
        x.z.assign(pops_.size(), cplx{});
        x.z[0] = z1_;
        return x;
    }

    DensityMatrix to_density() const { return to_xstate().to_density(); }

private:
    int n_qubits_;
    std::vector<double> pops_;
    cplx z1_;
};

/// Reduced qubit state of (U|e,alpha>^N + U|g,alpha>^N)/sqrt2 with the fields
/// traced out. Evaluated for every element:
///   rho(s, s') = 1/2 sum_{b,b'} prod_i G(f(s'_i, b'), f(s_i, b))
/// with f(e,1)=0, f(g,1)=1, f(e,2)=2, f(g,2)=3. Each product depends only on how
/// many positions carry each (s_i, s'_i) combination.
inline DensityMatrix exact_qubit_density(int n_qubits, const PhiGram& gram, int max_qubits = default_max_qubits) {
    if (n_qubits < 1) throw Error(ErrorCode::invalid_n, "need at least one qubit");
    if (n_qubits > max_qubits)
        throw Error(ErrorCode::dimension_overflow,
                    "N=" + std::to_string(n_qubits) + " exceeds the exact-oracle limit " + std::to_string(max_qubits));

    const int n = n_qubits;
    // powers[branch pair][row bit][col bit][k] = M^{bb'}(row bit, col bit)^k
    std::array<std::array<std::array<std::vector<cplx>, 2>, 2>, 4> powers;
    for (int bb = 0; bb < 4; ++bb) {
        const int b = bb >> 1, bp = bb & 1;
        for (int sr = 0; sr < 2; ++sr)
            for (int sc = 0; sc < 2; ++sc) {
                const cplx base = gram(2 * bp + sc, 2 * b + sr);
                auto& p = powers[bb][sr][sc];
                p.resize(static_cast<std::size_t>(n) + 1);
                p[0] = 1.0;
                for (int k = 1; k <= n; ++k) p[k] = p[k - 1] * base;
            }
    }

    const std::uint64_t dim = std::uint64_t{1} << n;
    const std::uint64_t mask = dim - 1;
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::uint64_t r = 0; r < dim; ++r) {
        for (std::uint64_t c = r; c < dim; ++c) {
            const int n11 = std::popcount(r & c);
            const int n10 = std::popcount(r & ~c & mask);
            const int n01 = std::popcount(~r & c & mask);
            const int n00 = n - n11 - n10 - n01;
            cplx sum{};
            for (int bb = 0; bb < 4; ++bb) {
                const auto& p = powers[bb];
                sum += p[0][0][n00] * p[0][1][n01] * p[1][0][n10] * p[1][1][n11];
            }
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 0.5 * sum;
            if (c != r) m(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) = 0.5 * std::conj(sum);
        }
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, i) = m(i, i).real();
    return {n_qubits, std::move(m)};
}

/// GHZ-diagonal single-z state from the closed forms:
///   2^(N+1) z_1 = (-i)^N ((I2-y)^N + (I2+y)^N) + (I1-x)^N + (I1+x)^N
///   2^(N+1) X_n = (iy)^N ((-1)^n + (-1)^(N-n)) + (1+x)^n (1-x)^(N-n) + (1-x)^n (1+x)^(N-n)
/// where X_n is the population of any basis state with n excited qubits.
/// The closed forms are not exactly positive: during the first Rabi cycles
/// |z_1| can exceed a_1 by ~1e-4 (and by much more for collapse/revival values
/// no field produces). Overshoots are clipped onto the boundary, phase kept.
inline GhzDiagonalSingleZ xstate_closed_form(int n_qubits, const CrfValues& crf, double tol = 1e-10) {
    if (n_qubits < 2) throw Error(ErrorCode::invalid_n, "closed form needs N >= 2");
    const int n = n_qubits;
    const double scale = std::ldexp(1.0, -(n + 1));
    const double x = crf.x, y = crf.y;

    // (iy)^N is real whenever it survives (N even)
    const double iy_pow = (n % 2 == 0) ? ((n / 2) % 2 == 0 ? 1.0 : -1.0) * std::pow(y, n) : 0.0;
    std::vector<double> by_excited(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        const int rest = n - k;
        const double parity = (k % 2 == 0 ? 1.0 : -1.0) + (rest % 2 == 0 ? 1.0 : -1.0);
        by_excited[k] = scale * (iy_pow * parity + std::pow(1.0 + x, k) * std::pow(1.0 - x, rest) +
                                 std::pow(1.0 - x, k) * std::pow(1.0 + x, rest));
    }

    const std::size_t d = std::size_t{1} << (n - 1);
    std::vector<double> pops(d);
    for (std::size_t i = 0; i < d; ++i) pops[i] = by_excited[n - std::popcount(i)];

    cplx minus_i_pow = 1.0;
    for (int k = 0; k < n; ++k) minus_i_pow *= cplx(0.0, -1.0);
    cplx z1 = scale * (minus_i_pow * (std::pow(crf.I2 - y, n) + std::pow(crf.I2 + y, n)) +
                       std::pow(crf.I1 - x, n) + std::pow(crf.I1 + x, n));
    if (std::abs(z1) > pops[0]) z1 = detail::rescale_onto(z1, std::max(0.0, pops[0]));
    return {n_qubits, std::move(pops), z1, tol};
}

inline constexpr double x_part_clip_tolerance = 1e-8;

/// Keeps the diagonal and anti-diagonal of rho. Numerical noise up to 1e-8 in
/// the positivity bound |z_i| <= sqrt(a_i b_i) is clipped; anything larger
/// is not a state.
inline XState x_part(const DensityMatrix& rho) {
    const Eigen::Index dim = rho.dim();
    const std::size_t d = static_cast<std::size_t>(dim / 2);
    XState x;
    x.n_qubits = rho.n_qubits();
    x.a.resize(d);
    x.b.resize(d);
    x.z.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        const Eigen::Index r = static_cast<Eigen::Index>(i);
        const Eigen::Index c = dim - 1 - r;
        double a = rho(r, r).real();
        double b = rho(c, c).real();
        if (a < -x_part_clip_tolerance || b < -x_part_clip_tolerance)
            throw Error(ErrorCode::not_a_state, "negative population at pair " + std::to_string(i + 1));
        a = std::max(a, 0.0);
        b = std::max(b, 0.0);
        cplx z = rho(r, c);
        const double bound = std::sqrt(a * b);
        const double excess = std::abs(z) - bound;
        if (excess > x_part_clip_tolerance)
            throw Error(ErrorCode::not_a_state, "|z| exceeds sqrt(ab) by " + std::to_string(excess) + " at pair " +
                                                    std::to_string(i + 1));
        if (excess > 0.0) z = detail::rescale_onto(z, bound);
        x.a[i] = a;
        x.b[i] = b;
        x.z[i] = z;
    }
    return x;
}

/// Local depolarising twirl onto the GHZ-diagonal single-z family: a_i, b_i
/// are averaged and every coherence except z_1 is removed. It is an LOCC map,
/// so neither entanglement measure can increase.
inline GhzDiagonalSingleZ ghz_diagonal_twirl(const XState& x) {
    std::vector<double> pops(x.pairs());
    for (std::size_t i = 0; i < pops.size(); ++i) pops[i] = 0.5 * (x.a[i] + x.b[i]);
    return {x.n_qubits, std::move(pops), x.z[0], 1e-9};
}

struct DensityReport {
    double trace_error = 0.0;
    double hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
    double max_off_x = 0.0;  // largest |element| outside diagonal and anti-diagonal

    bool valid(double trace_tol = 1e-10, double herm_tol = 1e-12, double eig_tol = 1e-8) const noexcept {
        return trace_error <= trace_tol && hermiticity_error <= herm_tol && min_eigenvalue >= -eig_tol;
    }
};

inline DensityReport validate_density(const DensityMatrix& rho) {
    const Eigen::MatrixXcd& m = rho.matrix();
    DensityReport rep;
    rep.trace_error = std::abs(m.trace() - 1.0);
    rep.hermiticity_error = (m - m.adjoint()).cwiseAbs().maxCoeff();
    const Eigen::MatrixXcd herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
    rep.min_eigenvalue = solver.eigenvalues().minCoeff();
    const Eigen::Index dim = m.rows();
    for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c)
            if (c != r && c != dim - 1 - r) rep.max_off_x = std::max(rep.max_off_x, std::abs(m(r, c)));
    return rep;
}

} // namespace jcent
