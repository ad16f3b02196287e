#pragma once

// Resonant Jaynes-Cummings evolution of a qubit coupled to a coherent field.
//
// Each qubit/field pair evolves as
//   U|e,alpha> = |e>|phi0> + |g>|phi1>
//   U|g,alpha> = |e>|phi2> + |g>|phi3>
// with phi0_n = A_n r_{n+1}, phi1_n = A_{n-1} t_n, phi2_n = A_{n+1} t_{n+1},
// phi3_n = A_n r_n, r_n = e^{-iwt} cos(gt sqrt n), t_n = -i e^{-iwt} sin(gt sqrt n).
// Everything downstream depends on the 4x4 Gram matrix of the phi's, which is
// available exactly (Fock sums) or through the collapse/revival functions
// x, y, I1, I2.

#include "error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace jcent {

using cplx = std::complex<double>;

inline constexpr double tail_mass_limit = 1e-12;

/// Smallest admissible Fock cutoff: mean photon number plus 12 standard deviations, plus 20.
inline int default_cutoff(double alpha) {
    return static_cast<int>(std::ceil(alpha * alpha + 12.0 * alpha + 20.0));
}

namespace detail {

inline double log_weight_sq(double alpha, double n) {
    // log A_n^2 = -alpha^2 + 2 n ln(alpha) - ln Gamma(n+1); valid for real n >= 0
    return -alpha * alpha + 2.0 * n * std::log(alpha) - std::lgamma(n + 1.0);
}

// Sum of A_n^2 for n > n_max, accumulated directly so the result is not
// swamped by rounding in 1 - sum.
inline double poisson_tail(double alpha, int n_max) {
    double tail = 0.0;
    for (int n = n_max + 1;; ++n) {
        const double term = std::exp(log_weight_sq(alpha, n));
        tail += term;
        if (n > alpha * alpha && (term == 0.0 || term < 1e-30 * tail)) break;
        if (n > n_max + 100000) break;
    }
    return tail;
}

} // namespace detail

/// Physical configuration of one qubit/resonator pair (resonant, so the qubit
/// frequency equals omega). Immutable once constructed.
class FieldParams {
public:
    explicit FieldParams(double alpha, double g = 1.0, double omega = 0.0,
                         std::optional<int> n_max = std::nullopt)
        : alpha_(alpha), g_(g), omega_(omega) {
        if (!(alpha > 0.0) || !std::isfinite(alpha))
            throw Error(ErrorCode::invalid_alpha, "alpha must be a positive real, got " + std::to_string(alpha));
        if (!(g > 0.0) || !std::isfinite(g))
            throw Error(ErrorCode::invalid_parameter, "coupling g must be positive, got " + std::to_string(g));
        if (!std::isfinite(omega))
            throw Error(ErrorCode::invalid_parameter, "omega must be finite");
        const int minimum = default_cutoff(alpha);
        n_max_ = n_max.value_or(minimum);
        if (n_max_ < minimum)
            throw Error(ErrorCode::cutoff_too_small, "n_max=" + std::to_string(n_max_) +
                                                         " is below ceil(alpha^2+12 alpha+20)=" +
                                                         std::to_string(minimum));
        tail_mass_ = detail::poisson_tail(alpha, n_max_);
        if (!(tail_mass_ < tail_mass_limit))
            throw Error(ErrorCode::cutoff_too_small, "truncated Poisson tail mass " + std::to_string(tail_mass_) +
                                                         " is not below 1e-12");
    }

    double alpha() const noexcept { return alpha_; }
    double g() const noexcept { return g_; }
    double omega() const noexcept { return omega_; }
    int n_max() const noexcept { return n_max_; }
    double tail_mass() const noexcept { return tail_mass_; }

    /// Scaled time of the m-th revival, gt = 2 pi alpha m.
    double revival_gt(int m = 1) const noexcept { return 2.0 * std::numbers::pi * alpha_ * m; }

private:
    double alpha_;
    double g_;
    double omega_;
    int n_max_ = 0;
    double tail_mass_ = 0.0;
};

struct CoherentWeights {
    std::vector<double> weights; // A_n, n = 0..n_max

    std::size_t size() const noexcept { return weights.size(); }
    double operator[](std::size_t n) const { return weights[n]; }
    /// A_n for any integer n; zero outside the stored range.
    double at(long n) const noexcept {
        return (n < 0 || n >= static_cast<long>(weights.size())) ? 0.0 : weights[static_cast<std::size_t>(n)];
    }
    double norm_squared() const noexcept {
        double s = 0.0;
        for (double a : weights) s += a * a;
        return s;
    }
};

inline CoherentWeights coherent_weights(const FieldParams& params) {
    const double alpha = params.alpha();
    if (!(alpha > 0.0)) throw Error(ErrorCode::invalid_alpha, "alpha must be positive");
    const double tail = detail::poisson_tail(alpha, params.n_max());
    if (!(tail < tail_mass_limit))
        throw Error(ErrorCode::cutoff_too_small, "tail mass " + std::to_string(tail));

    CoherentWeights out;
    out.weights.resize(static_cast<std::size_t>(params.n_max()) + 1);
    const double log_alpha = std::log(alpha);
    for (int n = 0; n <= params.n_max(); ++n)
        out.weights[n] = std::exp(-0.5 * alpha * alpha + n * log_alpha - 0.5 * std::lgamma(n + 1.0));
    return out;
}

/// Collapse/revival functions at one time point:
///   x + i y  = sum_n A_n^2 exp(2 i g t sqrt n)
///   I1 + i I2 = sum_n A_n^2 exp(i g t (sqrt(n+1) - sqrt n))
struct CrfValues {
    double t = 0.0;
    double x = 1.0;
    double y = 0.0;
    double I1 = 1.0;
    double I2 = 0.0;

    bool valid(double tol = 1e-9) const noexcept {
        return std::abs(x) <= 1.0 + tol && std::abs(y) <= 1.0 + tol && I1 * I1 + I2 * I2 <= 1.0 + tol;
    }
};

/// G(j,k) = <phi_j|phi_k>. Stored in full; constructors keep it Hermitian.
class PhiGram {
public:
    using Entries = std::array<std::array<cplx, 4>, 4>;

    PhiGram() = default;

    /// Build from the diagonal and the six entries above it; the lower
    /// triangle is the conjugate transpose.
    static PhiGram from_upper(double t, const std::array<double, 4>& diag, cplx g01, cplx g02, cplx g03,
                              cplx g12, cplx g13, cplx g23) {
        PhiGram out;
        out.t_ = t;
        for (int i = 0; i < 4; ++i) out.m_[i][i] = diag[i];
        const std::array<std::array<int, 2>, 6> idx{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
        const std::array<cplx, 6> val{g01, g02, g03, g12, g13, g23};
        for (int p = 0; p < 6; ++p) {
            out.m_[idx[p][0]][idx[p][1]] = val[p];
            out.m_[idx[p][1]][idx[p][0]] = std::conj(val[p]);
        }
        return out;
    }

    cplx operator()(int j, int k) const noexcept { return m_[j][k]; }
    double t() const noexcept { return t_; }
    const Entries& entries() const noexcept { return m_; }

    double hermiticity_error() const noexcept {
        double e = 0.0;
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) e = std::max(e, std::abs(m_[j][k] - std::conj(m_[k][j])));
        return e;
    }

    /// max of |G00+G11-1| and |G22+G33-1|: each evolved branch keeps unit norm.
    double branch_unitarity_error() const noexcept {
        return std::max(std::abs(m_[0][0] + m_[1][1] - 1.0), std::abs(m_[2][2] + m_[3][3] - 1.0));
    }

private:
    double t_ = 0.0;
    Entries m_{};
};

/// Precomputed coherent-state data for repeated evaluation at many times.
/// Immutable; safe to share between threads.
class JcField {
public:
    explicit JcField(FieldParams params) : params_(params), weights_(coherent_weights(params_)) {
        const int n_max = params_.n_max();
        sqrt_n_.resize(static_cast<std::size_t>(n_max) + 3);
        for (std::size_t n = 0; n < sqrt_n_.size(); ++n) sqrt_n_[n] = std::sqrt(static_cast<double>(n));
    }

    const FieldParams& params() const noexcept { return params_; }
    const CoherentWeights& weights() const noexcept { return weights_; }

    /// The four field vectors phi_0..phi_3 at time t, each of length n_max + 2
    /// (phi_1 reaches one photon above the cutoff).
    std::array<std::vector<cplx>, 4> phi_vectors(double t) const {
        const long n_max = params_.n_max();
        const std::size_t len = static_cast<std::size_t>(n_max) + 2;
        const double gt = params_.g() * t;
        const cplx phase = std::polar(1.0, -params_.omega() * t);
        auto r = [&](long n) { return phase * std::cos(gt * sqrt_n_[n]); };
        auto tt = [&](long n) { return cplx(0.0, -1.0) * phase * std::sin(gt * sqrt_n_[n]); };

        std::array<std::vector<cplx>, 4> phi;
        for (auto& v : phi) v.assign(len, cplx{});
        for (long n = 0; n < static_cast<long>(len); ++n) {
            phi[0][n] = weights_.at(n) * r(n + 1);
            phi[1][n] = weights_.at(n - 1) * tt(n);
            phi[2][n] = weights_.at(n + 1) * tt(n + 1);
            phi[3][n] = weights_.at(n) * r(n);
        }
        return phi;
    }

    /// Exact Gram matrix by direct Fock summation.
    PhiGram gram_exact(double t) const {
        const auto phi = phi_vectors(t);
        auto inner = [&](int j, int k) {
            cplx s{};
            for (std::size_t n = 0; n < phi[j].size(); ++n) s += std::conj(phi[j][n]) * phi[k][n];
            return s;
        };
        const std::array<double, 4> diag{inner(0, 0).real(), inner(1, 1).real(), inner(2, 2).real(),
                                          inner(3, 3).real()};
        return PhiGram::from_upper(t, diag, inner(0, 1), inner(0, 2), inner(0, 3), inner(1, 2), inner(1, 3),
                                   inner(2, 3));
    }

    /// x, y, I1, I2 by direct summation. The I sum uses the exact frequency
    /// sqrt(n+1) - sqrt(n), which stays finite at n = 0.
    CrfValues crf_exact(double t) const {
        const double gt = params_.g() * t;
        cplx z{}, i_sum{};
        for (std::size_t n = 0; n < weights_.size(); ++n) {
            const double p = weights_[n] * weights_[n];
            z += p * std::polar(1.0, 2.0 * gt * sqrt_n_[n]);
            const double gap = 1.0 / (sqrt_n_[n + 1] + sqrt_n_[n]);
            i_sum += p * std::polar(1.0, gt * gap);
        }
        return {t, z.real(), z.imag(), i_sum.real(), i_sum.imag()};
    }

private:
    FieldParams params_;
    CoherentWeights weights_;
    std::vector<double> sqrt_n_;
};

/// Smallest nu_max accepted by crf_approx for scaled times up to gt_max.
inline int required_nu_max(const FieldParams& params, double gt_max) {
    return static_cast<int>(std::ceil(gt_max / (2.0 * std::numbers::pi * params.alpha()))) + 1;
}

enum class RevivalWeight {
    gaussian,      // Gaussian photon weight integrated against the quadratic phase
    frozen_point,  // weight frozen at the stationary point (textbook stationary phase)
};

/// Asymptotic x, y, I1, I2.
///
/// The photon sum is split with the Poisson summation formula. The nu = 0
/// term is the collapse: Gaussian photon weight, sqrt(m) linearised about
/// alpha^2, giving exp(-g^2 t^2 / 2) e^{2 i g t alpha}. Each nu >= 1 revival
/// term expands the phase S_nu(m) = pi nu m - g t sqrt(m) to second order
/// about its stationary point m_nu = g^2 t^2 / (4 pi^2 nu^2), where
/// S_nu = -g^2 t^2 / (4 pi nu) and S_nu'' = 2 pi^3 nu^3 / (g t)^2. With
/// RevivalWeight::gaussian the Gaussian photon weight is integrated exactly
/// against that quadratic phase; RevivalWeight::frozen_point gives the
/// familiar amplitude A(m_nu)^2 g t / (pi sqrt(2 nu^3)) and phase
/// g^2 t^2 / (2 pi nu) - pi/4, which overshoots at alpha = 10 because the
/// photon distribution is as wide as the stationary-phase window.
/// I1 + i I2 = exp(-g^2 t^2 / (32 alpha^4)) e^{i g t / (2 alpha)}.
inline CrfValues crf_approx(const FieldParams& params, double t, int nu_max,
                            RevivalWeight weight = RevivalWeight::gaussian) {
    constexpr double pi = std::numbers::pi;
    const double alpha = params.alpha();
    const double gt = params.g() * t;
    if (nu_max < required_nu_max(params, std::abs(gt)))
        throw Error(ErrorCode::insufficient_nu, "nu_max=" + std::to_string(nu_max) + " does not cover gt=" +
                                                    std::to_string(gt) + " (need " +
                                                    std::to_string(required_nu_max(params, std::abs(gt))) + ")");

    const double mean = alpha * alpha;
    const double var = alpha * alpha;

    cplx z = std::exp(-0.5 * gt * gt) * std::polar(1.0, 2.0 * gt * alpha);
    z += 0.5 * std::exp(-alpha * alpha);

    if (gt > 0.0) {
        for (int nu = 1; nu <= nu_max; ++nu) {
            const double m_nu = gt * gt / (4.0 * pi * pi * nu * nu);
            const double twice_s = -gt * gt / (2.0 * pi * nu);
            const double curvature = 2.0 * pi * pi * pi * nu * nu * nu / (gt * gt);
            cplx term;
            if (weight == RevivalWeight::gaussian) {
                // integral of N(m; alpha^2, alpha^2) exp(i curvature (m - m_nu)^2) dm
                const double offset = mean - m_nu;
                const cplx q(1.0, -2.0 * curvature * var);
                term = std::polar(1.0, twice_s) / std::sqrt(q) *
                       std::exp(cplx(0.0, curvature * offset * offset) / q);
            } else {
                const double density =
                    std::exp(-(m_nu - mean) * (m_nu - mean) / (2.0 * var)) / std::sqrt(2.0 * pi * var);
                term = density * std::sqrt(pi / curvature) * std::polar(1.0, twice_s + pi / 4.0);
            }
            // term belongs to sum A^2 e^{-2igt sqrt m}; x + iy is its conjugate
            z += std::conj(term);
        }
    }

    const cplx i_val = std::exp(-gt * gt / (32.0 * alpha * alpha * alpha * alpha)) * std::polar(1.0, gt / (2.0 * alpha));
    return {t, z.real(), z.imag(), i_val.real(), i_val.imag()};
}

inline PhiGram gram_exact(const FieldParams& params, double t) { return JcField(params).gram_exact(t); }
inline CrfValues crf_exact(const FieldParams& params, double t) { return JcField(params).crf_exact(t); }

/// Gram matrix assembled from the collapse/revival functions:
///   <phi_i|phi_i>     = (1 + p1 x)/2,              p1 = +1 (i=0,3), -1 (i=1,2)
///   <phi_i|phi_i+1>   = i e^{iwt} (I2 + p2 y)/2,   p2 = -1 (i=0), +1 (i=2)
///   <phi_i|phi_3-i>   = e^{iwt} (I1 + p3 x)/2,     p3 = -1 (i=0), +1 (i=2)
///   <phi_0|phi_2> = -<phi_1|phi_3> = -i y/2
inline PhiGram gram_approx(const CrfValues& crf, double omega = 0.0) {
    const cplx e = std::polar(1.0, omega * crf.t);
    const cplx i(0.0, 1.0);
    const std::array<double, 4> diag{(1.0 + crf.x) / 2.0, (1.0 - crf.x) / 2.0, (1.0 - crf.x) / 2.0,
                                     (1.0 + crf.x) / 2.0};
    const cplx g01 = i * e * (crf.I2 - crf.y) / 2.0;
    const cplx g23 = i * e * (crf.I2 + crf.y) / 2.0;
    const cplx g03 = e * (crf.I1 - crf.x) / 2.0;
    const cplx g21 = e * (crf.I1 + crf.x) / 2.0;
    const cplx g02 = -i * crf.y / 2.0;
    const cplx g13 = i * crf.y / 2.0;
    return PhiGram::from_upper(crf.t, diag, g01, g02, g03, std::conj(g21), g13, g23);
}

} // namespace jcent
