#include <jcent/entanglement.hpp>

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace jcent;

namespace {

constexpr double pi = std::numbers::pi;

GhzDiagonalSingleZ ghz(int n) {
    std::vector<double> pops(std::size_t{1} << (n - 1), 0.0);
    pops[0] = 0.5;
    return {n, pops, 0.5};
}

struct RandomStates {
    std::mt19937_64 rng;
    explicit RandomStates(std::uint64_t seed) : rng(seed) {}

    GhzDiagonalSingleZ single_z(int n) {
        std::exponential_distribution<double> expo(1.0);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<double> p(std::size_t{1} << (n - 1));
        double s = 0.0;
        for (auto& v : p) s += (v = expo(rng));
        for (auto& v : p) v /= 2.0 * s;
        return {n, p, p[0] * u(rng) * std::polar(1.0, 2.0 * pi * u(rng))};
    }

    XState x_state(int n) {
        std::exponential_distribution<double> expo(1.0);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const std::size_t d = std::size_t{1} << (n - 1);
        XState x;
        x.n_qubits = n;
        x.a.resize(d);
        x.b.resize(d);
        x.z.resize(d);
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) s += (x.a[i] = expo(rng)) + (x.b[i] = expo(rng));
        for (std::size_t i = 0; i < d; ++i) {
            x.a[i] /= s;
            x.b[i] /= s;
            x.z[i] = std::sqrt(x.a[i] * x.b[i]) * u(rng) * std::polar(1.0, 2.0 * pi * u(rng));
        }
        return x;
    }
};

} // namespace

TEST(Concurrence, GhzAndDiagonalStates) {
    for (int n = 2; n <= 6; ++n) {
        const MeasureResult r = concurrence_x(ghz(n));
        EXPECT_DOUBLE_EQ(r.value, 1.0);
        EXPECT_EQ(r.witness_index, 1u);
    }
    RandomStates gen(3);
    XState x = gen.x_state(4);
    for (auto& z : x.z) z = 0.0;
    EXPECT_EQ(concurrence_x(x).value, 0.0);
}

TEST(Concurrence, SingleZShortcutMatchesDirectSum) {
    RandomStates gen(5);
    for (int k = 0; k < 500; ++k) {
        const auto st = gen.single_z(2 + k % 5);
        const double shortcut = 2.0 * std::max(0.0, std::abs(st.z1()) - (0.5 - st.pop(0)));
        EXPECT_NEAR(concurrence_x(st).value, shortcut, 1e-14);
    }
}

TEST(Concurrence, WitnessIndexPointsAtLargestGap) {
    XState x;
    x.n_qubits = 2;
    x.a = {0.05, 0.4};
    x.b = {0.05, 0.5};
    x.z = {0.0, 0.4};
    const MeasureResult r = concurrence_x(x);
    EXPECT_EQ(r.witness_index, 2u);
    EXPECT_NEAR(r.value, 2.0 * (0.4 - 0.05), 1e-15);
    EXPECT_NEAR(r.threshold, 0.05, 1e-15);
}

TEST(WeakInseparability, Examples) {
    for (int n = 2; n <= 6; ++n) {
        EXPECT_DOUBLE_EQ(weak_inseparability(ghz(n)).value, 1.0);
        EXPECT_FALSE(fully_separable(ghz(n)));
    }
    const GhzDiagonalSingleZ sep(3, {0.2, 0.1, 0.1, 0.1}, 0.1);
    EXPECT_EQ(weak_inseparability(sep).value, 0.0);
    EXPECT_TRUE(fully_separable(sep));
    const GhzDiagonalSingleZ mixed(3, {0.125, 0.125, 0.125, 0.125}, 0.0);
    EXPECT_TRUE(fully_separable(mixed));

    for (double x : {0.5, -0.3, 0.8}) {
        const auto st = xstate_closed_form(3, CrfValues{0.0, x, 0.0, -1.0, 0.0});
        EXPECT_NEAR(weak_inseparability(st).value, x * x, 1e-15);
    }
    const auto half = xstate_closed_form(3, CrfValues{0.0, 0.5, 0.0, -1.0, 0.0});
    EXPECT_NEAR(weak_inseparability(half).value, 0.25, 1e-15);
}

TEST(WeakInseparability, PhaseInvarianceAndBounds) {
    RandomStates gen(9);
    for (int k = 0; k < 500; ++k) {
        const auto st = gen.single_z(2 + k % 5);
        const auto rot = st.with_z1(st.z1() * std::polar(1.0, 0.37 * k));
        EXPECT_NEAR(weak_inseparability(rot).value, weak_inseparability(st).value, 1e-15);
        EXPECT_NEAR(concurrence_x(rot).value, concurrence_x(st).value, 1e-15);
        EXPECT_LE(concurrence_x(st).value, weak_inseparability(st).value + 1e-15);
        EXPECT_EQ(fully_separable(st), weak_inseparability(st).value == 0.0);
    }
}

TEST(ClosestSeparable, Construction) {
    const auto g = ghz(3);
    const auto near = closest_fully_separable(g);
    EXPECT_EQ(near.z1(), cplx(0.0));
    EXPECT_DOUBLE_EQ(trace_distance(g, near), 0.5);
    EXPECT_DOUBLE_EQ(2.0 * trace_distance(g, near), weak_inseparability(g).value);

    const GhzDiagonalSingleZ sep(3, {0.2, 0.1, 0.1, 0.1}, cplx(0.0, 0.05));
    EXPECT_EQ(closest_fully_separable(sep).z1(), sep.z1());

    RandomStates gen(13);
    for (int k = 0; k < 1000; ++k) {
        const auto st = gen.single_z(2 + k % 5);
        const auto c = closest_fully_separable(st);
        EXPECT_TRUE(fully_separable(c));
        EXPECT_NEAR(trace_distance(st, c), std::max(0.0, std::abs(st.z1()) - st.c()), 1e-15);
        if (std::abs(c.z1()) > 0.0) EXPECT_NEAR(std::arg(c.z1()), std::arg(st.z1()), 1e-12);
    }
}

TEST(TraceDistance, MetricPropertiesAndBlockFormula) {
    RandomStates gen(17);
    for (int k = 0; k < 200; ++k) {
        const int n = 2 + k % 3;
        const XState a = gen.x_state(n), b = gen.x_state(n), c = gen.x_state(n);
        EXPECT_NEAR(trace_distance(a, a), 0.0, 1e-15);
        const double ab = trace_distance(a, b);
        EXPECT_NEAR(ab, trace_distance(b, a), 1e-15);
        EXPECT_LE(trace_distance(a, c), ab + trace_distance(b, c) + 1e-14);
        EXPECT_NEAR(ab, trace_distance(a.to_density(), b.to_density()), 1e-12);
    }
    const auto g = ghz(2);
    EXPECT_NEAR(trace_distance(g.to_density(), g.with_z1(0.0).to_density()), 0.5, 1e-15);
    EXPECT_THROW(trace_distance(ghz(2).to_density(), ghz(3).to_density()), Error);
    EXPECT_THROW(trace_distance(ghz(2).to_xstate(), ghz(3).to_xstate()), Error);
}

TEST(ClosedFormMeasures, Q2Q3Substitutions) {
    EXPECT_NEAR(q2(CrfValues{0.0, 0.5, 0.0, -1.0, 0.0}), 0.25, 1e-15);
    EXPECT_NEAR(q3(CrfValues{0.0, -0.5, 0.0, -1.0, 0.0}, Q3Variant::literal), 1.0 / 16.0, 1e-15);
    for (double x : {0.5, -0.5}) {
        const double g = q3(CrfValues{0.0, x, 0.0, -1.0, 0.0}, Q3Variant::general);
        EXPECT_NEAR(g, (3.0 * x * x - 1.0) / 2.0, 1e-15);
        EXPECT_NEAR(g, -0.125, 1e-15);
    }
    EXPECT_DOUBLE_EQ(q2(CrfValues{}), 1.0);
    EXPECT_DOUBLE_EQ(q3(CrfValues{}), 1.0);
    EXPECT_DOUBLE_EQ(q3(CrfValues{}, Q3Variant::literal), 1.0);
}

// Clipped at zero, Q2 and the general Q3 equal the concurrence of the closed
// form state; the literal Q3 does not.
TEST(ClosedFormMeasures, AgreeWithClosedFormState) {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int literal_differs = 0, checked3 = 0;
    for (int k = 0; k < 2000; ++k) {
        const double r = std::abs(u(rng)), th = pi * u(rng), ri = std::abs(u(rng)), ph = pi * u(rng);
        const CrfValues c{0.0, r * std::cos(th), r * std::sin(th), ri * std::cos(ph), ri * std::sin(ph)};
        EXPECT_NEAR(std::max(0.0, q2(c)), concurrence_x(xstate_closed_form(2, c)).value, 1e-12);
        const auto s3 = xstate_closed_form(3, c);
        const XState raw = s3.to_xstate();
        // skip points where the closed form needed clipping
        const double corner = std::hypot(c.I1 * c.I1 * c.I1 + 3.0 * c.I1 * c.x * c.x,
                                         c.I2 * c.I2 * c.I2 + 3.0 * c.I2 * c.y * c.y) / 8.0;
        if (corner > raw.a[0]) continue;
        ++checked3;
        EXPECT_NEAR(std::max(0.0, q3(c)), concurrence_x(s3).value, 1e-12);
        if (std::abs(std::max(0.0, q3(c, Q3Variant::literal)) - concurrence_x(s3).value) > 1e-6) ++literal_differs;
    }
    EXPECT_GT(checked3, 1000);
    EXPECT_GT(literal_differs, 50);
}

TEST(SnApprox, Values) {
    EXPECT_EQ(s_n_approx(3, 0.0).value, 0.0);
    EXPECT_NEAR(s_n_approx(3, 0.5).value, 0.1875, 1e-15);
    EXPECT_FALSE(s_n_approx(3, 0.5).even_n_warning);
    EXPECT_TRUE(s_n_approx(4, 0.5).even_n_warning);
    EXPECT_NEAR(s_n_approx(15, 0.5).value / std::pow(0.75, 15), 1.0, 0.01);
    EXPECT_THROW(s_n_approx(1, 0.5), Error);
}

namespace {

// Flow oracle: explicit global state vector over qubits (x) fields for small
// alpha, the product ansatz as a vector, and the resonator qubit built from a
// Gram-Schmidt basis whose second vector carries an arbitrary phase.
struct FlowOracle {
    double fidelity;
    double resonator_concurrence;
};

FlowOracle flow_oracle(const JcField& field, int n, double t, double gauge) {
    const auto phi = field.phi_vectors(t);
    const std::size_t len = phi[0].size();
    std::size_t fdim = 1;
    for (int i = 0; i < n; ++i) fdim *= len;
    const std::size_t qdim = std::size_t{1} << n;

    auto vec = [&](const std::vector<cplx>& v) {
        Eigen::VectorXcd e(static_cast<Eigen::Index>(len));
        for (std::size_t k = 0; k < len; ++k) e(static_cast<Eigen::Index>(k)) = v[k];
        return e;
    };
    auto kron_power = [&](const Eigen::VectorXcd& v) {
        Eigen::VectorXcd out = Eigen::VectorXcd::Ones(1);
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXcd next(out.size() * v.size());
            for (Eigen::Index a = 0; a < out.size(); ++a) next.segment(a * v.size(), v.size()) = out(a) * v;
            out = next;
        }
        return out;
    };

    // global state, qubit index major
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(qdim * fdim));
    for (int branch = 0; branch < 2; ++branch) {
        for (std::size_t s = 0; s < qdim; ++s) {
            Eigen::VectorXcd f = Eigen::VectorXcd::Ones(1);
            for (int i = 0; i < n; ++i) {
                const int bit = static_cast<int>((s >> (n - 1 - i)) & 1u);
                const Eigen::VectorXcd v = vec(phi[2 * branch + bit]);
                Eigen::VectorXcd next(f.size() * v.size());
                for (Eigen::Index a = 0; a < f.size(); ++a) next.segment(a * v.size(), v.size()) = f(a) * v;
                f = next;
            }
            psi.segment(static_cast<Eigen::Index>(s * fdim), static_cast<Eigen::Index>(fdim)) += f / std::sqrt(2.0);
        }
    }

    const Eigen::VectorXcd p0 = vec(phi[0]).normalized(), p2 = vec(phi[2]).normalized();
    Eigen::VectorXcd fields = kron_power(p0) + kron_power(p2);
    fields.normalize();
    Eigen::VectorXcd q(2);
    q << 1.0 / std::sqrt(2.0), cplx(0.0, 1.0 / std::sqrt(2.0));
    const Eigen::VectorXcd qubits = kron_power(q);
    Eigen::VectorXcd ansatz(static_cast<Eigen::Index>(qdim * fdim));
    for (std::size_t s = 0; s < qdim; ++s)
        ansatz.segment(static_cast<Eigen::Index>(s * fdim), static_cast<Eigen::Index>(fdim)) =
            qubits(static_cast<Eigen::Index>(s)) * fields;

    Eigen::VectorXcd u1 = p2 - p0.dot(p2) * p0;
    u1 = u1.normalized() * std::polar(1.0, gauge);
    Eigen::MatrixXcd basis(static_cast<Eigen::Index>(len), 2);
    basis.col(0) = p0;
    basis.col(1) = u1;
    Eigen::VectorXcd eff = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(qdim));
    for (std::size_t k = 0; k < qdim; ++k) {
        Eigen::VectorXcd proj = Eigen::VectorXcd::Ones(1);
        for (int i = 0; i < n; ++i) {
            const Eigen::VectorXcd& b = basis.col(((k >> (n - 1 - i)) & 1u) ? 1 : 0);
            Eigen::VectorXcd next(proj.size() * b.size());
            for (Eigen::Index a = 0; a < proj.size(); ++a) next.segment(a * b.size(), b.size()) = proj(a) * b;
            proj = next;
        }
        eff(static_cast<Eigen::Index>(k)) = proj.dot(fields);
    }
    const DensityMatrix rho(n, eff * eff.adjoint());
    return {std::norm(ansatz.dot(psi)), concurrence_x(x_part(rho)).value};
}

} // namespace

TEST(Flow, MatchesExplicitStateVectorOracle) {
    const JcField field{FieldParams(1.3)};
    for (int n : {2, 3}) {
        for (double t : {0.9, 2.2, 4.0}) {
            const FlowReport r = flow_diagnostics(field, n, t);
            ASSERT_TRUE(r.resonator_overlap.has_value());
            for (double gauge : {0.0, 1.1, -2.5}) {
                const FlowOracle o = flow_oracle(field, n, t, gauge);
                EXPECT_NEAR(r.product_fidelity, o.fidelity, 1e-10) << n << ' ' << t;
                EXPECT_NEAR(r.resonator_concurrence, o.resonator_concurrence, 1e-10) << n << ' ' << t;
            }
        }
    }
}

TEST(Flow, InitialTimeAndCollapseCentre) {
    const FieldParams p(10.0);
    const JcField field(p);
    const FlowReport r0 = flow_diagnostics(field, 3, 0.0);
    EXPECT_EQ(r0.resonator_concurrence, 0.0);
    EXPECT_FALSE(r0.resonator_overlap.has_value());
    EXPECT_LT(r0.product_fidelity, 0.5);

    const FlowReport c = flow_diagnostics(field, 3, pi * 10.0);
    EXPECT_GE(c.resonator_concurrence, 0.95);
    EXPECT_LT(std::abs(*c.resonator_overlap), 1e-6);
    EXPECT_GT(c.product_fidelity, 0.98);
    const FlowReport rev = flow_diagnostics(field, 3, p.revival_gt(1));
    EXPECT_LT(rev.product_fidelity, c.product_fidelity - 0.5);
}

TEST(Flow, CollapseCentreFidelityGrowsWithAlpha) {
    double prev = 0.0;
    for (double a : {5.0, 10.0, 15.0}) {
        const double f = flow_diagnostics(FieldParams(a), 3, pi * a).product_fidelity;
        EXPECT_GT(f, prev);
        prev = f;
    }
    EXPECT_GT(prev, 0.99);
}

TEST(Flow, Errors) {
    const JcField field{FieldParams(10.0)};
    try {
        flow_diagnostics(field, 3, 1e-3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::degenerate_span);
    }
    EXPECT_THROW(flow_diagnostics(field, 1, 1.0), Error);
    EXPECT_THROW(flow_diagnostics(field, 13, 1.0), Error);
}
