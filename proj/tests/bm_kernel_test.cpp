#include "cocycle/bm_kernel.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace cocycle;
using testing_support::random_point;
using C = std::complex<double>;

namespace {

const double pi = std::numbers::pi;

/// Second transcription: real and imaginary parts handled separately.
std::vector<C> transcribed(int n, const Point& z, const Point& xi) {
    double r2 = 0;
    for (int i = 0; i < n; ++i) r2 += std::norm(xi(i) - z(i));
    double fact = 1;
    for (int k = 2; k < n; ++k) fact *= k;
    // -(n-1)!/(2 pi i) = i (n-1)!/(2 pi)
    C b(0, fact / (2 * pi));
    std::vector<C> out;
    for (int i = 0; i < n; ++i) {
        double re = (xi(i).real() - z(i).real()), im = -(xi(i).imag() - z(i).imag());
        double s = (i % 2 == 0) ? 1 : -1;
        out.push_back(b * C(s * re, s * im) / std::pow(r2, n));
    }
    return out;
}

library::Entry lib(const std::string& name) {
    for (auto& e : library::standard(2))
        if (e.name == name) return e;
    throw std::runtime_error(name);
}

double rel(const Vector& a, const Vector& b) { return max_abs(Vector(a - b)) / std::max(1e-300, max_abs(b)); }

}  // namespace

TEST(BmConstant, TwoDimensionalValue) {
    EXPECT_NEAR(std::abs(bm_constant(2) - C(0, 1 / (2 * pi))), 0, 1e-16);
    EXPECT_NEAR(std::abs(bm_constant(3) - C(0, 2 / (2 * pi))), 0, 1e-16);
    EXPECT_THROW(bm_constant(1), ValidationError);
}

TEST(BmEval, UnitVectorExample) {
    Point z = Point::Zero(2);
    Point xi(2);
    xi << 1, 0;
    auto e = bm_eval(2, z, xi);
    EXPECT_NEAR(std::abs(e.coefficients(0) - C(0, 1 / (2 * pi))), 0, 1e-16);
    EXPECT_EQ(e.coefficients(1), C(0));
}

TEST(BmEval, DiagonalIsSingular) {
    Point z(2);
    z << C(0.3, 0.1), C(-0.2, 0.5);
    EXPECT_THROW(bm_eval(2, z, z), DomainError);
    Point near = z;
    near(0) += 1e-13;
    EXPECT_THROW(bm_eval(2, z, near), DomainError);
    EXPECT_THROW(bm_eval(1, Point::Zero(1), Point::Ones(1)), ValidationError);
}

TEST(BmEval, MatchesSecondTranscription) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 1000; ++t) {
        int n = 2 + t % 3;
        Point z = random_point(rng, n, 1.0), xi = random_point(rng, n, 1.0);
        auto e = bm_eval(n, z, xi);
        auto ref = transcribed(n, z, xi);
        for (int i = 0; i < n; ++i) EXPECT_LT(std::abs(e.coefficients(i) - ref[i]), 1e-12 * std::abs(ref[i]) + 1e-300);
    }
}

TEST(BmEval, Homogeneity) {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 50; ++t) {
        int n = 2 + t % 2;
        Point z = random_point(rng, n, 1.0), v = random_point(rng, n, 1.0);
        double lambda = 0.3 + t * 0.07;
        auto a = bm_eval(n, z, z + lambda * v).coefficients;
        auto b = bm_eval(n, z, z + v).coefficients;
        EXPECT_LT(rel(a, Vector(std::pow(lambda, 1 - 2 * n) * b)), 1e-12);
    }
}

TEST(Dbar, OrderTwoOnUnitSphere) {
    Point z(2);
    z << C(0.1, -0.2), C(0.4, 0.3);
    auto probes = sphere_probes(z, 20, 1.0, 3);
    auto r = bm_dbar_check(2, z, probes, 1e-3);
    EXPECT_TRUE(r.pass) << r.ratio;
    EXPECT_NEAR(r.ratio, 4.0, 0.8);
    EXPECT_GT(r.residual, 0);
    EXPECT_LT(r.residual, 1e-4);
    EXPECT_EQ(r.probe_residuals.size(), 20u);
}

TEST(Dbar, OrderTwoInThreeDimensions) {
    Point z = Point::Zero(3);
    auto r = bm_dbar_check(3, z, sphere_probes(z, 10, 0.7, 4), 1e-3);
    EXPECT_TRUE(r.pass) << r.ratio;
}

TEST(Dbar, ConstantFormHasZeroResidual) {
    Point z = Point::Zero(2);
    AntiCoefficients g = [](const Point&) {
        Vector v(2);
        v << C(1, 2), C(-3, 0.5);
        return v;
    };
    auto r = dbar_closed_check(2, z, g, sphere_probes(z, 5, 1.0), 1e-3);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.residual, 0);
}

TEST(Dbar, NonClosedFormFails) {
    Point z = Point::Zero(2);
    AntiCoefficients g = [](const Point& xi) {
        Vector v(2);
        v << std::conj(xi(0)), C(0);
        return v;
    };
    auto r = dbar_closed_check(2, z, g, sphere_probes(z, 5, 1.0), 1e-3);
    EXPECT_FALSE(r.pass);
}

TEST(Dbar, ProbesTooCloseAreRejected) {
    Point z = Point::Zero(2);
    EXPECT_THROW(bm_dbar_check(2, z, sphere_probes(z, 3, 5e-3), 1e-3), DomainError);
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
    auto rule = gauss_legendre(6);
    double s = 0, sw = 0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        s += rule.weights[i] * std::pow(rule.nodes[i], 10);
        sw += rule.weights[i];
    }
    EXPECT_NEAR(sw, 2, 1e-14);
    EXPECT_NEAR(s, 2.0 / 11, 1e-14);
}

TEST(Reproducing, UnitMassAtOrder32) {
    Point z(2);
    z << C(0.2, 0.1), C(-0.3, 0.4);
    for (double r : {0.5, 1.0, 2.0}) {
        auto v = reproducing_integral(z, r, 32);
        EXPECT_LT(std::abs(v - C(1)), 1e-3) << r << ": " << v;
    }
}

TEST(Reproducing, RawIntegralMatchesStokes) {
    // each of the two terms bounds 4 vol(B^4) / r^4 = 2 pi^2
    Point z(2);
    z << C(1, -1), C(0.5, 0);
    for (double r : {0.5, 3.0}) EXPECT_LT(std::abs(reproducing_integral(z, r, 16, 1.0) - 4 * pi * pi), 1e-10);
}

TEST(Reproducing, LinearInConstant) {
    Point z = Point::Zero(2);
    auto v = reproducing_integral(z, 1.0, 32, 2.0 * unit_mass_constant(2));
    EXPECT_LT(std::abs(v - C(2)), 2e-3);
}

TEST(Reproducing, ConvergesWithOrder) {
    Point z = Point::Zero(2);
    double prev = std::numeric_limits<double>::infinity();
    for (int order : {16, 20, 24, 28, 32}) {
        double err = std::abs(reproducing_integral(z, 1.0, order) - C(1));
        EXPECT_TRUE(err <= prev || err < 1e-13) << order;
        prev = err;
    }
}

TEST(Reproducing, KernelConstantGivesMassTimesRatio) {
    Point z = Point::Zero(2);
    auto v = reproducing_integral(z, 1.0, 32, bm_constant(2));
    auto expected = bm_constant(2) / unit_mass_constant(2);
    EXPECT_LT(std::abs(v - expected), 1e-3 * std::abs(expected));
}

TEST(Reproducing, OrderBelowMinimumRejected) {
    EXPECT_THROW(reproducing_integral(Point::Zero(2), 1.0, 2), ValidationError);
    EXPECT_THROW(reproducing_integral(Point::Zero(2), -1.0, 32), ValidationError);
}

TEST(BmVertex, IdentityGivesKernel) {
    std::mt19937_64 rng(8);
    auto f = bm_vertex(HoloMap::identity(2));
    for (int t = 0; t < 20; ++t) {
        Point z = random_point(rng, 2, 0.5), xi = random_point(rng, 2, 0.5);
        auto e = bm_eval(2, z, xi);
        Vector v = f(z, xi);
        // basis over (dz-bar^1, dz-bar^2, dxi-bar^1, dxi-bar^2): omitting 1 leaves dxi-bar^2 - dz-bar^2
        ASSERT_EQ(v.size(), 4);
        Vector expect(4);
        expect << -e.coefficients(1), -e.coefficients(0), e.coefficients(1), e.coefficients(0);
        EXPECT_LT(rel(v, expect), 1e-14);
    }
}

TEST(BmVertex, UnitaryAffineLaw) {
    using Q = Rational;
    // rotation with rational entries 3/5, 4/5
    auto rho = library::affine({{{Q(3, 5), 0}, {Q(-4, 5), 0}}, {{Q(4, 5), 0}, {Q(3, 5), 0}}}, {{1, 0}, {0, 2}});
    std::mt19937_64 rng(9);
    auto f = bm_vertex(rho);
    Matrix u(2, 2);
    u << 0.6, -0.8, 0.8, 0.6;
    for (int t = 0; t < 20; ++t) {
        Point z = random_point(rng, 2, 0.5), xi = random_point(rng, 2, 0.5);
        Point d = u * (xi - z);
        double r4 = std::pow((xi - z).squaredNorm(), 2);
        C b = bm_constant(2);
        // eta^j = sum_k u_jk (dxi-bar^k - dz-bar^k); det u = 1
        Vector expect = Vector::Zero(4);
        const C g0 = b * std::conj(d(0)) / r4, g1 = -b * std::conj(d(1)) / r4;
        // omit 0 -> eta^1 ; omit 1 -> eta^0
        for (int k = 0; k < 2; ++k) {
            C w = g0 * u(1, k) + g1 * u(0, k);
            expect(k) -= w;
            expect(2 + k) += w;
        }
        EXPECT_LT(rel(f(z, xi), expect), 1e-13);
    }
}

TEST(BmVertex, Naturality) {
    std::mt19937_64 rng(10);
    const std::vector<std::string> names = {"affine", "henon", "shear", "mobius", "exp_twist"};
    for (const auto& rn : names)
        for (const auto& pn : names) {
            auto rho = lib(rn).forward, psi = lib(pn).forward;
            auto lhs = bm_vertex(compose(rho, psi));
            auto rhs = pullback_pair(psi, bm_vertex(rho));
            for (int t = 0; t < 10; ++t) {
                Point z = random_point(rng, 2, 0.3), xi = random_point(rng, 2, 0.3);
                EXPECT_LT(rel(lhs(z, xi), rhs(z, xi)), 1e-9) << rn << " o " << pn;
            }
        }
}

TEST(BmVertex, SamplePairs) {
    std::mt19937_64 rng(12);
    std::vector<Point> cloud;
    for (int i = 0; i < 5; ++i) cloud.push_back(random_point(rng, 2, 0.4));
    auto pairs = sample_pairs(bm_vertex(lib("shear").forward), cloud);
    EXPECT_EQ(pairs.size(), 20u);
    cloud.push_back(cloud[0]);
    EXPECT_THROW(sample_pairs(bm_vertex(HoloMap::identity(2)), cloud), DomainError);
}

TEST(Hartogs, PolynomialIsRecovered) {
    PairFunction f = [](const Point& z, const Point& xi) {
        Vector v(1);
        v << z(0) * xi(1) + xi(0) * xi(0) - 3.0 * z(1);
        return v;
    };
    std::mt19937_64 rng(13);
    std::vector<Point> diag;
    for (int i = 0; i < 6; ++i) diag.push_back(random_point(rng, 2, 0.8));
    auto out = hartogs_diagonal(2, f, diag);
    for (const auto& d : out) {
        C expect = d.z(0) * d.z(1) + d.z(0) * d.z(0) - 3.0 * d.z(1);
        EXPECT_LT(std::abs(d.value(0) - expect), 1e-12);
        EXPECT_LT(d.error_estimate, 1e-12);
    }
}

TEST(Hartogs, PoleIsFlagged) {
    PairFunction f = [](const Point& z, const Point& xi) {
        Vector v(1);
        v << (z(1) + 2.0) / (xi(0) - z(0));
        return v;
    };
    EXPECT_THROW(hartogs_diagonal(2, f, {Point::Zero(2)}), DomainError);
}

TEST(Hartogs, DirectionDependenceIsFlagged) {
    // bounded but not continuous at the diagonal
    PairFunction f = [](const Point& z, const Point& xi) {
        Vector v(1);
        Point d = xi - z;
        v << d(0) * std::conj(d(0)) / d.squaredNorm();
        return v;
    };
    EXPECT_THROW(hartogs_diagonal(2, f, {Point::Zero(2)}), DomainError);
}

TEST(Hartogs, RemovableSingularity) {
    PairFunction f = [](const Point& z, const Point& xi) {
        Vector v(2);
        C x = xi(0) - z(0);
        C payload0 = std::exp(z(0)) + xi(1), payload1 = z(0) * z(1);
        C s = x == C(0) ? C(1) : std::sin(x) / x;
        v << s * payload0, s * payload1;
        return v;
    };
    std::mt19937_64 rng(14);
    std::vector<Point> diag;
    for (int i = 0; i < 5; ++i) diag.push_back(random_point(rng, 2, 0.5));
    Point skewed(2);
    skewed << C(0.3, 0.4), C(1, 0);
    auto out = hartogs_diagonal(2, f, diag, {{Point::Unit(2, 0), skewed}});
    for (const auto& d : out) {
        EXPECT_LT(std::abs(d.value(0) - (std::exp(d.z(0)) + d.z(1))), 1e-9);
        EXPECT_LT(std::abs(d.value(1) - d.z(0) * d.z(1)), 1e-9);
    }
}

TEST(Parametrix, StepVerifierAcceptsConsistentData) {
    CochainData prev = [](const std::vector<int>& cell, const Point& p) {
        Vector v(1);
        v << C(cell[0] + 1.0) * p(0) + p(1) * double(cell[0]);
        return v;
    };
    CochainData dbar = [prev](const std::vector<int>& cell, const Point& p) {
        return Vector(prev({cell[1]}, p) - prev({cell[0]}, p));
    };
    std::mt19937_64 rng(15);
    std::vector<Point> pts;
    for (int i = 0; i < 8; ++i) pts.push_back(random_point(rng, 2, 1.0));
    auto ok = verify_parametrix_step(dbar, prev, {{0, 1}, {1, 2}, {0, 2}}, pts, 1e-12);
    EXPECT_TRUE(ok.pass);
    CochainData wrong = [prev](const std::vector<int>& cell, const Point& p) {
        return Vector(prev({cell[0]}, p) - prev({cell[1]}, p));
    };
    auto bad = verify_parametrix_step(wrong, prev, {{0, 1}, {1, 2}}, pts, 1e-12);
    EXPECT_FALSE(bad.pass);
    EXPECT_FALSE(bad.worst_cell.empty());
}
