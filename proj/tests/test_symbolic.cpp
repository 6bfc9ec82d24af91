#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "unifact/examples.hpp"
#include "unifact/symbolic.hpp"

using namespace unifact;

namespace {
Polynomial var(const std::string& n) { return Polynomial::variable(n); }
} // namespace

TEST_CASE("q_expand k=1 in closed form") {
    const QMatrix q = q_expand(1);
    const Polynomial f = var("f");
    CHECK(q.entries.a11 == Polynomial::constant(1) + var("z02") * var("z03") * f.pow(2));
    CHECK(q.entries.a12 == var("z02") * f);
    CHECK(q.entries.a21 == var("z03") * f);
    CHECK(q.entries.a22 == Polynomial::constant(1));
}

TEST_CASE("f^2 coefficient of the k=2 upper-left entry") {
    const QMatrix q = q_expand(2);
    const Polynomial reduced =
        divide_exact(q.entries.a11 - Polynomial::constant(1), var("f"), 2);
    const Polynomial at_zero = reduced.substitute("f", Polynomial::constant(0));
    const Polynomial expected = var("z02") * var("z03") + var("z02") * var("z05") +
                                var("z04") * var("z05");
    CHECK(at_zero == expected);
}

TEST_CASE("determinants of the expanded products are exactly one") {
    for (int k = 1; k <= 5; ++k)
        CHECK(q_expand(k).entries.det() == Polynomial::constant(1));
}

TEST_CASE("entries match their closed forms modulo f^3") {
    for (int k = 1; k <= 3; ++k) {
        const QModF3Report rep = q_mod_f3_check(k);
        CHECK(rep.passed);
        for (const auto& c : rep.checks) {
            INFO(c.name << ": " << c.detail);
            CHECK(c.passed);
        }
    }
    // the empty-sum case: Q^1_22 = 1 exactly, so its cofactor is zero
    const QModF3Report rep1 = q_mod_f3_check(1);
    CHECK(rep1.cofactors.a22.is_zero());
}

TEST_CASE("size guard") {
    CHECK_THROWS_AS(q_expand(0), SizeGuard);
    CHECK_THROWS_AS(q_expand(9), SizeGuard);
}

TEST_CASE("off-diagonal entries carry no f^2 term") {
    // Q^k_12 = f * (linear form) + f^3 * (rest): its f^2 coefficient is the
    // zero polynomial
    for (int k = 1; k <= 5; ++k) {
        const QMatrix q = q_expand(k);
        const Polynomial d2 =
            q.entries.a12.partial_derivative("f").partial_derivative("f");
        CHECK(d2.substitute("f", Polynomial::constant(0)).is_zero());
        const Polynomial d2l =
            q.entries.a21.partial_derivative("f").partial_derivative("f");
        CHECK(d2l.substitute("f", Polynomial::constant(0)).is_zero());
    }
}

TEST_CASE("reduced equation for n=2") {
    const ReducedEquation red = reduced_equation(2);
    const Polynomial at_zero = red.q_tilde.substitute("f", Polynomial::constant(0));
    CHECK(at_zero == var("z02") * var("z03"));
    CHECK(at_zero.partial_derivative("z02") == var("z03"));
    CHECK(at_zero.partial_derivative("z03") == var("z02"));
    // f^2 * q_tilde + 1 = Q^1_11 exactly
    const QMatrix q = q_expand(1);
    CHECK(var("f").pow(2) * red.q_tilde + Polynomial::constant(1) == q.entries.a11);
}

TEST_CASE("reduced equation partials for n=3") {
    const Polynomial at_zero =
        reduced_equation(3).q_tilde.substitute("f", Polynomial::constant(0));
    CHECK(at_zero.partial_derivative("z04") == var("z05"));
    CHECK(at_zero.partial_derivative("z02") == var("z03") + var("z05"));
}

TEST_CASE("singular-set dichotomy") {
    for (int n = 2; n <= 5; ++n) {
        const GradientReport rep = gradient_singularity_check(n, 200);
        CHECK(rep.partials_match);
        CHECK(rep.triangular_forces_zero);
        CHECK(rep.samples_passed);
        CHECK(rep.passed);
    }
}

TEST_CASE("psi of the zero parameters is the identity") {
    const DomainPtr dom = GridDomain::interval(0.0, 1.0, 9);
    const auto bundle = ChartBundle::trivial(dom);
    const PairPtr pair = examples::standard_pair(bundle);
    const std::vector<ScalarField> zs(4, ScalarField(dom, 0.0));
    CHECK(psi_eval(zs, *pair, 0).max_dist_to(MatrixField::identity(dom)) == 0.0);
}

TEST_CASE("padding word leaves psi unchanged") {
    const DomainPtr dom = GridDomain::interval(0.0, 1.0, 9);
    const auto bundle = ChartBundle::trivial(dom);
    const PairPtr pair = examples::standard_pair(bundle);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    std::vector<ScalarField> zs;
    for (int j = 0; j < 4; ++j) {
        ScalarField z(dom);
        for (auto& v : z.values) v = cdouble(u(rng), u(rng));
        zs.push_back(std::move(z));
    }
    const MatrixField base = psi_eval(zs, *pair, 0);
    std::vector<ScalarField> padded = zs;
    padded.push_back(ScalarField(dom, 1.0));
    padded.push_back(ScalarField(dom, 0.0));
    padded.push_back(ScalarField(dom, -1.0));
    padded.push_back(ScalarField(dom, 0.0));
    const MatrixField with_pad = psi_eval(padded, *pair, 0);
    CHECK(with_pad.max_dist_to(base) <= 1e-14);

    FiberReport rep = fiber_check(base, padded, *pair, 0);
    CHECK(rep.max_residual <= 1e-14);
    CHECK_FALSE(rep.on_singular_locus); // the -1 in the padding avoids the locus
}

TEST_CASE("padding word cancels exactly over the rationals") {
    const Mat2q n_minus(RationalComplex(0), RationalComplex(0), RationalComplex(1),
                        RationalComplex(0));
    const Mat2q u_plus = Mat2q::identity() + RationalComplex(1) * n_minus;
    const Mat2q u_minus = Mat2q::identity() + RationalComplex(-1) * n_minus;
    CHECK(u_plus * u_minus == Mat2q::identity());
}

TEST_CASE("fiber check flags the singular locus") {
    const DomainPtr dom = GridDomain::interval(0.0, 1.0, 5);
    const auto bundle = ChartBundle::trivial(dom);
    const PairPtr pair = examples::standard_pair(bundle);
    std::vector<ScalarField> zs(4, ScalarField(dom, 0.0));
    zs[0] = ScalarField(dom, 1.0); // boundary parameter, not a middle one
    const FiberReport rep = fiber_check(psi_eval(zs, *pair, 0), zs, *pair, 0);
    CHECK(rep.on_singular_locus);
}

TEST_CASE("boundary variables refuse a vanishing pivot") {
    const DomainPtr dom = GridDomain::interval(0.5, 1.5, 9);
    const ScalarField f(dom, 1.0);
    ScalarField a(dom, -1.0); // 1 + f^2 a = 0 everywhere
    const std::vector<ScalarField> z_mid(2, ScalarField(dom, 0.0));
    CHECK_THROWS_AS(solve_boundary_vars(z_mid, a, ScalarField(dom), ScalarField(dom), f),
                    PivotVanishes);
}

TEST_CASE("boundary variables: zeros give zeros") {
    const DomainPtr dom = GridDomain::interval(0.3, 1.2, 17);
    const ScalarField f = examples::coordinate_field(dom, 0);
    const std::vector<ScalarField> z_mid(2, ScalarField(dom, 0.0));
    const ScalarField zero(dom, 0.0);
    const BoundaryVars bv = solve_boundary_vars(z_mid, zero, zero, zero, f);
    CHECK(bv.lower.max_abs() == 0.0);
    CHECK(bv.upper.max_abs() == 0.0);
    CHECK(bv.eq1_residual == 0.0);
    CHECK(bv.eq4_residual <= 1e-12);
}

TEST_CASE("boundary variables: roundtrip through the product map") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    const DomainPtr dom = GridDomain::interval(0.3, 1.2, 33);
    const ScalarField f = examples::coordinate_field(dom, 0);

    std::vector<ScalarField> z_mid;
    for (int j = 0; j < 4; ++j) { // middle parameters z2..z5 (n = 3)
        ScalarField z(dom);
        for (auto& v : z.values) v = cdouble(u(rng), u(rng));
        z_mid.push_back(std::move(z));
    }
    ScalarField w1(dom), w2(dom);
    for (auto& v : w1.values) v = cdouble(u(rng), u(rng));
    for (auto& v : w2.values) v = cdouble(u(rng), u(rng));

    // assemble G = L(w1) * Q(z_mid, f) * U(w2) and read off a, b, c
    ScalarField a(dom), b(dom), c(dom);
    for (std::size_t i = 0; i < dom->size(); ++i) {
        const cdouble fv = f.values[i];
        Mat2d q = Mat2d::identity();
        for (std::size_t j = 0; j < z_mid.size(); ++j) {
            const cdouble zf = z_mid[j].values[i] * fv;
            q = q * ((j % 2 == 0) ? Mat2d(1.0, zf, 0.0, 1.0) : Mat2d(1.0, 0.0, zf, 1.0));
        }
        const Mat2d g = Mat2d(1.0, 0.0, w1.values[i], 1.0) * q *
                        Mat2d(1.0, w2.values[i], 0.0, 1.0);
        const cdouble f2 = fv * fv;
        a.values[i] = (g.a11 - cdouble(1.0)) / f2;
        b.values[i] = g.a12 / f2;
        c.values[i] = g.a21 / f2;
    }
    const BoundaryVars bv = solve_boundary_vars(z_mid, a, b, c, f);
    for (std::size_t i = 0; i < dom->size(); ++i) {
        CHECK(std::abs(bv.lower.values[i] - w1.values[i]) <= 1e-10);
        CHECK(std::abs(bv.upper.values[i] - w2.values[i]) <= 1e-10);
    }
    CHECK(bv.eq1_residual <= 1e-12);
    CHECK(bv.eq4_residual <= 1e-10);
}
