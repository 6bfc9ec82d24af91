#pragma once

#include <random>
#include <string>
#include <vector>

#include "unifact/bundle.hpp"
#include "unifact/elimination.hpp"
#include "unifact/polynomial.hpp"

namespace unifact {

namespace detail {

inline std::string zvar(std::size_t i) {
    return std::string("z") + (i < 10 ? "0" : "") + std::to_string(i);
}

inline Mat2<Polynomial> poly_identity() {
    return {Polynomial::constant(1), Polynomial::constant(0), Polynomial::constant(0),
            Polynomial::constant(1)};
}

} // namespace detail

/// Q^k: the exact product Upper(z2 f) Lower(z3 f) ... Upper(z_{2k} f) Lower(z_{2k+1} f)
/// as a polynomial matrix in z2..z_{2k+1} and f.
struct QMatrix {
    int k = 0;
    Mat2<Polynomial> entries;
};

inline QMatrix q_expand(int k) {
    if (k < 1 || k > 8) throw SizeGuard("q_expand: k must be in [1, 8]");
    const Polynomial f = Polynomial::variable("f");
    Mat2<Polynomial> acc = detail::poly_identity();
    for (int j = 1; j <= k; ++j) {
        const Polynomial zu = Polynomial::variable(detail::zvar(2 * j)) * f;
        const Polynomial zl = Polynomial::variable(detail::zvar(2 * j + 1)) * f;
        const Mat2<Polynomial> upper{Polynomial::constant(1), zu, Polynomial::constant(0),
                                     Polynomial::constant(1)};
        const Mat2<Polynomial> lower{Polynomial::constant(1), Polynomial::constant(0), zl,
                                     Polynomial::constant(1)};
        acc = acc * upper;
        acc = acc * lower;
    }
    return {k, acc};
}

struct IdentityCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct QModF3Report {
    int k = 0;
    std::vector<IdentityCheck> checks;
    Mat2<Polynomial> cofactors; // the f^3 cofactors of each entry
    bool passed = false;
};

/// Closed forms of the entries modulo f^3:
///   Q11 = 1 + f^2 sum_{i<=j} z_{2i} z_{2j+1},  Q12 = f sum z_{2i},
///   Q21 = f sum z_{2j+1},                      Q22 = 1 + f^2 sum_{j<i} z_{2i} z_{2j+1}.
/// Each remainder must be exactly divisible by f^3.
inline QModF3Report q_mod_f3_check(int k) {
    QModF3Report rep;
    rep.k = k;
    const QMatrix q = q_expand(k);
    const Polynomial f = Polynomial::variable("f");
    const Polynomial f2 = f.pow(2);

    Polynomial head11 = Polynomial::constant(1);
    Polynomial head22 = Polynomial::constant(1);
    Polynomial head12, head21;
    for (int i = 1; i <= k; ++i)
        for (int j = i; j <= k; ++j)
            head11 += f2 * Polynomial::variable(detail::zvar(2 * i)) *
                      Polynomial::variable(detail::zvar(2 * j + 1));
    for (int j = 1; j <= k; ++j)
        for (int i = j + 1; i <= k; ++i)
            head22 += f2 * Polynomial::variable(detail::zvar(2 * i)) *
                      Polynomial::variable(detail::zvar(2 * j + 1));
    for (int i = 1; i <= k; ++i) head12 += f * Polynomial::variable(detail::zvar(2 * i));
    for (int j = 1; j <= k; ++j) head21 += f * Polynomial::variable(detail::zvar(2 * j + 1));

    auto check_entry = [&](const char* name, const Polynomial& entry, const Polynomial& head,
                           Polynomial& cof) {
        IdentityCheck c;
        c.name = std::string("Q^") + std::to_string(k) + "_" + name + " mod f^3";
        try {
            cof = divide_exact(entry - head, f, 3);
            c.passed = true;
            c.detail = "remainder cofactor has " + std::to_string(cof.term_count()) + " terms";
        } catch (const NotDivisible& e) {
            c.passed = false;
            c.detail = e.what();
        }
        rep.checks.push_back(c);
    };
    check_entry("11", q.entries.a11, head11, rep.cofactors.a11);
    check_entry("12", q.entries.a12, head12, rep.cofactors.a12);
    check_entry("21", q.entries.a21, head21, rep.cofactors.a21);
    check_entry("22", q.entries.a22, head22, rep.cofactors.a22);

    IdentityCheck det_check;
    det_check.name = std::string("det Q^") + std::to_string(k) + " = 1";
    det_check.passed = (q.entries.det() == Polynomial::constant(1));
    rep.checks.push_back(det_check);

    rep.passed = true;
    for (const auto& c : rep.checks) rep.passed = rep.passed && c.passed;
    return rep;
}

/// (Q^{n-1}_11 - 1) / f^2, the single membership equation near the zero set.
struct ReducedEquation {
    int n = 0;
    Polynomial q_tilde;
};

inline ReducedEquation reduced_equation(int n) {
    if (n < 2) throw SizeGuard("reduced_equation: n >= 2 required");
    const QMatrix q = q_expand(n - 1);
    const Polynomial f = Polynomial::variable("f");
    return {n, divide_exact(q.entries.a11 - Polynomial::constant(1), f, 2)};
}

struct GradientReport {
    int n = 0;
    bool partials_match = false;      // the closed form of each even partial
    bool triangular_forces_zero = false;
    std::size_t samples_checked = 0;
    bool samples_passed = false;
    bool passed = false;
};

/// At f = 0 the reduced polynomial is sum_{i<=j} z_{2i} z_{2j+1}; its even
/// partials are the suffix sums of the odd variables, so a vanishing
/// gradient forces all middle variables to zero. Verified symbolically and
/// on random samples.
inline GradientReport gradient_singularity_check(int n, std::size_t nsamples,
                                                 std::uint64_t seed = 20240901u) {
    GradientReport rep;
    rep.n = n;
    const Polynomial at_zero = reduced_equation(n).q_tilde.substitute(
        "f", Polynomial::constant(0));

    // closed forms of the partials
    bool partials = true;
    for (int kk = 1; kk <= n - 1; ++kk) {
        Polynomial suffix_odd, suffix_even;
        for (int l = kk; l <= n - 1; ++l)
            suffix_odd += Polynomial::variable(detail::zvar(2 * l + 1));
        for (int l = 1; l <= kk; ++l) suffix_even += Polynomial::variable(detail::zvar(2 * l));
        partials = partials &&
                   (at_zero.partial_derivative(detail::zvar(2 * kk)) == suffix_odd) &&
                   (at_zero.partial_derivative(detail::zvar(2 * kk + 1)) == suffix_even);
    }
    rep.partials_match = partials;

    // triangular back-substitution: successive differences of the suffix
    // sums isolate each variable exactly
    bool tri = true;
    for (int kk = 1; kk <= n - 1; ++kk) {
        const Polynomial dk = at_zero.partial_derivative(detail::zvar(2 * kk));
        const Polynomial next = (kk < n - 1)
                                    ? at_zero.partial_derivative(detail::zvar(2 * (kk + 1)))
                                    : Polynomial();
        tri = tri && (dk - next == Polynomial::variable(detail::zvar(2 * kk + 1)));
    }
    for (int kk = 1; kk <= n - 1; ++kk) {
        const Polynomial dk = at_zero.partial_derivative(detail::zvar(2 * kk + 1));
        const Polynomial prev = (kk > 1)
                                    ? at_zero.partial_derivative(detail::zvar(2 * kk - 1))
                                    : Polynomial();
        tri = tri && (dk - prev == Polynomial::variable(detail::zvar(2 * kk)));
    }
    rep.triangular_forces_zero = tri;

    // random nonzero middle variables must give a nonzero gradient
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    bool samples_ok = true;
    for (std::size_t s = 0; s < nsamples; ++s) {
        std::map<std::string, cdouble> point;
        double norm = 0.0;
        for (int v = 2; v <= 2 * n - 1; ++v) {
            const cdouble val(dist(rng), dist(rng));
            point[detail::zvar(v)] = val;
            norm += std::norm(val);
        }
        if (norm < 1e-6) continue;
        double grad = 0.0;
        for (int v = 2; v <= 2 * n - 1; ++v)
            grad += std::abs(at_zero.partial_derivative(detail::zvar(v)).evaluate_c(point));
        samples_ok = samples_ok && (grad > 1e-9);
        ++rep.samples_checked;
    }
    rep.samples_passed = samples_ok;
    rep.passed = rep.partials_match && rep.triangular_forces_zero && rep.samples_passed;
    return rep;
}

// ---------------------------------------------------------------------------
// the alternating product map and fiber membership
// ---------------------------------------------------------------------------

/// psi(z1..z_{2n}) = U^-(z1) U^+(z2) ... U^-(z_{2n-1}) U^+(z_{2n}) on a chart.
inline MatrixField psi_eval(const std::vector<ScalarField>& zs, const NilpotentPair& pair,
                            std::size_t chart) {
    if (zs.empty() || zs.size() % 2 != 0)
        throw BadInput("psi_eval: need an even, nonzero number of parameter fields");
    const DomainPtr dom = pair.bundle->domain();
    MatrixField acc = MatrixField::identity(dom);
    for (std::size_t j = 0; j < zs.size(); ++j) {
        require_same_domain(zs[j].domain, dom, "psi_eval");
        const MatrixField& n = (j % 2 == 0) ? pair.n_minus[chart] : pair.n_plus[chart];
        for (std::size_t i = 0; i < dom->size(); ++i)
            acc.values[i] = acc.values[i] *
                            (Mat2d::identity() + zs[j].values[i] * n.values[i]);
    }
    return acc;
}

struct FiberReport {
    double max_residual = 0.0;
    bool on_singular_locus = false; // all middle parameters vanish somewhere
};

/// Residual of psi(z) against a target and whether z touches the locus
/// z2 = ... = z_{2n-1} = 0 at any sample.
inline FiberReport fiber_check(const MatrixField& target, const std::vector<ScalarField>& zs,
                               const NilpotentPair& pair, std::size_t chart,
                               double singular_tol = 1e-12) {
    const MatrixField prod = psi_eval(zs, pair, chart);
    FiberReport rep;
    rep.max_residual = prod.max_dist_to(target);
    const DomainPtr dom = target.domain;
    for (std::size_t i = 0; i < dom->size(); ++i) {
        bool all_zero = true;
        for (std::size_t j = 1; j + 1 < zs.size(); ++j)
            all_zero = all_zero && std::abs(zs[j].values[i]) <= singular_tol;
        if (all_zero) {
            rep.on_singular_locus = true;
            break;
        }
    }
    return rep;
}

struct BoundaryVars {
    ScalarField lower;  // elementary parameter of the leading lower factor
    ScalarField upper;  // elementary parameter of the trailing upper factor
    double eq1_residual = 0.0; // defect of 1 + f^2 a = Q11 (a constraint, not solved)
    double eq4_residual = 0.0; // defect of the (2,2) entry, implied by det = 1
};

/// Solve the two off-diagonal equations of the reduction for the boundary
/// parameters: with Q the middle product at the given z's,
///   lower = (f^2 c - Q21) / (1 + f^2 a),  upper = (f^2 b - Q12) / (1 + f^2 a).
/// The (2,2) equation is checked as a consequence, never solved.
inline BoundaryVars solve_boundary_vars(const std::vector<ScalarField>& z_mid,
                                        const ScalarField& a, const ScalarField& b,
                                        const ScalarField& c, const ScalarField& f,
                                        double pivot_floor = 1e-6) {
    if (z_mid.empty() || z_mid.size() % 2 != 0)
        throw BadInput("solve_boundary_vars: need an even number of middle parameters");
    const DomainPtr dom = f.domain;
    BoundaryVars out{ScalarField(dom), ScalarField(dom), 0.0, 0.0};
    for (std::size_t i = 0; i < dom->size(); ++i) {
        const cdouble fv = f.values[i];
        Mat2d q = Mat2d::identity();
        for (std::size_t j = 0; j < z_mid.size(); ++j) {
            const cdouble zf = z_mid[j].values[i] * fv;
            q = q * ((j % 2 == 0) ? Mat2d{1.0, zf, 0.0, 1.0} : Mat2d{1.0, 0.0, zf, 1.0});
        }
        const cdouble pivot = cdouble(1.0) + fv * fv * a.values[i];
        if (std::abs(pivot) < pivot_floor)
            throw PivotVanishes("solve_boundary_vars: 1 + f^2 a vanishes at sample " +
                                std::to_string(i));
        const cdouble z1 = (fv * fv * c.values[i] - q.a21) / pivot;
        const cdouble z2n = (fv * fv * b.values[i] - q.a12) / pivot;
        out.lower.values[i] = z1;
        out.upper.values[i] = z2n;
        out.eq1_residual = std::max(out.eq1_residual, std::abs(pivot - q.a11));
        // implied (2,2): assemble the full product and compare against the
        // det-1 completion d = (f^2 b c - a) / (1 + f^2 a)
        const Mat2d full = Mat2d{1.0, 0.0, z1, 1.0} * q * Mat2d{1.0, z2n, 0.0, 1.0};
        const cdouble d = (fv * fv * b.values[i] * c.values[i] - a.values[i]) / pivot;
        out.eq4_residual =
            std::max(out.eq4_residual, std::abs(full.a22 - (cdouble(1.0) + fv * fv * d)));
    }
    return out;
}

} // namespace unifact
