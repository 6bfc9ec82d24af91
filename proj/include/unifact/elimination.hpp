#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "unifact/bundle.hpp"
#include "unifact/field.hpp"
#include "unifact/polynomial.hpp"

namespace unifact {

// ---------------------------------------------------------------------------
// four-factor elimination, scalar mode
// ---------------------------------------------------------------------------

/// Parameters of Lower(z1) * Upper(z2) * Lower(z3) * Upper(z4).
struct EliminationQuad {
    cdouble z1{0.0}, z2{0.0}, z3{0.0}, z4{0.0};
};

inline Mat2d quad_product(const EliminationQuad& q) {
    const Mat2d l1{1.0, 0.0, q.z1, 1.0};
    const Mat2d u2{1.0, q.z2, 0.0, 1.0};
    const Mat2d l3{1.0, 0.0, q.z3, 1.0};
    const Mat2d u4{1.0, q.z4, 0.0, 1.0};
    return l1 * u2 * l3 * u4;
}

/// Solve A = L(z1) U(z2) L(z3) U(z4) for det-1 A with nonvanishing upper-left
/// entry. The choice z2 = sqrt|a-1|, z3 = (a-1)/sqrt|a-1| keeps all four
/// parameters continuous in A and exactly zero at A = Id.
inline EliminationQuad eliminate_four(const Mat2d& m, double pivot_floor = 1e-6) {
    if (std::abs(m.a11) < pivot_floor)
        throw SmallPivot("eliminate_four: |a| = " + std::to_string(std::abs(m.a11)) +
                         " below pivot floor");
    EliminationQuad q;
    const cdouble r = m.a11 - cdouble(1.0);
    const double mag = std::sqrt(std::abs(r));
    q.z2 = mag;
    q.z3 = (mag == 0.0) ? cdouble(0.0) : r / mag;
    q.z1 = (m.a21 - q.z3) / m.a11;
    q.z4 = (m.a12 - q.z2) / m.a11;
    return q;
}

/// Corrected special Whitehead quad: four elementary factors whose product is
/// diag(lambda, 1/lambda) with all parameters vanishing at lambda = 1. This is
/// eliminate_four specialized to the diagonal matrix.
inline EliminationQuad whitehead_diag(cdouble lambda) {
    if (lambda == cdouble(0.0)) throw SmallPivot("whitehead_diag: lambda = 0");
    EliminationQuad q;
    const cdouble r = lambda - cdouble(1.0);
    const double mag = std::sqrt(std::abs(r));
    q.z2 = mag;
    q.z3 = (mag == 0.0) ? cdouble(0.0) : r / mag;
    q.z1 = -q.z3 / lambda;
    q.z4 = -q.z2 / lambda;
    return q;
}

/// Ring-generic Whitehead quad. Works over any ring but does not satisfy the
/// interpolation condition: the third parameter is 1 even at lambda = 1.
inline EliminationQuad whitehead_standard(cdouble lambda) {
    if (lambda == cdouble(0.0)) throw SmallPivot("whitehead_standard: lambda = 0");
    EliminationQuad q;
    q.z1 = -1.0 / lambda;
    q.z2 = lambda - 1.0;
    q.z3 = 1.0;
    q.z4 = 1.0 / lambda - 1.0;
    return q;
}

// ---------------------------------------------------------------------------
// field mode
// ---------------------------------------------------------------------------

struct EliminationQuadField {
    ScalarField z1, z2, z3, z4;

    explicit EliminationQuadField(const DomainPtr& dom) : z1(dom), z2(dom), z3(dom), z4(dom) {}
};

/// Pointwise eliminate_four over a matrix field, restricted to a mask when
/// one is given (parameters are zero off the mask).
inline EliminationQuadField eliminate_four_field(const MatrixField& m, double pivot_floor,
                                                 const Region* where = nullptr) {
    EliminationQuadField q(m.domain);
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        if (where && !where->contains(i)) continue;
        const EliminationQuad qi = eliminate_four(m.values[i], pivot_floor);
        q.z1.values[i] = qi.z1;
        q.z2.values[i] = qi.z2;
        q.z3.values[i] = qi.z3;
        q.z4.values[i] = qi.z4;
    }
    return q;
}

/// Divisible variant: solve
///   Id + f^3 f_i [[a,b],[c,d]] = L(f z1) U(f z2) L(f z3) U(f z4)
/// with z2 = sqrt|a f_i f|, z3 = a f_i f / sqrt|a f_i f|,
/// z1 = (f^2 f_i c - z3) / (1 + f^3 f_i a), z4 = (f^2 f_i b - z2) / (same).
/// All parameters vanish wherever a = b = c = d = 0.
inline EliminationQuadField eliminate_four_divisible(const ScalarField& a, const ScalarField& b,
                                                     const ScalarField& c, const ScalarField& d,
                                                     const ScalarField& f, const ScalarField& fi,
                                                     double pivot_floor = 1e-6,
                                                     const Region* where = nullptr) {
    require_same_domain(a.domain, f.domain, "eliminate_four_divisible");
    require_same_domain(fi.domain, f.domain, "eliminate_four_divisible");
    (void)d;
    EliminationQuadField q(a.domain);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (where && !where->contains(i)) continue;
        const cdouble fv = f.values[i];
        const cdouble fiv = fi.values[i];
        const cdouble w = a.values[i] * fiv * fv;
        const cdouble pivot = cdouble(1.0) + fv * fv * w; // 1 + f^3 f_i a
        if (std::abs(pivot) < pivot_floor)
            throw PivotVanishes("eliminate_four_divisible: 1 + f^3 f_i a vanishes at sample " +
                                std::to_string(i));
        const double mag = std::sqrt(std::abs(w));
        const cdouble z2 = mag;
        const cdouble z3 = (mag == 0.0) ? cdouble(0.0) : w / mag;
        q.z2.values[i] = z2;
        q.z3.values[i] = z3;
        q.z1.values[i] = (fv * fv * fiv * c.values[i] - z3) / pivot;
        q.z4.values[i] = (fv * fv * fiv * b.values[i] - z2) / pivot;
    }
    return q;
}

// ---------------------------------------------------------------------------
// homotopy subdivision
// ---------------------------------------------------------------------------

struct SubdivisionResult {
    std::vector<std::size_t> breakpoints; // frame indices, first = 0, last = final frame
    std::vector<double> step_closeness;   // sup norm closeness per step

    std::size_t step_count() const { return breakpoints.size() - 1; }
};

inline double frame_closeness(const HomotopyField& u, std::size_t lo, std::size_t hi) {
    double worst = 0.0;
    const MatrixField& a = u.frames[lo];
    const MatrixField& b = u.frames[hi];
    for (std::size_t i = 0; i < a.values.size(); ++i)
        worst = std::max(worst, op_norm(b.values[i] * inverse(a.values[i]) - Mat2d::identity()));
    return worst;
}

/// Greedy breakpoints with sup_x || U_{t+} U_t^{-1} - Id || <= eps per step.
/// From each breakpoint the scan extends as far as the bound allows, which
/// minimizes the count for monotone gaps.
inline SubdivisionResult subdivide_homotopy(const HomotopyField& u, double eps = 0.5) {
    const std::size_t last = u.frame_count() - 1;
    SubdivisionResult res;
    res.breakpoints.push_back(0);
    std::size_t cur = 0;
    while (cur < last) {
        if (frame_closeness(u, cur, cur + 1) > eps) {
            throw CannotSatisfy("subdivide_homotopy: adjacent frames " + std::to_string(cur) +
                                "," + std::to_string(cur + 1) + " are " +
                                std::to_string(frame_closeness(u, cur, cur + 1)) +
                                " apart, above eps = " + std::to_string(eps) +
                                "; time sampling too coarse");
        }
        std::size_t next = cur + 1;
        while (next < last && frame_closeness(u, cur, next + 1) <= eps) ++next;
        res.step_closeness.push_back(frame_closeness(u, cur, next));
        res.breakpoints.push_back(next);
        cur = next;
    }
    return res;
}

// ---------------------------------------------------------------------------
// near-identity factorization
// ---------------------------------------------------------------------------

struct ReplicaParam {
    ReplicaSign sign;
    ScalarField h;
};

namespace detail {

/// Elementary parameter field -> replica parameter: divide by f away from its
/// zero samples, extend by zero across them. Zeros of f outside the identity
/// neighborhood break the construction and are rejected.
inline ScalarField elementary_to_replica(const ScalarField& zeta, const ScalarField& f,
                                         const Region& id_nbhd, double zero_tol) {
    ScalarField h(zeta.domain);
    for (std::size_t i = 0; i < zeta.values.size(); ++i) {
        if (id_nbhd.contains(i) && zeta.values[i] == cdouble(0.0)) {
            h.values[i] = 0.0;
            continue;
        }
        if (std::abs(f.values[i]) <= zero_tol) {
            if (std::abs(zeta.values[i]) <= zero_tol) {
                h.values[i] = 0.0;
                continue;
            }
            throw CoverDoesNotContainZeroSet(
                "replica extension: f vanishes at sample " + std::to_string(i) +
                " where the elementary parameter does not");
        }
        h.values[i] = zeta.values[i] / f.values[i];
    }
    return h;
}

} // namespace detail

struct NearIdentityOptions {
    double pivot_floor = 0.25; // |a| >= 1/2 is guaranteed by eps <= 1/2
    double zero_tol = 1e-12;
};

/// Factor U_1 * U_0^{-1} into elementary quads along the subdivision and
/// convert to replica parameters. The emitted list, multiplied in order,
/// reconstructs the endpoint quotient:
///   U_1 = (H_{n-1}) (H_{n-2}) ... (H_0),  H_s = U_{t_{s+1}} U_{t_s}^{-1}.
inline std::vector<ReplicaParam> factor_near_identity(const HomotopyField& u,
                                                      const SubdivisionResult& sub,
                                                      const ScalarField& f,
                                                      const Region& id_nbhd,
                                                      const NearIdentityOptions& opt = {}) {
    require_same_domain(u.domain(), f.domain, "factor_near_identity");
    std::vector<ReplicaParam> out;
    const std::size_t steps = sub.step_count();
    for (std::size_t s = steps; s-- > 0;) {
        const std::size_t lo = sub.breakpoints[s];
        const std::size_t hi = sub.breakpoints[s + 1];
        MatrixField h(u.domain());
        for (std::size_t i = 0; i < h.values.size(); ++i)
            h.values[i] = u.frames[hi].values[i] * inverse(u.frames[lo].values[i]);
        const EliminationQuadField q = eliminate_four_field(h, opt.pivot_floor);
        auto push = [&](ReplicaSign sign, const ScalarField& z) {
            ScalarField hf = detail::elementary_to_replica(z, f, id_nbhd, opt.zero_tol);
            if (hf.max_abs() == 0.0) return; // exactly trivial factor
            out.push_back({sign, std::move(hf)});
        };
        push(ReplicaSign::Minus, q.z1);
        push(ReplicaSign::Plus, q.z2);
        push(ReplicaSign::Minus, q.z3);
        push(ReplicaSign::Plus, q.z4);
    }
    return out;
}

// ---------------------------------------------------------------------------
// SU(2) reduction
// ---------------------------------------------------------------------------

struct Su2Options {
    double zero_tol = 1e-12;
    double snap_tol = 1e-12;   // peel parameters at or below this collapse to 0
    double near_tol = 1e-8;    // allowed defect of Id on the declared neighborhood
    double unitary_tol = 1e-10;
};

struct Su2Reduction {
    HomotopyField unitary;            // SU(2)-valued homotopy
    std::vector<ReplicaParam> peel;   // endpoint = unitary endpoint * product(peel)
};

/// Peel each frame into Q * R by qr_su2 and keep Q. The endpoint R factors
/// as diag(r11, 1/r11) * Upper(r12/r11); the diagonal goes through the
/// Whitehead quad and everything is divided by f and extended by zero.
inline Su2Reduction reduce_to_su2(const HomotopyField& ghat, const ScalarField& f,
                                  const Region& id_nbhd, const Su2Options& opt = {}) {
    require_same_domain(ghat.domain(), f.domain, "reduce_to_su2");
    const DomainPtr dom = ghat.domain();
    Su2Reduction res;
    res.unitary.times = ghat.times;
    ScalarField lambda(dom, 1.0), upper(dom, 0.0);
    for (std::size_t r = 0; r < ghat.frame_count(); ++r) {
        MatrixField q(dom);
        const bool endpoint = (r + 1 == ghat.frame_count());
        for (std::size_t i = 0; i < dom->size(); ++i) {
            const Mat2d& g = ghat.frames[r].values[i];
            if (id_nbhd.contains(i)) {
                if (op_norm(g - Mat2d::identity()) > opt.near_tol)
                    throw NotIdentityNearZeroSet(
                        "reduce_to_su2: frame " + std::to_string(r) + " is not Id at sample " +
                        std::to_string(i) + " inside the declared neighborhood");
                q.values[i] = Mat2d::identity();
                continue;
            }
            const QrSu2 qr = qr_su2(g);
            q.values[i] = qr.q;
            if (endpoint) {
                cdouble lam = qr.r.a11;
                cdouble u = qr.r.a12 / qr.r.a11;
                if (std::abs(lam - cdouble(1.0)) <= opt.snap_tol) lam = 1.0;
                if (std::abs(u) <= opt.snap_tol) u = 0.0;
                lambda.values[i] = lam;
                upper.values[i] = u;
            }
        }
        res.unitary.frames.push_back(std::move(q));
    }
    for (const auto& frame : res.unitary.frames)
        for (const auto& m : frame.values)
            if (!is_su2(m, opt.unitary_tol))
                throw Error("reduce_to_su2: peeled frame left SU(2)");
    // endpoint peel: Whitehead quad for the diagonal, then the upper factor
    EliminationQuadField wh(dom);
    for (std::size_t i = 0; i < dom->size(); ++i) {
        const EliminationQuad qi = whitehead_diag(lambda.values[i]);
        wh.z1.values[i] = qi.z1;
        wh.z2.values[i] = qi.z2;
        wh.z3.values[i] = qi.z3;
        wh.z4.values[i] = qi.z4;
    }
    auto push = [&](ReplicaSign sign, const ScalarField& z) {
        ScalarField hf = detail::elementary_to_replica(z, f, id_nbhd, opt.zero_tol);
        if (hf.max_abs() == 0.0) return;
        res.peel.push_back({sign, std::move(hf)});
    };
    push(ReplicaSign::Minus, wh.z1);
    push(ReplicaSign::Plus, wh.z2);
    push(ReplicaSign::Minus, wh.z3);
    push(ReplicaSign::Plus, wh.z4);
    push(ReplicaSign::Plus, upper);
    return res;
}

// ---------------------------------------------------------------------------
// localization to the identity near the zero set
// ---------------------------------------------------------------------------

struct CoverElement {
    std::size_t chart;
    Region omega;       // where the factorization is enforced
    Region omega_tilde; // where the cutoff decays to zero; inside the chart
};

struct LocalizeOptions {
    double pivot_floor = 1e-6;
    double zero_tol = 1e-12;
    double tol = 1e-10;
};

struct LocalizeResult {
    std::vector<Replica> replicas; // input = g_prime * product(replicas)
    BundleMap g_prime;
    BundleHomotopy homotopy;       // strong null-homotopy of g_prime
};

/// Multiply G by cutoff replicas until it is the identity on the union of
/// the cover patches, which must contain the zero set of the pair's f.
/// Each pass solves the divisible elimination in the chart of its patch and
/// fades the parameters out with a cutoff; the homotopy is updated with the
/// t-scaled replicas so strong nullity is preserved.
inline LocalizeResult localize_to_identity(const BundleMap& g, const BundleHomotopy& g_t,
                                           const PairPtr& pair,
                                           const std::vector<CoverElement>& cover,
                                           const LocalizeOptions& opt = {}) {
    const BundlePtr bundle = pair->bundle;
    const DomainPtr dom = bundle->domain();
    const ScalarField& f = pair->f;
    const double ztol = opt.zero_tol * (1.0 + f.max_abs());
    const Region zero = f.zero_set(ztol);
    Region covered(dom);
    for (const auto& el : cover) covered = covered.unite(el.omega);
    if (!zero.is_subset_of(covered))
        throw CoverDoesNotContainZeroSet("localize: cover misses part of the zero set of f");

    LocalizeResult res;
    res.g_prime = g;
    res.homotopy = g_t;
    for (const auto& el : cover) {
        const std::size_t c = el.chart;
        if (!el.omega.is_subset_of(el.omega_tilde) ||
            !el.omega_tilde.is_subset_of(bundle->chart(c).region))
            throw BadInput("localize: cover patches must nest inside their chart");
        const MatrixField& s = pair->sections.section_matrix[c];
        const ScalarField& fi = pair->f_chart[c];
        const MatrixField& mat = res.g_prime.charts[c];
        // cofactor fields: [[a,b],[c,d]] = adj(S) (Mat - Id) S / f^4
        ScalarField ca(dom), cb(dom), cc(dom), cd(dom);
        for (std::size_t i = 0; i < dom->size(); ++i) {
            if (!el.omega_tilde.contains(i)) continue;
            const cdouble fv = f.values[i];
            if (std::abs(fv) <= ztol) continue; // parameters vanish there anyway
            const cdouble f4 = fv * fv * fv * fv;
            const Mat2d w = s.values[i].adjugate() * (mat.values[i] - Mat2d::identity()) *
                            s.values[i];
            ca.values[i] = w.a11 / f4;
            cb.values[i] = w.a12 / f4;
            cc.values[i] = w.a21 / f4;
            cd.values[i] = w.a22 / f4;
        }
        const EliminationQuadField q = eliminate_four_divisible(ca, cb, cc, cd, f, fi,
                                                                opt.pivot_floor,
                                                                &el.omega_tilde);
        const CutoffFunction chi =
            make_cutoff(dom, el.omega, el.omega_tilde).complement_profile();
        auto fade = [&](const ScalarField& z) {
            ScalarField h(dom);
            for (std::size_t i = 0; i < dom->size(); ++i)
                h.values[i] = chi.values[i] == 0.0 ? cdouble(0.0)
                                                   : chi.values[i] * z.values[i];
            return h;
        };
        std::vector<Replica> pass;
        auto push = [&](ReplicaSign sign, ScalarField h) {
            if (h.max_abs() == 0.0) return; // exactly trivial factor
            pass.push_back({pair, sign, std::move(h)});
        };
        push(ReplicaSign::Minus, fade(q.z1));
        push(ReplicaSign::Plus, fade(q.z2));
        push(ReplicaSign::Minus, fade(q.z3));
        push(ReplicaSign::Plus, fade(q.z4));
        if (pass.empty()) continue; // this patch already carries the identity
        // G <- G * (U1 U2 U3 U4)^{-1}; the quad is prepended to the list
        BundleMap correction = replica_product(pass, bundle).inverse_map();
        res.g_prime = res.g_prime.compose(correction);
        for (std::size_t r = 0; r < res.homotopy.frames.size(); ++r) {
            const double t = res.homotopy.times[r];
            std::vector<Replica> scaled;
            scaled.reserve(4);
            for (const auto& rep : pass)
                scaled.push_back({pair, rep.sign, cdouble(t) * rep.h});
            res.homotopy.frames[r] =
                res.homotopy.frames[r].compose(replica_product(scaled, bundle).inverse_map());
        }
        res.replicas.insert(res.replicas.begin(), pass.begin(), pass.end());
        const double defect = res.g_prime.max_dist_to_identity_on(el.omega);
        if (defect > opt.tol * 100.0)
            throw Error("localize: pass left a defect of " + std::to_string(defect) +
                        " on its patch");
    }
    return res;
}

// ---------------------------------------------------------------------------
// divisibility facts behind the localization quad
// ---------------------------------------------------------------------------

struct DivisibilityReport {
    bool z2z3_divisible = false;
    bool z2_plus_z4_divisible = false;
    std::string z2z3_cofactor;
    std::string z2_plus_z4_cofactor;
    bool passed = false;
};

/// Exact polynomial form of the two facts driving the f^4 bound:
/// z2 z3 = a f_i f is divisible by f_i f, and
/// (z2 + z4)(1 + f^3 f_i a) = w f^3 f_i a + f^2 f_i b   (w stands for z2)
/// is divisible by f^2 f_i. Both divisions are exact or the report fails.
inline DivisibilityReport verify_divisibility_lemmas() {
    const Polynomial a = Polynomial::variable("a");
    const Polynomial b = Polynomial::variable("b");
    const Polynomial f = Polynomial::variable("f");
    const Polynomial fi = Polynomial::variable("fi");
    const Polynomial w = Polynomial::variable("w");
    DivisibilityReport rep;
    const Polynomial z2z3 = a * fi * f;
    try {
        const Polynomial cof = divide_exact(z2z3, fi * f);
        rep.z2z3_divisible = (cof == a);
        rep.z2z3_cofactor = cof.str();
    } catch (const NotDivisible&) {
        rep.z2z3_divisible = false;
    }
    const Polynomial numer = w * f.pow(3) * fi * a + f.pow(2) * fi * b;
    try {
        const Polynomial cof = divide_exact(numer, f.pow(2) * fi);
        rep.z2_plus_z4_divisible = (cof == w * f * a + b);
        rep.z2_plus_z4_cofactor = cof.str();
    } catch (const NotDivisible&) {
        rep.z2_plus_z4_divisible = false;
    }
    rep.passed = rep.z2z3_divisible && rep.z2_plus_z4_divisible;
    return rep;
}

/// Sampled surrogate of the same two facts for a concrete quad.
inline DivisibilityReport verify_divisibility_lemmas(const EliminationQuadField& quad,
                                                     const ScalarField& f,
                                                     const ScalarField& fi, double band) {
    DivisibilityReport rep;
    const auto r1 = vanish_order(quad.z2 * quad.z3, f * fi, 1, band);
    rep.z2z3_divisible = r1.passed;
    const auto r2 = vanish_order(quad.z2 + quad.z4, f * f * fi, 1, band);
    rep.z2_plus_z4_divisible = r2.passed;
    rep.passed = rep.z2z3_divisible && rep.z2_plus_z4_divisible;
    return rep;
}

/// det-1 inference: if g divides the three entries a11, a12, a21 of M - Id
/// and det M = 1 exactly, then g divides the last entry. Verified by exact
/// division on the given instance.
inline bool lemma_last_entry_division(const Mat2<Polynomial>& m, const Polynomial& g) {
    const Polynomial one = Polynomial::constant(1);
    if (!(m.det() == one)) throw BadInput("lemma_last_entry_division: det != 1");
    divide_exact(m.a11 - one, g);
    divide_exact(m.a12, g);
    divide_exact(m.a21, g);
    divide_exact(m.a22 - one, g); // the inference under test
    return true;
}

} // namespace unifact
