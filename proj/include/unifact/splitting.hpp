#pragma once

#include <string>
#include <vector>

#include "unifact/bundle.hpp"
#include "unifact/field.hpp"

namespace unifact {

/// One factor of the splitting: equal to Id on the zero set of its function,
/// together with a homotopy that is frozen at Id there for all times.
struct SuitableFactor {
    BundleMap map;
    BundleHomotopy homotopy;
    std::size_t zero_index = 0; // position of its function in the input list
};

struct SplitOptions {
    std::size_t radius = 3;   // dilation radius for the excised neighborhoods, in cells
    double zero_tol = 1e-12;
};

namespace detail {

inline BundleMap eval_bundle_warped(const BundleHomotopy& ht,
                                    const std::vector<double>& warp) {
    BundleMap r(ht.bundle);
    for (std::size_t c = 0; c < ht.bundle->chart_count(); ++c)
        r.charts[c] = ht.chart_homotopy(c).eval_warped(warp);
    return r;
}

inline std::vector<double> scaled_warp(const CutoffFunction& chi, double t) {
    std::vector<double> w(chi.values.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = t * chi.values[i];
    return w;
}

inline Region masked_zero_set(const ScalarField& f, const Region& y, double tol) {
    return f.zero_set(tol).intersect(y);
}

/// Base case: alpha = F_{chi}, beta = F_{chi}^{-1} F with homotopies
/// alpha_t = F_{t chi}, beta_t = F_{t chi}^{-1} F_t; alpha_t beta_t = F_t
/// holds at every sample and time.
inline std::vector<SuitableFactor> split_two_masked(const BundleMap& f_map,
                                                    const BundleHomotopy& f_t,
                                                    const std::vector<ScalarField>& fs,
                                                    const Region& y, const SplitOptions& opt) {
    const DomainPtr dom = f_t.bundle->domain();
    const Region a1 = masked_zero_set(fs[0], y, opt.zero_tol);
    const Region a2 = masked_zero_set(fs[1], y, opt.zero_tol);
    const Region u1 = a1.dilate(opt.radius);
    const Region u2 = a2.dilate(opt.radius);
    if (u1.intersects(u2))
        throw ZeroSetsIntersect("split: dilated zero sets intersect at the grid resolution");
    const CutoffFunction chi = make_cutoff(dom, u1, u2.complement());

    SuitableFactor alpha, beta;
    alpha.zero_index = 0;
    beta.zero_index = 1;
    alpha.homotopy.bundle = beta.homotopy.bundle = f_t.bundle;
    alpha.homotopy.times = beta.homotopy.times = f_t.times;
    for (std::size_t r = 0; r < f_t.frames.size(); ++r) {
        const BundleMap warped = eval_bundle_warped(f_t, scaled_warp(chi, f_t.times[r]));
        alpha.homotopy.frames.push_back(warped);
        beta.homotopy.frames.push_back(warped.inverse_map().compose(f_t.frames[r]));
    }
    alpha.map = alpha.homotopy.frames.back();
    beta.map = alpha.map.inverse_map().compose(f_map);
    return {std::move(alpha), std::move(beta)};
}

inline std::vector<SuitableFactor> split_masked(const BundleMap& f_map,
                                                const BundleHomotopy& f_t,
                                                const std::vector<ScalarField>& fs,
                                                const Region& y, const SplitOptions& opt) {
    const std::size_t m = fs.size();
    if (m == 2) return split_two_masked(f_map, f_t, fs, y, opt);
    const DomainPtr dom = f_t.bundle->domain();

    Region head_common = masked_zero_set(fs[0], y, opt.zero_tol);
    for (std::size_t i = 1; i + 1 < m; ++i)
        head_common = head_common.intersect(masked_zero_set(fs[i], y, opt.zero_tol));

    std::vector<ScalarField> head(fs.begin(), fs.end() - 1);
    if (head_common.empty()) {
        // the first m-1 functions already have no common zero here
        auto factors = split_masked(f_map, f_t, head, y, opt);
        SuitableFactor last;
        last.zero_index = m - 1;
        last.map = BundleMap::identity_map(f_t.bundle);
        last.homotopy.bundle = f_t.bundle;
        last.homotopy.times = f_t.times;
        last.homotopy.frames.assign(f_t.frames.size(), BundleMap::identity_map(f_t.bundle));
        factors.push_back(std::move(last));
        return factors;
    }

    // excise wide enough that the surviving zero sets, dilated by radius in
    // the recursive step, stay separated around the hole
    const Region u = head_common.dilate(2 * opt.radius + 1);
    const Region u0 = u.dilate(std::max<std::size_t>(opt.radius, 1));
    const Region am = masked_zero_set(fs[m - 1], y, opt.zero_tol);
    if (u0.intersects(am))
        throw NoSeparatingNeighborhood(
            "split: the excised neighborhood cannot avoid the last zero set at the grid "
            "resolution");
    const CutoffFunction chi = make_cutoff(dom, u, u0);
    const Region y_rest = y.subtract(u);

    auto inner = split_masked(f_map, f_t, head, y_rest, opt);

    std::vector<SuitableFactor> factors;
    factors.reserve(m);
    for (auto& g : inner) {
        SuitableFactor patched;
        patched.zero_index = g.zero_index;
        patched.homotopy.bundle = f_t.bundle;
        patched.homotopy.times = f_t.times;
        for (std::size_t r = 0; r < f_t.frames.size(); ++r)
            patched.homotopy.frames.push_back(
                eval_bundle_warped(g.homotopy, scaled_warp(chi, f_t.times[r])));
        patched.map = patched.homotopy.frames.back();
        factors.push_back(std::move(patched));
    }
    // last factor absorbs whatever the patched product misses
    SuitableFactor last;
    last.zero_index = m - 1;
    last.homotopy.bundle = f_t.bundle;
    last.homotopy.times = f_t.times;
    for (std::size_t r = 0; r < f_t.frames.size(); ++r) {
        BundleMap acc = BundleMap::identity_map(f_t.bundle);
        for (const auto& g : factors) acc = acc.compose(g.homotopy.frames[r]);
        last.homotopy.frames.push_back(acc.inverse_map().compose(f_t.frames[r]));
    }
    // defined against the endpoint map itself so the product reproduces it
    // exactly even when the input homotopy carries an endpoint defect
    {
        BundleMap acc = BundleMap::identity_map(f_t.bundle);
        for (const auto& g : factors) acc = acc.compose(g.map);
        last.map = acc.inverse_map().compose(f_map);
    }
    factors.push_back(std::move(last));
    return factors;
}

} // namespace detail

/// Split a null-homotopic map into two factors with alpha = Id on {f1 = 0}
/// and beta = Id on {f2 = 0}, both strongly null-homotopic.
inline std::pair<SuitableFactor, SuitableFactor> split_two(const BundleMap& f_map,
                                                           const BundleHomotopy& f_t,
                                                           const ScalarField& f1,
                                                           const ScalarField& f2,
                                                           const SplitOptions& opt = {}) {
    f_t.validate_shape();
    const Region full(f_t.bundle->domain(), true);
    auto v = detail::split_two_masked(f_map, f_t, {f1, f2}, full, opt);
    return {std::move(v[0]), std::move(v[1])};
}

/// General case by excision of the mutual zero neighborhood, as a recursion
/// on the number of functions. The functions must have no common zero.
inline std::vector<SuitableFactor> split_general(const BundleMap& f_map,
                                                 const BundleHomotopy& f_t,
                                                 const std::vector<ScalarField>& fs,
                                                 const SplitOptions& opt = {}) {
    if (fs.size() < 2) throw BadInput("split_general: need at least two functions");
    f_t.validate_shape();
    const DomainPtr dom = f_t.bundle->domain();
    Region common(dom, true);
    for (const auto& f : fs) common = common.intersect(f.zero_set(opt.zero_tol));
    if (!common.empty()) throw CommonZero("split_general: the functions share a zero sample");
    return detail::split_masked(f_map, f_t, fs, Region(dom, true), opt);
}

// ---------------------------------------------------------------------------
// divisibility upgrade by tapering
// ---------------------------------------------------------------------------

struct TaperOptions {
    std::size_t radius = 3;    // sets the initial taper band from the zero set
    double zero_tol = 1e-12;
    int order = 4;             // required decay order along the zero set
    double log_radius = 0.45;  // the taper needs log to be defined on its band
};

struct UpgradeNote {
    std::size_t factor = 0;
    double exponent_before = 0.0;
    double exponent_after = 0.0;
    bool tapered = false;
    std::string detail;
};

struct UpgradeResult {
    std::vector<SuitableFactor> factors;
    std::vector<UpgradeNote> notes;
};

namespace detail {

inline ScalarField identity_defect_field(const BundleMap& g) {
    ScalarField out(g.bundle->domain());
    const Mat2d id = Mat2d::identity();
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const std::size_t c = g.bundle->primary_chart(i);
        out.values[i] = max_abs(g.charts[c].values[i] - id);
    }
    return out;
}

inline void taper_map_in_place(BundleMap& g, const std::vector<double>& tau) {
    for (std::size_t c = 0; c < g.charts.size(); ++c) {
        const Region& region = g.bundle->chart(c).region;
        for (std::size_t i = 0; i < tau.size(); ++i) {
            if (!region.contains(i) || tau[i] >= 1.0) continue;
            if (tau[i] == 0.0) {
                g.charts[c].values[i] = Mat2d::identity();
                continue;
            }
            const Mat2d l = log_near_identity(g.charts[c].values[i]);
            g.charts[c].values[i] = exp_mat2(cdouble(tau[i]) * l);
        }
    }
}

} // namespace detail

/// Raise the decay order of each factor along its zero set to `order`.
/// Factors that already pass the decay test are untouched; otherwise the
/// factor is damped by exp(tau * log G) with tau = min(1, |f_i|/band)^order
/// and the exact difference is pushed into a neighboring factor whose zero
/// set stays clear of the band, so the product is preserved.
inline UpgradeResult upgrade_divisibility(std::vector<SuitableFactor> factors,
                                          const std::vector<ScalarField>& fs,
                                          const TaperOptions& opt = {}) {
    UpgradeResult res;
    const std::size_t m = factors.size();
    for (std::size_t i = 0; i < m; ++i) {
        UpgradeNote note;
        note.factor = i;
        const ScalarField& fi = fs[factors[i].zero_index];
        const Region zero = fi.zero_set(opt.zero_tol);
        if (zero.empty()) {
            note.detail = "zero set empty, divisibility vacuous";
            res.notes.push_back(note);
            continue;
        }
        double band = fi.max_abs_on(zero.dilate(opt.radius));
        if (band <= 0.0) throw CannotTaper("upgrade: f vanishes on the whole taper band");
        const ScalarField defect = detail::identity_defect_field(factors[i].map);
        const auto pre = vanish_order(defect, fi, opt.order, band * (1.0 + 1e-12));
        note.exponent_before = pre.exponent;
        if (pre.passed) {
            note.exponent_after = pre.exponent;
            note.detail = pre.identically_zero ? "identity defect vanishes on the band"
                                               : "decay order already sufficient";
            res.notes.push_back(note);
            continue;
        }
        if (m == 1)
            throw CannotTaper("upgrade: single factor fails the decay test and there is no "
                              "neighboring factor to compensate into");
        // shrink the band until every homotopy frame is log-safe on it
        bool ok = false;
        for (int tries = 0; tries < 60; ++tries) {
            const Region support = Region::from_predicate(
                fi.domain, [&](std::size_t s) { return std::abs(fi.values[s]) < band; });
            double worst = 0.0;
            for (const auto& fr : factors[i].homotopy.frames)
                worst = std::max(worst, fr.max_dist_to_identity_on(support));
            if (worst <= opt.log_radius) {
                ok = true;
                break;
            }
            band *= 0.5;
        }
        if (!ok) throw CannotTaper("upgrade: no taper band keeps the homotopy log-safe");
        const Region support = Region::from_predicate(
            fi.domain, [&](std::size_t s) { return std::abs(fi.values[s]) < band; });
        const std::size_t j = (i + 1 < m) ? i + 1 : i - 1;
        const Region aj = fs[factors[j].zero_index].zero_set(opt.zero_tol);
        if (support.intersects(aj))
            throw CannotTaper("upgrade: taper band reaches the neighboring zero set");

        std::vector<double> tau(fi.values.size(), 1.0);
        for (std::size_t s = 0; s < tau.size(); ++s) {
            const double t = std::min(1.0, std::abs(fi.values[s]) / band);
            double p = 1.0;
            for (int k = 0; k < opt.order; ++k) p *= t;
            tau[s] = p;
        }

        SuitableFactor tapered = factors[i];
        detail::taper_map_in_place(tapered.map, tau);
        for (auto& fr : tapered.homotopy.frames) detail::taper_map_in_place(fr, tau);

        if (j == i + 1) {
            // G_i G_{i+1} = G_i^tap (C G_{i+1}) with C = (G_i^tap)^{-1} G_i
            const BundleMap c0 = tapered.map.inverse_map().compose(factors[i].map);
            factors[j].map = c0.compose(factors[j].map);
            for (std::size_t r = 0; r < factors[j].homotopy.frames.size(); ++r) {
                const BundleMap cr = tapered.homotopy.frames[r].inverse_map().compose(
                    factors[i].homotopy.frames[r]);
                factors[j].homotopy.frames[r] = cr.compose(factors[j].homotopy.frames[r]);
            }
        } else {
            // G_{m-2} G_{m-1} = (G_{m-2} D) G_{m-1}^tap with D = G_{m-1} (G_{m-1}^tap)^{-1}
            const BundleMap d0 = factors[i].map.compose(tapered.map.inverse_map());
            factors[j].map = factors[j].map.compose(d0);
            for (std::size_t r = 0; r < factors[j].homotopy.frames.size(); ++r) {
                const BundleMap dr = factors[i].homotopy.frames[r].compose(
                    tapered.homotopy.frames[r].inverse_map());
                factors[j].homotopy.frames[r] = factors[j].homotopy.frames[r].compose(dr);
            }
        }
        factors[i] = std::move(tapered);
        const auto post =
            vanish_order(detail::identity_defect_field(factors[i].map), fi, opt.order,
                         band * (1.0 + 1e-12));
        note.exponent_after = post.exponent;
        note.tapered = true;
        if (!post.passed)
            throw CannotTaper("upgrade: decay order still short after tapering (exponent " +
                              std::to_string(post.exponent) + ")");
        note.detail = "tapered to the required order";
        res.notes.push_back(note);
    }
    res.factors = std::move(factors);
    return res;
}

} // namespace unifact
