#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "unifact/field.hpp"

namespace unifact {

struct Chart {
    std::string id;
    Region region;
};

/// Rank-2 bundle data over a grid domain: charts with transition matrices
/// on overlaps. transition(i,j) is T with s^i = T * s^j on the overlap and
/// the cocycle rule T_ik = T_ij * T_jk.
class ChartBundle {
public:
    ChartBundle(DomainPtr domain, std::vector<Chart> charts)
        : domain_(std::move(domain)), charts_(std::move(charts)) {
        if (charts_.empty()) throw BadInput("bundle: need at least one chart");
        Region covered(domain_);
        for (const auto& c : charts_) {
            require_same_domain(c.region.domain, domain_, "bundle chart region");
            covered = covered.unite(c.region);
        }
        if (!covered.complement().empty()) throw BadInput("bundle: charts do not cover the domain");
    }

    static std::shared_ptr<ChartBundle> trivial(const DomainPtr& dom) {
        return std::make_shared<ChartBundle>(dom,
                                             std::vector<Chart>{{"chart0", Region(dom, true)}});
    }

    const DomainPtr& domain() const { return domain_; }
    std::size_t chart_count() const { return charts_.size(); }
    const Chart& chart(std::size_t i) const { return charts_[i]; }
    const std::vector<Chart>& charts() const { return charts_; }

    Region overlap(std::size_t i, std::size_t j) const {
        return charts_[i].region.intersect(charts_[j].region);
    }

    void set_transition(std::size_t i, std::size_t j, MatrixField t) {
        require_same_domain(t.domain, domain_, "bundle transition");
        transitions_[{i, j}] = std::move(t);
    }

    /// Transition i <- j; the identity on the diagonal, stored value or the
    /// pointwise inverse of the reverse direction otherwise.
    MatrixField transition(std::size_t i, std::size_t j) const {
        if (i == j) return MatrixField::identity(domain_);
        auto it = transitions_.find({i, j});
        if (it != transitions_.end()) return it->second;
        it = transitions_.find({j, i});
        if (it == transitions_.end()) throw BadInput("bundle: missing transition");
        MatrixField inv(domain_);
        const Region ov = overlap(i, j);
        for (std::size_t s = 0; s < domain_->size(); ++s)
            inv.values[s] = ov.contains(s) ? inverse(it->second.values[s]) : Mat2d::identity();
        return inv;
    }

    ScalarField determinant_cocycle(std::size_t i, std::size_t j) const {
        return transition(i, j).det_field();
    }

    /// Chart with the lowest index containing the sample; every automorphism
    /// metric below sweeps charts directly, this is for frame choices.
    std::size_t primary_chart(std::size_t sample) const {
        for (std::size_t c = 0; c < charts_.size(); ++c)
            if (charts_[c].region.contains(sample)) return c;
        throw BadInput("bundle: sample not covered by any chart");
    }

    /// Cocycle identity on triple overlaps, invertibility on overlaps.
    double validate(double tol = 1e-9) const {
        double worst = 0.0;
        for (std::size_t i = 0; i < charts_.size(); ++i)
            for (std::size_t j = 0; j < charts_.size(); ++j) {
                if (i == j) continue;
                const Region ov = overlap(i, j);
                if (ov.empty()) continue;
                const MatrixField tij = transition(i, j);
                for (std::size_t s = 0; s < domain_->size(); ++s) {
                    if (!ov.contains(s)) continue;
                    if (std::abs(tij.values[s].det()) <= 1e-14)
                        throw BadInput("bundle: transition not invertible on overlap");
                }
                for (std::size_t k = 0; k < charts_.size(); ++k) {
                    if (k == i || k == j) continue;
                    const Region triple = ov.intersect(charts_[k].region);
                    if (triple.empty()) continue;
                    const MatrixField tik = transition(i, k);
                    const MatrixField tjk = transition(j, k);
                    for (std::size_t s = 0; s < domain_->size(); ++s) {
                        if (!triple.contains(s)) continue;
                        const double err =
                            op_norm(tik.values[s] - tij.values[s] * tjk.values[s]);
                        worst = std::max(worst, err);
                    }
                }
            }
        if (worst > tol)
            throw BadInput("bundle: cocycle identity violated, worst error " +
                           std::to_string(worst));
        return worst;
    }

private:
    DomainPtr domain_;
    std::vector<Chart> charts_;
    std::map<std::pair<std::size_t, std::size_t>, MatrixField> transitions_;
};

using BundlePtr = std::shared_ptr<const ChartBundle>;

/// Two sections per chart, stored as the columns of S_i. Compatible when
/// S^i = T_ij * S^j on overlaps.
struct SectionPair {
    BundlePtr bundle;
    std::vector<MatrixField> section_matrix; // one per chart

    double validate(double tol = 1e-9) const {
        double worst = 0.0;
        const auto& b = *bundle;
        for (std::size_t i = 0; i < b.chart_count(); ++i)
            for (std::size_t j = i + 1; j < b.chart_count(); ++j) {
                const Region ov = b.overlap(i, j);
                if (ov.empty()) continue;
                const MatrixField tij = b.transition(i, j);
                for (std::size_t s = 0; s < ov.mask.size(); ++s) {
                    if (!ov.contains(s)) continue;
                    worst = std::max(worst, op_norm(section_matrix[i].values[s] -
                                                    tij.values[s] * section_matrix[j].values[s]));
                }
            }
        if (worst > tol)
            throw PairInvariantViolation("sections: chart compatibility violated, worst " +
                                         std::to_string(worst));
        return worst;
    }
};

struct PairOptions {
    double zero_tol = 1e-12;     // |f| at or below this counts as a zero sample
    double bound_factor = 10.0;  // safety margin on the certified |f/det S| bound
    double invariant_tol = 1e-8; // validation threshold for the algebraic identities
};

/// Square-zero endomorphism pair adapted to the sections and a scalar f:
/// per chart, N^- = S [[0,0],[f_i,0]] adj(S) and N^+ = S [[0,f_i],[0,0]] adj(S)
/// with f_i = f / det S_i.
struct NilpotentPair {
    std::string id;
    BundlePtr bundle;
    SectionPair sections;
    ScalarField f;                       // global scalar
    std::vector<ScalarField> f_chart;    // f / det S_i per chart
    std::vector<MatrixField> n_plus;     // per chart
    std::vector<MatrixField> n_minus;    // per chart
    double bound_certificate = 0.0;      // max |f_i| observed on samples

    Region zero_set(double tol) const { return f.zero_set(tol); }
};

using PairPtr = std::shared_ptr<const NilpotentPair>;

namespace detail {

/// f_i = f / det S on a chart. Samples where the division is ill-posed but
/// f also vanishes get the value of the nearest well-posed sample; a sample
/// where f stays away from zero while det S collapses is rejected.
inline ScalarField bounded_quotient(const ScalarField& f, const ScalarField& det,
                                    const Region& region, const PairOptions& opt) {
    const DomainPtr dom = f.domain;
    const double det_scale = det.max_abs_on(region);
    const double f_scale = f.max_abs_on(region);
    const double det_floor = 1e-12 * (det_scale + 1e-300);
    ScalarField q(dom);
    Region resolved(dom);
    for (std::size_t i = 0; i < dom->size(); ++i) {
        if (!region.contains(i)) continue;
        if (std::abs(det.values[i]) > det_floor) {
            q.values[i] = f.values[i] / det.values[i];
            resolved.insert(i);
        } else if (std::abs(f.values[i]) > opt.zero_tol * (1.0 + f_scale)) {
            throw UnboundedQuotient("pair: f / det S blows up at sample " + std::to_string(i));
        }
    }
    if (resolved.empty())
        throw UnboundedQuotient("pair: det S vanishes on the whole chart region");
    // continuity fill: propagate values outward from the resolved samples
    std::deque<std::size_t> queue;
    std::vector<std::uint8_t> have(dom->size(), 0);
    for (std::size_t i = 0; i < dom->size(); ++i)
        if (resolved.contains(i)) {
            have[i] = 1;
            queue.push_back(i);
        }
    while (!queue.empty()) {
        const std::size_t cur = queue.front();
        queue.pop_front();
        resolved.for_each_neighbor(cur, [&](std::size_t nb) {
            if (have[nb] || !region.contains(nb)) return;
            have[nb] = 1;
            q.values[nb] = q.values[cur];
            queue.push_back(nb);
        });
    }
    for (std::size_t i = 0; i < dom->size(); ++i)
        if (region.contains(i) && !have[i])
            throw UnboundedQuotient("pair: degenerate sample not reachable from resolved set");
    return q;
}

} // namespace detail

/// Build the nilpotent pair from section data and a compatible scalar f.
/// Checks the defining identities on samples and throws when they fail.
inline NilpotentPair build_pair(const std::string& id, const BundlePtr& bundle,
                                const SectionPair& sections, const ScalarField& f,
                                const PairOptions& opt = {}) {
    require_same_domain(f.domain, bundle->domain(), "build_pair f");
    sections.validate(opt.invariant_tol);
    NilpotentPair pair;
    pair.id = id;
    pair.bundle = bundle;
    pair.sections = sections;
    pair.f = f;
    const DomainPtr dom = bundle->domain();
    const double f_scale = f.max_abs();
    for (std::size_t c = 0; c < bundle->chart_count(); ++c) {
        const Region& region = bundle->chart(c).region;
        const MatrixField& s = sections.section_matrix[c];
        const ScalarField det = s.det_field();
        ScalarField fi = detail::bounded_quotient(f, det, region, opt);
        pair.bound_certificate = std::max(pair.bound_certificate, fi.max_abs_on(region));
        MatrixField nm(dom), np(dom);
        for (std::size_t i = 0; i < dom->size(); ++i) {
            if (!region.contains(i)) continue;
            const Mat2d& si = s.values[i];
            const Mat2d adj = si.adjugate();
            const cdouble q = fi.values[i];
            // S * [[0,0],[1,0]] * adj(S) and S * [[0,1],[0,0]] * adj(S)
            const Mat2d lower(si.a12 * adj.a11, si.a12 * adj.a12, si.a22 * adj.a11,
                              si.a22 * adj.a12);
            const Mat2d upper(si.a11 * adj.a21, si.a11 * adj.a22, si.a21 * adj.a21,
                              si.a21 * adj.a22);
            nm.values[i] = q * lower;
            np.values[i] = q * upper;
        }
        pair.f_chart.push_back(std::move(fi));
        pair.n_minus.push_back(std::move(nm));
        pair.n_plus.push_back(std::move(np));
    }
    // defining identities on samples
    const double tol = opt.invariant_tol * (1.0 + f_scale);
    for (std::size_t c = 0; c < bundle->chart_count(); ++c) {
        const Region& region = bundle->chart(c).region;
        const MatrixField& s = sections.section_matrix[c];
        for (std::size_t i = 0; i < dom->size(); ++i) {
            if (!region.contains(i)) continue;
            const Mat2d& nm = pair.n_minus[c].values[i];
            const Mat2d& np = pair.n_plus[c].values[i];
            const cdouble fv = f.values[i];
            const cdouble s1x = s.values[i].a11, s1y = s.values[i].a21;
            const cdouble s2x = s.values[i].a12, s2y = s.values[i].a22;
            double err = max_abs(nm * nm) + max_abs(np * np);
            err = std::max(err, std::abs(nm.trace()) + std::abs(np.trace()));
            // N^- s1 = f s2, N^- s2 = 0, N^+ s2 = f s1, N^+ s1 = 0
            err = std::max(err, std::abs(nm.a11 * s1x + nm.a12 * s1y - fv * s2x));
            err = std::max(err, std::abs(nm.a21 * s1x + nm.a22 * s1y - fv * s2y));
            err = std::max(err, std::abs(nm.a11 * s2x + nm.a12 * s2y));
            err = std::max(err, std::abs(np.a11 * s2x + np.a12 * s2y - fv * s1x));
            err = std::max(err, std::abs(np.a21 * s2x + np.a22 * s2y - fv * s1y));
            err = std::max(err, std::abs(np.a11 * s1x + np.a12 * s1y));
            if (err > tol * (1.0 + pair.bound_certificate))
                throw PairInvariantViolation("pair " + id + ": identity violated at sample " +
                                             std::to_string(i) + " (err " + std::to_string(err) +
                                             ")");
        }
    }
    return pair;
}

enum class ReplicaSign { Plus, Minus };

inline const char* to_string(ReplicaSign s) { return s == ReplicaSign::Plus ? "+" : "-"; }

/// Replica U(h) = Id + h * N of a pair's unipotent automorphism.
struct Replica {
    PairPtr pair;
    ReplicaSign sign;
    ScalarField h;
};

/// Id + h * N^sign on a chart; determinant is 1 up to the nilpotency defect.
inline MatrixField replica_matrix(const Replica& r, std::size_t chart) {
    const MatrixField& n =
        (r.sign == ReplicaSign::Plus) ? r.pair->n_plus[chart] : r.pair->n_minus[chart];
    require_same_domain(r.h.domain, n.domain, "replica_matrix");
    MatrixField out(n.domain);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = Mat2d::identity() + r.h.values[i] * n.values[i];
    return out;
}

/// log(Id + N) truncates to N for square-zero N; checked, then exact.
inline MatrixField unipotent_log(const MatrixField& u, double tol = 1e-10) {
    MatrixField n(u.domain);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const Mat2d e = u.values[i] - Mat2d::identity();
        if (max_abs(e * e) > tol)
            throw NotUnipotent("unipotent_log: (U - Id)^2 != 0 at sample " + std::to_string(i));
        n.values[i] = e;
    }
    return n;
}

inline MatrixField exp_nilpotent(const MatrixField& n, double tol = 1e-10) {
    MatrixField u(n.domain);
    for (std::size_t i = 0; i < n.values.size(); ++i) {
        if (max_abs(n.values[i] * n.values[i]) > tol)
            throw NotUnipotent("exp_nilpotent: N^2 != 0 at sample " + std::to_string(i));
        u.values[i] = Mat2d::identity() + n.values[i];
    }
    return u;
}

/// Bundle automorphism in chart coordinates: one matrix field per chart,
/// meaningful on the chart region, conjugation-compatible on overlaps.
struct BundleMap {
    BundlePtr bundle;
    std::vector<MatrixField> charts;

    BundleMap() = default;
    explicit BundleMap(BundlePtr b) : bundle(std::move(b)) {
        charts.assign(bundle->chart_count(), MatrixField::identity(bundle->domain()));
    }

    static BundleMap identity_map(const BundlePtr& b) { return BundleMap(b); }

    BundleMap compose(const BundleMap& o) const {
        BundleMap r(bundle);
        for (std::size_t c = 0; c < charts.size(); ++c) r.charts[c] = charts[c] * o.charts[c];
        return r;
    }
    BundleMap inverse_map() const {
        BundleMap r(bundle);
        for (std::size_t c = 0; c < charts.size(); ++c) {
            const Region& region = bundle->chart(c).region;
            for (std::size_t i = 0; i < r.charts[c].values.size(); ++i)
                r.charts[c].values[i] =
                    region.contains(i) ? inverse(charts[c].values[i]) : Mat2d::identity();
        }
        return r;
    }

    double max_dist_to(const BundleMap& o) const {
        double m = 0.0;
        for (std::size_t c = 0; c < charts.size(); ++c) {
            const Region& region = bundle->chart(c).region;
            for (std::size_t i = 0; i < charts[c].values.size(); ++i)
                if (region.contains(i))
                    m = std::max(m, op_norm(charts[c].values[i] - o.charts[c].values[i]));
        }
        return m;
    }
    double max_dist_to_identity() const { return max_dist_to(identity_map(bundle)); }
    double max_dist_to_identity_on(const Region& r) const {
        double m = 0.0;
        const Mat2d id = Mat2d::identity();
        for (std::size_t c = 0; c < charts.size(); ++c) {
            const Region reg = bundle->chart(c).region.intersect(r);
            for (std::size_t i = 0; i < charts[c].values.size(); ++i)
                if (reg.contains(i)) m = std::max(m, op_norm(charts[c].values[i] - id));
        }
        return m;
    }
    double max_det_drift() const {
        double m = 0.0;
        for (std::size_t c = 0; c < charts.size(); ++c) {
            const Region& region = bundle->chart(c).region;
            for (std::size_t i = 0; i < charts[c].values.size(); ++i)
                if (region.contains(i))
                    m = std::max(m, std::abs(charts[c].values[i].det() - cdouble(1.0)));
        }
        return m;
    }

    /// Conjugation compatibility Mat_i = T_ij Mat_j T_ij^{-1} on overlaps.
    double compatibility_error() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < charts.size(); ++i)
            for (std::size_t j = i + 1; j < charts.size(); ++j) {
                const Region ov = bundle->overlap(i, j);
                if (ov.empty()) continue;
                const MatrixField t = bundle->transition(i, j);
                for (std::size_t s = 0; s < ov.mask.size(); ++s) {
                    if (!ov.contains(s)) continue;
                    const Mat2d lhs = charts[i].values[s] * t.values[s];
                    const Mat2d rhs = t.values[s] * charts[j].values[s];
                    worst = std::max(worst, op_norm(lhs - rhs));
                }
            }
        return worst;
    }
};

inline BundleMap replica_bundle_map(const Replica& r) {
    BundleMap m(r.pair->bundle);
    for (std::size_t c = 0; c < m.charts.size(); ++c) m.charts[c] = replica_matrix(r, c);
    return m;
}

/// Ordered product of replicas as a bundle map.
inline BundleMap replica_product(const std::vector<Replica>& rs, const BundlePtr& bundle) {
    BundleMap acc = BundleMap::identity_map(bundle);
    for (const auto& r : rs) acc = acc.compose(replica_bundle_map(r));
    return acc;
}

/// Homotopy of bundle maps on a shared time grid.
struct BundleHomotopy {
    BundlePtr bundle;
    std::vector<double> times;
    std::vector<BundleMap> frames;

    const BundleMap& at(std::size_t i) const { return frames[i]; }
    std::size_t frame_count() const { return frames.size(); }

    /// Per-chart homotopy field for warped evaluation.
    HomotopyField chart_homotopy(std::size_t c) const {
        std::vector<MatrixField> fs;
        fs.reserve(frames.size());
        for (const auto& fr : frames) fs.push_back(fr.charts[c]);
        return HomotopyField(times, std::move(fs));
    }

    void validate_shape() const {
        if (times.size() != frames.size() || times.size() < 2)
            throw BadInput("bundle homotopy: need matching time and frame counts");
        if (times.front() != 0.0 || times.back() != 1.0)
            throw BadInput("bundle homotopy: times must run from 0 to 1");
    }
};

} // namespace unifact
