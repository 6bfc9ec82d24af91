#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "unifact/grid.hpp"
#include "unifact/mat2.hpp"
#include "unifact/polynomial.hpp"

namespace unifact {

/// Complex-valued function sampled on a grid domain.
struct ScalarField {
    DomainPtr domain;
    std::vector<cdouble> values;

    ScalarField() = default;
    ScalarField(DomainPtr dom, cdouble fill = 0.0)
        : domain(std::move(dom)), values(domain->size(), fill) {}
    ScalarField(DomainPtr dom, std::vector<cdouble> vals)
        : domain(std::move(dom)), values(std::move(vals)) {
        if (values.size() != domain->size())
            throw DomainMismatch("scalar field: value count != point count");
    }

    static ScalarField from_function(const DomainPtr& dom,
                                     const std::function<cdouble(double, double)>& fn) {
        ScalarField f(dom);
        for (std::size_t i = 0; i < dom->size(); ++i) {
            const auto c = dom->coord(i);
            f.values[i] = fn(c[0], c[1]);
        }
        return f;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : values) m = std::max(m, std::abs(v));
        return m;
    }
    double max_abs_on(const Region& r) const {
        double m = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            if (r.contains(i)) m = std::max(m, std::abs(values[i]));
        return m;
    }

    Region zero_set(double tol) const {
        return Region::from_predicate(domain,
                                      [&](std::size_t i) { return std::abs(values[i]) <= tol; });
    }

    friend ScalarField operator+(const ScalarField& a, const ScalarField& b) {
        require_same_domain(a.domain, b.domain, "scalar field +");
        ScalarField r = a;
        for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] += b.values[i];
        return r;
    }
    friend ScalarField operator-(const ScalarField& a, const ScalarField& b) {
        require_same_domain(a.domain, b.domain, "scalar field -");
        ScalarField r = a;
        for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] -= b.values[i];
        return r;
    }
    friend ScalarField operator*(const ScalarField& a, const ScalarField& b) {
        require_same_domain(a.domain, b.domain, "scalar field *");
        ScalarField r = a;
        for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] *= b.values[i];
        return r;
    }
    friend ScalarField operator*(cdouble s, const ScalarField& a) {
        ScalarField r = a;
        for (auto& v : r.values) v *= s;
        return r;
    }
};

/// Sample a polynomial in the grid coordinates. Variable names map to axes
/// in order (1d: first name; 2d: first two names).
inline ScalarField sample_polynomial(const Polynomial& p, const DomainPtr& dom,
                                     const std::vector<std::string>& axis_vars) {
    if (axis_vars.size() != dom->dim())
        throw BadInput("sample_polynomial: need one variable name per axis");
    ScalarField f(dom);
    std::map<std::string, cdouble> point;
    for (std::size_t i = 0; i < dom->size(); ++i) {
        const auto c = dom->coord(i);
        point[axis_vars[0]] = c[0];
        if (dom->dim() == 2) point[axis_vars[1]] = c[1];
        f.values[i] = p.evaluate_c(point);
    }
    return f;
}

/// Matrix-valued function on a grid; the four entry fields share the domain.
struct MatrixField {
    DomainPtr domain;
    std::vector<Mat2d> values;

    MatrixField() = default;
    explicit MatrixField(DomainPtr dom, const Mat2d& fill = Mat2d::zero())
        : domain(std::move(dom)), values(domain->size(), fill) {}
    MatrixField(DomainPtr dom, std::vector<Mat2d> vals)
        : domain(std::move(dom)), values(std::move(vals)) {
        if (values.size() != domain->size())
            throw DomainMismatch("matrix field: value count != point count");
    }

    static MatrixField identity(const DomainPtr& dom) {
        return MatrixField(dom, Mat2d::identity());
    }
    static MatrixField from_function(const DomainPtr& dom,
                                     const std::function<Mat2d(double, double)>& fn) {
        MatrixField f(dom);
        for (std::size_t i = 0; i < dom->size(); ++i) {
            const auto c = dom->coord(i);
            f.values[i] = fn(c[0], c[1]);
        }
        return f;
    }

    ScalarField entry(int row, int col) const {
        ScalarField f(domain);
        for (std::size_t i = 0; i < values.size(); ++i) {
            const Mat2d& m = values[i];
            f.values[i] = (row == 0) ? (col == 0 ? m.a11 : m.a12) : (col == 0 ? m.a21 : m.a22);
        }
        return f;
    }

    ScalarField det_field() const {
        ScalarField f(domain);
        for (std::size_t i = 0; i < values.size(); ++i) f.values[i] = values[i].det();
        return f;
    }

    MatrixField pointwise_inverse(double tol = 1e-14) const {
        MatrixField r(domain);
        for (std::size_t i = 0; i < values.size(); ++i) r.values[i] = inverse(values[i], tol);
        return r;
    }

    double max_dist_to(const MatrixField& o) const {
        require_same_domain(domain, o.domain, "matrix field distance");
        double m = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            m = std::max(m, op_norm(values[i] - o.values[i]));
        return m;
    }
    double max_dist_to_identity_on(const Region& r) const {
        double m = 0.0;
        const Mat2d id = Mat2d::identity();
        for (std::size_t i = 0; i < values.size(); ++i)
            if (r.contains(i)) m = std::max(m, op_norm(values[i] - id));
        return m;
    }
    double max_det_drift() const {
        double m = 0.0;
        for (const auto& v : values) m = std::max(m, std::abs(v.det() - cdouble(1.0)));
        return m;
    }

    friend MatrixField operator*(const MatrixField& a, const MatrixField& b) {
        require_same_domain(a.domain, b.domain, "matrix field *");
        MatrixField r = a;
        for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = a.values[i] * b.values[i];
        return r;
    }
    friend MatrixField operator-(const MatrixField& a, const MatrixField& b) {
        require_same_domain(a.domain, b.domain, "matrix field -");
        MatrixField r = a;
        for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = a.values[i] - b.values[i];
        return r;
    }
    friend MatrixField operator+(const MatrixField& a, const MatrixField& b) {
        require_same_domain(a.domain, b.domain, "matrix field +");
        MatrixField r = a;
        for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = a.values[i] + b.values[i];
        return r;
    }
};

/// Matrix homotopy sampled on a shared time grid with t0 = 0 and tm = 1.
/// Evaluation between frames follows the group geodesic
/// M(theta) = A * exp(theta * log(A^{-1} B)), which keeps det = 1 and hits
/// the stored frames exactly at the sample times.
struct HomotopyField {
    std::vector<double> times;
    std::vector<MatrixField> frames;

    HomotopyField() = default;
    HomotopyField(std::vector<double> ts, std::vector<MatrixField> fs)
        : times(std::move(ts)), frames(std::move(fs)) {
        validate_shape();
    }

    void validate_shape() const {
        if (times.size() < 2 || times.size() != frames.size())
            throw BadInput("homotopy: need matching time and frame counts (>= 2)");
        if (times.front() != 0.0 || times.back() != 1.0)
            throw BadInput("homotopy: time samples must start at 0 and end at 1");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1])) throw BadInput("homotopy: times must increase");
        for (std::size_t i = 1; i < frames.size(); ++i)
            require_same_domain(frames[i].domain, frames[0].domain, "homotopy frames");
    }

    const DomainPtr& domain() const { return frames.front().domain; }
    std::size_t frame_count() const { return frames.size(); }

    static std::vector<double> uniform_times(std::size_t n_frames) {
        std::vector<double> ts(n_frames);
        for (std::size_t i = 0; i < n_frames; ++i)
            ts[i] = static_cast<double>(i) / static_cast<double>(n_frames - 1);
        ts.front() = 0.0;
        ts.back() = 1.0;
        return ts;
    }

    /// Evaluate with a per-sample time warp. Exact time hits return stored
    /// frame values bitwise, which the cutoff constructions rely on.
    MatrixField eval_warped(const std::vector<double>& warp) const {
        const DomainPtr& dom = domain();
        if (warp.size() != dom->size()) throw DomainMismatch("homotopy warp size");
        MatrixField out(dom);
        for (std::size_t i = 0; i < warp.size(); ++i) out.values[i] = eval_sample(i, warp[i]);
        return out;
    }

    MatrixField eval_at(double t) const {
        MatrixField out(domain());
        for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = eval_sample(i, t);
        return out;
    }

    Mat2d eval_sample(std::size_t idx, double t) const {
        if (t <= times.front()) return frames.front().values[idx];
        if (t >= times.back()) return frames.back().values[idx];
        const auto it = std::lower_bound(times.begin(), times.end(), t);
        const std::size_t hi = static_cast<std::size_t>(it - times.begin());
        if (times[hi] == t) return frames[hi].values[idx];
        const std::size_t lo = hi - 1;
        const double theta = (t - times[lo]) / (times[hi] - times[lo]);
        const Mat2d& a = frames[lo].values[idx];
        const Mat2d& b = frames[hi].values[idx];
        const Mat2d step = inverse(a) * b;
        Mat2d l;
        try {
            l = log_near_identity(step);
        } catch (const OutOfRadius&) {
            throw CannotSatisfy("homotopy eval: adjacent frames are more than 1/2 apart; "
                                "time sampling too coarse");
        }
        return a * exp_mat2(cdouble(theta) * l);
    }
};

/// Cutoff with values in [0,1], exactly 0 on its inner region and exactly 1
/// off its outer region.
struct CutoffFunction {
    DomainPtr domain;
    std::vector<double> values;

    CutoffFunction() = default;
    explicit CutoffFunction(DomainPtr dom, double fill = 0.0)
        : domain(std::move(dom)), values(domain->size(), fill) {}

    CutoffFunction complement_profile() const {
        CutoffFunction r = *this;
        for (auto& v : r.values) v = 1.0 - v;
        return r;
    }
};

inline double smoothstep(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * (3.0 - 2.0 * u);
}

/// chi = 0 on inner, 1 outside outer, C1 smoothstep in the normalized
/// cell-distance across the band. Requires inner to sit inside outer.
inline CutoffFunction make_cutoff(const DomainPtr& dom, const Region& inner,
                                  const Region& outer) {
    require_same_domain(dom, inner.domain, "make_cutoff inner");
    require_same_domain(dom, outer.domain, "make_cutoff outer");
    const Region outside = outer.complement();
    if (inner.intersects(outside))
        throw ZeroMargin("make_cutoff: inner region leaves the outer region (zero margin)");
    const auto d_in = inner.distance_field();
    const auto d_out = outside.distance_field();
    CutoffFunction chi(dom);
    for (std::size_t i = 0; i < dom->size(); ++i) {
        if (inner.contains(i)) {
            chi.values[i] = 0.0;
        } else if (outside.contains(i)) {
            chi.values[i] = 1.0;
        } else if (d_out[i] == kInfDistance) {
            chi.values[i] = 0.0; // outer covers everything
        } else if (d_in[i] == kInfDistance) {
            chi.values[i] = 1.0; // inner is empty
        } else {
            const double di = static_cast<double>(d_in[i]);
            const double dn = static_cast<double>(d_out[i]);
            chi.values[i] = smoothstep(di / (di + dn - 1.0));
        }
    }
    return chi;
}

struct VanishOrderReport {
    double exponent = 0.0;     // least-squares slope of log|g| vs log|f|
    bool identically_zero = false;
    std::size_t band_points = 0;
    bool passed = false;
};

/// Sampled surrogate for "f^k divides g": fit the decay exponent of g
/// against f on the band 0 < |f| < band and pass when it reaches k - 0.25.
/// Samples where g sits at the floating-point noise floor count as zeros.
inline VanishOrderReport vanish_order(const ScalarField& g, const ScalarField& f, int k,
                                      double band) {
    require_same_domain(g.domain, f.domain, "vanish_order");
    VanishOrderReport rep;
    const double noise_floor = 1e-15 * (1.0 + g.max_abs());
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const double af = std::abs(f.values[i]);
        if (af <= 0.0 || af >= band) continue;
        ++rep.band_points;
        const double ag = std::abs(g.values[i]);
        if (ag <= noise_floor) continue; // zero up to roundoff, helps divisibility
        xs.push_back(std::log(af));
        ys.push_back(std::log(ag));
    }
    if (rep.band_points == 0) throw EmptyBand("vanish_order: no samples with 0 < |f| < band");
    if (xs.empty()) {
        rep.identically_zero = true;
        rep.exponent = std::numeric_limits<double>::infinity();
        rep.passed = true;
        return rep;
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx < 1e-30)
        throw EmptyBand("vanish_order: |f| is constant on the band, cannot fit a decay exponent");
    rep.exponent = sxy / sxx;
    rep.passed = rep.exponent >= static_cast<double>(k) - 0.25;
    return rep;
}

} // namespace unifact
