#pragma once

#include <cmath>
#include <numbers>

#include "unifact/pipeline.hpp"

namespace unifact::examples {

/// Trivial bundle with the standard pair: sections e1, e2 and f = 1, so
/// N^- = [[0,0],[1,0]] and N^+ = [[0,1],[0,0]] everywhere.
inline PairPtr standard_pair(const BundlePtr& bundle, const std::string& id = "p0") {
    const DomainPtr dom = bundle->domain();
    SectionPair sections;
    sections.bundle = bundle;
    for (std::size_t c = 0; c < bundle->chart_count(); ++c)
        sections.section_matrix.push_back(MatrixField::identity(dom));
    return std::make_shared<NilpotentPair>(
        build_pair(id, bundle, sections, ScalarField(dom, 1.0)));
}

/// Diagonal automorphism on a periodic circle grid: F = diag(e^{ig}, e^{-ig})
/// with real g and the explicit null-homotopy F_t = diag(e^{itg}, e^{-itg}).
inline Problem circle_diagonal(std::size_t n_points = 256, std::size_t n_times = 65) {
    Problem p;
    const DomainPtr dom = GridDomain::circle(n_points);
    auto bundle = ChartBundle::trivial(dom);
    p.bundle = bundle;
    p.pairs.push_back(standard_pair(p.bundle));

    std::vector<double> g(dom->size());
    for (std::size_t i = 0; i < dom->size(); ++i)
        g[i] = std::numbers::pi * std::cos(dom->coord(i)[0]);

    auto frame_at = [&](double t) {
        BundleMap m(p.bundle);
        for (std::size_t i = 0; i < dom->size(); ++i) {
            const cdouble up = std::polar(1.0, t * g[i]);
            const cdouble dn = std::polar(1.0, -t * g[i]);
            m.charts[0].values[i] = Mat2d(up, 0.0, 0.0, dn);
        }
        return m;
    };

    p.f_t.bundle = p.bundle;
    p.f_t.times = HomotopyField::uniform_times(n_times);
    for (double t : p.f_t.times) p.f_t.frames.push_back(frame_at(t));
    p.f_map = p.f_t.frames.back();
    return p;
}

/// Two charts over [-1, 1] glued by an upper-triangular transition with a
/// nontrivial determinant cocycle. The sections become dependent at x = 0,
/// f = x vanishes exactly there, and F = Id + x^4 E for nilpotent constant E.
inline Problem interval_two_chart(std::size_t n_points = 257, std::size_t n_times = 33) {
    Problem p;
    const DomainPtr dom = GridDomain::interval(-1.0, 1.0, n_points);
    const auto& xs = dom->axes()[0];

    std::size_t hi0 = 0, lo1 = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] <= 0.25) hi0 = i + 1;
        if (xs[i] < -0.25) lo1 = i + 1;
    }
    std::vector<Chart> charts;
    charts.push_back({"left", Region::from_ranges(dom, {0}, {hi0})});
    charts.push_back({"right", Region::from_ranges(dom, {lo1}, {xs.size()})});
    auto bundle = std::make_shared<ChartBundle>(dom, std::move(charts));

    // transition left <- right
    const MatrixField t01 = MatrixField::from_function(dom, [](double x, double) {
        return Mat2d(1.0, 0.5 * x, 0.0, 1.0 + x * x);
    });
    bundle->set_transition(0, 1, t01);
    p.bundle = bundle;

    SectionPair sections;
    sections.bundle = p.bundle;
    sections.section_matrix.push_back(MatrixField::from_function(
        dom, [](double x, double) { return Mat2d(1.0, x, 0.0, x); }));
    {
        MatrixField s1(dom);
        for (std::size_t i = 0; i < dom->size(); ++i)
            s1.values[i] = inverse(t01.values[i]) * sections.section_matrix[0].values[i];
        sections.section_matrix.push_back(std::move(s1));
    }
    const ScalarField f =
        ScalarField::from_function(dom, [](double x, double) { return cdouble(x); });
    p.pairs.push_back(std::make_shared<NilpotentPair>(build_pair("p0", p.bundle, sections, f)));

    // F = Id + x^4 E with E nilpotent keeps det = 1 exactly
    auto frame_at = [&](double t) {
        BundleMap m(p.bundle);
        for (std::size_t i = 0; i < dom->size(); ++i) {
            const double x = dom->coord(i)[0];
            const double x4 = x * x * x * x;
            const Mat2d left(1.0, t * x4, 0.0, 1.0);
            m.charts[0].values[i] = left;
            m.charts[1].values[i] = inverse(t01.values[i]) * left * t01.values[i];
        }
        return m;
    };
    p.f_t.bundle = p.bundle;
    p.f_t.times = HomotopyField::uniform_times(n_times);
    for (double t : p.f_t.times) p.f_t.frames.push_back(frame_at(t));
    p.f_map = p.f_t.frames.back();
    return p;
}

/// Null-homotopic map on the unit square for the splitting suites:
/// F_t = exp(t M) with traceless M, so every frame has determinant 1.
inline std::pair<BundleMap, BundleHomotopy> square_map(const BundlePtr& bundle,
                                                       std::size_t n_times = 17) {
    const DomainPtr dom = bundle->domain();
    auto m_at = [](double x, double y) {
        const cdouble p(0.6 * std::sin(2.0 * std::numbers::pi * x) * std::cos(std::numbers::pi * y),
                        0.2 * std::sin(std::numbers::pi * (x + y)));
        const cdouble q(0.5 * std::cos(std::numbers::pi * x), 0.3 * std::sin(std::numbers::pi * y));
        const cdouble r(0.4 * std::sin(std::numbers::pi * x * y) + 0.2,
                        -0.1 * std::cos(2.0 * std::numbers::pi * x));
        return Mat2d(p, q, r, -p);
    };
    BundleHomotopy ht;
    ht.bundle = bundle;
    ht.times = HomotopyField::uniform_times(n_times);
    for (double t : ht.times) {
        BundleMap fr(bundle);
        for (std::size_t i = 0; i < dom->size(); ++i) {
            const auto c = dom->coord(i);
            fr.charts[0].values[i] = exp_mat2(cdouble(t) * m_at(c[0], c[1]));
        }
        ht.frames.push_back(std::move(fr));
    }
    return {ht.frames.back(), std::move(ht)};
}

inline ScalarField coordinate_field(const DomainPtr& dom, int axis) {
    return ScalarField::from_function(dom, [axis](double x, double y) {
        return cdouble(axis == 0 ? x : y);
    });
}

/// Two standard pairs over [0, 1] whose functions x and 1 - x have no
/// common zero, driving the full splitting path of the pipeline.
inline Problem interval_two_pairs(std::size_t n_points = 129, std::size_t n_times = 17) {
    Problem p;
    const DomainPtr dom = GridDomain::interval(0.0, 1.0, n_points);
    p.bundle = ChartBundle::trivial(dom);
    auto make_pair = [&](const std::string& id, const ScalarField& f) {
        SectionPair sections;
        sections.bundle = p.bundle;
        sections.section_matrix.push_back(MatrixField::identity(dom));
        return std::make_shared<NilpotentPair>(build_pair(id, p.bundle, sections, f));
    };
    p.pairs.push_back(make_pair("pA", coordinate_field(dom, 0)));
    p.pairs.push_back(make_pair(
        "pB", ScalarField::from_function(dom, [](double x, double) { return cdouble(1.0 - x); })));
    auto [fm, ft] = square_map(p.bundle, n_times);
    p.f_map = std::move(fm);
    p.f_t = std::move(ft);
    return p;
}

} // namespace unifact::examples
