#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "unifact/pipeline.hpp"
#include "unifact/symbolic.hpp"

namespace unifact::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// digests
// ---------------------------------------------------------------------------

inline std::string fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

// ---------------------------------------------------------------------------
// scalars
// ---------------------------------------------------------------------------

inline json to_json(const cdouble& z) { return json::array({z.real(), z.imag()}); }

inline cdouble complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2)
        throw BadInput("json: complex values are [re, im] pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json rational_to_json(const Rational& q) {
    auto piece = [](const boost::multiprecision::cpp_int& v) -> json {
        if (v >= std::numeric_limits<std::int64_t>::min() &&
            v <= std::numeric_limits<std::int64_t>::max())
            return static_cast<std::int64_t>(v);
        return v.str();
    };
    return json::array({piece(numerator(q)), piece(denominator(q))});
}

inline Rational rational_piece(const json& j) {
    if (j.is_string()) return Rational(boost::multiprecision::cpp_int(j.get<std::string>()));
    return Rational(j.get<std::int64_t>());
}

// ---------------------------------------------------------------------------
// domains and fields (field-v1)
// ---------------------------------------------------------------------------

inline json domain_to_json(const GridDomain& dom) {
    json axes = json::array();
    for (const auto& ax : dom.axes()) axes.push_back(ax);
    json periodic = json::array();
    for (bool p : dom.periodic_flags()) periodic.push_back(p);
    return {{"axes", axes}, {"periodic", periodic}};
}

inline DomainPtr domain_from_json(const json& j) {
    std::vector<std::vector<double>> axes;
    for (const auto& ax : j.at("axes")) axes.push_back(ax.get<std::vector<double>>());
    std::vector<bool> periodic = j.at("periodic").get<std::vector<bool>>();
    return std::make_shared<GridDomain>(std::move(axes), std::move(periodic));
}

inline json field_to_json(const ScalarField& f) {
    json values = json::array();
    for (const auto& v : f.values) values.push_back(to_json(v));
    return {{"domain", domain_to_json(*f.domain)}, {"values", values}};
}

inline ScalarField field_from_json(const json& j, const DomainPtr& expect = nullptr) {
    DomainPtr dom = domain_from_json(j.at("domain"));
    if (expect) {
        require_same_domain(dom, expect, "field-v1");
        dom = expect; // share the instance
    }
    std::vector<cdouble> values;
    for (const auto& v : j.at("values")) values.push_back(complex_from_json(v));
    return ScalarField(dom, std::move(values));
}

inline json matrix_field_to_json(const MatrixField& m) {
    return {{"a11", field_to_json(m.entry(0, 0))},
            {"a12", field_to_json(m.entry(0, 1))},
            {"a21", field_to_json(m.entry(1, 0))},
            {"a22", field_to_json(m.entry(1, 1))}};
}

inline MatrixField matrix_field_from_json(const json& j, const DomainPtr& expect = nullptr) {
    const ScalarField a11 = field_from_json(j.at("a11"), expect);
    const ScalarField a12 = field_from_json(j.at("a12"), a11.domain);
    const ScalarField a21 = field_from_json(j.at("a21"), a11.domain);
    const ScalarField a22 = field_from_json(j.at("a22"), a11.domain);
    MatrixField m(a11.domain);
    for (std::size_t i = 0; i < m.values.size(); ++i)
        m.values[i] = Mat2d(a11.values[i], a12.values[i], a21.values[i], a22.values[i]);
    return m;
}

// ---------------------------------------------------------------------------
// polynomials (poly-v1)
// ---------------------------------------------------------------------------

inline json poly_to_json(const Polynomial& p) {
    json terms = json::array();
    for (const auto& [e, c] : p.terms()) {
        json exps = json::array();
        for (auto x : e) exps.push_back(x);
        const json re = rational_to_json(c.re);
        const json im = rational_to_json(c.im);
        terms.push_back({{"exps", exps}, {"coef", json::array({re[0], re[1], im[0], im[1]})}});
    }
    return {{"vars", p.vars()}, {"terms", terms}};
}

inline Polynomial poly_from_json(const json& j) {
    const auto vars = j.at("vars").get<std::vector<std::string>>();
    Polynomial acc;
    for (const auto& t : j.at("terms")) {
        const auto exps = t.at("exps").get<std::vector<std::uint32_t>>();
        if (exps.size() != vars.size()) throw BadInput("poly-v1: exponent arity mismatch");
        const auto& coef = t.at("coef");
        if (!coef.is_array() || coef.size() != 4)
            throw BadInput("poly-v1: coef must be [num,den,num,den]");
        RationalComplex c(rational_piece(coef[0]) / rational_piece(coef[1]),
                          rational_piece(coef[2]) / rational_piece(coef[3]));
        Polynomial term = Polynomial::constant(c);
        for (std::size_t v = 0; v < vars.size(); ++v)
            term *= Polynomial::variable(vars[v]).pow(exps[v]);
        acc += term;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// regions, bundles (bundle-v1), pairs (pair-v1)
// ---------------------------------------------------------------------------

inline json region_to_json(const Region& r) {
    // emit as index ranges when the mask is a box, else as an explicit list
    const DomainPtr& dom = r.domain;
    std::vector<std::size_t> lo(dom->dim(), kInfDistance), hi(dom->dim(), 0);
    for (std::size_t i = 0; i < r.mask.size(); ++i) {
        if (!r.contains(i)) continue;
        const auto mi = dom->unravel(i);
        for (std::size_t d = 0; d < dom->dim(); ++d) {
            lo[d] = std::min(lo[d], mi[d]);
            hi[d] = std::max(hi[d], mi[d] + 1);
        }
    }
    if (lo[0] != kInfDistance) {
        const Region box = Region::from_ranges(dom, lo, hi);
        if (box.mask == r.mask) return {{"lo", lo}, {"hi", hi}};
    }
    json idx = json::array();
    for (std::size_t i = 0; i < r.mask.size(); ++i)
        if (r.contains(i)) idx.push_back(i);
    return {{"indices", idx}};
}

inline Region region_from_json(const json& j, const DomainPtr& dom) {
    if (j.contains("lo"))
        return Region::from_ranges(dom, j.at("lo").get<std::vector<std::size_t>>(),
                                   j.at("hi").get<std::vector<std::size_t>>());
    Region r(dom);
    for (const auto& i : j.at("indices")) r.insert(i.get<std::size_t>());
    return r;
}

inline json bundle_to_json(const ChartBundle& b) {
    json charts = json::array();
    for (const auto& c : b.charts())
        charts.push_back({{"id", c.id}, {"region", region_to_json(c.region)}});
    json transitions = json::array();
    for (std::size_t i = 0; i < b.chart_count(); ++i)
        for (std::size_t j2 = i + 1; j2 < b.chart_count(); ++j2) {
            if (b.overlap(i, j2).empty()) continue;
            transitions.push_back({{"from", j2},
                                   {"to", i},
                                   {"matrix", matrix_field_to_json(b.transition(i, j2))}});
        }
    return {{"format", "bundle-v1"},
            {"domain", domain_to_json(*b.domain())},
            {"charts", charts},
            {"transitions", transitions}};
}

inline std::shared_ptr<ChartBundle> bundle_from_json(const json& j) {
    const DomainPtr dom = domain_from_json(j.at("domain"));
    std::vector<Chart> charts;
    for (const auto& c : j.at("charts"))
        charts.push_back({c.at("id").get<std::string>(), region_from_json(c.at("region"), dom)});
    auto bundle = std::make_shared<ChartBundle>(dom, std::move(charts));
    for (const auto& t : j.at("transitions"))
        bundle->set_transition(t.at("to").get<std::size_t>(), t.at("from").get<std::size_t>(),
                               matrix_field_from_json(t.at("matrix"), dom));
    return bundle;
}

inline json pair_to_json(const NilpotentPair& p) {
    json sections = json::array(), f_chart = json::array();
    json n_plus = json::array(), n_minus = json::array();
    for (std::size_t c = 0; c < p.bundle->chart_count(); ++c) {
        sections.push_back(matrix_field_to_json(p.sections.section_matrix[c]));
        f_chart.push_back(field_to_json(p.f_chart[c]));
        n_plus.push_back(matrix_field_to_json(p.n_plus[c]));
        n_minus.push_back(matrix_field_to_json(p.n_minus[c]));
    }
    return {{"format", "pair-v1"}, {"id", p.id},          {"f", field_to_json(p.f)},
            {"sections", sections}, {"f_chart", f_chart}, {"n_plus", n_plus},
            {"n_minus", n_minus}};
}

/// Pairs are rebuilt from sections + f; the emitted n fields are an audit
/// trail, cross-checked when present.
inline PairPtr pair_from_json(const json& j, const BundlePtr& bundle) {
    SectionPair sections;
    sections.bundle = bundle;
    for (const auto& s : j.at("sections"))
        sections.section_matrix.push_back(matrix_field_from_json(s, bundle->domain()));
    const ScalarField f = field_from_json(j.at("f"), bundle->domain());
    NilpotentPair pair = build_pair(j.at("id").get<std::string>(), bundle, sections, f);
    auto audit = [&](const char* key, const std::vector<MatrixField>& rebuilt) {
        if (!j.contains(key)) return;
        std::size_t c = 0;
        for (const auto& n : j.at(key)) {
            const MatrixField stored = matrix_field_from_json(n, bundle->domain());
            double err = 0.0;
            const Region& region = bundle->chart(c).region;
            for (std::size_t i = 0; i < stored.values.size(); ++i)
                if (region.contains(i))
                    err = std::max(err, op_norm(stored.values[i] - rebuilt[c].values[i]));
            if (err > 1e-8)
                throw BadInput(std::string("pair-v1: stored ") + key +
                               " disagrees with the rebuilt pair");
            ++c;
        }
    };
    audit("n_minus", pair.n_minus);
    audit("n_plus", pair.n_plus);
    return std::make_shared<NilpotentPair>(std::move(pair));
}

// ---------------------------------------------------------------------------
// problems (problem-v1)
// ---------------------------------------------------------------------------

inline json bundle_map_to_json(const BundleMap& m) {
    json charts = json::array();
    for (const auto& c : m.charts) charts.push_back(matrix_field_to_json(c));
    return {{"charts", charts}};
}

inline BundleMap bundle_map_from_json(const json& j, const BundlePtr& bundle) {
    BundleMap m(bundle);
    std::size_t c = 0;
    for (const auto& cj : j.at("charts")) {
        if (c >= m.charts.size()) throw BadInput("bundle map: too many charts");
        m.charts[c++] = matrix_field_from_json(cj, bundle->domain());
    }
    if (c != m.charts.size()) throw BadInput("bundle map: chart count mismatch");
    return m;
}

inline json problem_to_json(const Problem& p) {
    json pairs = json::array();
    for (const auto& pr : p.pairs) pairs.push_back(pair_to_json(*pr));
    json frames = json::array();
    for (const auto& fr : p.f_t.frames) frames.push_back(bundle_map_to_json(fr));
    return {{"format", "problem-v1"},
            {"bundle", bundle_to_json(*p.bundle)},
            {"pairs", pairs},
            {"F", bundle_map_to_json(p.f_map)},
            {"F_t", {{"times", p.f_t.times}, {"frames", frames}}}};
}

inline Problem problem_from_json(const json& j) {
    Problem p;
    p.bundle = bundle_from_json(j.at("bundle"));
    for (const auto& pj : j.at("pairs")) p.pairs.push_back(pair_from_json(pj, p.bundle));
    p.f_map = bundle_map_from_json(j.at("F"), p.bundle);
    p.f_t.bundle = p.bundle;
    p.f_t.times = j.at("F_t").at("times").get<std::vector<double>>();
    for (const auto& fr : j.at("F_t").at("frames"))
        p.f_t.frames.push_back(bundle_map_from_json(fr, p.bundle));
    p.f_t.validate_shape();
    return p;
}

// ---------------------------------------------------------------------------
// certificates (cert-v1)
// ---------------------------------------------------------------------------

inline json config_to_json(const RunConfig& c) {
    return {{"tol", c.tol},
            {"epsilon", c.epsilon},
            {"pivot_floor", c.pivot_floor},
            {"cover_radius", c.cover_radius},
            {"max_factors", c.max_factors},
            {"backend", c.backend},
            {"zero_tol", c.zero_tol},
            {"snap_tol", c.snap_tol}};
}

inline RunConfig config_from_json(const json& j) {
    RunConfig c;
    if (j.contains("tol")) c.tol = j.at("tol").get<double>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("pivot_floor")) c.pivot_floor = j.at("pivot_floor").get<double>();
    if (j.contains("cover_radius")) c.cover_radius = j.at("cover_radius").get<std::size_t>();
    if (j.contains("max_factors")) c.max_factors = j.at("max_factors").get<std::size_t>();
    if (j.contains("backend")) c.backend = j.at("backend").get<std::string>();
    if (j.contains("zero_tol")) c.zero_tol = j.at("zero_tol").get<double>();
    if (j.contains("snap_tol")) c.snap_tol = j.at("snap_tol").get<double>();
    c.validate();
    return c;
}

inline json certificate_to_json(const FactorizationCertificate& cert) {
    json factors = json::array();
    for (const auto& f : cert.factors)
        factors.push_back({{"pair", f.pair_id},
                           {"sign", std::string(to_string(f.sign))},
                           {"stage", f.stage},
                           {"h", field_to_json(f.h)}});
    return {{"format", cert.format},
            {"form", cert.form},
            {"input_digest", cert.input_digest},
            {"config", config_to_json(cert.config)},
            {"factor_count", cert.factor_count()},
            {"max_residual", cert.max_residual},
            {"det_drift", cert.det_drift},
            {"max_unipotency_defect", cert.max_unipotency_defect},
            {"max_interpolation_defect", cert.max_interpolation_defect},
            {"provenance", cert.provenance},
            {"factors", factors}};
}

inline FactorizationCertificate certificate_from_json(const json& j) {
    FactorizationCertificate cert;
    cert.format = j.at("format").get<std::string>();
    if (cert.format != "cert-v1") throw BadInput("certificate: unknown format");
    cert.form = j.at("form").get<std::string>();
    cert.input_digest = j.at("input_digest").get<std::string>();
    cert.config = config_from_json(j.at("config"));
    cert.max_residual = j.at("max_residual").get<double>();
    cert.det_drift = j.at("det_drift").get<double>();
    cert.max_unipotency_defect = j.at("max_unipotency_defect").get<double>();
    cert.max_interpolation_defect = j.at("max_interpolation_defect").get<double>();
    cert.provenance = j.at("provenance").get<std::vector<std::string>>();
    for (const auto& f : j.at("factors")) {
        const std::string sign = f.at("sign").get<std::string>();
        cert.factors.push_back({f.at("pair").get<std::string>(),
                                sign == "+" ? ReplicaSign::Plus : ReplicaSign::Minus,
                                f.at("stage").get<std::string>(),
                                field_from_json(f.at("h"))});
    }
    return cert;
}

// ---------------------------------------------------------------------------
// identity reports (identity-report-v1)
// ---------------------------------------------------------------------------

inline json identity_report_to_json(const std::vector<QModF3Report>& reports,
                                    const std::vector<GradientReport>& gradients,
                                    const DivisibilityReport& divis) {
    json checks = json::array();
    bool all = true;
    for (const auto& rep : reports)
        for (const auto& c : rep.checks) {
            checks.push_back({{"name", c.name},
                              {"passed", c.passed},
                              {"remainder_digest", fnv1a64(c.detail)}});
            all = all && c.passed;
        }
    for (const auto& g : gradients) {
        checks.push_back({{"name", "singular-set dichotomy n=" + std::to_string(g.n)},
                          {"passed", g.passed},
                          {"remainder_digest",
                           fnv1a64(std::to_string(g.samples_checked))}});
        all = all && g.passed;
    }
    checks.push_back({{"name", "localization quad divisibility"},
                      {"passed", divis.passed},
                      {"remainder_digest",
                       fnv1a64(divis.z2z3_cofactor + "|" + divis.z2_plus_z4_cofactor)}});
    all = all && divis.passed;
    return {{"format", "identity-report-v1"}, {"passed", all}, {"checks", checks}};
}

// ---------------------------------------------------------------------------
// file helpers
// ---------------------------------------------------------------------------

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInput("cannot open " + path);
    json j;
    in >> j;
    return j;
}

inline void write_json_file(const std::string& path, const json& j, int indent = 1) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw BadInput("cannot write " + path);
    out << j.dump(indent) << "\n";
}

/// Digest of the canonical (parsed and re-dumped) form, so formatting does
/// not affect identity.
inline std::string canonical_digest(const json& j) { return fnv1a64(j.dump()); }

} // namespace unifact::io
