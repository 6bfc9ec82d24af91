#include <catch2/catch_amalgamated.hpp>

#include "unifact/examples.hpp"
#include "unifact/io.hpp"

using namespace unifact;
using nlohmann::json;

TEST_CASE("field-v1 round trip") {
    const DomainPtr dom = GridDomain::interval(-1.0, 1.0, 17);
    ScalarField f(dom);
    for (std::size_t i = 0; i < dom->size(); ++i)
        f.values[i] = cdouble(0.25 * static_cast<double>(i), -1.5);
    const json j = io::field_to_json(f);
    CHECK(j.at("values")[3].is_array()); // complex as [re, im]
    const ScalarField back = io::field_from_json(j);
    REQUIRE(same_domain(back.domain, dom));
    for (std::size_t i = 0; i < dom->size(); ++i) CHECK(back.values[i] == f.values[i]);
}

TEST_CASE("poly-v1 round trip keeps exact coefficients") {
    const Polynomial p = Polynomial::variable("x").pow(3) *
                             Polynomial::constant(RationalComplex{Rational(22, 7), Rational(0)}) +
                         Polynomial::variable("y") *
                             Polynomial::constant(RationalComplex{Rational(-1, 3), Rational(5, 2)});
    const json j = io::poly_to_json(p);
    const Polynomial back = io::poly_from_json(j);
    CHECK(back == p);
    // rationals serialize as [num, den]
    CHECK(j.at("terms")[0].at("coef").size() == 4);
}

TEST_CASE("poly-v1 big integers fall back to strings") {
    Rational big(1);
    for (int i = 0; i < 30; ++i) big *= 1000;
    const Polynomial p = Polynomial::constant(RationalComplex{big, Rational(0)});
    const json j = io::poly_to_json(p);
    CHECK(j.at("terms")[0].at("coef")[0].is_string());
    CHECK(io::poly_from_json(j) == p);
}

TEST_CASE("problem-v1 round trip preserves the pipeline result") {
    const Problem p = examples::interval_two_chart(65, 9);
    const json j = io::problem_to_json(p);
    const Problem q = io::problem_from_json(j);
    CHECK(q.pairs.size() == p.pairs.size());
    CHECK(q.f_map.max_dist_to(p.f_map) == 0.0);
    CHECK(q.f_t.frames.size() == p.f_t.frames.size());
    CHECK(q.pairs[0]->f_chart[0].max_abs() == p.pairs[0]->f_chart[0].max_abs());

    const FactorizationCertificate a = factor_automorphism(p, RunConfig{}, "x");
    const FactorizationCertificate b = factor_automorphism(q, RunConfig{}, "x");
    CHECK(io::certificate_to_json(a).dump() == io::certificate_to_json(b).dump());
}

TEST_CASE("cert-v1 round trip") {
    const Problem p = examples::circle_diagonal(32, 17);
    const FactorizationCertificate cert = factor_automorphism(p, RunConfig{}, "dg");
    const json j = io::certificate_to_json(cert);
    const FactorizationCertificate back = io::certificate_from_json(j);
    CHECK(back.factor_count() == cert.factor_count());
    CHECK(back.max_residual == cert.max_residual);
    CHECK(back.input_digest == "dg");
    CHECK(io::certificate_to_json(back).dump() == j.dump());

    std::map<std::string, PairPtr> by_id;
    for (const auto& pr : p.pairs) by_id[pr->id] = pr;
    CHECK(verify_certificate(p.f_map, back, by_id).passed);
}

TEST_CASE("region serialization: boxes and scattered masks") {
    const DomainPtr dom = GridDomain::square(0.0, 1.0, 8);
    const Region box = Region::from_ranges(dom, {1, 2}, {4, 7});
    const json jb = io::region_to_json(box);
    CHECK(jb.contains("lo"));
    CHECK(io::region_from_json(jb, dom).mask == box.mask);

    Region scattered(dom);
    scattered.insert(3);
    scattered.insert(17);
    scattered.insert(40);
    const json js = io::region_to_json(scattered);
    CHECK(js.contains("indices"));
    CHECK(io::region_from_json(js, dom).mask == scattered.mask);
}

TEST_CASE("digest is stable under whitespace changes") {
    const json j = {{"b", 1}, {"a", json::array({1.5, -2.25})}};
    const std::string d1 = io::canonical_digest(j);
    const json reparsed = json::parse(j.dump(4));
    CHECK(io::canonical_digest(reparsed) == d1);
}

TEST_CASE("identity report format") {
    std::vector<QModF3Report> reps = {q_mod_f3_check(1)};
    std::vector<GradientReport> grads = {gradient_singularity_check(2, 10)};
    const json j = io::identity_report_to_json(reps, grads, verify_divisibility_lemmas());
    CHECK(j.at("format") == "identity-report-v1");
    CHECK(j.at("passed").get<bool>());
    for (const auto& c : j.at("checks")) {
        CHECK(c.contains("name"));
        CHECK(c.contains("passed"));
        CHECK(c.contains("remainder_digest"));
    }
}
