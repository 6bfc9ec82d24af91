// Acceptance suite: one pass/fail line per criterion, exit 0 only if all
// pass. Tolerances are pinned here, not configurable.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "unifact/examples.hpp"
#include "unifact/io.hpp"

using namespace unifact;

namespace {

int failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

void report(int idx, const char* name, bool ok, double secs, const std::string& detail = "") {
    std::printf("[%d] %-58s %s  (%.2fs)%s%s\n", idx, name, ok ? "PASS" : "FAIL", secs,
                detail.empty() ? "" : "  ", detail.c_str());
    if (!ok) ++failures;
}

Mat2d elementary_chain(cdouble z1, cdouble z2, cdouble z3, cdouble z4) {
    return Mat2d(1.0, 0.0, z1, 1.0) * Mat2d(1.0, z2, 0.0, 1.0) * Mat2d(1.0, 0.0, z3, 1.0) *
           Mat2d(1.0, z4, 0.0, 1.0);
}

// 1. exact symbolic identity suite
void criterion_1() {
    Timer t;
    bool ok = true;
    std::string detail;
    for (int k = 1; k <= 6; ++k) {
        const QModF3Report rep = q_mod_f3_check(k);
        if (!rep.passed) {
            ok = false;
            detail = "k=" + std::to_string(k) + " failed";
            break;
        }
    }
    const bool in_time = t.seconds() < 10.0;
    report(1, "symbolic identities: mod-f^3 closed forms, det = 1, k=1..6",
           ok && in_time, t.seconds(), detail);
}

// 2. elimination suite
void criterion_2() {
    Timer t;
    bool ok = true;
    std::string detail;

    std::mt19937_64 rng(20240127);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int i = 0; i < 10000 && ok; ++i) {
        cdouble a;
        do {
            a = cdouble(u(rng), u(rng));
        } while (std::abs(a) < 0.5);
        const cdouble b(u(rng), u(rng)), c(u(rng), u(rng));
        const Mat2d m(a, b, c, (cdouble(1.0) + b * c) / a);
        const EliminationQuad q = eliminate_four(m);
        if (op_norm(elementary_chain(q.z1, q.z2, q.z3, q.z4) - m) > 1e-11) {
            ok = false;
            detail = "reconstruction residual above 1e-11 at sample " + std::to_string(i);
        }
    }

    const EliminationQuad qid = eliminate_four(Mat2d::identity());
    if (qid.z1 != cdouble(0.0) || qid.z2 != cdouble(0.0) || qid.z3 != cdouble(0.0) ||
        qid.z4 != cdouble(0.0)) {
        ok = false;
        detail = "eliminate_four(Id) is not the exact zero quad";
    }

    std::uniform_real_distribution<double> ul(-2.0, 2.0);
    int done = 0;
    while (done < 100 && ok) {
        const cdouble lam(ul(rng), ul(rng));
        if (std::abs(lam) < 0.2 || std::abs(lam - cdouble(1.0)) < 1e-3) continue;
        ++done;
        const EliminationQuad qw = whitehead_diag(lam);
        const Mat2d target(lam, 0.0, 0.0, cdouble(1.0) / lam);
        if (op_norm(elementary_chain(qw.z1, qw.z2, qw.z3, qw.z4) - target) > 1e-12) {
            ok = false;
            detail = "whitehead product misses diag(lambda, 1/lambda)";
        }
        const EliminationQuad qe = eliminate_four(target);
        if (std::abs(qw.z1 - qe.z1) > 1e-12 || std::abs(qw.z2 - qe.z2) > 1e-12 ||
            std::abs(qw.z3 - qe.z3) > 1e-12 || std::abs(qw.z4 - qe.z4) > 1e-12) {
            ok = false;
            detail = "whitehead and eliminate_four disagree";
        }
    }

    // the printed special form leaves -(sqrt|lambda-1|)^3 in the (2,1) entry
    // at lambda = 2, while the corrected form is exact
    {
        const double lam = 2.0;
        const double mag = std::sqrt(std::abs(lam - 1.0));
        const cdouble z1_printed = (1.0 - lam) / mag;
        const Mat2d printed = elementary_chain(z1_printed, mag, (lam - 1.0) / mag, -mag / lam);
        const Mat2d target(lam, 0.0, 0.0, 1.0 / lam);
        const cdouble residual21 = printed.a21 - target.a21;
        const double expected = -mag * mag * mag;
        if (std::abs(residual21 - cdouble(expected)) > 1e-12) {
            ok = false;
            detail = "printed-form residual is not -(sqrt|lambda-1|)^3";
        }
        const EliminationQuad qc = whitehead_diag(lam);
        if (op_norm(elementary_chain(qc.z1, qc.z2, qc.z3, qc.z4) - target) > 1e-12) {
            ok = false;
            detail = "corrected form is not exact at lambda = 2";
        }
    }

    const bool in_time = t.seconds() < 5.0;
    report(2, "elimination: 1e4 reconstructions, whitehead forms", ok && in_time, t.seconds(),
           detail);
}

// 3. divisibility suite
void criterion_3() {
    Timer t;
    bool ok = true;
    std::string detail;

    const DivisibilityReport rep = verify_divisibility_lemmas();
    if (!rep.passed) {
        ok = false;
        detail = "localization quad divisibility failed";
    }

    std::mt19937_64 rng(8);
    std::uniform_int_distribution<long long> co(-6, 6);
    auto rp = [&]() {
        return Polynomial::constant(co(rng)) +
               Polynomial::variable("x") * Polynomial::constant(co(rng)) +
               Polynomial::variable("y") * Polynomial::constant(co(rng));
    };
    for (int i = 0; i < 100 && ok; ++i) {
        const Polynomial g = Polynomial::variable("x") * Polynomial::constant(co(rng)) +
                             Polynomial::variable("y").pow(2) + Polynomial::constant(3);
        const Mat2<Polynomial> m =
            Mat2<Polynomial>{Polynomial::constant(1), Polynomial::constant(0), g * rp(),
                             Polynomial::constant(1)} *
            Mat2<Polynomial>{Polynomial::constant(1), g * rp(), Polynomial::constant(0),
                             Polynomial::constant(1)} *
            Mat2<Polynomial>{Polynomial::constant(1), Polynomial::constant(0), g * rp(),
                             Polynomial::constant(1)};
        try {
            lemma_last_entry_division(m, g);
        } catch (const Error& e) {
            ok = false;
            detail = std::string("last-entry inference failed: ") + e.what();
        }
    }

    const bool in_time = t.seconds() < 10.0;
    report(3, "divisibility: exact quad facts + 100 last-entry instances", ok && in_time,
           t.seconds(), detail);
}

// 4. splitting suite on 128^2 grids
void criterion_4() {
    Timer t;
    bool ok = true;
    std::string detail;
    const DomainPtr dom = GridDomain::square(0.0, 1.0, 128);
    const auto bundle = ChartBundle::trivial(dom);
    auto [f_map, f_t] = examples::square_map(bundle, 17);

    for (int m = 2; m <= 3 && ok; ++m) {
        std::vector<ScalarField> fs;
        if (m == 2) {
            fs.push_back(examples::coordinate_field(dom, 0));
            fs.push_back(ScalarField::from_function(
                dom, [](double x, double) { return cdouble(1.0 - x); }));
        } else {
            fs.push_back(examples::coordinate_field(dom, 0));
            fs.push_back(examples::coordinate_field(dom, 1));
            fs.push_back(ScalarField::from_function(
                dom, [](double x, double y) { return cdouble(1.0 - x - y); }));
        }
        const auto factors = split_general(f_map, f_t, fs);
        BundleMap acc = BundleMap::identity_map(bundle);
        for (const auto& g : factors) acc = acc.compose(g.map);
        if (acc.max_dist_to(f_map) > static_cast<double>(m) * 1e-12) {
            ok = false;
            detail = "m=" + std::to_string(m) + " reconstruction above m*1e-12";
        }
        for (const auto& g : factors) {
            const Region zero = fs[g.zero_index].zero_set(1e-12);
            for (const auto& fr : g.homotopy.frames)
                if (fr.max_dist_to_identity_on(zero) > 1e-12) {
                    ok = false;
                    detail = "m=" + std::to_string(m) + " strong nullity above 1e-12";
                }
        }
    }
    const bool in_time = t.seconds() < 30.0;
    report(4, "splitting on 128^2: product exact, strong nullity", ok && in_time, t.seconds(),
           detail);
}

// 5. subdivision oracle
void criterion_5() {
    Timer t;
    bool ok = true;
    std::string detail;
    const DomainPtr dom = GridDomain::interval(0.0, 1.0, 2);

    {
        const auto times = HomotopyField::uniform_times(129);
        std::vector<MatrixField> fs;
        for (double tt : times) {
            MatrixField m(dom);
            const double phi = std::numbers::pi * tt;
            for (auto& v : m.values)
                v = Mat2d(std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi));
            fs.push_back(std::move(m));
        }
        const SubdivisionResult sub = subdivide_homotopy(HomotopyField(times, fs), 0.5);
        if (sub.step_count() != 7) {
            ok = false;
            detail = "rotation by pi gave " + std::to_string(sub.step_count()) +
                     " steps, expected 7";
        }
    }
    {
        std::vector<MatrixField> fs(2, MatrixField::identity(dom));
        const SubdivisionResult sub =
            subdivide_homotopy(HomotopyField({0.0, 1.0}, fs), 0.5);
        if (sub.step_count() != 1) {
            ok = false;
            detail = "constant homotopy did not give a single step";
        }
    }
    report(5, "subdivision: pi rotation in 7 steps, constant in 1", ok, t.seconds(), detail);
}

// 6. singular-set dichotomy
void criterion_6() {
    Timer t;
    bool ok = true;
    std::string detail;
    for (int n = 2; n <= 5; ++n) {
        const GradientReport rep = gradient_singularity_check(n, 1000);
        if (!rep.passed || rep.samples_checked < 900) {
            ok = false;
            detail = "n=" + std::to_string(n) + " failed";
        }
    }
    report(6, "singular-set dichotomy n=2..5, symbolic + 1e3 samples", ok, t.seconds(), detail);
}

// 7. end-to-end circle certificate
FactorizationCertificate run_circle(std::string* dump) {
    const Problem p = examples::circle_diagonal(256, 65);
    const auto cert = factor_automorphism(p, RunConfig{}, "acceptance-circle");
    if (dump) *dump = io::certificate_to_json(cert).dump();
    return cert;
}

void criterion_7() {
    Timer t;
    bool ok = true;
    std::string detail;
    const Problem p = examples::circle_diagonal(256, 65);
    std::string dump1;
    const FactorizationCertificate cert = run_circle(&dump1);
    if (cert.max_residual > 1e-8) {
        ok = false;
        detail = "residual " + sci(cert.max_residual);
    }
    if (cert.max_unipotency_defect > 1e-10) {
        ok = false;
        detail = "unipotency defect above 1e-10";
    }
    std::map<std::string, PairPtr> by_id;
    for (const auto& pr : p.pairs) by_id[pr->id] = pr;
    const VerifyReport rep = verify_certificate(p.f_map, cert, by_id);
    if (!rep.passed) {
        ok = false;
        detail = "verification replay failed";
    }
    const FactorizationCertificate exp_cert = exponentialize(cert);
    const VerifyReport rep2 = verify_certificate(p.f_map, exp_cert, by_id);
    if (std::abs(rep2.max_residual - rep.max_residual) > 1e-12) {
        ok = false;
        detail = "exponential form changed the replayed product";
    }
    const bool in_time = t.seconds() < 60.0;
    report(7, "end-to-end circle: residual <= 1e-8, verify, exponentialize",
           ok && in_time, t.seconds(),
           "residual " + sci(cert.max_residual) + ", " +
               std::to_string(cert.factor_count()) + " factors");
}

// 8. determinism
void criterion_8() {
    Timer t;
    std::string d1, d2;
    run_circle(&d1);
    run_circle(&d2);
    const bool ok = (d1 == d2) && !d1.empty();
    report(8, "determinism: byte-identical certificates across runs", ok, t.seconds());
}

} // namespace

int main() {
    std::printf("acceptance suite\n----------------\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    std::printf("----------------\n%s\n", failures == 0 ? "ALL PASS" : "FAILURES PRESENT");
    return failures == 0 ? 0 : 1;
}
