// Command line driver: factor determinant-1 automorphisms of sampled rank-2
// bundle data into unipotent replica products, verify the resulting
// certificates, and run the exact symbolic identity suite.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "unifact/examples.hpp"
#include "unifact/io.hpp"
#include "unifact/plot.hpp"

namespace {

using namespace unifact;
using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitVerifyFail = 2;
constexpr int kExitStageError = 3;

Mat2d matrix_from_json(const json& j) {
    if (j.is_array()) {
        if (j.size() != 2 || j[0].size() != 2 || j[1].size() != 2)
            throw BadInput("matrix: expected [[ [re,im], [re,im] ], [ [re,im], [re,im] ]]");
        return Mat2d(io::complex_from_json(j[0][0]), io::complex_from_json(j[0][1]),
                     io::complex_from_json(j[1][0]), io::complex_from_json(j[1][1]));
    }
    return Mat2d(io::complex_from_json(j.at("a11")), io::complex_from_json(j.at("a12")),
                 io::complex_from_json(j.at("a21")), io::complex_from_json(j.at("a22")));
}

void apply_overrides(RunConfig& cfg, double tol, double epsilon, const std::string& backend) {
    if (tol > 0) cfg.tol = tol;
    if (epsilon > 0) cfg.epsilon = epsilon;
    if (!backend.empty()) cfg.backend = backend;
    cfg.validate();
}

void plot_certificate(const std::string& dir, const Problem& problem,
                      const FactorizationCertificate& cert) {
    std::filesystem::create_directories(dir);
    // cumulative distance of the partial products to F
    BundleMap acc = BundleMap::identity_map(problem.bundle);
    std::map<std::string, PairPtr> by_id;
    for (const auto& p : problem.pairs) by_id[p->id] = p;
    std::vector<double> xs, residuals, hmax;
    xs.push_back(0);
    residuals.push_back(acc.max_dist_to(problem.f_map));
    for (std::size_t k = 0; k < cert.factors.size(); ++k) {
        const auto& cf = cert.factors[k];
        acc = acc.compose(replica_bundle_map({by_id.at(cf.pair_id), cf.sign, cf.h}));
        xs.push_back(static_cast<double>(k + 1));
        residuals.push_back(acc.max_dist_to(problem.f_map));
        hmax.push_back(cf.h.max_abs());
    }
    write_svg_chart(dir + "/residual.svg", "distance of partial products to F", xs,
                    {{"sup norm", residuals}}, true);
    std::vector<double> fk(xs.begin() + 1, xs.end());
    write_svg_chart(dir + "/factor_magnitudes.svg", "sup |h| per factor", fk,
                    {{"sup |h|", hmax}}, true);
    std::vector<double> sample_idx, fabs_vals;
    for (std::size_t i = 0; i < problem.bundle->domain()->size(); ++i) {
        sample_idx.push_back(static_cast<double>(i));
        fabs_vals.push_back(std::abs(problem.pairs[0]->f.values[i]));
    }
    write_svg_chart(dir + "/pair_function.svg", "|f| of pair " + problem.pairs[0]->id,
                    sample_idx, {{"|f|", fabs_vals}});
}

int cmd_verify_identities(int kmax, std::size_t samples, const std::string& out) {
    std::vector<QModF3Report> reports;
    for (int k = 1; k <= kmax; ++k) reports.push_back(q_mod_f3_check(k));
    std::vector<GradientReport> gradients;
    for (int n = 2; n <= 5; ++n)
        gradients.push_back(gradient_singularity_check(n, samples));
    const DivisibilityReport divis = verify_divisibility_lemmas();
    const json rep = io::identity_report_to_json(reports, gradients, divis);
    if (!out.empty()) io::write_json_file(out, rep);
    bool all = rep.at("passed").get<bool>();
    for (const auto& c : rep.at("checks"))
        std::cout << (c.at("passed").get<bool>() ? "pass  " : "FAIL  ")
                  << c.at("name").get<std::string>() << "\n";
    std::cout << (all ? "all identities hold" : "identity violation") << "\n";
    return all ? kExitPass : kExitVerifyFail;
}

int cmd_eliminate(const std::string& path, double pivot_floor) {
    const Mat2d a = matrix_from_json(io::read_json_file(path));
    const EliminationQuad q = eliminate_four(a, pivot_floor);
    const double residual = op_norm(quad_product(q) - a);
    json out = {{"z1", io::to_json(q.z1)},
                {"z2", io::to_json(q.z2)},
                {"z3", io::to_json(q.z3)},
                {"z4", io::to_json(q.z4)},
                {"residual", residual}};
    std::cout << out.dump(1) << "\n";
    return residual <= 1e-10 ? kExitPass : kExitVerifyFail;
}

int cmd_split(const std::string& input, const std::string& functions, const std::string& out,
              double tol) {
    const json pj = io::read_json_file(input);
    Problem problem = io::problem_from_json(pj);
    const json fj_all = io::read_json_file(functions);
    std::vector<ScalarField> fs;
    for (const auto& fj : fj_all.at("functions"))
        fs.push_back(io::field_from_json(fj, problem.bundle->domain()));
    const auto factors = split_general(problem.f_map, problem.f_t, fs);
    BundleMap acc = BundleMap::identity_map(problem.bundle);
    double marker = 0.0;
    for (const auto& g : factors) {
        acc = acc.compose(g.map);
        const Region zero = fs[g.zero_index].zero_set(1e-12);
        for (const auto& fr : g.homotopy.frames)
            marker = std::max(marker, fr.max_dist_to_identity_on(zero));
    }
    const double residual = acc.max_dist_to(problem.f_map);
    std::cout << "factors: " << factors.size() << "\nreconstruction residual: " << residual
              << "\nstrong nullity defect: " << marker << "\n";
    if (!out.empty()) {
        json jf = json::array();
        for (const auto& g : factors) jf.push_back(io::bundle_map_to_json(g.map));
        io::write_json_file(out, {{"format", "factors-v1"}, {"factors", jf}});
    }
    const double budget = tol > 0 ? tol : 1e-10;
    return (residual <= budget * static_cast<double>(factors.size()) && marker <= budget)
               ? kExitPass
               : kExitVerifyFail;
}

int cmd_factor(const std::string& input, const std::string& config_path, const std::string& out,
               double tol, double epsilon, const std::string& backend,
               const std::string& plot_dir) {
    const json pj = io::read_json_file(input);
    RunConfig cfg;
    if (!config_path.empty()) cfg = io::config_from_json(io::read_json_file(config_path));
    apply_overrides(cfg, tol, epsilon, backend);
    if (cfg.backend == "exact")
        throw BadInput("factor: the exact backend drives the symbolic reports; factorization "
                       "runs on the float backend");
    const Problem problem = io::problem_from_json(pj);
    const FactorizationCertificate cert =
        factor_automorphism(problem, cfg, io::canonical_digest(pj));
    io::write_json_file(out, io::certificate_to_json(cert));
    std::cout << "factors: " << cert.factor_count() << "\nmax residual: " << cert.max_residual
              << "\ncertificate: " << out << "\n";
    if (!plot_dir.empty()) plot_certificate(plot_dir, problem, cert);
    return kExitPass;
}

int cmd_check(const std::string& input, const std::string& cert_path,
              const std::string& plot_dir) {
    const json pj = io::read_json_file(input);
    const Problem problem = io::problem_from_json(pj);
    const FactorizationCertificate cert =
        io::certificate_from_json(io::read_json_file(cert_path));
    if (!cert.input_digest.empty() && cert.input_digest != io::canonical_digest(pj))
        std::cout << "note: input digest differs from the certificate's\n";
    std::map<std::string, PairPtr> by_id;
    for (const auto& p : problem.pairs) by_id[p->id] = p;
    const VerifyReport rep = verify_certificate(problem.f_map, cert, by_id);
    std::cout << "max residual: " << rep.max_residual << "\ndet drift: " << rep.det_drift
              << "\ninterpolation defect: " << rep.max_interpolation_defect
              << "\nunipotency defect: " << rep.max_unipotency_defect << "\n"
              << (rep.passed ? "certificate verifies" : "certificate FAILS") << "\n";
    if (!plot_dir.empty()) plot_certificate(plot_dir, problem, cert);
    return rep.passed ? kExitPass : kExitVerifyFail;
}

int cmd_exponentialize(const std::string& cert_path, std::string out) {
    const FactorizationCertificate cert =
        io::certificate_from_json(io::read_json_file(cert_path));
    const FactorizationCertificate exp_cert = exponentialize(cert);
    if (out.empty()) {
        out = cert_path;
        const auto pos = out.rfind(".json");
        out = (pos == std::string::npos) ? out + "-exp" : out.substr(0, pos) + "-exp.json";
    }
    io::write_json_file(out, io::certificate_to_json(exp_cert));
    std::cout << "exponential-form certificate: " << out << "\n";
    return kExitPass;
}

int cmd_make_example(const std::string& name, const std::string& out, std::size_t points,
                     std::size_t times) {
    Problem p;
    if (name == "circle") {
        p = examples::circle_diagonal(points ? points : 256, times ? times : 65);
    } else if (name == "interval") {
        p = examples::interval_two_chart(points ? points : 257, times ? times : 33);
    } else if (name == "two-pairs") {
        p = examples::interval_two_pairs(points ? points : 129, times ? times : 17);
    } else {
        throw BadInput("make-example: unknown example " + name +
                       " (available: circle, interval, two-pairs)");
    }
    io::write_json_file(out, io::problem_to_json(p));
    std::cout << "wrote " << out << "\n";
    return kExitPass;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"factor special automorphisms of sampled rank-2 bundles into unipotent "
                 "replicas and verify the exact matrix-product identities"};
    app.require_subcommand(1);
    app.fallthrough();

    double tol = -1, epsilon = -1, pivot_floor = 1e-6;
    std::string backend, plot_dir;
    app.add_option("--tol", tol, "override tolerance");
    app.add_option("--epsilon", epsilon, "override subdivision closeness");
    app.add_option("--backend", backend, "float or exact")
        ->check(CLI::IsMember({"float", "exact"}));
    app.add_option("--plot", plot_dir, "emit static SVG plots into this directory");

    auto* vi = app.add_subcommand("verify-identities", "exact symbolic identity suite");
    int kmax = 6;
    std::size_t samples = 1000;
    std::string vi_out;
    vi->add_option("--k", kmax, "largest product length to expand")->check(CLI::Range(1, 8));
    vi->add_option("--samples", samples, "random samples for the gradient check");
    vi->add_option("--out", vi_out, "write identity-report-v1 JSON here");

    auto* el = app.add_subcommand("eliminate", "four-factor elimination of one matrix");
    std::string el_matrix;
    el->add_option("--matrix", el_matrix, "JSON matrix file")->required();
    el->add_option("--pivot-floor", pivot_floor, "smallest allowed |a|");

    auto* sp = app.add_subcommand("split", "split into factors suitable for the functions");
    std::string sp_input, sp_functions, sp_out;
    sp->add_option("--input", sp_input, "problem-v1 JSON")->required();
    sp->add_option("--functions", sp_functions, "JSON with a functions array")->required();
    sp->add_option("--out", sp_out, "write the factor maps here");

    auto* fa = app.add_subcommand("factor", "run the full factorization pipeline");
    std::string fa_input, fa_config, fa_out = "cert.json";
    fa->add_option("--input", fa_input, "problem-v1 JSON")->required();
    fa->add_option("--config", fa_config, "RunConfig JSON");
    fa->add_option("--out", fa_out, "certificate output path");

    auto* ck = app.add_subcommand("check", "replay a certificate against its input");
    std::string ck_input, ck_cert;
    ck->add_option("--input", ck_input, "problem-v1 JSON")->required();
    ck->add_option("--cert", ck_cert, "cert-v1 JSON")->required();

    auto* ex = app.add_subcommand("exponentialize", "rewrite a certificate in exponential form");
    std::string ex_cert, ex_out;
    ex->add_option("--cert", ex_cert, "cert-v1 JSON")->required();
    ex->add_option("--out", ex_out, "output path");

    auto* me = app.add_subcommand("make-example", "write a ready-to-run example problem");
    std::string me_name, me_out = "problem.json";
    std::size_t me_points = 0, me_times = 0;
    me->add_option("name", me_name, "circle, interval or two-pairs")->required();
    me->add_option("--out", me_out, "output path");
    me->add_option("--points", me_points, "spatial samples");
    me->add_option("--times", me_times, "time samples");

    CLI11_PARSE(app, argc, argv);

    try {
        if (vi->parsed()) return cmd_verify_identities(kmax, samples, vi_out);
        if (el->parsed()) return cmd_eliminate(el_matrix, pivot_floor);
        if (sp->parsed()) return cmd_split(sp_input, sp_functions, sp_out, tol);
        if (fa->parsed())
            return cmd_factor(fa_input, fa_config, fa_out, tol, epsilon, backend, plot_dir);
        if (ck->parsed()) return cmd_check(ck_input, ck_cert, plot_dir);
        if (ex->parsed()) return cmd_exponentialize(ex_cert, ex_out);
        if (me->parsed()) return cmd_make_example(me_name, me_out, me_points, me_times);
    } catch (const unifact::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStageError;
    }
    return kExitPass;
}
