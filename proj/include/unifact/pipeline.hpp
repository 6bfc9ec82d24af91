#pragma once

#include <array>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "unifact/elimination.hpp"
#include "unifact/splitting.hpp"

namespace unifact {

struct RunConfig {
    double tol = 1e-10;
    double epsilon = 0.5;       // subdivision closeness; <= 1/2 keeps |a| >= 1/2
    double pivot_floor = 1e-6;
    std::size_t cover_radius = 3; // grid cells
    std::size_t max_factors = 4096;
    std::string backend = "float"; // exact is reserved for the symbolic reports
    double zero_tol = 1e-12;
    double snap_tol = 1e-12;

    void validate() const {
        if (tol <= 0 || epsilon <= 0 || pivot_floor <= 0 || zero_tol <= 0)
            throw BadInput("config: tolerances must be positive");
        if (epsilon > 0.5)
            throw BadInput("config: epsilon must stay at or below 1/2 for the pivot guarantee");
        if (backend != "float" && backend != "exact")
            throw BadInput("config: backend must be float or exact");
    }
};

struct CertFactor {
    std::string pair_id;
    ReplicaSign sign;
    std::string stage; // split index + producing stage
    ScalarField h;
};

struct FactorizationCertificate {
    std::string format = "cert-v1";
    std::string form = "replica"; // or "exponential"
    std::string input_digest;
    RunConfig config;
    std::vector<CertFactor> factors;
    std::vector<std::string> provenance;
    double max_residual = 0.0;
    double det_drift = 0.0;
    double max_unipotency_defect = 0.0;
    double max_interpolation_defect = 0.0;

    std::size_t factor_count() const { return factors.size(); }
};

struct Problem {
    BundlePtr bundle;
    std::vector<PairPtr> pairs;
    BundleMap f_map;
    BundleHomotopy f_t;
};

namespace detail {

inline Replica to_replica(const PairPtr& pair, const ReplicaParam& p) {
    return {pair, p.sign, p.h};
}

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

/// Freeze the interior of the homotopy to Id on a neighborhood of {f = 0}
/// via the fibrewise contraction exp(chi * log G_t). The endpoint map is
/// never touched. Returns the flattened homotopy and the neighborhood.
inline std::pair<BundleHomotopy, Region> flatten_near_zero_set(const BundleHomotopy& g_t,
                                                               const ScalarField& f,
                                                               std::size_t max_radius,
                                                               double zero_tol,
                                                               double log_radius = 0.45) {
    const DomainPtr dom = g_t.bundle->domain();
    const double ztol = zero_tol * (1.0 + f.max_abs());
    const Region zero = f.zero_set(ztol);
    if (zero.empty()) return {g_t, Region(dom)};

    for (std::size_t r = max_radius + 1; r-- > 0;) {
        const Region omega2 = zero.dilate(r);
        const Region omega2t = omega2.dilate(std::max<std::size_t>(r, 1));
        double worst = 0.0;
        for (std::size_t fr = 1; fr + 1 < g_t.frames.size(); ++fr)
            worst = std::max(worst, g_t.frames[fr].max_dist_to_identity_on(omega2t));
        if (worst > log_radius) continue;
        const CutoffFunction chi = make_cutoff(dom, omega2, omega2t);
        BundleHomotopy out = g_t;
        for (std::size_t fr = 1; fr + 1 < out.frames.size(); ++fr) {
            for (std::size_t c = 0; c < out.bundle->chart_count(); ++c) {
                const Region& region = out.bundle->chart(c).region;
                auto& vals = out.frames[fr].charts[c].values;
                for (std::size_t i = 0; i < vals.size(); ++i) {
                    if (!region.contains(i) || chi.values[i] >= 1.0) continue;
                    if (chi.values[i] == 0.0) {
                        vals[i] = Mat2d::identity();
                        continue;
                    }
                    vals[i] = exp_mat2(cdouble(chi.values[i]) * log_near_identity(vals[i]));
                }
            }
        }
        return {out, omega2};
    }
    // last resort: freeze exactly on the zero samples, where strong nullity
    // already puts every frame within tolerance of Id
    BundleHomotopy out = g_t;
    for (auto& fr : out.frames)
        for (std::size_t c = 0; c < out.bundle->chart_count(); ++c)
            for (std::size_t i = 0; i < fr.charts[c].values.size(); ++i)
                if (zero.contains(i)) fr.charts[c].values[i] = Mat2d::identity();
    return {out, zero};
}

/// Express a bundle homotopy in the frame of the pair's sections. Defined
/// off {f = 0}; on the identity neighborhood the frames are pinned to Id.
inline HomotopyField to_section_frame(const BundleHomotopy& g_t, const NilpotentPair& pair,
                                      const Region& id_nbhd, double zero_tol,
                                      double near_tol = 1e-8) {
    const DomainPtr dom = g_t.bundle->domain();
    const double ztol = zero_tol * (1.0 + pair.f.max_abs());
    std::vector<MatrixField> frames;
    frames.reserve(g_t.frames.size());
    for (std::size_t fr = 0; fr < g_t.frames.size(); ++fr) {
        MatrixField out(dom);
        for (std::size_t i = 0; i < dom->size(); ++i) {
            const std::size_t c = g_t.bundle->primary_chart(i);
            const Mat2d& m = g_t.frames[fr].charts[c].values[i];
            if (id_nbhd.contains(i)) {
                if (op_norm(m - Mat2d::identity()) > near_tol)
                    throw NotIdentityNearZeroSet(
                        "section frame: map is not Id on the declared neighborhood at sample " +
                        std::to_string(i));
                out.values[i] = Mat2d::identity();
                continue;
            }
            if (std::abs(pair.f.values[i]) <= ztol)
                throw CoverDoesNotContainZeroSet(
                    "section frame: zero sample outside the identity neighborhood");
            const Mat2d& s = pair.sections.section_matrix[c].values[i];
            const cdouble det = s.det();
            out.values[i] = (cdouble(1.0) / det) * (s.adjugate() * m * s);
        }
        frames.push_back(std::move(out));
    }
    return HomotopyField(g_t.times, std::move(frames));
}

} // namespace detail

/// Build the cover of {f = 0} for the localization stage: per chart, the
/// zero samples it owns dilated inside the chart region.
inline std::vector<CoverElement> build_zero_set_cover(const PairPtr& pair,
                                                      std::size_t radius, double zero_tol) {
    const BundlePtr bundle = pair->bundle;
    const DomainPtr dom = bundle->domain();
    const double ztol = zero_tol * (1.0 + pair->f.max_abs());
    const Region zero = pair->f.zero_set(ztol);
    std::vector<CoverElement> cover;
    if (zero.empty()) return cover;
    Region assigned(dom);
    for (std::size_t c = 0; c < bundle->chart_count(); ++c) {
        const Region& region = bundle->chart(c).region;
        Region own(dom);
        for (std::size_t i = 0; i < dom->size(); ++i)
            if (zero.contains(i) && region.contains(i) && !assigned.contains(i)) own.insert(i);
        if (own.empty()) continue;
        assigned = assigned.unite(own);
        CoverElement el;
        el.chart = c;
        el.omega = own.dilate(radius).intersect(region);
        el.omega_tilde = el.omega.dilate(std::max<std::size_t>(radius, 1)).intersect(region);
        cover.push_back(std::move(el));
    }
    if (!zero.is_subset_of(assigned))
        throw CoverDoesNotContainZeroSet("cover: some zero samples lie in no chart");
    return cover;
}

struct VerifyReport {
    double max_residual = 0.0;
    double det_drift = 0.0;
    double max_interpolation_defect = 0.0;
    double max_unipotency_defect = 0.0;
    std::size_t worst_factor = 0;
    bool passed = false;
};

/// Replay the certificate against F: multiply the replica factors in order
/// and measure the reconstruction residual, determinant drift along the
/// partial products, unipotency of every factor and the vanishing of each
/// h on its pair's zero set.
inline VerifyReport verify_certificate(const BundleMap& f_map,
                                       const FactorizationCertificate& cert,
                                       const std::map<std::string, PairPtr>& pairs,
                                       double tol_scale = 10.0) {
    VerifyReport rep;
    const BundlePtr bundle = f_map.bundle;
    BundleMap acc = BundleMap::identity_map(bundle);
    for (std::size_t k = 0; k < cert.factors.size(); ++k) {
        const auto& cf = cert.factors[k];
        auto it = pairs.find(cf.pair_id);
        if (it == pairs.end())
            throw UnknownPair("verify: certificate references unknown pair " + cf.pair_id);
        const Replica rep_k{it->second, cf.sign, cf.h};
        require_same_domain(cf.h.domain, bundle->domain(), "verify factor");
        const BundleMap u = replica_bundle_map(rep_k);
        for (std::size_t c = 0; c < u.charts.size(); ++c) {
            const Region& region = bundle->chart(c).region;
            for (std::size_t i = 0; i < u.charts[c].values.size(); ++i) {
                if (!region.contains(i)) continue;
                const Mat2d n = u.charts[c].values[i] - Mat2d::identity();
                rep.max_unipotency_defect =
                    std::max(rep.max_unipotency_defect, max_abs(n * n));
            }
        }
        const double ztol = cert.config.zero_tol * (1.0 + it->second->f.max_abs());
        const Region zero = it->second->f.zero_set(ztol);
        rep.max_interpolation_defect =
            std::max(rep.max_interpolation_defect, cf.h.max_abs_on(zero));
        acc = acc.compose(u);
        rep.det_drift = std::max(rep.det_drift, acc.max_det_drift());
    }
    rep.max_residual = acc.max_dist_to(f_map);
    const double budget =
        cert.config.tol * tol_scale * static_cast<double>(std::max<std::size_t>(1, cert.factors.size()));
    rep.passed = rep.max_residual <= std::max(budget, cert.max_residual * 1.0000001) &&
                 rep.max_interpolation_defect <= cert.config.tol &&
                 rep.max_unipotency_defect <= cert.config.tol;
    return rep;
}

/// Run the whole factorization: split into suitable factors, upgrade their
/// decay order, localize each to the identity near its zero set, flatten the
/// homotopy there, reduce to SU(2), subdivide and factor the near-identity
/// quotients. Emits an ordered replica certificate that replays to F.
inline FactorizationCertificate factor_automorphism(const Problem& problem,
                                                    const RunConfig& config,
                                                    const std::string& input_digest = "") {
    config.validate();
    const BundlePtr bundle = problem.bundle;
    const DomainPtr dom = bundle->domain();
    FactorizationCertificate cert;
    cert.config = config;
    cert.input_digest = input_digest;

    // --- input validation ------------------------------------------------
    if (problem.pairs.empty()) throw BadInput("factor: need at least one pair");
    problem.f_t.validate_shape();
    if (problem.f_map.max_det_drift() > config.tol * 10)
        throw StageError("input", "F is not special: determinant drifts from 1");
    if (problem.f_t.frames.front().max_dist_to_identity() > config.tol)
        throw StageError("input", "null-homotopy must start at Id");
    if (problem.f_t.frames.back().max_dist_to(problem.f_map) > config.tol)
        throw StageError("input", "null-homotopy must end at F");
    if (problem.pairs.size() > 1) {
        Region common(dom, true);
        for (const auto& p : problem.pairs) {
            const double ztol = config.zero_tol * (1.0 + p->f.max_abs());
            common = common.intersect(p->f.zero_set(ztol));
        }
        if (!common.empty())
            throw StageError("input", "the pair functions share a common zero");
    }

    // exact-identity input: empty certificate
    if (problem.f_map.max_dist_to_identity() == 0.0) {
        cert.provenance.push_back("input is the identity; empty factor list");
        return cert;
    }

    // --- stage 1: suitable factors ----------------------------------------
    std::vector<ScalarField> fs;
    fs.reserve(problem.pairs.size());
    for (const auto& p : problem.pairs) fs.push_back(p->f);

    std::vector<SuitableFactor> suitable;
    SplitOptions sopt;
    sopt.radius = config.cover_radius;
    sopt.zero_tol = config.zero_tol;
    if (problem.pairs.size() == 1) {
        const double ztol = config.zero_tol * (1.0 + fs[0].max_abs());
        const Region zero = fs[0].zero_set(ztol);
        if (!zero.empty() && problem.f_map.max_dist_to_identity_on(zero) > config.tol)
            throw StageError("split",
                             "single pair: F must already be Id on the zero set of its f");
        SuitableFactor only;
        only.zero_index = 0;
        only.map = problem.f_map;
        only.homotopy = problem.f_t;
        suitable.push_back(std::move(only));
        cert.provenance.push_back("split: single pair, no splitting needed");
    } else {
        try {
            suitable = split_general(problem.f_map, problem.f_t, fs, sopt);
        } catch (const Error& e) {
            throw StageError("split", e.what());
        }
        cert.provenance.push_back("split: " + std::to_string(suitable.size()) + " factors");
    }

    // --- stage 2: divisibility upgrade -------------------------------------
    TaperOptions topt;
    topt.radius = config.cover_radius;
    topt.zero_tol = config.zero_tol;
    UpgradeResult upgraded;
    try {
        upgraded = upgrade_divisibility(std::move(suitable), fs, topt);
    } catch (const Error& e) {
        throw StageError("upgrade", e.what());
    }
    for (const auto& note : upgraded.notes)
        cert.provenance.push_back("upgrade factor " + std::to_string(note.factor) + ": " +
                                  note.detail);

    // --- stages 3-7 per factor ---------------------------------------------
    std::vector<Replica> all;
    for (std::size_t gi = 0; gi < upgraded.factors.size(); ++gi) {
        const SuitableFactor& g = upgraded.factors[gi];
        const PairPtr pair = problem.pairs[g.zero_index];
        std::vector<Replica> loc_replicas;
        BundleMap g_prime = g.map;
        BundleHomotopy g_prime_t = g.homotopy;

        const auto cover = build_zero_set_cover(pair, config.cover_radius, config.zero_tol);
        if (!cover.empty()) {
            LocalizeOptions lopt;
            lopt.pivot_floor = config.pivot_floor;
            lopt.zero_tol = config.zero_tol;
            lopt.tol = config.tol;
            try {
                LocalizeResult lr = localize_to_identity(g.map, g.homotopy, pair, cover, lopt);
                loc_replicas = std::move(lr.replicas);
                g_prime = std::move(lr.g_prime);
                g_prime_t = std::move(lr.homotopy);
            } catch (const Error& e) {
                throw StageError("localize", e.what());
            }
            cert.provenance.push_back("localize factor " + std::to_string(gi) + ": " +
                                      std::to_string(cover.size()) + " patches, " +
                                      std::to_string(loc_replicas.size()) + " replicas");
        }

        // flatten the homotopy near the zero set, then change to the frame
        // spanned by the sections
        Region id_nbhd(dom);
        try {
            auto [flat, nbhd] = detail::flatten_near_zero_set(
                g_prime_t, pair->f, config.cover_radius, config.zero_tol);
            g_prime_t = std::move(flat);
            id_nbhd = std::move(nbhd);
            // pin the endpoint to the localized map
            g_prime_t.frames.back() = g_prime;
        } catch (const Error& e) {
            throw StageError("flatten", e.what());
        }

        HomotopyField ghat;
        try {
            ghat = detail::to_section_frame(g_prime_t, *pair, id_nbhd, config.zero_tol);
        } catch (const Error& e) {
            throw StageError("section-frame", e.what());
        }

        Su2Options uopt;
        uopt.zero_tol = config.zero_tol;
        uopt.snap_tol = config.snap_tol;
        Su2Reduction su2;
        try {
            su2 = reduce_to_su2(ghat, pair->f, id_nbhd, uopt);
        } catch (const Error& e) {
            throw StageError("su2", e.what());
        }

        SubdivisionResult sub;
        try {
            sub = subdivide_homotopy(su2.unitary, config.epsilon);
        } catch (const Error& e) {
            throw StageError("subdivide", e.what());
        }
        cert.provenance.push_back("factor " + std::to_string(gi) + ": " +
                                  std::to_string(sub.step_count()) + " subdivision steps");

        std::vector<ReplicaParam> ni;
        try {
            NearIdentityOptions nopt;
            nopt.zero_tol = config.zero_tol;
            ni = factor_near_identity(su2.unitary, sub, pair->f, id_nbhd, nopt);
        } catch (const Error& e) {
            throw StageError("near-identity", e.what());
        }

        auto emit = [&](const ReplicaParam& p, const char* stage) {
            if (p.h.max_abs() == 0.0) return; // exactly trivial factor
            Replica r = detail::to_replica(pair, p);
            all.push_back(std::move(r));
            cert.factors.push_back({pair->id, p.sign,
                                    "G" + std::to_string(gi) + "/" + stage, p.h});
        };
        for (const auto& p : ni) emit(p, "near-identity");
        for (const auto& p : su2.peel) emit(p, "su2-peel");
        for (const auto& r : loc_replicas) {
            if (r.h.max_abs() == 0.0) continue;
            all.push_back(r);
            cert.factors.push_back({pair->id, r.sign,
                                    "G" + std::to_string(gi) + "/localize", r.h});
        }
    }

    // --- padding word: keeps certificates off the locus where all middle
    // parameters vanish, at the cost of four factors whose product is Id.
    // U^-(h) U^+(0) U^-(-h) U^+(0) = Id - h^2 N^2 = Id for any h; taking
    // h = f keeps every parameter zero on the zero set.
    if (!all.empty()) {
        const PairPtr pad_pair = problem.pairs.back();
        ScalarField h_pad = pad_pair->f;
        const double pad_ztol = config.zero_tol * (1.0 + h_pad.max_abs());
        for (auto& v : h_pad.values)
            if (std::abs(v) <= pad_ztol) v = 0.0;
        const ScalarField h_neg = cdouble(-1.0) * h_pad;
        const ScalarField zero_f(dom, 0.0);
        const std::array<std::pair<ReplicaSign, const ScalarField*>, 4> word = {
            std::make_pair(ReplicaSign::Minus, &h_pad),
            std::make_pair(ReplicaSign::Plus, &zero_f),
            std::make_pair(ReplicaSign::Minus, &h_neg),
            std::make_pair(ReplicaSign::Plus, &zero_f)};
        for (const auto& [sign, h] : word) {
            all.push_back({pad_pair, sign, *h});
            cert.factors.push_back({pad_pair->id, sign, "padding", *h});
        }
        cert.provenance.push_back("padding word appended (4 factors, product Id)");
    }

    if (cert.factors.size() > config.max_factors)
        throw StageError("assemble", "factor count " + std::to_string(cert.factors.size()) +
                                         " exceeds the configured maximum");

    // --- replay audit -------------------------------------------------------
    std::map<std::string, PairPtr> by_id;
    for (const auto& p : problem.pairs) by_id[p->id] = p;
    const VerifyReport audit = verify_certificate(problem.f_map, cert, by_id);
    cert.max_residual = audit.max_residual;
    cert.det_drift = audit.det_drift;
    cert.max_unipotency_defect = audit.max_unipotency_defect;
    cert.max_interpolation_defect = audit.max_interpolation_defect;
    cert.provenance.push_back("replay residual " + detail::sci(audit.max_residual) + " over " +
                              std::to_string(cert.factors.size()) + " factors");
    return cert;
}

/// Corollary form: each replica Id + hN is exp(hN) exactly because (hN)^2 = 0,
/// so the exponential certificate carries the same data and replays to the
/// same product.
inline FactorizationCertificate exponentialize(const FactorizationCertificate& cert) {
    FactorizationCertificate out = cert;
    out.form = "exponential";
    out.provenance.push_back("exponential form: factors reinterpreted as exp(h N), exact");
    return out;
}

} // namespace unifact
