#include "jacspec/report.hpp"

#include <cmath>

namespace jacspec {

using ojson = nlohmann::ordered_json;

namespace {

ojson finite_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

void record_error(ojson& report, const std::string& stage, const std::string& what, const std::string& message) {
    report["errors"].push_back({{"stage", stage}, {"source", what}, {"message", message}});
}

bool alpha_jacobi_family(const std::string& f) {
    return f == "dirac-alpha" || f == "dirac-alpha-display" || f == "dirac-alpha-simple" || f == "boundary-alpha";
}

}  // namespace

ojson to_json(const SeriesVerdict& v) {
    return {{"state", to_string(v.state)},
            {"partial_sum", finite_or_null(v.partial_sum)},
            {"tail_estimate", finite_or_null(v.tail_estimate)},
            {"n_used", v.n_used},
            {"decay_exponent", finite_or_null(v.growth_exponent_estimate)},
            {"ratio", finite_or_null(v.ratio_estimate)}};
}

ojson to_json(const CriterionReport& r) {
    ojson evidence = ojson::object();
    for (const auto& [k, v] : r.evidence) evidence[k] = v;
    ojson j;
    j["criterion_id"] = r.criterion_id;
    if (!r.condition.empty()) j["condition"] = r.condition;
    j["verdict"] = to_string(r.verdict);
    j["implied_property"] = r.implied_property;
    j["implies_selfadjoint"] = r.implies_selfadjoint;
    j["evidence"] = evidence;
    j["citations"] = r.citations;
    j["notes"] = r.notes;
    j["norm"] = "spectral";
    return j;
}

ojson to_json(const IndexEstimate& e) {
    ojson pts = ojson::array();
    for (const PointEstimate& p : e.points) {
        ojson ladder = ojson::array();
        for (const LadderRung& r : p.ladder) {
            ojson eigs = ojson::array();
            for (double l : r.log_eigs) eigs.push_back(finite_or_null(l));
            ladder.push_back({{"N", r.N}, {"log_eigs", eigs}});
        }
        pts.push_back({{"z", {p.z.real(), p.z.imag()}},
                       {"rank", p.rank},
                       {"stabilized", p.stabilized},
                       {"max_residual", finite_or_null(p.max_residual)},
                       {"ladder", ladder}});
    }
    return {{"method", e.method}, {"n_plus", e.n_plus},     {"n_minus", e.n_minus},
            {"stabilized", e.stabilized}, {"note", e.note}, {"points", pts}};
}

ojson spectrum_summary(const SpectrumSlice& s, int p) {
    const std::size_t k = std::min<std::size_t>(8, s.eigenvalues.size());
    ojson low = ojson::array(), drift = ojson::array();
    double max_drift = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        low.push_back(s.eigenvalues[i]);
        drift.push_back(finite_or_null(s.ritz_stability[i]));
        if (std::isfinite(s.ritz_stability[i])) max_drift = std::max(max_drift, s.ritz_stability[i]);
    }
    return {{"N", s.N},
            {"p", p},
            {"count", s.eigenvalues.size()},
            {"lowest", low},
            {"lowest_drift", drift},
            {"max_lowest_drift", max_drift},
            {"min", s.eigenvalues.empty() ? ojson(nullptr) : ojson(s.eigenvalues.front())},
            {"max", s.eigenvalues.empty() ? ojson(nullptr) : ojson(s.eigenvalues.back())}};
}

ojson block_json(const ScaledBlock& b) {
    ojson rows = ojson::array();
    for (Eigen::Index i = 0; i < b.m.rows(); ++i) {
        ojson row = ojson::array();
        for (Eigen::Index j = 0; j < b.m.cols(); ++j) row.push_back({b.m(i, j).real(), b.m(i, j).imag()});
        rows.push_back(row);
    }
    return {{"log_scale", b.log_scale}, {"mantissa", rows}};
}

IndexOptions index_options(const RunConfig& cfg) {
    IndexOptions opt;
    opt.z_points = cfg.z_points;
    opt.ladder = cfg.ladder;
    opt.ladder_max_pow = cfg.ladder_max_pow;
    opt.tol = cfg.tol;
    return opt;
}

std::vector<CriterionReport> run_criteria(const RunConfig& cfg, const BlockJacobiMatrix& J,
                                          std::vector<std::string>* errors) {
    CriteriaOptions opt;
    opt.n_max = cfg.n_max;
    std::vector<CriterionReport> out;
    auto one = [&](const char* id, auto&& body) {
        try {
            out.push_back(body());
        } catch (const std::exception& e) {
            CriterionReport r;
            r.criterion_id = id;
            r.notes.push_back(std::string("error: ") + e.what());
            out.push_back(r);
            if (errors) errors->push_back(std::string(id) + ": " + e.what());
        }
    };
    auto many = [&](const char* id, auto&& body) {
        try {
            for (auto& r : body()) out.push_back(std::move(r));
        } catch (const std::exception& e) {
            CriterionReport r;
            r.criterion_id = id;
            r.notes.push_back(std::string("error: ") + e.what());
            out.push_back(r);
            if (errors) errors->push_back(std::string(id) + ": " + e.what());
        }
    };
    one("carleman", [&] { return carleman(J, cfg.n_max, opt); });
    one("thm2.2-a1a2", [&] { return selfadjoint_a1a2(J, cfg.N_start, opt); });
    one("cor2.4-power-mean", [&] { return selfadjoint_power_mean(J, cfg.N_start, cfg.s, opt); });
    one("thm3.2-resolvent", [&] { return discrete_resolvent(J, cfg.N_start, cfg.s, cfg.q, opt); });
    one("thm3.3-weighted", [&] { return discrete_weighted(J, cfg.s, opt); });
    one("berezansky", [&] { return berezansky_test(J, cfg.n_max, opt); });
    const std::string& f = cfg.family;
    if (f == "dirac-alpha" || f == "dirac-alpha-display") one("kosmir", [&] { return kosmir_test(J, cfg.n_max, opt); });
    if (alpha_jacobi_family(f)) {
        one("thm5.2-max-alpha", [&] { return max_index_alpha(cfg.model, cfg.n_max, opt); });
        if (cfg.p1 < cfg.p) one("dennis-wall", [&] { return dennis_wall(cfg.model, cfg.p1, opt); });
        many("dirac-suite", [&] { return dirac_criteria(cfg.model, opt); });
    }
    if (f == "dirac-beta" || f == "dirac-beta-simple" || f == "perturbed-beta")
        one("thm5.8-max-beta", [&] { return max_index_beta(cfg.model, cfg.n_max, opt); });
    if (f == "perturbed-alpha")
        one("thm6.3-perturbed-alpha", [&] { return perturbation_alpha_conditions(cfg.model, *cfg.perturbation, opt); });
    if (f == "schrodinger-j1" || f == "schrodinger-j2")
        many("schrodinger-suite", [&] { return schrodinger_criteria(cfg.model, cfg.s, opt); });
    return out;
}

RunOutcome run(const RunConfig& cfg, const std::vector<Stage>& stages, const std::string& command) {
    RunOutcome out;
    ojson& rep = out.report;
    rep["tool"] = "jacspec";
    rep["version"] = kToolVersion;
    rep["command"] = command;
    rep["config"] = cfg.echo;
    rep["errors"] = ojson::array();

    std::optional<BlockJacobiMatrix> J;
    try {
        J.emplace(build_matrix(cfg));
        rep["matrix"] = {{"family", cfg.family}, {"name", J->name()}, {"p", cfg.p}};
    } catch (const std::exception& e) {
        record_error(rep, "build", cfg.family, e.what());
        out.numeric_failure = true;
        return out;
    }

    auto guarded = [&](const char* stage, const std::string& what, auto&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            record_error(rep, stage, what, e.what());
            out.numeric_failure = true;
        }
    };

    for (Stage st : stages) {
        switch (st) {
            case Stage::Build: {
                ojson blocks = ojson::array();
                guarded("build", "blocks", [&] {
                    for (long n = 0; n < cfg.build_blocks; ++n) {
                        const std::size_t k = static_cast<std::size_t>(n);
                        blocks.push_back({{"n", n},
                                          {"A", block_json(J->diag_scaled(k))},
                                          {"B", block_json(J->offdiag_scaled(k))}});
                    }
                });
                rep["blocks"] = blocks;
                break;
            }
            case Stage::Criteria: {
                ojson list = ojson::array();
                std::vector<std::string> errs;
                for (const CriterionReport& r : run_criteria(cfg, *J, &errs)) list.push_back(to_json(r));
                for (const auto& e : errs) record_error(rep, "criteria", "criterion", e);
                if (!errs.empty()) out.numeric_failure = true;
                rep["criteria"] = list;
                break;
            }
            case Stage::Index: {
                const IndexOptions opt = index_options(cfg);
                guarded("index", "krein-kernel", [&] { rep["index"] = to_json(estimate_index(*J, opt)); });
                ojson cross = ojson::array();
                if (cfg.family == "dirac-alpha" || cfg.family == "dirac-beta")
                    guarded("index", "dirac-defect",
                            [&] { cross.push_back(to_json(dirac_index_estimate(cfg.model, cfg.n_max, opt))); });
                if (cfg.family == "dyukarev" && cfg.p1 > 0)
                    guarded("index", "dyukarev-beta-route", [&] {
                        cross.push_back(to_json(dyukarev_dirac_route(cfg.p, cfg.p1, 1.0, cfg.n_max, opt)));
                    });
                if (!cross.empty()) rep["index_cross_checks"] = cross;
                break;
            }
            case Stage::Spectrum: {
                guarded("spectrum", "truncation", [&] {
                    out.slices.push_back(
                        truncation_spectrum(*J, static_cast<std::size_t>(cfg.spectrum_N), cfg.dense_cap));
                    rep["spectrum"] = spectrum_summary(out.slices.back(), cfg.p);
                });
                break;
            }
        }
    }
    return out;
}

}  // namespace jacspec
