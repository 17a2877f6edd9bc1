// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "jacspec/criteria.hpp"
#include "jacspec/indices.hpp"
#include "jacspec/spectra.hpp"

using namespace jacspec;

namespace {

// pinned tolerances
constexpr double kSumTol = 1e-6;        // criterion 3(a)
constexpr double kClosedFormTol = 1e-12; // criteria 5, 7
constexpr double kSlopeTol = 0.05;       // criterion 5
constexpr double kResidualTol = 1e-10;   // criterion 6
constexpr double kAntitoneSlack = 1e-10; // criterion 6
constexpr double kWitnessTol = 1e-3;     // criterion 8
constexpr double kSchattenTol = 1e-9;    // criterion 9
constexpr double kRankFloor = 1e-8;      // criterion 7

/// Collects failed checks of one criterion.
struct Check {
    std::vector<std::string> failures;
    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
};

std::string str(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

InteractionModel alpha_model(int p, ScalarSequence d, BlockSequence alpha, double c = 1.0) {
    InteractionModel m;
    m.p = p;
    m.c = c;
    m.d = std::move(d);
    m.alpha = std::move(alpha);
    return m;
}

InteractionModel beta_model(int p, ScalarSequence d, BlockSequence beta, double c = 1.0) {
    InteractionModel m;
    m.p = p;
    m.c = c;
    m.d = std::move(d);
    m.beta = std::move(beta);
    return m;
}

/// d_n = 1/(36^{n-1} n^2)
ScalarSequence max_sa_d() { return ScalarSequence::product_weighted(1.0, 5.0); }

IndexOptions ladder_to(int max_pow, std::vector<cplx> z = {cplx(0, 1), cplx(0, -1)}) {
    IndexOptions o;
    o.ladder_max_pow = max_pow;
    o.z_points = std::move(z);
    return o;
}

CriteriaOptions horizon(long n_max) {
    CriteriaOptions o;
    o.n_max = n_max;
    return o;
}

BlockJacobiMatrix free_scalar() {
    return make_general(1, [](std::size_t) { return Block::Zero(1, 1); },
                        [](std::size_t) { return Block::Identity(1, 1); }, "free");
}

Block random_hermitian(std::mt19937_64& rng, int p) {
    std::normal_distribution<double> g;
    Block m(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) m(i, j) = cplx(g(rng), g(rng));
    return (m + m.adjoint()) * 0.5;
}

// ---- criteria ----

void dyukarev_reproduction(Check& ck) {
    for (auto [p, p1] : {std::pair{2, 1}, std::pair{3, 2}, std::pair{2, 0}}) {
        const std::string tag = "(" + std::to_string(p) + "," + std::to_string(p1) + ")";
        auto est = estimate_index(make_dyukarev(p, p1), ladder_to(12));
        ck.expect(est.n_plus == p1 && est.n_minus == p1,
                  tag + " index " + std::to_string(est.n_plus) + "/" + std::to_string(est.n_minus));
        ck.expect(est.stabilized, tag + " not stabilized");
        ck.expect(est.points.back().ladder.back().N == 4096, tag + " ladder stopped early");
    }
    ck.expect(carleman(make_dyukarev(2, 0), 10000).verdict == Verdict::Satisfied, "(2,0) carleman not Satisfied");
}

void maximal_index_iff_l1(Check& ck) {
    auto g = estimate_index(make_dirac_alpha(alpha_model(1, ScalarSequence::geometric(0.5), BlockSequence::zero())),
                            ladder_to(10));
    ck.expect(g.n_plus == 1 && g.n_minus == 1, "2^-n index " + std::to_string(g.n_plus));
    auto h = estimate_index(make_dirac_alpha(alpha_model(1, ScalarSequence::power(-1.0), BlockSequence::zero())),
                            ladder_to(10));
    ck.expect(h.n_plus == 0 && h.n_minus == 0, "1/n index " + std::to_string(h.n_plus));
}

void maximal_selfadjoint_proposition(Check& ck) {
    for (int p : {1, 2}) {
        const std::string tag = "p=" + std::to_string(p);
        auto m = alpha_model(p, max_sa_d(), BlockSequence::constant_scalar(5.0));
        auto r = max_index_alpha(m, 10000);
        ck.expect(r.criterion_id == "thm5.2-max-alpha" && r.verdict == Verdict::Satisfied, tag + " max-alpha verdict");
        const double err = std::abs(r.get("sum") - (M_PI * M_PI / 6.0 - 1.0));
        ck.expect(err < kSumTol, tag + " sum error " + str(err));
        auto est = estimate_index(make_dirac_alpha(m), ladder_to(10));
        ck.expect(est.n_plus == p && est.n_minus == p, tag + " index " + std::to_string(est.n_plus));
        auto suite = dirac_criteria(m, horizon(2000)).at(0);
        ck.expect(suite.verdict == Verdict::Satisfied, tag + " dirac suite verdict");
        ck.expect(std::abs(suite.get("witness") - 1.0 / std::sqrt(5.0)) < 1e-12, tag + " witness " + str(suite.get("witness")));
    }
}

void cross_method(Check& ck) {
    const IndexOptions opt = ladder_to(11);
    std::vector<std::pair<std::string, InteractionModel>> fams = {
        {"2^-n", alpha_model(1, ScalarSequence::geometric(0.5), BlockSequence::zero())},
        {"1/n", alpha_model(1, ScalarSequence::power(-1.0), BlockSequence::zero())},
        {"max_s-a p=1", alpha_model(1, max_sa_d(), BlockSequence::constant_scalar(5.0))},
        {"max_s-a p=2", alpha_model(2, max_sa_d(), BlockSequence::constant_scalar(5.0))},
    };
    for (const auto& [tag, m] : fams) {
        auto d = dirac_index_estimate(m, 2048, opt);
        auto k = estimate_index(make_dirac_alpha(m), opt);
        ck.expect(d.n_plus == k.n_plus && d.n_minus == k.n_minus,
                  tag + ": defect " + std::to_string(d.n_plus) + " vs kernel " + std::to_string(k.n_plus));
    }
    for (auto [p, p1] : {std::pair{2, 1}, std::pair{3, 2}, std::pair{2, 0}}) {
        auto route = dyukarev_dirac_route(p, p1, 1.0, 2048, opt);
        auto k = estimate_index(make_dyukarev(p, p1), opt);
        ck.expect(route.n_plus == k.n_plus && route.n_minus == k.n_minus,
                  "dyukarev (" + std::to_string(p) + "," + std::to_string(p1) + "): route " +
                      std::to_string(route.n_plus) + " vs kernel " + std::to_string(k.n_plus));
    }
}

void kosmir_closed_forms(Check& ck) {
    auto m = alpha_model(2, ScalarSequence::geometric(0.5), BlockSequence::constant_scalar(3.0));
    auto C = kosmir_sequence_all(make_dirac_alpha(m), 100);
    auto d = [&](long k) { return m.d.eval(k); };
    const double nu1 = nu(d(1), 1.0);
    double worst = 0.0;
    for (long n = 2; n <= 100; ++n) {
        const long j = n / 2;
        const double sign = j % 2 ? -1.0 : 1.0;
        const double expect = n % 2 ? sign * nu1 * std::pow(d(j + 1), 1.5) / (nu(d(j + 1), 1.0) * std::pow(d(1), 1.5))
                                    : sign * std::sqrt(d(j + 1)) * std::pow(d(1), 1.5) / nu1;
        const Block got = C[static_cast<std::size_t>(n)].value();
        const double rel = (got - expect * Block::Identity(2, 2)).norm() / (std::sqrt(2.0) * std::abs(expect));
        worst = std::max(worst, rel);
    }
    ck.expect(worst <= kClosedFormTol, "closed-form relative error " + str(worst));

    const double c = 1.0, d1 = 0.5;
    auto disp = make_dirac_alpha_display(alpha_model(1, ScalarSequence::geometric(0.5), BlockSequence::constant_scalar(1.0), c));
    auto sums = kosmir_odd_partial_sums(disp, 400);
    const double slope = (sums[399] - sums[199]) / 200.0;
    const double expect = std::pow(nu(d1, c), 2) / (c * d1 * d1 * d1);
    ck.expect(std::abs(slope / expect - 1.0) <= kSlopeTol, "slope " + str(slope) + " vs " + str(expect));
}

void krein_invariants(Check& ck) {
    auto ma = alpha_model(2, ScalarSequence::geometric(0.5), BlockSequence::constant_scalar(5.0));
    auto mb = beta_model(2, ScalarSequence::dyukarev_d(1.0), BlockSequence::scaled_identity(ScalarSequence::dyukarev_d(1.0), -1.0));
    auto ms = alpha_model(1, ScalarSequence::power(-2.0), BlockSequence::scaled_identity(ScalarSequence::power(4.0)));
    auto mh = alpha_model(1, ScalarSequence::power(-1.0), BlockSequence::zero());
    std::vector<BlockJacobiMatrix> fams = {free_scalar(),
                                           make_dirac_alpha(ma),
                                           make_dirac_alpha_display(ma),
                                           make_dirac_alpha_simple(ma),
                                           make_boundary_alpha(ma),
                                           make_dirac_alpha(mh),
                                           make_dirac_alpha(alpha_model(2, max_sa_d(), BlockSequence::constant_scalar(5.0))),
                                           make_dirac_beta(mb),
                                           make_dirac_beta_simple(mb),
                                           make_schrodinger_J1(ms),
                                           make_schrodinger_J2(ms),
                                           make_dyukarev(2, 1),
                                           make_dyukarev(3, 2),
                                           make_dyukarev(2, 0)};
    for (const auto& J : fams) {
        for (cplx z : {cplx(0, 1), cplx(1, 1)}) {
            KreinState s = krein_init(J, z);
            double worst = 0.0;
            for (int n = 0; n < 2000; ++n) {
                krein_advance(s, J);
                worst = std::max(worst, s.last_residual);
            }
            ck.expect(worst <= kResidualTol, J.name() + " residual " + str(worst));
        }
        auto est = estimate_index(J, ladder_to(11, {cplx(0, 1), cplx(1, 1)}));
        for (const auto& pe : est.points)
            for (std::size_t r = 1; r < pe.ladder.size(); ++r) {
                const auto& a = pe.ladder[r - 1].log_eigs;
                const auto& b = pe.ladder[r].log_eigs;
                for (std::size_t k = 0; k < a.size() && k < b.size(); ++k)
                    if (std::isfinite(b[k]) && std::isfinite(a[k]))
                        ck.expect(b[k] <= a[k] + kAntitoneSlack, J.name() + " ladder not antitone at N=" +
                                                                     std::to_string(pe.ladder[r].N));
            }
    }
}

void defect_recursion(Check& ck) {
    double worst = 0.0;
    for (int p : {1, 2, 3}) {
        auto m = alpha_model(p, ScalarSequence::power(-1.5, 0.8), BlockSequence::zero(), 0.7);
        auto sol = dirac_defect_recursion(m, 50);
        double S = 0.0;
        for (long n = 1; n <= 50; ++n) {
            S += m.d.eval(n);
            const auto& st = sol.steps[static_cast<std::size_t>(n - 1)];
            auto [U, V] = defect_true_UV(m, n);
            const double eu = std::exp(S / m.c), ev = std::exp(-S / m.c);
            worst = std::max({worst, std::abs(st.log_norm_U - S / m.c) / std::max(1.0, S / m.c),
                              std::abs(st.log_norm_V + S / m.c) / std::max(1.0, S / m.c),
                              (U - eu * Block::Identity(p, p)).norm() / eu,
                              (V - ev * Block::Identity(p, p)).norm() / ev});
        }
    }
    ck.expect(worst <= kClosedFormTol, "alpha = 0 closed form error " + str(worst));

    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> pick_p(1, 3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int bound_violations = 0;
    double min_rank = std::numeric_limits<double>::infinity();
    for (int draw = 0; draw < 100; ++draw) {
        const int p = pick_p(rng);
        const double c = 0.5 + 2.0 * u(rng);
        std::vector<Block> strengths;
        for (int k = 0; k < 201; ++k) {
            Block h = random_hermitian(rng, p);
            const double n = spec_norm(h);
            if (n > 0) h *= 10.0 * u(rng) / n;
            strengths.push_back(h);
        }
        auto seq = BlockSequence::custom([strengths](long k, int) { return strengths[static_cast<std::size_t>(k)]; });
        auto m = alpha_model(p, u(rng) < 0.5 ? ScalarSequence::power(-1.0) : ScalarSequence::geometric(0.7), seq, c);
        auto sol = dirac_defect_recursion(m, 200);
        for (const auto& st : sol.steps)
            if (st.log_norm_U > st.log_bound + 1e-10 || st.log_norm_V > st.log_bound + 1e-10) ++bound_violations;
        min_rank = std::min(min_rank, sol.min_rank_witness);
    }
    ck.expect(bound_violations == 0, std::to_string(bound_violations) + " bound violations");
    ck.expect(min_rank > kRankFloor, "rank witness " + str(min_rank));
}

void perturbation_pair(Check& ck) {
    auto m = beta_model(1, ScalarSequence::dyukarev_d(1.0, -1), BlockSequence::scaled_identity(ScalarSequence::dyukarev_d(1.0, -1), -1.0));
    auto r = perturbation_equivalence(make_dyukarev(1, 1), make_dirac_beta_simple(m), 1, horizon(20000));
    const double a = r.get("a_last_odd");
    ck.expect(std::abs(a - 0.75) <= kWitnessTol, "odd a-witness " + str(a));
    ck.expect(std::abs(r.get("a_last_even") - 0.75) <= kWitnessTol, "even a-witness " + str(r.get("a_last_even")));
    ck.expect(r.verdict == Verdict::Satisfied, std::string("verdict ") + to_string(r.verdict));
    auto route = dyukarev_dirac_route(2, 1, 1.0, 2048, ladder_to(11));
    ck.expect(route.n_plus == 1 && route.n_minus == 1, "beta route index " + std::to_string(route.n_plus));
}

void worked_examples(Check& ck) {
    auto find = [&](const std::vector<CriterionReport>& rs, const std::string& cond) -> const CriterionReport* {
        for (const auto& r : rs)
            if (r.condition == cond) return &r;
        ck.expect(false, "missing condition " + cond);
        return nullptr;
    };
    auto quartic = schrodinger_criteria(
        alpha_model(1, ScalarSequence::power(-2.0), BlockSequence::scaled_identity(ScalarSequence::power(4.0))), 1.0,
        horizon(2000));
    if (auto r = find(quartic, "sh3"))
        ck.expect(r->verdict == Verdict::Satisfied && r->get("witness") < 0.5, "n^4 example sh3");
    auto root = schrodinger_criteria(alpha_model(1, ScalarSequence::power(-0.5), BlockSequence::zero()), 1.0,
                                     horizon(100000));
    if (auto r = find(root, "d_n2"))
        ck.expect(r->verdict == Verdict::Satisfied && r->implied_property == "selfadjoint", "1/sqrt(n) example d_n2");
    auto kernel = schrodinger_criteria(
        alpha_model(1, ScalarSequence::power(-1.0), BlockSequence::scaled_identity(ScalarSequence::power(1.0), -2.0, -1.0)),
        1.0, horizon(2000));
    for (const auto& r : kernel)
        if (r.condition != "d_n2") ck.expect(r.verdict == Verdict::Inconclusive, "kernel guard on " + r.condition);

    auto five = dirac_criteria(alpha_model(1, max_sa_d(), BlockSequence::constant_scalar(5.0)), horizon(2000)).at(0);
    ck.expect(five.verdict == Verdict::Satisfied, "alpha = 5 dirac suite");
    auto four = dirac_criteria(alpha_model(1, max_sa_d(), BlockSequence::constant_scalar(4.0)), horizon(2000)).at(0);
    ck.expect(four.verdict == Verdict::Inconclusive, "alpha = 4 boundary");
    auto zero = dirac_criteria(alpha_model(1, max_sa_d(), BlockSequence::zero()), horizon(2000)).at(0);
    ck.expect(zero.verdict == Verdict::Inconclusive, "alpha = 0 guard");

    auto s = schatten_free_schrodinger(ScalarSequence::geometric(0.5), 1.0, 200);
    ck.expect(std::abs(s.partial - 1.0 / 6.0) <= kSchattenTol, "Schatten partial " + str(s.partial));
}

/// Random family drawn from the generators with randomized parameters.
BlockJacobiMatrix random_family(std::mt19937_64& rng, InteractionModel& model, std::string& kind) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, 5);
    const int p = 1 + static_cast<int>(u(rng) * 2.0);
    const double c = 0.5 + 1.5 * u(rng);
    auto d = [&] {
        switch (static_cast<int>(u(rng) * 4.0)) {
            case 0: return ScalarSequence::geometric(0.3 + 0.6 * u(rng));
            case 1: return ScalarSequence::power(-0.5 - 2.0 * u(rng));
            case 2: return ScalarSequence::power(-1.0, 0.2 + u(rng));
            default: return ScalarSequence::product_weighted(1.0, 1.0 + 6.0 * u(rng));
        }
    }();
    auto strength = [&]() -> BlockSequence {
        switch (static_cast<int>(u(rng) * 3.0)) {
            case 0: return BlockSequence::zero();
            case 1: return BlockSequence::constant_scalar(10.0 * (u(rng) - 0.3));
            default: {
                Block h = random_hermitian(rng, p);
                return BlockSequence::constant_matrix(h * (5.0 * u(rng) / std::max(spec_norm(h), 1e-12)));
            }
        }
    };
    switch (pick(rng)) {
        case 0:
            kind = "dirac-alpha";
            model = alpha_model(p, d, strength(), c);
            return make_dirac_alpha(model);
        case 1:
            kind = "boundary-alpha";
            model = alpha_model(p, d, strength(), c);
            return make_boundary_alpha(model);
        case 2:
            kind = "dirac-beta";
            model = beta_model(p, d, strength(), c);
            return make_dirac_beta(model);
        case 3: {
            kind = "schrodinger-j1";
            model = alpha_model(p, d, BlockSequence::scaled_identity(ScalarSequence::power(1.0 + 3.0 * u(rng)), 0.5 + u(rng)), c);
            return make_schrodinger_J1(model);
        }
        case 4: {
            const int q = 1 + static_cast<int>(u(rng) * 3.0);
            const int q1 = static_cast<int>(u(rng) * (q + 1));
            kind = "dyukarev";
            return make_dyukarev(q, q1);
        }
        default: {
            kind = "general";
            const double a = 5.0 * u(rng), b = 0.5 + u(rng), grow = 2.0 * u(rng);
            return make_general(1, [a](std::size_t n) { return Block::Constant(1, 1, a * (n % 3)); },
                                [b, grow](std::size_t n) { return Block::Constant(1, 1, b * std::pow(n + 1.0, grow)); },
                                "general");
        }
    }
}

void verdict_safety(Check& ck) {
    std::mt19937_64 rng(7);
    int conflicts = 0, positive = 0, selfadjoint = 0;
    for (int draw = 0; draw < 200; ++draw) {
        InteractionModel model;
        std::string kind;
        const BlockJacobiMatrix J = random_family(rng, model, kind);
        std::vector<CriterionReport> reports;
        auto guarded = [&](auto&& body) {
            try {
                body();
            } catch (const Error&) {
            }
        };
        const CriteriaOptions opt = horizon(2000);
        guarded([&] { reports.push_back(carleman(J, 2000, opt)); });
        guarded([&] { reports.push_back(selfadjoint_a1a2(J, 0, opt)); });
        guarded([&] { reports.push_back(selfadjoint_power_mean(J, 0, 1.0, opt)); });
        guarded([&] { reports.push_back(discrete_resolvent(J, 0, 1.0, 1.0, opt)); });
        guarded([&] { reports.push_back(discrete_weighted(J, 1.0, opt)); });
        if (kind == "dirac-alpha") guarded([&] {
                for (auto& r : dirac_criteria(model, opt)) reports.push_back(r);
            });
        if (kind == "schrodinger-j1") guarded([&] {
                for (auto& r : schrodinger_criteria(model, 1.0, opt)) reports.push_back(r);
            });
        IndexEstimate est;
        try {
            est = estimate_index(J, ladder_to(9, {cplx(0, 1)}));
        } catch (const Error&) {
            continue;
        }
        for (const auto& r : reports) selfadjoint += r.verdict == Verdict::Satisfied && r.implies_selfadjoint;
        if (!(est.stabilized && est.n_plus > 0)) continue;
        ++positive;
        for (const auto& r : reports)
            if (r.verdict == Verdict::Satisfied && r.implies_selfadjoint) {
                ++conflicts;
                ck.expect(false, "draw " + std::to_string(draw) + " " + kind + ": " + r.criterion_id + " " + r.condition +
                                     " Satisfied with index " + std::to_string(est.n_plus));
            }
    }
    std::printf("    battery: %d families with a stabilized positive index, %d selfadjoint verdicts\n", positive, selfadjoint);
    ck.expect(positive > 0, "battery produced no family with a positive index");
    ck.expect(selfadjoint > 0, "battery produced no selfadjoint verdict");
    ck.expect(conflicts == 0, std::to_string(conflicts) + " conflicts");
}

struct Criterion {
    int id;
    const char* title;
    double budget_s;  ///< wall-time budget, 0 for none
    std::function<void(Check&)> body;
};

}  // namespace

int main() {
    const std::vector<Criterion> all = {
        {1, "Dyukarev indices equal p1", 30.0, dyukarev_reproduction},
        {2, "maximal index iff d in l1", 10.0, maximal_index_iff_l1},
        {3, "maximal index and discreteness for d_n = 1/(36^(n-1) n^2), alpha = 5", 10.0, maximal_selfadjoint_proposition},
        {4, "defect and kernel index estimates agree", 0.0, cross_method},
        {5, "C_n closed forms and linear growth of the odd sums", 5.0, kosmir_closed_forms},
        {6, "Krein residual and antitone ladders", 0.0, krein_invariants},
        {7, "Dirac defect recursion", 0.0, defect_recursion},
        {8, "perturbation witness 3/4 and beta route", 0.0, perturbation_pair},
        {9, "Schrodinger and Dirac worked examples", 0.0, worked_examples},
        {10, "no selfadjoint verdict beside a positive index", 0.0, verdict_safety},
    };
    int failed = 0;
    for (const Criterion& c : all) {
        Check ck;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.body(ck);
        } catch (const std::exception& e) {
            ck.expect(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0) ck.expect(secs < c.budget_s, "took " + str(secs) + " s, budget " + str(c.budget_s) + " s");
        const bool ok = ck.failures.empty();
        failed += !ok;
        std::printf("%s criterion %d: %s (%.2f s)\n", ok ? "PASS" : "FAIL", c.id, c.title, secs);
        for (const auto& f : ck.failures) std::printf("    %s\n", f.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
    return failed ? 1 : 0;
}
