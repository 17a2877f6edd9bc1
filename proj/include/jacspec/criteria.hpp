#pragma once

#include <string>
#include <utility>
#include <vector>

#include "jacspec/generators.hpp"
#include "jacspec/jacobi.hpp"
#include "jacspec/sequences.hpp"

namespace jacspec {

enum class Verdict { Satisfied, Violated, Inconclusive };

const char* to_string(Verdict v);

struct CriterionReport {
    std::string criterion_id;
    std::string condition;  ///< sub-condition inside a suite; empty otherwise
    Verdict verdict = Verdict::Inconclusive;
    std::string implied_property;
    bool implies_selfadjoint = false;  ///< Satisfied and the conclusion includes selfadjointness
    std::vector<std::pair<std::string, double>> evidence;  ///< insertion ordered
    std::vector<std::string> citations;
    std::vector<std::string> notes;

    void add(const std::string& key, double value);
    bool has(const std::string& key) const;
    double get(const std::string& key) const;  ///< throws OutOfRange when missing
};

struct CriteriaOptions {
    long n_max = 10000;    ///< scan horizon; the trailing window is [n_max/2, n_max]
    double margin = 1e-6;  ///< clearance required for strict inequalities
    ProbeConfig probe;
    long window_start() const { return n_max / 2; }
};

/// Sum of 1/||B_n||.
CriterionReport carleman(const BlockJacobiMatrix& J, long n_max = 10000, const CriteriaOptions& opt = {});

/// a1(N) a2(N) <= 1 with a1 = sup(||A^-1 B_n|| + ||A^-1 B_{n-1}^*||), a2 = sup(||A_n^-1 B_n|| + ||A_{n+2}^-1 B_{n+1}^*||).
CriterionReport selfadjoint_a1a2(const BlockJacobiMatrix& J, long N, const CriteriaOptions& opt = {});

/// Power-mean form with exponent s >= 1.
CriterionReport selfadjoint_power_mean(const BlockJacobiMatrix& J, long N, double s = 1.0,
                                       const CriteriaOptions& opt = {});

/// Strict versions plus the Schatten hypothesis on 1/|A| eigenvalues (exponent q).
CriterionReport discrete_resolvent(const BlockJacobiMatrix& J, long N, double s = 1.0, double q = 1.0,
                                   const CriteriaOptions& opt = {});

/// Weighted off-diagonal norms t_n = || |A_{n+1}|^{-1/2} B_n^* |A_n|^{-1/2} ||.
CriterionReport discrete_weighted(const BlockJacobiMatrix& J, double s = 1.0, const CriteriaOptions& opt = {});

/// Series sum_{n>=2} d_n prod_{k<n} (1 + ||alpha_k||/c)^2 plus the ratio and l1 shortcuts.
CriterionReport max_index_alpha(const InteractionModel& m, long n_max = 10000, const CriteriaOptions& opt = {});
/// Same with c ||beta_k|| in place of ||alpha_k||/c.
CriterionReport max_index_beta(const InteractionModel& m, long n_max = 10000, const CriteriaOptions& opt = {});

/// Witnesses a_N, C_B, C_A for the pair (J, Jhat) over [N, n_max].
CriterionReport perturbation_equivalence(const BlockJacobiMatrix& J, const BlockJacobiMatrix& Jhat, long N,
                                         const CriteriaOptions& opt = {});

/// Witnesses for the perturbed alpha family against J_{X,alpha}.
CriterionReport perturbation_alpha_conditions(const InteractionModel& m, const PerturbationData& pert,
                                              const CriteriaOptions& opt = {});

/// Divergence of sum sqrt(d_n d_{n+1}) |alpha_{n,1}| for diagonal alpha. With p1 > 0 the upper p1 block
/// is tested with the maximal-index series and the lower block with this test.
CriterionReport dennis_wall(const InteractionModel& m, int p1 = 0, const CriteriaOptions& opt = {});

/// C_1 .. C_n (index 0 holds C_0); scaled.
std::vector<ScaledBlock> kosmir_sequence_all(const BlockJacobiMatrix& J, long n);
ScaledBlock kosmir_sequence(const BlockJacobiMatrix& J, long n);
/// Partial sums of ||C_{2j+1}^* A_{2j+1} C_{2j+1}|| for j = 1..j_max.
std::vector<double> kosmir_odd_partial_sums(const BlockJacobiMatrix& J, long j_max);
CriterionReport kosmir_test(const BlockJacobiMatrix& J, long n_max = 10000, const CriteriaOptions& opt = {});

CriterionReport berezansky_test(const BlockJacobiMatrix& J, long n_max = 10000, const CriteriaOptions& opt = {});

/// Conditions for the Schrodinger families; one report per condition.
std::vector<CriterionReport> schrodinger_criteria(const InteractionModel& m, double s = 1.0,
                                                  const CriteriaOptions& opt = {});
/// Discreteness condition for the Dirac family.
std::vector<CriterionReport> dirac_criteria(const InteractionModel& m, const CriteriaOptions& opt = {});

}  // namespace jacspec
