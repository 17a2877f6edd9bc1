#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "jacspec/generators.hpp"
#include "jacspec/jacobi.hpp"
#include "jacspec/sequences.hpp"

namespace jacspec {

/// Gram-type accumulator G = K^* W K whose inverse has a bounded representation.
///
/// K = exp(-log_kinv) * kinv^{-1} is the accumulated change of basis; W is the Gram matrix
/// expressed in the current frame. Growing directions end up in K, so the eigenvalues of
/// G^{-1} = kinv W^{-1} kinv^* exp(2 log_kinv) can be resolved far below 1e-16 of the largest.
struct ScaledGram {
    Block W;  ///< frame Gram matrix is exp(log_w) * W
    double log_w = 0.0;
    Block kinv;
    double log_kinv = 0.0;
    Block k;  ///< K = exp(log_k) * k, tracked forward so no inversion is needed
    double log_k = 0.0;

    explicit ScaledGram(int p = 1);
    /// W += exp(log_factor) * frame_increment.
    void add(const Block& frame_increment, double log_factor = 0.0);
    /// Frame change: new frame = old frame * R^{-1}.
    void rebase(const Block& R);
    /// K <- exp(log_factor) K.
    void scale(double log_factor);
    /// log eigenvalues of G^{-1}, descending. -inf for numerically zero ones.
    std::vector<double> inverse_log_eigs() const;
    /// G itself as (mantissa, log scale); only for moderate dynamic range.
    std::pair<Block, double> gram() const;
};

/// Krein polynomial recursion state at index n.
///
/// True blocks: P_{n-1} = exp(log_prev) P_prev K, P_n = exp(log_curr) P_curr K, with K carried inside kernel.
/// kernel.W accumulates sum_{k<=n} P_k^* P_k in the current frame.
struct KreinState {
    cplx z;
    std::size_t n = 0;
    Block P_prev;
    Block P_curr;
    double log_prev = 0.0;
    double log_curr = 0.0;
    ScaledGram kernel;
    double last_residual = 0.0;  ///< relative three-term residual of the latest step
};

KreinState krein_init(const BlockJacobiMatrix& J, cplx z);
KreinState krein_step(const KreinState& state, const BlockJacobiMatrix& J);
/// In-place variant used by the ladders.
void krein_advance(KreinState& state, const BlockJacobiMatrix& J);

/// Unscaled P_n (only while representable).
Block krein_true_P(const KreinState& state);

struct KernelPartial {
    Block S;           ///< Hermitian PSD, scaled
    double log_scale;  ///< S_N = exp(log_scale) * S
};

KernelPartial kernel_partial(const BlockJacobiMatrix& J, cplx z, std::size_t N);

struct LadderRung {
    std::size_t N = 0;
    std::vector<double> log_eigs;  ///< log eigenvalues of H_N, descending
};

struct PointEstimate {
    cplx z;
    int rank = 0;
    bool stabilized = false;
    std::vector<LadderRung> ladder;
    double max_residual = 0.0;
};

struct IndexEstimate {
    int n_plus = 0;
    int n_minus = 0;
    bool stabilized = false;
    std::vector<PointEstimate> points;
    std::vector<cplx> z_points;
    std::string method;
    std::string note;
};

struct IndexOptions {
    std::vector<cplx> z_points = {cplx(0, 1), cplx(0, -1), cplx(1, 1)};
    std::vector<std::size_t> ladder;  ///< empty: 2^4 .. 2^ladder_max_pow
    int ladder_max_pow = 12;
    double tol = 1e-8;
    double survive_ratio = 0.9;
    double stable_rel = 1e-3;
    int threads = 0;  ///< 0: JACSPEC_THREADS or hardware concurrency
};

std::vector<std::size_t> ladder_schedule(const IndexOptions& opt);

/// Rank of H(z) from a ladder of H_N eigenvalues.
PointEstimate classify_ladder(cplx z, std::vector<LadderRung> ladder, double log_reference,
                              const IndexOptions& opt);

PointEstimate estimate_point(const BlockJacobiMatrix& J, cplx z, const IndexOptions& opt);
IndexEstimate estimate_index(const BlockJacobiMatrix& J, const IndexOptions& opt = {});

/// Dirac defect solution (U_n, V_n) for delta (alpha) or delta-prime (beta) interactions.
struct DefectStep {
    long n = 0;
    double log_norm_U = 0.0;
    double log_norm_V = 0.0;
    double log_bound = 0.0;      ///< log of the growth bound for ||U_n||, ||V_n||
    double rank_witness = 0.0;   ///< sigma_min / sigma_max of the stacked (U_n; V_n) in the running frame
    double residual = 0.0;       ///< relative residual of the continuity and jump identities
    double log_l2_term = 0.0;    ///< log of the interval integral for [x_{n-1}, x_n]
};

struct DefectSolution {
    std::vector<DefectStep> steps;
    double partial_l2 = 0.0;
    double min_rank_witness = 1.0;
    double max_residual = 0.0;
    SeriesVerdict tail;
    std::vector<LadderRung> gram_ladder;  ///< log eigenvalues of the inverse Gram matrix
    bool uses_beta = false;
};

DefectSolution dirac_defect_recursion(const InteractionModel& m, long n_max,
                                      const std::vector<std::size_t>& ladder = {});

/// Unscaled U_n, V_n for small n (test oracle access).
std::pair<Block, Block> defect_true_UV(const InteractionModel& m, long n);

IndexEstimate dirac_index_estimate(const InteractionModel& m, long n_max, const IndexOptions& opt = {});

/// Dyukarev route through the beta model of its upper block plus Carleman on the rest.
IndexEstimate dyukarev_dirac_route(int p, int p1, double c, long n_max, const IndexOptions& opt = {});

/// Worker count from JACSPEC_THREADS (falls back to hardware concurrency).
int worker_threads();

}  // namespace jacspec
