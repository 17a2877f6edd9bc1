#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "jacspec/jacobi.hpp"
#include "jacspec/sequences.hpp"

namespace jacspec {

enum class BlockSeqKind { Zero, ConstantScalar, ConstantMatrix, DiagonalList, ScaledIdentity, BlockSplit, Custom };

const char* to_string(BlockSeqKind k);

/// Hermitian p x p sequence n -> M_n used for interaction strengths and perturbations.
class BlockSequence {
public:
    static BlockSequence zero();
    static BlockSequence constant_scalar(double a);
    static BlockSequence constant_matrix(Block m);
    static BlockSequence diagonal_list(std::vector<double> diag);
    /// (factor * s_n + shift) I; n >= 1.
    static BlockSequence scaled_identity(ScalarSequence s, double factor = 1.0, double shift = 0.0);
    /// upper (p1 x p1) direct sum lower ((p - p1) x (p - p1)).
    static BlockSequence block_split(int p1, BlockSequence upper, BlockSequence lower);
    static BlockSequence custom(std::function<Block(long, int)> f, std::string label = "custom");

    BlockSeqKind kind() const { return kind_; }
    Block at(long n, int p) const;
    ScaledBlock at_scaled(long n, int p) const;
    double norm(long n, int p) const;
    double log_norm(long n, int p) const;
    std::string describe() const;
    /// Leading q x q corner as its own sequence; for a block split at q this is the upper component.
    BlockSequence leading_block(int q, int p) const;

private:
    BlockSeqKind kind_ = BlockSeqKind::Zero;
    double a_ = 0.0;
    double factor_ = 1.0;
    double shift_ = 0.0;
    Block matrix_;
    std::vector<double> diag_;
    std::optional<ScalarSequence> seq_;
    int p1_ = 0;
    std::shared_ptr<BlockSequence> upper_, lower_;
    std::function<Block(long, int)> fn_;
    std::string label_;
};

/// Point-interaction data (c, {d_n}, {alpha_n} or {beta_n}); d and alpha/beta indexed from 1.
struct InteractionModel {
    int p = 1;
    double c = 1.0;
    ScalarSequence d = ScalarSequence::geometric(0.5);
    std::optional<BlockSequence> alpha;
    std::optional<BlockSequence> beta;

    double log_d(long n) const { return d.eval_log(n); }
    void validate() const;
};

/// Perturbations A'_n, B'_n for n >= 0.
struct PerturbationData {
    BlockSequence Aprime = BlockSequence::zero();
    BlockSequence Bprime = BlockSequence::zero();
};

double nu(double x, double c);
/// log nu(x) given log x.
double log_nu(double log_x, double c);

BlockJacobiMatrix make_general(int p, std::function<Block(std::size_t)> diag,
                               std::function<Block(std::size_t)> offdiag, std::string name = "general");
/// Odd diagonal -nu(d)^2/d^2 I, the form obtained from the boundary triplet.
BlockJacobiMatrix make_dirac_alpha(const InteractionModel& m);
/// Same with the printed odd diagonal -nu(d)/d^2 I; kept for the closed-form Kostyuchenko-Mirzoev sums.
BlockJacobiMatrix make_dirac_alpha_display(const InteractionModel& m);
BlockJacobiMatrix make_dirac_alpha_simple(const InteractionModel& m);
BlockJacobiMatrix make_boundary_alpha(const InteractionModel& m);
BlockJacobiMatrix make_dirac_beta(const InteractionModel& m);
BlockJacobiMatrix make_dirac_beta_simple(const InteractionModel& m);
BlockJacobiMatrix make_perturbed_alpha(const InteractionModel& m, const PerturbationData& pert);
BlockJacobiMatrix make_perturbed_beta(const InteractionModel& m, const PerturbationData& pert);
BlockJacobiMatrix make_schrodinger_J1(const InteractionModel& m);
BlockJacobiMatrix make_schrodinger_J2(const InteractionModel& m);
BlockJacobiMatrix make_dyukarev(int p, int p1);

/// Dyukarev off-diagonal block from the product form Btilde_{n-1}^{-1} R_n Btilde_n^{-1}.
Block dyukarev_offdiag_product(int p, int p1, std::size_t n);

/// Interaction strength alpha_n~ + (1/d_n + 1/d_{n+1}) I of the Schrodinger family, scaled.
ScaledBlock schrodinger_alpha_tilde(const InteractionModel& m, long n);
/// log r_n^2 with r_n^2 = d_n + d_{n+1}.
double schrodinger_log_r2(const InteractionModel& m, long n);

}  // namespace jacspec
