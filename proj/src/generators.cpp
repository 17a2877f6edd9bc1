#include "jacspec/generators.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace jacspec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double softplus(double t) { return t > 30 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

ScaledBlock zero_block(int p) { return {Block::Zero(p, p), 0.0}; }

/// exp(log_w) * M, scaled.
ScaledBlock weighted(const Block& m, double log_w) {
    ScaledBlock s = ScaledBlock::from(m);
    s.log_scale += log_w;
    return s;
}

/// exp(log_w) * X where X is given scaled.
ScaledBlock weighted(const ScaledBlock& x, double log_w) { return {x.m, x.log_scale + log_w}; }

/// X + exp(log_t) I for scaled X.
ScaledBlock plus_identity(const ScaledBlock& x, double log_t) {
    const int p = static_cast<int>(x.m.rows());
    const double mx = x.m.cwiseAbs().maxCoeff();
    const double lx = mx > 0 ? std::log(mx) + x.log_scale : kNegInf;
    const double L = std::max(lx, log_t);
    if (L == kNegInf) return zero_block(p);
    Block m = std::exp(log_t - L) * Block::Identity(p, p);
    if (mx > 0) m += std::exp(x.log_scale - L) * x.m;
    return {m, L};
}

Block hermitian_part(const Block& m) { return (m + m.adjoint()) * 0.5; }

/// log-weights of the Dirac families: nu-hat, nu-tilde and nu-breve.
struct DiracWeights {
    InteractionModel m;
    bool simple;   ///< nu(d) replaced by c d
    bool unit_nu;  ///< nu(d) replaced by 1

    double ld(long k) const { return m.log_d(k); }
    double lnu(long k) const {
        if (unit_nu) return 0.0;
        if (simple) return std::log(m.c) + ld(k);
        return log_nu(ld(k), m.c);
    }
    /// nu(d_{j+1}) / d_{j+1}^2
    double hat(long j) const { return lnu(j + 1) - 2.0 * ld(j + 1); }
    /// nu(d_{j+1}) / (d_{j+1}^{3/2} d_{j+2}^{1/2})
    double tilde(long j) const { return lnu(j + 1) - 1.5 * ld(j + 1) - 0.5 * ld(j + 2); }
    /// nu(d_n)^2 / d_n^3
    double breve(long n) const { return 2.0 * lnu(n) - 3.0 * ld(n); }
    /// nu(d_{j+1})^2 / d_{j+1}^2
    double odd(long j) const { return 2.0 * lnu(j + 1) - 2.0 * ld(j + 1); }
};

void require_alpha(const InteractionModel& m, const char* family) {
    m.validate();
    if (!m.alpha) throw Error(ErrorKind::ModelMismatch, std::string(family) + " needs alpha");
}

void require_beta(const InteractionModel& m, const char* family) {
    m.validate();
    if (!m.beta) throw Error(ErrorKind::ModelMismatch, std::string(family) + " needs beta");
}

BlockJacobiMatrix alpha_family(const InteractionModel& m, bool simple, bool unit_nu, double even_off_sign,
                               const char* name, bool display_odd = false) {
    require_alpha(m, name);
    DiracWeights w{m, simple, unit_nu};
    const int p = m.p;
    auto diag = [m, w, p, display_odd](std::size_t n) -> ScaledBlock {
        const long j = static_cast<long>(n / 2);
        if (n % 2 == 0) {
            if (j == 0) return zero_block(p);
            return weighted(m.alpha->at_scaled(j, p), -w.ld(j + 1));
        }
        return ScaledBlock::scalar_identity(p, display_odd ? w.hat(j) : w.odd(j), -1.0);
    };
    auto off = [w, p, even_off_sign](std::size_t n) -> ScaledBlock {
        const long j = static_cast<long>(n / 2);
        if (n % 2 == 0) return ScaledBlock::scalar_identity(p, w.hat(j), even_off_sign);
        return ScaledBlock::scalar_identity(p, w.tilde(j));
    };
    return BlockJacobiMatrix(p, diag, off, name);
}

BlockJacobiMatrix beta_family(const InteractionModel& m, bool simple, const char* name) {
    require_beta(m, name);
    DiracWeights w{m, simple, false};
    const int p = m.p;
    auto diag = [m, w, p, simple](std::size_t n) -> ScaledBlock {
        if (n % 2 == 0) return zero_block(p);
        const long k = static_cast<long>(n / 2) + 1;
        ScaledBlock inner = plus_identity(m.beta->at_scaled(k, p), w.ld(k));
        const double lw = simple ? 2.0 * std::log(m.c) - w.ld(k) : w.breve(k);
        inner.m = -inner.m;
        return weighted(inner, lw);
    };
    auto off = [w, p](std::size_t n) -> ScaledBlock {
        const long j = static_cast<long>(n / 2);
        if (n % 2 == 0) return ScaledBlock::scalar_identity(p, w.hat(j));
        return ScaledBlock::scalar_identity(p, w.tilde(j));
    };
    return BlockJacobiMatrix(p, diag, off, name);
}

}  // namespace

const char* to_string(BlockSeqKind k) {
    switch (k) {
        case BlockSeqKind::Zero: return "zero";
        case BlockSeqKind::ConstantScalar: return "constant-scalar";
        case BlockSeqKind::ConstantMatrix: return "constant-matrix";
        case BlockSeqKind::DiagonalList: return "diagonal-list";
        case BlockSeqKind::ScaledIdentity: return "scaled-identity";
        case BlockSeqKind::BlockSplit: return "block-split";
        case BlockSeqKind::Custom: return "custom";
    }
    return "?";
}

BlockSequence BlockSequence::zero() { return BlockSequence(); }

BlockSequence BlockSequence::constant_scalar(double a) {
    BlockSequence s;
    s.kind_ = BlockSeqKind::ConstantScalar;
    s.a_ = a;
    return s;
}

BlockSequence BlockSequence::constant_matrix(Block m) {
    if (!is_hermitian(m)) throw Error(ErrorKind::NotHermitian, "constant-matrix must be Hermitian");
    BlockSequence s;
    s.kind_ = BlockSeqKind::ConstantMatrix;
    s.matrix_ = std::move(m);
    return s;
}

BlockSequence BlockSequence::diagonal_list(std::vector<double> diag) {
    BlockSequence s;
    s.kind_ = BlockSeqKind::DiagonalList;
    s.diag_ = std::move(diag);
    return s;
}

BlockSequence BlockSequence::scaled_identity(ScalarSequence seq, double factor, double shift) {
    BlockSequence s;
    s.kind_ = BlockSeqKind::ScaledIdentity;
    s.seq_ = std::move(seq);
    s.factor_ = factor;
    s.shift_ = shift;
    return s;
}

BlockSequence BlockSequence::block_split(int p1, BlockSequence upper, BlockSequence lower) {
    BlockSequence s;
    s.kind_ = BlockSeqKind::BlockSplit;
    s.p1_ = p1;
    s.upper_ = std::make_shared<BlockSequence>(std::move(upper));
    s.lower_ = std::make_shared<BlockSequence>(std::move(lower));
    return s;
}

BlockSequence BlockSequence::custom(std::function<Block(long, int)> f, std::string label) {
    BlockSequence s;
    s.kind_ = BlockSeqKind::Custom;
    s.fn_ = std::move(f);
    s.label_ = std::move(label);
    return s;
}

Block BlockSequence::at(long n, int p) const {
    switch (kind_) {
        case BlockSeqKind::Zero: return Block::Zero(p, p);
        case BlockSeqKind::ConstantScalar: return a_ * Block::Identity(p, p);
        case BlockSeqKind::ConstantMatrix:
            if (matrix_.rows() != p) throw Error(ErrorKind::Bounds, "constant-matrix has wrong dimension");
            return matrix_;
        case BlockSeqKind::DiagonalList: {
            if (static_cast<int>(diag_.size()) != p) throw Error(ErrorKind::Bounds, "diagonal-list length != p");
            Block m = Block::Zero(p, p);
            for (int i = 0; i < p; ++i) m(i, i) = diag_[i];
            return m;
        }
        case BlockSeqKind::ScaledIdentity:
            return (factor_ * seq_->eval(n) + shift_) * Block::Identity(p, p);
        case BlockSeqKind::BlockSplit: {
            if (p1_ < 0 || p1_ > p) throw Error(ErrorKind::Bounds, "block-split p1 outside [0, p]");
            Block m = Block::Zero(p, p);
            if (p1_ > 0) m.topLeftCorner(p1_, p1_) = upper_->at(n, p1_);
            if (p - p1_ > 0) m.bottomRightCorner(p - p1_, p - p1_) = lower_->at(n, p - p1_);
            return m;
        }
        case BlockSeqKind::Custom: {
            Block m = fn_(n, p);
            if (m.rows() != p || m.cols() != p) throw Error(ErrorKind::Bounds, label_ + ": wrong dimension");
            return m;
        }
    }
    return Block::Zero(p, p);
}

ScaledBlock BlockSequence::at_scaled(long n, int p) const {
    if (kind_ == BlockSeqKind::ScaledIdentity && shift_ == 0.0) {
        if (factor_ == 0.0) return zero_block(p);
        return ScaledBlock::scalar_identity(p, std::log(std::abs(factor_)) + seq_->eval_log(n),
                                            factor_ > 0 ? 1.0 : -1.0);
    }
    if (kind_ == BlockSeqKind::BlockSplit && p1_ > 0 && p1_ < p) {
        const ScaledBlock up = upper_->at_scaled(n, p1_), lo = lower_->at_scaled(n, p - p1_);
        double L = std::max(up.log_scale, lo.log_scale);
        if (!std::isfinite(L)) L = 0.0;
        ScaledBlock out;
        out.log_scale = L;
        out.m = Block::Zero(p, p);
        if (std::isfinite(up.log_scale)) out.m.topLeftCorner(p1_, p1_) = std::exp(up.log_scale - L) * up.m;
        if (std::isfinite(lo.log_scale)) out.m.bottomRightCorner(p - p1_, p - p1_) = std::exp(lo.log_scale - L) * lo.m;
        return out;
    }
    return ScaledBlock::from(at(n, p));
}

double BlockSequence::norm(long n, int p) const {
    switch (kind_) {
        case BlockSeqKind::Zero: return 0.0;
        case BlockSeqKind::ConstantScalar: return std::abs(a_);
        case BlockSeqKind::ScaledIdentity: return std::abs(factor_ * seq_->eval(n) + shift_);
        default: return spec_norm(at(n, p));
    }
}

double BlockSequence::log_norm(long n, int p) const {
    if (kind_ == BlockSeqKind::ScaledIdentity && shift_ == 0.0) {
        if (factor_ == 0.0) return kNegInf;
        return std::log(std::abs(factor_)) + seq_->eval_log(n);
    }
    if (kind_ == BlockSeqKind::BlockSplit) return at_scaled(n, p).log_norm();
    const double v = norm(n, p);
    return v > 0 ? std::log(v) : kNegInf;
}

BlockSequence BlockSequence::leading_block(int q, int p) const {
    if (kind_ == BlockSeqKind::BlockSplit && p1_ == q) return *upper_;
    switch (kind_) {
        case BlockSeqKind::Zero:
        case BlockSeqKind::ConstantScalar:
        case BlockSeqKind::ScaledIdentity: return *this;
        default: break;
    }
    const BlockSequence full = *this;
    return custom([full, p](long n, int k) -> Block { return full.at(n, p).topLeftCorner(k, k); },
                  "leading block of " + describe());
}

std::string BlockSequence::describe() const {
    std::ostringstream os;
    os << to_string(kind_);
    switch (kind_) {
        case BlockSeqKind::ConstantScalar: os << "(" << a_ << ")"; break;
        case BlockSeqKind::ScaledIdentity:
            os << "(" << factor_ << "*" << seq_->describe() << (shift_ != 0 ? " + shift" : "") << ")";
            break;
        case BlockSeqKind::BlockSplit:
            os << "(p1=" << p1_ << ", " << upper_->describe() << ", " << lower_->describe() << ")";
            break;
        case BlockSeqKind::Custom: os << "(" << label_ << ")"; break;
        default: break;
    }
    return os.str();
}

void InteractionModel::validate() const {
    if (p < 1) throw Error(ErrorKind::Bounds, "p must be >= 1");
    if (!(c > 0)) throw Error(ErrorKind::Bounds, "c must be positive");
}

double nu(double x, double c) { return c * x / std::sqrt(1.0 + c * c * x * x); }

double log_nu(double log_x, double c) {
    const double y = std::log(c) + log_x;
    return y - 0.5 * softplus(2.0 * y);
}

BlockJacobiMatrix make_general(int p, std::function<Block(std::size_t)> diag,
                               std::function<Block(std::size_t)> offdiag, std::string name) {
    auto dg = [diag](std::size_t n) { return ScaledBlock::from(diag(n)); };
    auto og = [offdiag](std::size_t n) { return ScaledBlock::from(offdiag(n)); };
    return BlockJacobiMatrix(p, dg, og, std::move(name));
}

BlockJacobiMatrix make_dirac_alpha(const InteractionModel& m) {
    return alpha_family(m, false, false, 1.0, "dirac-alpha");
}

BlockJacobiMatrix make_dirac_alpha_display(const InteractionModel& m) {
    return alpha_family(m, false, false, 1.0, "dirac-alpha-display", true);
}

BlockJacobiMatrix make_dirac_alpha_simple(const InteractionModel& m) {
    return alpha_family(m, true, false, 1.0, "dirac-alpha-simple");
}

BlockJacobiMatrix make_boundary_alpha(const InteractionModel& m) {
    return alpha_family(m, false, false, -1.0, "boundary-alpha");
}

BlockJacobiMatrix make_schrodinger_J2(const InteractionModel& m) {
    return alpha_family(m, false, true, 1.0, "schrodinger-j2");
}

BlockJacobiMatrix make_dirac_beta(const InteractionModel& m) { return beta_family(m, false, "dirac-beta"); }

BlockJacobiMatrix make_dirac_beta_simple(const InteractionModel& m) {
    return beta_family(m, true, "dirac-beta-simple");
}

BlockJacobiMatrix make_perturbed_alpha(const InteractionModel& m, const PerturbationData& pert) {
    require_alpha(m, "perturbed-alpha");
    DiracWeights w{m, false, false};
    const int p = m.p;
    auto one_plus = [p](const BlockSequence& s, long n) -> Block { return Block::Identity(p, p) + s.at(n, p); };
    auto diag = [m, w, p, pert, one_plus](std::size_t n) -> ScaledBlock {
        const long j = static_cast<long>(n / 2);
        const long nn = static_cast<long>(n);
        if (n == 0) return ScaledBlock::from(pert.Aprime.at(0, p));
        if (n % 2 == 0) {
            ScaledBlock a = m.alpha->at_scaled(j, p);
            return weighted(hermitian_part(a.m * one_plus(pert.Aprime, nn)), a.log_scale - w.ld(j + 1));
        }
        return weighted(-one_plus(pert.Aprime, nn), w.odd(j));
    };
    auto off = [w, p, pert, one_plus](std::size_t n) -> ScaledBlock {
        const long j = static_cast<long>(n / 2);
        const long nn = static_cast<long>(n);
        Block f = one_plus(pert.Bprime, nn);
        return weighted(f, n % 2 == 0 ? w.hat(j) : w.tilde(j));
    };
    return BlockJacobiMatrix(p, diag, off, "perturbed-alpha");
}

BlockJacobiMatrix make_perturbed_beta(const InteractionModel& m, const PerturbationData& pert) {
    require_beta(m, "perturbed-beta");
    DiracWeights w{m, false, false};
    const int p = m.p;
    auto diag = [m, w, p, pert](std::size_t n) -> ScaledBlock {
        const long nn = static_cast<long>(n);
        if (n % 2 == 0) return ScaledBlock::from(pert.Aprime.at(nn, p));
        const long k = static_cast<long>(n / 2) + 1;
        Block inner = m.beta->at(k, p) + std::exp(w.ld(k)) * Block::Identity(p, p) + pert.Aprime.at(nn, p);
        return weighted(-inner, w.breve(k));
    };
    auto off = [w, p, pert](std::size_t n) -> ScaledBlock {
        const long j = static_cast<long>(n / 2);
        Block f = Block::Identity(p, p) + pert.Bprime.at(static_cast<long>(n), p);
        return weighted(f, n % 2 == 0 ? w.hat(j) : w.tilde(j));
    };
    return BlockJacobiMatrix(p, diag, off, "perturbed-beta");
}

double schrodinger_log_r2(const InteractionModel& m, long n) { return log_add(m.log_d(n), m.log_d(n + 1)); }

ScaledBlock schrodinger_alpha_tilde(const InteractionModel& m, long n) {
    const double inv_sum = log_add(-m.log_d(n), -m.log_d(n + 1));
    return plus_identity(m.alpha->at_scaled(n, m.p), inv_sum);
}

BlockJacobiMatrix make_schrodinger_J1(const InteractionModel& m) {
    require_alpha(m, "schrodinger-j1");
    auto diag = [m](std::size_t n) -> ScaledBlock {
        const long k = static_cast<long>(n) + 1;
        ScaledBlock at = schrodinger_alpha_tilde(m, k);
        // Exact cancellation in alpha~ leaves rounding residue; snap it to zero.
        const double lmax = std::max({m.alpha->log_norm(k, m.p), -m.log_d(k), -m.log_d(k + 1)});
        const double mx = at.m.cwiseAbs().maxCoeff();
        if (mx == 0.0 || std::log(mx) + at.log_scale < lmax + std::log(1e-13)) return zero_block(m.p);
        return weighted(at, -schrodinger_log_r2(m, k));
    };
    auto off = [m](std::size_t n) -> ScaledBlock {
        const long k = static_cast<long>(n) + 1;
        const double l = -0.5 * schrodinger_log_r2(m, k) - 0.5 * schrodinger_log_r2(m, k + 1) - m.log_d(k + 1);
        return ScaledBlock::scalar_identity(m.p, l);
    };
    return BlockJacobiMatrix(m.p, diag, off, "schrodinger-j1");
}

BlockJacobiMatrix make_dyukarev(int p, int p1) {
    if (p < 1 || p1 < 0 || p1 > p) throw Error(ErrorKind::Bounds, "dyukarev needs 0 <= p1 <= p, p >= 1");
    auto diag = [p](std::size_t) { return zero_block(p); };
    auto off = [p, p1](std::size_t n) -> ScaledBlock {
        Block b = Block::Zero(p, p);
        if (n == 0) return ScaledBlock::from(Block::Identity(p, p));
        const double x = static_cast<double>(n);
        for (int i = 0; i < p; ++i) b(i, i) = i < p1 ? (x + 1.0) * std::sqrt(x * x + 1.0) : std::sqrt(2.0);
        return ScaledBlock::from(b);
    };
    return BlockJacobiMatrix(p, diag, off, "dyukarev");
}

Block dyukarev_offdiag_product(int p, int p1, std::size_t n) {
    auto btilde = [p, p1](std::size_t k) {
        Block b = Block::Zero(p, p);
        for (int i = 0; i < p; ++i) b(i, i) = i < p1 ? 1.0 / (static_cast<double>(k) + 1.0) : 1.0;
        return b;
    };
    if (n == 0) return btilde(0);
    Block prev = btilde(n - 1);
    Block r = Block::Zero(p, p);
    for (int i = 0; i < p; ++i) r(i, i) = std::sqrt(1.0 + std::norm(prev(i, i)));
    return inv(prev) * r * inv(btilde(n));
}

}  // namespace jacspec
