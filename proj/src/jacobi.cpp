#include "jacspec/jacobi.hpp"

#include <cmath>
#include <limits>
#include <mutex>

namespace jacspec {

namespace {

constexpr double kMaxLogDouble = 700.0;

double max_abs(const Block& b) { return b.size() ? b.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

Block ScaledBlock::value() const {
    if (max_abs(m) == 0.0) return m;
    if (log_scale > kMaxLogDouble)
        throw Error(ErrorKind::Overflow, "block magnitude exp(" + std::to_string(log_scale) + ")");
    return std::exp(log_scale) * m;
}

double ScaledBlock::log_norm() const {
    const double s = spec_norm(m);
    if (s == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(s) + log_scale;
}

ScaledBlock ScaledBlock::from(const Block& b) {
    ScaledBlock s;
    const double mx = max_abs(b);
    if (mx == 0.0 || !std::isfinite(mx)) {
        s.m = b;
        return s;
    }
    s.m = b / mx;
    s.log_scale = std::log(mx);
    return s;
}

ScaledBlock ScaledBlock::scalar_identity(int p, double log_magnitude, double sign) {
    ScaledBlock s;
    s.m = Block::Identity(p, p) * sign;
    s.log_scale = log_magnitude;
    return s;
}

ScaledBlock operator*(const ScaledBlock& a, const ScaledBlock& b) {
    ScaledBlock r = ScaledBlock::from(a.m * b.m);
    r.log_scale += a.log_scale + b.log_scale;
    return r;
}

ScaledBlock adjoint(const ScaledBlock& a) { return {a.m.adjoint(), a.log_scale}; }

ScaledBlock inverse(const ScaledBlock& a) {
    ScaledBlock r = ScaledBlock::from(inv(a.m));
    r.log_scale -= a.log_scale;
    return r;
}

BlockJacobiMatrix::BlockJacobiMatrix(int p, Generator diag, Generator offdiag, std::string name)
    : p_(p), diag_gen_(std::move(diag)), off_gen_(std::move(offdiag)), name_(std::move(name)),
      cache_(std::make_shared<Cache>()) {
    if (p < 1) throw Error(ErrorKind::Bounds, "block dimension must be >= 1");
}

void BlockJacobiMatrix::extend_to(std::size_t n) const {
    std::unique_lock lock(cache_->mu);
    while (cache_->diag.size() <= n) {
        const std::size_t k = cache_->diag.size();
        ScaledBlock a = diag_gen_(k);
        ScaledBlock b = off_gen_(k);
        if (a.m.rows() != p_ || a.m.cols() != p_ || b.m.rows() != p_ || b.m.cols() != p_)
            throw Error(ErrorKind::Bounds, name_ + ": block " + std::to_string(k) + " has wrong shape");
        if (!a.m.allFinite() || !b.m.allFinite() || !std::isfinite(a.log_scale) || !std::isfinite(b.log_scale))
            throw Error(ErrorKind::Overflow, name_ + ": non-finite block at n=" + std::to_string(k));
        if (!is_hermitian(a.m))
            throw Error(ErrorKind::NotHermitian, name_ + ": diagonal block " + std::to_string(k));
        RealVec sv = singular_values(b.m);
        if (!(sv(sv.size() - 1) > kSingularRel * sv(0)))
            throw Error(ErrorKind::Singular, name_ + ": off-diagonal block " + std::to_string(k) +
                                                 " smallest singular value " + std::to_string(sv(sv.size() - 1)));
        cache_->diag.push_back(std::move(a));
        cache_->off.push_back(std::move(b));
    }
}

ScaledBlock BlockJacobiMatrix::diag_scaled(std::size_t n) const {
    {
        std::shared_lock lock(cache_->mu);
        if (n < cache_->diag.size()) return cache_->diag[n];
    }
    extend_to(n);
    std::shared_lock lock(cache_->mu);
    return cache_->diag[n];
}

ScaledBlock BlockJacobiMatrix::offdiag_scaled(std::size_t n) const {
    {
        std::shared_lock lock(cache_->mu);
        if (n < cache_->off.size()) return cache_->off[n];
    }
    extend_to(n);
    std::shared_lock lock(cache_->mu);
    return cache_->off[n];
}

void BlockJacobiMatrix::warm(std::size_t horizon) const {
    if (horizon > 0) extend_to(horizon - 1);
}

DenseTruncation truncate_dense(const BlockJacobiMatrix& J, std::size_t N, std::size_t dense_cap) {
    const std::size_t p = static_cast<std::size_t>(J.p());
    if (N < 1) throw Error(ErrorKind::Bounds, "truncation needs N >= 1");
    if (N * p > dense_cap)
        throw Error(ErrorKind::CapExceeded,
                    "N*p = " + std::to_string(N * p) + " exceeds dense cap " + std::to_string(dense_cap));

    std::vector<ScaledBlock> as(N), bs(N > 0 ? N - 1 : 0);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    auto track = [&](const ScaledBlock& s) {
        const double mx = max_abs(s.m);
        if (mx == 0.0) return;
        const double l = std::log(mx) + s.log_scale;
        lo = std::min(lo, l);
        hi = std::max(hi, l);
    };
    for (std::size_t n = 0; n < N; ++n) {
        as[n] = J.diag_scaled(n);
        track(as[n]);
        if (n + 1 < N) {
            bs[n] = J.offdiag_scaled(n);
            track(bs[n]);
        }
    }
    if (hi - lo > std::log(1e300))
        throw Error(ErrorKind::DynamicRange,
                    "entry magnitudes span more than 1e300; use the scaled recursions instead");

    DenseTruncation out;
    out.N = N;
    out.log_scale = (hi > kMaxLogDouble || lo < -kMaxLogDouble) ? hi : 0.0;
    const Eigen::Index P = static_cast<Eigen::Index>(p);
    out.H = Block::Zero(N * P, N * P);
    for (std::size_t n = 0; n < N; ++n) {
        const Eigen::Index r = static_cast<Eigen::Index>(n) * P;
        out.H.block(r, r, P, P) = std::exp(as[n].log_scale - out.log_scale) * as[n].m;
        if (n + 1 < N) {
            Block b = std::exp(bs[n].log_scale - out.log_scale) * bs[n].m;
            out.H.block(r, r + P, P, P) = b;
            out.H.block(r + P, r, P, P) = b.adjoint();
        }
    }
    // exact symmetry on the diagonal blocks
    out.H = (out.H + out.H.adjoint()).eval() * 0.5;
    return out;
}

std::vector<Block> matvec(const BlockJacobiMatrix& J, const std::vector<Block>& v, std::size_t N) {
    if (v.size() < N + 1) throw Error(ErrorKind::Bounds, "block vector shorter than N+1");
    std::vector<Block> out(N + 1);
    for (std::size_t n = 0; n <= N; ++n) {
        Block acc = J.diag_block(n) * v[n];
        if (n > 0) acc += J.offdiag_block(n - 1).adjoint() * v[n - 1];
        if (n < N) acc += J.offdiag_block(n) * v[n + 1];
        out[n] = std::move(acc);
    }
    return out;
}

}  // namespace jacspec
