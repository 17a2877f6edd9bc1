#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include "jacspec/blockmat.hpp"

namespace jacspec {

/// Block with a factored-out magnitude: true value = exp(log_scale) * m.
struct ScaledBlock {
    Block m;
    double log_scale = 0.0;

    Block value() const;  ///< throws Overflow when the magnitude is not representable
    double log_norm() const;
    static ScaledBlock from(const Block& b);  ///< normalizes so that ||m|| is 1 (or m = 0)
    static ScaledBlock scalar_identity(int p, double log_magnitude, double sign = 1.0);
};

/// Product of two scaled blocks.
ScaledBlock operator*(const ScaledBlock& a, const ScaledBlock& b);
ScaledBlock adjoint(const ScaledBlock& a);
ScaledBlock inverse(const ScaledBlock& a);

/// Block Jacobi matrix with 0-based blocks:
///   (Jv)_n = B_{n-1}^* v_{n-1} + A_n v_n + B_n v_{n+1}.
/// Blocks are generated lazily into an append-only cache; A_n is checked Hermitian and
/// B_n invertible when first generated.
class BlockJacobiMatrix {
public:
    using Generator = std::function<ScaledBlock(std::size_t)>;

    BlockJacobiMatrix(int p, Generator diag, Generator offdiag, std::string name = "general");

    int p() const { return p_; }
    const std::string& name() const { return name_; }

    ScaledBlock diag_scaled(std::size_t n) const;
    ScaledBlock offdiag_scaled(std::size_t n) const;
    Block diag_block(std::size_t n) const { return diag_scaled(n).value(); }
    Block offdiag_block(std::size_t n) const { return offdiag_scaled(n).value(); }

    /// Generates and validates blocks 0..horizon-1.
    void warm(std::size_t horizon) const;

private:
    struct Cache {
        std::shared_mutex mu;
        std::deque<ScaledBlock> diag;
        std::deque<ScaledBlock> off;
    };

    void extend_to(std::size_t n) const;

    int p_;
    Generator diag_gen_;
    Generator off_gen_;
    std::string name_;
    std::shared_ptr<Cache> cache_;
};

inline constexpr std::size_t kDefaultDenseCap = 8192;

struct DenseTruncation {
    std::size_t N = 0;
    Block H;                ///< (N p) x (N p) Hermitian, scaled by exp(log_scale)
    double log_scale = 0.0; ///< common factor; 0 unless entries exceed double range
};

/// Leading N x N block section. Throws CapExceeded or DynamicRange.
DenseTruncation truncate_dense(const BlockJacobiMatrix& J, std::size_t N,
                               std::size_t dense_cap = kDefaultDenseCap);

/// Applies J to the block vector v (blocks 0..N), treating v_{-1} = v_{N+1} = 0.
std::vector<Block> matvec(const BlockJacobiMatrix& J, const std::vector<Block>& v, std::size_t N);

}  // namespace jacspec
