#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace jacspec {

using cplx = std::complex<double>;
using Block = Eigen::MatrixXcd;
using RealVec = Eigen::VectorXd;

enum class ErrorKind {
    NotHermitian,
    NoConvergence,
    Singular,
    NearKernel,
    OutOfRange,
    CapExceeded,
    DynamicRange,
    ModelMismatch,
    Bounds,
    Overflow,
    Config,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

/// Relative threshold below which a singular value counts as zero.
inline constexpr double kSingularRel = 1e-13;

struct HermEigResult {
    RealVec eigenvalues;  ///< ascending
    Block vectors;        ///< columns are eigenvectors
};

bool is_hermitian(const Block& m);

/// Cyclic two-sided Jacobi rotations; 30 sweeps, off-diagonal mass below 1e-13 relative.
HermEigResult herm_eig(const Block& m);

RealVec singular_values(const Block& m);  ///< descending
double spec_norm(const Block& m);
double min_singular(const Block& m);

/// Inverse via SVD. Throws Singular when sigma_min <= 1e-13 * sigma_max.
Block inv(const Block& m);

struct AbsInvSqrt {
    Block value;  ///< |M|^{-1/2}
    Block sign;   ///< sign(M)
};

/// |M|^{-1/2} for Hermitian M; throws NearKernel when an eigenvalue is within 1e-12 ||M|| of 0.
AbsInvSqrt abs_inv_sqrt(const Block& m);

Block identity(int p);

}  // namespace jacspec
