#include "jacspec/blockmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace jacspec {

const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::NotHermitian: return "NotHermitian";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::Singular: return "Singular";
        case ErrorKind::NearKernel: return "NearKernel";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::CapExceeded: return "CapExceeded";
        case ErrorKind::DynamicRange: return "DynamicRange";
        case ErrorKind::ModelMismatch: return "ModelMismatch";
        case ErrorKind::Bounds: return "Bounds";
        case ErrorKind::Overflow: return "Overflow";
        case ErrorKind::Config: return "Config";
    }
    return "Unknown";
}

Block identity(int p) { return Block::Identity(p, p); }

bool is_hermitian(const Block& m) {
    if (m.rows() != m.cols()) return false;
    double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    return dev <= 1e-12 * (1.0 + spec_norm(m));
}

HermEigResult herm_eig(const Block& m) {
    if (m.rows() != m.cols() || !is_hermitian(m))
        throw Error(ErrorKind::NotHermitian, "herm_eig expects a Hermitian matrix");
    const Eigen::Index p = m.rows();
    Block a = (m + m.adjoint()) * 0.5;
    Block v = Block::Identity(p, p);
    const double total = a.norm();
    const double target = 1e-13 * total;

    auto off_mass = [&]() {
        double s = 0.0;
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = 0; j < p; ++j)
                if (i != j) s += std::norm(a(i, j));
        return std::sqrt(s);
    };

    bool converged = off_mass() <= target;
    for (int sweep = 0; sweep < 30 && !converged; ++sweep) {
        for (Eigen::Index i = 0; i < p - 1; ++i) {
            for (Eigen::Index j = i + 1; j < p; ++j) {
                const cplx g = a(i, j);
                const double ag = std::abs(g);
                if (ag == 0.0) continue;
                const cplx e = g / ag;
                const double tau = (a(j, j).real() - a(i, i).real()) / (2.0 * ag);
                const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cplx ce = std::conj(e);
                for (Eigen::Index r = 0; r < p; ++r) {
                    const cplx ai = a(r, i), aj = a(r, j);
                    a(r, i) = c * ai - s * ce * aj;
                    a(r, j) = s * ai + c * ce * aj;
                    const cplx vi = v(r, i), vj = v(r, j);
                    v(r, i) = c * vi - s * ce * vj;
                    v(r, j) = s * vi + c * ce * vj;
                }
                for (Eigen::Index col = 0; col < p; ++col) {
                    const cplx ai = a(i, col), aj = a(j, col);
                    a(i, col) = c * ai - s * e * aj;
                    a(j, col) = s * ai + c * e * aj;
                }
                a(i, j) = 0.0;
                a(j, i) = 0.0;
            }
        }
        converged = off_mass() <= target;
    }
    if (!converged) throw Error(ErrorKind::NoConvergence, "Jacobi sweep budget (30) exhausted");

    std::vector<Eigen::Index> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index x, Eigen::Index y) { return a(x, x).real() < a(y, y).real(); });
    HermEigResult out;
    out.eigenvalues.resize(p);
    out.vectors.resize(p, p);
    for (Eigen::Index k = 0; k < p; ++k) {
        out.eigenvalues(k) = a(order[k], order[k]).real();
        out.vectors.col(k) = v.col(order[k]);
    }
    return out;
}

RealVec singular_values(const Block& m) {
    if (m.size() == 0) return RealVec();
    if (m.rows() == 1 && m.cols() == 1) {
        RealVec s(1);
        s(0) = std::abs(m(0, 0));
        return s;
    }
    Eigen::JacobiSVD<Block> svd(m);
    return svd.singularValues();
}

double spec_norm(const Block& m) {
    if (m.size() == 0) return 0.0;
    if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
    return singular_values(m)(0);
}

double min_singular(const Block& m) {
    RealVec s = singular_values(m);
    return s.size() ? s(s.size() - 1) : 0.0;
}

Block inv(const Block& m) {
    if (m.rows() != m.cols()) throw Error(ErrorKind::Singular, "non-square matrix");
    if (m.rows() == 1) {
        if (m(0, 0) == cplx(0.0)) throw Error(ErrorKind::Singular, "smallest singular value 0");
        Block r(1, 1);
        r(0, 0) = 1.0 / m(0, 0);
        return r;
    }
    Eigen::JacobiSVD<Block> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RealVec& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    if (!(smin > kSingularRel * s(0)))
        throw Error(ErrorKind::Singular, "smallest singular value " + std::to_string(smin));
    return svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().adjoint();
}

AbsInvSqrt abs_inv_sqrt(const Block& m) {
    HermEigResult e = herm_eig(m);
    const double scale = e.eigenvalues.cwiseAbs().maxCoeff();
    const Eigen::Index p = m.rows();
    RealVec w(p), sg(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        const double lam = e.eigenvalues(k);
        if (!(std::abs(lam) > 1e-12 * scale) || lam == 0.0)
            throw Error(ErrorKind::NearKernel, "eigenvalue " + std::to_string(lam) + " is numerically zero");
        w(k) = 1.0 / std::sqrt(std::abs(lam));
        sg(k) = lam > 0 ? 1.0 : -1.0;
    }
    AbsInvSqrt out;
    out.value = e.vectors * w.asDiagonal() * e.vectors.adjoint();
    out.sign = e.vectors * sg.asDiagonal() * e.vectors.adjoint();
    return out;
}

}  // namespace jacspec
