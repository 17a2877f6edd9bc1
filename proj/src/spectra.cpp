#include "jacspec/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <ostream>


namespace jacspec {

namespace {

constexpr double kPi = std::numbers::pi;

void check_q(double q) {
    if (!(q > 0.0)) throw Error(ErrorKind::Bounds, "Schatten exponent must be positive");
}

void check_terms(long n_terms, long k_max) {
    if (n_terms < 1 || k_max < 0) throw Error(ErrorKind::Bounds, "spectrum needs n_terms >= 1 and k_max >= 0");
}

/// log sum_{k>=0} ((2k+1)^2 + w^2)^{-q/2}, q > 1: exact head plus Euler-Maclaurin tail.
/// log sum_k ((2k+1)^2 + w^2)^{-q/2}; zeta values are fixed per q.
struct DiracInner {
    double q, z0, z2;
    explicit DiracInner(double q_)
        : q(q_), z0((1.0 - std::pow(2.0, -q_)) * std::riemann_zeta(q_)),
          z2((1.0 - std::pow(2.0, -q_ - 2.0)) * std::riemann_zeta(q_ + 2.0)) {}

    double log_at(double w) const {
        // small w: (2k+1)^{-q} (1 - (q/2) w^2 (2k+1)^{-2}) up to O(w^4)
        if (w < 1e-3) return std::log(z0) + std::log1p(-0.5 * q * w * w * z2 / z0);
        constexpr long K = 2000;
        auto g = [&](double k) { return std::pow((2.0 * k + 1.0) * (2.0 * k + 1.0) + w * w, -0.5 * q); };
        CompensatedSum s;
        for (long k = 0; k < K; ++k) s.add(g(static_cast<double>(k)));
        const double x = 2.0 * K + 1.0;
        s.add(std::pow(x, 1.0 - q) / (2.0 * (q - 1.0)) + 0.5 * g(static_cast<double>(K)));
        return std::log(s.value());
    }
};

}  // namespace

std::vector<double> truncation_eigenvalues(const BlockJacobiMatrix& J, std::size_t N, std::size_t dense_cap) {
    const DenseTruncation t = truncate_dense(J, N, dense_cap);
    Eigen::SelfAdjointEigenSolver<Block> es(t.H, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "dense Hermitian eigensolve failed");
    const double f = std::exp(t.log_scale);
    std::vector<double> out(static_cast<std::size_t>(es.eigenvalues().size()));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f * es.eigenvalues()(static_cast<Eigen::Index>(i));
    return out;
}

SpectrumSlice truncation_spectrum(const BlockJacobiMatrix& J, std::size_t N, std::size_t dense_cap) {
    SpectrumSlice s;
    s.N = N;
    s.eigenvalues = truncation_eigenvalues(J, N, dense_cap);
    s.ritz_stability.assign(s.eigenvalues.size(), 0.0);
    if (N < 2) return s;
    const std::vector<double> half = truncation_eigenvalues(J, N / 2, dense_cap);
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
        const double v = s.eigenvalues[i];
        const auto it = std::lower_bound(half.begin(), half.end(), v);
        double dist = std::numeric_limits<double>::infinity();
        if (it != half.end()) dist = std::min(dist, *it - v);
        if (it != half.begin()) dist = std::min(dist, v - *(it - 1));
        s.ritz_stability[i] = dist / std::max(std::abs(v), std::numeric_limits<double>::min());
    }
    return s;
}

std::vector<SpectrumSlice> truncation_ladder(const BlockJacobiMatrix& J, const std::vector<std::size_t>& Ns,
                                             std::size_t dense_cap) {
    // generate blocks up front so the workers only read the cache
    std::size_t top = 0;
    for (std::size_t N : Ns) top = std::max(top, N);
    J.warm(top + 1);
    std::vector<std::future<SpectrumSlice>> jobs;
    for (std::size_t N : Ns)
        jobs.push_back(std::async(std::launch::async, [&J, N, dense_cap] { return truncation_spectrum(J, N, dense_cap); }));
    std::vector<SpectrumSlice> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

bool interlaces(const std::vector<double>& inner, const std::vector<double>& outer, int p, double slack) {
    const std::size_t P = static_cast<std::size_t>(p);
    if (outer.size() != inner.size() + P) return false;
    for (std::size_t k = 0; k < inner.size(); ++k) {
        const double tol = slack * (1.0 + std::abs(inner[k]));
        if (outer[k] > inner[k] + tol || inner[k] > outer[k + P] + tol) return false;
    }
    return true;
}

std::vector<double> free_schrodinger_spectrum(const ScalarSequence& d, long n_terms, long k_max, int p) {
    check_terms(n_terms, k_max);
    std::vector<double> out;
    for (long n = 1; n <= n_terms; ++n) {
        const double dn = d.eval(n);
        for (long k = 0; k <= k_max; ++k) {
            const double m = kPi * static_cast<double>(2 * k + 1) / (2.0 * dn);
            out.insert(out.end(), static_cast<std::size_t>(p), m * m);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> free_dirac_spectrum(const ScalarSequence& d, double c, long n_terms, long k_max, int p) {
    check_terms(n_terms, k_max);
    std::vector<double> out;
    for (long n = 1; n <= n_terms; ++n) {
        const double dn = d.eval(n);
        for (long k = 0; k <= k_max; ++k) {
            const double m = c * kPi * static_cast<double>(2 * k + 1) / (2.0 * dn);
            const double v = std::sqrt(m * m + c * c * c * c / 4.0);
            out.insert(out.end(), static_cast<std::size_t>(p), v);
            out.insert(out.end(), static_cast<std::size_t>(p), -v);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

SchattenResult schatten_partial(const std::vector<double>& values, double q, const ProbeConfig& cfg) {
    check_q(q);
    SchattenResult r;
    if (std::isinf(q)) {
        for (double v : values) r.partial = std::max(r.partial, 1.0 / std::abs(v));
        r.verdict.state = SeriesState::Inconclusive;
        r.verdict.partial_sum = r.partial;
        r.verdict.n_used = static_cast<long>(values.size());
        return r;
    }
    std::vector<double> logs;
    logs.reserve(values.size());
    for (double v : values) logs.push_back(-q * std::log(std::abs(v)));
    r.verdict = series_probe(logs, cfg);
    r.partial = r.verdict.partial_sum;
    return r;
}

SchattenResult schatten_free_schrodinger(const ScalarSequence& d, double q, long n_terms, int p,
                                         const ProbeConfig& cfg) {
    check_q(q);
    SchattenResult r;
    if (q <= 0.5) {
        // sum over k of (2k+1)^{-2q} already diverges
        r.verdict.state = SeriesState::DivergingNumerically;
        r.partial = std::numeric_limits<double>::infinity();
        return r;
    }
    // sum_k (2d/(pi(2k+1)))^{2q} = (2d/pi)^{2q} (1 - 2^{-2q}) zeta(2q)
    const double log_inner = std::log(static_cast<double>(p)) + std::log1p(-std::pow(2.0, -2.0 * q)) +
                             std::log(std::riemann_zeta(2.0 * q));
    r.verdict = series_probe(
        [&](long n) { return log_inner + 2.0 * q * (std::log(2.0 / kPi) + d.eval_log(n)); }, 1, n_terms, cfg);
    r.partial = r.verdict.partial_sum;
    return r;
}

SchattenResult schatten_free_dirac(const ScalarSequence& d, double c, double q, long n_terms, int p,
                                   const ProbeConfig& cfg) {
    check_q(q);
    SchattenResult r;
    if (q <= 1.0) {
        r.verdict.state = SeriesState::DivergingNumerically;
        r.partial = std::numeric_limits<double>::infinity();
        return r;
    }
    // |lambda| = a sqrt((2k+1)^2 + w^2) with a = c pi / (2 d), w = c d / pi
    const DiracInner inner(q);
    r.verdict = series_probe(
        [&](long n) {
            const double ld = d.eval_log(n);
            const double la = std::log(c * kPi / 2.0) - ld;
            const double w = c * std::exp(ld) / kPi;
            return std::log(2.0 * p) - q * la + inner.log_at(w);
        },
        1, n_terms, cfg);
    r.partial = r.verdict.partial_sum;
    return r;
}

void write_spectrum_csv(std::ostream& out, const std::vector<SpectrumSlice>& slices) {
    out << "N,index,eigenvalue,drift\n";
    const auto old = out.precision(17);
    for (const SpectrumSlice& s : slices)
        for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
            out << s.N << ',' << i << ',' << s.eigenvalues[i] << ',' << s.ritz_stability[i] << '\n';
    out.precision(old);
}

}  // namespace jacspec
