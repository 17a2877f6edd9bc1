#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "jacspec/jacobi.hpp"
#include "jacspec/sequences.hpp"

namespace jacspec {

struct SpectrumSlice {
    std::size_t N = 0;
    std::vector<double> eigenvalues;     ///< ascending, length N p
    std::vector<double> ritz_stability;  ///< relative distance to the nearest eigenvalue at N/2; 0 when N = 1
};

/// Eigenvalues of the leading N-block truncation, without drift.
std::vector<double> truncation_eigenvalues(const BlockJacobiMatrix& J, std::size_t N,
                                           std::size_t dense_cap = kDefaultDenseCap);

/// Eigenvalues at N with drift against N/2.
SpectrumSlice truncation_spectrum(const BlockJacobiMatrix& J, std::size_t N,
                                  std::size_t dense_cap = kDefaultDenseCap);

/// Slices for several N, computed in parallel, in the given order.
std::vector<SpectrumSlice> truncation_ladder(const BlockJacobiMatrix& J, const std::vector<std::size_t>& Ns,
                                             std::size_t dense_cap = kDefaultDenseCap);

/// Cauchy interlacing of `inner` (size m) within `outer` (size m + p): outer[k] <= inner[k] <= outer[k + p].
bool interlaces(const std::vector<double>& inner, const std::vector<double>& outer, int p, double slack = 1e-9);

/// pi^2 (2k+1)^2 / (4 d_n^2) for n = 1..n_terms, k = 0..k_max, each repeated p times; ascending.
std::vector<double> free_schrodinger_spectrum(const ScalarSequence& d, long n_terms, long k_max, int p = 1);

/// +-sqrt(c^2 pi^2 (2k+1)^2 / (4 d_n^2) + c^4 / 4), each repeated p times; ascending.
std::vector<double> free_dirac_spectrum(const ScalarSequence& d, double c, long n_terms, long k_max, int p = 1);

struct SchattenResult {
    double partial = 0.0;  ///< sum of |v|^-q over the visited values (sup |v|^-1 when q is infinite)
    SeriesVerdict verdict;
};

/// sum |v|^-q over the values in the given order.
SchattenResult schatten_partial(const std::vector<double>& values, double q, const ProbeConfig& cfg = {});

/// Schatten sum of the free Schrodinger operator: the sum over k is closed, the series over n is probed.
SchattenResult schatten_free_schrodinger(const ScalarSequence& d, double q, long n_terms, int p = 1,
                                         const ProbeConfig& cfg = {});

/// Same for the free Dirac operator; the sum over k diverges for q <= 1.
SchattenResult schatten_free_dirac(const ScalarSequence& d, double c, double q, long n_terms, int p = 1,
                                   const ProbeConfig& cfg = {});

/// CSV with header N,index,eigenvalue,drift.
void write_spectrum_csv(std::ostream& out, const std::vector<SpectrumSlice>& slices);

}  // namespace jacspec
