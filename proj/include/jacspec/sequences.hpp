#pragma once

#include <functional>
#include <string>
#include <vector>

namespace jacspec {

enum class SeqKind { Geometric, Power, DyukarevD, Superexp, Explicit, ProductWeighted };

const char* to_string(SeqKind k);
SeqKind seq_kind_from_string(const std::string& s);

/// Positive scalar sequence indexed from n = 1, stored and evaluated as natural logs.
///
/// Kinds (value at n, with m = n + shift):
///   geometric        scale * ratio^m
///   power            scale * m^exponent
///   dyukarev_d       c / ((m + 1) sqrt(m^2 + 1))
///   superexp         scale * base^(-m^exponent)
///   explicit         exp(log_values[n - 1])
///   product-weighted scale / ((1 + r)^(2(m - 1)) m^exponent)
struct ScalarSequence {
    SeqKind kind = SeqKind::Geometric;
    double ratio = 0.5;
    double scale = 1.0;
    double exponent = 1.0;
    double base = 2.0;
    double c = 1.0;
    double r = 0.0;
    long shift = 0;
    std::vector<double> log_values;

    double eval_log(long n) const;
    double eval(long n) const;

    static ScalarSequence geometric(double ratio, double scale = 1.0);
    static ScalarSequence power(double exponent, double scale = 1.0);
    static ScalarSequence dyukarev_d(double c, long shift = 0);
    static ScalarSequence superexp(double base, double exponent, double scale = 1.0);
    static ScalarSequence explicit_logs(std::vector<double> logs);
    static ScalarSequence product_weighted(double scale, double r, double exponent = 2.0);

    std::string describe() const;
};

enum class SeriesState { ConvergedNumerically, DivergingNumerically, Inconclusive };

const char* to_string(SeriesState s);

struct ProbeConfig {
    long window = 1000;
    double ceiling = 1e12;
    double eps = 1e-3;
    double tol = 1e-10;           ///< relative remainder bound for the geometric branch
    double converge_exponent = 1.1;  ///< power-law decay exponent above which the tail is summable
    double diverge_exponent = 1.05;  ///< at or below this the tail is treated as non-summable
    long n_min = 8;
};

struct SeriesVerdict {
    SeriesState state = SeriesState::Inconclusive;
    double partial_sum = 0.0;   ///< compensated sum of the terms actually visited
    double tail_estimate = 0.0; ///< modelled remainder (0 unless converged)
    long n_used = 0;
    double growth_exponent_estimate = 0.0;  ///< fitted a in t_n ~ n^{-a}
    double ratio_estimate = 0.0;            ///< fitted geometric ratio of consecutive terms
    double sum() const { return partial_sum + tail_estimate; }
};

/// Log-term generator: returns log t_n; -inf encodes a zero term.
using LogTerms = std::function<double(long)>;

/// Sums t_n for n in [n_first, n_last] and classifies the tail.
SeriesVerdict series_probe(const LogTerms& log_term, long n_first, long n_last,
                           const ProbeConfig& cfg = {});

/// Same, over an explicit list of log-terms indexed from 1.
SeriesVerdict series_probe(const std::vector<double>& log_terms, const ProbeConfig& cfg = {});

/// Neumaier compensated accumulator.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// log(exp(a) + exp(b)) without overflow.
double log_add(double a, double b);

}  // namespace jacspec
