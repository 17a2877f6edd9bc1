#include "jacspec/sequences.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <utility>

#include "jacspec/blockmat.hpp"

namespace jacspec {

const char* to_string(SeqKind k) {
    switch (k) {
        case SeqKind::Geometric: return "geometric";
        case SeqKind::Power: return "power";
        case SeqKind::DyukarevD: return "dyukarev_d";
        case SeqKind::Superexp: return "superexp";
        case SeqKind::Explicit: return "explicit";
        case SeqKind::ProductWeighted: return "product-weighted";
    }
    return "?";
}

SeqKind seq_kind_from_string(const std::string& s) {
    if (s == "geometric") return SeqKind::Geometric;
    if (s == "power") return SeqKind::Power;
    if (s == "dyukarev_d") return SeqKind::DyukarevD;
    if (s == "superexp") return SeqKind::Superexp;
    if (s == "explicit") return SeqKind::Explicit;
    if (s == "product-weighted") return SeqKind::ProductWeighted;
    throw Error(ErrorKind::Config, "unknown sequence kind '" + s + "'");
}

const char* to_string(SeriesState s) {
    switch (s) {
        case SeriesState::ConvergedNumerically: return "ConvergedNumerically";
        case SeriesState::DivergingNumerically: return "DivergingNumerically";
        case SeriesState::Inconclusive: return "Inconclusive";
    }
    return "?";
}

double ScalarSequence::eval_log(long n) const {
    if (n < 1) throw Error(ErrorKind::OutOfRange, "sequence index must be >= 1");
    const double m = static_cast<double>(n + shift);
    switch (kind) {
        case SeqKind::Geometric:
            return std::log(scale) + m * std::log(ratio);
        case SeqKind::Power:
            return std::log(scale) + exponent * std::log(m);
        case SeqKind::DyukarevD:
            return std::log(c) - std::log(m + 1.0) - 0.5 * std::log(m * m + 1.0);
        case SeqKind::Superexp:
            return std::log(scale) - std::pow(m, exponent) * std::log(base);
        case SeqKind::Explicit:
            if (n > static_cast<long>(log_values.size()))
                throw Error(ErrorKind::OutOfRange,
                            "explicit sequence has " + std::to_string(log_values.size()) + " terms");
            return log_values[n - 1];
        case SeqKind::ProductWeighted:
            return std::log(scale) - 2.0 * (m - 1.0) * std::log1p(r) - exponent * std::log(m);
    }
    return 0.0;
}

double ScalarSequence::eval(long n) const { return std::exp(eval_log(n)); }

ScalarSequence ScalarSequence::geometric(double ratio, double scale) {
    ScalarSequence s;
    s.kind = SeqKind::Geometric;
    s.ratio = ratio;
    s.scale = scale;
    return s;
}

ScalarSequence ScalarSequence::power(double exponent, double scale) {
    ScalarSequence s;
    s.kind = SeqKind::Power;
    s.exponent = exponent;
    s.scale = scale;
    return s;
}

ScalarSequence ScalarSequence::dyukarev_d(double c, long shift) {
    ScalarSequence s;
    s.kind = SeqKind::DyukarevD;
    s.c = c;
    s.shift = shift;
    return s;
}

ScalarSequence ScalarSequence::superexp(double base, double exponent, double scale) {
    ScalarSequence s;
    s.kind = SeqKind::Superexp;
    s.base = base;
    s.exponent = exponent;
    s.scale = scale;
    return s;
}

ScalarSequence ScalarSequence::explicit_logs(std::vector<double> logs) {
    ScalarSequence s;
    s.kind = SeqKind::Explicit;
    s.log_values = std::move(logs);
    return s;
}

ScalarSequence ScalarSequence::product_weighted(double scale, double r, double exponent) {
    ScalarSequence s;
    s.kind = SeqKind::ProductWeighted;
    s.scale = scale;
    s.r = r;
    s.exponent = exponent;
    return s;
}

std::string ScalarSequence::describe() const {
    std::ostringstream os;
    os << to_string(kind);
    switch (kind) {
        case SeqKind::Geometric: os << "(ratio=" << ratio << ", scale=" << scale << ")"; break;
        case SeqKind::Power: os << "(exponent=" << exponent << ", scale=" << scale << ")"; break;
        case SeqKind::DyukarevD: os << "(c=" << c << ")"; break;
        case SeqKind::Superexp: os << "(base=" << base << ", exponent=" << exponent << ")"; break;
        case SeqKind::Explicit: os << "(" << log_values.size() << " terms)"; break;
        case SeqKind::ProductWeighted: os << "(scale=" << scale << ", r=" << r << ")"; break;
    }
    if (shift != 0) os << "[shift=" << shift << "]";
    return os.str();
}

void CompensatedSum::add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

namespace {

double ls_slope(const std::deque<std::pair<double, double>>& pts) {
    const double k = static_cast<double>(pts.size());
    double sx = 0, sy = 0;
    for (auto& [x, y] : pts) {
        sx += x;
        sy += y;
    }
    const double mx = sx / k, my = sy / k;
    double sxx = 0, sxy = 0;
    for (auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace

SeriesVerdict series_probe(const LogTerms& log_term, long n_first, long n_last, const ProbeConfig& cfg) {
    SeriesVerdict out;
    const double log_ceiling = std::log(cfg.ceiling);
    const long count = n_last - n_first + 1;
    const long window = std::max<long>(4, std::min<long>(cfg.window, count / 2));
    std::deque<std::pair<long, double>> tail;
    CompensatedSum acc;
    long zero_run = 0;

    for (long n = n_first; n <= n_last; ++n) {
        const double lt = log_term(n);
        ++out.n_used;
        if (std::isnan(lt)) {
            out.partial_sum = acc.value();
            return out;
        }
        if (lt > log_ceiling) {
            acc.add(cfg.ceiling);
            out.partial_sum = acc.value();
            out.state = SeriesState::DivergingNumerically;
            return out;
        }
        if (lt == -std::numeric_limits<double>::infinity()) {
            ++zero_run;
        } else {
            zero_run = 0;
            acc.add(std::exp(lt));
        }
        tail.emplace_back(n, lt);
        if (static_cast<long>(tail.size()) > window) tail.pop_front();
        if (acc.value() > cfg.ceiling) {
            out.partial_sum = acc.value();
            out.state = SeriesState::DivergingNumerically;
            return out;
        }
    }
    out.partial_sum = acc.value();
    if (out.n_used < cfg.n_min) return out;

    if (zero_run >= static_cast<long>(tail.size())) {
        out.state = SeriesState::ConvergedNumerically;
        out.ratio_estimate = 0.0;
        out.growth_exponent_estimate = std::numeric_limits<double>::infinity();
        return out;
    }

    std::deque<std::pair<double, double>> lin, loglog;
    for (auto& [n, lt] : tail) {
        if (!std::isfinite(lt)) continue;
        lin.emplace_back(static_cast<double>(n), lt);
        loglog.emplace_back(std::log(static_cast<double>(n)), lt);
    }
    if (lin.size() < 3) return out;
    const double slope_lin = ls_slope(lin);
    const double slope_log = ls_slope(loglog);
    out.ratio_estimate = std::exp(slope_lin);
    out.growth_exponent_estimate = -slope_log;

    const double t_last = std::exp(lin.back().second);
    const double n_last_d = lin.back().first;
    const double scale = std::max(std::abs(out.partial_sum), std::numeric_limits<double>::min());

    if (out.ratio_estimate < 1.0 - cfg.eps) {
        const double r = out.ratio_estimate;
        const double remainder = t_last * r / (1.0 - r);
        if (remainder <= std::max(cfg.tol * scale, 1e-3 * scale) || remainder == 0.0) {
            out.tail_estimate = remainder;
            out.state = SeriesState::ConvergedNumerically;
            return out;
        }
    }
    const double a = out.growth_exponent_estimate;
    if (a >= cfg.converge_exponent) {
        out.tail_estimate = t_last * n_last_d / (a - 1.0) - 0.5 * t_last;
        out.state = SeriesState::ConvergedNumerically;
    } else if (a <= cfg.diverge_exponent && out.ratio_estimate >= 1.0 - cfg.eps) {
        out.state = SeriesState::DivergingNumerically;
    }
    return out;
}

SeriesVerdict series_probe(const std::vector<double>& log_terms, const ProbeConfig& cfg) {
    return series_probe([&](long n) { return log_terms[n - 1]; }, 1, static_cast<long>(log_terms.size()), cfg);
}

}  // namespace jacspec
