#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "jacspec/blockmat.hpp"
#include "jacspec/sequences.hpp"

using namespace jacspec;

TEST_CASE("eval_log closed forms") {
    CHECK(ScalarSequence::geometric(0.5).eval_log(3) == doctest::Approx(-3.0 * std::log(2.0)).epsilon(1e-15));
    CHECK(ScalarSequence::dyukarev_d(1.0).eval_log(1) == doctest::Approx(-1.039720).epsilon(1e-6));
    CHECK(ScalarSequence::dyukarev_d(1.0).eval(1) == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))));
    CHECK(ScalarSequence::superexp(2.0, 2.0).eval_log(5) == doctest::Approx(-25.0 * std::log(2.0)));
    CHECK(ScalarSequence::power(-2.0, 3.0).eval(4) == doctest::Approx(3.0 / 16.0));
}

TEST_CASE("log domain survives underflow") {
    auto s = ScalarSequence::superexp(2.0, 2.0);
    CHECK(s.eval(40) == 0.0);
    CHECK(s.eval_log(40) == doctest::Approx(-1600.0 * std::log(2.0)));
    CHECK(std::isfinite(s.eval_log(1000)));
}

TEST_CASE("dyukarev_d with shift") {
    auto s = ScalarSequence::dyukarev_d(2.0, -1);
    // shifted index m = n - 1
    CHECK(s.eval(2) == doctest::Approx(2.0 / (2.0 * std::sqrt(2.0))));
}

TEST_CASE("product-weighted cancels the growth factor") {
    auto s = ScalarSequence::product_weighted(1.0, 5.0);
    for (long n : {1L, 2L, 7L, 50L}) {
        const double lt = s.eval_log(n) + 2.0 * (n - 1) * std::log(6.0);
        CHECK(lt == doctest::Approx(-2.0 * std::log(static_cast<double>(n))).epsilon(1e-12));
    }
}

TEST_CASE("explicit sequence bounds") {
    auto s = ScalarSequence::explicit_logs({0.0, -1.0});
    CHECK(s.eval_log(2) == -1.0);
    try {
        s.eval_log(3);
        FAIL("expected OutOfRange");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::OutOfRange);
    }
    CHECK_THROWS_AS(s.eval_log(0), Error);
}

TEST_CASE("seq_kind names round trip") {
    for (SeqKind k : {SeqKind::Geometric, SeqKind::Power, SeqKind::DyukarevD, SeqKind::Superexp, SeqKind::Explicit,
                      SeqKind::ProductWeighted})
        CHECK(seq_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(seq_kind_from_string("nope"), Error);
}

TEST_CASE("series_probe: harmonic diverges") {
    auto v = series_probe([](long n) { return -std::log(static_cast<double>(n)); }, 1, 1000000);
    CHECK(v.state == SeriesState::DivergingNumerically);
    CHECK(v.growth_exponent_estimate == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("series_probe: geometric sums") {
    auto v = series_probe([](long n) { return -n * std::log(2.0); }, 1, 200);
    CHECK(v.state == SeriesState::ConvergedNumerically);
    CHECK(std::abs(v.sum() - 1.0) < 1e-12);

    for (double r : {0.1, 0.5, 0.9}) {
        const double scale = 3.0;
        auto g = series_probe([&](long n) { return std::log(scale) + n * std::log(r); }, 1, 600);
        CAPTURE(r);
        CHECK(g.state == SeriesState::ConvergedNumerically);
        CHECK(std::abs(g.sum() - scale * r / (1.0 - r)) < 1e-10);
    }
}

TEST_CASE("series_probe: inverse squares from n = 2") {
    // oracle: compensated partial sum to 1e7 plus the Euler-Maclaurin tail
    CompensatedSum ref;
    for (long n = 2; n <= 10000000; ++n) ref.add(1.0 / (static_cast<double>(n) * n));
    const double oracle = ref.value() + 1e-7 - 0.5e-14;
    CHECK(oracle == doctest::Approx(M_PI * M_PI / 6.0 - 1.0).epsilon(1e-12));

    auto v = series_probe([](long n) { return -2.0 * std::log(static_cast<double>(n)); }, 2, 10000);
    CHECK(v.state == SeriesState::ConvergedNumerically);
    CHECK(std::abs(v.sum() - 0.644934) < 1e-6);
    CHECK(std::abs(v.sum() - oracle) < 1e-6);
}

TEST_CASE("series_probe: zero terms and ceiling") {
    const double ninf = -std::numeric_limits<double>::infinity();
    auto z = series_probe([&](long) { return ninf; }, 1, 100);
    CHECK(z.state == SeriesState::ConvergedNumerically);
    CHECK(z.partial_sum == 0.0);

    auto big = series_probe([](long n) { return static_cast<double>(n); }, 1, 100);
    CHECK(big.state == SeriesState::DivergingNumerically);

    auto few = series_probe([](long) { return 0.0; }, 1, 3);
    CHECK(few.state == SeriesState::Inconclusive);
}

TEST_CASE("series_probe is deterministic") {
    auto f = [](long n) { return -1.07 * std::log(static_cast<double>(n)); };
    auto a = series_probe(f, 1, 20000), b = series_probe(f, 1, 20000);
    CHECK(a.state == b.state);
    CHECK(a.partial_sum == b.partial_sum);
    CHECK(!(a.state == SeriesState::ConvergedNumerically && b.state == SeriesState::DivergingNumerically));
}

TEST_CASE("log_add and CompensatedSum") {
    CHECK(log_add(std::log(2.0), std::log(3.0)) == doctest::Approx(std::log(5.0)));
    CHECK(log_add(1000.0, 1000.0) == doctest::Approx(1000.0 + std::log(2.0)));
    CHECK(log_add(-std::numeric_limits<double>::infinity(), 1.5) == 1.5);
    CompensatedSum s;
    s.add(1.0);
    for (int i = 0; i < 1000; ++i) s.add(1e-16);
    CHECK(s.value() == doctest::Approx(1.0 + 1e-13).epsilon(1e-15));
}
