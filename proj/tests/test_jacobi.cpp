#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>

#include "jacspec/generators.hpp"
#include "jacspec/jacobi.hpp"

using namespace jacspec;

namespace {

BlockJacobiMatrix free_scalar() {
    return make_general(1, [](std::size_t) { return Block::Zero(1, 1); },
                        [](std::size_t) { return Block::Identity(1, 1); }, "free");
}

std::vector<BlockJacobiMatrix> sample_families() {
    InteractionModel ma;
    ma.p = 2;
    ma.d = ScalarSequence::geometric(0.5);
    ma.alpha = BlockSequence::constant_scalar(5.0);
    InteractionModel mb = ma;
    mb.alpha.reset();
    mb.beta = BlockSequence::scaled_identity(ma.d, -1.0);
    InteractionModel ms;
    ms.p = 1;
    ms.d = ScalarSequence::power(-2.0);
    ms.alpha = BlockSequence::scaled_identity(ScalarSequence::power(4.0));
    return {free_scalar(),           make_dirac_alpha(ma),    make_dirac_alpha_simple(ma), make_boundary_alpha(ma),
            make_dirac_beta(mb),     make_dirac_beta_simple(mb), make_schrodinger_J1(ms), make_schrodinger_J2(ms),
            make_dyukarev(3, 2)};
}

}  // namespace

TEST_CASE("diag and offdiag blocks of the free scalar family") {
    auto J = free_scalar();
    CHECK(J.diag_block(5)(0, 0) == cplx(0.0));
    CHECK(J.offdiag_block(5)(0, 0) == cplx(1.0));
}

TEST_CASE("Dyukarev blocks") {
    auto J = make_dyukarev(2, 1);
    CHECK(J.diag_block(0).norm() == 0.0);
    CHECK(J.diag_block(17).norm() == 0.0);
    CHECK((J.offdiag_block(0) - Block::Identity(2, 2)).norm() == 0.0);
    Block b1 = J.offdiag_block(1);
    CHECK(b1(0, 0).real() == doctest::Approx(2.0 * std::sqrt(2.0)));
    CHECK(b1(1, 1).real() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("truncate_dense") {
    auto t = truncate_dense(free_scalar(), 3);
    Block expect(3, 3);
    expect << 0, 1, 0, 1, 0, 1, 0, 1, 0;
    CHECK((t.H - expect).norm() == 0.0);
    CHECK(t.log_scale == 0.0);

    auto d = truncate_dense(make_dyukarev(2, 1), 2);
    CHECK(d.H.block(0, 0, 2, 2).norm() == 0.0);
    CHECK((d.H.block(0, 2, 2, 2) - Block::Identity(2, 2)).norm() == 0.0);
    CHECK((d.H.block(2, 0, 2, 2) - Block::Identity(2, 2)).norm() == 0.0);

    for (const auto& J : sample_families()) {
        auto h = truncate_dense(J, 12);
        CAPTURE(J.name());
        CHECK((h.H - h.H.adjoint()).norm() == 0.0);
    }
}

TEST_CASE("truncate_dense is nested") {
    for (const auto& J : sample_families()) {
        CAPTURE(J.name());
        const int p = J.p();
        auto a = truncate_dense(J, 9), b = truncate_dense(J, 10);
        REQUIRE(a.log_scale == b.log_scale);
        CHECK((b.H.topLeftCorner(9 * p, 9 * p) - a.H).norm() == 0.0);
    }
}

TEST_CASE("truncate_dense guards") {
    CHECK_THROWS_AS(truncate_dense(free_scalar(), 100, 50), Error);
    try {
        truncate_dense(free_scalar(), 100, 50);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::CapExceeded);
    }
    InteractionModel m;
    m.d = ScalarSequence::superexp(2.0, 2.0);
    m.alpha = BlockSequence::zero();
    try {
        truncate_dense(make_dirac_alpha(m), 100);
        FAIL("expected DynamicRange");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DynamicRange);
    }
}

TEST_CASE("matvec") {
    auto J = free_scalar();
    std::vector<Block> v(5, Block::Zero(1, 1));
    v[0](0, 0) = 1.0;
    auto w = matvec(J, v, 4);
    CHECK(w[0](0, 0) == cplx(0.0));
    CHECK(w[1](0, 0) == cplx(1.0));
    for (std::size_t k = 2; k < w.size(); ++k) CHECK(w[k].norm() == 0.0);

    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    for (const auto& Jf : sample_families()) {
        CAPTURE(Jf.name());
        const int p = Jf.p();
        const std::size_t N = 10;
        // basis block: at most three nonzero output blocks
        std::vector<Block> e(N + 1, Block::Zero(p, p));
        e[5] = Block::Identity(p, p);
        auto out = matvec(Jf, e, N);
        int nonzero = 0;
        for (const Block& b : out) nonzero += b.norm() > 0;
        CHECK(nonzero <= 3);

        // interior components agree with the dense truncation
        auto t = truncate_dense(Jf, N + 1);
        if (t.log_scale != 0.0) continue;
        std::vector<Block> x(N + 1, Block::Zero(p, 1));
        Eigen::VectorXcd flat((N + 1) * p);
        for (std::size_t k = 0; k <= N; ++k)
            for (int i = 0; i < p; ++i) {
                x[k](i, 0) = cplx(g(rng), g(rng));
                flat(k * p + i) = x[k](i, 0);
            }
        auto y = matvec(Jf, x, N);
        Eigen::VectorXcd ref = t.H * flat;
        for (std::size_t k = 0; k < N; ++k) {
            const double scale = 1.0 + ref.segment(k * p, p).norm();
            CAPTURE(Jf.name());
            CHECK((y[k].col(0) - ref.segment(k * p, p)).norm() <= 1e-12 * scale);
        }
    }
}

TEST_CASE("construction checks") {
    auto bad_diag = make_general(2, [](std::size_t) {
        Block a(2, 2);
        a << 1, 2, 0, 1;
        return a;
    }, [](std::size_t) { return Block::Identity(2, 2); });
    try {
        bad_diag.diag_block(0);
        FAIL("expected NotHermitian");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotHermitian);
    }
    auto bad_off = make_general(1, [](std::size_t) { return Block::Zero(1, 1); },
                                [](std::size_t n) -> Block { return n == 3 ? Block(Block::Zero(1, 1)) : Block(Block::Identity(1, 1)); });
    CHECK_NOTHROW(bad_off.offdiag_block(2));
    try {
        bad_off.offdiag_block(3);
        FAIL("expected Singular");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Singular);
    }
}

TEST_CASE("every sampled family passes the block checks on a long window") {
    for (const auto& J : sample_families()) {
        CAPTURE(J.name());
        CHECK_NOTHROW(J.warm(10000));
    }
}

TEST_CASE("scaled blocks") {
    Block b = 3.0 * Block::Identity(2, 2);
    auto s = ScaledBlock::from(b);
    CHECK((s.value() - b).norm() < 1e-14);
    CHECK(s.log_norm() == doctest::Approx(std::log(3.0)));
    auto big = ScaledBlock::scalar_identity(2, 800.0, -1.0);
    CHECK_THROWS_AS(big.value(), Error);
    auto prod = big * inverse(big);
    CHECK((prod.value() - Block::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("concurrent readers after warm-up") {
    auto J = make_dyukarev(2, 1);
    J.warm(4096);
    std::vector<std::thread> ts;
    std::vector<double> sums(4, 0.0);
    for (int t = 0; t < 4; ++t)
        ts.emplace_back([&, t] {
            for (std::size_t n = 0; n < 4096; ++n) sums[t] += J.offdiag_scaled(n).log_norm();
        });
    for (auto& t : ts) t.join();
    for (int t = 1; t < 4; ++t) CHECK(sums[t] == sums[0]);
}
