#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "floq/periodic_fn.hpp"
#include "test_oracles.hpp"

using namespace floq;

TEST_CASE("reference controls match their tabulated values") {
    const PeriodicFn sin = make_reference_psi("sin");
    CHECK(sin(0.0) == doctest::Approx(1.9).epsilon(1e-14));
    CHECK(sin(0.5) == doctest::Approx(0.1).epsilon(1e-12));

    const PeriodicFn one = make_reference_psi("constant");
    CHECK(arithmetic_mean(one) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(second_moment(one) == doctest::Approx(1.0).epsilon(1e-15));

    const PeriodicFn pk = make_reference_psi("peak", {3.0, 0.3});
    CHECK(std::abs(arithmetic_mean(pk) - 1.0) < 1e-10);
    CHECK(second_moment(pk) == doctest::Approx(1.99).epsilon(1e-7));

    const PeriodicFn sq = make_reference_psi("square");
    CHECK(second_moment(sq) == doctest::Approx(1.81).epsilon(1e-10));
    CHECK(second_moment(sin) == doctest::Approx(1.405).epsilon(1e-10));
}

TEST_CASE("arithmetic means") {
    CHECK(std::abs(arithmetic_mean(make_reference_psi("sin")) - 1.0) < 1e-12);
    // quadrature oracle at 2^20 nodes for the drug profile
    const PeriodicFn g = PeriodicFn::cos6(2);
    const double ref = oracle::quad_midpoint([&](double t) { return g(t); }, 0.0, 1.0);
    CHECK(arithmetic_mean(g) == doctest::Approx(ref).epsilon(1e-10));
    CHECK(arithmetic_mean(g) == doctest::Approx(5.0 / 16.0).epsilon(1e-10));
    CHECK(arithmetic_mean(PeriodicFn::cos6(1)) == doctest::Approx(5.0 / 16.0).epsilon(1e-10));
}

TEST_CASE("geometric means") {
    CHECK(geometric_mean(PeriodicFn::constant(3.25)) == doctest::Approx(3.25).epsilon(1e-12));
    // closed form (1 + sqrt(1 - b^2))/2 for 1 + b cos
    CHECK(geometric_mean(PeriodicFn::sinusoidal(0.9)) ==
          doctest::Approx((1.0 + std::sqrt(0.19)) / 2.0).epsilon(1e-10));
    CHECK(geometric_mean(PeriodicFn::square(1.9, 0.1)) ==
          doctest::Approx(std::sqrt(0.19)).epsilon(1e-12));
    CHECK_THROWS_AS((void)geometric_mean(PeriodicFn::samples({1.0, 0.0, 2.0})), std::domain_error);
}

TEST_CASE("construction errors") {
    CHECK_THROWS_AS((void)make_reference_psi("wavelet"), std::invalid_argument);
    CHECK_THROWS_AS((void)PeriodicFn::sinusoidal(1.2), std::invalid_argument);
    CHECK_THROWS_AS((void)PeriodicFn::square(-0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)PeriodicFn::peak(4.0, 0.3), std::invalid_argument);  // baseline < 0
    CHECK_THROWS_AS((void)PeriodicFn::samples({}), std::invalid_argument);
    // controls used as psi must average to 1
    CHECK_THROWS_AS((void)make_reference_psi("square", {1.8, 0.1}), std::invalid_argument);
    CHECK_THROWS_AS((void)make_reference_psi("constant", {2.0}), std::invalid_argument);
    // but a general control need not
    CHECK_NOTHROW((void)make_control("constant", {2.0}));
    CHECK_NOTHROW((void)make_control("samples", {1.0, 2.0}));
    CHECK_NOTHROW((void)make_reference_psi("samples", {0.5, 1.5}));
}

TEST_CASE("every reference psi has unit mean and excess second moment") {
    for (const char* kind : {"sin", "square", "peak", "constant"}) {
        const PeriodicFn psi = make_reference_psi(kind);
        CHECK(std::abs(arithmetic_mean(psi) - 1.0) < 1e-9);
        CHECK(second_moment(psi) - 1.0 >= -1e-12);
    }
    // equality only for the constant control
    CHECK(second_moment(make_reference_psi("constant")) - 1.0 < 1e-12);
    for (const char* kind : {"sin", "square", "peak"})
        CHECK(second_moment(make_reference_psi(kind)) - 1.0 > 0.4);
}

TEST_CASE("arithmetic-geometric inequality on random positive controls") {
    std::mt19937 rng(2024);
    for (int n = 0; n < 100; ++n) {
        const PeriodicFn f = oracle::random_positive_control(rng);
        CHECK(geometric_mean(f) <= arithmetic_mean(f) + 1e-12);
    }
}

TEST_CASE("closed-form kinds are exactly periodic") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<long> lattice(0, (1L << 20) - 1);
    const PeriodicFn fns[] = {PeriodicFn::sinusoidal(), PeriodicFn::square(), PeriodicFn::peak(),
                              PeriodicFn::cos6(1), PeriodicFn::cos6(2)};
    for (const PeriodicFn& f : fns) {
        for (int n = 0; n < 1000; ++n) {
            const double t = static_cast<double>(lattice(rng)) / static_cast<double>(1L << 20) * 8.0;
            CHECK(std::abs(f(t + f.period()) - f(t)) < 1e-12);
        }
    }
}

TEST_CASE("shifted evaluation") {
    const PeriodicFn f = PeriodicFn::sinusoidal();
    const PeriodicFn g = f.shifted(0.25);
    CHECK(g(0.25) == doctest::Approx(f(0.0)).epsilon(1e-15));
    CHECK(g.period() == f.period());
}

TEST_CASE("sampled controls evaluate piecewise-constant") {
    const PeriodicFn f = PeriodicFn::samples({2.0, 4.0, 6.0, 8.0});
    CHECK(f(0.1) == 2.0);
    CHECK(f(0.26) == 4.0);
    CHECK(f(0.99) == 8.0);
    CHECK(f(1.1) == 2.0);
    CHECK(arithmetic_mean(f) == doctest::Approx(5.0).epsilon(1e-14));
}
