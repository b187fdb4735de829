#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "floq/closed_form.hpp"
#include "test_oracles.hpp"

using namespace floq;

namespace {

double perron_oracle(double K0, double a, double target = 1.0) {
    return oracle::bisect(
        [&](double l) { return (l + K0) * std::exp(l * a) - 2.0 * K0 * target; }, -K0 + 1e-12, 50.0);
}

}  // namespace

TEST_CASE("Perron closed-form roots") {
    // a = 0 reduces to (lambda+K0)/(2K0) = 1
    CHECK(solve_perron_one_phase(2.0, 0.0).lambda == doctest::Approx(2.0).epsilon(1e-12));

    const PerronResult r = solve_perron_one_phase(2.0, 1.0);
    CHECK(r.lambda == doctest::Approx(0.478600339499130).epsilon(1e-10));
    CHECK(r.lambda == doctest::Approx(perron_oracle(2.0, 1.0)).epsilon(1e-10));
    CHECK(r.residual < 1e-12);

    // rate decreases with maturation age but stays positive
    const double l10 = solve_perron_one_phase(2.0, 10.0).lambda;
    CHECK(l10 == doctest::Approx(0.0660648597059486).epsilon(1e-9));
    CHECK(l10 > 0.0);
    CHECK(l10 < r.lambda);

    CHECK_THROWS_AS((void)solve_perron_one_phase(-1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)solve_perron_one_phase(2.0, std::nan("")), std::invalid_argument);
}

TEST_CASE("Perron rate positive with tiny residual on random parameters") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> unit(1e-3, 10.0);
    for (int n = 0; n < 100; ++n) {
        const PerronResult r = solve_perron_one_phase(unit(rng), unit(rng));
        CHECK(r.lambda > 0.0);
        CHECK(r.residual < 1e-10);
    }
}

TEST_CASE("the transcendental map changes sign exactly once on the bracket") {
    const double K0 = 2.0, a = 1.0;
    auto g = [&](double l) { return (l + K0) * std::exp(l * a) - 2.0 * K0; };
    int changes = 0;
    double prev = g(-K0 + 1e-12);
    for (int j = 1; j <= 10000; ++j) {
        const double l = -K0 + 1e-12 + (8.0 + K0) * j / 10000.0;
        const double cur = g(l);
        if (prev < 0.0 && cur >= 0.0) ++changes;
        if (prev > 0.0 && cur <= 0.0) ++changes;
        prev = cur;
    }
    CHECK(changes == 1);
}

TEST_CASE("geometric-average rate") {
    // identity control: geometric equals Perron
    const double lp = solve_perron_one_phase(2.0, 1.0).lambda;
    CHECK(solve_geometric_one_phase(2.0, 1.0, PeriodicFn::constant(1.0)).lambda ==
          doctest::Approx(lp).epsilon(1e-13));

    const double lg_sin = solve_geometric_one_phase(2.0, 1.0, PeriodicFn::sinusoidal()).lambda;
    CHECK(lg_sin == doctest::Approx(0.245848549966183).epsilon(1e-8));

    const double lg_sq = solve_geometric_one_phase(2.0, 1.0, PeriodicFn::square()).lambda;
    CHECK(lg_sq == doctest::Approx(-0.0907708280145093).epsilon(1e-8));
    CHECK(lg_sq < lp);

    // arithmetico-geometric inequality lambda_P >= lambda_g
    std::mt19937 rng(5);
    for (int n = 0; n < 20; ++n) {
        const PeriodicFn psi = oracle::random_positive_control(rng);
        CHECK(solve_perron_one_phase(2.0, 1.0).lambda >=
              solve_geometric_one_phase(2.0, 1.0, psi).lambda - 1e-12);
    }
    for (const char* kind : {"sin", "square", "peak"})
        CHECK(lp >= solve_geometric_one_phase(2.0, 1.0, make_reference_psi(kind)).lambda);
}

TEST_CASE("Perron slope at a = T") {
    const double s = perron_slope_at(2.0, 1.0);
    CHECK(s == doctest::Approx(-0.341016169778718).epsilon(1e-9));
    CHECK(s < 0.0);
    // finite-difference oracle on the closed-form root
    const double h = 1e-4;
    const double fd =
        (solve_perron_one_phase(2.0, 1.0 + h).lambda - solve_perron_one_phase(2.0, 1.0 - h).lambda) /
        (2.0 * h);
    CHECK(std::abs(s - fd) < 1e-6);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unit(0.1, 8.0);
    for (int n = 0; n < 20; ++n) CHECK(perron_slope_at(unit(rng), unit(rng)) < 0.0);
}

TEST_CASE("slope gap at a = T") {
    CHECK(floquet_slope_gap_at(2.0, 1.0, PeriodicFn::constant(1.0)) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(floquet_slope_gap_at(2.0, 1.0, PeriodicFn::sinusoidal()) ==
          doctest::Approx(0.138111548760381).epsilon(1e-8));
    const double g_pk = floquet_slope_gap_at(2.0, 1.0, PeriodicFn::peak());
    const double g_sq = floquet_slope_gap_at(2.0, 1.0, PeriodicFn::square());
    const double g_sin = floquet_slope_gap_at(2.0, 1.0, PeriodicFn::sinusoidal());
    CHECK(g_pk > g_sq);
    CHECK(g_sq > g_sin);
    CHECK(g_sin > 0.0);
}

// ---------------------------------------------------------------------------

namespace {

AnalyticThreePhase reference_solution() {
    return solve_analytic_three_phase({10.0, 10.0, 10.0}, {10.0 / 24, 12.0 / 24, 2.0 / 24},
                                      PeriodicFn::sinusoidal());
}

}  // namespace

TEST_CASE("commuting 3-phase eigenvalue") {
    const AnalyticThreePhase sol = reference_solution();
    CHECK(sol.lambda == doctest::Approx(0.536395853722930).epsilon(1e-10));
    const double ref = oracle::bisect(
        [](double l) { return (10.0 + l) * (10.0 + l) * (10.0 + l) - 2000.0 * std::exp(-l); }, 0.0,
        10.0);
    CHECK(sol.lambda == doctest::Approx(ref).epsilon(1e-10));
    CHECK(sol.residual < 1e-12);
    for (int i = 0; i < 3; ++i) {
        CHECK(sol.U[i] > 0.0);
        CHECK(sol.V[i] > 0.0);
        CHECK(sol.Ci[i] > 0.0);
    }

    // the eigenvalue equation does not involve psi
    const AnalyticThreePhase flat = solve_analytic_three_phase(
        {10.0, 10.0, 10.0}, {10.0 / 24, 12.0 / 24, 2.0 / 24}, PeriodicFn::constant(1.0));
    CHECK(flat.lambda == sol.lambda);

    // monotone in the common rate
    const AnalyticThreePhase slow = solve_analytic_three_phase(
        {5.0, 5.0, 5.0}, {10.0 / 24, 12.0 / 24, 2.0 / 24}, PeriodicFn::sinusoidal());
    CHECK(slow.lambda == doctest::Approx(0.440079753739470).epsilon(1e-9));
    CHECK(sol.lambda > slow.lambda);

    CHECK_THROWS_AS((void)solve_analytic_three_phase({10.0, 10.0, 10.0}, {0.4, 0.4, 0.4},
                                                     PeriodicFn::sinusoidal()),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)solve_analytic_three_phase({10.0, -1.0, 10.0},
                                                     {10.0 / 24, 12.0 / 24, 2.0 / 24},
                                                     PeriodicFn::sinusoidal()),
                    std::invalid_argument);
}

TEST_CASE("weights: constant control gives constant weights") {
    const AnalyticThreePhase flat = solve_analytic_three_phase(
        {10.0, 10.0, 10.0}, {10.0 / 24, 12.0 / 24, 2.0 / 24}, PeriodicFn::constant(1.0));
    for (int p = 1; p <= 3; ++p) {
        const double w0 = analytic_weight(flat, p, 0.0);
        CHECK(w0 == doctest::Approx(flat.C * flat.a[p - 1] + flat.Ci[p - 1]).epsilon(1e-12));
        for (double t : {0.2, 0.5, 0.77}) CHECK(analytic_weight(flat, p, t) == doctest::Approx(w0).epsilon(1e-9));
    }
    CHECK_THROWS_AS((void)analytic_weight(flat, 4, 0.0), std::out_of_range);
}

TEST_CASE("weights agree with direct quadrature of the closed-form eigenfunctions") {
    // N_2(t,x) phi_2(t,x) integrated over age by brute quadrature
    const AnalyticThreePhase s = reference_solution();
    const double a1 = s.a[0], a2 = s.a[1];
    const double l = s.lambda;
    auto psi = [&](double t) { return s.psi(t); };
    auto Psi = [&](double t) { return s.Psi(t); };
    auto N2 = [&](double t, double x) {
        double surv = 0.0;
        if (x > a2) surv = s.K[1] * ((x - a2) + Psi(t - a2) - Psi(t - x));
        return s.K[0] * s.U[0] * psi(t - x) * std::exp(l * Psi(t - x) - l * x - surv);
    };
    auto phi2 = [&](double t, double x) {
        const double xm = std::min(x, a2);
        return s.V[1] * std::exp(-l * Psi(t - xm) + l * xm);
    };
    (void)a1;
    for (double t : {0.0, 0.15, 0.375, 0.6, 0.875}) {
        const double wq = oracle::quad_midpoint([&](double x) { return N2(t, x) * phi2(t, x); },
                                                0.0, 4.0, 1 << 16);
        CHECK(analytic_weight(s, 2, t) == doctest::Approx(wq).epsilon(2e-5));
    }
}

TEST_CASE("weight phase sum is constant in time and shift invariant") {
    const AnalyticThreePhase s = reference_solution();
    const double total = analytic_weight_normalization(s);
    for (double t : {0.0, 0.1, 0.33, 0.5, 0.9}) {
        double sum = 0.0;
        for (int p = 1; p <= 3; ++p) sum += analytic_weight(s, p, t);
        CHECK(sum == doctest::Approx(total).epsilon(1e-10));
    }
    const AnalyticThreePhase shifted = solve_analytic_three_phase(
        {10.0, 10.0, 10.0}, {10.0 / 24, 12.0 / 24, 2.0 / 24}, PeriodicFn::sinusoidal().shifted(0.3));
    CHECK(analytic_weight_normalization(shifted) == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("analytic sensitivity") {
    const AnalyticThreePhase s = reference_solution();
    const double norm = analytic_weight_normalization(s);

    // constant drug: minus the dose times the integrated weight, phase-independent
    const double w2_int = (s.C * s.a[1] + s.Ci[1]) / norm;
    for (double th : {0.0, 0.37}) {
        CHECK(analytic_sensitivity(s, PeriodicFn::constant(0.5), th) ==
              doctest::Approx(-0.5 * w2_int).epsilon(1e-9));
    }

    // the reference drug profile peaks the growth rate at theta = 1/4
    const PeriodicFn gamma = PeriodicFn::cos6(1);
    int best = 0;
    std::vector<double> sens(256);
    for (int j = 0; j < 256; ++j) {
        sens[j] = analytic_sensitivity(s, gamma, j / 256.0);
        if (sens[j] > sens[best]) best = j;
    }
    CHECK(best == 64);  // theta = 1/4 on the 256-point grid

    // 1-periodic and continuous in theta
    CHECK(analytic_sensitivity(s, gamma, 0.125) ==
          doctest::Approx(analytic_sensitivity(s, gamma, 1.125)).epsilon(1e-12));
    double max_jump = 0.0;
    for (int j = 0; j < 256; ++j)
        max_jump = std::max(max_jump, std::abs(sens[(j + 1) % 256] - sens[j]));
    CHECK(max_jump < 0.05);

    // difference across half a period equals twice the sin-coefficient,
    // cross-checked by a quadrature oracle of the frequency-1 overlap
    auto overlap = [&](double th) {
        return oracle::quad_midpoint(
            [&](double t) { return gamma(t + th) * std::sin(2.0 * M_PI * t); }, 0.0, 1.0, 1 << 16);
    };
    const double c2_hat = 2.0 * s.C * 0.9 / (2.0 * M_PI) / norm;  // sin coefficient of w2/norm
    const double expected = -c2_hat * (overlap(0.25) - overlap(0.75));
    CHECK(analytic_sensitivity(s, gamma, 0.25) - analytic_sensitivity(s, gamma, 0.75) ==
          doctest::Approx(expected).epsilon(1e-7));
    CHECK(expected > 0.0);

    // the half-period profile has no frequency-1 content: flat response
    const PeriodicFn gamma2 = PeriodicFn::cos6(2);
    const double d2 = analytic_sensitivity(s, gamma2, 0.25) - analytic_sensitivity(s, gamma2, 0.75);
    const double expected2 =
        -c2_hat * (oracle::quad_midpoint([&](double t) { return gamma2(t + 0.25) * std::sin(2.0 * M_PI * t); },
                                         0.0, 1.0, 1 << 16) -
                   oracle::quad_midpoint([&](double t) { return gamma2(t + 0.75) * std::sin(2.0 * M_PI * t); },
                                         0.0, 1.0, 1 << 16));
    CHECK(d2 == doctest::Approx(expected2).epsilon(1e-9));
    CHECK(std::abs(d2) < 1e-9);
}
