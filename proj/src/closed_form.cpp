#include "floq/closed_form.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace floq {

namespace {

struct RootResult {
    double x;
    int iterations;
};

// Bisection to width 1e-8 on a monotone-increasing g with g(lo) < 0 < g(hi),
// then a fixed number of Newton steps.
RootResult solve_increasing(const std::function<double(double)>& g,
                            const std::function<double(double)>& gprime,
                            double lo, double hi) {
    int iters = 0;
    while (hi - lo > 1e-8) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0)
            hi = mid;
        else
            lo = mid;
        if (++iters > 200) break;
    }
    double x = 0.5 * (lo + hi);
    for (int n = 0; n < 3; ++n) {
        const double gp = gprime(x);
        if (gp == 0.0) break;
        x -= g(x) / gp;
        ++iters;
    }
    return {x, iters};
}

double grow_upper_bracket(const std::function<double(double)>& g, double hi) {
    for (int n = 0; n < 200 && g(hi) < 0.0; ++n) hi *= 2.0;
    if (g(hi) < 0.0) throw std::runtime_error("root bracket: no sign change found");
    return hi;
}

PerronResult solve_perron_like(double K0, double a, double target) {
    if (!std::isfinite(K0) || !std::isfinite(a) || !(K0 > 0.0) || !(a >= 0.0))
        throw std::invalid_argument("perron solve: need finite K0 > 0 and a >= 0");
    auto g = [&](double l) { return (l + K0) * std::exp(l * a) - 2.0 * K0 * target; };
    auto gp = [&](double l) { return std::exp(l * a) * (1.0 + (l + K0) * a); };
    const double lo = -K0 + 1e-12;
    const double hi = grow_upper_bracket(g, std::max(K0, 1.0));
    const RootResult r = solve_increasing(g, gp, lo, hi);
    PerronResult out;
    out.lambda = r.x;
    out.iterations = r.iterations;
    out.residual = std::abs((r.x + K0) * std::exp(r.x * a) / (2.0 * K0 * target) - 1.0);
    return out;
}

}  // namespace

PerronResult solve_perron_one_phase(double K0, double a) {
    return solve_perron_like(K0, a, 1.0);
}

PerronResult solve_geometric_one_phase(double K0, double a, const PeriodicFn& psi) {
    return solve_perron_like(K0, a, geometric_mean(psi));
}

double perron_slope_at(double K0, double T) {
    const double lp = solve_perron_one_phase(K0, T).lambda;
    return -lp / (T + std::exp(lp * T) / (2.0 * K0));
}

double floquet_slope_gap_at(double K0, double T, const PeriodicFn& psi) {
    const double lp = solve_perron_one_phase(K0, T).lambda;
    return lp * (second_moment(psi) - 1.0) / (T + std::exp(lp * T) / (2.0 * K0));
}

double AnalyticThreePhase::Psi(double t) const {
    const std::size_t n = psi_cumulative.size() - 1;
    double u = t - std::floor(t);
    if (u >= 1.0) u = 0.0;
    const double pos = u * static_cast<double>(n);
    auto j = static_cast<std::size_t>(pos);
    if (j >= n) j = n - 1;
    const double s = pos - static_cast<double>(j);
    return (1.0 - s) * psi_cumulative[j] + s * psi_cumulative[j + 1];
}

AnalyticThreePhase solve_analytic_three_phase(const std::array<double, 3>& K,
                                              const std::array<double, 3>& a,
                                              const PeriodicFn& psi) {
    for (double k : K)
        if (!(k > 0.0)) throw std::invalid_argument("three-phase solve: division rates must be positive");
    const double asum = a[0] + a[1] + a[2];
    if (std::abs(asum - 1.0) > 1e-9)
        throw std::invalid_argument("three-phase solve: maturation ages must sum to the period (= 1)");
    if (std::abs(arithmetic_mean(psi) - 1.0) > 1e-6)
        throw std::invalid_argument("three-phase solve: psi must have unit mean");

    const double K123 = 2.0 * K[0] * K[1] * K[2];
    auto g = [&](double l) {
        return (K[0] + l) * (K[1] + l) * (K[2] + l) - K123 * std::exp(-l * asum);
    };
    auto gp = [&](double l) {
        return (K[1] + l) * (K[2] + l) + (K[0] + l) * (K[2] + l) + (K[0] + l) * (K[1] + l) +
               asum * K123 * std::exp(-l * asum);
    };
    const double hi = grow_upper_bracket(g, 1.0);
    const RootResult r = solve_increasing(g, gp, 0.0, hi);

    AnalyticThreePhase sol{.K = K, .a = a, .psi = psi, .lambda = 0.0, .residual = 0.0,
                           .iterations = 0, .U = {}, .V = {}, .C = 0.0, .Ci = {}, .psi_cumulative = {}};
    const double l = r.x;
    sol.lambda = l;
    sol.iterations = r.iterations;
    sol.residual = std::abs(g(l) / K123);
    sol.U = {1.0, K[0] * std::exp(-l * a[1]) / (K[1] + l), (K[0] + l) / (2.0 * K[2] * std::exp(-l * a[0]))};
    sol.V = {1.0, (K[0] + l) / (K[0] * std::exp(-l * a[0])), 2.0 * K[2] * std::exp(-l * a[2]) / (K[2] + l)};
    sol.C = (K[0] + l) * std::exp(l * a[0]);
    for (int i = 0; i < 3; ++i) sol.Ci[i] = sol.U[i] * sol.V[i] * std::exp(l * a[i]);

    // cumulative midpoint table for Psi(t) = int_0^t (psi - 1)
    const std::size_t n = kQuadratureNodes;
    sol.psi_cumulative.resize(n + 1);
    sol.psi_cumulative[0] = 0.0;
    const double dt = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j)
        sol.psi_cumulative[j + 1] =
            sol.psi_cumulative[j] + dt * (psi((static_cast<double>(j) + 0.5) * dt) - 1.0);
    return sol;
}

double analytic_weight(const AnalyticThreePhase& s, int phase, double t) {
    switch (phase) {
        case 1: return s.C * (s.a[0] + s.Psi(t + s.a[0]) - s.Psi(t)) + s.Ci[0];
        case 2: return s.C * (s.a[1] + s.Psi(t) - s.Psi(t - s.a[1])) + s.Ci[1];
        case 3: return s.C * (s.a[2] + s.Psi(t - s.a[1]) - s.Psi(t + s.a[0])) + s.Ci[2];
        default: throw std::out_of_range("analytic_weight: phase must be 1, 2 or 3");
    }
}

double analytic_weight_normalization(const AnalyticThreePhase& s) {
    return s.C + s.Ci[0] + s.Ci[1] + s.Ci[2];
}

double analytic_sensitivity(const AnalyticThreePhase& sol, const PeriodicFn& gamma,
                            double theta, int phase, std::size_t nodes) {
    const double norm = analytic_weight_normalization(sol);
    const double dt = 1.0 / static_cast<double>(nodes);
    double acc = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) {
        const double t = (static_cast<double>(j) + 0.5) * dt;
        acc += gamma(t + theta) * analytic_weight(sol, phase, t);
    }
    return -acc * dt / norm;
}

}  // namespace floq
