#pragma once

#include <array>
#include <vector>

#include "floq/periodic_fn.hpp"

namespace floq {

struct PerronResult {
    double lambda = 0.0;
    double residual = 0.0;  // |(lambda+K0) e^{lambda a} / (2 K0 g) - 1|
    int iterations = 0;
};

// Unique real root of (lambda + K0) e^{lambda a} = 2 K0 on (-K0, inf).
// The left side is increasing there, so bracketed bisection is safe;
// three Newton steps polish the bisection result.
PerronResult solve_perron_one_phase(double K0, double a);

// Same equation with the birth rate replaced by its geometric average:
// (lambda + K0) e^{lambda a} = 2 K0 <psi>_g. Requires psi > 0.
PerronResult solve_geometric_one_phase(double K0, double a, const PeriodicFn& psi);

// lambda_P'(T) = -lambda_P(T) / (T + e^{lambda_P(T) T} / (2 K0))
double perron_slope_at(double K0, double T);

// lambda_P'(T) - lambda_F'(T) = lambda_P(T) (<psi^2> - 1) / (T + e^{lambda_P(T) T} / (2 K0)),
// strictly positive for psi not identically 1.
double floquet_slope_gap_at(double K0, double T, const PeriodicFn& psi);

// Commuting 3-phase case: maturation ages summing to the period (= 1) and
// per-phase controls that are shifts of a common psi. The growth rate is the
// positive root of (K1+l)(K2+l)(K3+l) = 2 K1 K2 K3 e^{-l}, with closed-form
// direct/adjoint weight profiles.
struct AnalyticThreePhase {
    std::array<double, 3> K{};
    std::array<double, 3> a{};
    PeriodicFn psi;
    double lambda = 0.0;
    double residual = 0.0;
    int iterations = 0;
    std::array<double, 3> U{};  // direct weights
    std::array<double, 3> V{};  // adjoint weights
    double C = 0.0;             // (K1+lambda) e^{lambda a1}
    std::array<double, 3> Ci{};  // U_i V_i e^{lambda a_i}

    // 1-periodic antiderivative of (psi - 1) with Psi(0) = 0
    double Psi(double t) const;

    std::vector<double> psi_cumulative;  // internal table for Psi
};

AnalyticThreePhase solve_analytic_three_phase(const std::array<double, 3>& K,
                                              const std::array<double, 3>& a,
                                              const PeriodicFn& psi);

// w_i(t) = int_0^inf N_i(t,x) phi_i(t,x) dx, unnormalized:
//   w_1 = C (a1 + Psi(t+a1) - Psi(t))      + C_1
//   w_2 = C (a2 + Psi(t)    - Psi(t-a2))   + C_2
//   w_3 = C (a3 + Psi(t-a2) - Psi(t+a1))   + C_3
// phase is 1-based.
double analytic_weight(const AnalyticThreePhase& sol, int phase, double t);

// sum_i int_0^1 w_i dt = C + C_1 + C_2 + C_3 (the phase sum is constant in t)
double analytic_weight_normalization(const AnalyticThreePhase& sol);

// First-order shift of lambda per unit drug amplitude on the given phase:
// -int_0^1 gamma(t+theta) w_phase(t) dt with weights normalized so
// sum_i int w_i = 1. A death term lowers the growth rate.
double analytic_sensitivity(const AnalyticThreePhase& sol, const PeriodicFn& gamma,
                            double theta, int phase = 2, std::size_t nodes = 1 << 14);

}  // namespace floq
