#pragma once

#include <functional>
#include <vector>

#include "floq/spectral.hpp"
#include "floq/upwind.hpp"

namespace floq {

// Tabulated lambda(eps, theta) surface plus the ingredients of the
// first-order prediction lambda0 - eps * int gamma(t+theta) w_j(t) dt.
struct ChronoSweep {
    std::vector<double> epsilons;
    std::vector<double> thetas;
    double lambda0 = 0.0;
    std::vector<std::vector<double>> lambda;  // [eps][theta]
    std::vector<char> solve_ok;               // per (eps, theta), row-major
    std::vector<double> weight_overlap;       // s(theta) = int gamma(t+theta) w_j dt

    double first_order(std::size_t ie, std::size_t it) const {
        return lambda0 - epsilons[ie] * weight_overlap[it];
    }
};

struct ChronoOptions {
    int n_time = 480;
    double c_tail = 12.0;
    PowerOptions power{};
    int jobs = 0;  // 0 = hardware concurrency
};

// Full spectral solve per (eps, theta) with death term eps*gamma(t+theta) on
// the target phase (1-based), plus one direct+adjoint solve at eps = 0 for
// the weights.
ChronoSweep chrono_sweep(const MultiPhaseModel& base, const PeriodicFn& gamma, int target_phase,
                         const std::vector<double>& epsilons, int n_theta,
                         const ChronoOptions& opts = {});

// lambda - eps * sum_k gamma(t_k + theta) w_j(k) dt from solved weights
double first_order_prediction(const FloquetSolution& direct, const AdjointSolution& adjoint,
                              const PeriodicFn& gamma, double epsilon, double theta,
                              int target_phase);

struct OptimumResult {
    double theta = 0.0;
    bool degenerate = false;
    double lo = 0.0;  // plateau interval when degenerate
    double hi = 0.0;
};

// Argmax of lambda(eps, .) on the theta grid with parabolic refinement
// between periodic neighbors; a plateau wider than 3 grid cells is reported
// as degenerate with its interval.
OptimumResult locate_optimum(const ChronoSweep& sweep, double epsilon, double flat_tol = 1e-10);

// bounded worker pool over [0, n)
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace floq
