#pragma once

#include <vector>

#include "floq/periodic_fn.hpp"

namespace floq {

// Trajectory of P(t) = int_a^inf n(t,x) dx under
//   P'(t) = -K0 psi(t) P(t) + 2 K0 psi(t-a) P(t-a)
// integrated without the growth-rate rescaling; the Floquet exponent is
// read off the per-period log-ratios.
struct DdeTrajectory {
    double step = 0.0;
    double delay = 0.0;
    double period = 1.0;
    long start_index = 0;      // node index of t = 0
    std::vector<double> p;     // nodes from t = -a to t_end
    std::vector<double> dp;    // derivatives at nodes (for dense history)
    std::vector<double> growth_estimates;  // log(P((m+1)T)/P(mT))/T

    double time_at(std::size_t node) const {
        return (static_cast<double>(node) - static_cast<double>(start_index)) * step;
    }
    // cubic Hermite between nodes; exact on nodes
    double p_at(double t) const;
};

// Classical RK4 by the method of steps; delayed values come from the stored
// dense history (exact when a/h is an integer at stage endpoints, cubic
// Hermite at midpoints). Requires T/h integer and t_end >= 50 T; throws on a
// non-positive P (reduce h).
DdeTrajectory integrate_dde(double K0, double a, const PeriodicFn& psi, double t_end, double h);

// fills growth_estimates from p; split out so synthetic trajectories can be fed
void compute_period_ratios(DdeTrajectory& traj);

struct GrowthEstimate {
    double value = 0.0;
    double spread = 0.0;  // max - min over the averaged periods
};

// Mean of the per-period log-ratios over the last 10 periods; requires at
// least burn_in + 10 full periods.
GrowthEstimate estimate_growth(const DdeTrajectory& traj, int burn_in_periods);

}  // namespace floq
