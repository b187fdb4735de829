#include "floq/dde.hpp"

#include <cmath>
#include <stdexcept>

namespace floq {

double DdeTrajectory::p_at(double t) const {
    const double pos = t / step + static_cast<double>(start_index);
    const auto last = static_cast<double>(p.size() - 1);
    if (pos <= 0.0) return p.front();
    if (pos >= last) return p.back();
    auto j = static_cast<std::size_t>(pos);
    const double s = pos - static_cast<double>(j);
    if (s < 1e-12) return p[j];
    if (s > 1.0 - 1e-12) return p[j + 1];
    const double p0 = p[j], p1 = p[j + 1];
    // within the constant initial history the one-sided derivative at t = 0
    // must not leak backward
    const double m0 = dp[j] * step;
    const double m1 = (static_cast<long>(j) + 1 <= start_index ? 0.0 : dp[j + 1]) * step;
    const double s2 = s * s, s3 = s2 * s;
    return (2.0 * s3 - 3.0 * s2 + 1.0) * p0 + (s3 - 2.0 * s2 + s) * m0 +
           (-2.0 * s3 + 3.0 * s2) * p1 + (s3 - s2) * m1;
}

DdeTrajectory integrate_dde(double K0, double a, const PeriodicFn& psi, double t_end, double h) {
    if (!(K0 > 0.0) || !(a >= 0.0) || !(h > 0.0))
        throw std::invalid_argument("dde: need K0 > 0, a >= 0, h > 0");
    const double T = psi.period();
    const double steps_per_period = T / h;
    if (std::abs(steps_per_period - std::round(steps_per_period)) > 1e-12 * steps_per_period)
        throw std::invalid_argument("dde: step must divide the control period");
    if (t_end < 50.0 * T)
        throw std::invalid_argument("dde: integrate at least 50 periods for a trustworthy exponent");

    DdeTrajectory traj;
    traj.step = h;
    traj.delay = a;
    traj.period = T;
    const long nh = static_cast<long>(std::ceil(a / h - 1e-12));
    const long n = static_cast<long>(std::round(t_end / h));
    traj.start_index = nh;
    traj.p.assign(nh + n + 1, 1.0);  // P = 1 on [-a, 0]
    traj.dp.assign(nh + n + 1, 0.0);

    auto rhs = [&](double t, double pt, double pdel) {
        return -K0 * psi(t) * pt + 2.0 * K0 * psi(t - a) * pdel;
    };
    traj.dp[nh] = rhs(0.0, traj.p[nh], traj.p_at(-a));

    for (long j = nh; j < nh + n; ++j) {
        const double t = (j - nh) * h;
        const double y = traj.p[j];
        const double pd0 = traj.p_at(t - a);
        const double pd1 = traj.p_at(t + 0.5 * h - a);
        const double pd2 = traj.p_at(t + h - a);
        const double k1 = rhs(t, y, pd0);
        const double k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1, pd1);
        const double k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2, pd1);
        const double k4 = rhs(t + h, y + h * k3, pd2);
        const double ynext = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!(ynext > 0.0) || !std::isfinite(ynext))
            throw std::runtime_error("dde: P left the positive cone, reduce the step");
        traj.p[j + 1] = ynext;
        traj.dp[j + 1] = rhs(t + h, ynext, pd2);
    }
    compute_period_ratios(traj);
    return traj;
}

void compute_period_ratios(DdeTrajectory& traj) {
    const long per = static_cast<long>(std::round(traj.period / traj.step));
    const long n = static_cast<long>(traj.p.size()) - 1 - traj.start_index;
    const long periods = n / per;
    traj.growth_estimates.clear();
    traj.growth_estimates.reserve(periods);
    for (long m = 0; m < periods; ++m) {
        const double p0 = traj.p[traj.start_index + m * per];
        const double p1 = traj.p[traj.start_index + (m + 1) * per];
        traj.growth_estimates.push_back(std::log(p1 / p0) / traj.period);
    }
}

GrowthEstimate estimate_growth(const DdeTrajectory& traj, int burn_in_periods) {
    constexpr int kAveraged = 10;
    const auto have = static_cast<long>(traj.growth_estimates.size());
    if (have < burn_in_periods + kAveraged)
        throw std::invalid_argument("estimate_growth: trajectory too short for burn-in plus 10 periods");
    GrowthEstimate est;
    double lo = traj.growth_estimates[have - kAveraged];
    double hi = lo;
    double acc = 0.0;
    for (long m = have - kAveraged; m < have; ++m) {
        const double g = traj.growth_estimates[m];
        acc += g;
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    est.value = acc / kAveraged;
    est.spread = hi - lo;
    return est;
}

}  // namespace floq
