#include "floq/chrono_sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace floq {

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
    unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs) : std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    workers = std::min<unsigned>(workers, n == 0 ? 1 : static_cast<unsigned>(n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

ChronoSweep chrono_sweep(const MultiPhaseModel& base, const PeriodicFn& gamma, int target_phase,
                         const std::vector<double>& epsilons, int n_theta,
                         const ChronoOptions& opts) {
    if (target_phase < 1 || target_phase > static_cast<int>(base.phases.size()))
        throw std::invalid_argument("chrono sweep: target phase out of range");
    if (n_theta < 4) throw std::invalid_argument("chrono sweep: need at least 4 theta points");

    const MultiPhaseModel clean = base.without_therapy();
    const GridSpec grid = GridSpec::for_model(clean, opts.n_time, opts.c_tail);

    ChronoSweep sweep;
    sweep.epsilons = epsilons;
    sweep.thetas.resize(n_theta);
    for (int j = 0; j < n_theta; ++j) sweep.thetas[j] = static_cast<double>(j) / n_theta;

    // unperturbed solve with sequence for the adjoint weights
    PowerOptions seq_opts = opts.power;
    seq_opts.store_sequence = true;
    const PropagatorFamily family0(clean, grid);
    const FloquetSolution direct = floquet_eigen(family0, seq_opts);
    if (!direct.converged) throw std::runtime_error("chrono sweep: unperturbed solve did not converge");
    const AdjointSolution adjoint = adjoint_eigen(family0, direct, opts.power);
    sweep.lambda0 = direct.lambda;

    const auto& wj = adjoint.weights[target_phase - 1];
    sweep.weight_overlap.resize(n_theta);
    for (int j = 0; j < n_theta; ++j) {
        double s = 0.0;
        for (int k = 0; k < grid.n_time; ++k)
            s += gamma(k * grid.dt + sweep.thetas[j]) * wj[k];
        sweep.weight_overlap[j] = s * grid.dt;
    }

    sweep.lambda.assign(epsilons.size(), std::vector<double>(n_theta, 0.0));
    sweep.solve_ok.assign(epsilons.size() * n_theta, 0);
    parallel_for(epsilons.size() * static_cast<std::size_t>(n_theta), opts.jobs, [&](std::size_t idx) {
        const std::size_t ie = idx / n_theta;
        const std::size_t it = idx % n_theta;
        const MultiPhaseModel dosed = clean.with_therapy(
            Therapy{target_phase, epsilons[ie], sweep.thetas[it], gamma});
        const FloquetSolution sol = floquet_eigen(PropagatorFamily(dosed, grid), opts.power);
        sweep.lambda[ie][it] = sol.lambda;
        sweep.solve_ok[idx] = sol.converged ? 1 : 0;
    });
    return sweep;
}

double first_order_prediction(const FloquetSolution& direct, const AdjointSolution& adjoint,
                              const PeriodicFn& gamma, double epsilon, double theta,
                              int target_phase) {
    if (target_phase < 1 || target_phase > static_cast<int>(adjoint.weights.size()))
        throw std::invalid_argument("first_order_prediction: target phase out of range");
    const auto& wj = adjoint.weights[target_phase - 1];
    double s = 0.0;
    for (std::size_t k = 0; k < wj.size(); ++k)
        s += gamma(static_cast<double>(k) * adjoint.dt + theta) * wj[k];
    return direct.lambda - epsilon * s * adjoint.dt;
}

OptimumResult locate_optimum(const ChronoSweep& sweep, double epsilon, double flat_tol) {
    std::size_t ie = sweep.epsilons.size();
    for (std::size_t j = 0; j < sweep.epsilons.size(); ++j)
        if (std::abs(sweep.epsilons[j] - epsilon) < 1e-15) ie = j;
    if (ie == sweep.epsilons.size())
        throw std::invalid_argument("locate_optimum: epsilon not present in the sweep");
    const auto& row = sweep.lambda[ie];
    const int n = static_cast<int>(row.size());
    int best = 0;
    for (int j = 1; j < n; ++j)
        if (row[j] > row[best]) best = j;

    // plateau detection on the circle
    int span = 0;
    for (int j = 0; j < n; ++j)
        if (row[j] >= row[best] - flat_tol) ++span;
    OptimumResult res;
    if (span > 3) {
        res.degenerate = true;
        // contiguous arc around the max
        int lo = best, hi = best;
        while (row[((lo - 1) % n + n) % n] >= row[best] - flat_tol && hi - lo < n) --lo;
        while (row[((hi + 1) % n + n) % n] >= row[best] - flat_tol && hi - lo < n) ++hi;
        const double cell = sweep.thetas[1] - sweep.thetas[0];
        res.lo = ((lo % n + n) % n) * cell;
        res.hi = ((hi % n + n) % n) * cell;
        res.theta = sweep.thetas[best];
        return res;
    }

    const double l = row[(best - 1 + n) % n];
    const double m = row[best];
    const double r = row[(best + 1) % n];
    const double denom = l - 2.0 * m + r;
    double offset = 0.0;
    if (denom < 0.0) offset = 0.5 * (l - r) / denom;
    const double cell = sweep.thetas[1] - sweep.thetas[0];
    double theta = sweep.thetas[best] + offset * cell;
    theta -= std::floor(theta);
    res.theta = theta;
    return res;
}

}  // namespace floq
