#include "floq/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace floq {

namespace {

struct PowerState {
    StateVector v;
    double rho = 0.0;
    long iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

// Power iteration with l1 normalization; rho is the growth ratio averaged
// over the last three iterations.
PowerState power_iterate(const PropagatorFamily& family, const PowerOptions& opts, bool adjoint) {
    const std::size_t dim = family.dim();
    PowerState st;
    st.v = StateVector(family.phases(), family.cells(), 1.0 / static_cast<double>(dim));
    StateVector next(family.phases(), family.cells());
    StateVector scratch(family.phases(), family.cells());
    double ratios[3] = {0.0, 0.0, 0.0};
    int n_ratios = 0;
    for (long it = 1; it <= opts.max_iter; ++it) {
        if (adjoint)
            family.monodromy_adjoint_into(st.v, next, scratch);
        else
            family.monodromy_into(st.v, next, scratch);
        const double r = next.sum();
        if (!std::isfinite(r) || !(r > 0.0))
            throw std::runtime_error("power iteration: monodromy produced a non-positive or non-finite ratio");
        next.scale(1.0 / r);
        ratios[n_ratios % 3] = r;
        ++n_ratios;
        st.iterations = it;
        st.residual = l1_distance(next, st.v);
        std::swap(st.v.data, next.data);
        if (st.residual < opts.tol) {
            st.converged = true;
            break;
        }
    }
    const int navg = std::min(n_ratios, 3);
    double acc = 0.0;
    for (int j = 0; j < navg; ++j) acc += ratios[j];
    st.rho = acc / navg;
    return st;
}

}  // namespace

FloquetSolution floquet_eigen(const PropagatorFamily& family, const PowerOptions& opts) {
    PowerState st = power_iterate(family, opts, /*adjoint=*/false);
    FloquetSolution sol;
    sol.rho = st.rho;
    sol.lambda = std::log(st.rho) / family.grid().period;
    sol.iterations = st.iterations;
    sol.residual = st.residual;
    sol.converged = st.converged;
    sol.n0 = std::move(st.v);
    sol.n0.scale(1.0 / sol.n0.sum());
    if (opts.store_sequence) {
        const int NT = family.grid().n_time;
        const double decay = std::exp(-sol.lambda * family.grid().dt);
        sol.sequence.resize(NT + 1);
        sol.sequence[0] = sol.n0;
        for (int k = 0; k < NT; ++k) {
            sol.sequence[k + 1] = StateVector(family.phases(), family.cells());
            family.apply_step(k, sol.sequence[k], sol.sequence[k + 1]);
            sol.sequence[k + 1].scale(decay);
        }
        sol.sequence_residual = l1_distance(sol.sequence[NT], sol.sequence[0]);
    }
    return sol;
}

AdjointSolution adjoint_eigen(const PropagatorFamily& family, const FloquetSolution& direct,
                              const PowerOptions& opts) {
    if (!direct.converged)
        throw std::invalid_argument("adjoint_eigen: direct solution did not converge");
    if (direct.sequence.empty())
        throw std::invalid_argument("adjoint_eigen: direct solution must carry its eigenfunction sequence");

    PowerState st = power_iterate(family, opts, /*adjoint=*/true);
    AdjointSolution adj;
    adj.rho = st.rho;
    adj.iterations = st.iterations;
    adj.converged = st.converged;
    adj.dt = family.grid().dt;
    if (std::abs(st.rho - direct.rho) > 10.0 * opts.tol * std::max(1.0, direct.rho))
        throw std::runtime_error("adjoint_eigen: adjoint eigenvalue disagrees with the direct one; discretization inconsistent");

    // phi^k = e^{-lambda dt} M_k^T phi^{k+1}, seeded periodically at k = N_T
    const int NT = family.grid().n_time;
    const double decay = std::exp(-direct.lambda * family.grid().dt);
    adj.phi.resize(NT + 1);
    adj.phi[NT] = std::move(st.v);
    for (int k = NT - 1; k >= 0; --k) {
        adj.phi[k] = StateVector(family.phases(), family.cells());
        family.apply_step_adjoint(k, adj.phi[k + 1], adj.phi[k]);
        adj.phi[k].scale(decay);
    }

    const double dx = family.grid().dt;
    const int P = family.phases();
    const int cells = family.cells();
    adj.weights.assign(P, std::vector<double>(NT));
    double total = 0.0;
    for (int k = 0; k < NT; ++k) {
        for (int p = 0; p < P; ++p) {
            double s = 0.0;
            const double* n = direct.sequence[k].data.data() + static_cast<std::size_t>(p) * cells;
            const double* f = adj.phi[k].data.data() + static_cast<std::size_t>(p) * cells;
            for (int i = 0; i < cells; ++i) s += n[i] * f[i];
            adj.weights[p][k] = s * dx;
            total += s * dx;
        }
    }
    // joint normalization sum_j int N_j phi_j dx dt = 1
    const double z = total * family.grid().dt;
    for (auto& row : adj.weights)
        for (double& w : row) w /= z;
    for (auto& phik : adj.phi) phik.scale(1.0 / z);
    return adj;
}

std::pair<FloquetSolution, FloquetSolution> gauge_shift(const OnePhaseModel& model,
                                                        const PeriodicFn& gamma, int n_time,
                                                        const PowerOptions& opts, double c_tail) {
    MultiPhaseModel base = model.as_multi();
    const GridSpec grid = GridSpec::for_model(base, n_time, c_tail);
    FloquetSolution plain = floquet_eigen(PropagatorFamily(base, grid), opts);
    MultiPhaseModel dosed = base.with_therapy(Therapy{1, 1.0, 0.0, gamma});
    FloquetSolution shifted = floquet_eigen(PropagatorFamily(dosed, grid), opts);
    return {std::move(plain), std::move(shifted)};
}

}  // namespace floq
