#pragma once

#include <utility>
#include <vector>

#include "floq/upwind.hpp"

namespace floq {

struct PowerOptions {
    double tol = 1e-12;        // l1 distance between successive normalized iterates
    long max_iter = 100000;    // monodromy applications
    bool store_sequence = false;
};

// Discrete Floquet solution: lambda = log(rho)/T where rho is the spectral
// radius of the monodromy operator; the periodic eigenfunction follows from
// N^{k+1} = e^{-lambda dt} M_k N^k.
struct FloquetSolution {
    double lambda = 0.0;
    double rho = 0.0;
    long iterations = 0;
    double residual = 0.0;  // final iterate distance
    bool converged = false;
    StateVector n0;         // eigenvector of the monodromy, sum-normalized to 1
    std::vector<StateVector> sequence;  // k = 0..N_T when requested
    double sequence_residual = 0.0;     // l1(N^{N_T} - N^0)
};

FloquetSolution floquet_eigen(const PropagatorFamily& family, const PowerOptions& opts = {});

// Adjoint eigenfunction phi and the phase weights w_j(k) = dx * sum_i N phi,
// jointly normalized so sum_j sum_k w_j(k) dt = 1.
struct AdjointSolution {
    double rho = 0.0;
    long iterations = 0;
    bool converged = false;
    double dt = 0.0;
    std::vector<StateVector> phi;              // k = 0..N_T
    std::vector<std::vector<double>> weights;  // [phase][k], k = 0..N_T-1
};

// Requires a converged direct solution with its sequence stored. Throws if
// the adjoint eigenvalue disagrees with the direct one beyond 10*tol
// (relative), which would signal an inconsistent discretization.
AdjointSolution adjoint_eigen(const PropagatorFamily& family, const FloquetSolution& direct,
                              const PowerOptions& opts = {});

// Eigen solutions of a one-phase model without and with the age-independent
// periodic death term gamma. The pair exposes the invariance
// lambda^gamma = lambda - <gamma> for testing.
std::pair<FloquetSolution, FloquetSolution> gauge_shift(const OnePhaseModel& model,
                                                        const PeriodicFn& gamma, int n_time,
                                                        const PowerOptions& opts = {},
                                                        double c_tail = 30.0);

}  // namespace floq
