#pragma once

#include <array>
#include <optional>
#include <vector>

#include "floq/periodic_fn.hpp"

namespace floq {

// Periodic drug-induced death rate epsilon*gamma(t + theta) acting on one phase.
struct Therapy {
    int phase = 1;  // 1-based
    double epsilon = 0.0;
    double theta = 0.0;
    PeriodicFn gamma = PeriodicFn::constant(0.0);
};

// One phase of the cycle: transition rate K*psi(t) beyond maturation age a,
// plus an age-independent death rate.
struct Phase {
    double K = 1.0;
    double a = 0.0;
    PeriodicFn psi = PeriodicFn::constant(1.0);
    PeriodicFn death = PeriodicFn::constant(0.0);
};

struct MultiPhaseModel {
    std::vector<Phase> phases;
    std::optional<Therapy> therapy;

    double period() const;    // common control period
    double max_age() const;   // max maturation age
    double min_rate() const;  // min transition rate, for age truncation
    MultiPhaseModel with_therapy(Therapy t) const;
    MultiPhaseModel without_therapy() const;
};

struct OnePhaseModel {
    double K0 = 2.0;
    double a = 1.0;
    PeriodicFn psi = PeriodicFn::constant(1.0);
    PeriodicFn death = PeriodicFn::constant(0.0);

    MultiPhaseModel as_multi() const;
};

// The commuting construction: common psi with per-phase shifts
// psi_1 = psi, psi_2 = psi(.-a2), psi_3 = psi(.-a2-a3).
MultiPhaseModel make_shifted_three_phase(const std::array<double, 3>& K,
                                         const std::array<double, 3>& a,
                                         const PeriodicFn& psi);

// dt = dx = T/N_T lattice with age truncated at I*dt.
struct GridSpec {
    double period = 1.0;
    int n_time = 0;  // N_T
    int n_age = 0;   // I; state has I+1 cells per phase
    double dt = 0.0;

    // validates dt > 0, I+1 > N_T and I*dt >= max_age + 2*dt
    static GridSpec make(double period, int n_time, int n_age, double max_age);

    // age truncation from the survival decay: X_max >= max_age + c_tail/K_min
    static GridSpec for_model(const MultiPhaseModel& model, int n_time, double c_tail = 30.0);
};

// Nonnegative state indexed by (phase, age index 0..I).
struct StateVector {
    int phases = 1;
    int cells = 0;
    std::vector<double> data;

    StateVector() = default;
    StateVector(int n_phases, int n_cells, double fill = 0.0)
        : phases(n_phases), cells(n_cells),
          data(static_cast<std::size_t>(n_phases) * n_cells, fill) {}

    double& at(int p, int i) { return data[static_cast<std::size_t>(p) * cells + i]; }
    double at(int p, int i) const { return data[static_cast<std::size_t>(p) * cells + i]; }
    std::size_t size() const { return data.size(); }
    double sum() const;
    double l1_norm() const;
    void scale(double s);
};

double l1_distance(const StateVector& x, const StateVector& y);
double dot(const StateVector& x, const StateVector& y);

// The N_T-periodic family of one-step propagators M_k of the upwind CFL=1
// scheme, and the monodromy operator M_{N_T-1}...M_0 as a matrix-free map.
//
//   n_i^{k+1} = n_{i-1}^k / (1 + dt (kappa_i psi^{k+1} + d^{k+1} + eps gamma_theta^{k+1}))
//   n_0^{k+1} = f psi^k sum_i kappa_i n_i^k dt      (f = 2 at the cycle close)
//
// with kappa_i = K chi_{[a,inf)}(i dx); the boundary row is fed by the
// predecessor phase. Boundary samples the control at time level k, the
// survival denominators at k+1.
class PropagatorFamily {
  public:
    PropagatorFamily(MultiPhaseModel model, GridSpec grid);

    const GridSpec& grid() const { return grid_; }
    const MultiPhaseModel& model() const { return model_; }
    int phases() const { return n_phases_; }
    int cells() const { return cells_; }
    std::size_t dim() const { return static_cast<std::size_t>(n_phases_) * cells_; }

    StateVector step(int k, const StateVector& v) const;
    StateVector monodromy_apply(const StateVector& v) const;
    StateVector monodromy_apply_adjoint(const StateVector& w) const;

    // in-place variants used by the power iteration
    void apply_step(int k, const StateVector& in, StateVector& out) const;
    void apply_step_adjoint(int k, const StateVector& in, StateVector& out) const;
    void monodromy_into(const StateVector& in, StateVector& out, StateVector& scratch) const;
    void monodromy_adjoint_into(const StateVector& in, StateVector& out, StateVector& scratch) const;

    // sampled controls, k = 0..N_T (psi^k = psi(k dt))
    double psi_sample(int p, int k) const { return psik_[p][k]; }
    double loss_sample(int p, int k) const { return lossk_[p][k]; }
    double kappa(int p, int i) const { return i >= first_active_[p] ? K_[p] : 0.0; }
    int first_active_index(int p) const { return first_active_[p]; }
    double birth_factor(int p) const { return p == n_phases_ - 1 ? 2.0 : 1.0; }

  private:
    void check_state(const StateVector& v) const;

    MultiPhaseModel model_;
    GridSpec grid_;
    int n_phases_;
    int cells_;
    std::vector<double> K_;
    std::vector<int> first_active_;            // smallest i with i*dx >= a_p
    std::vector<std::vector<double>> psik_;    // [phase][k], k = 0..N_T
    std::vector<std::vector<double>> lossk_;   // death + therapy samples
};

}  // namespace floq
