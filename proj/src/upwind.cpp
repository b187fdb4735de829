#include "floq/upwind.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace floq {

double MultiPhaseModel::period() const {
    if (phases.empty()) throw std::invalid_argument("model has no phases");
    const double T = phases.front().psi.period();
    for (const Phase& p : phases)
        if (std::abs(p.psi.period() - T) > 1e-12 * T)
            throw std::invalid_argument("all phase controls must share one period");
    return T;
}

double MultiPhaseModel::max_age() const {
    double m = 0.0;
    for (const Phase& p : phases) m = std::max(m, p.a);
    return m;
}

double MultiPhaseModel::min_rate() const {
    double m = phases.front().K;
    for (const Phase& p : phases) m = std::min(m, p.K);
    return m;
}

MultiPhaseModel MultiPhaseModel::with_therapy(Therapy t) const {
    if (t.phase < 1 || t.phase > static_cast<int>(phases.size()))
        throw std::invalid_argument("therapy phase index out of range");
    MultiPhaseModel m = *this;
    m.therapy = std::move(t);
    return m;
}

MultiPhaseModel MultiPhaseModel::without_therapy() const {
    MultiPhaseModel m = *this;
    m.therapy.reset();
    return m;
}

MultiPhaseModel OnePhaseModel::as_multi() const {
    MultiPhaseModel m;
    m.phases.push_back(Phase{K0, a, psi, death});
    return m;
}

MultiPhaseModel make_shifted_three_phase(const std::array<double, 3>& K,
                                         const std::array<double, 3>& a,
                                         const PeriodicFn& psi) {
    MultiPhaseModel m;
    m.phases.push_back(Phase{K[0], a[0], psi});
    m.phases.push_back(Phase{K[1], a[1], psi.shifted(a[1])});
    m.phases.push_back(Phase{K[2], a[2], psi.shifted(a[1] + a[2])});
    return m;
}

GridSpec GridSpec::make(double period, int n_time, int n_age, double max_age) {
    if (!(period > 0.0)) throw std::invalid_argument("grid: period must be positive");
    if (n_time < 1) throw std::invalid_argument("grid: need at least one time step");
    GridSpec g;
    g.period = period;
    g.n_time = n_time;
    g.n_age = n_age;
    g.dt = period / n_time;
    if (!(g.dt > 0.0)) throw std::invalid_argument("grid: dt must be positive");
    if (n_age + 1 <= n_time)
        throw std::invalid_argument("grid: primitivity needs I+1 > N_T (I=" + std::to_string(n_age) +
                                    ", N_T=" + std::to_string(n_time) + ")");
    if (n_age * g.dt < max_age + 2.0 * g.dt - 1e-12 * period)
        throw std::invalid_argument("grid: age span I*dt must cover max maturation age + 2*dt");
    return g;
}

GridSpec GridSpec::for_model(const MultiPhaseModel& model, int n_time, double c_tail) {
    const double T = model.period();
    const double dt = T / n_time;
    const double x_max = model.max_age() + c_tail / model.min_rate();
    int n_age = static_cast<int>(std::ceil(x_max / dt));
    if (n_age + 1 <= n_time) n_age = n_time;
    return make(T, n_time, n_age, model.max_age());
}

double StateVector::sum() const {
    double s = 0.0;
    for (double v : data) s += v;
    return s;
}

double StateVector::l1_norm() const {
    double s = 0.0;
    for (double v : data) s += std::abs(v);
    return s;
}

void StateVector::scale(double s) {
    for (double& v : data) v *= s;
}

double l1_distance(const StateVector& x, const StateVector& y) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.data.size(); ++j) s += std::abs(x.data[j] - y.data[j]);
    return s;
}

double dot(const StateVector& x, const StateVector& y) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.data.size(); ++j) s += x.data[j] * y.data[j];
    return s;
}

PropagatorFamily::PropagatorFamily(MultiPhaseModel model, GridSpec grid)
    : model_(std::move(model)), grid_(grid) {
    n_phases_ = static_cast<int>(model_.phases.size());
    if (n_phases_ < 1) throw std::invalid_argument("propagator: model has no phases");
    if (n_phases_ > 64) throw std::invalid_argument("propagator: at most 64 phases supported");
    cells_ = grid_.n_age + 1;
    // re-validate the grid against this model's ages
    (void)GridSpec::make(grid_.period, grid_.n_time, grid_.n_age, model_.max_age());
    if (std::abs(model_.period() - grid_.period) > 1e-12 * grid_.period)
        throw std::invalid_argument("propagator: grid period does not match the control period");

    const int NT = grid_.n_time;
    const double dt = grid_.dt;
    K_.resize(n_phases_);
    first_active_.resize(n_phases_);
    psik_.assign(n_phases_, std::vector<double>(NT + 1));
    lossk_.assign(n_phases_, std::vector<double>(NT + 1));
    const Therapy* th = model_.therapy ? &*model_.therapy : nullptr;
    for (int p = 0; p < n_phases_; ++p) {
        const Phase& ph = model_.phases[p];
        if (!(ph.K > 0.0)) throw std::invalid_argument("propagator: division rates must be positive");
        if (!(ph.a >= 0.0)) throw std::invalid_argument("propagator: maturation ages must be nonnegative");
        K_[p] = ph.K;
        // ties i*dx == a include the node
        first_active_[p] = static_cast<int>(std::ceil(ph.a / dt - 1e-9));
        for (int k = 0; k <= NT; ++k) {
            const double t = k * dt;
            psik_[p][k] = ph.psi(t);
            double loss = ph.death(t);
            if (th && th->phase == p + 1) loss += th->epsilon * th->gamma(t + th->theta);
            lossk_[p][k] = loss;
        }
    }
}

void PropagatorFamily::check_state(const StateVector& v) const {
    if (v.phases != n_phases_ || v.cells != cells_)
        throw std::invalid_argument("state dimension does not match the grid");
}

void PropagatorFamily::apply_step(int k, const StateVector& in, StateVector& out) const {
    const int kk = k % grid_.n_time;
    const double dt = grid_.dt;
    double birth[64];
    for (int p = 0; p < n_phases_; ++p) {
        const double loss_next = lossk_[p][kk + 1];
        const double r_lo = 1.0 / (1.0 + dt * loss_next);
        const double r_hi = 1.0 / (1.0 + dt * (K_[p] * psik_[p][kk + 1] + loss_next));
        const double* vin = in.data.data() + static_cast<std::size_t>(p) * cells_;
        double* vout = out.data.data() + static_cast<std::size_t>(p) * cells_;
        const int i0 = first_active_[p];
        const int lim = std::max(i0, 1);
        for (int i = 1; i < lim; ++i) vout[i] = vin[i - 1] * r_lo;
        for (int i = lim; i < cells_; ++i) vout[i] = vin[i - 1] * r_hi;
        double tail = 0.0;
        for (int i = i0; i < cells_; ++i) tail += vin[i];
        birth[p] = birth_factor(p) * psik_[p][kk] * dt * K_[p] * tail;
    }
    for (int p = 0; p < n_phases_; ++p) {
        const int succ = (p + 1) % n_phases_;
        out.data[static_cast<std::size_t>(succ) * cells_] = birth[p];
    }
}

void PropagatorFamily::apply_step_adjoint(int k, const StateVector& in, StateVector& out) const {
    const int kk = k % grid_.n_time;
    const double dt = grid_.dt;
    for (int p = 0; p < n_phases_; ++p) {
        const double loss_next = lossk_[p][kk + 1];
        const double r_lo = 1.0 / (1.0 + dt * loss_next);
        const double r_hi = 1.0 / (1.0 + dt * (K_[p] * psik_[p][kk + 1] + loss_next));
        const double* win = in.data.data() + static_cast<std::size_t>(p) * cells_;
        double* wout = out.data.data() + static_cast<std::size_t>(p) * cells_;
        const int i0 = first_active_[p];
        const int lim = std::max(i0, 1);
        for (int i = 0; i + 1 < lim; ++i) wout[i] = win[i + 1] * r_lo;
        for (int i = lim - 1; i + 1 < cells_; ++i) wout[i] = win[i + 1] * r_hi;
        wout[cells_ - 1] = 0.0;
        const int succ = (p + 1) % n_phases_;
        const double m = birth_factor(p) * psik_[p][kk] * dt * K_[p] *
                         in.data[static_cast<std::size_t>(succ) * cells_];
        for (int i = i0; i < cells_; ++i) wout[i] += m;
    }
}

StateVector PropagatorFamily::step(int k, const StateVector& v) const {
    check_state(v);
    StateVector out(n_phases_, cells_);
    apply_step(k, v, out);
    return out;
}

void PropagatorFamily::monodromy_into(const StateVector& in, StateVector& out,
                                      StateVector& scratch) const {
    const StateVector* cur = &in;
    StateVector* ping = &out;
    StateVector* pong = &scratch;
    for (int k = 0; k < grid_.n_time; ++k) {
        apply_step(k, *cur, *ping);
        cur = ping;
        std::swap(ping, pong);
    }
    if (cur != &out) out.data = cur->data;
}

void PropagatorFamily::monodromy_adjoint_into(const StateVector& in, StateVector& out,
                                              StateVector& scratch) const {
    const StateVector* cur = &in;
    StateVector* ping = &out;
    StateVector* pong = &scratch;
    for (int k = grid_.n_time - 1; k >= 0; --k) {
        apply_step_adjoint(k, *cur, *ping);
        cur = ping;
        std::swap(ping, pong);
    }
    if (cur != &out) out.data = cur->data;
}

StateVector PropagatorFamily::monodromy_apply(const StateVector& v) const {
    check_state(v);
    if (!(v.sum() > 0.0)) throw std::invalid_argument("monodromy: input state must be nonzero");
    StateVector out(n_phases_, cells_), scratch(n_phases_, cells_);
    monodromy_into(v, out, scratch);
    return out;
}

StateVector PropagatorFamily::monodromy_apply_adjoint(const StateVector& w) const {
    check_state(w);
    if (!(w.sum() > 0.0)) throw std::invalid_argument("adjoint monodromy: input state must be nonzero");
    StateVector out(n_phases_, cells_), scratch(n_phases_, cells_);
    monodromy_adjoint_into(w, out, scratch);
    return out;
}

}  // namespace floq
