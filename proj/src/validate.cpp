#include "floq/validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <random>
#include <sstream>

#include "floq/closed_form.hpp"
#include "floq/dde.hpp"
#include "floq/spectral.hpp"

namespace floq {

namespace {

constexpr double kK0 = 2.0;

struct NamedPsi {
    const char* name;
    PeriodicFn psi;
};

std::vector<NamedPsi> reference_psis() {
    return {{"sin", PeriodicFn::sinusoidal()},
            {"square", PeriodicFn::square()},
            {"peak", PeriodicFn::peak()}};
}

FloquetSolution solve_one_phase(double K0, double a, const PeriodicFn& psi, int n_time,
                                double c_tail = 12.0, bool store_sequence = false) {
    OnePhaseModel one{K0, a, psi};
    const GridSpec grid = GridSpec::for_model(one.as_multi(), n_time, c_tail);
    PowerOptions opts;
    opts.store_sequence = store_sequence;
    return floquet_eigen(PropagatorFamily(one.as_multi(), grid), opts);
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

// ---- criterion 1: equality of growth rates at a = T ------------------------

CheckResult criterion_equality_at_T() {
    CheckResult res{1, "growth-rate equality at a = T with first-order grid convergence", true, ""};
    const double lamP = solve_perron_one_phase(kK0, 1.0).lambda;
    auto psis = reference_psis();
    std::vector<double> err2048(psis.size()), err4096(psis.size());
    parallel_for(psis.size() * 2, 0, [&](std::size_t idx) {
        const std::size_t j = idx / 2;
        const int nt = (idx % 2) ? 4096 : 2048;
        const double lam = solve_one_phase(kK0, 1.0, psis[j].psi, nt).lambda;
        (nt == 2048 ? err2048[j] : err4096[j]) = std::abs(lam - lamP);
    });
    for (std::size_t j = 0; j < psis.size(); ++j) {
        const double ratio = err2048[j] / err4096[j];
        const bool ok = err2048[j] <= 1e-3 && ratio >= 1.8;
        res.pass = res.pass && ok;
        res.details += std::string(psis[j].name) + ": |lamF-lamP|=" + fmt(err2048[j]) +
                       " (<=1e-3), shrink x" + fmt(ratio) + " (>=1.8); ";
    }
    return res;
}

// ---- criterion 2: local inequalities around a = T ---------------------------

CheckResult criterion_local_inequalities() {
    CheckResult res{2, "Floquet above Perron before a = T and below after", true, ""};
    const double as[] = {0.90, 0.95, 1.05, 1.10};
    auto psis = reference_psis();
    std::vector<double> gap(psis.size() * 4);
    parallel_for(gap.size(), 0, [&](std::size_t idx) {
        const std::size_t j = idx / 4;
        const double a = as[idx % 4];
        const double lamF = solve_one_phase(kK0, a, psis[j].psi, 2000).lambda;
        gap[idx] = lamF - solve_perron_one_phase(kK0, a).lambda;
    });
    for (std::size_t j = 0; j < psis.size(); ++j) {
        for (int m = 0; m < 4; ++m) {
            const double d = gap[j * 4 + m];
            const bool ok = as[m] < 1.0 ? d > 1e-4 : d < -1e-4;
            res.pass = res.pass && ok;
            res.details += std::string(psis[j].name) + "@a=" + fmt(as[m]) + ": " + fmt(d) + "; ";
        }
    }
    return res;
}

// ---- criterion 3: slope gap at a = T ----------------------------------------

CheckResult criterion_slope_gap() {
    CheckResult res{3, "slope-gap formula at a = T and slope ordering", true, ""};
    auto psis = reference_psis();
    const double h = 0.01;
    std::vector<double> lam_stencil(psis.size() * 2);
    parallel_for(lam_stencil.size(), 0, [&](std::size_t idx) {
        const std::size_t j = idx / 2;
        const double a = idx % 2 ? 1.0 + h : 1.0 - h;
        lam_stencil[idx] = solve_one_phase(kK0, a, psis[j].psi, 2000).lambda;
    });
    std::vector<double> slopeF(psis.size());
    for (std::size_t j = 0; j < psis.size(); ++j)
        slopeF[j] = (lam_stencil[2 * j + 1] - lam_stencil[2 * j]) / (2.0 * h);
    const double slopeP = (solve_perron_one_phase(kK0, 1.0 + h).lambda -
                           solve_perron_one_phase(kK0, 1.0 - h).lambda) /
                          (2.0 * h);
    for (std::size_t j = 0; j < psis.size(); ++j) {
        const double gap_fd = slopeP - slopeF[j];
        const double gap_formula = floquet_slope_gap_at(kK0, 1.0, psis[j].psi);
        res.details += std::string(psis[j].name) + ": gap fd=" + fmt(gap_fd) +
                       " formula=" + fmt(gap_formula) + "; ";
        if (j == 0) {  // the 5% bound is asserted for the sinusoidal control
            const double rel = std::abs(gap_fd - gap_formula) / gap_formula;
            res.pass = res.pass && rel <= 0.05;
            res.details += "rel err " + fmt(rel) + " (<=0.05); ";
        }
    }
    const bool order = slopeF[2] < slopeF[1] && slopeF[1] < slopeF[0] && slopeF[0] < 0.0;
    res.pass = res.pass && order;
    res.details += "slope order peak<square<sin<0: " + std::string(order ? "yes" : "NO");
    return res;
}

// ---- criterion 4: lambda_F >= lambda_g --------------------------------------

CheckResult criterion_geometric_bound() {
    CheckResult res{4, "Floquet rate dominates the geometric rate", true, ""};
    const double as[] = {0.5, 1.0, 1.5};
    auto psis = reference_psis();
    std::vector<double> margin(psis.size() * 3);
    parallel_for(margin.size(), 0, [&](std::size_t idx) {
        const std::size_t j = idx / 3;
        const double a = as[idx % 3];
        const double lamF = solve_one_phase(kK0, a, psis[j].psi, 1024).lambda;
        margin[idx] = lamF - solve_geometric_one_phase(kK0, a, psis[j].psi).lambda;
    });
    for (std::size_t j = 0; j < psis.size(); ++j)
        for (int m = 0; m < 3; ++m) {
            const double d = margin[j * 3 + m];
            res.pass = res.pass && d >= -2e-3;
            res.details += std::string(psis[j].name) + "@a=" + fmt(as[m]) + ": lamF-lamg=" + fmt(d) + "; ";
        }
    return res;
}

// ---- criterion 5: positivity of the Perron rate ------------------------------

CheckResult criterion_perron_positive(unsigned seed) {
    CheckResult res{5, "Perron rate positive on random parameters with tiny residual", true, ""};
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst_lambda = 1e300, worst_residual = 0.0;
    for (int n = 0; n < 100; ++n) {
        const double K0 = 10.0 * (1.0 - unit(rng)) + 1e-6;  // (0, 10]
        const double a = 10.0 * (1.0 - unit(rng)) + 1e-6;
        const PerronResult r = solve_perron_one_phase(K0, a);
        worst_lambda = std::min(worst_lambda, r.lambda);
        worst_residual = std::max(worst_residual, r.residual);
        res.pass = res.pass && r.lambda > 0.0 && r.residual < 1e-10;
    }
    res.details = "min lambda_P = " + fmt(worst_lambda) + ", max residual = " + fmt(worst_residual);
    return res;
}

// ---- criterion 6: gauge invariance under an age-independent death rate ------

CheckResult criterion_gauge() {
    CheckResult res{6, "death term shifts the rate by its mean, independent of its phase", true, ""};
    // solver grid tolerance at N_T = 2048 (criterion 1); the discrete gauge
    // identity holds to first order in dt, not to power-iteration tolerance
    const double tol_shift = 2e-3;
    const OnePhaseModel one{kK0, 1.0, PeriodicFn::sinusoidal()};

    const PeriodicFn g_const = PeriodicFn::constant(0.3);
    const auto pair = gauge_shift(one, g_const, 2048, {}, 12.0);
    const double lambda_base = pair.first.lambda;
    const double err_const = std::abs(pair.second.lambda - (lambda_base - arithmetic_mean(g_const)));
    res.pass = res.pass && err_const <= tol_shift;
    res.details += "const 0.3: shift err " + fmt(err_const) + "; ";

    const PeriodicFn g6 = PeriodicFn::cos6(2);
    const double mean6 = arithmetic_mean(g6);
    const MultiPhaseModel base_model = one.as_multi();
    const GridSpec grid = GridSpec::for_model(base_model, 2048, 12.0);
    double lams[3];
    const double thetas[3] = {0.0, 0.25, 0.6};
    parallel_for(3, 0, [&](std::size_t m) {
        const MultiPhaseModel dosed = base_model.with_therapy(Therapy{1, 1.0, thetas[m], g6});
        lams[m] = floquet_eigen(PropagatorFamily(dosed, grid)).lambda;
    });
    for (double lam : lams) {
        const double err = std::abs(lam - (lambda_base - mean6));
        res.pass = res.pass && err <= tol_shift;
        res.details += "cos6 shift err " + fmt(err) + "; ";
    }
    const double spread = std::max({lams[0], lams[1], lams[2]}) - std::min({lams[0], lams[1], lams[2]});
    res.pass = res.pass && spread < 1e-6;
    res.details += "theta spread " + fmt(spread) + " (<1e-6)";
    return res;
}

// ---- criterion 7: commuting 3-phase closed form -------------------------------

AnalyticThreePhase reference_three_phase_solution() {
    return solve_analytic_three_phase({10.0, 10.0, 10.0}, {10.0 / 24, 12.0 / 24, 2.0 / 24},
                                      PeriodicFn::sinusoidal());
}

MultiPhaseModel reference_three_phase_model() {
    return make_shifted_three_phase({10.0, 10.0, 10.0}, {10.0 / 24, 12.0 / 24, 2.0 / 24},
                                    PeriodicFn::sinusoidal());
}

CheckResult criterion_three_phase_closed_form() {
    CheckResult res{7, "3-phase spectral rate and weight profile match the closed form", true, ""};
    const AnalyticThreePhase sol = reference_three_phase_solution();
    const MultiPhaseModel model = reference_three_phase_model();

    const GridSpec grid = GridSpec::for_model(model, 2400, 12.0);
    const double lam = floquet_eigen(PropagatorFamily(model, grid)).lambda;
    const double err = std::abs(lam - sol.lambda);
    res.pass = res.pass && err <= 1e-3;
    res.details += "lambda: analytic " + fmt(sol.lambda) + ", spectral " + fmt(lam) +
                   ", err " + fmt(err) + " (<=1e-3); ";

    // weight profile on a commensurate moderate grid
    const GridSpec wgrid = GridSpec::for_model(model, 960, 12.0);
    const PropagatorFamily family(model, wgrid);
    PowerOptions seq_opts;
    seq_opts.store_sequence = true;
    const FloquetSolution direct = floquet_eigen(family, seq_opts);
    const AdjointSolution adjoint = adjoint_eigen(family, direct);
    const auto& w2 = adjoint.weights[1];
    const double norm = analytic_weight_normalization(sol);
    double num = 0.0, den = 0.0, c1 = 0.0;
    for (int k = 0; k < wgrid.n_time; ++k) {
        const double t = k * wgrid.dt;
        const double ref = analytic_weight(sol, 2, t) / norm;
        num += (w2[k] - ref) * (w2[k] - ref);
        den += ref * ref;
        c1 += 2.0 * w2[k] * std::sin(2.0 * M_PI * t) * wgrid.dt;
    }
    const double rel_l2 = std::sqrt(num / den);
    res.pass = res.pass && rel_l2 < 0.02;
    const double c1_ref = 2.0 * sol.C * 0.9 / (2.0 * M_PI) / norm;
    res.details += "w2 rel L2 err " + fmt(rel_l2) + " (<0.02), sin coefficient " + fmt(c1) +
                   " vs closed form " + fmt(c1_ref);
    return res;
}

}  // namespace

// ---- criterion 8: chronotherapy optimum and first-order quality ---------------

CheckResult evaluate_chrono_criterion(const ChronoSweep& sweep) {
    CheckResult res{8, "optimal drug phase at 1/4 for every amplitude; first order tightens with epsilon", true, ""};
    const double cell = sweep.thetas[1] - sweep.thetas[0];
    for (double eps : sweep.epsilons) {
        const OptimumResult opt = locate_optimum(sweep, eps);
        double d = std::abs(opt.theta - 0.25);
        d = std::min(d, 1.0 - d);
        const bool ok = !opt.degenerate && d <= cell;
        res.pass = res.pass && ok;
        res.details += "eps=" + fmt(eps) + ": theta_opt=" + fmt(opt.theta) +
                       (opt.degenerate ? " DEGENERATE" : "") + "; ";
    }
    // pointwise: prediction error at the smallest amplitude bounded by the
    // error at the largest
    std::size_t ie_small = 0, ie_large = 0;
    for (std::size_t j = 0; j < sweep.epsilons.size(); ++j) {
        if (sweep.epsilons[j] < sweep.epsilons[ie_small]) ie_small = j;
        if (sweep.epsilons[j] > sweep.epsilons[ie_large]) ie_large = j;
    }
    double max_small = 0.0, max_large = 0.0;
    bool pointwise = true;
    for (std::size_t it = 0; it < sweep.thetas.size(); ++it) {
        const double es = std::abs(sweep.lambda[ie_small][it] - sweep.first_order(ie_small, it));
        const double el = std::abs(sweep.lambda[ie_large][it] - sweep.first_order(ie_large, it));
        pointwise = pointwise && es <= el + 1e-12;
        max_small = std::max(max_small, es);
        max_large = std::max(max_large, el);
    }
    res.pass = res.pass && pointwise;
    res.details += "max |lambda-pred|: eps_small " + fmt(max_small) + ", eps_large " + fmt(max_large) +
                   (pointwise ? " (pointwise ok)" : " (POINTWISE VIOLATION)") + "; ";
    // the prediction must actually track the surface (catches sign errors)
    double range_small = 0.0;
    {
        double rlo = 1e300, rhi = -1e300;
        for (std::size_t it = 0; it < sweep.thetas.size(); ++it) {
            rlo = std::min(rlo, sweep.lambda[ie_small][it]);
            rhi = std::max(rhi, sweep.lambda[ie_small][it]);
        }
        range_small = rhi - rlo;
    }
    const bool tracks = max_small <= 0.25 * range_small;
    res.pass = res.pass && tracks;
    res.details += "prediction tracks surface: " + std::string(tracks ? "yes" : "NO");
    return res;
}

namespace {

CheckResult criterion_chronotherapy() {
    ChronoOptions opts;
    opts.n_time = 480;
    opts.c_tail = 12.0;
    const ChronoSweep sweep = chrono_sweep(reference_three_phase_model(), PeriodicFn::cos6(1), 2,
                                           {0.1, 0.5, 1.0}, 64, opts);
    return evaluate_chrono_criterion(sweep);
}

// ---- criterion 9: oracle triangle ---------------------------------------------

CheckResult criterion_oracle_triangle() {
    CheckResult res{9, "spectral, delay-equation and closed-form rates agree pairwise", true, ""};
    const PeriodicFn psi = PeriodicFn::sinusoidal();
    const double lam_spec = solve_one_phase(kK0, 1.0, psi, 2048).lambda;
    const double lam_closed = solve_perron_one_phase(kK0, 1.0).lambda;
    const DdeTrajectory traj = integrate_dde(kK0, 1.0, psi, 120.0, 1.0 / 400);
    const double lam_dde = estimate_growth(traj, 50).value;
    const double d1 = std::abs(lam_spec - lam_dde);
    const double d2 = std::abs(lam_spec - lam_closed);
    const double d3 = std::abs(lam_dde - lam_closed);
    res.pass = d1 <= 2e-3 && d2 <= 2e-3 && d3 <= 2e-3;
    res.details = "spectral " + fmt(lam_spec) + ", dde " + fmt(lam_dde) + ", closed " + fmt(lam_closed) +
                  "; pairwise diffs " + fmt(d1) + ", " + fmt(d2) + ", " + fmt(d3) + " (<=2e-3)";
    return res;
}

// ---- criterion 10: discrete structure -------------------------------------------

// dense one-step matrices assembled straight from the scheme definition
std::vector<std::vector<std::vector<double>>> dense_steps(const MultiPhaseModel& model,
                                                          const GridSpec& grid) {
    const int P = static_cast<int>(model.phases.size());
    const int cells = grid.n_age + 1;
    const int dim = P * cells;
    std::vector<std::vector<std::vector<double>>> mats(
        grid.n_time, std::vector<std::vector<double>>(dim, std::vector<double>(dim, 0.0)));
    const Therapy* th = model.therapy ? &*model.therapy : nullptr;
    for (int k = 0; k < grid.n_time; ++k) {
        for (int p = 0; p < P; ++p) {
            const Phase& ph = model.phases[p];
            auto kappa = [&](int i) { return i * grid.dt >= ph.a - 1e-9 * grid.dt ? ph.K : 0.0; };
            double loss_next = ph.death((k + 1) * grid.dt);
            if (th && th->phase == p + 1) loss_next += th->epsilon * th->gamma((k + 1) * grid.dt + th->theta);
            const double psi_k = ph.psi(k * grid.dt);
            const double psi_next = ph.psi((k + 1) * grid.dt);
            const int row0 = ((p + 1) % P) * cells;
            const double f = (p == P - 1) ? 2.0 : 1.0;
            for (int i = 0; i < cells; ++i)
                mats[k][row0][p * cells + i] = f * psi_k * kappa(i) * grid.dt;
            for (int i = 1; i < cells; ++i)
                mats[k][p * cells + i][p * cells + i - 1] =
                    1.0 / (1.0 + grid.dt * (kappa(i) * psi_next + loss_next));
        }
    }
    return mats;
}

std::vector<double> dense_apply(const std::vector<std::vector<double>>& m,
                                const std::vector<double>& v) {
    std::vector<double> out(m.size(), 0.0);
    for (std::size_t r = 0; r < m.size(); ++r)
        for (std::size_t c = 0; c < v.size(); ++c) out[r] += m[r][c] * v[c];
    return out;
}

CheckResult criterion_discrete_structure(unsigned seed) {
    CheckResult res{10, "dense-matrix equivalence, adjoint duality, power convergence", true, ""};
    std::mt19937 rng(seed + 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    struct Case {
        const char* name;
        MultiPhaseModel model;
    };
    std::vector<Case> cases;
    cases.push_back({"one-phase", OnePhaseModel{2.0, 1.0, PeriodicFn::sinusoidal()}.as_multi()});
    MultiPhaseModel multi = make_shifted_three_phase({2.0, 3.0, 4.0}, {0.5, 0.75, 0.25},
                                                     PeriodicFn::sinusoidal());
    multi = multi.with_therapy(Therapy{2, 0.4, 0.3, PeriodicFn::cos6(1)});
    cases.push_back({"three-phase", multi});

    double worst_dense = 0.0, worst_dual = 0.0;
    for (const Case& c : cases) {
        const GridSpec grid = GridSpec::make(1.0, 8, 16, c.model.max_age());
        const PropagatorFamily family(c.model, grid);
        const auto mats = dense_steps(c.model, grid);
        for (int trial = 0; trial < 5; ++trial) {
            StateVector v(family.phases(), family.cells());
            StateVector w(family.phases(), family.cells());
            for (auto& x : v.data) x = unit(rng);
            for (auto& x : w.data) x = unit(rng);
            std::vector<double> dense = v.data;
            for (int k = 0; k < grid.n_time; ++k) dense = dense_apply(mats[k], dense);
            const StateVector fast = family.monodromy_apply(v);
            double scale = 0.0, diff = 0.0;
            for (std::size_t j = 0; j < dense.size(); ++j) {
                diff = std::max(diff, std::abs(dense[j] - fast.data[j]));
                scale = std::max(scale, std::abs(dense[j]));
            }
            worst_dense = std::max(worst_dense, diff / scale);
            const StateVector adj = family.monodromy_apply_adjoint(w);
            const double lhs = dot(fast, w);
            const double rhs = dot(v, adj);
            worst_dual = std::max(worst_dual,
                                  std::abs(lhs - rhs) / (v.l1_norm() * w.l1_norm()));
        }
    }
    res.pass = res.pass && worst_dense <= 1e-13 && worst_dual < 1e-12;
    res.details = "dense mismatch " + fmt(worst_dense) + " (<=1e-13), duality residual " +
                  fmt(worst_dual) + " (<1e-12); ";

    // power iteration converges well within the application budget on the
    // reference configurations
    long worst_iters = 0;
    bool all_converged = true;
    for (const NamedPsi& np : reference_psis()) {
        const FloquetSolution s = solve_one_phase(kK0, 1.0, np.psi, 512);
        all_converged = all_converged && s.converged;
        worst_iters = std::max(worst_iters, s.iterations);
    }
    {
        const MultiPhaseModel model = reference_three_phase_model();
        const FloquetSolution s =
            floquet_eigen(PropagatorFamily(model, GridSpec::for_model(model, 480, 12.0)));
        all_converged = all_converged && s.converged;
        worst_iters = std::max(worst_iters, s.iterations);
    }
    res.pass = res.pass && all_converged && worst_iters <= 100000;
    res.details += "power iterations max " + std::to_string(worst_iters) + " (<=1e5), converged: " +
                   (all_converged ? "yes" : "NO");
    return res;
}

}  // namespace

bool ValidationReport::all_pass() const {
    for (const CheckResult& c : checks)
        if (!c.pass) return false;
    return !checks.empty();
}

ValidationReport run_acceptance(unsigned seed, std::ostream* progress) {
    const auto t0 = std::chrono::steady_clock::now();
    ValidationReport report;
    auto add = [&](CheckResult c) {
        if (progress)
            (*progress) << (c.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name
                        << "\n";
        report.checks.push_back(std::move(c));
    };
    add(criterion_equality_at_T());
    add(criterion_local_inequalities());
    add(criterion_slope_gap());
    add(criterion_geometric_bound());
    add(criterion_perron_positive(seed));
    add(criterion_gauge());
    add(criterion_three_phase_closed_form());
    add(criterion_chronotherapy());
    add(criterion_oracle_triangle());
    add(criterion_discrete_structure(seed));
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

std::string report_to_json(const ValidationReport& report) {
    nlohmann::ordered_json j;
    j["all_pass"] = report.all_pass();
    j["wall_seconds"] = report.wall_seconds;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const CheckResult& c : report.checks) {
        nlohmann::ordered_json cj;
        cj["id"] = c.id;
        cj["name"] = c.name;
        cj["pass"] = c.pass;
        cj["details"] = c.details;
        arr.push_back(cj);
    }
    j["checks"] = arr;
    return j.dump(2) + "\n";
}

void print_report(const ValidationReport& report, std::ostream& os) {
    for (const CheckResult& c : report.checks)
        os << (c.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " — "
           << c.details << "\n";
    os << (report.all_pass() ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED") << " ("
       << report.wall_seconds << " s)\n";
}

}  // namespace floq
