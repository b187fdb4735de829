#include "floq/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "floq/closed_form.hpp"
#include "floq/spectral.hpp"
#include "floq/validate.hpp"

namespace floq {

using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
    throw std::invalid_argument("config error at " + where + ": " + what);
}

ControlSpec control_from_json(const ordered_json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("kind"))
        config_error(where, "expected an object with a \"kind\" field");
    ControlSpec spec;
    spec.kind = j.at("kind").get<std::string>();
    if (j.contains("params")) spec.params = j.at("params").get<std::vector<double>>();
    return spec;
}

ordered_json control_to_json(const ControlSpec& spec) {
    ordered_json j;
    j["kind"] = spec.kind;
    j["params"] = spec.params;
    return j;
}

TherapySpec therapy_from_json(const ordered_json& j, const std::string& where) {
    TherapySpec t;
    t.phase = j.value("phase", 1);
    t.epsilon = j.value("epsilon", 0.0);
    t.theta = j.value("theta", 0.0);
    if (j.contains("gamma")) t.gamma = control_from_json(j.at("gamma"), where + ".gamma");
    return t;
}

ordered_json therapy_to_json(const TherapySpec& t) {
    ordered_json j;
    j["phase"] = t.phase;
    j["epsilon"] = t.epsilon;
    j["theta"] = t.theta;
    j["gamma"] = control_to_json(t.gamma);
    return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    cfg.experiment = j.value("experiment", std::string("floquet"));
    static const char* known[] = {"floquet", "perron", "sweep-a", "chrono", "validate"};
    bool ok = false;
    for (const char* k : known) ok = ok || cfg.experiment == k;
    if (!ok) config_error("/experiment", "unknown experiment '" + cfg.experiment + "'");

    if (j.contains("model")) {
        const auto& m = j.at("model");
        cfg.model.type = m.value("type", std::string("one-phase"));
        if (cfg.model.type == "one-phase") {
            cfg.model.K0 = m.value("K0", 2.0);
            cfg.model.a = m.value("a", 1.0);
            if (m.contains("psi")) cfg.model.psi = control_from_json(m.at("psi"), "/model/psi");
            if (m.contains("death")) cfg.model.death = control_from_json(m.at("death"), "/model/death");
        } else if (cfg.model.type == "three-phase") {
            if (m.contains("K")) {
                auto v = m.at("K").get<std::vector<double>>();
                if (v.size() != 3) config_error("/model/K", "need exactly 3 rates");
                std::copy(v.begin(), v.end(), cfg.model.K3.begin());
            }
            if (m.contains("a")) {
                auto v = m.at("a").get<std::vector<double>>();
                if (v.size() != 3) config_error("/model/a", "need exactly 3 ages");
                std::copy(v.begin(), v.end(), cfg.model.a3.begin());
            }
            if (m.contains("psi")) cfg.model.psi = control_from_json(m.at("psi"), "/model/psi");
        } else if (cfg.model.type == "multi-phase") {
            if (!m.contains("phases") || !m.at("phases").is_array() || m.at("phases").empty())
                config_error("/model/phases", "need a nonempty phase array");
            for (std::size_t p = 0; p < m.at("phases").size(); ++p) {
                const auto& pj = m.at("phases")[p];
                const std::string where = "/model/phases/" + std::to_string(p);
                PhaseSpec ps;
                if (!pj.contains("K") || !pj.contains("a"))
                    config_error(where, "each phase needs K and a");
                ps.K = pj.at("K").get<double>();
                ps.a = pj.at("a").get<double>();
                if (pj.contains("psi")) ps.psi = control_from_json(pj.at("psi"), where + "/psi");
                if (pj.contains("death")) ps.death = control_from_json(pj.at("death"), where + "/death");
                cfg.model.phases.push_back(std::move(ps));
            }
        } else {
            config_error("/model/type", "unknown model type '" + cfg.model.type + "'");
        }
    }
    if (j.contains("therapy")) cfg.therapy = therapy_from_json(j.at("therapy"), "/therapy");
    if (j.contains("grid")) {
        cfg.grid.n_time = j.at("grid").value("n_time", cfg.grid.n_time);
        cfg.grid.c_tail = j.at("grid").value("c_tail", cfg.grid.c_tail);
        if (cfg.grid.n_time < 1) config_error("/grid/n_time", "must be >= 1");
        if (!(cfg.grid.c_tail > 0)) config_error("/grid/c_tail", "must be positive");
    }
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        cfg.sweep.a_min = s.value("a_min", cfg.sweep.a_min);
        cfg.sweep.a_max = s.value("a_max", cfg.sweep.a_max);
        cfg.sweep.points = s.value("points", cfg.sweep.points);
        if (!(cfg.sweep.a_min > 0) || !(cfg.sweep.a_max >= cfg.sweep.a_min))
            config_error("/sweep", "need 0 < a_min <= a_max");
        if (cfg.sweep.points < 2) config_error("/sweep/points", "need at least 2 points");
    }
    if (j.contains("chrono")) {
        const auto& c = j.at("chrono");
        cfg.chrono.phase = c.value("phase", cfg.chrono.phase);
        if (c.contains("epsilons")) cfg.chrono.epsilons = c.at("epsilons").get<std::vector<double>>();
        cfg.chrono.theta_points = c.value("theta_points", cfg.chrono.theta_points);
        if (c.contains("gamma")) cfg.chrono.gamma = control_from_json(c.at("gamma"), "/chrono/gamma");
        if (cfg.chrono.theta_points < 4) config_error("/chrono/theta_points", "need at least 4");
        if (cfg.chrono.epsilons.empty()) config_error("/chrono/epsilons", "need at least one amplitude");
    }
    cfg.tolerance = j.value("tolerance", cfg.tolerance);
    cfg.jobs = j.value("jobs", cfg.jobs);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("output")) {
        cfg.output.prefix = j.at("output").value("prefix", cfg.output.prefix);
        cfg.output.format = j.at("output").value("format", cfg.output.format);
        if (cfg.output.format != "csv" && cfg.output.format != "json")
            config_error("/output/format", "must be \"csv\" or \"json\"");
    }
    return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
    ordered_json j;
    j["experiment"] = cfg.experiment;
    ordered_json m;
    m["type"] = cfg.model.type;
    if (cfg.model.type == "one-phase") {
        m["K0"] = cfg.model.K0;
        m["a"] = cfg.model.a;
        m["psi"] = control_to_json(cfg.model.psi);
        if (cfg.model.death) m["death"] = control_to_json(*cfg.model.death);
    } else if (cfg.model.type == "three-phase") {
        m["K"] = cfg.model.K3;
        m["a"] = cfg.model.a3;
        m["psi"] = control_to_json(cfg.model.psi);
    } else {
        ordered_json arr = ordered_json::array();
        for (const PhaseSpec& p : cfg.model.phases) {
            ordered_json pj;
            pj["K"] = p.K;
            pj["a"] = p.a;
            pj["psi"] = control_to_json(p.psi);
            if (p.death) pj["death"] = control_to_json(*p.death);
            arr.push_back(pj);
        }
        m["phases"] = arr;
    }
    j["model"] = m;
    if (cfg.therapy) j["therapy"] = therapy_to_json(*cfg.therapy);
    j["grid"] = {{"n_time", cfg.grid.n_time}, {"c_tail", cfg.grid.c_tail}};
    j["sweep"] = {{"a_min", cfg.sweep.a_min}, {"a_max", cfg.sweep.a_max}, {"points", cfg.sweep.points}};
    j["chrono"] = {{"phase", cfg.chrono.phase},
                   {"epsilons", cfg.chrono.epsilons},
                   {"theta_points", cfg.chrono.theta_points},
                   {"gamma", control_to_json(cfg.chrono.gamma)}};
    j["tolerance"] = cfg.tolerance;
    j["jobs"] = cfg.jobs;
    j["seed"] = cfg.seed;
    j["output"] = {{"prefix", cfg.output.prefix}, {"format", cfg.output.format}};
    return j.dump(2);
}

PeriodicFn build_control(const ControlSpec& spec) {
    return make_control(spec.kind, spec.params);
}

MultiPhaseModel build_model(const ModelSpec& spec, const std::optional<TherapySpec>& therapy) {
    MultiPhaseModel model;
    if (spec.type == "one-phase") {
        OnePhaseModel one{spec.K0, spec.a, make_reference_psi(spec.psi.kind, spec.psi.params),
                          spec.death ? build_control(*spec.death) : PeriodicFn::constant(0.0)};
        model = one.as_multi();
    } else if (spec.type == "three-phase") {
        model = make_shifted_three_phase(spec.K3, spec.a3,
                                         make_reference_psi(spec.psi.kind, spec.psi.params));
    } else if (spec.type == "multi-phase") {
        for (const PhaseSpec& p : spec.phases) {
            model.phases.push_back(Phase{p.K, p.a, make_reference_psi(p.psi.kind, p.psi.params),
                                         p.death ? build_control(*p.death) : PeriodicFn::constant(0.0)});
        }
    } else {
        throw std::invalid_argument("unknown model type '" + spec.type + "'");
    }
    if (therapy) {
        model = model.with_therapy(Therapy{therapy->phase, therapy->epsilon, therapy->theta,
                                           build_control(therapy->gamma)});
    }
    return model;
}

std::string format_full(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

SweepAResult run_sweep_a(const ExperimentConfig& cfg) {
    if (cfg.model.type != "one-phase")
        throw std::invalid_argument("sweep-a requires a one-phase model");
    const PeriodicFn psi = make_reference_psi(cfg.model.psi.kind, cfg.model.psi.params);
    const auto t0 = std::chrono::steady_clock::now();

    SweepAResult result;
    result.rows.resize(cfg.sweep.points);
    const double da = cfg.sweep.points > 1
                          ? (cfg.sweep.a_max - cfg.sweep.a_min) / (cfg.sweep.points - 1)
                          : 0.0;
    PowerOptions popts;
    popts.tol = cfg.tolerance;
    parallel_for(result.rows.size(), cfg.jobs, [&](std::size_t idx) {
        const double a = cfg.sweep.a_min + da * static_cast<double>(idx);
        SweepRow row;
        row.a = a;
        OnePhaseModel one{cfg.model.K0, a, psi};
        const GridSpec grid = GridSpec::for_model(one.as_multi(), cfg.grid.n_time, cfg.grid.c_tail);
        const FloquetSolution sol = floquet_eigen(PropagatorFamily(one.as_multi(), grid), popts);
        row.lambda_F = sol.lambda;
        row.converged = sol.converged;
        row.lambda_P = solve_perron_one_phase(cfg.model.K0, a).lambda;
        row.lambda_g = solve_geometric_one_phase(cfg.model.K0, a, psi).lambda;
        result.rows[idx] = row;
    });

    result.all_converged = true;
    for (const SweepRow& r : result.rows) result.all_converged = result.all_converged && r.converged;
    for (std::size_t i = 0; i + 1 < result.rows.size(); ++i) {
        const double d0 = result.rows[i].lambda_F - result.rows[i].lambda_P;
        const double d1 = result.rows[i + 1].lambda_F - result.rows[i + 1].lambda_P;
        if (d0 == 0.0) {
            result.crossing = result.rows[i].a;
            break;
        }
        if (d0 * d1 < 0.0) {
            const double t = d0 / (d0 - d1);
            result.crossing = result.rows[i].a + t * (result.rows[i + 1].a - result.rows[i].a);
            break;
        }
    }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
}

std::string rows_to_csv(const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& rows) {
    std::string csv;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) csv += ',';
        csv += header[c];
    }
    csv += '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) csv += ',';
            csv += format_full(row[c]);
        }
        csv += '\n';
    }
    return csv;
}

ordered_json meta_common(const ExperimentConfig& cfg, double wall_seconds) {
    ordered_json meta;
    meta["experiment"] = cfg.experiment;
    meta["grid"] = {{"n_time", cfg.grid.n_time}, {"c_tail", cfg.grid.c_tail}};
    meta["tolerance"] = cfg.tolerance;
    meta["wall_seconds"] = wall_seconds;
    meta["config"] = ordered_json::parse(serialize_config(cfg));
    return meta;
}

void emit(const ExperimentConfig& cfg, const std::vector<std::string>& header,
          const std::vector<std::vector<double>>& rows, ordered_json meta, std::ostream& log) {
    const std::string stem = cfg.output.prefix + "_" + cfg.experiment;
    if (cfg.output.format == "csv") {
        write_file(stem + ".csv", rows_to_csv(header, rows));
        log << "wrote " << stem << ".csv (" << rows.size() << " rows)\n";
    } else {
        ordered_json doc = ordered_json::array();
        for (const auto& row : rows) {
            ordered_json obj;
            for (std::size_t c = 0; c < header.size(); ++c) obj[header[c]] = row[c];
            doc.push_back(obj);
        }
        write_file(stem + ".json", doc.dump(2) + "\n");
        log << "wrote " << stem << ".json (" << rows.size() << " rows)\n";
    }
    write_file(cfg.output.prefix + "_meta.json", meta.dump(2) + "\n");
}

int run_floquet_cmd(const ExperimentConfig& cfg, std::ostream& log) {
    const MultiPhaseModel model = build_model(cfg.model, cfg.therapy);
    const GridSpec grid = GridSpec::for_model(model, cfg.grid.n_time, cfg.grid.c_tail);
    PowerOptions popts;
    popts.tol = cfg.tolerance;
    const auto t0 = std::chrono::steady_clock::now();
    const FloquetSolution sol = floquet_eigen(PropagatorFamily(model, grid), popts);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log << "lambda_F = " << format_full(sol.lambda) << "  (rho = " << format_full(sol.rho)
        << ", " << sol.iterations << " iterations, residual " << sol.residual << ")\n";
    ordered_json meta = meta_common(cfg, wall);
    meta["converged"] = sol.converged;
    meta["iterations"] = sol.iterations;
    meta["n_age"] = grid.n_age;
    emit(cfg, {"lambda", "rho", "iterations", "residual"},
         {{sol.lambda, sol.rho, static_cast<double>(sol.iterations), sol.residual}}, meta, log);
    if (!sol.converged) {
        log << "solve did not converge within the iteration budget (residual " << sol.residual
            << ")\n";
        return 1;
    }
    return 0;
}

int run_perron_cmd(const ExperimentConfig& cfg, std::ostream& log) {
    if (cfg.model.type != "one-phase")
        throw std::invalid_argument("perron requires a one-phase model");
    const PeriodicFn psi = make_reference_psi(cfg.model.psi.kind, cfg.model.psi.params);
    const auto t0 = std::chrono::steady_clock::now();
    const PerronResult lp = solve_perron_one_phase(cfg.model.K0, cfg.model.a);
    const PerronResult lg = solve_geometric_one_phase(cfg.model.K0, cfg.model.a, psi);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log << "lambda_P = " << format_full(lp.lambda) << "  lambda_g = " << format_full(lg.lambda)
        << "\n";
    emit(cfg, {"lambda_P", "residual_P", "lambda_g", "residual_g"},
         {{lp.lambda, lp.residual, lg.lambda, lg.residual}}, meta_common(cfg, wall), log);
    return 0;
}

int run_sweep_a_cmd(const ExperimentConfig& cfg, std::ostream& log) {
    const SweepAResult res = run_sweep_a(cfg);
    std::vector<std::vector<double>> rows;
    rows.reserve(res.rows.size());
    for (const SweepRow& r : res.rows)
        rows.push_back({r.a, r.lambda_F, r.lambda_P, r.lambda_g, r.converged ? 1.0 : 0.0});
    ordered_json meta = meta_common(cfg, res.wall_seconds);
    if (res.crossing) {
        meta["crossing_a"] = *res.crossing;
        log << "Floquet/Perron crossing near a = " << format_full(*res.crossing) << "\n";
    }
    emit(cfg, {"a", "lambda_F", "lambda_P", "lambda_g", "converged"}, rows, meta, log);
    if (!res.all_converged) {
        log << "some sweep points did not converge; see the converged column\n";
        return 1;
    }
    return 0;
}

int run_chrono_cmd(const ExperimentConfig& cfg, std::ostream& log) {
    MultiPhaseModel model = build_model(cfg.model, std::nullopt);
    const PeriodicFn gamma = build_control(cfg.chrono.gamma);
    ChronoOptions opts;
    opts.n_time = cfg.grid.n_time;
    opts.c_tail = cfg.grid.c_tail;
    opts.power.tol = cfg.tolerance;
    opts.jobs = cfg.jobs;
    const auto t0 = std::chrono::steady_clock::now();
    const ChronoSweep sweep =
        chrono_sweep(model, gamma, cfg.chrono.phase, cfg.chrono.epsilons, cfg.chrono.theta_points, opts);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::vector<std::vector<double>> rows;
    bool all_ok = true;
    for (std::size_t ie = 0; ie < sweep.epsilons.size(); ++ie)
        for (std::size_t it = 0; it < sweep.thetas.size(); ++it) {
            rows.push_back({sweep.epsilons[ie], sweep.thetas[it], sweep.lambda[ie][it],
                            sweep.first_order(ie, it)});
            all_ok = all_ok && sweep.solve_ok[ie * sweep.thetas.size() + it];
        }
    ordered_json meta = meta_common(cfg, wall);
    meta["lambda0"] = sweep.lambda0;
    ordered_json opt = ordered_json::array();
    for (double eps : sweep.epsilons) {
        const OptimumResult o = locate_optimum(sweep, eps);
        ordered_json oj;
        oj["epsilon"] = eps;
        oj["theta_opt"] = o.theta;
        oj["degenerate"] = o.degenerate;
        opt.push_back(oj);
        log << "epsilon = " << eps << ": theta_opt = " << o.theta
            << (o.degenerate ? " (degenerate plateau)" : "") << "\n";
    }
    meta["optima"] = opt;
    emit(cfg, {"epsilon", "theta", "lambda", "lambda_first_order"}, rows, meta, log);
    if (!all_ok) {
        log << "some sweep points did not converge\n";
        return 1;
    }
    return 0;
}

int run_validate_cmd(const ExperimentConfig& cfg, std::ostream& log) {
    const ValidationReport report = run_acceptance(cfg.seed, &log);
    print_report(report, log);
    write_file(cfg.output.prefix + "_validate.json", report_to_json(report));
    log << "wrote " << cfg.output.prefix << "_validate.json\n";
    return report.all_pass() ? 0 : 1;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
    if (cfg.experiment == "floquet") return run_floquet_cmd(cfg, log);
    if (cfg.experiment == "perron") return run_perron_cmd(cfg, log);
    if (cfg.experiment == "sweep-a") return run_sweep_a_cmd(cfg, log);
    if (cfg.experiment == "chrono") return run_chrono_cmd(cfg, log);
    if (cfg.experiment == "validate") return run_validate_cmd(cfg, log);
    throw std::invalid_argument("unknown experiment '" + cfg.experiment + "'");
}

}  // namespace floq
