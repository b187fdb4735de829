#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "floq/chrono_sweep.hpp"
#include "floq/upwind.hpp"

namespace floq {

struct ControlSpec {
    std::string kind = "constant";
    std::vector<double> params;
    bool operator==(const ControlSpec&) const = default;
};

struct TherapySpec {
    int phase = 1;
    double epsilon = 0.0;
    double theta = 0.0;
    ControlSpec gamma{"cos6", {1.0}};
    bool operator==(const TherapySpec&) const = default;
};

struct PhaseSpec {
    double K = 1.0;
    double a = 0.0;
    ControlSpec psi{"constant", {1.0}};
    std::optional<ControlSpec> death;
    bool operator==(const PhaseSpec&) const = default;
};

// "one-phase": K0, a, psi (+ optional death)
// "three-phase": common psi shifted per phase, K[3], a[3] with sum(a) = 1
// "multi-phase": explicit phases
struct ModelSpec {
    std::string type = "one-phase";
    double K0 = 2.0;
    double a = 1.0;
    ControlSpec psi{"sin", {}};
    std::optional<ControlSpec> death;
    std::array<double, 3> K3{10.0, 10.0, 10.0};
    std::array<double, 3> a3{10.0 / 24, 12.0 / 24, 2.0 / 24};
    std::vector<PhaseSpec> phases;
    bool operator==(const ModelSpec&) const = default;
};

struct GridBlock {
    int n_time = 1024;
    double c_tail = 30.0;
    bool operator==(const GridBlock&) const = default;
};

struct SweepBlock {
    double a_min = 0.85;
    double a_max = 1.15;
    int points = 31;
    bool operator==(const SweepBlock&) const = default;
};

struct ChronoBlock {
    int phase = 2;
    std::vector<double> epsilons{0.1, 0.5, 1.0};
    int theta_points = 64;
    ControlSpec gamma{"cos6", {1.0}};
    bool operator==(const ChronoBlock&) const = default;
};

struct OutputBlock {
    std::string prefix = "floq_out";
    std::string format = "csv";  // csv | json
    bool operator==(const OutputBlock&) const = default;
};

struct ExperimentConfig {
    std::string experiment = "floquet";  // floquet | perron | sweep-a | chrono | validate
    ModelSpec model;
    std::optional<TherapySpec> therapy;
    GridBlock grid;
    SweepBlock sweep;
    ChronoBlock chrono;
    double tolerance = 1e-12;
    int jobs = 0;
    unsigned seed = 12345;
    OutputBlock output;
    bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& json_text);
std::string serialize_config(const ExperimentConfig& cfg);

PeriodicFn build_control(const ControlSpec& spec);
MultiPhaseModel build_model(const ModelSpec& spec, const std::optional<TherapySpec>& therapy);

struct SweepRow {
    double a = 0.0;
    double lambda_F = 0.0;
    double lambda_P = 0.0;
    double lambda_g = 0.0;
    bool converged = false;
};

struct SweepAResult {
    std::vector<SweepRow> rows;
    std::optional<double> crossing;  // sign change of lambda_F - lambda_P
    double wall_seconds = 0.0;
    bool all_converged = false;
};

SweepAResult run_sweep_a(const ExperimentConfig& cfg);

// formats a double with 17 significant digits (lossless round trip)
std::string format_full(double x);

// Dispatches on cfg.experiment, writes <prefix>_<experiment>.csv (or .json)
// plus <prefix>_meta.json, logs one summary line per result. Returns a
// process exit code: 0 only if every requested solve converged (and, for
// validate, every criterion passed).
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace floq
