#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace floq {

enum class ControlKind { Sinusoidal, Square, Peak, Constant, Cos6, Samples };

// A T-periodic nonnegative control, evaluable at arbitrary time.
// Immutable after construction; safe to share across threads.
class PeriodicFn {
  public:
    // psi(t) = 1 + amplitude*cos(2 pi t/T), |amplitude| <= 1, T = 1
    static PeriodicFn sinusoidal(double amplitude = 0.9);
    // two-level wave: hi on [0, T/2), lo on [T/2, T)
    static PeriodicFn square(double hi = 1.9, double lo = 0.1);
    // baseline (1 - height*delta) plus a triangle of the given height
    // rising on [0, delta) and falling on [delta, 2 delta); mean is 1
    static PeriodicFn peak(double height = 3.0, double delta = 0.3);
    static PeriodicFn constant(double value);
    // cos^6(m pi t): one trough per period for m = 1, the half-period
    // variant for m = 2
    static PeriodicFn cos6(int m = 1);
    // piecewise-constant from uniform samples over one period
    static PeriodicFn samples(std::vector<double> values, double period = 1.0);

    double operator()(double t) const;
    double period() const { return period_; }
    ControlKind kind() const { return kind_; }
    const std::vector<double>& params() const { return params_; }
    const std::vector<double>& sample_values() const { return samples_; }

    // f(t - s), same period
    PeriodicFn shifted(double s) const;
    double shift() const { return shift_; }

  private:
    PeriodicFn(ControlKind kind, std::vector<double> params);
    ControlKind kind_;
    double period_ = 1.0;
    double shift_ = 0.0;
    std::vector<double> params_;
    std::vector<double> samples_;
};

inline constexpr std::size_t kQuadratureNodes = std::size_t{1} << 16;

// (1/T) int_0^T f, composite midpoint rule
double arithmetic_mean(const PeriodicFn& f, std::size_t nodes = kQuadratureNodes);

// (1/T) int_0^T f^2
double second_moment(const PeriodicFn& f, std::size_t nodes = kQuadratureNodes);

// exp((1/T) int_0^T log f); throws std::domain_error on a non-positive sample
double geometric_mean(const PeriodicFn& f, std::size_t nodes = kQuadratureNodes);

// Reference controls; kind is one of "sin", "square", "peak", "constant",
// "cos6", "samples". Empty params give the reference parameterization.
// Controls used as psi are validated to have unit arithmetic mean.
PeriodicFn make_reference_psi(const std::string& kind, const std::vector<double>& params = {});

// Any nonnegative control (drug profiles, death rates); same kinds, no
// unit-mean requirement.
PeriodicFn make_control(const std::string& kind, const std::vector<double>& params = {});

std::string control_kind_name(ControlKind kind);

}  // namespace floq
