#include "floq/periodic_fn.hpp"

#include <cmath>
#include <stdexcept>

namespace floq {

namespace {

double wrap_unit(double t, double period) {
    double u = t / period;
    u -= std::floor(u);
    if (u >= 1.0) u = 0.0;  // guard against floor rounding at exact periods
    return u;
}

}  // namespace

PeriodicFn::PeriodicFn(ControlKind kind, std::vector<double> params)
    : kind_(kind), params_(std::move(params)) {}

PeriodicFn PeriodicFn::sinusoidal(double amplitude) {
    if (!(std::abs(amplitude) <= 1.0))
        throw std::invalid_argument("sinusoidal control: |amplitude| must be <= 1 for nonnegativity");
    return PeriodicFn(ControlKind::Sinusoidal, {amplitude});
}

PeriodicFn PeriodicFn::square(double hi, double lo) {
    if (!(hi >= 0.0) || !(lo >= 0.0))
        throw std::invalid_argument("square control: levels must be nonnegative");
    return PeriodicFn(ControlKind::Square, {hi, lo});
}

PeriodicFn PeriodicFn::peak(double height, double delta) {
    if (!(height > 0.0) || !(delta > 0.0) || !(2.0 * delta <= 1.0))
        throw std::invalid_argument("peak control: need height > 0 and 0 < 2*delta <= 1");
    if (!(height * delta < 1.0))
        throw std::invalid_argument("peak control: height*delta must be < 1 so the baseline stays positive");
    return PeriodicFn(ControlKind::Peak, {height, delta});
}

PeriodicFn PeriodicFn::constant(double value) {
    if (!(value >= 0.0)) throw std::invalid_argument("constant control: value must be nonnegative");
    return PeriodicFn(ControlKind::Constant, {value});
}

PeriodicFn PeriodicFn::cos6(int m) {
    if (m < 1) throw std::invalid_argument("cos6 control: frequency index must be >= 1");
    return PeriodicFn(ControlKind::Cos6, {static_cast<double>(m)});
}

PeriodicFn PeriodicFn::samples(std::vector<double> values, double period) {
    if (values.empty()) throw std::invalid_argument("sampled control: need at least one sample");
    if (!(period > 0.0)) throw std::invalid_argument("sampled control: period must be positive");
    for (double v : values)
        if (!(v >= 0.0)) throw std::invalid_argument("sampled control: samples must be nonnegative");
    PeriodicFn f(ControlKind::Samples, {});
    f.period_ = period;
    f.samples_ = std::move(values);
    return f;
}

double PeriodicFn::operator()(double t) const {
    const double u = wrap_unit(t - shift_, period_);
    switch (kind_) {
        case ControlKind::Sinusoidal:
            return 1.0 + params_[0] * std::cos(2.0 * M_PI * u);
        case ControlKind::Square:
            return u < 0.5 ? params_[0] : params_[1];
        case ControlKind::Peak: {
            const double h = params_[0], d = params_[1];
            double tri = 0.0;
            if (u < d)
                tri = h * u / d;
            else if (u < 2.0 * d)
                tri = 2.0 * h - h * u / d;
            return (1.0 - h * d) + tri;
        }
        case ControlKind::Constant:
            return params_[0];
        case ControlKind::Cos6: {
            const double c = std::cos(params_[0] * M_PI * u);
            const double c2 = c * c;
            return c2 * c2 * c2;
        }
        case ControlKind::Samples: {
            auto idx = static_cast<std::size_t>(u * static_cast<double>(samples_.size()));
            if (idx >= samples_.size()) idx = samples_.size() - 1;
            return samples_[idx];
        }
    }
    return 0.0;
}

PeriodicFn PeriodicFn::shifted(double s) const {
    PeriodicFn f = *this;
    f.shift_ += s;
    return f;
}

double arithmetic_mean(const PeriodicFn& f, std::size_t nodes) {
    const double dt = f.period() / static_cast<double>(nodes);
    double acc = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) acc += f((static_cast<double>(j) + 0.5) * dt);
    return acc / static_cast<double>(nodes);
}

double second_moment(const PeriodicFn& f, std::size_t nodes) {
    const double dt = f.period() / static_cast<double>(nodes);
    double acc = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) {
        const double v = f((static_cast<double>(j) + 0.5) * dt);
        acc += v * v;
    }
    return acc / static_cast<double>(nodes);
}

double geometric_mean(const PeriodicFn& f, std::size_t nodes) {
    const double dt = f.period() / static_cast<double>(nodes);
    double acc = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) {
        const double v = f((static_cast<double>(j) + 0.5) * dt);
        if (!(v > 0.0)) throw std::domain_error("geometric_mean: control is not strictly positive");
        acc += std::log(v);
    }
    return std::exp(acc / static_cast<double>(nodes));
}

PeriodicFn make_control(const std::string& kind, const std::vector<double>& params) {
    if (kind == "sin" || kind == "sinusoidal")
        return params.empty() ? PeriodicFn::sinusoidal() : PeriodicFn::sinusoidal(params.at(0));
    if (kind == "square" || kind == "sq") {
        if (params.empty()) return PeriodicFn::square();
        if (params.size() != 2) throw std::invalid_argument("square control: need [hi, lo]");
        return PeriodicFn::square(params[0], params[1]);
    }
    if (kind == "peak" || kind == "pk") {
        if (params.empty()) return PeriodicFn::peak();
        if (params.size() != 2) throw std::invalid_argument("peak control: need [height, delta]");
        return PeriodicFn::peak(params[0], params[1]);
    }
    if (kind == "constant")
        return PeriodicFn::constant(params.empty() ? 1.0 : params.at(0));
    if (kind == "cos6")
        return PeriodicFn::cos6(params.empty() ? 1 : static_cast<int>(params.at(0)));
    if (kind == "samples")
        return PeriodicFn::samples(params);
    throw std::invalid_argument("unknown control kind '" + kind + "'");
}

PeriodicFn make_reference_psi(const std::string& kind, const std::vector<double>& params) {
    PeriodicFn psi = make_control(kind, params);
    const double mean = arithmetic_mean(psi);
    if (std::abs(mean - 1.0) > 1e-9)
        throw std::invalid_argument("reference psi '" + kind + "' has mean " + std::to_string(mean) +
                                    ", controls on the division rate must average to 1");
    return psi;
}

std::string control_kind_name(ControlKind kind) {
    switch (kind) {
        case ControlKind::Sinusoidal: return "sin";
        case ControlKind::Square: return "square";
        case ControlKind::Peak: return "peak";
        case ControlKind::Constant: return "constant";
        case ControlKind::Cos6: return "cos6";
        case ControlKind::Samples: return "samples";
    }
    return "?";
}

}  // namespace floq
