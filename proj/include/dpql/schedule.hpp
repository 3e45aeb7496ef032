#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dpql/units.hpp"

// Time-dependent controls: the single-molecule trap frequency omega0(t)
// (linear ramps and holds) and the molecular splitting difference delta(t)
// (steps, linear ramps, and a nonlinear arctangent ramp family). Segment
// integrals are analytic so interaction-picture phases are exact.
namespace dpql {

// Piecewise-linear path with exact accumulated integral.
class PiecewiseLinear {
public:
    PiecewiseLinear() = default;
    explicit PiecewiseLinear(double constant) { append_hold(constant, 0.0); }

    void append_hold(double value, double dt) { append_segment(value, value, dt); }
    void append_ramp(double v0, double v1, double dt) { append_segment(v0, v1, dt); }
    void append_ramp_rate(double v0, double v1, double rate) {
        if (rate <= 0.0) throw std::invalid_argument("schedule: ramp rate must be positive");
        append_segment(v0, v1, std::abs(v1 - v0) / rate);
    }

    double duration() const { return t_.empty() ? 0.0 : t_.back(); }
    bool empty() const { return v0_.empty(); }

    double value(double t) const {
        const size_t k = segment_at(t);
        const double dt = t_[k + 1] - t_[k];
        const double x = dt > 0.0 ? (t - t_[k]) / dt : 0.0;
        return v0_[k] + (v1_[k] - v0_[k]) * std::clamp(x, 0.0, 1.0);
    }
    double slope(double t) const {
        const size_t k = segment_at(t);
        const double dt = t_[k + 1] - t_[k];
        return dt > 0.0 ? (v1_[k] - v0_[k]) / dt : 0.0;
    }
    // integral of value over [0, t]
    double integral(double t) const {
        const size_t k = segment_at(t);
        const double dt = t_[k + 1] - t_[k];
        const double x = dt > 0.0 ? std::clamp((t - t_[k]) / dt, 0.0, 1.0) : 0.0;
        const double local = dt * (v0_[k] * x + 0.5 * (v1_[k] - v0_[k]) * x * x);
        return acc_[k] + local;
    }
    size_t segment_count() const { return v0_.size(); }
    void segment(size_t k, double& t0, double& t1, double& v0, double& v1) const {
        t0 = t_[k]; t1 = t_[k + 1]; v0 = v0_[k]; v1 = v1_[k];
    }

private:
    void append_segment(double v0, double v1, double dt) {
        if (dt < 0.0) throw std::invalid_argument("schedule: negative segment duration");
        if (t_.empty()) t_.push_back(0.0);
        const double t0 = t_.back();
        acc_.push_back(acc_.empty() ? 0.0 : acc_.back() + last_area_);
        t_.push_back(t0 + dt);
        v0_.push_back(v0);
        v1_.push_back(v1);
        last_area_ = 0.5 * (v0 + v1) * dt;
    }
    size_t segment_at(double t) const {
        if (v0_.empty()) throw std::logic_error("schedule: empty path");
        if (t <= 0.0) return 0;
        // linear scan; schedules have a handful of segments
        for (size_t k = 0; k + 1 < t_.size(); ++k)
            if (t < t_[k + 1]) return k;
        return v0_.size() - 1;
    }
    std::vector<double> t_, v0_, v1_, acc_;
    double last_area_ = 0.0;
};

// Nonlinear splitting ramp delta(t) = 2 J tan(atan(delta0/2J) - (c J / 2) t):
// solves d(delta)/dt = -c (J^2 + delta^2/4), fast in the wings and slowest at
// the crossing, where the rate is c J^2.
struct TanRamp {
    double J = 0.0;       // rad/s reference coupling
    double c = 1.0;       // dimensionless adiabaticity, local rate = c (J^2 + delta^2/4)
    double delta0 = 0.0;  // rad/s, ramp runs from +delta0 to -delta0

    double duration() const { return 4.0 * std::atan(delta0 / (2.0 * J)) / (c * J); }
    double value(double t) const {
        const double a0 = std::atan(delta0 / (2.0 * J));
        return 2.0 * J * std::tan(a0 - 0.5 * c * J * t);
    }
    double slope(double t) const {
        const double d = value(t);
        return -c * (J * J + 0.25 * d * d);
    }
    double integral(double t) const {
        const double a0 = std::atan(delta0 / (2.0 * J));
        const double k = 0.5 * c * J;
        return 2.0 * J / k * (std::log(std::abs(std::cos(a0 - k * t))) -
                              std::log(std::abs(std::cos(a0))));
    }
};

// delta(t): piecewise linear by default with an optional tan segment spliced in.
class DeltaPath {
public:
    DeltaPath() = default;
    explicit DeltaPath(double constant) : lin_(constant) {}

    void append_hold(double v, double dt) { require_linear(); lin_.append_hold(v, dt); }
    void append_ramp(double v0, double v1, double dt) { require_linear(); lin_.append_ramp(v0, v1, dt); }
    void append_ramp_rate(double v0, double v1, double rate) {
        require_linear();
        lin_.append_ramp_rate(v0, v1, rate);
    }
    // instantaneous step = zero-duration ramp boundary
    void append_step_to(double v, double hold_dt) { require_linear(); lin_.append_hold(v, hold_dt); }
    void set_tan_ramp(const TanRamp& ramp) { tan_ = ramp; use_tan_ = true; }

    bool is_tan() const { return use_tan_; }
    double duration() const { return use_tan_ ? tan_.duration() : lin_.duration(); }
    double value(double t) const { return use_tan_ ? tan_.value(t) : lin_.value(t); }
    double slope(double t) const { return use_tan_ ? tan_.slope(t) : lin_.slope(t); }
    double integral(double t) const { return use_tan_ ? tan_.integral(t) : lin_.integral(t); }
    const PiecewiseLinear& linear() const { return lin_; }

private:
    void require_linear() const {
        if (use_tan_) throw std::logic_error("delta path: tan ramp cannot be mixed with segments");
    }
    PiecewiseLinear lin_;
    TanRamp tan_{};
    bool use_tan_ = false;
};

struct ControlSchedule {
    PiecewiseLinear trap;    // omega0(t), rad/s
    DeltaPath delta;         // splitting difference, rad/s
    double omega0_ref = 0.0; // omega0 at which SystemSpec mode data is quoted
    double duration = 0.0;

    double mode_scale(double t) const {
        const double w = trap.value(t);
        if (w <= 0.0) throw std::runtime_error("schedule: omega0 must stay positive");
        return w / omega0_ref;
    }
    // integral of the scale factor (for mode phases)
    double mode_scale_integral(double t) const { return trap.integral(t) / omega0_ref; }

    static ControlSchedule hold(double omega0, double dt, double delta_const = 0.0) {
        ControlSchedule s;
        s.trap.append_hold(omega0, dt);
        s.delta = DeltaPath(delta_const);
        s.omega0_ref = omega0;
        s.duration = dt;
        return s;
    }
    static ControlSchedule linear_trap_sweep(double w0_start, double w0_end, double rate,
                                             double delta_const = 0.0) {
        ControlSchedule s;
        s.trap.append_ramp_rate(w0_start, w0_end, rate);
        s.omega0_ref = w0_start;
        s.duration = s.trap.duration();
        s.delta = DeltaPath(delta_const);
        return s;
    }
};

} // namespace dpql
