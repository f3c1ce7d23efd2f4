#include "qotto/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qotto {

namespace {

void require_frequency(double omega, const char* what) {
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw std::invalid_argument(std::string(what) + " must be a positive finite frequency");
}

void require_duration(double tau, const char* what) {
    if (!(tau >= 0.0) || !std::isfinite(tau))
        throw std::invalid_argument(std::string(what) + " must be a non-negative finite duration");
}

}  // namespace

std::string_view to_string(ScheduleKind kind) {
    switch (kind) {
    case ScheduleKind::const_mu: return "const_mu";
    case ScheduleKind::linear: return "linear";
    case ScheduleKind::exponential: return "exponential";
    case ScheduleKind::three_jump: return "three_jump";
    case ScheduleKind::piecewise_const: return "piecewise_const";
    }
    return "unknown";
}

ScheduleKind schedule_kind_from_string(std::string_view name) {
    for (auto k : {ScheduleKind::const_mu, ScheduleKind::linear, ScheduleKind::exponential,
                   ScheduleKind::three_jump, ScheduleKind::piecewise_const}) {
        if (to_string(k) == name) return k;
    }
    throw std::invalid_argument("unknown schedule kind '" + std::string(name) + "'");
}

Schedule Schedule::const_mu(double omega_start, double omega_end, double mu) {
    require_frequency(omega_start, "omega_start");
    require_frequency(omega_end, "omega_end");
    if (mu == 0.0 || !std::isfinite(mu))
        throw std::invalid_argument("const_mu schedule needs a finite non-zero mu");
    if (omega_end != omega_start && ((omega_end < omega_start) != (mu < 0.0)))
        throw std::invalid_argument("sign of mu does not match the direction of the frequency change");
    Schedule s;
    s.kind_ = ScheduleKind::const_mu;
    s.omega_start_ = omega_start;
    s.omega_end_ = omega_end;
    s.mu_ = mu;
    s.duration_ = (1.0 / omega_start - 1.0 / omega_end) / mu;
    return s;
}

Schedule Schedule::const_mu_with_duration(double omega_start, double omega_end, double duration) {
    require_duration(duration, "duration");
    if (!(duration > 0.0)) throw std::invalid_argument("const_mu schedule needs a positive duration");
    if (omega_start == omega_end)
        throw std::invalid_argument("const_mu schedule needs distinct endpoint frequencies");
    require_frequency(omega_start, "omega_start");
    require_frequency(omega_end, "omega_end");
    return const_mu(omega_start, omega_end, (1.0 / omega_start - 1.0 / omega_end) / duration);
}

Schedule Schedule::linear(double omega_start, double omega_end, double duration) {
    require_frequency(omega_start, "omega_start");
    require_frequency(omega_end, "omega_end");
    require_duration(duration, "duration");
    Schedule s;
    s.kind_ = ScheduleKind::linear;
    s.omega_start_ = omega_start;
    s.omega_end_ = omega_end;
    s.duration_ = duration;
    return s;
}

Schedule Schedule::exponential(double omega_start, double omega_end, double duration) {
    require_frequency(omega_start, "omega_start");
    require_frequency(omega_end, "omega_end");
    require_duration(duration, "duration");
    Schedule s;
    s.kind_ = ScheduleKind::exponential;
    s.omega_start_ = omega_start;
    s.omega_end_ = omega_end;
    s.duration_ = duration;
    s.alpha_ = duration > 0.0 ? std::log(omega_end / omega_start) / duration : 0.0;
    return s;
}

Schedule Schedule::piecewise_const(double omega_start, double omega_end, std::vector<Segment> segments) {
    require_frequency(omega_start, "omega_start");
    require_frequency(omega_end, "omega_end");
    double total = 0.0;
    for (const auto& seg : segments) {
        require_frequency(seg.omega, "segment omega");
        require_duration(seg.tau, "segment tau");
        total += seg.tau;
    }
    Schedule s;
    s.kind_ = ScheduleKind::piecewise_const;
    s.omega_start_ = omega_start;
    s.omega_end_ = omega_end;
    s.duration_ = total;
    s.segments_ = std::move(segments);
    return s;
}

Schedule Schedule::three_jump(double omega_start, double omega_end) {
    require_frequency(omega_start, "omega_start");
    require_frequency(omega_end, "omega_end");
    const double hi = std::max(omega_start, omega_end);
    const double lo = std::min(omega_start, omega_end);
    const auto times = three_jump_times(hi, lo);
    // First hold sits at the destination frequency, second at the origin.
    const double tau_end = omega_end == lo ? times.tau_1 : times.tau_2;
    const double tau_start = omega_start == hi ? times.tau_2 : times.tau_1;
    Schedule s = piecewise_const(omega_start, omega_end, {{omega_end, tau_end}, {omega_start, tau_start}});
    s.kind_ = ScheduleKind::three_jump;
    return s;
}

double Schedule::mu() const {
    if (kind_ != ScheduleKind::const_mu) throw std::logic_error("mu() is defined for const_mu schedules only");
    return mu_;
}

double Schedule::alpha() const {
    if (kind_ != ScheduleKind::exponential)
        throw std::logic_error("alpha() is defined for exponential schedules only");
    return alpha_;
}

FrequencyPoint Schedule::evaluate(double t) const {
    if (!(t >= 0.0) || t > duration_)
        throw std::out_of_range("schedule time " + std::to_string(t) + " outside [0, " +
                                std::to_string(duration_) + "]");
    switch (kind_) {
    case ScheduleKind::const_mu: {
        const double omega = omega_start_ / (1.0 - mu_ * omega_start_ * t);
        return {t == duration_ ? omega_end_ : omega, mu_};
    }
    case ScheduleKind::linear: {
        if (duration_ == 0.0) return {omega_start_, 0.0};
        const double slope = (omega_end_ - omega_start_) / duration_;
        const double omega = t == duration_ ? omega_end_ : omega_start_ + slope * t;
        return {omega, slope / (omega * omega)};
    }
    case ScheduleKind::exponential: {
        const double omega = t == duration_ ? omega_end_ : omega_start_ * std::exp(alpha_ * t);
        return {omega, alpha_ / omega};
    }
    case ScheduleKind::three_jump:
    case ScheduleKind::piecewise_const: {
        if (t == 0.0) return {omega_start_, 0.0};
        if (t == duration_) return {omega_end_, 0.0};
        double edge = 0.0;
        for (const auto& seg : segments_) {
            edge += seg.tau;
            if (t <= edge) return {seg.omega, 0.0};
        }
        return {segments_.back().omega, 0.0};
    }
    }
    return {omega_start_, 0.0};
}

std::vector<double> Schedule::jump_times() const {
    std::vector<double> out;
    if (!is_piecewise()) return out;
    double prev = omega_start_;
    double t = 0.0;
    for (const auto& seg : segments_) {
        if (seg.omega != prev) out.push_back(t);
        prev = seg.omega;
        t += seg.tau;
    }
    if (omega_end_ != prev) out.push_back(duration_);
    return out;
}

double Schedule::total_phase() const { return phase_at(duration_); }

double Schedule::phase_at(double t) const {
    switch (kind_) {
    case ScheduleKind::const_mu: return -std::log1p(-mu_ * omega_start_ * t) / mu_;
    case ScheduleKind::linear: {
        if (duration_ == 0.0) return 0.0;
        const double slope = (omega_end_ - omega_start_) / duration_;
        return omega_start_ * t + 0.5 * slope * t * t;
    }
    case ScheduleKind::exponential:
        return alpha_ == 0.0 ? omega_start_ * t : omega_start_ * std::expm1(alpha_ * t) / alpha_;
    default: {
        double theta = 0.0;
        double edge = 0.0;
        for (const auto& seg : segments_) {
            const double dt = std::clamp(t - edge, 0.0, seg.tau);
            theta += seg.omega * dt;
            edge += seg.tau;
        }
        return theta;
    }
    }
}

double Schedule::omega_at_phase(double theta) const {
    switch (kind_) {
    case ScheduleKind::const_mu: return omega_start_ * std::exp(mu_ * theta);
    case ScheduleKind::linear: {
        // omega^2 is linear in theta: d(omega^2)/dtheta = 2 d(omega)/dt.
        const double slope = duration_ > 0.0 ? (omega_end_ - omega_start_) / duration_ : 0.0;
        return std::sqrt(std::max(omega_start_ * omega_start_ + 2.0 * slope * theta, 0.0));
    }
    case ScheduleKind::exponential: return omega_start_ + alpha_ * theta;
    default: throw std::logic_error("omega_at_phase is defined for smooth schedules only");
    }
}

double Schedule::mu_at_phase(double theta) const {
    switch (kind_) {
    case ScheduleKind::const_mu: return mu_;
    case ScheduleKind::linear: {
        const double slope = duration_ > 0.0 ? (omega_end_ - omega_start_) / duration_ : 0.0;
        const double omega = omega_at_phase(theta);
        return slope / (omega * omega);
    }
    case ScheduleKind::exponential: return alpha_ / omega_at_phase(theta);
    default: throw std::logic_error("mu_at_phase is defined for smooth schedules only");
    }
}

Schedule Schedule::reversed() const {
    switch (kind_) {
    case ScheduleKind::const_mu: return const_mu(omega_end_, omega_start_, -mu_);
    case ScheduleKind::linear: return linear(omega_end_, omega_start_, duration_);
    case ScheduleKind::exponential: return exponential(omega_end_, omega_start_, duration_);
    case ScheduleKind::three_jump: return three_jump(omega_end_, omega_start_);
    case ScheduleKind::piecewise_const: {
        std::vector<Segment> segs(segments_.rbegin(), segments_.rend());
        return piecewise_const(omega_end_, omega_start_, std::move(segs));
    }
    }
    return *this;
}

CriticalPoint critical_mu(double compression_ratio) {
    if (!(compression_ratio > 1.0) || !std::isfinite(compression_ratio))
        throw std::invalid_argument("critical_mu needs a compression ratio C > 1");
    const double log_c = std::log(compression_ratio);
    const double two_pi = 2.0 * std::numbers::pi;
    const double mu_star = -2.0 * log_c / std::hypot(two_pi, log_c);
    return {mu_star, -std::expm1(log_c) / mu_star};
}

ThreeJumpTimes three_jump_times(double omega_h, double omega_c) {
    require_frequency(omega_h, "omega_h");
    require_frequency(omega_c, "omega_c");
    // arccos((wh^2 + wc^2) / (wh + wc)^2) written as 2 asin(sqrt(wh wc) / (wh + wc)).
    const double ratio = std::clamp(std::sqrt(omega_h * omega_c) / (omega_h + omega_c), 0.0, 1.0);
    const double phi = 2.0 * std::asin(ratio);
    return {phi / (2.0 * omega_c), phi / (2.0 * omega_h)};
}

Schedule build_three_jump(double omega_h, double omega_c) { return Schedule::three_jump(omega_h, omega_c); }

}  // namespace qotto
