// schedules.hpp: frequency protocols omega(t) for the adiabatic branches
//
// Natural units throughout (hbar = k_B = m = 1). The adiabatic parameter is
// mu = d(omega)/dt / omega^2; mu < 0 on expansion, mu > 0 on compression.
//
// Smooth kinds (const_mu, linear, exponential) are described both in physical
// time t and in the accumulated phase theta = int omega dt, which is the
// natural variable of the (H, L, C) equations of motion. Piecewise kinds
// (three_jump, piecewise_const) are sequences of instantaneous jumps and
// constant-frequency holds; the jumps are explicit, never smoothed.

#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace qotto {

enum class ScheduleKind { const_mu, linear, exponential, three_jump, piecewise_const };

std::string_view to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(std::string_view name);

// One constant-frequency hold of a piecewise schedule.
struct Segment {
    double omega;
    double tau;
};

struct FrequencyPoint {
    double omega;
    double mu;
};

class Schedule {
public:
    // Placeholder: zero-duration schedule at omega = 1.
    Schedule() = default;

    // Duration is derived: (1/mu)(1/omega_start - 1/omega_end).
    static Schedule const_mu(double omega_start, double omega_end, double mu);
    // Constant-mu schedule taking the given time (mu derived from the duration).
    static Schedule const_mu_with_duration(double omega_start, double omega_end, double duration);
    static Schedule linear(double omega_start, double omega_end, double duration);
    static Schedule exponential(double omega_start, double omega_end, double duration);
    // Jump to segments[0].omega at t = 0, hold, jump to segments[1].omega, ...,
    // and finally jump to omega_end at t = duration.
    static Schedule piecewise_const(double omega_start, double omega_end, std::vector<Segment> segments);
    // Minimum-time frictionless bang-bang protocol. For omega_start > omega_end
    // (expansion) the holds are (omega_end, tau_1) then (omega_start, tau_2);
    // compression uses the mirrored order.
    static Schedule three_jump(double omega_start, double omega_end);

    ScheduleKind kind() const { return kind_; }
    double omega_start() const { return omega_start_; }
    double omega_end() const { return omega_end_; }
    double duration() const { return duration_; }

    bool is_piecewise() const {
        return kind_ == ScheduleKind::three_jump || kind_ == ScheduleKind::piecewise_const;
    }
    bool is_expansion() const { return omega_end_ < omega_start_; }

    // const_mu only.
    double mu() const;
    // exponential only: omega(t) = omega_start * exp(alpha t).
    double alpha() const;
    // Piecewise kinds only.
    std::span<const Segment> segments() const { return segments_; }

    // omega(t) and mu(t) for 0 <= t <= duration. Piecewise kinds report mu = 0
    // inside holds; omega(0) and omega(duration) are the one-sided endpoint
    // values omega_start / omega_end.
    FrequencyPoint evaluate(double t) const;

    // Times of the instantaneous jumps (piecewise kinds), including 0 and the
    // duration when the corresponding jump is non-trivial.
    std::vector<double> jump_times() const;

    // Smooth kinds: theta(duration), and omega / mu as functions of theta.
    double total_phase() const;
    double omega_at_phase(double theta) const;
    double mu_at_phase(double theta) const;
    double phase_at(double t) const;

    // Time-reversed protocol omega'(t) = omega(duration - t).
    Schedule reversed() const;

private:
    ScheduleKind kind_{ScheduleKind::linear};
    double omega_start_{1.0};
    double omega_end_{1.0};
    double duration_{0.0};
    double mu_{0.0};
    double alpha_{0.0};
    std::vector<Segment> segments_;
};

// Frictionless constant-mu point for compression ratio C = omega_h / omega_c > 1.
struct CriticalPoint {
    double mu_star;           // in (-2, 0)
    double tau_omega_h;       // tau* times omega_h: (1 - C) / mu*

    double tau_star(double omega_h) const { return tau_omega_h / omega_h; }
};

CriticalPoint critical_mu(double compression_ratio);

struct ThreeJumpTimes {
    double tau_1;  // hold at omega_c
    double tau_2;  // hold at omega_h
    double total() const { return tau_1 + tau_2; }
};

ThreeJumpTimes three_jump_times(double omega_h, double omega_c);

// Expansion three-jump schedule omega_h -> omega_c.
Schedule build_three_jump(double omega_h, double omega_c);

}  // namespace qotto
