#include "qotto/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "algebra.hpp"

namespace qotto {

using detail::AlgebraElement;
using detail::exp_algebra;

namespace {

constexpr double kStateTol = 1e-8;

double max_abs(const Vec3& v) { return v.cwiseAbs().maxCoeff(); }
double max_abs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }

void require_tol(double tol) {
    if (!(tol >= 1e-13 && tol <= 1e-6)) throw std::invalid_argument("integrator tolerance must lie in [1e-13, 1e-6]");
}

// Adiabat generator omega * M(mu) acting on (H, L, C).
Mat3 adiabat_generator(double omega, double mu) {
    Mat3 m;
    m << mu, -mu, 0.0,
        -mu, mu, -2.0,
        0.0, 2.0, mu;
    return omega * m;
}

// ---- Dormand-Prince 5(4) ----------------------------------------------------

template <class Y, class Rhs>
Y dopri5(Rhs&& rhs, Y y, double t0, double t1, double tol, IntegratorStats* stats) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                            e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;
    constexpr long kMaxSteps = 20'000'000;

    const double span = t1 - t0;
    if (span <= 0.0) return y;

    double t = t0;
    Y k1 = rhs(t, y);
    const double scale = std::max(max_abs(y), 1e-300);
    double h = std::min(span, 0.01 * scale / std::max(max_abs(k1), 1e-300));
    h = std::max(h, span * 1e-12);
    long steps = 0, rejected = 0;

    while (t < t1) {
        if (t + h > t1) h = t1 - t;
        const Y k2 = rhs(t + c2 * h, Y(y + h * (a21 * k1)));
        const Y k3 = rhs(t + c3 * h, Y(y + h * (a31 * k1 + a32 * k2)));
        const Y k4 = rhs(t + c4 * h, Y(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
        const Y k5 = rhs(t + c5 * h, Y(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
        const Y k6 = rhs(t + h, Y(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
        const Y y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Y k7 = rhs(t + h, y_new);
        const Y err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double ref = std::max({max_abs(y), max_abs(y_new), 1e-300});
        const double ratio = max_abs(err) / (tol * ref);
        if (ratio <= 1.0) {
            t = (t1 - t <= h) ? t1 : t + h;
            y = y_new;
            k1 = k7;
            ++steps;
        } else {
            ++rejected;
        }
        const double factor = ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
        h *= factor;
        if (h < 1e-14 * std::max(std::abs(t), span) && t < t1)
            throw std::runtime_error("adiabat integrator: step size underflow (stiff or singular schedule)");
        if (steps + rejected > kMaxSteps) throw std::runtime_error("adiabat integrator: step budget exhausted");
    }
    if (stats) {
        stats->steps += steps;
        stats->rejected += rejected;
    }
    return y;
}

template <class Y>
Y integrate_numeric(const Schedule& schedule, Y y, double tol, IntegratorStats* stats) {
    if (schedule.is_piecewise()) {
        double omega = schedule.omega_start();
        for (const auto& seg : schedule.segments()) {
            y = jump_map(omega, seg.omega) * y;
            omega = seg.omega;
            const Mat3 gen = adiabat_generator(omega, 0.0);
            y = dopri5([&](double, const Y& v) -> Y { return gen * v; }, y, 0.0, seg.tau, tol, stats);
        }
        return jump_map(omega, schedule.omega_end()) * y;
    }
    if (schedule.duration() == 0.0) return jump_map(schedule.omega_start(), schedule.omega_end()) * y;
    const double tau = schedule.duration();
    auto rhs = [&](double t, const Y& v) -> Y {
        const auto p = schedule.evaluate(std::clamp(t, 0.0, tau));
        return adiabat_generator(p.omega, p.mu) * v;
    };
    return dopri5(rhs, y, 0.0, tau, tol, stats);
}

// ---- phase-space exponential integrator ------------------------------------

constexpr std::array<double, 5> kGaussNodes = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                               0.8650633666889845, 0.9739065285171717};
constexpr std::array<double, 5> kGaussWeights = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                                 0.1494513491505806, 0.0666713443086881};

// Moments over [0, h] of s^k, s^k Cm(s) and s^k S(s), k = 0..2, where
// S(s) = s sinhc(s^2 W) and Cm(s) = s^2 coshc(s^2 W), W = mu^2 - 4.
struct Moments {
    std::array<double, 3> plain;
    std::array<double, 3> cm;
    std::array<double, 3> sn;
};

Moments rotation_moments(double big_w, double h) {
    Moments m{};
    for (int k = 0; k < 3; ++k) m.plain[k] = std::pow(h, k + 1) / (k + 1);
    const double w = big_w < 0.0 ? std::sqrt(-big_w) : 0.0;
    if (big_w < 0.0 && w * h > 4.0) {
        // J_k = int_0^h s^k e^{i w s} ds by upward recursion.
        const std::complex<double> iw(0.0, w);
        const std::complex<double> eh = std::exp(std::complex<double>(0.0, w * h));
        std::complex<double> j = (eh - 1.0) / iw;
        double hk = 1.0;
        for (int k = 0; k < 3; ++k) {
            if (k > 0) {
                hk *= h;
                j = (hk * eh) / iw - (static_cast<double>(k) / iw) * j;
            }
            m.sn[k] = j.imag() / w;
            m.cm[k] = (m.plain[k] - j.real()) / (w * w);
        }
        return m;
    }
    m.cm = {0.0, 0.0, 0.0};
    m.sn = {0.0, 0.0, 0.0};
    const double half = 0.5 * h;
    for (std::size_t i = 0; i < kGaussNodes.size(); ++i) {
        for (double sign : {-1.0, 1.0}) {
            const double s = half + sign * half * kGaussNodes[i];
            const double wt = half * kGaussWeights[i];
            const double l2 = s * s * big_w;
            const double sv = s * detail::sinhc(l2);
            const double cv = s * s * detail::coshc(l2);
            double sk = 1.0;
            for (int k = 0; k < 3; ++k) {
                m.sn[k] += wt * sk * sv;
                m.cm[k] += wt * sk * cv;
                sk *= s;
            }
        }
    }
    return m;
}

// Propagator of dw/dtheta = (mu(theta) E + 2F) w over a step of length h,
// given mu at the start, midpoint and end of the step.
Mat3 phase_step(double mu0, double mum, double mu1, double h) {
    const double a = mum;
    constexpr double b = 2.0;
    const double p0 = mu0 - mum;
    const double p1 = mu1 - mum;
    // delta_mu(s) = d0 + d1 s + d2 s^2 through (0, p0), (h/2, 0), (h, p1).
    const double d0 = p0;
    const double d1 = -(3.0 * p0 + p1) / h;
    const double d2 = 2.0 * (p0 + p1) / (h * h);
    const std::array<double, 3> d = {d0, d1, d2};

    const Mat3 frozen = exp_algebra({a * h, b * h, 0.0});
    if (p0 == 0.0 && p1 == 0.0) return frozen;

    const Moments m = rotation_moments(a * a - b * b, h);
    double x = 0.0, y = 0.0, z = 0.0;
    for (int k = 0; k < 3; ++k) {
        x += d[k] * (m.plain[k] - b * b * m.cm[k]);
        y += -a * b * d[k] * m.cm[k];
        z += b * d[k] * m.sn[k];
    }
    return frozen * exp_algebra({x, y, z});
}

Mat3 rotation(double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    Mat3 m;
    m << 1.0, 0.0, 0.0,
        0.0, c, -s,
        0.0, s, c;
    return m;
}

}  // namespace

// ---- state and observables -------------------------------------------------

StateVector StateVector::make(double e_h, double e_l, double e_c, double omega) {
    if (!(omega > 0.0) || !std::isfinite(omega)) throw std::invalid_argument("state frequency must be positive");
    if (!std::isfinite(e_h) || !std::isfinite(e_l) || !std::isfinite(e_c))
        throw std::invalid_argument("state expectations must be finite");
    if (!(e_h > 0.0)) throw std::invalid_argument("state energy must be positive");
    const double gap = e_h * e_h - e_l * e_l - e_c * e_c;
    if (gap < -kStateTol * e_h * e_h)
        throw std::invalid_argument("state violates Casimir positivity: H^2 < L^2 + C^2");
    if (e_h < 0.5 * omega * (1.0 - kStateTol))
        throw std::invalid_argument("state energy " + std::to_string(e_h) + " below the ground-state floor " +
                                    std::to_string(0.5 * omega));
    return {e_h, e_l, e_c, omega};
}

StateVector StateVector::thermal(double omega, double occupation) {
    if (!(occupation >= 0.0)) throw std::invalid_argument("occupation must be non-negative");
    return make(omega * (occupation + 0.5), 0.0, 0.0, omega);
}

void BathSpec::validate() const {
    if (!(temperature > 0.0) || !std::isfinite(temperature))
        throw std::invalid_argument("bath temperature must be positive and finite");
    if (!(conductance > 0.0) || !std::isfinite(conductance))
        throw std::invalid_argument("bath conductance must be positive and finite");
}

double oscillator_entropy(double x) {
    if (x <= 0.0) return 0.0;
    return (x + 1.0) * std::log1p(x) - x * std::log(x);
}

Equilibrium equilibrium_state(double omega, const BathSpec& bath) {
    if (!(omega > 0.0)) throw std::invalid_argument("frequency must be positive");
    bath.validate();
    const double x = omega / bath.temperature;
    if (x > 700.0) return {0.0, 0.5 * omega};
    const double n = 1.0 / std::expm1(x);
    return {n, omega * (n + 0.5)};
}

Observables observables(const StateVector& s) {
    Observables o{};
    o.energy = s.e_h;
    o.occupation = s.e_h / s.omega - 0.5;
    o.casimir = s.casimir();
    o.invariant_occupation = std::sqrt(std::max(o.casimir, 0.0)) - 0.5;
    o.energy_entropy = oscillator_entropy(std::max(o.occupation, 0.0));
    o.von_neumann_entropy = oscillator_entropy(std::max(o.invariant_occupation, 0.0));
    return o;
}

// ---- isochores -------------------------------------------------------------

AffineMap isochore_map(double omega, const BathSpec& bath, double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("isochore duration must be non-negative");
    const auto eq = equilibrium_state(omega, bath);
    const double decay = std::exp(-bath.conductance * t);
    AffineMap map;
    map.linear = decay * rotation(2.0 * omega * t);
    map.offset = {-std::expm1(-bath.conductance * t) * eq.energy, 0.0, 0.0};
    return map;
}

StateVector propagate_isochore(const StateVector& state, const BathSpec& bath, double t) {
    return StateVector::from_vector(isochore_map(state.omega, bath, t).apply(state.vector()), state.omega);
}

// ---- closed-form adiabats --------------------------------------------------

Mat3 const_mu_map(double omega_start, double omega_end, double mu) {
    if (!(omega_start > 0.0) || !(omega_end > 0.0)) throw std::invalid_argument("frequencies must be positive");
    if (mu == 0.0 || !std::isfinite(mu))
        throw std::invalid_argument("const-mu propagator needs finite mu != 0; use the free-segment map for mu = 0");
    if (omega_end != omega_start && ((omega_end < omega_start) != (mu < 0.0)))
        throw std::invalid_argument("sign of mu does not match the direction omega_start -> omega_end");
    const double theta = std::log(omega_end / omega_start) / mu;
    return (omega_end / omega_start) * exp_algebra({mu * theta, 2.0 * theta, 0.0});
}

ConstMuResult propagate_adiabat_const_mu(const StateVector& state, double omega_target, double mu) {
    const Mat3 u = const_mu_map(state.omega, omega_target, mu);
    const double elapsed = (1.0 / state.omega - 1.0 / omega_target) / mu;
    return {StateVector::from_vector(u * state.vector(), omega_target), elapsed};
}

Mat3 jump_map(double omega_old, double omega_new) {
    if (!(omega_old > 0.0) || !(omega_new > 0.0)) throw std::invalid_argument("jump frequencies must be positive");
    const double r = omega_new / omega_old;
    const double s = r * r;
    Mat3 m;
    m << 0.5 * (1.0 + s), 0.5 * (1.0 - s), 0.0,
        0.5 * (1.0 - s), 0.5 * (1.0 + s), 0.0,
        0.0, 0.0, r;
    return m;
}

StateVector apply_frequency_jump(const StateVector& state, double omega_new) {
    return StateVector::from_vector(jump_map(state.omega, omega_new) * state.vector(), omega_new);
}

Mat3 free_segment_map(double omega, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("free segment duration must be non-negative");
    return rotation(2.0 * omega * t);
}

StateVector propagate_free_segment(const StateVector& state, double t) {
    return StateVector::from_vector(free_segment_map(state.omega, t) * state.vector(), state.omega);
}

// ---- numerical adiabats ----------------------------------------------------

StateVector propagate_adiabat_numeric(const StateVector& state, const Schedule& schedule, double tol,
                                      IntegratorStats* stats) {
    require_tol(tol);
    if (state.omega != schedule.omega_start())
        throw std::invalid_argument("state frequency does not match the schedule start");
    const Vec3 v = integrate_numeric(schedule, state.vector(), tol, stats);
    return StateVector::from_vector(v, schedule.omega_end());
}

Mat3 adiabat_map_numeric(const Schedule& schedule, double tol, IntegratorStats* stats) {
    require_tol(tol);
    return integrate_numeric(schedule, Mat3(Mat3::Identity()), tol, stats);
}

Mat3 adiabat_map_magnus(const Schedule& schedule, double tol, IntegratorStats* stats) {
    require_tol(tol);
    if (schedule.is_piecewise()) throw std::invalid_argument("phase-space integrator handles smooth schedules only");
    if (schedule.duration() == 0.0) return jump_map(schedule.omega_start(), schedule.omega_end());

    // Expansions are stepped in remaining phase, measured from the
    // low-frequency end, so omega(theta) near omega_c carries no cancellation.
    const bool expansion = schedule.is_expansion();
    const Schedule mirror = expansion ? schedule.reversed() : schedule;
    const double total = mirror.total_phase();
    const double dir = expansion ? -1.0 : 1.0;
    auto mu_at = [&](double pos) { return expansion ? -mirror.mu_at_phase(pos) : mirror.mu_at_phase(pos); };

    Mat3 phi = Mat3::Identity();
    double pos = expansion ? total : 0.0;
    const double end = expansion ? 0.0 : total;
    double h = std::min(total, 0.5);
    long steps = 0, rejected = 0;
    while (pos != end) {
        double next = pos + dir * h;
        if ((expansion && next <= end) || (!expansion && next >= end)) next = end;
        const double step = std::abs(next - pos);
        const double q1 = pos + dir * 0.25 * step;
        const double mid = pos + dir * 0.5 * step;
        const double q3 = pos + dir * 0.75 * step;
        const double m0 = mu_at(pos), m1 = mu_at(q1), m2 = mu_at(mid), m3 = mu_at(q3), m4 = mu_at(next);
        if (!std::isfinite(m0 + m1 + m2 + m3 + m4))
            throw std::runtime_error("phase-space integrator: non-finite mu along the schedule");

        const Mat3 full = phase_step(m0, m2, m4, step);
        const Mat3 halves = phase_step(m2, m3, m4, 0.5 * step) * phase_step(m0, m1, m2, 0.5 * step);
        const Mat3 candidate = halves * phi;
        const double err = max_abs(Mat3((full - halves) * phi)) / std::max(max_abs(candidate), 1e-300);
        if (!std::isfinite(err)) {
            ++rejected;
            h = 0.2 * step;
        } else if (err <= tol) {
            phi = candidate;
            pos = next;
            ++steps;
        } else {
            ++rejected;
        }
        if (std::isfinite(err)) h = step * (err == 0.0 ? 4.0 : std::clamp(0.8 * std::cbrt(tol / err), 0.2, 4.0));
        if (h < 1e-15 * std::max(total, 1.0))
            throw std::runtime_error("phase-space integrator: step size underflow");
        if (steps + rejected > 2'000'000) throw std::runtime_error("phase-space integrator: step budget exhausted");
    }
    if (stats) {
        stats->steps += steps;
        stats->rejected += rejected;
    }
    return (schedule.omega_end() / schedule.omega_start()) * phi;
}

StateVector propagate_adiabat_magnus(const StateVector& state, const Schedule& schedule, double tol,
                                     IntegratorStats* stats) {
    if (state.omega != schedule.omega_start())
        throw std::invalid_argument("state frequency does not match the schedule start");
    return StateVector::from_vector(adiabat_map_magnus(schedule, tol, stats) * state.vector(), schedule.omega_end());
}

namespace {

// Jumps and holds composed as 2x2 SL(2,R) factors acting on
// [[H + L, C], [C, H - L]]. Multiplying the 3x3 matrices directly loses
// about eps * (omega_h / omega_c)^2 to cancellation; this loses eps * ratio.
Mat3 piecewise_map(const Schedule& schedule) {
    using Mat2 = Eigen::Matrix2d;
    Mat2 g = Mat2::Identity();
    auto jump = [&](double from, double to) {
        if (from == to) return;
        const double q = std::sqrt(to / from);
        g.row(0) /= q;
        g.row(1) *= q;
    };
    double omega = schedule.omega_start();
    for (const auto& seg : schedule.segments()) {
        jump(omega, seg.omega);
        const double b = seg.omega * seg.tau;
        Mat2 rot;
        rot << std::cos(b), -std::sin(b), std::sin(b), std::cos(b);
        g = rot * g;
        omega = seg.omega;
    }
    jump(omega, schedule.omega_end());

    const double scale = schedule.omega_end() / schedule.omega_start();
    Mat3 m;
    const std::array<Mat2, 3> basis = {Mat2::Identity(), Mat2{{1.0, 0.0}, {0.0, -1.0}}, Mat2{{0.0, 1.0}, {1.0, 0.0}}};
    for (int k = 0; k < 3; ++k) {
        const Mat2 w = g * basis[k] * g.transpose();
        m.col(k) = scale * Vec3{0.5 * (w(0, 0) + w(1, 1)), 0.5 * (w(0, 0) - w(1, 1)), w(0, 1)};
    }
    return m;
}

}  // namespace

Mat3 adiabat_map(const Schedule& schedule, double tol) {
    switch (schedule.kind()) {
    case ScheduleKind::const_mu: return const_mu_map(schedule.omega_start(), schedule.omega_end(), schedule.mu());
    case ScheduleKind::three_jump:
    case ScheduleKind::piecewise_const: return piecewise_map(schedule);
    case ScheduleKind::linear:
    case ScheduleKind::exponential:
        // Few oscillations: DP45 in t is cheap and also covers the near-sudden
        // regime, where |mu| is huge and the phase-space steps collapse.
        if (schedule.total_phase() <= 10.0) return adiabat_map_numeric(schedule, tol);
        return adiabat_map_magnus(schedule, tol);
    }
    throw std::logic_error("unhandled schedule kind");
}

StateVector propagate_adiabat(const StateVector& state, const Schedule& schedule, double tol) {
    if (state.omega != schedule.omega_start())
        throw std::invalid_argument("state frequency does not match the schedule start");
    return StateVector::from_vector(adiabat_map(schedule, tol) * state.vector(), schedule.omega_end());
}

double adiabat_power(const StateVector& state, double mu) { return mu * state.omega * (state.e_h - state.e_l); }

}  // namespace qotto
