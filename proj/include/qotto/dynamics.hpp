// dynamics.hpp: propagation of the (<H>, <L>, <C>) expectation values
//
// The working medium is a harmonic oscillator with controllable frequency.
// Its generalized Gibbs state is fixed by three expectations
//
//   H = P^2/2 + omega^2 Q^2/2,  L = P^2/2 - omega^2 Q^2/2,  C = omega (QP + PQ)/2
//
// which obey closed linear equations on both branch types:
//
//   adiabat:  d/dt (H, L, C) = omega(t) M(mu) (H, L, C),
//             M(mu) = [[mu, -mu, 0], [-mu, mu, -2], [0, 2, mu]]
//   isochore: dH/dt = -Gamma (H - H_eq),
//             d/dt (L, C) = [[-Gamma, -2 omega], [2 omega, -Gamma]] (L, C)
//
// Every branch is therefore an affine map of (H, L, C). The Casimir
// X = (H^2 - L^2 - C^2) / omega^2 is conserved on adiabats.

#pragma once

#include <Eigen/Dense>

#include "qotto/schedules.hpp"

namespace qotto {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct StateVector {
    double e_h;
    double e_l;
    double e_c;
    double omega;

    // Validating constructor: omega > 0, e_h > 0, Casimir positivity and the
    // ground-state floor e_h >= omega/2, each up to a relative tolerance.
    static StateVector make(double e_h, double e_l, double e_c, double omega);
    // Thermal-family state with L = C = 0 and occupation n.
    static StateVector thermal(double omega, double occupation);
    static StateVector from_vector(const Vec3& v, double omega) { return make(v[0], v[1], v[2], omega); }

    Vec3 vector() const { return {e_h, e_l, e_c}; }
    double casimir() const { return (e_h * e_h - e_l * e_l - e_c * e_c) / (omega * omega); }
};

struct BathSpec {
    double temperature;
    double conductance;  // Gamma = k_down - k_up

    void validate() const;
};

struct Observables {
    double energy;
    double occupation;            // n = E/omega - 1/2
    double casimir;               // X
    double invariant_occupation;  // sqrt(max(X, 0)) - 1/2
    double energy_entropy;        // S(n)
    double von_neumann_entropy;   // S(n~)
};

struct Equilibrium {
    double occupation;
    double energy;
};

// v -> linear * v + offset on the (H, L, C) coordinates.
struct AffineMap {
    Mat3 linear = Mat3::Identity();
    Vec3 offset = Vec3::Zero();

    Vec3 apply(const Vec3& v) const { return linear * v + offset; }
    // (*this) after `first`.
    AffineMap after(const AffineMap& first) const { return {linear * first.linear, linear * first.offset + offset}; }
};

// Thermal-oscillator entropy S(x) = (x+1) ln(x+1) - x ln x, S(0) = 0.
double oscillator_entropy(double occupation);

Equilibrium equilibrium_state(double omega, const BathSpec& bath);

Observables observables(const StateVector& state);

// ---- isochores -------------------------------------------------------------

AffineMap isochore_map(double omega, const BathSpec& bath, double t);
StateVector propagate_isochore(const StateVector& state, const BathSpec& bath, double t);

// ---- closed-form adiabatic maps -------------------------------------------

struct ConstMuResult {
    StateVector state;
    double elapsed;  // (1/mu)(1/omega_0 - 1/omega_1)
};

// Linear part of the constant-mu propagator from omega_start to omega_end.
Mat3 const_mu_map(double omega_start, double omega_end, double mu);
ConstMuResult propagate_adiabat_const_mu(const StateVector& state, double omega_target, double mu);

// Instantaneous change of the spring constant: P^2 and Q are continuous.
Mat3 jump_map(double omega_old, double omega_new);
StateVector apply_frequency_jump(const StateVector& state, double omega_new);

// Constant frequency, decoupled from the baths: (L, C) rotate by 2 omega t.
Mat3 free_segment_map(double omega, double t);
StateVector propagate_free_segment(const StateVector& state, double t);

// ---- numerical adiabats ----------------------------------------------------

struct IntegratorStats {
    long steps = 0;
    long rejected = 0;
};

// Adaptive Dormand-Prince 5(4) integration of the adiabat equations in
// physical time. Piecewise schedules are split at their jumps and the exact
// jump map is applied in between. tol is a relative tolerance in [1e-13, 1e-6].
StateVector propagate_adiabat_numeric(const StateVector& state, const Schedule& schedule, double tol,
                                      IntegratorStats* stats = nullptr);
Mat3 adiabat_map_numeric(const Schedule& schedule, double tol, IntegratorStats* stats = nullptr);

// Phase-space exponential integrator for smooth schedules: steps in
// theta = int omega dt, applies the frozen-mu propagator exactly and the
// variation of mu within a step through a first-order interaction-picture
// correction with exact oscillatory moments. Step size is controlled by step
// doubling. Cost is independent of how many oscillations the schedule spans.
Mat3 adiabat_map_magnus(const Schedule& schedule, double tol, IntegratorStats* stats = nullptr);
StateVector propagate_adiabat_magnus(const StateVector& state, const Schedule& schedule, double tol,
                                     IntegratorStats* stats = nullptr);

// Best available linear map for an adiabat: closed form for const_mu and
// piecewise kinds; for linear/exponential DP45 when the total phase is at most
// 10 rad, the phase-space integrator beyond.
Mat3 adiabat_map(const Schedule& schedule, double tol);
// adiabat_map applied to a state. For piecewise schedules this composes the
// jump and hold operators before touching the state, which keeps frictionless
// protocols exact where chaining the state-level maps loses ~eps C^2.
StateVector propagate_adiabat(const StateVector& state, const Schedule& schedule, double tol);

// P = mu omega (H - L).
double adiabat_power(const StateVector& state, double mu);

}  // namespace qotto
