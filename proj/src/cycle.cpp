#include "qotto/cycle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace qotto {

namespace {

bool same_frequency(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

bool is_reversal(const Schedule& a, const Schedule& b) {
    const bool smooth = a.kind() == ScheduleKind::linear || a.kind() == ScheduleKind::exponential;
    return smooth && b.kind() == a.kind() && a.omega_start() == b.omega_end() && a.omega_end() == b.omega_start() &&
           a.duration() == b.duration();
}

double spectral_radius(const Mat3& m) {
    Eigen::EigenSolver<Mat3> solver(m, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

std::string_view to_string(Branch branch) {
    switch (branch) {
    case Branch::expansion: return "expansion adiabat A->D";
    case Branch::cold_isochore: return "cold isochore D->C";
    case Branch::compression: return "compression adiabat C->B";
    case Branch::hot_isochore: return "hot isochore B->A";
    }
    return "unknown branch";
}

PropagationError::PropagationError(Branch branch, const std::string& message)
    : std::runtime_error(std::string(to_string(branch)) + ": " + message), branch_(branch) {}

NoContractionError::NoContractionError(double rho)
    : std::runtime_error("cycle map does not contract: spectral radius " + std::to_string(rho)), rho_(rho) {}

void CycleSpec::validate() const {
    hot_bath.validate();
    cold_bath.validate();
    if (!(omega_c > 0.0) || !(omega_h > omega_c) || !std::isfinite(omega_h))
        throw std::invalid_argument("cycle needs omega_h > omega_c > 0");
    if (!(tau_c >= 0.0) || !(tau_h >= 0.0) || !std::isfinite(tau_c) || !std::isfinite(tau_h))
        throw std::invalid_argument("isochore durations must be non-negative and finite");
    if (!same_frequency(expansion.omega_start(), omega_h) || !same_frequency(expansion.omega_end(), omega_c))
        throw std::invalid_argument("expansion schedule must run from omega_h to omega_c");
    if (!same_frequency(compression.omega_start(), omega_c) || !same_frequency(compression.omega_end(), omega_h))
        throw std::invalid_argument("compression schedule must run from omega_c to omega_h");
    if (!(ode_tol >= 1e-13 && ode_tol <= 1e-6)) throw std::invalid_argument("ode_tol must lie in [1e-13, 1e-6]");
}

CycleOperator::CycleOperator(const CycleSpec& spec) : spec_(spec) {
    spec_.validate();
    auto build = [&](Branch b, auto&& fn) {
        try {
            maps_[static_cast<int>(b)] = fn();
        } catch (const std::exception& e) {
            throw PropagationError(b, e.what());
        }
    };
    build(Branch::expansion, [&] { return AffineMap{adiabat_map(spec_.expansion, spec_.ode_tol), Vec3::Zero()}; });
    build(Branch::cold_isochore, [&] { return isochore_map(spec_.omega_c, spec_.cold_bath, spec_.tau_c); });
    build(Branch::compression, [&] {
        // A mirrored smooth compression is T * inverse(expansion) * T, T = diag(1, 1, -1).
        if (is_reversal(spec_.expansion, spec_.compression)) {
            const Vec3 t{1.0, 1.0, -1.0};
            const Mat3 inv = maps_[0].linear.inverse();
            return AffineMap{t.asDiagonal() * inv * t.asDiagonal(), Vec3::Zero()};
        }
        return AffineMap{adiabat_map(spec_.compression, spec_.ode_tol), Vec3::Zero()};
    });
    build(Branch::hot_isochore, [&] { return isochore_map(spec_.omega_h, spec_.hot_bath, spec_.tau_h); });
}

Vec3 CycleOperator::propagate(const Vec3& v) const {
    Vec3 out = v;
    for (const auto& m : maps_) out = m.apply(out);
    return out;
}

AffineMap CycleOperator::one_cycle_map() const {
    AffineMap cyc;
    cyc.offset = propagate(Vec3::Zero());
    for (int i = 0; i < 3; ++i) cyc.linear.col(i) = propagate(Vec3::Unit(i)) - cyc.offset;
    return cyc;
}

std::pair<StateVector, CycleRecord> CycleOperator::run(const StateVector& state) const {
    if (!same_frequency(state.omega, spec_.omega_h))
        throw std::invalid_argument("cycle must start at omega_h (point A)");
    static constexpr std::array<Branch, 4> order = {Branch::expansion, Branch::cold_isochore, Branch::compression,
                                                    Branch::hot_isochore};
    const std::array<double, 4> omegas = {spec_.omega_c, spec_.omega_c, spec_.omega_h, spec_.omega_h};
    const std::array<double, 4> durations = {spec_.expansion.duration(), spec_.tau_c, spec_.compression.duration(),
                                             spec_.tau_h};
    CycleRecord rec{
        .branches = {BranchRecord{Branch::expansion, state, state, 0.0, 0.0},
                     BranchRecord{Branch::cold_isochore, state, state, 0.0, 0.0},
                     BranchRecord{Branch::compression, state, state, 0.0, 0.0},
                     BranchRecord{Branch::hot_isochore, state, state, 0.0, 0.0}},
    };
    StateVector current = state;
    for (int i = 0; i < 4; ++i) {
        StateVector next = current;
        try {
            next = StateVector::from_vector(maps_[i].apply(current.vector()), omegas[i]);
        } catch (const std::exception& e) {
            throw PropagationError(order[i], e.what());
        }
        rec.branches[i] = {order[i], current, next, next.e_h - current.e_h, durations[i]};
        current = next;
    }

    const double e_a = state.e_h;
    const double e_d = rec.branches[0].end.e_h;
    const double e_c = rec.branches[1].end.e_h;
    const double e_b = rec.branches[2].end.e_h;
    const double e_a_next = rec.branches[3].end.e_h;
    rec.q_c = e_c - e_d;
    rec.q_h = e_b - e_a_next;
    rec.work = (e_d - e_a) + (e_b - e_c);
    rec.tau_total = spec_.tau_total();
    if (rec.tau_total > 0.0) {
        rec.r_c = rec.q_c / rec.tau_total;
        rec.sigma = (-rec.q_c / spec_.cold_bath.temperature + rec.q_h / spec_.hot_bath.temperature) / rec.tau_total;
    }
    rec.cop = rec.work != 0.0 ? rec.q_c / rec.work : std::numeric_limits<double>::quiet_NaN();
    return {current, rec};
}

std::pair<StateVector, CycleRecord> run_one_cycle(const CycleSpec& spec, const StateVector& state) {
    return CycleOperator(spec).run(state);
}

std::pair<StateVector, CycleRecord> limit_cycle(const CycleSpec& spec, const LimitCycleOptions& options) {
    return limit_cycle(CycleOperator(spec), options);
}

std::pair<StateVector, CycleRecord> limit_cycle(const CycleOperator& op, const LimitCycleOptions& options) {
    const CycleSpec& spec = op.spec();
    if (spec.hot_bath.conductance * spec.tau_h == 0.0 && spec.cold_bath.conductance * spec.tau_c == 0.0)
        throw std::invalid_argument("limit cycle needs Gamma * tau > 0 on at least one isochore");

    const AffineMap cyc = op.one_cycle_map();
    const double rho = spectral_radius(cyc.linear);
    if (!(rho < 1.0 - options.contraction_margin)) throw NoContractionError(rho);

    const Vec3 direct = (Mat3::Identity() - cyc.linear).fullPivLu().solve(cyc.offset);

    // Stopping on the step alone would leave an error of step / (1 - rho).
    const double stop = std::max(options.iteration_tol * (1.0 - rho), 4.0 * std::numeric_limits<double>::epsilon());
    Vec3 v{equilibrium_state(spec.omega_h, spec.hot_bath).energy, 0.0, 0.0};
    long iterations = 0;
    for (;;) {
        const Vec3 next = op.propagate(v);
        ++iterations;
        const double step = (next - v).norm();
        v = next;
        if (step < stop * v.norm()) break;
        if (iterations >= options.max_iterations)
            throw DivergenceError("limit-cycle iteration did not settle within " + std::to_string(iterations) +
                                  " cycles (last step " + std::to_string(step) + ")");
        if (!v.allFinite()) throw DivergenceError("limit-cycle iteration produced non-finite state");
    }

    const StateVector fixed = StateVector::from_vector(direct, spec.omega_h);
    auto [after, rec] = op.run(fixed);
    rec.iterations = iterations;
    rec.spectral_radius = rho;
    rec.solver_agreement = (direct - v).norm() / direct.norm();
    rec.residual = (after.vector() - direct).norm() / direct.norm();
    rec.converged = true;
    return {fixed, rec};
}

}  // namespace qotto
