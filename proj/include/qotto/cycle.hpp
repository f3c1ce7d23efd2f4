// cycle.hpp: four-stroke Otto refrigeration cycle and its limit cycle
//
// Branch order, with states reported at A (end of the hot isochore):
//
//   A -> D  expansion adiabat   omega_h -> omega_c
//   D -> C  cold isochore       omega_c, cold bath, tau_c
//   C -> B  compression adiabat omega_c -> omega_h
//   B -> A  hot isochore        omega_h, hot bath, tau_h
//
// Heat conventions: Q_c = E_C - E_D is extracted from the cold bath, Q_h =
// E_B - E_A is released into the hot bath, W is the work done on the medium.

#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "qotto/dynamics.hpp"
#include "qotto/schedules.hpp"

namespace qotto {

struct CycleSpec {
    BathSpec hot_bath;
    BathSpec cold_bath;
    double omega_h;
    double omega_c;
    Schedule expansion;
    Schedule compression;
    double tau_c;
    double tau_h;
    double ode_tol = 1e-10;

    void validate() const;
    double tau_total() const { return expansion.duration() + tau_c + compression.duration() + tau_h; }
};

enum class Branch { expansion = 0, cold_isochore = 1, compression = 2, hot_isochore = 3 };

std::string_view to_string(Branch branch);

struct BranchRecord {
    Branch branch;
    StateVector start;
    StateVector end;
    double delta_e;
    double duration;
};

struct CycleRecord {
    std::array<BranchRecord, 4> branches;
    double q_c = 0.0;
    double q_h = 0.0;
    double work = 0.0;
    double tau_total = 0.0;
    double r_c = 0.0;
    double sigma = 0.0;
    double cop = 0.0;

    // Limit-cycle diagnostics (zero / false for a single cycle).
    long iterations = 0;
    double residual = 0.0;         // |one more cycle - fixed point| / |fixed point|
    double solver_agreement = 0.0; // |direct - iterated| / |direct|
    double spectral_radius = 0.0;
    bool converged = false;

    // Q_c + W - Q_h; zero on a limit cycle.
    double first_law_defect() const { return q_c + work - q_h; }
};

// Failure inside one branch; what() names the branch.
class PropagationError : public std::runtime_error {
public:
    PropagationError(Branch branch, const std::string& message);
    Branch branch() const { return branch_; }

private:
    Branch branch_;
};

class NoContractionError : public std::runtime_error {
public:
    explicit NoContractionError(double spectral_radius);
    double spectral_radius() const { return rho_; }

private:
    double rho_;
};

class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The four branch maps of a cycle, built once.
class CycleOperator {
public:
    explicit CycleOperator(const CycleSpec& spec);

    const CycleSpec& spec() const { return spec_; }
    const AffineMap& branch(Branch b) const { return maps_[static_cast<int>(b)]; }

    // Raw (unvalidated) one-cycle propagation of an (H, L, C) vector at omega_h.
    Vec3 propagate(const Vec3& v) const;
    // One-cycle affine map extracted from the zero state and the unit basis states.
    AffineMap one_cycle_map() const;

    std::pair<StateVector, CycleRecord> run(const StateVector& state) const;

private:
    CycleSpec spec_;
    std::array<AffineMap, 4> maps_;
};

std::pair<StateVector, CycleRecord> run_one_cycle(const CycleSpec& spec, const StateVector& state);

struct LimitCycleOptions {
    double iteration_tol = 1e-12;
    long max_iterations = 100000;
    double contraction_margin = 1e-9;
};

// Fixed point of the one-cycle map, solved directly from (I - M) v = k and
// cross-checked by iterating the cycle from the hot equilibrium state.
std::pair<StateVector, CycleRecord> limit_cycle(const CycleSpec& spec, const LimitCycleOptions& options = {});
std::pair<StateVector, CycleRecord> limit_cycle(const CycleOperator& op, const LimitCycleOptions& options = {});

}  // namespace qotto
