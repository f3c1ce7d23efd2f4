// optimize.hpp: cooling-rate optimization
//
// Analytic pieces: the isochore allocation z solving 2z + Gamma*tau_adiabats =
// 2 sinh z, the principal Lambert W branch, and the optimal cold frequency
// omega_c* = kappa T_c with kappa = nu + W0(-nu e^{-nu}).
//
// Search pieces: multi-start Nelder-Mead over log-transformed branch times and
// omega_c, and a genetic search over piecewise-constant expansion schedules.
// Both are deterministic for a fixed seed; fitness evaluations may run on
// several threads but results are always reduced in candidate order.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qotto/cycle.hpp"

namespace qotto {

// ---- analytic optima -------------------------------------------------------

struct IsochoreAllocation {
    double z = 0.0;
    double tau_h = 0.0;
    double tau_c = 0.0;
    double residual = 0.0;   // 2z + Gamma*tau_adiabats - 2 sinh z
    bool degenerate = false; // tau_adiabats == 0: zero isochore time
};

// Symmetric conductances only (gamma_h == gamma_c); asymmetric baths are
// rejected and must go through the searched optimizer.
IsochoreAllocation solve_isochore_z(double gamma_h, double gamma_c, double tau_adiabats);

// Principal branch of w e^w = x for x >= -1/e.
double lambert_w0(double x);

struct ColdFrequency {
    double omega_c_star;
    double kappa;
};

double kappa_for_exponent(double nu);
ColdFrequency optimal_cold_frequency(double nu, double t_c);

// ---- cycle templates -------------------------------------------------------

// How to build one adiabat between two given frequencies.
struct ScheduleRule {
    ScheduleKind kind = ScheduleKind::three_jump;
    // const_mu: |mu|, sign taken from the direction; empty means the
    // frictionless critical mu*.
    std::optional<double> mu;
    // linear / exponential (required), const_mu (overrides mu when set).
    std::optional<double> duration;
    // piecewise_const holds, listed in time order for the expansion direction.
    std::vector<Segment> segments;

    Schedule build(double omega_start, double omega_end) const;
};

enum class IsochoreRule { fixed, z_equation };

// A CycleSpec whose schedules and isochore times are derived from rules, so
// that omega_c or branch durations can be varied by the optimizers.
struct CycleDesign {
    BathSpec hot_bath{1.0, 1.0};
    BathSpec cold_bath{0.1, 1.0};
    double omega_h = 100.0;
    double omega_c = 0.1;
    ScheduleRule expansion;
    std::optional<ScheduleRule> compression;  // empty: time-reversed expansion
    IsochoreRule isochore_rule = IsochoreRule::z_equation;
    double tau_c = 0.0;
    double tau_h = 0.0;
    double ode_tol = 1e-10;

    CycleSpec build() const;
};

// ---- searched optima -------------------------------------------------------

enum class FreeVariable { tau_c, tau_h, tau_hc, tau_ch, omega_c };

std::string_view to_string(FreeVariable v);
FreeVariable free_variable_from_string(std::string_view name);

struct Bounds {
    double lo;
    double hi;
};

struct GaOptions {
    int segments = 2;
    int population = 32;
    int generations = 200;
    int tournament = 3;
    double crossover_rate = 0.9;
    double blend_alpha = 0.3;
    bool mutation = true;
    double mutation_sigma = 0.3;  // initial log-space step
    Bounds tau_bounds{1e-3, 10.0};
    // Optional starting individuals, genes ordered (omega_1, tau_1, omega_2, tau_2, ...).
    std::vector<std::vector<double>> initial_population;
};

struct OptimizationSpec {
    CycleDesign base;
    std::vector<FreeVariable> free;
    std::vector<Bounds> bounds;  // aligned with `free`
    std::uint64_t seed = 1;
    int restarts = 4;
    int max_evaluations = 1500;  // per restart
    double ftol = 1e-10;
    double xtol = 1e-7;
    int threads = 1;
    GaOptions ga;

    void validate() const;
};

struct RestartResult {
    std::vector<double> start;
    std::vector<double> best;
    double r_c = 0.0;
    int evaluations = 0;
};

struct TimeAllocationResult {
    CycleDesign best_design;
    CycleSpec best_spec;
    CycleRecord best_record;
    std::vector<RestartResult> restarts;
    std::vector<std::string> failures;
    std::uint64_t seed = 0;
    // Only when the free set is {tau_c, tau_h} with equal conductances:
    // R_c of the z-equation allocation and the relative gap to the search.
    std::optional<double> z_allocation_r_c;
    std::optional<double> z_relative_gap;
};

TimeAllocationResult optimize_time_allocation(const OptimizationSpec& spec);

struct GaResult {
    Schedule best_schedule;
    std::vector<double> best_genes;
    CycleSpec best_spec;
    CycleRecord best_record;
    std::vector<double> best_fitness_history;  // one entry per generation, including generation 0
    std::uint64_t seed = 0;
    long evaluations = 0;
};

GaResult ga_schedule_search(const OptimizationSpec& spec);

// Genes <-> expansion schedule omega_h -> omega_c.
Schedule schedule_from_genes(double omega_h, double omega_c, const std::vector<double>& genes);
std::vector<double> three_jump_genes(double omega_h, double omega_c);

// ---- building blocks --------------------------------------------------------

struct SimplexResult {
    std::vector<double> x;
    double value;
    int evaluations;
};

// Minimizes f from x0 with an initial simplex of per-coordinate steps.
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                          const std::vector<double>& step, int max_evaluations, double ftol, double xtol);

// Limit-cycle cooling rate of a design, or -infinity when the cycle cannot be
// evaluated (message stored in *failure when given).
double cooling_rate(const CycleDesign& design, CycleRecord* record = nullptr, std::string* failure = nullptr);

}  // namespace qotto
