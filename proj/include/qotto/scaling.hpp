// scaling.hpp: cooling-rate sweeps T_c -> 0 and power-law fits R_c ~ T_c^delta

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qotto/optimize.hpp"

namespace qotto {

enum class OmegaRule { kappa, optimize };
enum class TimeRule { z_equation, search };

std::string_view to_string(OmegaRule r);
std::string_view to_string(TimeRule r);

struct SweepSpec {
    ScheduleKind kind = ScheduleKind::three_jump;
    double t_max = 1.0;
    double t_min = 1e-4;
    int points_per_decade = 5;
    // Empty: kappa rule for three_jump / const_mu, per-point search otherwise.
    std::optional<OmegaRule> omega_rule;
    // Empty: 1.5 for three_jump, 2 for const_mu.
    std::optional<double> nu;
    double omega_h = 100.0;
    double t_h = 1.0;
    double gamma = 1.0;
    TimeRule time_rule = TimeRule::z_equation;
    std::uint64_t seed = 1;
    int threads = 1;
    int restarts = 3;
    int max_evaluations = 600;
    double ode_tol = 1e-10;

    void validate() const;
    std::vector<double> grid() const;  // strictly decreasing
    OmegaRule resolved_omega_rule() const;
    double resolved_nu() const;
};

struct SweepRow {
    std::size_t index = 0;
    double t_c = 0.0;
    double omega_c = 0.0;
    double tau_hc = 0.0;
    double tau_c = 0.0;
    double tau_ch = 0.0;
    double tau_h = 0.0;
    double tau_total = 0.0;
    double q_c = 0.0;
    double q_h = 0.0;
    double work = 0.0;
    double r_c = 0.0;
    double sigma = 0.0;
    bool converged = false;
    bool cooling = false;  // Q_c > 0
    std::uint64_t seed = 0;
    std::string error;
};

struct SweepTable {
    SweepSpec spec;
    std::vector<SweepRow> rows;
};

// The cycle template used at one grid temperature, before any search.
CycleDesign sweep_design(const SweepSpec& spec, double t_c);

SweepRow sweep_point(const SweepSpec& spec, std::size_t index, double t_c);
SweepTable temperature_sweep(const SweepSpec& spec);

struct PowerLawFit {
    double delta = 0.0;
    double prefactor = 0.0;
    double rms = 0.0;  // of ln R residuals
    int points_used = 0;
    std::vector<std::string> warnings;
};

// Least squares on (ln T, ln R). With tail_decades set, only points within
// that many decades above the smallest surviving T are used.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points,
                          std::optional<double> tail_decades = std::nullopt);

// Fits R_c (or tau_hc) against T_c over the converged rows of a sweep.
PowerLawFit fit_cooling_rate(const SweepTable& table, std::optional<double> tail_decades = std::nullopt);
PowerLawFit fit_expansion_time(const SweepTable& table, std::optional<double> tail_decades = std::nullopt);

}  // namespace qotto
