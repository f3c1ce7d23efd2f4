#include "qotto/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qotto/parallel.hpp"

namespace qotto {

std::string_view to_string(OmegaRule r) { return r == OmegaRule::kappa ? "kappa" : "optimize"; }
std::string_view to_string(TimeRule r) { return r == TimeRule::z_equation ? "z" : "search"; }

OmegaRule SweepSpec::resolved_omega_rule() const {
    if (omega_rule) return *omega_rule;
    return kind == ScheduleKind::three_jump || kind == ScheduleKind::const_mu ? OmegaRule::kappa : OmegaRule::optimize;
}

double SweepSpec::resolved_nu() const {
    if (nu) return *nu;
    if (kind == ScheduleKind::three_jump) return 1.5;
    if (kind == ScheduleKind::const_mu) return 2.0;
    if (resolved_omega_rule() == OmegaRule::kappa)
        throw std::invalid_argument("kappa rule for a " + std::string(to_string(kind)) + " sweep needs an explicit nu");
    return 2.0;  // only seeds the search
}

void SweepSpec::validate() const {
    if (kind == ScheduleKind::piecewise_const) throw std::invalid_argument("piecewise_const schedules cannot be swept");
    if (!(t_min > 0.0) || !(t_max > t_min) || !std::isfinite(t_max))
        throw std::invalid_argument("sweep needs 0 < t_min < t_max");
    if (points_per_decade < 1) throw std::invalid_argument("points_per_decade must be at least 1");
    if (std::log10(t_max / t_min) < 2.0 - 1e-9) throw std::invalid_argument("sweep must span at least 2 decades");
    if (grid().size() < 8) throw std::invalid_argument("sweep needs at least 8 points");
    if (!(omega_h > 0.0) || !(t_h > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("omega_h, T_h and gamma must be positive");
    if (nu && !(*nu > 1.0)) throw std::invalid_argument("nu must exceed 1");
    if (resolved_omega_rule() == OmegaRule::kappa) {
        const double k = kappa_for_exponent(resolved_nu());
        if (!(k * t_max < omega_h)) throw std::invalid_argument("kappa * t_max must stay below omega_h");
    }
    if (threads < 1 || restarts < 1 || max_evaluations < 1)
        throw std::invalid_argument("threads, restarts and max_evaluations must be positive");
    if (!(ode_tol >= 1e-13 && ode_tol <= 1e-6)) throw std::invalid_argument("ode_tol must lie in [1e-13, 1e-6]");
}

std::vector<double> SweepSpec::grid() const {
    const double decades = std::log10(t_max / t_min);
    const auto n = static_cast<std::size_t>(std::lround(decades * points_per_decade)) + 1;
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = i + 1 == n ? t_min : t_max * std::pow(t_min / t_max, static_cast<double>(i) / static_cast<double>(n - 1));
    return t;
}

namespace {

// Duration at which the schedule's |mu| reaches about 1 at omega_c.
double reference_duration(ScheduleKind kind, double omega_h, double omega_c) {
    if (kind == ScheduleKind::linear) return 2.0 * (omega_h - omega_c) / (omega_c * omega_c);
    return 2.0 * std::log(omega_h / omega_c) / omega_c;
}

}  // namespace

CycleDesign sweep_design(const SweepSpec& spec, double t_c) {
    CycleDesign d;
    d.hot_bath = {spec.t_h, spec.gamma};
    d.cold_bath = {t_c, spec.gamma};
    d.omega_h = spec.omega_h;
    d.omega_c = kappa_for_exponent(spec.resolved_nu()) * t_c;
    d.expansion.kind = spec.kind;
    if (spec.kind == ScheduleKind::linear || spec.kind == ScheduleKind::exponential)
        d.expansion.duration = reference_duration(spec.kind, d.omega_h, d.omega_c);
    d.isochore_rule = IsochoreRule::z_equation;
    d.ode_tol = spec.ode_tol;
    return d;
}

SweepRow sweep_point(const SweepSpec& spec, std::size_t index, double t_c) {
    SweepRow row;
    row.index = index;
    row.t_c = t_c;
    row.seed = spec.seed + index;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    try {
        OptimizationSpec opt;
        opt.base = sweep_design(spec, t_c);
        opt.seed = row.seed;
        opt.restarts = spec.restarts;
        opt.max_evaluations = spec.max_evaluations;
        if (spec.resolved_omega_rule() == OmegaRule::optimize) {
            opt.free.push_back(FreeVariable::omega_c);
            opt.bounds.push_back({1e-2 * t_c, std::min(1e2 * t_c, 0.5 * spec.omega_h)});
        }
        if (opt.base.expansion.duration) {
            const double tau0 = *opt.base.expansion.duration;
            opt.free.push_back(FreeVariable::tau_hc);
            opt.bounds.push_back({1e-4 * tau0, 1e4 * tau0});
        }
        if (spec.time_rule == TimeRule::search) {
            for (auto v : {FreeVariable::tau_c, FreeVariable::tau_h}) {
                opt.free.push_back(v);
                opt.bounds.push_back({1e-3 / spec.gamma, 1e3 / spec.gamma});
            }
        }
        const auto res = optimize_time_allocation(opt);
        const auto& rec = res.best_record;
        row.omega_c = res.best_spec.omega_c;
        row.tau_hc = rec.branches[0].duration;
        row.tau_c = rec.branches[1].duration;
        row.tau_ch = rec.branches[2].duration;
        row.tau_h = rec.branches[3].duration;
        row.tau_total = rec.tau_total;
        row.q_c = rec.q_c;
        row.q_h = rec.q_h;
        row.work = rec.work;
        row.r_c = rec.r_c;
        row.sigma = rec.sigma;
        row.converged = rec.converged;
        row.cooling = rec.q_c > 0.0;
    } catch (const std::exception& e) {
        row.error = e.what();
        row.converged = false;
        for (double* v : {&row.omega_c, &row.tau_hc, &row.tau_c, &row.tau_ch, &row.tau_h, &row.tau_total, &row.q_c,
                          &row.q_h, &row.work, &row.r_c, &row.sigma})
            *v = nan;
    }
    return row;
}

SweepTable temperature_sweep(const SweepSpec& spec) {
    spec.validate();
    const auto grid = spec.grid();
    SweepTable table{spec, std::vector<SweepRow>(grid.size())};
    parallel_for(grid.size(), spec.threads, [&](std::size_t i) { table.rows[i] = sweep_point(spec, i, grid[i]); });
    return table;
}

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points, std::optional<double> tail_decades) {
    PowerLawFit fit;
    std::vector<std::pair<double, double>> kept;
    for (const auto& [t, r] : points) {
        if (!(t > 0.0) || !(r > 0.0) || !std::isfinite(t) || !std::isfinite(r)) {
            fit.warnings.push_back("excluded non-positive point (T = " + std::to_string(t) + ", R = " + std::to_string(r) +
                                   ")");
            continue;
        }
        kept.emplace_back(t, r);
    }
    if (tail_decades) {
        if (!(*tail_decades > 0.0)) throw std::invalid_argument("tail window must be positive");
        double t_lo = std::numeric_limits<double>::infinity();
        for (const auto& p : kept) t_lo = std::min(t_lo, p.first);
        const double t_cut = t_lo * std::pow(10.0, *tail_decades) * (1.0 + 1e-9);
        std::erase_if(kept, [&](const auto& p) { return p.first > t_cut; });
    }
    if (kept.size() < 4) throw std::invalid_argument("power-law fit needs at least 4 positive points");

    const double n = static_cast<double>(kept.size());
    double sx = 0, sy = 0;
    for (const auto& [t, r] : kept) {
        sx += std::log(t);
        sy += std::log(r);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (const auto& [t, r] : kept) {
        const double dx = std::log(t) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(r) - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("power-law fit needs distinct temperatures");
    fit.delta = sxy / sxx;
    const double intercept = my - fit.delta * mx;
    fit.prefactor = std::exp(intercept);
    double ss = 0;
    for (const auto& [t, r] : kept) {
        const double e = std::log(r) - (intercept + fit.delta * std::log(t));
        ss += e * e;
    }
    fit.rms = std::sqrt(ss / n);
    fit.points_used = static_cast<int>(kept.size());
    return fit;
}

namespace {

PowerLawFit fit_column(const SweepTable& table, double SweepRow::*column, std::optional<double> tail) {
    std::vector<std::pair<double, double>> pts;
    int skipped = 0;
    for (const auto& row : table.rows) {
        if (!row.converged) {
            ++skipped;
            continue;
        }
        pts.emplace_back(row.t_c, row.*column);
    }
    auto fit = fit_power_law(pts, tail);
    if (skipped) fit.warnings.push_back(std::to_string(skipped) + " unconverged rows left out");
    return fit;
}

}  // namespace

PowerLawFit fit_cooling_rate(const SweepTable& table, std::optional<double> tail_decades) {
    return fit_column(table, &SweepRow::r_c, tail_decades);
}

PowerLawFit fit_expansion_time(const SweepTable& table, std::optional<double> tail_decades) {
    return fit_column(table, &SweepRow::tau_hc, tail_decades);
}

}  // namespace qotto
