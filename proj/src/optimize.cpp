#include "qotto/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "qotto/parallel.hpp"

namespace qotto {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sinh z - z without cancellation for small z.
double sinh_minus_z(double z) {
    if (std::abs(z) < 1.0) {
        const double z2 = z * z;
        double term = z * z2 / 6.0;
        double sum = 0.0;
        for (int k = 1; k < 20 && std::abs(term) > 1e-18 * std::abs(sum); ++k) {
            sum += term;
            term *= z2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
        }
        return sum;
    }
    return std::sinh(z) - z;
}

bool same_value(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

// ---- analytic optima -------------------------------------------------------

IsochoreAllocation solve_isochore_z(double gamma_h, double gamma_c, double tau_adiabats) {
    if (!(gamma_h > 0.0) || !(gamma_c > 0.0) || !std::isfinite(gamma_h) || !std::isfinite(gamma_c))
        throw std::invalid_argument("conductances must be positive and finite");
    if (!(tau_adiabats >= 0.0) || !std::isfinite(tau_adiabats))
        throw std::invalid_argument("adiabat time must be non-negative and finite");
    if (!same_value(gamma_h, gamma_c))
        throw std::invalid_argument("z allocation is defined for equal conductances only; search the times instead");

    IsochoreAllocation out;
    if (tau_adiabats == 0.0) {
        out.degenerate = true;
        return out;
    }
    const double a = 0.5 * gamma_h * tau_adiabats;  // sinh z - z = a

    double lo = 0.0;
    double hi = std::cbrt(6.0 * a);  // sinh z - z >= z^3 / 6
    if (a >= 3.0) hi = std::min(hi, std::asinh(2.0 * a));
    double z = a < 1.0 ? std::cbrt(6.0 * a) : std::asinh(a + std::log1p(a) + 1.0);
    z = std::clamp(z, lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double g = sinh_minus_z(z) - a;
        if (g > 0.0) hi = z; else lo = z;
        const double dg = z < 1e-4 ? 0.5 * z * z : std::cosh(z) - 1.0;
        double next = dg > 0.0 ? z - g / dg : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const bool done = std::abs(next - z) <= 1e-16 * z || hi - lo <= 4e-16 * hi;
        z = next;
        if (done) break;
    }
    out.z = z;
    out.tau_h = z / gamma_h;
    out.tau_c = z / gamma_c;
    out.residual = 2.0 * (a - sinh_minus_z(z));
    return out;
}

double lambert_w0(double x) {
    constexpr double branch = -0.36787944117144233;  // -1/e
    if (std::isnan(x) || x < branch) throw std::domain_error("lambert_w0 needs x >= -1/e");
    if (x == 0.0) return 0.0;
    if (x == branch) return -1.0;
    if (std::isinf(x)) return x;

    // Initial guess: branch-point series near -1/e, log asymptotics for large x.
    double w;
    const double p2 = 2.0 * (std::exp(1.0) * x + 1.0);
    if (p2 < 0.5) {
        const double p = std::sqrt(std::max(p2, 0.0));
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    } else if (x < 3.0) {
        w = std::log1p(x) * (1.0 - std::log1p(std::log1p(x)) / (2.0 + std::log1p(x)));
    } else {
        const double l1 = std::log(x), l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }

    for (int it = 0; it < 64; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double wp1 = w + 1.0;
        if (f == 0.0 || wp1 == 0.0) break;
        const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        const double next = std::max(w - step, -1.0);
        if (std::abs(next - w) <= 1e-16 * (1.0 + std::abs(w))) {
            w = next;
            break;
        }
        w = next;
    }
    return w;
}

double kappa_for_exponent(double nu) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw std::invalid_argument("exponent nu must be positive");
    // For nu <= 1 the principal branch returns -nu itself: omega^nu n_eq peaks at omega -> 0.
    if (nu <= 1.0) return 0.0;
    return nu + lambert_w0(-nu * std::exp(-nu));
}

ColdFrequency optimal_cold_frequency(double nu, double t_c) {
    if (!(t_c > 0.0) || !std::isfinite(t_c)) throw std::invalid_argument("T_c must be positive");
    const double k = kappa_for_exponent(nu);
    return {k * t_c, k};
}

// ---- templates --------------------------------------------------------------

Schedule ScheduleRule::build(double omega_start, double omega_end) const {
    const bool expansion = omega_end < omega_start;
    switch (kind) {
    case ScheduleKind::three_jump:
        return Schedule::three_jump(omega_start, omega_end);
    case ScheduleKind::const_mu: {
        if (duration) return Schedule::const_mu_with_duration(omega_start, omega_end, *duration);
        double m = mu ? std::abs(*mu)
                      : std::abs(critical_mu(std::max(omega_start, omega_end) / std::min(omega_start, omega_end)).mu_star);
        return Schedule::const_mu(omega_start, omega_end, expansion ? -m : m);
    }
    case ScheduleKind::linear:
    case ScheduleKind::exponential: {
        if (!duration) throw std::invalid_argument(std::string(to_string(kind)) + " schedule needs a duration");
        return kind == ScheduleKind::linear ? Schedule::linear(omega_start, omega_end, *duration)
                                            : Schedule::exponential(omega_start, omega_end, *duration);
    }
    case ScheduleKind::piecewise_const:
        if (expansion) return Schedule::piecewise_const(omega_start, omega_end, segments);
        return Schedule::piecewise_const(omega_end, omega_start, segments).reversed();
    }
    throw std::invalid_argument("unknown schedule kind");
}

CycleSpec CycleDesign::build() const {
    Schedule exp_schedule = expansion.build(omega_h, omega_c);
    Schedule comp_schedule = compression ? compression->build(omega_c, omega_h) : exp_schedule.reversed();
    double tc = tau_c, th = tau_h;
    if (isochore_rule == IsochoreRule::z_equation) {
        const auto alloc = solve_isochore_z(hot_bath.conductance, cold_bath.conductance,
                                            exp_schedule.duration() + comp_schedule.duration());
        tc = alloc.tau_c;
        th = alloc.tau_h;
    }
    CycleSpec spec{hot_bath, cold_bath, omega_h, omega_c, std::move(exp_schedule), std::move(comp_schedule),
                   tc, th, ode_tol};
    spec.validate();
    return spec;
}

double cooling_rate(const CycleDesign& design, CycleRecord* record, std::string* failure) {
    try {
        auto [state, rec] = limit_cycle(design.build());
        if (!std::isfinite(rec.r_c)) throw DivergenceError("non-finite cooling rate");
        if (record) *record = rec;
        return rec.r_c;
    } catch (const std::exception& e) {
        if (failure) *failure = e.what();
        return -kInf;
    }
}

// ---- free variables ------------------------------------------------------------

std::string_view to_string(FreeVariable v) {
    switch (v) {
    case FreeVariable::tau_c: return "tau_c";
    case FreeVariable::tau_h: return "tau_h";
    case FreeVariable::tau_hc: return "tau_hc";
    case FreeVariable::tau_ch: return "tau_ch";
    case FreeVariable::omega_c: return "omega_c";
    }
    return "unknown";
}

FreeVariable free_variable_from_string(std::string_view name) {
    for (auto v : {FreeVariable::tau_c, FreeVariable::tau_h, FreeVariable::tau_hc, FreeVariable::tau_ch,
                   FreeVariable::omega_c})
        if (to_string(v) == name) return v;
    throw std::invalid_argument("unknown free variable '" + std::string(name) + "'");
}

namespace {

bool has_duration(ScheduleKind k) {
    return k == ScheduleKind::const_mu || k == ScheduleKind::linear || k == ScheduleKind::exponential;
}

bool is_free(const std::vector<FreeVariable>& free, FreeVariable v) {
    return std::find(free.begin(), free.end(), v) != free.end();
}

// Makes every free variable an explicit number in the design.
CycleDesign resolve(const CycleDesign& base, const std::vector<FreeVariable>& free) {
    CycleDesign d = base;
    if ((is_free(free, FreeVariable::tau_c) || is_free(free, FreeVariable::tau_h)) &&
        d.isochore_rule == IsochoreRule::z_equation) {
        const CycleSpec spec = base.build();
        d.tau_c = spec.tau_c;
        d.tau_h = spec.tau_h;
        d.isochore_rule = IsochoreRule::fixed;
    }
    if (is_free(free, FreeVariable::tau_hc) && !d.expansion.duration)
        d.expansion.duration = d.build().expansion.duration();
    if (is_free(free, FreeVariable::tau_ch)) {
        if (!d.compression) {
            d.compression = d.expansion;
            d.compression->duration = d.build().compression.duration();
        } else if (!d.compression->duration) {
            d.compression->duration = d.build().compression.duration();
        }
    }
    return d;
}

double current_value(const CycleDesign& d, FreeVariable v) {
    switch (v) {
    case FreeVariable::tau_c: return d.tau_c;
    case FreeVariable::tau_h: return d.tau_h;
    case FreeVariable::tau_hc: return *d.expansion.duration;
    case FreeVariable::tau_ch: return *d.compression->duration;
    case FreeVariable::omega_c: return d.omega_c;
    }
    return 0.0;
}

void assign(CycleDesign& d, FreeVariable v, double value) {
    switch (v) {
    case FreeVariable::tau_c: d.tau_c = value; break;
    case FreeVariable::tau_h: d.tau_h = value; break;
    case FreeVariable::tau_hc: d.expansion.duration = value; break;
    case FreeVariable::tau_ch: d.compression->duration = value; break;
    case FreeVariable::omega_c: d.omega_c = value; break;
    }
}

}  // namespace

void OptimizationSpec::validate() const {
    if (free.size() != bounds.size()) throw std::invalid_argument("each free variable needs one bounds entry");
    for (std::size_t i = 0; i < free.size(); ++i) {
        const auto& b = bounds[i];
        const std::string name(to_string(free[i]));
        if (!(b.lo > 0.0) || !(b.hi >= b.lo) || !std::isfinite(b.hi))
            throw std::invalid_argument("infeasible bounds for " + name + ": need 0 < lo <= hi < inf");
        if (std::count(free.begin(), free.end(), free[i]) > 1)
            throw std::invalid_argument("free variable " + name + " listed twice");
        if (free[i] == FreeVariable::omega_c && !(b.lo < base.omega_h))
            throw std::invalid_argument("infeasible bounds for omega_c: lower bound must be below omega_h");
    }
    if (is_free(free, FreeVariable::tau_hc) && !has_duration(base.expansion.kind))
        throw std::invalid_argument("tau_hc is not adjustable for a " + std::string(to_string(base.expansion.kind)) +
                                    " expansion");
    if (is_free(free, FreeVariable::tau_ch)) {
        const auto kind = base.compression ? base.compression->kind : base.expansion.kind;
        if (!has_duration(kind))
            throw std::invalid_argument("tau_ch is not adjustable for a " + std::string(to_string(kind)) +
                                        " compression");
    }
    if (restarts < 1) throw std::invalid_argument("restarts must be at least 1");
    if (max_evaluations < 1) throw std::invalid_argument("max_evaluations must be at least 1");
    if (!(ftol >= 0.0) || !(xtol >= 0.0)) throw std::invalid_argument("tolerances must be non-negative");
    if (threads < 1) throw std::invalid_argument("threads must be at least 1");
}

// ---- Nelder-Mead ----------------------------------------------------------------

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                          const std::vector<double>& step, int max_evaluations, double ftol, double xtol) {
    const std::size_t n = x0.size();
    int evals = 0;
    // Past the budget a trial point counts as infinitely bad and is never accepted.
    auto eval = [&](const std::vector<double>& x) {
        if (evals >= max_evaluations && evals > 0) return kInf;
        ++evals;
        const double v = f(x);
        return std::isnan(v) ? kInf : v;
    };
    if (n == 0) return {x0, eval(x0), evals};

    std::vector<std::vector<double>> pts(n + 1, x0);
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
    for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

    std::vector<std::size_t> order(n + 1);
    auto point_along = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
        std::vector<double> r(n);
        for (std::size_t k = 0; k < n; ++k) r[k] = c[k] + t * (w[k] - c[k]);
        return r;
    };

    while (evals < max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

        double spread = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t k = 0; k < n; ++k) spread = std::max(spread, std::abs(pts[i][k] - pts[best][k]));
        const bool flat = std::isfinite(vals[worst]) &&
                          std::abs(vals[worst] - vals[best]) <= ftol * std::max(1e-300, std::abs(vals[best]));
        if (spread <= xtol && (flat || spread == 0.0)) break;
        if (flat && spread <= 1e3 * xtol) break;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i)
            if (i != worst)
                for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);

        auto reflected = point_along(centroid, pts[worst], -1.0);
        const double fr = eval(reflected);
        if (fr < vals[best]) {
            auto expanded = point_along(centroid, pts[worst], -2.0);
            const double fe = eval(expanded);
            if (fe < fr) {
                pts[worst] = std::move(expanded);
                vals[worst] = fe;
            } else {
                pts[worst] = std::move(reflected);
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = std::move(reflected);
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        auto contracted = point_along(centroid, outside ? reflected : pts[worst], 0.5);
        const double fc = eval(contracted);
        if (fc < std::min(fr, vals[worst]) || (fc <= vals[worst] && !outside)) {
            pts[worst] = std::move(contracted);
            vals[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            pts[i] = point_along(pts[best], pts[i], 0.5);
            vals[i] = eval(pts[i]);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    return {pts[best], vals[best], evals};
}

// ---- time allocation ---------------------------------------------------------------

TimeAllocationResult optimize_time_allocation(const OptimizationSpec& spec) {
    spec.validate();
    TimeAllocationResult result;
    result.seed = spec.seed;

    if (spec.free.empty()) {
        std::string failure;
        CycleRecord rec;
        if (!std::isfinite(cooling_rate(spec.base, &rec, &failure)))
            throw std::runtime_error("base cycle cannot be evaluated: " + failure);
        result.best_design = spec.base;
        result.best_spec = spec.base.build();
        result.best_record = rec;
        return result;
    }

    const CycleDesign resolved = resolve(spec.base, spec.free);
    const std::size_t n = spec.free.size();
    std::vector<double> lo(n), hi(n), step(n), x0(n);
    for (std::size_t i = 0; i < n; ++i) {
        lo[i] = std::log(spec.bounds[i].lo);
        hi[i] = std::log(spec.bounds[i].hi);
        step[i] = std::min(1.0, 0.2 * (hi[i] - lo[i]));
        const double v = current_value(resolved, spec.free[i]);
        x0[i] = v > 0.0 ? std::clamp(std::log(v), lo[i], hi[i]) : 0.5 * (lo[i] + hi[i]);
    }

    auto design_at = [&](const std::vector<double>& y) {
        CycleDesign d = resolved;
        for (std::size_t i = 0; i < n; ++i) assign(d, spec.free[i], std::exp(std::clamp(y[i], lo[i], hi[i])));
        return d;
    };

    // All random starts are drawn up front so that restarts can run in any order.
    std::mt19937_64 rng(spec.seed);
    std::vector<std::vector<double>> starts(static_cast<std::size_t>(spec.restarts), x0);
    for (std::size_t r = 1; r < starts.size(); ++r)
        for (std::size_t i = 0; i < n; ++i) starts[r][i] = std::uniform_real_distribution<double>(lo[i], hi[i])(rng);

    std::vector<RestartResult> runs(starts.size());
    std::vector<std::vector<std::string>> logs(starts.size());
    parallel_for(starts.size(), spec.threads, [&](std::size_t r) {
        auto& log = logs[r];
        auto objective = [&](const std::vector<double>& y) {
            std::string failure;
            const double rc = cooling_rate(design_at(y), nullptr, &failure);
            if (!std::isfinite(rc) && log.size() < 20) log.push_back("restart " + std::to_string(r) + ": " + failure);
            return -rc;
        };
        auto first = nelder_mead(objective, starts[r], step, spec.max_evaluations, spec.ftol, spec.xtol);
        // One restart of the simplex at the optimum guards against early collapse.
        std::vector<double> small(n);
        for (std::size_t i = 0; i < n; ++i) small[i] = 0.1 * step[i];
        const int left = std::max(1, spec.max_evaluations - first.evaluations);
        auto second = nelder_mead(objective, first.x, small, left, spec.ftol, spec.xtol);
        const auto& best = second.value <= first.value ? second : first;
        RestartResult rr;
        rr.start = starts[r];
        for (std::size_t i = 0; i < n; ++i) {
            rr.start[i] = std::exp(starts[r][i]);
            rr.best.push_back(std::exp(std::clamp(best.x[i], lo[i], hi[i])));
        }
        rr.r_c = -best.value;
        rr.evaluations = first.evaluations + second.evaluations;
        runs[r] = std::move(rr);
    });
    for (auto& log : logs) result.failures.insert(result.failures.end(), log.begin(), log.end());

    std::size_t winner = 0;
    for (std::size_t r = 1; r < runs.size(); ++r)
        if (runs[r].r_c > runs[winner].r_c) winner = r;
    if (!std::isfinite(runs[winner].r_c))
        throw std::runtime_error("no restart produced an evaluable cycle" +
                                 (result.failures.empty() ? std::string() : ": " + result.failures.front()));

    CycleDesign best = resolved;
    for (std::size_t i = 0; i < n; ++i) assign(best, spec.free[i], runs[winner].best[i]);
    cooling_rate(best, &result.best_record);
    result.best_design = best;
    result.best_spec = best.build();
    result.restarts = std::move(runs);

    const bool times_only = n == 2 && is_free(spec.free, FreeVariable::tau_c) && is_free(spec.free, FreeVariable::tau_h);
    if (times_only && same_value(spec.base.hot_bath.conductance, spec.base.cold_bath.conductance)) {
        CycleDesign z = spec.base;
        z.isochore_rule = IsochoreRule::z_equation;
        const double rz = cooling_rate(z);
        if (std::isfinite(rz)) {
            result.z_allocation_r_c = rz;
            result.z_relative_gap = (result.best_record.r_c - rz) / std::abs(rz);
        }
    }
    return result;
}

// ---- genetic search ----------------------------------------------------------------------

Schedule schedule_from_genes(double omega_h, double omega_c, const std::vector<double>& genes) {
    if (genes.size() < 2 || genes.size() % 2 != 0) throw std::invalid_argument("genes come in (omega, tau) pairs");
    std::vector<Segment> segs;
    for (std::size_t i = 0; i < genes.size(); i += 2) segs.push_back({genes[i], genes[i + 1]});
    return Schedule::piecewise_const(omega_h, omega_c, std::move(segs));
}

std::vector<double> three_jump_genes(double omega_h, double omega_c) {
    const auto t = three_jump_times(omega_h, omega_c);
    return {omega_c, t.tau_1, omega_h, t.tau_2};
}

GaResult ga_schedule_search(const OptimizationSpec& spec) {
    const GaOptions& ga = spec.ga;
    if (ga.population < 4) throw std::invalid_argument("GA population must be at least 4");
    if (ga.segments < 2) throw std::invalid_argument("GA needs at least 2 segments");
    if (ga.generations < 0) throw std::invalid_argument("GA generations must be non-negative");
    if (ga.tournament < 1) throw std::invalid_argument("GA tournament size must be at least 1");
    if (!(ga.tau_bounds.lo > 0.0) || !(ga.tau_bounds.hi >= ga.tau_bounds.lo) || !std::isfinite(ga.tau_bounds.hi))
        throw std::invalid_argument("infeasible GA duration bounds");
    if (!(ga.mutation_sigma > 0.0)) throw std::invalid_argument("GA mutation step must be positive");
    if (spec.threads < 1) throw std::invalid_argument("threads must be at least 1");

    const double wc = spec.base.omega_c, wh = spec.base.omega_h;
    if (!(wc > 0.0 && wh > wc)) throw std::invalid_argument("GA needs omega_h > omega_c > 0");
    const std::size_t genes_n = 2 * static_cast<std::size_t>(ga.segments);
    std::vector<double> glo(genes_n), ghi(genes_n);
    for (std::size_t g = 0; g < genes_n; g += 2) {
        glo[g] = wc;
        ghi[g] = wh;
        glo[g + 1] = ga.tau_bounds.lo;
        ghi[g + 1] = ga.tau_bounds.hi;
    }

    CycleDesign base = spec.base;
    base.expansion = ScheduleRule{ScheduleKind::piecewise_const, {}, {}, {}};
    base.compression.reset();
    auto design_of = [&](const std::vector<double>& genes) {
        CycleDesign d = base;
        d.expansion.segments.clear();
        for (std::size_t i = 0; i < genes_n; i += 2) d.expansion.segments.push_back({genes[i], genes[i + 1]});
        return d;
    };

    std::mt19937_64 rng(spec.seed);
    auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

    const auto pop_n = static_cast<std::size_t>(ga.population);
    std::vector<std::vector<double>> pop;
    for (const auto& ind : ga.initial_population) {
        if (pop.size() == pop_n) break;
        if (ind.size() != genes_n) throw std::invalid_argument("initial individual has the wrong number of genes");
        for (std::size_t g = 0; g < genes_n; ++g)
            if (!(ind[g] >= glo[g] && ind[g] <= ghi[g]))
                throw std::invalid_argument("initial individual lies outside the gene bounds");
        pop.push_back(ind);
    }
    while (pop.size() < pop_n) {
        std::vector<double> ind(genes_n);
        for (std::size_t g = 0; g < genes_n; ++g) ind[g] = std::exp(uniform(std::log(glo[g]), std::log(ghi[g])));
        pop.push_back(std::move(ind));
    }

    GaResult result;
    result.seed = spec.seed;
    std::vector<double> fit(pop_n);
    auto evaluate = [&](std::size_t from) {
        parallel_for(pop_n - from, spec.threads, [&](std::size_t i) { fit[from + i] = cooling_rate(design_of(pop[from + i])); });
        result.evaluations += static_cast<long>(pop_n - from);
    };
    auto champion = [&] { return static_cast<std::size_t>(std::max_element(fit.begin(), fit.end()) - fit.begin()); };

    evaluate(0);
    result.best_fitness_history.push_back(fit[champion()]);

    double sigma = ga.mutation_sigma;
    const double p_mut = 1.0 / static_cast<double>(genes_n);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int gen = 0; gen < ga.generations; ++gen) {
        auto tournament = [&] {
            std::size_t best = pop_n;
            for (int k = 0; k < ga.tournament; ++k) {
                const auto c = static_cast<std::size_t>(std::uniform_int_distribution<std::size_t>(0, pop_n - 1)(rng));
                if (best == pop_n || fit[c] > fit[best] || (fit[c] == fit[best] && c < best)) best = c;
            }
            return best;
        };

        std::vector<std::vector<double>> next;
        std::vector<double> next_fit(pop_n), parent_fit(pop_n);
        const std::size_t elite = champion();
        next.push_back(pop[elite]);
        next_fit[0] = fit[elite];
        while (next.size() < pop_n) {
            const std::size_t a = tournament(), b = tournament();
            std::vector<double> child = pop[a];
            if (uniform(0.0, 1.0) < ga.crossover_rate) {
                for (std::size_t g = 0; g < genes_n; ++g) {
                    const double x = pop[a][g], y = pop[b][g];
                    const double u = uniform(0.0, 1.0);
                    if (x == y) continue;
                    const double l1 = std::log(std::min(x, y)), l2 = std::log(std::max(x, y));
                    const double d = l2 - l1;
                    child[g] = std::clamp(std::exp(l1 - ga.blend_alpha * d + u * (1.0 + 2.0 * ga.blend_alpha) * d),
                                          glo[g], ghi[g]);
                }
            }
            if (ga.mutation) {
                for (std::size_t g = 0; g < genes_n; ++g) {
                    if (uniform(0.0, 1.0) >= p_mut) continue;
                    child[g] = std::clamp(child[g] * std::exp(sigma * normal(rng)), glo[g], ghi[g]);
                }
            }
            parent_fit[next.size()] = fit[a];
            next.push_back(std::move(child));
        }
        pop = std::move(next);
        const double elite_fit = next_fit[0];
        fit[0] = elite_fit;
        evaluate(1);

        if (ga.mutation) {
            std::size_t wins = 0;
            for (std::size_t i = 1; i < pop_n; ++i)
                if (fit[i] > parent_fit[i]) ++wins;
            sigma *= static_cast<double>(wins) > 0.2 * static_cast<double>(pop_n - 1) ? 1.22 : 0.82;
            sigma = std::clamp(sigma, 1e-4, 2.0);
        }
        result.best_fitness_history.push_back(fit[champion()]);
    }

    const std::size_t best = champion();
    if (!std::isfinite(fit[best])) throw std::runtime_error("GA found no evaluable schedule");
    result.best_genes = pop[best];
    result.best_schedule = schedule_from_genes(wh, wc, pop[best]);
    const CycleDesign d = design_of(pop[best]);
    cooling_rate(d, &result.best_record);
    result.best_spec = d.build();
    return result;
}

}  // namespace qotto
