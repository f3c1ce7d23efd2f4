#include <doctest.h>

#include <cmath>

#include "qotto/scaling.hpp"

using namespace qotto;
using doctest::Approx;

TEST_CASE("power-law fit of exact data") {
    std::vector<std::pair<double, double>> pts;
    for (double t = 1e-4; t <= 1.0; t *= 1.6) pts.emplace_back(t, 7.0 * std::pow(t, 2.5));
    auto f = fit_power_law(pts);
    CHECK(f.delta == Approx(2.5).epsilon(1e-12));
    CHECK(f.prefactor == Approx(7.0).epsilon(1e-10));
    CHECK(f.rms < 1e-12);
    CHECK(f.points_used == static_cast<int>(pts.size()));
    CHECK(f.warnings.empty());
}

TEST_CASE("tail window follows the asymptotic slope") {
    // local slope drifts from 3 near T = 1 to 1.5 as T -> 0
    std::vector<std::pair<double, double>> pts;
    for (double t = 1e-4; t <= 1.0; t *= 1.25) pts.emplace_back(t, std::pow(t, 3.0) + 1e-3 * std::pow(t, 1.5));
    auto full = fit_power_law(pts);
    auto tail = fit_power_law(pts, 1.0);
    CHECK(tail.delta < full.delta);
    CHECK(tail.points_used < full.points_used);
    CHECK(tail.points_used >= 4);
}

TEST_CASE("power-law fit input handling") {
    std::vector<std::pair<double, double>> pts{{1e-3, 1e-6}, {1e-2, 1e-4}, {3e-2, -1.0}, {1e-1, 1e-2}, {1.0, 1.0}};
    auto f = fit_power_law(pts);
    CHECK(f.points_used == 4);
    CHECK(f.warnings.size() == 1);
    CHECK(f.delta == Approx(2.0).epsilon(1e-12));
    pts.pop_back();
    CHECK_THROWS(fit_power_law(pts));
}

TEST_CASE("sweep spec") {
    SweepSpec s;
    s.t_max = 1e-1;
    s.t_min = 1e-3;
    s.points_per_decade = 4;
    auto g = s.grid();
    REQUIRE(g.size() == 9);
    CHECK(g.front() == Approx(1e-1).epsilon(1e-15));
    CHECK(g.back() == 1e-3);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] < g[i - 1]);
    CHECK_NOTHROW(s.validate());

    CHECK(s.resolved_omega_rule() == OmegaRule::kappa);
    CHECK(s.resolved_nu() == 1.5);
    s.kind = ScheduleKind::const_mu;
    CHECK(s.resolved_nu() == 2.0);
    s.kind = ScheduleKind::linear;
    CHECK(s.resolved_omega_rule() == OmegaRule::optimize);

    SweepSpec narrow = s;
    narrow.t_min = 2e-2;
    CHECK_THROWS(narrow.validate());
    SweepSpec few = s;
    few.points_per_decade = 2;
    CHECK_THROWS(few.validate());
    SweepSpec pw = s;
    pw.kind = ScheduleKind::piecewise_const;
    CHECK_THROWS(pw.validate());
}

TEST_CASE("sweep design") {
    SweepSpec s;
    auto d = sweep_design(s, 0.01);
    CHECK(d.omega_c == Approx(kappa_for_exponent(1.5) * 0.01).epsilon(1e-14));
    CHECK(d.omega_h == 100.0);
    CHECK(d.expansion.kind == ScheduleKind::three_jump);
    CHECK(d.isochore_rule == IsochoreRule::z_equation);
}

namespace {

SweepTable small_sweep(ScheduleKind kind) {
    SweepSpec s;
    s.kind = kind;
    s.t_max = 1e-1;
    s.t_min = 1e-3;
    s.points_per_decade = 5;
    return temperature_sweep(s);
}

}  // namespace

TEST_CASE("frictionless sweeps") {
    for (auto kind : {ScheduleKind::three_jump, ScheduleKind::const_mu}) {
        auto t = small_sweep(kind);
        REQUIRE(t.rows.size() == 11);
        for (const auto& r : t.rows) {
            CHECK(r.error.empty());
            CHECK(r.converged);
            CHECK(r.cooling);
            CHECK(r.sigma >= 0.0);
            CHECK(r.q_c <= r.t_c);
            CHECK(r.tau_c == Approx(r.tau_h).epsilon(1e-14));
        }
        // Q_c / T_c settles towards a constant, below the fully equilibrated
        // kappa n_eq(kappa). The three-jump approach is slow: z grows like ln tau_hc.
        double k = kappa_for_exponent(t.spec.resolved_nu());
        double limit = k / std::expm1(k);
        auto ratio = [&](std::size_t i) { return t.rows[i].q_c / t.rows[i].t_c; };
        for (std::size_t i = 0; i < t.rows.size(); ++i) CHECK(ratio(i) < limit);
        double upper = std::abs(ratio(5) - ratio(0)), lower = std::abs(ratio(10) - ratio(5));
        CHECK(lower < upper);

        auto tau = fit_expansion_time(t, 1.0);
        CHECK(tau.delta == Approx(kind == ScheduleKind::const_mu ? -1.0 : -0.5).epsilon(0.05));
        auto r = fit_cooling_rate(t, 1.0);
        CHECK(r.delta > 1.0);
    }
}

TEST_CASE("sweep rows are reproducible and ordered") {
    SweepSpec s;
    s.t_max = 1e-1;
    s.t_min = 1e-3;
    s.points_per_decade = 4;
    s.time_rule = TimeRule::search;
    s.max_evaluations = 120;
    s.restarts = 2;
    auto a = temperature_sweep(s);
    s.threads = 3;
    auto b = temperature_sweep(s);
    REQUIRE(a.rows.size() == b.rows.size());
    auto grid = s.grid();
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].index == i);
        CHECK(a.rows[i].t_c == grid[i]);
        CHECK(a.rows[i].r_c == b.rows[i].r_c);
        CHECK(a.rows[i].seed == s.seed + i);
    }
    auto one = sweep_point(s, 3, grid[3]);
    CHECK(one.r_c == a.rows[3].r_c);
    CHECK(one.omega_c == a.rows[3].omega_c);
}
