#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include <boost/math/special_functions/lambert_w.hpp>

#include "oracles.hpp"
#include "qotto/optimize.hpp"

using namespace qotto;
using doctest::Approx;

namespace {

double bose(double w, double t) { return 1.0 / std::expm1(w / t); }

CycleDesign three_jump_design(double wh, double wc, double th, double tc, double gamma) {
    CycleDesign d;
    d.hot_bath = {th, gamma};
    d.cold_bath = {tc, gamma};
    d.omega_h = wh;
    d.omega_c = wc;
    d.expansion.kind = ScheduleKind::three_jump;
    return d;
}

}  // namespace

TEST_CASE("z equation") {
    double a = 2.0 * (std::sinh(1.0) - 1.0);
    auto one = solve_isochore_z(1.0, 1.0, a);
    CHECK(one.z == Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(one.residual) <= 1e-12);
    CHECK(one.tau_h == one.z);

    auto g2 = solve_isochore_z(2.0, 2.0, a / 2.0);
    CHECK(g2.z == Approx(1.0).epsilon(1e-13));
    CHECK(g2.tau_c == Approx(0.5).epsilon(1e-13));

    // small argument: z ~ (3 Gamma tau)^(1/3)
    for (double t : {1e-3, 1e-6, 1e-9}) {
        auto s = solve_isochore_z(1.0, 1.0, t);
        CHECK(s.z == Approx(std::cbrt(3.0 * t)).epsilon(std::cbrt(t)));
        CHECK(std::abs(2 * s.z + t - 2 * std::sinh(s.z)) <= 1e-12 * std::max(1.0, 2 * std::sinh(s.z)));
    }

    auto big = solve_isochore_z(1.0, 1.0, 100.0);
    CHECK(std::abs(2 * big.z + 100.0 - 2 * std::sinh(big.z)) <= 1e-12 * 2 * std::sinh(big.z));
    CHECK(big.z == Approx(std::asinh(0.5 * (2 * big.z + 100.0))).epsilon(1e-14));

    auto zero = solve_isochore_z(1.0, 1.0, 0.0);
    CHECK(zero.degenerate);
    CHECK(zero.z == 0.0);

    CHECK_THROWS(solve_isochore_z(1.0, 2.0, 1.0));
    CHECK_THROWS(solve_isochore_z(1.0, 1.0, -1.0));
    CHECK_THROWS(solve_isochore_z(0.0, 0.0, 1.0));
}

TEST_CASE("z residual over many decades") {
    for (double t = 1e-10; t < 1e4; t *= 1.37) {
        for (double g : {0.1, 1.0, 7.0}) {
            auto s = solve_isochore_z(g, g, t);
            CHECK(std::abs(s.residual) <= 1e-12 * std::max(1.0, 2 * std::sinh(s.z)));
            CHECK(s.z > 0.0);
            CHECK(s.tau_h * g == Approx(s.z).epsilon(1e-15));
        }
    }
}

TEST_CASE("Lambert W0") {
    CHECK(lambert_w0(0.0) == 0.0);
    CHECK(lambert_w0(std::exp(1.0)) == Approx(1.0).epsilon(1e-15));
    CHECK(lambert_w0(-2.0 * std::exp(-2.0)) == Approx(-0.40638).epsilon(1e-5));
    CHECK(lambert_w0(-std::exp(-1.0)) == Approx(-1.0).epsilon(1e-7));
    CHECK_THROWS(lambert_w0(-0.4));

    const double lo = -std::exp(-1.0);
    int n = 0;
    // log-spaced approach to the branch point and log-spaced positive side
    for (double d = 1e-12; d < -lo; d *= 1.5, ++n) {
        double x = lo + d;
        double w = lambert_w0(x);
        CHECK(std::abs(w * std::exp(w) - x) <= 1e-14 * std::max(std::abs(x), 1.0));
        CHECK(w >= -1.0);
        CHECK(w == Approx(boost::math::lambert_w0(x)).epsilon(1e-6));
    }
    for (double x = 1e-12; x <= 1e3; x *= 1.5, ++n) {
        double w = lambert_w0(x);
        CHECK(std::abs(w * std::exp(w) - x) <= 1e-14 * std::max(std::abs(x), 1.0));
        CHECK(w == Approx(boost::math::lambert_w0(x)).epsilon(1e-13));
    }
    CHECK(n > 100);
}

TEST_CASE("optimal cold frequency") {
    CHECK(kappa_for_exponent(2.0) == Approx(1.5936).epsilon(1e-3 / 1.5936));
    CHECK(kappa_for_exponent(1.5) == Approx(0.8745).epsilon(1e-3 / 0.8745));
    for (double nu : {1.2, 1.5, 2.0, 3.0, 5.0}) {
        double k = kappa_for_exponent(nu);
        double g = oracle::golden_max([&](double w) { return std::pow(w, nu) * bose(w, 1.0); }, 1e-6, 50.0);
        CHECK(std::abs(k - g) <= 1e-6);
        // stationarity nu (1 - e^{-k}) = k
        CHECK(nu * -std::expm1(-k) == Approx(k).epsilon(1e-13));
        auto c = optimal_cold_frequency(nu, 0.03);
        CHECK(c.omega_c_star == Approx(k * 0.03).epsilon(1e-15));
    }
    double prev = 0.0;
    for (double nu = 1.05; nu < 20.0; nu += 0.1) {
        double k = kappa_for_exponent(nu);
        CHECK(k > prev);
        CHECK(k < nu);
        prev = k;
    }
    CHECK(kappa_for_exponent(0.5) == 0.0);
}

TEST_CASE("Nelder-Mead") {
    auto rosen = [](const std::vector<double>& x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
    };
    auto r = nelder_mead(rosen, {-1.2, 1.0}, {0.5, 0.5}, 5000, 1e-16, 1e-10);
    CHECK(r.x[0] == Approx(1.0).epsilon(1e-5));
    CHECK(r.x[1] == Approx(1.0).epsilon(1e-5));
    CHECK(r.evaluations <= 5000);

    auto quad = [](const std::vector<double>& x) {
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (i + 1.0) * std::pow(x[i] - 0.1 * i, 2);
        return s;
    };
    auto q = nelder_mead(quad, {1, 1, 1, 1}, {0.3, 0.3, 0.3, 0.3}, 5000, 1e-18, 1e-10);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(q.x[i] - 0.1 * i) < 1e-5);

    // respects the evaluation budget
    auto c = nelder_mead(rosen, {-1.2, 1.0}, {0.5, 0.5}, 30, 0.0, 0.0);
    CHECK(c.evaluations <= 30);
}

TEST_CASE("cooling rate of a design") {
    auto d = three_jump_design(10.0, 1.0, 2.0, 1.0, 1.0);
    CycleRecord rec;
    double r = cooling_rate(d, &rec);
    CHECK(r == rec.r_c);
    CHECK(r > 0.0);
    // z rule: tau_h = tau_c = z with the three-jump adiabat times
    auto spec = d.build();
    auto z = solve_isochore_z(1.0, 1.0, 2.0 * three_jump_times(10.0, 1.0).total());
    CHECK(spec.tau_c == Approx(z.z).epsilon(1e-14));
    CHECK(spec.compression.kind() == ScheduleKind::three_jump);

    auto bad = d;
    bad.omega_c = 20.0;
    std::string why;
    CHECK(cooling_rate(bad, nullptr, &why) == -std::numeric_limits<double>::infinity());
    CHECK(!why.empty());
}

TEST_CASE("time allocation: degenerate free set") {
    OptimizationSpec spec;
    spec.base = three_jump_design(10.0, 1.0, 2.0, 1.0, 1.0);
    auto res = optimize_time_allocation(spec);
    CycleRecord rec;
    cooling_rate(spec.base, &rec);
    CHECK(res.best_record.r_c == rec.r_c);
    CHECK(res.best_record.q_c == rec.q_c);
    CHECK(res.best_spec.tau_c == spec.base.build().tau_c);
}

TEST_CASE("time allocation: z equation matches the search") {
    for (double tc : {0.3, 0.05}) {
        OptimizationSpec spec;
        spec.base = three_jump_design(100.0, 0.8745 * tc, 1.0, tc, 1.0);
        spec.free = {FreeVariable::tau_c, FreeVariable::tau_h};
        spec.bounds = {{1e-3, 1e3}, {1e-3, 1e3}};
        auto res = optimize_time_allocation(spec);
        REQUIRE(res.z_relative_gap.has_value());
        CHECK(std::abs(*res.z_relative_gap) <= 0.01);
        CHECK(res.best_record.r_c >= *res.z_allocation_r_c * (1.0 - 1e-9));
        // the analytic bound
        CHECK(res.best_record.r_c <= tc / res.best_record.tau_total);
    }
}

TEST_CASE("time allocation: optimal cold frequency") {
    // short fixed isochores so that only omega_c is traded off
    OptimizationSpec spec;
    spec.base = three_jump_design(100.0, 0.05, 1.0, 0.05, 1.0);
    spec.base.isochore_rule = IsochoreRule::fixed;
    spec.base.tau_c = spec.base.tau_h = 0.01;
    spec.free = {FreeVariable::omega_c};
    spec.bounds = {{1e-3, 1.0}};
    auto res = optimize_time_allocation(spec);
    double k = res.best_design.omega_c / 0.05;
    CHECK(k >= 0.8);
    CHECK(k <= 0.95);
    CHECK(res.restarts.size() == 4);
}

TEST_CASE("time allocation is deterministic and thread independent") {
    OptimizationSpec spec;
    spec.base = three_jump_design(50.0, 0.2, 1.0, 0.2, 1.0);
    spec.free = {FreeVariable::tau_c, FreeVariable::tau_h, FreeVariable::omega_c};
    spec.bounds = {{1e-3, 1e3}, {1e-3, 1e3}, {1e-2, 5.0}};
    spec.seed = 42;
    spec.max_evaluations = 300;
    auto a = optimize_time_allocation(spec);
    auto b = optimize_time_allocation(spec);
    spec.threads = 3;
    auto c = optimize_time_allocation(spec);
    CHECK(a.best_record.r_c == b.best_record.r_c);
    CHECK(a.best_record.r_c == c.best_record.r_c);
    REQUIRE(a.restarts.size() == c.restarts.size());
    for (std::size_t i = 0; i < a.restarts.size(); ++i) CHECK(a.restarts[i].best == c.restarts[i].best);
    CHECK(a.seed == 42);
}

TEST_CASE("time allocation validates its spec") {
    OptimizationSpec spec;
    spec.base = three_jump_design(10.0, 1.0, 2.0, 1.0, 1.0);
    spec.free = {FreeVariable::tau_c};
    spec.bounds = {{2.0, 1.0}};
    CHECK_THROWS(optimize_time_allocation(spec));
    spec.bounds = {{0.0, 1.0}};
    CHECK_THROWS(optimize_time_allocation(spec));
    spec.bounds = {};
    CHECK_THROWS(optimize_time_allocation(spec));
    CHECK(free_variable_from_string("tau_hc") == FreeVariable::tau_hc);
    CHECK(to_string(FreeVariable::omega_c) == "omega_c");
    CHECK_THROWS(free_variable_from_string("tau_x"));
}

TEST_CASE("genes and schedules") {
    auto g = three_jump_genes(10.0, 1.0);
    REQUIRE(g.size() == 4);
    auto s = schedule_from_genes(10.0, 1.0, g);
    auto t = build_three_jump(10.0, 1.0);
    REQUIRE(s.segments().size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(s.segments()[i].omega == t.segments()[i].omega);
        CHECK(s.segments()[i].tau == t.segments()[i].tau);
    }
}

namespace {

OptimizationSpec ga_spec() {
    OptimizationSpec spec;
    double tc = 1.0 / 0.8745;
    spec.base = three_jump_design(10.0, 1.0, 2.0, tc, 1.0);
    spec.seed = 9;
    spec.ga.generations = 15;
    spec.ga.population = 12;
    return spec;
}

}  // namespace

TEST_CASE("GA: elitist fixed point") {
    auto spec = ga_spec();
    spec.ga.mutation = false;
    spec.ga.population = 32;
    spec.ga.generations = 10;
    auto g = three_jump_genes(10.0, 1.0);
    spec.ga.initial_population.assign(32, g);
    auto res = ga_schedule_search(spec);
    CHECK(res.best_genes == g);
    auto t = build_three_jump(10.0, 1.0);
    REQUIRE(res.best_schedule.segments().size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(res.best_schedule.segments()[i].omega == t.segments()[i].omega);
        CHECK(res.best_schedule.segments()[i].tau == t.segments()[i].tau);
    }
}

TEST_CASE("GA: deterministic, thread independent, monotone") {
    auto spec = ga_spec();
    auto a = ga_schedule_search(spec);
    auto b = ga_schedule_search(spec);
    spec.threads = 4;
    auto c = ga_schedule_search(spec);
    CHECK(a.best_genes == b.best_genes);
    CHECK(a.best_genes == c.best_genes);
    CHECK(a.best_fitness_history == c.best_fitness_history);
    CHECK(a.best_fitness_history.size() == 16);
    for (std::size_t i = 1; i < a.best_fitness_history.size(); ++i)
        CHECK(a.best_fitness_history[i] >= a.best_fitness_history[i - 1]);
    CHECK(a.best_record.r_c == a.best_fitness_history.back());
    CHECK(a.evaluations > 0);

    spec.seed = 10;
    auto d = ga_schedule_search(spec);
    CHECK(d.best_genes != a.best_genes);
}

TEST_CASE("GA: rejects bad settings") {
    auto spec = ga_spec();
    spec.ga.population = 3;
    CHECK_THROWS(ga_schedule_search(spec));
    spec = ga_spec();
    spec.ga.segments = 1;
    CHECK_THROWS(ga_schedule_search(spec));
    spec = ga_spec();
    spec.ga.tau_bounds = {1.0, 0.5};
    CHECK_THROWS(ga_schedule_search(spec));
}
