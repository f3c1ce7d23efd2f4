#include "qotto/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace qotto {

using nlohmann::json;

ConfigError::ConfigError(std::string path, const std::string& message)
    : std::runtime_error((path.empty() ? std::string("/") : path) + ": " + message), path_(std::move(path)) {}

namespace {

// A JSON object being consumed key by key; leftover keys are errors.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    }

    std::string at(std::string_view key) const { return path_ + "/" + std::string(key); }
    bool has(std::string_view key) const { return j_.contains(std::string(key)); }

    const json& raw(std::string_view key) {
        seen_.insert(std::string(key));
        return j_.at(std::string(key));
    }

    double number(std::string_view key) {
        const json& v = raw(key);
        if (!v.is_number()) throw ConfigError(at(key), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(at(key), "must be finite");
        return x;
    }
    double positive(std::string_view key) {
        const double x = number(key);
        if (!(x > 0.0)) throw ConfigError(at(key), "must be positive (got " + json(x).dump() + ")");
        return x;
    }
    double positive_or(std::string_view key, double fallback) { return has(key) ? positive(key) : fallback; }
    std::optional<double> optional_positive(std::string_view key) {
        if (!has(key)) return std::nullopt;
        return positive(key);
    }
    long integer(std::string_view key, long fallback, long min) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
        const long x = v.get<long>();
        if (x < min) throw ConfigError(at(key), "must be at least " + std::to_string(min));
        return x;
    }
    std::uint64_t unsigned64(std::string_view key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw ConfigError(at(key), "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }
    bool boolean(std::string_view key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
        return v.get<bool>();
    }
    std::string string(std::string_view key, std::string fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_string()) throw ConfigError(at(key), "expected a string");
        return v.get<std::string>();
    }
    Bounds bounds(std::string_view key) {
        const json& v = raw(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw ConfigError(at(key), "expected [lo, hi]");
        const Bounds b{v[0].get<double>(), v[1].get<double>()};
        if (!(b.lo > 0.0) || !(b.hi >= b.lo) || !std::isfinite(b.hi))
            throw ConfigError(at(key), "bounds need 0 < lo <= hi < inf");
        return b;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

ScheduleKind parse_kind(const json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path, "expected a schedule kind string");
    try {
        return schedule_kind_from_string(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
}

std::pair<ScheduleRule, json> parse_schedule(const json& j, const std::string& path) {
    Node n(j, path);
    if (!n.has("kind")) throw ConfigError(n.at("kind"), "missing schedule kind");
    ScheduleRule rule;
    rule.kind = parse_kind(n.raw("kind"), n.at("kind"));
    json out = {{"kind", std::string(to_string(rule.kind))}};
    switch (rule.kind) {
    case ScheduleKind::three_jump: break;
    case ScheduleKind::const_mu:
        if (n.has("mu") && n.has("duration")) throw ConfigError(n.at("mu"), "give either mu or duration, not both");
        if (n.has("mu")) {
            const double mu = n.number("mu");
            if (mu == 0.0) throw ConfigError(n.at("mu"), "must be non-zero");
            rule.mu = std::abs(mu);
            out["mu"] = *rule.mu;
        } else if (n.has("duration")) {
            rule.duration = n.positive("duration");
            out["duration"] = *rule.duration;
        } else {
            out["mu"] = "critical";
        }
        break;
    case ScheduleKind::linear:
    case ScheduleKind::exponential:
        if (!n.has("duration")) throw ConfigError(n.at("duration"), "required for this schedule kind");
        rule.duration = n.positive("duration");
        out["duration"] = *rule.duration;
        break;
    case ScheduleKind::piecewise_const: {
        if (!n.has("segments")) throw ConfigError(n.at("segments"), "required for this schedule kind");
        const json& segs = n.raw("segments");
        if (!segs.is_array() || segs.empty()) throw ConfigError(n.at("segments"), "expected a non-empty array");
        out["segments"] = json::array();
        for (std::size_t i = 0; i < segs.size(); ++i) {
            Node s(segs[i], n.at("segments") + "/" + std::to_string(i));
            Segment seg{s.positive("omega"), 0.0};
            seg.tau = s.number("tau");
            if (seg.tau < 0.0) throw ConfigError(s.at("tau"), "must be non-negative");
            s.finish();
            rule.segments.push_back(seg);
            out["segments"].push_back({{"omega", seg.omega}, {"tau", seg.tau}});
        }
        break;
    }
    }
    n.finish();
    return {rule, out};
}

// Wraps library validation errors with the JSON path of the block.
template <class Fn>
void checked(const std::string& path, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(path, e.what());
    }
}

}  // namespace

Config parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    Node top(doc, "");
    Config cfg;
    json& r = cfg.resolved;
    CycleDesign& d = cfg.cycle;

    for (auto key : {"omega_h", "omega_c", "T_h", "T_c"})
        if (!top.has(key)) throw ConfigError(top.at(key), "required");
    d.omega_h = top.positive("omega_h");
    d.omega_c = top.positive("omega_c");
    if (!(d.omega_h > d.omega_c)) throw ConfigError(top.at("omega_c"), "must be below omega_h");
    d.hot_bath.temperature = top.positive("T_h");
    d.cold_bath.temperature = top.positive("T_c");
    if (top.has("gamma")) {
        if (top.has("gamma_h") || top.has("gamma_c"))
            throw ConfigError(top.at("gamma"), "give either gamma or gamma_h/gamma_c");
        d.hot_bath.conductance = d.cold_bath.conductance = top.positive("gamma");
    } else {
        if (!top.has("gamma_h") || !top.has("gamma_c"))
            throw ConfigError(top.at("gamma"), "required (or both gamma_h and gamma_c)");
        d.hot_bath.conductance = top.positive("gamma_h");
        d.cold_bath.conductance = top.positive("gamma_c");
    }
    r["omega_h"] = d.omega_h;
    r["omega_c"] = d.omega_c;
    r["T_h"] = d.hot_bath.temperature;
    r["T_c"] = d.cold_bath.temperature;
    r["gamma_h"] = d.hot_bath.conductance;
    r["gamma_c"] = d.cold_bath.conductance;

    auto tau_of = [&](const char* key) -> std::optional<double> {
        if (!top.has(key)) return std::nullopt;
        const json& v = top.raw(key);
        if (v.is_string()) {
            if (v.get<std::string>() != "z") throw ConfigError(top.at(key), "expected a duration or \"z\"");
            return std::nullopt;
        }
        if (!v.is_number() || !(v.get<double>() >= 0.0) || !std::isfinite(v.get<double>()))
            throw ConfigError(top.at(key), "must be a non-negative duration or \"z\"");
        return v.get<double>();
    };
    const auto tc = tau_of("tau_c");
    const auto th = tau_of("tau_h");
    if (tc.has_value() != th.has_value())
        throw ConfigError(top.at(tc ? "tau_h" : "tau_c"), "tau_c and tau_h must both be durations or both \"z\"");
    if (tc) {
        d.isochore_rule = IsochoreRule::fixed;
        d.tau_c = *tc;
        d.tau_h = *th;
        r["tau_c"] = d.tau_c;
        r["tau_h"] = d.tau_h;
    } else {
        if (d.hot_bath.conductance != d.cold_bath.conductance)
            throw ConfigError(top.at("tau_c"), "the z-equation needs gamma_h == gamma_c; give explicit durations");
        r["tau_c"] = "z";
        r["tau_h"] = "z";
    }
    d.ode_tol = top.has("ode_tol") ? top.positive("ode_tol") : 1e-10;
    if (!(d.ode_tol >= 1e-13 && d.ode_tol <= 1e-6)) throw ConfigError(top.at("ode_tol"), "must lie in [1e-13, 1e-6]");
    r["ode_tol"] = d.ode_tol;

    if (top.has("expansion")) {
        auto [rule, out] = parse_schedule(top.raw("expansion"), top.at("expansion"));
        d.expansion = rule;
        r["expansion"] = out;
    } else {
        r["expansion"] = {{"kind", "three_jump"}};
    }
    if (top.has("compression") && top.raw("compression").is_string()) {
        if (top.raw("compression") != "mirror")
            throw ConfigError(top.at("compression"), "expected a schedule object or \"mirror\"");
        r["compression"] = "mirror";
    } else if (top.has("compression")) {
        auto [rule, out] = parse_schedule(top.raw("compression"), top.at("compression"));
        d.compression = rule;
        r["compression"] = out;
    } else {
        r["compression"] = "mirror";
    }
    checked("", [&] { (void)d.build(); });

    // command-defaults
    if (top.has("command-defaults")) {
        Node n(top.raw("command-defaults"), top.at("command-defaults"));
        cfg.defaults.seed = n.unsigned64("seed", cfg.defaults.seed);
        cfg.defaults.threads = static_cast<int>(n.integer("threads", cfg.defaults.threads, 1));
        cfg.defaults.out = n.string("out", cfg.defaults.out);
        if (n.has("tail_fit_decades")) {
            cfg.defaults.tail_fit_decades = n.number("tail_fit_decades");
            if (cfg.defaults.tail_fit_decades < 0.0) throw ConfigError(n.at("tail_fit_decades"), "must be >= 0");
        }
        n.finish();
    }

    // optimize
    OptimizationSpec& o = cfg.optimize;
    o.base = d;
    {
        std::optional<Node> n;
        if (top.has("optimize")) n.emplace(top.raw("optimize"), top.at("optimize"));
        json out;
        std::vector<std::string> names = {"tau_c", "tau_h"};
        if (n && n->has("free")) {
            const json& f = n->raw("free");
            if (!f.is_array()) throw ConfigError(n->at("free"), "expected an array of variable names");
            names.clear();
            for (std::size_t i = 0; i < f.size(); ++i) {
                const std::string p = n->at("free") + "/" + std::to_string(i);
                if (!f[i].is_string()) throw ConfigError(p, "expected a variable name");
                checked(p, [&] { o.free.push_back(free_variable_from_string(f[i].get<std::string>())); });
                names.push_back(f[i].get<std::string>());
            }
        } else {
            o.free = {FreeVariable::tau_c, FreeVariable::tau_h};
        }
        std::optional<Node> b;
        if (n && n->has("bounds")) b.emplace(n->raw("bounds"), n->at("bounds"));
        const double gmin = std::min(d.hot_bath.conductance, d.cold_bath.conductance);
        const double gmax = std::max(d.hot_bath.conductance, d.cold_bath.conductance);
        const CycleSpec base_spec = d.build();
        out["bounds"] = json::object();
        for (std::size_t i = 0; i < o.free.size(); ++i) {
            Bounds bd{};
            if (b && b->has(names[i])) {
                bd = b->bounds(names[i]);
            } else {
                switch (o.free[i]) {
                case FreeVariable::tau_c:
                case FreeVariable::tau_h: bd = {1e-3 / gmax, 1e3 / gmin}; break;
                case FreeVariable::omega_c:
                    bd = {1e-2 * d.cold_bath.temperature, std::min(1e2 * d.cold_bath.temperature, 0.5 * d.omega_h)};
                    break;
                case FreeVariable::tau_hc: {
                    const double v = base_spec.expansion.duration();
                    bd = v > 0.0 ? Bounds{1e-3 * v, 1e3 * v} : Bounds{1e-3, 1e3};
                    break;
                }
                case FreeVariable::tau_ch: {
                    const double v = base_spec.compression.duration();
                    bd = v > 0.0 ? Bounds{1e-3 * v, 1e3 * v} : Bounds{1e-3, 1e3};
                    break;
                }
                }
            }
            o.bounds.push_back(bd);
            out["bounds"][names[i]] = {bd.lo, bd.hi};
        }
        if (b) b->finish();
        out["free"] = names;
        if (n) {
            o.restarts = static_cast<int>(n->integer("restarts", o.restarts, 1));
            o.max_evaluations = static_cast<int>(n->integer("max_evaluations", o.max_evaluations, 1));
            if (n->has("ftol")) o.ftol = n->positive("ftol");
            if (n->has("xtol")) o.xtol = n->positive("xtol");
            n->finish();
        }
        out["restarts"] = o.restarts;
        out["max_evaluations"] = o.max_evaluations;
        out["ftol"] = o.ftol;
        out["xtol"] = o.xtol;
        r["optimize"] = out;
    }

    // ga
    {
        GaOptions& g = o.ga;
        std::optional<Node> n;
        if (top.has("ga")) n.emplace(top.raw("ga"), top.at("ga"));
        if (n) {
            g.segments = static_cast<int>(n->integer("segments", g.segments, 2));
            g.population = static_cast<int>(n->integer("population", g.population, 4));
            g.generations = static_cast<int>(n->integer("generations", g.generations, 0));
            g.tournament = static_cast<int>(n->integer("tournament", g.tournament, 1));
            if (n->has("crossover_rate")) {
                g.crossover_rate = n->number("crossover_rate");
                if (g.crossover_rate < 0.0 || g.crossover_rate > 1.0)
                    throw ConfigError(n->at("crossover_rate"), "must lie in [0, 1]");
            }
            if (n->has("blend_alpha")) {
                g.blend_alpha = n->number("blend_alpha");
                if (g.blend_alpha < 0.0) throw ConfigError(n->at("blend_alpha"), "must be non-negative");
            }
            g.mutation = n->boolean("mutation", g.mutation);
            g.mutation_sigma = n->positive_or("mutation_sigma", g.mutation_sigma);
            if (n->has("tau_bounds")) g.tau_bounds = n->bounds("tau_bounds");
            cfg.ga_three_jump_seeds = static_cast<int>(n->integer("three_jump_seeds", 0, 0));
            n->finish();
        }
        if (cfg.ga_three_jump_seeds > 0) {
            if (g.segments != 2) throw ConfigError("/ga/three_jump_seeds", "three-jump seeds need segments = 2");
            const auto genes = three_jump_genes(d.omega_h, d.omega_c);
            for (std::size_t k = 1; k < genes.size(); k += 2)
                if (genes[k] < g.tau_bounds.lo || genes[k] > g.tau_bounds.hi)
                    throw ConfigError("/ga/tau_bounds", "three-jump hold times fall outside the bounds");
            g.initial_population.assign(static_cast<std::size_t>(cfg.ga_three_jump_seeds), genes);
        }
        r["ga"] = {{"segments", g.segments},
                   {"population", g.population},
                   {"generations", g.generations},
                   {"tournament", g.tournament},
                   {"crossover_rate", g.crossover_rate},
                   {"blend_alpha", g.blend_alpha},
                   {"mutation", g.mutation},
                   {"mutation_sigma", g.mutation_sigma},
                   {"tau_bounds", {g.tau_bounds.lo, g.tau_bounds.hi}},
                   {"three_jump_seeds", cfg.ga_three_jump_seeds}};
    }

    // sweep
    {
        SweepSpec& s = cfg.sweep;
        s.kind = d.expansion.kind == ScheduleKind::piecewise_const ? ScheduleKind::three_jump : d.expansion.kind;
        s.omega_h = d.omega_h;
        s.t_h = d.hot_bath.temperature;
        s.gamma = d.hot_bath.conductance;
        s.ode_tol = d.ode_tol;
        std::optional<Node> n;
        if (top.has("sweep")) n.emplace(top.raw("sweep"), top.at("sweep"));
        if (n) {
            if (n->has("kind")) s.kind = parse_kind(n->raw("kind"), n->at("kind"));
            s.t_max = n->positive_or("t_max", s.t_max);
            s.t_min = n->positive_or("t_min", s.t_min);
            s.points_per_decade = static_cast<int>(n->integer("points_per_decade", s.points_per_decade, 1));
            if (n->has("omega_rule")) {
                const std::string rule = n->string("omega_rule", "");
                if (rule == "kappa") s.omega_rule = OmegaRule::kappa;
                else if (rule == "optimize") s.omega_rule = OmegaRule::optimize;
                else throw ConfigError(n->at("omega_rule"), "expected \"kappa\" or \"optimize\"");
            }
            s.nu = n->optional_positive("nu");
            if (n->has("time_rule")) {
                const std::string rule = n->string("time_rule", "");
                if (rule == "z") s.time_rule = TimeRule::z_equation;
                else if (rule == "search") s.time_rule = TimeRule::search;
                else throw ConfigError(n->at("time_rule"), "expected \"z\" or \"search\"");
            }
            s.restarts = static_cast<int>(n->integer("restarts", s.restarts, 1));
            s.max_evaluations = static_cast<int>(n->integer("max_evaluations", s.max_evaluations, 1));
            n->finish();
        }
        json nu = nullptr;
        checked("/sweep", [&] { nu = s.resolved_nu(); });
        r["sweep"] = {{"kind", std::string(to_string(s.kind))},
                      {"t_max", s.t_max},
                      {"t_min", s.t_min},
                      {"points_per_decade", s.points_per_decade},
                      {"omega_rule", std::string(to_string(s.resolved_omega_rule()))},
                      {"nu", nu},
                      {"time_rule", std::string(to_string(s.time_rule))},
                      {"restarts", s.restarts},
                      {"max_evaluations", s.max_evaluations}};
    }

    top.finish();
    apply_overrides(cfg, {});
    checked("/optimize", [&] { o.validate(); });
    return cfg;
}

Config parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void apply_overrides(Config& cfg, const Overrides& ov) {
    auto& d = cfg.defaults;
    if (ov.seed) d.seed = *ov.seed;
    if (ov.threads) {
        if (*ov.threads < 1) throw ConfigError("/command-defaults/threads", "must be at least 1");
        d.threads = *ov.threads;
    }
    if (ov.out) d.out = *ov.out;
    if (ov.tail_fit_decades) {
        if (*ov.tail_fit_decades < 0.0) throw ConfigError("/command-defaults/tail_fit_decades", "must be >= 0");
        d.tail_fit_decades = *ov.tail_fit_decades;
    }
    cfg.optimize.seed = cfg.sweep.seed = d.seed;
    cfg.optimize.threads = cfg.sweep.threads = d.threads;
    cfg.resolved["command-defaults"] = {
        {"seed", d.seed}, {"threads", d.threads}, {"out", d.out}, {"tail_fit_decades", d.tail_fit_decades}};
}

std::string config_hash(const json& resolved) {
    // Threads and the output directory do not change any result.
    json j = resolved;
    if (j.contains("command-defaults")) {
        j["command-defaults"].erase("threads");
        j["command-defaults"].erase("out");
    }
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace qotto
