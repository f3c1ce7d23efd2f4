#include "qotto/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace qotto {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

const char* kColumns = "T_c,omega_c,tau_hc,tau_c,tau_ch,tau_h,tau_total,Q_c,Q_h,W,R_c,sigma,converged_flag";

class Output {
public:
    Output(const Config& cfg, std::string_view command, const std::string& file) {
        fs::create_directories(cfg.defaults.out);
        path_ = fs::path(cfg.defaults.out) / file;
        stream_.open(path_, std::ios::binary);
        if (!stream_) throw std::runtime_error("cannot write " + path_.string());
        stream_ << "# qotto " << kToolVersion << "\n"
                << "# config_hash " << config_hash(cfg.resolved) << "\n"
                << "# seed " << cfg.defaults.seed << "\n"
                << "# command " << command << "\n"
                << "# config " << cfg.resolved.dump() << "\n";
    }
    std::ostream& operator*() { return stream_; }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
    std::ofstream stream_;
};

std::string join(const std::vector<double>& values, char sep) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += sep;
        s += format_double(values[i]);
    }
    return s;
}

std::vector<double> row_values(double t_c, double omega_c, const CycleRecord& rec) {
    return {t_c,
            omega_c,
            rec.branches[0].duration,
            rec.branches[1].duration,
            rec.branches[2].duration,
            rec.branches[3].duration,
            rec.tau_total,
            rec.q_c,
            rec.q_h,
            rec.work,
            rec.r_c,
            rec.sigma};
}

void print_record(std::ostream& out, const CycleSpec& spec, const CycleRecord& rec) {
    out << "omega_h            " << format_double(spec.omega_h) << "\n"
        << "omega_c            " << format_double(spec.omega_c) << "\n"
        << "tau_hc tau_c       " << format_double(rec.branches[0].duration) << " " << format_double(rec.branches[1].duration) << "\n"
        << "tau_ch tau_h       " << format_double(rec.branches[2].duration) << " " << format_double(rec.branches[3].duration) << "\n"
        << "tau_total          " << format_double(rec.tau_total) << "\n"
        << "Q_c                " << format_double(rec.q_c) << "\n"
        << "Q_h                " << format_double(rec.q_h) << "\n"
        << "W                  " << format_double(rec.work) << "\n"
        << "R_c                " << format_double(rec.r_c) << "\n"
        << "sigma              " << format_double(rec.sigma) << "\n"
        << "COP                " << format_double(rec.cop) << "\n"
        << "first_law_defect   " << format_double(rec.first_law_defect()) << "\n"
        << "spectral_radius    " << format_double(rec.spectral_radius) << "\n"
        << "iterations         " << rec.iterations << "\n"
        << "solver_agreement   " << format_double(rec.solver_agreement) << "\n";
}

int simulate(const Config& cfg, std::ostream& out) {
    const CycleSpec spec = cfg.cycle.build();
    const auto [state, rec] = limit_cycle(spec);
    Output file(cfg, "simulate", "simulate.csv");
    *file << kColumns << "\n" << join(row_values(spec.cold_bath.temperature, spec.omega_c, rec), ',') << ","
          << (rec.converged ? 1 : 0) << "\n";

    const double n_c = equilibrium_state(spec.omega_c, spec.cold_bath).occupation;
    const double n_h = equilibrium_state(spec.omega_h, spec.hot_bath).occupation;
    out << "simulate: limit cycle\n";
    print_record(out, spec, rec);
    out << "n_c_eq n_h_eq      " << format_double(n_c) << " " << format_double(n_h) << "\n"
        << "Q_c bound          " << format_double(spec.omega_c * (n_c - n_h)) << "\n"
        << "written            " << file.path().string() << "\n";
    return 0;
}

int optimize(const Config& cfg, std::ostream& out) {
    const auto res = optimize_time_allocation(cfg.optimize);
    const auto& names = cfg.resolved["optimize"]["free"];
    Output file(cfg, "optimize", "optimize.csv");
    *file << kColumns << "\n"
          << join(row_values(cfg.cycle.cold_bath.temperature, res.best_spec.omega_c, res.best_record), ',') << ","
          << (res.best_record.converged ? 1 : 0) << "\n";
    Output restarts(cfg, "optimize", "optimize_restarts.csv");
    *restarts << "restart";
    for (const auto& n : names) *restarts << ",start_" << n.get<std::string>();
    for (const auto& n : names) *restarts << ",best_" << n.get<std::string>();
    *restarts << ",R_c,evaluations\n";
    for (std::size_t r = 0; r < res.restarts.size(); ++r) {
        const auto& rr = res.restarts[r];
        *restarts << r;
        for (double v : rr.start) *restarts << "," << format_double(v);
        for (double v : rr.best) *restarts << "," << format_double(v);
        *restarts << "," << format_double(rr.r_c) << "," << rr.evaluations << "\n";
    }
    for (const auto& f : res.failures) *restarts << "# evaluation failure: " << f << "\n";

    out << "optimize: " << res.restarts.size() << " restarts, seed " << res.seed << "\n";
    print_record(out, res.best_spec, res.best_record);
    if (res.z_allocation_r_c) {
        out << "z-equation R_c     " << format_double(*res.z_allocation_r_c) << "\n"
            << "search vs z gap    " << format_double(*res.z_relative_gap) << "\n";
    }
    if (!res.failures.empty()) out << "evaluation failures " << res.failures.size() << " (see restarts file)\n";
    out << "written            " << file.path().string() << ", " << restarts.path().string() << "\n";
    return 0;
}

int sweep(const Config& cfg, std::ostream& out) {
    if (cfg.cycle.hot_bath.conductance != cfg.cycle.cold_bath.conductance)
        throw ConfigError("/gamma_c", "sweeps use one conductance; set gamma");
    try {
        cfg.sweep.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("/sweep", e.what());
    }
    const auto table = temperature_sweep(cfg.sweep);
    const double tail = cfg.defaults.tail_fit_decades;
    const std::optional<double> window = tail > 0.0 ? std::optional<double>(tail) : std::nullopt;

    std::optional<PowerLawFit> fit, tau_fit;
    std::string fit_error;
    try {
        fit = fit_cooling_rate(table, window);
        tau_fit = fit_expansion_time(table, window);
    } catch (const std::exception& e) {
        fit_error = e.what();
    }

    Output csv(cfg, "sweep", "sweep.csv");
    Output dat(cfg, "sweep", "sweep.dat");
    *csv << kColumns << "\n";
    *dat << "# " << kColumns << "\n";
    for (const auto& row : table.rows) {
        const std::vector<double> v = {row.t_c,  row.omega_c, row.tau_hc, row.tau_c, row.tau_ch, row.tau_h, row.tau_total,
                                       row.q_c,  row.q_h,     row.work,   row.r_c,   row.sigma};
        *csv << join(v, ',') << "," << (row.converged ? 1 : 0) << "\n";
        *dat << join(v, ' ') << " " << (row.converged ? 1 : 0) << "\n";
    }
    for (auto* f : {&csv, &dat}) {
        for (const auto& row : table.rows) {
            if (!row.error.empty()) **f << "# error row " << row.index << ": " << row.error << "\n";
            else if (!row.cooling) **f << "# flag row " << row.index << ": Q_c <= 0 (not cooling)\n";
        }
        if (fit) {
            **f << "# fit R_c delta " << format_double(fit->delta) << " prefactor " << format_double(fit->prefactor)
                << " rms " << format_double(fit->rms) << " points " << fit->points_used << " window_decades "
                << format_double(tail) << "\n";
            **f << "# fit tau_hc exponent " << format_double(tau_fit->delta) << " points " << tau_fit->points_used
                << "\n";
        } else {
            **f << "# fit unavailable: " << fit_error << "\n";
        }
    }

    out << "sweep: " << to_string(cfg.sweep.kind) << ", " << table.rows.size() << " temperatures, omega_c rule "
        << to_string(cfg.sweep.resolved_omega_rule()) << ", times " << to_string(cfg.sweep.time_rule) << "\n";
    char line[200];
    std::snprintf(line, sizeof line, "%12s %12s %12s %12s %5s\n", "T_c", "omega_c", "tau_total", "R_c", "ok");
    out << line;
    for (const auto& row : table.rows) {
        std::snprintf(line, sizeof line, "%12.5g %12.5g %12.5g %12.5g %5s\n", row.t_c, row.omega_c, row.tau_total,
                      row.r_c, row.converged ? (row.cooling ? "yes" : "heat") : "FAIL");
        out << line;
    }
    if (fit) {
        out << "delta              " << format_double(fit->delta) << " (window " << format_double(tail)
            << " decades, " << fit->points_used << " points)\n"
            << "tau_hc exponent    " << format_double(tau_fit->delta) << "\n";
        for (const auto& w : fit->warnings) out << "warning            " << w << "\n";
    } else {
        out << "fit unavailable    " << fit_error << "\n";
    }
    out << "written            " << csv.path().string() << ", " << dat.path().string() << "\n";
    return 0;
}

int ga(const Config& cfg, std::ostream& out) {
    const auto res = ga_schedule_search(cfg.optimize);
    Output file(cfg, "ga", "ga.csv");
    *file << "generation,best_R_c\n";
    for (std::size_t g = 0; g < res.best_fitness_history.size(); ++g)
        *file << g << "," << format_double(res.best_fitness_history[g]) << "\n";
    *file << "# champion";
    for (const auto& s : res.best_schedule.segments())
        *file << " (" << format_double(s.omega) << ", " << format_double(s.tau) << ")";
    *file << "\n";

    CycleDesign three = cfg.cycle;
    three.expansion = ScheduleRule{};
    three.compression.reset();
    const double r3 = cooling_rate(three);

    out << "ga: " << cfg.optimize.ga.generations << " generations, population " << cfg.optimize.ga.population
        << ", seed " << res.seed << ", " << res.evaluations << " evaluations\n";
    out << "champion segments ";
    for (const auto& s : res.best_schedule.segments())
        out << " (" << format_double(s.omega) << ", " << format_double(s.tau) << ")";
    out << "\n";
    print_record(out, res.best_spec, res.best_record);
    out << "three-jump R_c     " << format_double(r3) << "\n"
        << "ratio              " << format_double(res.best_record.r_c / r3) << "\n"
        << "written            " << file.path().string() << "\n";
    return 0;
}

int critical(const Config& cfg, std::ostream& out) {
    const double wh = cfg.cycle.omega_h, wc = cfg.cycle.omega_c;
    const double ratio = wh / wc;
    const auto cp = critical_mu(ratio);
    const auto tj = three_jump_times(wh, wc);
    const std::vector<std::pair<std::string, double>> values = {
        {"compression_ratio", ratio},       {"mu_star", cp.mu_star},
        {"tau_star_omega_h", cp.tau_omega_h}, {"tau_star", cp.tau_star(wh)},
        {"tau_1", tj.tau_1},                {"tau_2", tj.tau_2},
        {"three_jump_total", tj.total()},   {"kappa_nu_1.5", kappa_for_exponent(1.5)},
        {"kappa_nu_2", kappa_for_exponent(2.0)}};
    Output file(cfg, "critical", "critical.csv");
    *file << "quantity,value\n";
    out << "critical: omega_h " << format_double(wh) << ", omega_c " << format_double(wc) << "\n";
    for (const auto& [k, v] : values) {
        *file << k << "," << format_double(v) << "\n";
        char line[120];
        std::snprintf(line, sizeof line, "%-19s%s\n", k.c_str(), format_double(v).c_str());
        out << line;
    }
    out << "written            " << file.path().string() << "\n";
    return 0;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"simulate", "optimize", "sweep", "ga", "critical"};
    return names;
}

int run_command(std::string_view name, const Config& cfg, std::ostream& out, std::ostream& err) {
    static const std::map<std::string, std::function<int(const Config&, std::ostream&)>, std::less<>> table = {
        {"simulate", simulate}, {"optimize", optimize}, {"sweep", sweep}, {"ga", ga}, {"critical", critical}};
    auto report = [&](const char* kind, const std::string& path, const std::string& message) {
        json e = {{"command", std::string(name)}, {"kind", kind}, {"message", message}};
        if (!path.empty()) e["path"] = path;
        err << "error: " << e.dump() << "\n";
    };
    const auto it = table.find(name);
    if (it == table.end()) {
        report("usage", "", "unknown command '" + std::string(name) + "'");
        return 2;
    }
    try {
        return it->second(cfg, out);
    } catch (const ConfigError& e) {
        report("config", e.path(), e.what());
        return 2;
    } catch (const std::exception& e) {
        report("runtime", "", e.what());
        return 1;
    }
}

}  // namespace qotto
