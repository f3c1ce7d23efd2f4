// config.hpp: JSON configuration for the qotto command-line tool
//
// Top level (natural units, hbar = k_B = 1):
//
//   omega_h, omega_c      hot / cold frequencies                      required
//   T_h, T_c              bath temperatures                           required
//   gamma                 common conductance, or gamma_h + gamma_c    required
//   tau_h, tau_c          isochore durations, or "z" for the z-equation (default "z")
//   ode_tol               adiabat integration tolerance               default 1e-10
//   expansion             schedule object                             default {"kind": "three_jump"}
//   compression           schedule object                             default: time-reversed expansion
//   command-defaults      {seed, threads, out, tail_fit_decades}
//   optimize, ga, sweep   per-command blocks, see README
//
// Schedule objects: {"kind": k, ...} with kind-specific keys
//   three_jump       none
//   const_mu         "mu" (magnitude, default critical mu*) or "duration"
//   linear           "duration"
//   exponential      "duration"
//   piecewise_const  "segments": [{"omega": w, "tau": t}, ...]
//
// Unknown keys are rejected. Errors carry the JSON pointer of the offending key.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "qotto/optimize.hpp"
#include "qotto/scaling.hpp"

namespace qotto {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message);
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

struct CommandDefaults {
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out = ".";
    double tail_fit_decades = 1.0;  // 0: fit the whole sweep
};

struct Config {
    CycleDesign cycle;
    OptimizationSpec optimize;  // base == cycle
    SweepSpec sweep;
    CommandDefaults defaults;
    int ga_three_jump_seeds = 0;
    nlohmann::json resolved;  // every key, defaults filled in
};

Config parse_config(std::string_view json_text);
Config parse_config_file(const std::filesystem::path& path);

// Command-line overrides; the resolved JSON is updated to match.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
    std::optional<double> tail_fit_decades;
};
void apply_overrides(Config& config, const Overrides& overrides);

// 64-bit FNV-1a of the compact resolved JSON, as 16 hex digits.
std::string config_hash(const nlohmann::json& resolved);

}  // namespace qotto
