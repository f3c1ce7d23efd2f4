// commands.hpp: the qotto tool's commands, callable without a process boundary

#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "qotto/config.hpp"

namespace qotto {

inline constexpr std::string_view kToolVersion = "0.1.0";

const std::vector<std::string>& command_names();

// Runs one of simulate, optimize, sweep, ga, critical. Files go to
// config.defaults.out, the summary to `out`. On failure a single JSON line
// prefixed "error: " goes to `err`; returns 0 on success, 1 for runtime
// failures, 2 for configuration errors.
int run_command(std::string_view name, const Config& config, std::ostream& out, std::ostream& err);

// "%.17g"
std::string format_double(double x);

}  // namespace qotto
