#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace readtask {

inline constexpr int kReportSchemaVersion = 1;

// Every configurable value with its default. Config files and flags may only
// set keys that exist here.
nlohmann::json default_config();

// Runs the command line `args` (without the program name). Progress and the
// run directory go to `out`; failures are written to `err` as a one-line JSON
// record {"error": {"kind", "message"}}. Returns 0 on success, 2 on usage
// errors and 1 on any other failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace readtask
