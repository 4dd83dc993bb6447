#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "settings.hpp"

namespace nfd::cli {

/// Collects what a command wrote; becomes manifest.json.
struct RunRecord {
  std::string out_dir;
  std::vector<std::string> outputs;
  nlohmann::json extra = nlohmann::json::object();

  /// Path inside the output directory; also recorded as an output.
  std::string output(const std::string& name);
};

void run_command(const std::string& name, const Settings& common, const Settings& s, RunRecord& rec);

}  // namespace nfd::cli
