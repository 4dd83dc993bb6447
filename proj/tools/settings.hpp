#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace nfd::cli {

struct KeySpec {
  std::string name;
  std::string default_value;
  std::string help;
};

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<KeySpec> keys;
};

/// Keys shared by every command, stored in the [common] section.
const CommandSpec& common_spec();
const std::vector<CommandSpec>& command_specs();
const CommandSpec& find_command(const std::string& name);

/// Flat key/value view with typed accessors; every key is known to exist.
class Settings {
 public:
  Settings() = default;
  explicit Settings(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  const std::string& str(const std::string& key) const;
  std::size_t size(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Parses an INI config file. Sections must be [common] or a command name and
/// every key must belong to that section's whitelist.
boost::property_tree::ptree load_config(const std::string& path);

/// Defaults, then the config file section, then command-line overrides.
Settings resolve(const CommandSpec& spec, const boost::property_tree::ptree* file,
                 const std::map<std::string, std::string>& overrides);

/// Writes [common] and [command] so the run can be repeated with --config.
void write_resolved(const std::string& path, const std::string& command, const Settings& common,
                    const Settings& settings);

/// "32x32" -> {32, 32}; empty string -> {}.
std::vector<std::size_t> parse_dims(const std::string& text);

}  // namespace nfd::cli
