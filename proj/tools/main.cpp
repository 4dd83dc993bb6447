#include <omp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>

#include "commands.hpp"
#include "nfd/errors.hpp"
#include "settings.hpp"

namespace {

using namespace nfd::cli;

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

// Registers one string option per key; only options given on the command
// line end up in `overrides`.
void add_key_options(CLI::App* app, const CommandSpec& spec, std::map<std::string, std::string>& store,
                     std::vector<std::pair<std::string, CLI::Option*>>& given) {
  for (const auto& key : spec.keys) {
    const std::string help = key.help + (key.default_value.empty() ? "" : " [" + key.default_value + "]");
    given.emplace_back(key.name, app->add_option(flag_name(key.name), store[key.name], help));
  }
}

void configure_logging() {
  const char* env = std::getenv("NFD_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
  spdlog::set_pattern("[%H:%M:%S.%e] [%l] %v");
  spdlog::set_default_logger(spdlog::stderr_color_mt("nfd"));
}

void print_error(const std::string& kind, const std::string& message, const std::size_t* offset = nullptr) {
  nlohmann::json line{{"error", kind}, {"message", message}};
  if (offset) line["offset"] = *offset;
  std::cerr << line.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Neural-field dataset distillation experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::map<std::string, std::string> common_store;
  std::vector<std::pair<std::string, CLI::Option*>> common_given;
  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  add_key_options(&app, common_spec(), common_store, common_given);

  std::map<std::string, std::map<std::string, std::string>> stores;
  std::map<std::string, std::vector<std::pair<std::string, CLI::Option*>>> given;
  for (const auto& spec : command_specs()) {
    auto* sub = app.add_subcommand(spec.name, spec.help);
    add_key_options(sub, spec, stores[spec.name], given[spec.name]);
  }
  // `analyze theorem` as well as `analyze --kind theorem`
  std::string analyze_kind;
  auto* kind_pos = app.get_subcommand("analyze")->add_option("kind_pos", analyze_kind, "theorem or expansion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    const CommandSpec& spec = find_command(name);

    std::optional<boost::property_tree::ptree> file;
    if (!config_path.empty()) file = load_config(config_path);

    std::map<std::string, std::string> common_over, over;
    for (const auto& [key, opt] : common_given)
      if (opt->count()) common_over[key] = common_store[key];
    for (const auto& [key, opt] : given[name])
      if (opt->count()) over[key] = stores[name][key];
    if (kind_pos->count()) over["kind"] = analyze_kind;

    const Settings common = resolve(common_spec(), file ? &*file : nullptr, common_over);
    const Settings settings = resolve(spec, file ? &*file : nullptr, over);
    if (const auto threads = common.size("threads"); threads > 0) omp_set_num_threads(static_cast<int>(threads));

    RunRecord rec;
    rec.out_dir = common.str("out");
    std::filesystem::create_directories(rec.out_dir);
    write_resolved(rec.output("config.ini"), name, common, settings);

    spdlog::info("{} (seed {}) -> {}", name, common.u64("seed"), rec.out_dir);
    const auto start = std::chrono::steady_clock::now();
    run_command(name, common, settings, rec);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    nlohmann::json manifest{{"command", name},
                            {"seed", common.u64("seed")},
                            {"threads", common.size("threads")},
                            {"wall_seconds", wall},
                            {"settings", settings.values()},
                            {"outputs", rec.outputs},
                            {"results", rec.extra}};
    std::ofstream(std::filesystem::path(rec.out_dir) / "manifest.json") << manifest.dump(2) << '\n';
    spdlog::info("done in {:.2f} s", wall);
    return 0;
  } catch (const nfd::FormatError& e) {
    const std::size_t offset = e.offset();
    print_error(e.kind(), e.what(), &offset);
  } catch (const nfd::Error& e) {
    print_error(e.kind(), e.what());
  } catch (const std::exception& e) {
    print_error("internal", e.what());
  }
  return 1;
}
