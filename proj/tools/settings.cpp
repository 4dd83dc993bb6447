#include "settings.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

#include "nfd/errors.hpp"

namespace nfd::cli {

namespace {

const std::vector<KeySpec> classifier_keys = {
    {"net_arch", "convnet", "classifier architecture: convnet or mlp"},
    {"net_depth", "3", "conv blocks (convnet) or hidden layers (mlp)"},
    {"net_width", "16", "filters per conv block or hidden units"},
    {"net_norm", "instance", "normalization after each conv: instance or none"},
};

const std::vector<KeySpec> train_keys = {
    {"repeats", "5", "independently initialized evaluation networks"},
    {"epochs", "300", "training epochs per evaluation network"},
    {"train_lr", "0.001", "Adam learning rate of the evaluation networks"},
    {"batch_size", "256", "evaluation minibatch size"},
};

const std::vector<KeySpec> augment_keys = {
    {"flip", "false", "random horizontal flip"},
    {"crop", "false", "random pad-and-crop translation"},
    {"cutout", "false", "random zeroed square"},
};

const std::vector<KeySpec> field_keys = {
    {"layers", "2", "hidden sine layers per field"},
    {"width", "6", "units per hidden layer"},
    {"omega0", "30", "sine frequency scale"},
    {"fit_iterations", "5000", "Adam steps when fitting a field to an instance"},
    {"fit_lr", "0.0005", "Adam learning rate when fitting"},
};

std::vector<KeySpec> join(std::initializer_list<std::vector<KeySpec>> parts) {
  std::vector<KeySpec> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

const CommandSpec& common_spec() {
  static const CommandSpec spec{"common",
                                "",
                                {{"seed", "0", "root seed; every random stream derives from it"},
                                 {"out", "out", "output directory"},
                                 {"threads", "0", "OpenMP worker cap (0 = runtime default)"}}};
  return spec;
}

const std::vector<CommandSpec>& command_specs() {
  static const std::vector<CommandSpec> specs = {
      {"gen-data",
       "Generate or import a labeled dataset (train.lds and test.lds)",
       {{"generator", "shapes", "blobs, shapes or external"},
        {"classes", "3", "number of classes"},
        {"size", "16", "image side length in pixels"},
        {"per_class", "100", "training instances per class"},
        {"test_per_class", "100", "test instances per class"},
        {"path", "", "external: training file"},
        {"test_path", "", "external: test file (optional)"},
        {"format", "lds", "external: lds, cifar10 or idx"}}},
      {"encode",
       "Fit one neural field per instance (bundle.nfb, decoded.lds)",
       join({{{"data", "", "LDS dataset to encode"},
              {"per_class", "0", "fields per class sampled from the data; 0 encodes every instance"}},
             field_keys})},
      {"decode",
       "Decode a bundle to a dataset (decoded.lds)",
       {{"bundle", "", "NFB1 bundle"}, {"dims", "", "decode resolution such as 32x32; empty uses the bundle's"}}},
      {"distill",
       "Distill a dataset into neural fields (distilled.nfb, loss.csv)",
       join({{{"data", "", "LDS training set"},
              {"init", "", "NFB1 warm-up bundle; empty runs the warm-up here"},
              {"ipc", "1", "budget in instances per class"},
              {"loss", "dm", "matching loss: dm or dc"},
              {"iterations", "500", "outer iterations"},
              {"real_batch", "32", "real instances per class per iteration"},
              {"synth_batch", "0", "fields per class per iteration (0 = all)"},
              {"field_lr", "0.001", "Adam learning rate on field parameters"},
              {"dc_inner_steps", "1", "DC: classifier updates per iteration"},
              {"dc_classifier_lr", "0.01", "DC: classifier SGD learning rate"},
              {"dc_reinit_every", "10", "DC: iterations between classifier re-initializations"}},
             field_keys, classifier_keys, augment_keys})},
      {"eval",
       "Train networks on a synthetic or real set and test them (metrics.csv)",
       join({{{"synthetic", "", "NFB1 bundle to evaluate"},
              {"train", "", "LDS training set (used when synthetic is empty)"},
              {"test", "", "LDS test set"},
              {"experiment", "eval", "experiment name in metrics.csv"},
              {"method", "ddif", "method name in metrics.csv"},
              {"budget", "0", "budget value recorded in metrics.csv"}},
             train_keys, classifier_keys, augment_keys})},
      {"baseline",
       "Reconstruct or evaluate a parameterization at a per-instance budget (metrics.csv)",
       join({{{"task", "reconstruct", "reconstruct (MSE/PSNR per instance) or eval (train on reconstructions)"},
              {"method", "fred", "ddif, fred, idc or vanilla"},
              {"data", "", "LDS dataset"},
              {"test", "", "eval: LDS test set"},
              {"budget", "0", "scalars per instance; 0 uses budget_fraction"},
              {"budget_fraction", "0.02", "per-instance budget as a fraction of the instance size"},
              {"count", "10", "reconstruct: instances taken from the start of the data"},
              {"per_class", "1", "eval: random real instances per class"},
              {"mask", "global", "fred: global (shared variance mask) or instance (own top coefficients)"},
              {"idc_method", "bilinear", "idc: nearest, bilinear or bicubic"},
              {"max_layers", "3", "ddif: deepest field considered by the planner"},
              {"experiment", "baseline", "experiment name in metrics.csv"}},
             field_keys, train_keys, classifier_keys, augment_keys})},
      {"analyze",
       "Theory tables: theorem (threshold arithmetic) or expansion (truncation error)",
       {{"kind", "theorem", "theorem or expansion"},
        {"bmin", "6", "theorem: smallest budget"},
        {"bmax", "200", "theorem: largest budget"},
        {"width", "3", "expansion: hidden width"},
        {"zeta_max", "10", "expansion: largest truncation"},
        {"fields", "5", "expansion: random fields"},
        {"points", "101", "expansion: evaluation points on [-1, 1]"}}},
      {"report",
       "Summarize metrics.csv files by experiment and method (summary.csv)",
       {{"inputs", "", "comma-separated metrics.csv paths"}}},
  };
  return specs;
}

const CommandSpec& find_command(const std::string& name) {
  if (name == "common") return common_spec();
  for (const auto& s : command_specs())
    if (s.name == name) return s;
  throw InvalidArgument("unknown command '" + name + "'");
}

const std::string& Settings::str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw InvalidArgument("missing setting '" + key + "'");
  return it->second;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end || text.empty())
    throw InvalidArgument("setting '" + key + "' expects a number, got '" + text + "'");
  return v;
}

}  // namespace

std::size_t Settings::size(const std::string& key) const { return parse_number<std::size_t>(key, str(key)); }
std::uint64_t Settings::u64(const std::string& key) const { return parse_number<std::uint64_t>(key, str(key)); }
double Settings::real(const std::string& key) const { return parse_number<double>(key, str(key)); }

bool Settings::flag(const std::string& key) const {
  const auto& v = str(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidArgument("setting '" + key + "' expects true or false, got '" + v + "'");
}

boost::property_tree::ptree load_config(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InvalidArgument("cannot read config: " + std::string(e.what()));
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw InvalidArgument("config key '" + section + "' must sit inside a section");
    const CommandSpec& spec = find_command(section);
    for (const auto& [key, value] : body) {
      bool known = false;
      for (const auto& k : spec.keys) known = known || k.name == key;
      if (!known) throw InvalidArgument("unknown key '" + key + "' in section [" + section + "]");
    }
  }
  return tree;
}

Settings resolve(const CommandSpec& spec, const boost::property_tree::ptree* file,
                 const std::map<std::string, std::string>& overrides) {
  std::map<std::string, std::string> values;
  for (const auto& k : spec.keys) values[k.name] = k.default_value;
  if (file) {
    if (auto section = file->get_child_optional(spec.name))
      for (const auto& [key, value] : *section) values[key] = value.data();
  }
  for (const auto& [key, value] : overrides) {
    if (!values.count(key)) throw InvalidArgument("unknown option '" + key + "' for " + spec.name);
    values[key] = value;
  }
  return Settings(std::move(values));
}

void write_resolved(const std::string& path, const std::string& command, const Settings& common,
                    const Settings& settings) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << "[common]\n";
  for (const auto& [k, v] : common.values()) out << k << " = " << v << '\n';
  out << "\n[" << command << "]\n";
  for (const auto& [k, v] : settings.values()) out << k << " = " << v << '\n';
}

std::vector<std::size_t> parse_dims(const std::string& text) {
  std::vector<std::size_t> dims;
  if (text.empty()) return dims;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) dims.push_back(parse_number<std::size_t>("dims", part));
  for (auto d : dims)
    if (d == 0) throw InvalidArgument("dims must be positive: '" + text + "'");
  return dims;
}

}  // namespace nfd::cli
