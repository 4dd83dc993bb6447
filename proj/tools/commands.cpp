#include "commands.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "nfd/baselines.hpp"
#include "nfd/codec.hpp"
#include "nfd/datagen.hpp"
#include "nfd/distill.hpp"
#include "nfd/errors.hpp"
#include "nfd/grid_io.hpp"
#include "nfd/harmonic.hpp"
#include "nfd/rng.hpp"

namespace nfd::cli {

std::string RunRecord::output(const std::string& name) {
  const std::string path = (std::filesystem::path(out_dir) / name).string();
  outputs.push_back(path);
  return path;
}

namespace {

// ---- shared helpers -------------------------------------------------------

const std::string& required(const Settings& s, const std::string& key) {
  const auto& v = s.str(key);
  if (v.empty()) throw InvalidArgument("setting '" + key + "' is required");
  return v;
}

struct MetricRow {
  std::string experiment, method;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  std::optional<double> accuracy, mean_accuracy, std_accuracy, mse, psnr;

  MetricRow(std::string e, std::string m, std::size_t r, std::uint64_t s, std::size_t b)
      : experiment(std::move(e)), method(std::move(m)), repeat(r), seed(s), budget(b) {}
};

std::string cell(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os.precision(10);
  os << *v;
  return os.str();
}

void write_metrics(const std::string& path, const std::vector<MetricRow>& rows) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << "experiment,method,repeat,seed,budget,accuracy,mean_accuracy,std_accuracy,mse,psnr\n";
  for (const auto& r : rows)
    out << r.experiment << ',' << r.method << ',' << r.repeat << ',' << r.seed << ',' << r.budget << ','
        << cell(r.accuracy) << ',' << cell(r.mean_accuracy) << ',' << cell(r.std_accuracy) << ',' << cell(r.mse)
        << ',' << cell(r.psnr) << '\n';
}

void eval_rows(std::vector<MetricRow>& rows, const EvalResult& e, const std::string& experiment,
               const std::string& method, std::uint64_t seed, std::size_t budget) {
  for (std::size_t k = 0; k < e.accuracies.size(); ++k) {
    MetricRow r(experiment, method, k, seed, budget);
    r.accuracy = e.accuracies[k];
    r.mean_accuracy = e.mean;
    r.std_accuracy = e.std;
    rows.push_back(r);
  }
}

FieldConfig field_config(const Settings& s, std::size_t n, std::size_t m) {
  return FieldConfig::uniform(n, m, s.size("layers"), s.size("width"), s.real("omega0"));
}

FitOptions fit_options(const Settings& s) { return {.iterations = s.size("fit_iterations"), .lr = s.real("fit_lr")}; }

ConvNetConfig net_config(const Settings& s, const GridTensor& sample, std::size_t classes) {
  if (sample.rank() != 2) throw UnsupportedRank("classifiers need 2-D instances");
  ConvNetConfig c;
  c.arch = parse_arch(s.str("net_arch"));
  c.depth = s.size("net_depth");
  c.width = s.size("net_width");
  c.norm = parse_norm(s.str("net_norm"));
  c.channels = sample.channels();
  c.height = sample.shape()[0];
  c.width_px = sample.shape()[1];
  c.classes = classes;
  c.validate();
  return c;
}

AugmentFlags augment_flags(const Settings& s) {
  AugmentFlags f;
  f.flip = s.flag("flip");
  f.crop = s.flag("crop");
  f.cutout = s.flag("cutout");
  return f;
}

TrainConfig train_config(const Settings& s, const GridTensor& sample, std::size_t classes, std::uint64_t seed) {
  TrainConfig t;
  t.net = net_config(s, sample, classes);
  t.epochs = s.size("epochs");
  t.lr = s.real("train_lr");
  t.batch_size = s.size("batch_size");
  t.augment = augment_flags(s);
  t.seed = seed;
  return t;
}

LabeledDataset non_empty(LabeledDataset ds, const std::string& what) {
  if (ds.size() == 0) throw InvalidArgument(what + " is empty");
  return ds;
}

// ---- commands -------------------------------------------------------------

void gen_data(const Settings& common, const Settings& s, RunRecord& rec) {
  const std::uint64_t seed = common.u64("seed");
  const std::string gen = s.str("generator");
  LabeledDataset train, test;
  if (gen == "blobs" || gen == "shapes") {
    const auto make = gen == "blobs" ? make_blobs : make_shapes;
    train = make(s.size("classes"), s.size("size"), s.size("per_class"), derive_seed(seed, "gen-data/train"));
    test = make(s.size("classes"), s.size("size"), s.size("test_per_class"), derive_seed(seed, "gen-data/test"));
  } else if (gen == "external") {
    train = load_external(required(s, "path"), s.str("format"));
    if (!s.str("test_path").empty()) test = load_external(s.str("test_path"), s.str("format"));
  } else {
    throw InvalidArgument("unknown generator '" + gen + "'");
  }
  write_dataset(rec.output("train.lds"), train);
  rec.extra["train_instances"] = train.size();
  if (test.size() > 0) {
    write_dataset(rec.output("test.lds"), test);
    rec.extra["test_instances"] = test.size();
  }
  spdlog::info("wrote {} training and {} test instances", train.size(), test.size());
}

void encode(const Settings& common, const Settings& s, RunRecord& rec) {
  const std::uint64_t seed = derive_seed(common.u64("seed"), "encode");
  const auto data = non_empty(read_dataset(required(s, "data")), "data");
  const auto& first = data.instances[0];
  const FieldConfig cfg = field_config(s, first.rank(), first.channels());
  const FitOptions opt = fit_options(s);
  SyntheticDataset ds;
  if (s.size("per_class") > 0) {
    ds = warmup_dataset(data, s.size("per_class"), cfg, seed, opt);
  } else {
    ds.fields.resize(data.size());
    std::vector<std::exception_ptr> errors(data.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < data.size(); ++i) {
      try {
        ds.fields[i] = fit_field(data.instances[i], cfg, seed + i, opt).field;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    ds.labels = data.labels;
    ds.decode_dims = first.shape();
    ds.channels = first.channels();
    ds.class_count = data.class_count;
  }
  save_bundle(rec.output("bundle.nfb"), ds);
  // decode what was stored so `decode` on the bundle reproduces these grids
  const auto stored = bundle_from_bytes(bundle_to_bytes(ds));
  LabeledDataset decoded{decode_all(stored, stored.decode_dims), stored.labels, stored.class_count};
  write_dataset(rec.output("decoded.lds"), decoded);
  rec.extra["fields"] = ds.size();
  rec.extra["params_per_field"] = param_count(cfg);
  spdlog::info("encoded {} fields of {} parameters", ds.size(), param_count(cfg));
}

void decode_cmd(const Settings&, const Settings& s, RunRecord& rec) {
  const auto ds = load_bundle(required(s, "bundle"));
  Dims dims = parse_dims(s.str("dims"));
  if (dims.empty()) dims = ds.decode_dims;
  if (dims.empty()) throw InvalidArgument("bundle has no decode dims; pass dims");
  LabeledDataset decoded{decode_all(ds, dims), ds.labels, ds.class_count};
  write_dataset(rec.output("decoded.lds"), decoded);
  rec.extra["instances"] = decoded.size();
}

void distill_cmd(const Settings& common, const Settings& s, RunRecord& rec) {
  const std::uint64_t root = common.u64("seed");
  const auto real = non_empty(read_dataset(required(s, "data")), "data");
  const auto& first = real.instances[0];
  SyntheticDataset init;
  if (!s.str("init").empty()) {
    init = load_bundle(s.str("init"));
  } else {
    const FieldConfig cfg = field_config(s, first.rank(), first.channels());
    const std::size_t per_class = plan_budget(s.size("ipc") * first.size(), cfg);
    spdlog::info("budget of {} instance(s) per class holds {} fields of {} parameters", s.size("ipc"), per_class,
                 param_count(cfg));
    init = warmup_dataset(real, per_class, cfg, derive_seed(root, "warmup"), fit_options(s));
  }
  DistillConfig dc;
  dc.loss = parse_loss(s.str("loss"));
  dc.iterations = s.size("iterations");
  dc.real_batch = s.size("real_batch");
  dc.synth_batch = s.size("synth_batch");
  dc.field_lr = s.real("field_lr");
  dc.seed = derive_seed(root, "distill");
  dc.augment = augment_flags(s);
  dc.net = net_config(s, first, std::max(real.class_count, init.class_count));
  dc.dc_inner_steps = s.size("dc_inner_steps");
  dc.dc_classifier_lr = s.real("dc_classifier_lr");
  dc.dc_reinit_every = s.size("dc_reinit_every");
  std::ofstream log(rec.output("loss.csv"));
  const auto result = distill(real, init, dc, &log);
  save_bundle(rec.output("distilled.nfb"), result.dataset);
  rec.extra["fields"] = result.dataset.size();
  rec.extra["total_parameters"] = result.dataset.total_parameters();
  if (!result.losses.empty()) {
    rec.extra["initial_loss"] = result.losses.front();
    rec.extra["final_loss"] = result.losses.back();
  }
}

void eval_cmd(const Settings& common, const Settings& s, RunRecord& rec) {
  const std::uint64_t seed = derive_seed(common.u64("seed"), "eval");
  const auto test = non_empty(read_dataset(required(s, "test")), "test set");
  EvalResult e;
  if (!s.str("synthetic").empty()) {
    const auto synth = load_bundle(s.str("synthetic"));
    const auto cfg = train_config(s, test.instances[0], std::max(test.class_count, synth.class_count), seed);
    e = evaluate(synth, test, cfg, s.size("repeats"));
  } else {
    const auto train = non_empty(read_dataset(required(s, "train")), "training set");
    const auto cfg = train_config(s, test.instances[0], std::max(test.class_count, train.class_count), seed);
    e = evaluate(train, test, cfg, s.size("repeats"));
  }
  std::vector<MetricRow> rows;
  eval_rows(rows, e, s.str("experiment"), s.str("method"), common.u64("seed"), s.size("budget"));
  write_metrics(rec.output("metrics.csv"), rows);
  rec.extra["mean_accuracy"] = e.mean;
  rec.extra["std_accuracy"] = e.std;
  spdlog::info("accuracy {:.4f} +- {:.4f} over {} networks", e.mean, e.std, e.accuracies.size());
}

void baseline_cmd(const Settings& common, const Settings& s, RunRecord& rec) {
  const std::uint64_t root = common.u64("seed");
  const Method method = parse_method(s.str("method"));
  const auto data = non_empty(read_dataset(required(s, "data")), "data");
  const auto& first = data.instances[0];
  std::size_t budget = s.size("budget");
  if (budget == 0)
    budget = static_cast<std::size_t>(std::floor(s.real("budget_fraction") * static_cast<double>(first.size())));

  ReconstructOptions opt;
  opt.plan.omega0 = s.real("omega0");
  opt.plan.max_hidden_layers = s.size("max_layers");
  opt.fit = fit_options(s);
  opt.idc_method = parse_interpolation(s.str("idc_method"));
  const auto plan = plan_instance(method, budget, first.channels(), first.shape(), opt.plan);
  FredMask mask;
  const std::string mask_kind = s.str("mask");
  if (mask_kind != "global" && mask_kind != "instance") throw InvalidArgument("mask must be global or instance");
  if (method == Method::fred && mask_kind == "global") {
    mask = fred_select_mask(data, plan.coefficients);
    opt.mask = &mask;
  }
  rec.extra["budget"] = budget;
  rec.extra["utilized"] = plan.utilized;

  // instances to reconstruct, by task
  const std::string task = s.str("task");
  std::vector<std::size_t> chosen;
  if (task == "reconstruct") {
    for (std::size_t i = 0; i < std::min(s.size("count"), data.size()); ++i) chosen.push_back(i);
  } else if (task == "eval") {
    Rng rng = make_rng(derive_seed(root, "baseline-sample"));
    for (std::size_t c = 0; c < data.class_count; ++c) {
      auto idx = data.indices_of(c);
      const std::size_t k = std::min(s.size("per_class"), idx.size());
      for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + uniform_index(rng, idx.size() - i)]);
      chosen.insert(chosen.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    }
  } else {
    throw InvalidArgument("unknown baseline task '" + task + "'");
  }

  std::vector<GridTensor> recon(chosen.size());
  std::vector<std::exception_ptr> errors(chosen.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t j = 0; j < chosen.size(); ++j) {
    try {
      ReconstructOptions local = opt;
      local.seed = derive_seed(root, "baseline-fit", chosen[j]);
      recon[j] = reconstruct_at_budget(data.instances[chosen[j]], budget, method, local).grid;
    } catch (...) {
      errors[j] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  // a shared mask lets the coefficients be stored as one FRD1 container
  if (method == Method::fred && opt.mask) {
    FredDataset fd{mask, first.channels(), {}, {}};
    for (auto i : chosen) {
      fd.instances.push_back(fred_encode(data.instances[i], mask));
      fd.labels.push_back(data.labels[i]);
    }
    write_fred(rec.output("fred.frd"), fd);
  }

  std::vector<MetricRow> rows;
  const std::string experiment = s.str("experiment"), name(method_name(method));
  if (task == "reconstruct") {
    for (std::size_t j = 0; j < chosen.size(); ++j) {
      MetricRow r(experiment, name, chosen[j], root, plan.utilized);
      r.mse = mse(recon[j], data.instances[chosen[j]]);
      r.psnr = psnr(recon[j], data.instances[chosen[j]]);
      rows.push_back(r);
    }
  } else {
    const auto test = non_empty(read_dataset(required(s, "test")), "test set");
    LabeledDataset train;
    train.instances = recon;
    for (auto i : chosen) train.labels.push_back(data.labels[i]);
    train.class_count = data.class_count;
    const auto cfg = train_config(s, test.instances[0], std::max(test.class_count, data.class_count),
                                  derive_seed(root, "eval"));
    const auto e = evaluate(train, test, cfg, s.size("repeats"));
    eval_rows(rows, e, experiment, name, root, plan.utilized);
    rec.extra["mean_accuracy"] = e.mean;
  }
  write_metrics(rec.output("metrics.csv"), rows);
}

void analyze_cmd(const Settings& common, const Settings& s, RunRecord& rec) {
  const std::string kind = s.str("kind");
  std::ofstream out;
  if (kind == "theorem") {
    out.open(rec.output("theorem.csv"));
    out << "budget,width,zeta_threshold,zeta,harmonic_count\n";
    out.precision(17);
    std::size_t rows = 0;
    for (std::size_t b = s.size("bmin"); b <= s.size("bmax"); ++b, ++rows) {
      const double th = zeta_threshold(b);
      const auto zeta = static_cast<std::uint64_t>(std::ceil(th));
      out << b << ',' << max_width(b) << ',' << th << ',' << zeta << ',' << harmonic_count(zeta, max_width(b)) << '\n';
    }
    rec.extra["rows"] = rows;
  } else if (kind == "expansion") {
    out.open(rec.output("expansion.csv"));
    out << "field,zeta,sup_error\n";
    out.precision(10);
    const std::size_t d = s.size("width"), points = s.size("points");
    if (points < 2) throw InvalidArgument("expansion needs at least 2 points");
    std::vector<double> xs(points);
    for (std::size_t p = 0; p < points; ++p) xs[p] = lattice_coordinate(p, points);
    for (std::size_t f = 0; f < s.size("fields"); ++f) {
      // random field whose folded second-layer rows have absolute sum <= 1
      Rng rng = make_rng(derive_seed(common.u64("seed"), "analyze-field", f));
      auto field = make_field(FieldConfig::uniform(1, 1, 2, d, 30.0));
      const double w0 = field.config.omega0;
      for (auto& v : field.weights[0]) v = uniform(rng, -3.0, 3.0) / w0;
      for (auto& v : field.biases[0]) v = uniform(rng, -1.0, 1.0) / w0;
      for (auto& v : field.weights[1]) v = uniform(rng, -1.0, 1.0) / (w0 * static_cast<double>(d));
      for (auto& v : field.biases[1]) v = uniform(rng, -1.0, 1.0) / w0;
      for (auto& v : field.weights[2]) v = uniform(rng, -1.0, 1.0);
      const GridTensor direct = forward(field, make_coordinate_set({points}));
      for (std::size_t zeta = 0; zeta <= s.size("zeta_max"); ++zeta) {
        const auto approx = eval_expansion(expand(field, zeta), xs);
        double err = 0.0;
        for (std::size_t p = 0; p < points; ++p) err = std::max(err, std::abs(approx[p] - direct[p]));
        out << f << ',' << zeta << ',' << err << '\n';
      }
    }
  } else {
    throw InvalidArgument("unknown analysis '" + kind + "'");
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(part);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void report_cmd(const Settings&, const Settings& s, RunRecord& rec) {
  struct Acc {
    std::size_t rows = 0;
    std::vector<double> acc, mse, psnr;
  };
  std::map<std::pair<std::string, std::string>, Acc> groups;
  std::stringstream list(required(s, "inputs"));
  std::string path;
  while (std::getline(list, path, ',')) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read " + path);
    std::string line;
    std::getline(in, line);
    if (line != "experiment,method,repeat,seed,budget,accuracy,mean_accuracy,std_accuracy,mse,psnr")
      throw InvalidArgument(path + " is not a metrics.csv file");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv_line(line);
      if (f.size() != 10) throw InvalidArgument("malformed row in " + path + ": " + line);
      auto& g = groups[{f[0], f[1]}];
      ++g.rows;
      if (!f[5].empty()) g.acc.push_back(std::stod(f[5]));
      if (!f[8].empty()) g.mse.push_back(std::stod(f[8]));
      if (!f[9].empty()) g.psnr.push_back(std::stod(f[9]));
    }
  }
  auto mean_std = [](const std::vector<double>& v) -> std::pair<std::string, std::string> {
    if (v.empty()) return {"", ""};
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return {cell(m), cell(sd)};
  };
  std::ofstream out(rec.output("summary.csv"));
  out << "experiment,method,rows,mean_accuracy,std_accuracy,mean_mse,std_mse,mean_psnr,std_psnr\n";
  for (const auto& [key, g] : groups) {
    const auto a = mean_std(g.acc), m = mean_std(g.mse), p = mean_std(g.psnr);
    out << key.first << ',' << key.second << ',' << g.rows << ',' << a.first << ',' << a.second << ',' << m.first
        << ',' << m.second << ',' << p.first << ',' << p.second << '\n';
  }
  rec.extra["groups"] = groups.size();
}

}  // namespace

void run_command(const std::string& name, const Settings& common, const Settings& s, RunRecord& rec) {
  if (name == "gen-data") return gen_data(common, s, rec);
  if (name == "encode") return encode(common, s, rec);
  if (name == "decode") return decode_cmd(common, s, rec);
  if (name == "distill") return distill_cmd(common, s, rec);
  if (name == "eval") return eval_cmd(common, s, rec);
  if (name == "baseline") return baseline_cmd(common, s, rec);
  if (name == "analyze") return analyze_cmd(common, s, rec);
  if (name == "report") return report_cmd(common, s, rec);
  throw InvalidArgument("unknown command '" + name + "'");
}

}  // namespace nfd::cli
