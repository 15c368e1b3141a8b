#include "strecover/cli.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "strecover/checkpoint.hpp"
#include "strecover/error.hpp"
#include "strecover/evaluation.hpp"
#include "strecover/lfa_engine.hpp"
#include "strecover/spatial_graph.hpp"
#include "strecover/synthetic.hpp"
#include "strecover/text_format.hpp"

namespace strecover::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Values bound by CLI11; an option counts only if it appeared on the line.
struct TrainFlags {
  Index d = 0;
  double lambda = 0, eta = 0, beta1 = 0, beta2 = 0, tol = 0;
  std::size_t max_epochs = 0, mu = 0;
  Index k_nn = 0;
  CLI::Option* opt_d = nullptr;
  CLI::Option* opt_lambda = nullptr;
  CLI::Option* opt_eta = nullptr;
  CLI::Option* opt_beta1 = nullptr;
  CLI::Option* opt_beta2 = nullptr;
  CLI::Option* opt_tol = nullptr;
  CLI::Option* opt_max_epochs = nullptr;
  CLI::Option* opt_mu = nullptr;
  CLI::Option* opt_k_nn = nullptr;

  void attach(CLI::App* app) {
    opt_d = app->add_option("--d", d, "Latent dimension");
    opt_lambda = app->add_option("--lambda", lambda, "Tikhonov weight");
    opt_eta = app->add_option("--eta", eta, "Learning rate");
    opt_beta1 = app->add_option("--beta1", beta1, "Spatial smoothness weight");
    opt_beta2 = app->add_option("--beta2", beta2, "Temporal smoothness weight");
    opt_tol = app->add_option("--tol", tol, "Early-stopping tolerance on the RMSE change");
    opt_max_epochs = app->add_option("--max-epochs", max_epochs, "Epoch cap");
    opt_mu = app->add_option("--mu", mu, "Full update on every mu-th entry");
    opt_k_nn = app->add_option("--k-nn", k_nn, "Neighbours per sensor");
  }

  void overlay(TrainConfig& cfg) const {
    if (opt_d->count()) cfg.d = d;
    if (opt_lambda->count()) cfg.lambda = lambda;
    if (opt_eta->count()) cfg.eta = eta;
    if (opt_beta1->count()) cfg.beta1 = beta1;
    if (opt_beta2->count()) cfg.beta2 = beta2;
    if (opt_tol->count()) cfg.tol = tol;
    if (opt_max_epochs->count()) cfg.max_epochs = max_epochs;
    if (opt_mu->count()) cfg.mu = mu;
    if (opt_k_nn->count()) cfg.k_nn = k_nn;
  }
};

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  CLI::Option* opt_seed = nullptr;
  CLI::Option* opt_out = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON config file");
    opt_seed = app->add_option("--seed", seed, "Random seed");
    opt_out = app->add_option("--out", out, "Output directory");
  }
};

// Parsed config file: sections "train", "synth", "paths".
struct FileConfig {
  json train = json::object();
  json synth = json::object();
  std::map<std::string, std::string> paths;
};

FileConfig load_config(const std::string& path) {
  FileConfig fc;
  if (path.empty()) return fc;
  json doc;
  try {
    doc = json::parse(text::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError("config '" + path + "': " + e.what(), 0);
  }
  if (!doc.is_object()) throw ParseError("config must be a JSON object", 0);
  for (auto& [key, value] : doc.items()) {
    if (!value.is_object()) throw ParseError("config section '" + key + "' must be an object", 0);
    if (key == "train") {
      fc.train = value;
    } else if (key == "synth") {
      fc.synth = value;
    } else if (key == "paths") {
      for (auto& [name, p] : value.items()) {
        if (!p.is_string()) throw ParseError("paths." + name + " must be a string", 0);
        fc.paths[name] = p.get<std::string>();
      }
    } else {
      throw ParseError("unknown config section '" + key + "'", 0);
    }
  }
  return fc;
}

SynthSpec synth_from_json(const json& j, SynthSpec spec) {
  auto index = [](const json& v, const std::string& key) -> Index {
    if (!v.is_number_unsigned()) throw ParseError("synth." + key + " must be a non-negative integer", 0);
    return v.get<Index>();
  };
  auto number = [](const json& v, const std::string& key) {
    if (!v.is_number()) throw ParseError("synth." + key + " must be a number", 0);
    return v.get<double>();
  };
  for (auto& [key, v] : j.items()) {
    if (key == "rows") spec.rows = index(v, key);
    else if (key == "cols") spec.cols = index(v, key);
    else if (key == "rank") spec.rank = index(v, key);
    else if (key == "spatial_rounds") spec.spatial_rounds = index(v, key);
    else if (key == "temporal_rounds") spec.temporal_rounds = index(v, key);
    else if (key == "smoothing_k") spec.smoothing_k = index(v, key);
    else if (key == "noise") spec.noise = number(v, key);
    else if (key == "box") spec.box = number(v, key);
    else if (key == "seed") spec.seed = index(v, key);
    else throw ParseError("unknown synth key '" + key + "'", 0);
  }
  return spec;
}

// Flag value if given, else the config's paths entry, else empty.
std::string pick_path(const std::string& flag, const FileConfig& fc, const std::string& key) {
  if (!flag.empty()) return flag;
  auto it = fc.paths.find(key);
  return it == fc.paths.end() ? std::string() : it->second;
}

std::string require_path(const std::string& flag, const FileConfig& fc, const std::string& key,
                         const std::string& flag_name) {
  std::string p = pick_path(flag, fc, key);
  if (p.empty()) throw ParameterError("missing " + flag_name);
  return p;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
}

// Triplets sized by an explicit meta.json, or one next to the data file.
ObservedMatrix load_matrix(const fs::path& data, const std::string& meta) {
  std::optional<Dims> dims;
  if (!meta.empty()) {
    dims = load_dims(meta);
  } else if (fs::path sibling = data.parent_path() / "meta.json"; fs::exists(sibling)) {
    dims = load_dims(sibling);
  }
  return load_triplets(data, dims);
}

TrainConfig resolve_train(const FileConfig& fc, const TrainFlags& tf, const Common& c) {
  TrainConfig cfg = config_from_json(fc.train);
  tf.overlay(cfg);
  if (c.opt_seed->count()) cfg.seed = c.seed;
  cfg.validate();
  return cfg;
}

std::vector<std::string> split_list(std::string_view spec) {
  std::vector<std::string> items;
  for (auto& part : text::split(spec, ',')) {
    std::string t(text::trim(part));
    if (t.empty()) throw ParameterError("empty item in list '" + std::string(spec) + "'");
    items.push_back(std::move(t));
  }
  return items;
}

std::vector<ModelVariant> parse_models(const std::string& spec, const TrainConfig& cfg) {
  std::vector<ModelVariant> models;
  for (const auto& name : split_list(spec)) {
    if (name == "rtd") models.push_back(lfa_rtd(cfg));
    else if (name == "lfa") models.push_back(plain_lfa(cfg));
    else throw ParameterError("unknown model '" + name + "' (expected rtd or lfa)");
  }
  return models;
}

struct GenerateArgs {
  std::string preset;
  Index rows = 0, cols = 0, rank = 0, spatial_rounds = 0, temporal_rounds = 0, smoothing_k = 0;
  double noise = 0, box = 0;
  std::map<std::string, CLI::Option*> opts;
};

int cmd_generate(const GenerateArgs& g, const Common& c, std::ostream& out) {
  FileConfig fc = load_config(c.config);
  SynthSpec spec;
  if (!g.preset.empty() && g.preset != "smoke") {
    throw ParameterError("unknown preset '" + g.preset + "'");
  }
  if (g.preset == "smoke") spec = smoke_spec();
  spec = synth_from_json(fc.synth, spec);
  auto given = [&](const char* name) { return g.opts.at(name)->count() > 0; };
  if (given("rows")) spec.rows = g.rows;
  if (given("cols")) spec.cols = g.cols;
  if (given("rank")) spec.rank = g.rank;
  if (given("spatial-rounds")) spec.spatial_rounds = g.spatial_rounds;
  if (given("temporal-rounds")) spec.temporal_rounds = g.temporal_rounds;
  if (given("smoothing-k")) spec.smoothing_k = g.smoothing_k;
  if (given("noise")) spec.noise = g.noise;
  if (given("box")) spec.box = g.box;
  if (c.opt_seed->count()) spec.seed = c.seed;
  fs::path dir = require_path(c.out, fc, "out", "--out");
  SyntheticDataset data = generate(spec);
  ensure_dir(dir);
  write_dataset(dir, data);
  out << "generated " << spec.rows << "x" << spec.cols << " rank " << spec.rank << " seed "
      << spec.seed << " -> " << dir.string() << "\n";
  return kExitOk;
}

struct SplitArgs {
  std::string data, meta;
  double rate = 0;
};

int cmd_split(const SplitArgs& s, const Common& c, std::ostream& out) {
  FileConfig fc = load_config(c.config);
  fs::path data = require_path(s.data, fc, "data", "--data");
  fs::path dir = require_path(c.out, fc, "out", "--out");
  std::uint64_t seed = c.opt_seed->count() ? c.seed : 1;
  ObservedMatrix full = load_matrix(data, pick_path(s.meta, fc, "meta"));
  auto [train_m, test] = split_by_sampling_rate(full, s.rate, seed);
  ensure_dir(dir);
  write_triplets(dir / "train.csv", train_m.entries());
  write_triplets(dir / "test.csv", test.entries);
  write_dims(dir / "meta.json", full.dims());
  out << "split " << full.size() << " entries: train " << train_m.size() << ", test "
      << test.size() << " -> " << dir.string() << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string data, coords, meta;
};

int cmd_train(const TrainArgs& t, const TrainFlags& tf, const Common& c, std::ostream& out) {
  FileConfig fc = load_config(c.config);
  TrainConfig cfg = resolve_train(fc, tf, c);
  fs::path data = require_path(t.data, fc, "train", "--data");
  fs::path coords_path = require_path(t.coords, fc, "coords", "--coords");
  fs::path dir = require_path(c.out, fc, "out", "--out");
  ObservedMatrix m = load_matrix(data, pick_path(t.meta, fc, "meta"));
  CoordinateSet coords = load_coordinates(coords_path);
  TrainResult result = train(m, coords, cfg);
  ensure_dir(dir);
  save_checkpoint(dir, result.model);
  write_trace(dir / "trace.csv", result.trace);
  out << "trained " << m.rows() << "x" << m.cols() << " d=" << cfg.d << " epochs "
      << result.model.epochs << " train_rmse " << text::format_double(result.model.train_rmse)
      << " -> " << dir.string() << "\n";
  return kExitOk;
}

struct RecoverArgs {
  std::string checkpoint, data, meta;
  bool merge = false;
};

int cmd_recover(const RecoverArgs& r, const Common& c, std::ostream& out) {
  FileConfig fc = load_config(c.config);
  fs::path ckpt = require_path(r.checkpoint, fc, "checkpoint", "--checkpoint");
  fs::path dir = require_path(c.out, fc, "out", "--out");
  FactorModel model = load_checkpoint(ckpt);
  Eigen::MatrixXd dense = recover(model);
  std::size_t merged = 0;
  if (r.merge) {
    fs::path data = require_path(r.data, fc, "data", "--data (required by --merge-observed)");
    ObservedMatrix observed = load_matrix(data, pick_path(r.meta, fc, "meta"));
    for (const Entry& e : observed.entries()) {
      if (e.i >= model.rows() || e.j >= model.cols()) {
        throw ShapeError("observed entry (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                         ") lies outside the checkpoint's " + std::to_string(model.rows()) + "x" +
                         std::to_string(model.cols()) + " matrix");
      }
      dense(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) = e.v;
      ++merged;
    }
  }
  ensure_dir(dir);
  write_dense(dir / "recovered.csv", dense);
  out << "recovered " << dense.rows() << "x" << dense.cols();
  if (r.merge) out << " (" << merged << " observed cells merged)";
  out << " -> " << (dir / "recovered.csv").string() << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string data, coords, meta, sweep_rates, sweep_dims, seeds, models, dataset = "dataset";
  double rate = 0;
  CLI::Option* opt_rate = nullptr;
};

int cmd_eval(const EvalArgs& e, const TrainFlags& tf, const Common& c, std::ostream& out) {
  FileConfig fc = load_config(c.config);
  TrainConfig cfg = resolve_train(fc, tf, c);
  fs::path data = require_path(e.data, fc, "data", "--data");
  fs::path coords_path = require_path(e.coords, fc, "coords", "--coords");
  fs::path dir = require_path(c.out, fc, "out", "--out");

  std::vector<std::uint64_t> seeds;
  if (!e.seeds.empty()) seeds = parse_seed_list(e.seeds);
  else seeds = {c.opt_seed->count() ? c.seed : 1};

  bool sweep = !e.sweep_rates.empty() || !e.sweep_dims.empty();
  if (!e.sweep_rates.empty() && !e.sweep_dims.empty()) {
    throw ParameterError("--sweep-rates and --sweep-dims are mutually exclusive");
  }
  SweepOptions options;
  options.dataset = e.dataset;
  options.models = parse_models(e.models.empty() ? (sweep ? "rtd,lfa" : "rtd") : e.models, cfg);
  options.on_divergence = DivergencePolicy::kRecord;

  // Grids are checked before any data is touched.
  std::vector<double> rates;
  std::vector<Index> dims;
  if (!e.sweep_dims.empty()) {
    dims = parse_index_grid(e.sweep_dims);
    if (!e.opt_rate->count()) throw ParameterError("--sweep-dims needs --rate");
  } else if (!e.sweep_rates.empty()) {
    rates = parse_real_grid(e.sweep_rates);
  } else {
    if (!e.opt_rate->count()) throw ParameterError("missing --rate");
    rates = {e.rate};
  }

  ObservedMatrix full = load_matrix(data, pick_path(e.meta, fc, "meta"));
  CoordinateSet coords = load_coordinates(coords_path);
  EvalReport report = dims.empty()
                          ? sweep_sampling(full, coords, rates, seeds, cfg, options)
                          : sweep_dimension(full, coords, dims, e.rate, seeds, cfg, options);
  ensure_dir(dir);
  text::write_file(dir / "report.csv", format_report_csv(report));
  text::write_file(dir / "summary.csv", format_summary_csv(report.summary()));
  text::write_file(dir / "report.json", format_report_json(report));
  std::size_t diverged = std::count_if(report.records.begin(), report.records.end(),
                                       [](const EvalRecord& r) { return std::isnan(r.rmse); });
  out << "evaluated " << report.records.size() << " cells";
  if (diverged) out << " (" << diverged << " diverged)";
  out << " -> " << dir.string() << "\n";
  return kExitOk;
}

double number_or_throw(std::string_view item, const std::string& context) {
  auto v = text::parse_double(text::trim(item));
  if (!v) throw ParameterError("'" + std::string(item) + "' in '" + context + "' is not a number");
  return *v;
}

long long integer_or_throw(std::string_view item, const std::string& context) {
  auto v = text::parse_int(text::trim(item));
  if (!v) throw ParameterError("'" + std::string(item) + "' in '" + context + "' is not an integer");
  return *v;
}

}  // namespace

std::vector<double> parse_real_grid(std::string_view spec) {
  std::string s(text::trim(spec));
  if (s.find(':') == std::string::npos) {
    std::vector<double> values;
    for (const auto& item : split_list(s)) values.push_back(number_or_throw(item, s));
    if (values.empty()) throw ParameterError("empty grid");
    return values;
  }
  auto parts = text::split(s, ':');
  if (parts.size() != 3) throw ParameterError("grid '" + s + "' must look like lo:hi:step");
  double lo = number_or_throw(parts[0], s);
  double hi = number_or_throw(parts[1], s);
  double step = number_or_throw(parts[2], s);
  if (!(step > 0.0) || !std::isfinite(step) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
    throw ParameterError("grid '" + s + "' needs finite lo <= hi and step > 0");
  }
  auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> values;
  values.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    // Snap to 12 decimals so 0.1:0.9:0.1 yields 0.3, not 0.30000000000000004.
    values.push_back(std::round((lo + static_cast<double>(k) * step) * 1e12) / 1e12);
  }
  return values;
}

std::vector<Index> parse_index_grid(std::string_view spec) {
  std::string s(text::trim(spec));
  auto to_index = [&](std::string_view item) {
    long long v = integer_or_throw(item, s);
    if (v < 1) throw ParameterError("grid '" + s + "' values must be >= 1");
    return static_cast<Index>(v);
  };
  std::vector<Index> values;
  if (s.find(':') == std::string::npos) {
    for (const auto& item : split_list(s)) values.push_back(to_index(item));
    if (values.empty()) throw ParameterError("empty grid");
    return values;
  }
  auto parts = text::split(s, ':');
  if (parts.size() != 3) throw ParameterError("grid '" + s + "' must look like lo:hi:step");
  Index lo = to_index(parts[0]), hi = to_index(parts[1]), step = to_index(parts[2]);
  if (hi < lo) throw ParameterError("grid '" + s + "' needs lo <= hi");
  for (Index v = lo; v <= hi; v += step) values.push_back(v);
  return values;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view spec) {
  std::string s(text::trim(spec));
  auto to_seed = [&](std::string_view item) {
    long long v = integer_or_throw(item, s);
    if (v < 0) throw ParameterError("seed list '" + s + "' must be non-negative");
    return static_cast<std::uint64_t>(v);
  };
  std::vector<std::uint64_t> seeds;
  if (auto dots = s.find(".."); dots != std::string::npos) {
    std::uint64_t a = to_seed(std::string_view(s).substr(0, dots));
    std::uint64_t b = to_seed(std::string_view(s).substr(dots + 2));
    if (b < a) throw ParameterError("seed range '" + s + "' is descending");
    for (std::uint64_t v = a; v <= b; ++v) seeds.push_back(v);
    return seeds;
  }
  for (const auto& item : split_list(s)) seeds.push_back(to_seed(item));
  if (seeds.empty()) throw ParameterError("empty seed list");
  return seeds;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatio-temporal matrix recovery with latent factor analysis", "strecover"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  auto* split = app.add_subcommand("split", "Split a triplet file by sampling rate");
  auto* trn = app.add_subcommand("train", "Train a model and write a checkpoint");
  auto* rec = app.add_subcommand("recover", "Write the dense reconstruction of a checkpoint");
  auto* ev = app.add_subcommand("eval", "Score models over sampling-rate or dimension sweeps");

  Common common;
  for (auto* sub : {gen, split, trn, rec, ev}) common.attach(sub);

  GenerateArgs g;
  gen->add_option("--preset", g.preset, "Named preset (smoke)");
  g.opts["rows"] = gen->add_option("--rows", g.rows, "Sensors (M)");
  g.opts["cols"] = gen->add_option("--cols", g.cols, "Time slots (N)");
  g.opts["rank"] = gen->add_option("--rank", g.rank, "Rank of the ground truth");
  g.opts["spatial-rounds"] = gen->add_option("--spatial-rounds", g.spatial_rounds);
  g.opts["temporal-rounds"] = gen->add_option("--temporal-rounds", g.temporal_rounds);
  g.opts["smoothing-k"] = gen->add_option("--smoothing-k", g.smoothing_k);
  g.opts["noise"] = gen->add_option("--noise", g.noise, "Noise standard deviation");
  g.opts["box"] = gen->add_option("--box", g.box, "Side of the sensor placement square");

  SplitArgs s;
  split->add_option("--data", s.data, "Triplet CSV");
  split->add_option("--meta", s.meta, "meta.json with rows and cols");
  split->add_option("--rate", s.rate, "Fraction kept for training")->required();

  TrainArgs t;
  TrainFlags train_flags;
  trn->add_option("--data", t.data, "Training triplet CSV");
  trn->add_option("--coords", t.coords, "Sensor coordinates CSV");
  trn->add_option("--meta", t.meta, "meta.json with rows and cols");
  train_flags.attach(trn);

  RecoverArgs r;
  rec->add_option("--checkpoint", r.checkpoint, "Checkpoint directory");
  rec->add_flag("--merge-observed", r.merge, "Overwrite known cells with observed values");
  rec->add_option("--data", r.data, "Observed triplet CSV for --merge-observed");
  rec->add_option("--meta", r.meta, "meta.json with rows and cols");

  EvalArgs e;
  TrainFlags eval_flags;
  ev->add_option("--data", e.data, "Full triplet CSV");
  ev->add_option("--coords", e.coords, "Sensor coordinates CSV");
  ev->add_option("--meta", e.meta, "meta.json with rows and cols");
  e.opt_rate = ev->add_option("--rate", e.rate, "Sampling rate");
  ev->add_option("--sweep-rates", e.sweep_rates, "Rate grid lo:hi:step");
  ev->add_option("--sweep-dims", e.sweep_dims, "Dimension grid lo:hi:step");
  ev->add_option("--seeds", e.seeds, "Seeds a..b or a,b,c");
  ev->add_option("--models", e.models, "Comma list of rtd, lfa");
  ev->add_option("--dataset", e.dataset, "Label written into the report");
  eval_flags.attach(ev);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "strecover: " << ex.what() << "\n";
    return kExitInvalid;
  }

  try {
    if (gen->parsed()) return cmd_generate(g, common, out);
    if (split->parsed()) return cmd_split(s, common, out);
    if (trn->parsed()) return cmd_train(t, train_flags, common, out);
    if (rec->parsed()) return cmd_recover(r, common, out);
    return cmd_eval(e, eval_flags, common, out);
  } catch (const DivergenceError& ex) {
    err << "strecover: " << ex.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& ex) {
    err << "strecover: " << ex.what() << "\n";
    return kExitInvalid;
  }
}

}  // namespace strecover::cli
