#include "strecover/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <thread>

#include "json.hpp"
#include "strecover/error.hpp"
#include "strecover/text_format.hpp"

namespace strecover {
namespace {

using nlohmann::json;

struct Cell {
  double rate;
  Index d;
  std::size_t variant;
  std::uint64_t seed;
};

std::vector<ModelVariant> resolve_models(const TrainConfig& cfg,
                                         const SweepOptions& options) {
  auto models = options.models;
  if (models.empty()) models.push_back(lfa_rtd(cfg));
  for (const auto& m : models) {
    if (m.label.empty() || m.label.find_first_of(",\n\"") != std::string::npos) {
      throw ParameterError("model label '" + m.label + "' must be non-empty without commas");
    }
    m.config.validate();
  }
  if (options.dataset.find_first_of(",\n\"") != std::string::npos) {
    throw ParameterError("dataset label must not contain commas");
  }
  return models;
}

std::string cell_context(const Cell& c, const ModelVariant& v) {
  return "model " + v.label + ", rate " + text::format_double(c.rate) + ", d " +
         std::to_string(c.d) + ", seed " + std::to_string(c.seed);
}

EvalReport run_cells(const ObservedMatrix& full, const CoordinateSet& coords,
                     const std::vector<Cell>& cells,
                     const std::vector<ModelVariant>& models,
                     const SweepOptions& options) {
  if (coords.size() != full.rows()) {
    throw ShapeError("matrix has " + std::to_string(full.rows()) +
                     " rows but coordinates describe " + std::to_string(coords.size()) +
                     " sensors");
  }
  // One graph per distinct k_nn.
  std::map<Index, LaplacianMatrix> graphs;
  for (const auto& m : models) {
    if (!graphs.contains(m.config.k_nn)) {
      graphs.emplace(m.config.k_nn, build_sensor_graph(coords, m.config.k_nn).laplacian);
    }
  }

  std::vector<EvalRecord> records(cells.size());
  std::vector<std::exception_ptr> failures(cells.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t n = next++; n < cells.size(); n = next++) {
      const Cell& c = cells[n];
      const ModelVariant& v = models[c.variant];
      EvalRecord& rec = records[n];
      rec = {options.dataset, c.rate, v.label, c.seed, c.d, 0.0, 0, 0.0};
      try {
        auto [train_m, test] = split_by_sampling_rate(full, c.rate, c.seed);
        TrainConfig cfg = v.config;
        cfg.seed = c.seed;
        cfg.d = c.d;
        auto start = std::chrono::steady_clock::now();
        try {
          TrainResult result = train(train_m, graphs.at(cfg.k_nn), cfg);
          auto stop = std::chrono::steady_clock::now();
          rec.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
          rec.epochs = result.model.epochs;
          rec.rmse = rmse(result.model, test);
        } catch (const DivergenceError& e) {
          auto stop = std::chrono::steady_clock::now();
          if (options.on_divergence == DivergencePolicy::kThrow) {
            throw DivergenceError(e.epoch(), cell_context(c, v));
          }
          rec.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
          rec.epochs = e.epoch();
          rec.rmse = std::numeric_limits<double>::quiet_NaN();
        }
      } catch (...) {
        failures[n] = std::current_exception();
      }
    }
  };

  std::size_t threads = options.threads ? options.threads : sweep_threads_from_env();
  threads = std::max<std::size_t>(1, std::min(threads, cells.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return EvalReport{std::move(records)};
}

void check_seeds(const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ParameterError("at least one seed is required");
}

bool same_double(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw ParseError("expected a number in report JSON", 0);
  return j.get<double>();
}

}  // namespace

double rmse(const FactorModel& model, const EntrySet& test) {
  if (test.empty()) throw ParameterError("RMSE of an empty test set");
  double sum = 0.0;
  for (const Entry& e : test.entries) {
    double r = e.v - predict(model, e.i, e.j);
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(test.size()));
}

std::vector<SummaryRow> EvalReport::summary() const {
  std::vector<SummaryRow> rows;
  auto same_group = [](const SummaryRow& s, const EvalRecord& r) {
    return s.dataset == r.dataset && s.rate == r.rate && s.model == r.model && s.d == r.d;
  };
  for (const EvalRecord& r : records) {
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const SummaryRow& s) { return same_group(s, r); });
    if (it == rows.end()) {
      rows.push_back({r.dataset, r.rate, r.model, r.d, 0, 0.0, 0.0, 0.0});
      it = rows.end() - 1;
    }
    it->seeds += 1;
    it->mean_rmse += r.rmse;
    it->mean_epochs += static_cast<double>(r.epochs);
    it->mean_wall_ms += r.wall_ms;
  }
  for (SummaryRow& s : rows) {
    const auto n = static_cast<double>(s.seeds);
    s.mean_rmse /= n;
    s.mean_epochs /= n;
    s.mean_wall_ms /= n;
  }
  return rows;
}

bool EvalReport::same_except_timing(const EvalReport& other) const {
  if (records.size() != other.records.size()) return false;
  for (std::size_t n = 0; n < records.size(); ++n) {
    const EvalRecord& a = records[n];
    const EvalRecord& b = other.records[n];
    if (a.dataset != b.dataset || a.rate != b.rate || a.model != b.model ||
        a.seed != b.seed || a.d != b.d || !same_double(a.rmse, b.rmse) ||
        a.epochs != b.epochs) {
      return false;
    }
  }
  return true;
}

ModelVariant lfa_rtd(const TrainConfig& cfg) { return {kLfaRtdLabel, cfg}; }

ModelVariant plain_lfa(const TrainConfig& cfg) {
  TrainConfig base = cfg;
  base.beta1 = 0.0;
  base.beta2 = 0.0;
  return {kPlainLfaLabel, base};
}

EvalReport sweep_sampling(const ObservedMatrix& full, const CoordinateSet& coords,
                          const std::vector<double>& rates,
                          const std::vector<std::uint64_t>& seeds,
                          const TrainConfig& cfg, const SweepOptions& options) {
  check_seeds(seeds);
  if (rates.empty()) throw ParameterError("at least one sampling rate is required");
  for (double r : rates) {
    if (!(r > 0.0 && r < 1.0)) {
      throw ParameterError("sweep rates must lie in (0, 1), got " + text::format_double(r));
    }
  }
  auto models = resolve_models(cfg, options);
  std::vector<Cell> cells;
  for (double r : rates) {
    for (std::size_t v = 0; v < models.size(); ++v) {
      for (auto s : seeds) cells.push_back({r, models[v].config.d, v, s});
    }
  }
  return run_cells(full, coords, cells, models, options);
}

EvalReport sweep_dimension(const ObservedMatrix& full, const CoordinateSet& coords,
                           const std::vector<Index>& dims, double rate,
                           const std::vector<std::uint64_t>& seeds,
                           const TrainConfig& cfg, const SweepOptions& options) {
  check_seeds(seeds);
  if (dims.empty()) throw ParameterError("at least one latent dimension is required");
  for (Index d : dims) {
    if (d < 1) throw ParameterError("latent dimensions must be >= 1");
  }
  if (!(rate > 0.0 && rate < 1.0)) {
    throw ParameterError("sampling rate must lie in (0, 1), got " +
                         text::format_double(rate));
  }
  auto models = resolve_models(cfg, options);
  std::vector<Cell> cells;
  for (Index d : dims) {
    for (std::size_t v = 0; v < models.size(); ++v) {
      for (auto s : seeds) cells.push_back({rate, d, v, s});
    }
  }
  return run_cells(full, coords, cells, models, options);
}

WinLoss win_loss(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ParameterError("win_loss needs equal lengths, got " + std::to_string(a.size()) +
                         " and " + std::to_string(b.size()));
  }
  WinLoss wl;
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (a[n] < b[n]) {
      ++wl.wins;
    } else if (a[n] > b[n]) {
      ++wl.losses;
    } else {
      ++wl.ties;
    }
  }
  return wl;
}

std::size_t sweep_threads_from_env() {
  std::size_t n = 0;
  if (const char* env = std::getenv("STRECOVER_THREADS")) {
    auto v = text::parse_int(env);
    if (v && *v > 0) n = static_cast<std::size_t>(*v);
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

std::string format_report_csv(const EvalReport& report) {
  std::string out = "dataset,rate,model,seed,d,rmse,epochs,wall_ms\n";
  for (const EvalRecord& r : report.records) {
    out += r.dataset + ',' + text::format_double(r.rate) + ',' + r.model + ',' +
           std::to_string(r.seed) + ',' + std::to_string(r.d) + ',' +
           text::format_double(r.rmse) + ',' + std::to_string(r.epochs) + ',' +
           text::format_double(r.wall_ms) + '\n';
  }
  return out;
}

EvalReport parse_report_csv(std::string_view contents) {
  auto lines = text::lines(contents);
  if (lines.empty() ||
      text::trim(lines[0]) != "dataset,rate,model,seed,d,rmse,epochs,wall_ms") {
    throw ParseError("expected report CSV header", 1);
  }
  EvalReport report;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (text::trim(lines[n]).empty()) continue;
    auto f = text::split(lines[n]);
    if (f.size() != 8) throw ParseError("expected 8 fields", n + 1);
    auto rate = text::parse_double(f[1]);
    auto seed = text::parse_int(f[3]);
    auto d = text::parse_int(f[4]);
    auto err = text::parse_double(f[5]);
    auto epochs = text::parse_int(f[6]);
    auto wall = text::parse_double(f[7]);
    if (!rate || !seed || *seed < 0 || !d || *d < 0 || !err || !epochs || *epochs < 0 ||
        !wall) {
      throw ParseError("malformed report row", n + 1);
    }
    report.records.push_back({std::string(f[0]), *rate, std::string(f[2]),
                              static_cast<std::uint64_t>(*seed), static_cast<Index>(*d),
                              *err, static_cast<std::size_t>(*epochs), *wall});
  }
  return report;
}

std::string format_summary_csv(const std::vector<SummaryRow>& summary) {
  std::string out = "dataset,rate,model,d,seeds,mean_rmse,mean_epochs,mean_wall_ms\n";
  for (const SummaryRow& s : summary) {
    out += s.dataset + ',' + text::format_double(s.rate) + ',' + s.model + ',' +
           std::to_string(s.d) + ',' + std::to_string(s.seeds) + ',' +
           text::format_double(s.mean_rmse) + ',' + text::format_double(s.mean_epochs) +
           ',' + text::format_double(s.mean_wall_ms) + '\n';
  }
  return out;
}

std::string format_report_json(const EvalReport& report) {
  json records = json::array();
  for (const EvalRecord& r : report.records) {
    records.push_back({{"dataset", r.dataset},
                       {"rate", r.rate},
                       {"model", r.model},
                       {"seed", r.seed},
                       {"d", r.d},
                       {"rmse", number_or_null(r.rmse)},
                       {"epochs", r.epochs},
                       {"wall_ms", r.wall_ms}});
  }
  json summary = json::array();
  for (const SummaryRow& s : report.summary()) {
    summary.push_back({{"dataset", s.dataset},
                       {"rate", s.rate},
                       {"model", s.model},
                       {"d", s.d},
                       {"seeds", s.seeds},
                       {"mean_rmse", number_or_null(s.mean_rmse)},
                       {"mean_epochs", s.mean_epochs},
                       {"mean_wall_ms", s.mean_wall_ms}});
  }
  json doc = {{"records", records}, {"summary", summary}};
  return doc.dump(2) + "\n";
}

EvalReport parse_report_json(std::string_view contents) {
  json doc;
  try {
    doc = json::parse(contents);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("report JSON: ") + e.what(), 0);
  }
  if (!doc.is_object() || !doc.contains("records") || !doc["records"].is_array()) {
    throw ParseError("report JSON needs a 'records' array", 0);
  }
  EvalReport report;
  try {
    for (const json& r : doc["records"]) {
      report.records.push_back({r.at("dataset").get<std::string>(),
                                r.at("rate").get<double>(),
                                r.at("model").get<std::string>(),
                                r.at("seed").get<std::uint64_t>(),
                                r.at("d").get<Index>(),
                                number_from(r.at("rmse")),
                                r.at("epochs").get<std::size_t>(),
                                r.at("wall_ms").get<double>()});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("report JSON record: ") + e.what(), 0);
  }
  return report;
}

}  // namespace strecover
