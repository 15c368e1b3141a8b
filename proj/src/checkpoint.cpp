#include "strecover/checkpoint.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "strecover/error.hpp"
#include "strecover/text_format.hpp"

namespace strecover {
namespace {

using nlohmann::json;

std::uint64_t get_unsigned(const json& j, const char* key) {
  if (!j.is_number_unsigned()) {
    throw ParseError(std::string("'") + key + "' must be a non-negative integer", 0);
  }
  return j.get<std::uint64_t>();
}

double get_number(const json& j, const char* key) {
  if (!j.is_number()) throw ParseError(std::string("'") + key + "' must be a number", 0);
  return j.get<double>();
}

std::string format_rows(const FactorMatrix& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += text::format_double(m(r, c));
    }
    out += '\n';
  }
  return out;
}

std::vector<std::vector<double>> parse_rows(const std::filesystem::path& path) {
  std::string contents = text::read_file(path);
  std::vector<std::vector<double>> rows;
  auto lines = text::lines(contents);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (text::trim(lines[n]).empty()) {
      if (n + 1 == lines.size()) break;
      throw ParseError(path.string() + ": empty line", n + 1);
    }
    std::vector<double> row;
    for (auto field : text::split(lines[n])) {
      auto v = text::parse_double(field);
      if (!v) throw ParseError(path.string() + ": not a number", n + 1);
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(path.string() + ": ragged row", n + 1);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

FactorMatrix load_factor(const std::filesystem::path& path, Index rows, Index d) {
  auto data = parse_rows(path);
  if (data.size() != rows || (rows > 0 && data.front().size() != d)) {
    throw ParseError(path.string() + ": expected " + std::to_string(rows) + "x" +
                         std::to_string(d) + " values",
                     0);
  }
  FactorMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < d; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = data[r][c];
    }
  }
  return m;
}

}  // namespace

nlohmann::json config_to_json(const TrainConfig& cfg) {
  json j;
  j["d"] = cfg.d;
  j["lambda"] = cfg.lambda;
  j["eta"] = cfg.eta;
  j["beta1"] = cfg.beta1;
  j["beta2"] = cfg.beta2;
  j["max_epochs"] = cfg.max_epochs;
  j["mu"] = cfg.mu;
  j["k_nn"] = cfg.k_nn;
  j["tol"] = std::isinf(cfg.tol) ? json(nullptr) : json(cfg.tol);
  j["seed"] = cfg.seed;
  return j;
}

TrainConfig config_from_json(const nlohmann::json& j, TrainConfig base) {
  if (!j.is_object()) throw ParseError("training config must be a JSON object", 0);
  for (const auto& [key, value] : j.items()) {
    if (key == "d") {
      base.d = get_unsigned(value, "d");
    } else if (key == "lambda") {
      base.lambda = get_number(value, "lambda");
    } else if (key == "eta") {
      base.eta = get_number(value, "eta");
    } else if (key == "beta1") {
      base.beta1 = get_number(value, "beta1");
    } else if (key == "beta2") {
      base.beta2 = get_number(value, "beta2");
    } else if (key == "max_epochs") {
      base.max_epochs = get_unsigned(value, "max_epochs");
    } else if (key == "mu") {
      base.mu = get_unsigned(value, "mu");
    } else if (key == "k_nn") {
      base.k_nn = get_unsigned(value, "k_nn");
    } else if (key == "tol") {
      base.tol = value.is_null() ? std::numeric_limits<double>::infinity()
                                 : get_number(value, "tol");
    } else if (key == "seed") {
      base.seed = get_unsigned(value, "seed");
    } else {
      throw ParseError("unknown training config key '" + key + "'", 0);
    }
  }
  base.validate();
  return base;
}

void save_checkpoint(const std::filesystem::path& dir, const FactorModel& model) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create checkpoint directory '" + dir.string() + "'");
  json meta;
  meta["rows"] = model.rows();
  meta["cols"] = model.cols();
  meta["d"] = model.rank();
  meta["epochs"] = model.epochs;
  meta["final_rmse"] =
      std::isfinite(model.train_rmse) ? json(model.train_rmse) : json(nullptr);
  meta["config"] = config_to_json(model.config);
  text::write_file(dir / "meta.json", meta.dump(2) + "\n");
  text::write_file(dir / "X.csv", format_rows(model.x));
  text::write_file(dir / "Y.csv", format_rows(model.y));
}

FactorModel load_checkpoint(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("checkpoint directory '" + dir.string() + "' does not exist");
  }
  json meta;
  try {
    meta = json::parse(text::read_file(dir / "meta.json"));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("meta.json: ") + e.what(), 0);
  }
  if (!meta.is_object()) throw ParseError("meta.json must be an object", 0);
  for (const char* key : {"rows", "cols", "d", "epochs", "config"}) {
    if (!meta.contains(key)) {
      throw ParseError(std::string("meta.json is missing '") + key + "'", 0);
    }
  }
  FactorModel model;
  const Index rows = get_unsigned(meta["rows"], "rows");
  const Index cols = get_unsigned(meta["cols"], "cols");
  const Index d = get_unsigned(meta["d"], "d");
  model.epochs = get_unsigned(meta["epochs"], "epochs");
  if (meta.contains("final_rmse") && !meta["final_rmse"].is_null()) {
    model.train_rmse = get_number(meta["final_rmse"], "final_rmse");
  }
  model.config = config_from_json(meta["config"]);
  model.x = load_factor(dir / "X.csv", rows, d);
  model.y = load_factor(dir / "Y.csv", cols, d);
  return model;
}

void write_trace(const std::filesystem::path& path, const LossTrace& trace) {
  std::string out = "epoch,rmse,objective\n";
  for (const TraceRecord& r : trace) {
    out += std::to_string(r.epoch) + ',' + text::format_double(r.rmse) + ',' +
           text::format_double(r.objective) + '\n';
  }
  text::write_file(path, out);
}

LossTrace load_trace(const std::filesystem::path& path) {
  std::string contents = text::read_file(path);
  auto lines = text::lines(contents);
  if (lines.empty() || text::trim(lines[0]) != "epoch,rmse,objective") {
    throw ParseError("expected header 'epoch,rmse,objective'", 1);
  }
  LossTrace trace;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (text::trim(lines[n]).empty()) continue;
    auto f = text::split(lines[n]);
    if (f.size() != 3) throw ParseError("expected 3 fields", n + 1);
    auto epoch = text::parse_int(f[0]);
    auto rmse = text::parse_double(f[1]);
    auto obj = text::parse_double(f[2]);
    if (!epoch || *epoch < 0 || !rmse || !obj) throw ParseError("bad trace row", n + 1);
    trace.push_back({static_cast<std::size_t>(*epoch), *rmse, *obj});
  }
  return trace;
}

std::string format_dense(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += text::format_double(m(r, c));
    }
    out += '\n';
  }
  return out;
}

void write_dense(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  text::write_file(path, format_dense(m));
}

Eigen::MatrixXd load_dense(const std::filesystem::path& path) {
  auto data = parse_rows(path);
  const auto rows = static_cast<Eigen::Index>(data.size());
  const auto cols = rows ? static_cast<Eigen::Index>(data.front().size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[r][c];
  }
  return m;
}

}  // namespace strecover
