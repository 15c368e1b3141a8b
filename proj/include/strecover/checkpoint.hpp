#ifndef STRECOVER_CHECKPOINT_HPP_
#define STRECOVER_CHECKPOINT_HPP_

#include <filesystem>
#include <string>

#include "json.hpp"
#include "strecover/lfa_engine.hpp"

namespace strecover {

// TrainConfig <-> JSON object. Keys: d, lambda, eta, beta1, beta2,
// max_epochs, mu, k_nn, tol, seed. An infinite tol is written as null.
nlohmann::json config_to_json(const TrainConfig& cfg);

// Overlays the keys present in `j` onto `base`. Unknown keys and wrongly
// typed values raise ParseError; the result is validated.
TrainConfig config_from_json(const nlohmann::json& j, TrainConfig base = {});

// Checkpoint directory layout: meta.json, X.csv, Y.csv. Factor CSVs have no
// header, one row per factor row, shortest round-trip decimals.
void save_checkpoint(const std::filesystem::path& dir, const FactorModel& model);
FactorModel load_checkpoint(const std::filesystem::path& dir);

// trace.csv: header `epoch,rmse,objective`.
void write_trace(const std::filesystem::path& path, const LossTrace& trace);
LossTrace load_trace(const std::filesystem::path& path);

// Dense matrix as headerless CSV, one line per row.
std::string format_dense(const Eigen::MatrixXd& m);
void write_dense(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd load_dense(const std::filesystem::path& path);

}  // namespace strecover

#endif  // STRECOVER_CHECKPOINT_HPP_
