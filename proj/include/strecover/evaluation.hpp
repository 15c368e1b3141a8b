#ifndef STRECOVER_EVALUATION_HPP_
#define STRECOVER_EVALUATION_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "strecover/data_model.hpp"
#include "strecover/lfa_engine.hpp"
#include "strecover/spatial_graph.hpp"

namespace strecover {

// Root mean squared error of the model's predictions over `test`.
double rmse(const FactorModel& model, const EntrySet& test);

// One trained-and-scored cell of a sweep. A diverged cell has NaN rmse and
// `epochs` set to the epoch at which it diverged.
struct EvalRecord {
  std::string dataset;
  double rate = 0.0;
  std::string model;
  std::uint64_t seed = 0;
  Index d = 0;
  double rmse = 0.0;
  std::size_t epochs = 0;
  double wall_ms = 0.0;

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

// Mean over seeds for one (dataset, rate, model, d) group.
struct SummaryRow {
  std::string dataset;
  double rate = 0.0;
  std::string model;
  Index d = 0;
  std::size_t seeds = 0;
  double mean_rmse = 0.0;
  double mean_epochs = 0.0;
  double mean_wall_ms = 0.0;
};

struct EvalReport {
  std::vector<EvalRecord> records;

  // Groups in order of first appearance.
  std::vector<SummaryRow> summary() const;

  // Record-wise equality ignoring wall_ms. NaN rmse compares equal to NaN.
  bool same_except_timing(const EvalReport& other) const;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// A labelled training configuration compared in a sweep.
struct ModelVariant {
  std::string label;
  TrainConfig config;
};

inline constexpr const char* kLfaRtdLabel = "LFA-RTD";
inline constexpr const char* kPlainLfaLabel = "LFA";

// The regularized model as configured.
ModelVariant lfa_rtd(const TrainConfig& cfg);
// Same config with beta1 = beta2 = 0.
ModelVariant plain_lfa(const TrainConfig& cfg);

enum class DivergencePolicy { kThrow, kRecord };

struct SweepOptions {
  std::string dataset = "dataset";
  // Empty means {lfa_rtd(cfg)}.
  std::vector<ModelVariant> models;
  // 0 reads STRECOVER_THREADS (itself 0 = hardware concurrency).
  std::size_t threads = 0;
  DivergencePolicy on_divergence = DivergencePolicy::kThrow;
};

// For every (rate, model, seed): split with `seed`, train with
// config.seed = seed, score RMSE on the held-out part. Records come out in
// (rate, model, seed) order regardless of thread count.
EvalReport sweep_sampling(const ObservedMatrix& full, const CoordinateSet& coords,
                          const std::vector<double>& rates,
                          const std::vector<std::uint64_t>& seeds,
                          const TrainConfig& cfg, const SweepOptions& options = {});

// As sweep_sampling at a fixed rate, varying the latent dimension. Order is
// (d, model, seed).
EvalReport sweep_dimension(const ObservedMatrix& full, const CoordinateSet& coords,
                           const std::vector<Index>& dims, double rate,
                           const std::vector<std::uint64_t>& seeds,
                           const TrainConfig& cfg, const SweepOptions& options = {});

struct WinLoss {
  std::size_t wins = 0;
  std::size_t ties = 0;
  std::size_t losses = 0;

  friend bool operator==(const WinLoss&, const WinLoss&) = default;
};

// wins = #{a < b}, losses = #{a > b}, ties = #{a == b}.
WinLoss win_loss(std::span<const double> a, std::span<const double> b);

// Thread cap from STRECOVER_THREADS; 0 or unset means hardware concurrency.
std::size_t sweep_threads_from_env();

// Report CSV header: dataset,rate,model,seed,d,rmse,epochs,wall_ms
std::string format_report_csv(const EvalReport& report);
EvalReport parse_report_csv(std::string_view contents);
// Summary CSV header: dataset,rate,model,d,seeds,mean_rmse,mean_epochs,mean_wall_ms
std::string format_summary_csv(const std::vector<SummaryRow>& summary);

// {"records": [...], "summary": [...]}
std::string format_report_json(const EvalReport& report);
EvalReport parse_report_json(std::string_view contents);

}  // namespace strecover

#endif  // STRECOVER_EVALUATION_HPP_
