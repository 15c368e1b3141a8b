#ifndef STRECOVER_LFA_ENGINE_HPP_
#define STRECOVER_LFA_ENGINE_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "strecover/data_model.hpp"
#include "strecover/spatial_graph.hpp"
#include "strecover/temporal_diff.hpp"

namespace strecover {

// Hyperparameters of the spatio-temporally regularized latent factor model.
struct TrainConfig {
  Index d = 40;                    // latent dimension
  double lambda = 0.02;            // Tikhonov weight
  double eta = 0.005;              // SGD learning rate
  double beta1 = 0.01;             // spatial smoothness weight
  double beta2 = 0.01;             // temporal smoothness weight
  std::size_t max_epochs = 3000;
  std::size_t mu = 8;              // full update on every mu-th visited entry
  Index k_nn = 5;                  // neighbours per sensor in the graph
  double tol = 1e-6;               // early stop on |rmse_t - rmse_{t-1}| < tol
  std::uint64_t seed = 1;

  // Throws ParameterError naming the first violated bound.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

using FactorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// X (M x d) and Y (N x d); the prediction for cell (i, j) is x_i . y_j.
struct FactorModel {
  FactorMatrix x;
  FactorMatrix y;
  TrainConfig config;
  std::size_t epochs = 0;
  double train_rmse = std::numeric_limits<double>::quiet_NaN();

  Index rows() const { return static_cast<Index>(x.rows()); }
  Index cols() const { return static_cast<Index>(y.rows()); }
  Index rank() const { return static_cast<Index>(x.cols()); }
};

struct TraceRecord {
  std::size_t epoch = 0;
  double rmse = 0.0;
  double objective = 0.0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

using LossTrace = std::vector<TraceRecord>;

struct TrainResult {
  FactorModel model;
  LossTrace trace;
  std::size_t full_updates = 0;
  std::size_t cheap_updates = 0;
};

// X and Y i.i.d. uniform on (0, 0.1] from Rng(cfg.seed), X row-major first.
FactorModel init_factors(Index rows, Index cols, const TrainConfig& cfg);

double predict(const FactorModel& model, Index i, Index j);

// Dense M x N reconstruction X Y^T. Observed cells are not overwritten.
Eigen::MatrixXd recover(const FactorModel& model);

// 1/2 |J o (H - X Y^T)|^2 + lambda (|X|^2 + |Y|^2)
//   + beta1 |L X Y^T|^2 + beta2 |X Y^T D|^2
double objective(const FactorModel& model, const ObservedMatrix& train,
                 const LaplacianMatrix& graph, const DiffOperator& diff,
                 const TrainConfig& cfg);

struct Gradient {
  FactorMatrix x;
  FactorMatrix y;
};

// Exact full-batch gradient of `objective`.
Gradient objective_gradient(const FactorModel& model, const ObservedMatrix& train,
                            const LaplacianMatrix& graph, const DiffOperator& diff,
                            const TrainConfig& cfg);

// Single-entry loss: squared error plus the (i, j) cells of L X Y^T and
// X Y^T D squared, plus Tikhonov on x_i and y_j. The temporal cell does not
// exist in the last column and contributes zero there.
double instant_loss(const FactorModel& model, Index i, Index j, double h,
                    const LaplacianMatrix& graph, const TrainConfig& cfg);

// The two scalars of the regularized update for entry (i, j):
// spatial  = (A_i X) . y_j           with A = L^T L
// temporal = x_i . (Y^T B_{:,j})     with B = D D^T
struct SmoothnessTerms {
  double spatial = 0.0;
  double temporal = 0.0;
};

SmoothnessTerms smoothness_terms(const FactorModel& model, Index i, Index j,
                                 const LaplacianMatrix& graph, const DiffOperator& diff);

// Which factor rows an update writes. Training updates X in its first pass
// and Y in the second; kBoth is the standalone single-entry step.
enum class UpdateTarget { kBoth, kX, kY };

// x += 2 eta (delta y - lambda x), y += 2 eta (delta x - lambda y), with
// delta = h - x.y and every right-hand side taken before the write.
void cheap_update(FactorModel& model, Index i, Index j, double h,
                  const TrainConfig& cfg, UpdateTarget target = UpdateTarget::kBoth);

// As cheap_update with delta replaced by
// delta - beta1 * spatial - beta2 * temporal (see SmoothnessTerms).
// With beta1 == beta2 == 0 the result is bitwise equal to cheap_update.
void full_update(FactorModel& model, Index i, Index j, double h,
                 const LaplacianMatrix& graph, const DiffOperator& diff,
                 const TrainConfig& cfg, UpdateTarget target = UpdateTarget::kBoth);

// True when the interleave counter selects the regularized update.
inline bool is_full_update_step(std::size_t counter, std::size_t mu) {
  return counter % mu == 0;
}

// Early-stop rule: the last two epochs differ in RMSE by less than tol.
bool should_stop(const LossTrace& trace, double tol);

// RMSE of the model over the entries it was trained on.
double training_rmse(const FactorModel& model, const ObservedMatrix& train);

// Builds the kNN graph from `coords`, then runs the two-pass interleaved SGD
// for at most cfg.max_epochs epochs. Throws DivergenceError on non-finite
// factors and ShapeError when coordinates and matrix disagree.
TrainResult train(const ObservedMatrix& train_m, const CoordinateSet& coords,
                  const TrainConfig& cfg);

// Same, with a prebuilt graph (sweeps reuse one graph across cells).
TrainResult train(const ObservedMatrix& train_m, const LaplacianMatrix& graph,
                  const TrainConfig& cfg);

}  // namespace strecover

#endif  // STRECOVER_LFA_ENGINE_HPP_
