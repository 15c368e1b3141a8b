#include "strecover/lfa_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "strecover/error.hpp"
#include "strecover/rng.hpp"

namespace strecover {
namespace {

void require_index(const FactorModel& model, Index i, Index j) {
  if (i >= model.rows() || j >= model.cols()) {
    throw IndexError("cell (" + std::to_string(i) + "," + std::to_string(j) +
                     ") outside " + std::to_string(model.rows()) + "x" +
                     std::to_string(model.cols()) + " model");
  }
}

void require_shapes(const FactorModel& model, const ObservedMatrix& train,
                    const LaplacianMatrix& graph, const DiffOperator& diff) {
  if (train.rows() != model.rows() || train.cols() != model.cols() ||
      graph.size() != model.rows() || diff.slots() != model.cols()) {
    throw ShapeError("model is " + std::to_string(model.rows()) + "x" +
                     std::to_string(model.cols()) + ", data " +
                     std::to_string(train.rows()) + "x" + std::to_string(train.cols()) +
                     ", graph " + std::to_string(graph.size()) + ", slots " +
                     std::to_string(diff.slots()));
  }
}

double dot(const double* a, const double* b, Index d) {
  double s = 0.0;
  for (Index k = 0; k < d; ++k) s += a[k] * b[k];
  return s;
}

// Shared by the cheap and the full update so the two agree bit for bit
// whenever the smoothness correction is absent.
inline void sgd_step(double* x, double* y, Index d, double coef, double two_eta,
                     double lambda, UpdateTarget target) {
  switch (target) {
    case UpdateTarget::kBoth:
      for (Index k = 0; k < d; ++k) {
        const double xo = x[k], yo = y[k];
        x[k] = xo + two_eta * (coef * yo - lambda * xo);
        y[k] = yo + two_eta * (coef * xo - lambda * yo);
      }
      break;
    case UpdateTarget::kX:
      for (Index k = 0; k < d; ++k) x[k] += two_eta * (coef * y[k] - lambda * x[k]);
      break;
    case UpdateTarget::kY:
      for (Index k = 0; k < d; ++k) y[k] += two_eta * (coef * x[k] - lambda * y[k]);
      break;
  }
}

// B Y via the tridiagonal stencil.
FactorMatrix temporal_gram_times(const DiffOperator& diff, const FactorMatrix& y) {
  FactorMatrix out = FactorMatrix::Zero(y.rows(), y.cols());
  const Index n = diff.slots();
  for (Index j = 0; j < n; ++j) {
    diff.for_each_in_gram_column(j, [&](Index r, double b) {
      out.row(static_cast<Eigen::Index>(r)) += b * y.row(static_cast<Eigen::Index>(j));
    });
  }
  return out;
}

bool all_finite(const FactorModel& m) { return m.x.allFinite() && m.y.allFinite(); }

}  // namespace

void TrainConfig::validate() const {
  if (d < 1) throw ParameterError("latent dimension d must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("lambda must be finite and >= 0");
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ParameterError("learning rate eta must be finite and > 0");
  }
  if (!(beta1 >= 0.0) || !std::isfinite(beta1)) {
    throw ParameterError("beta1 must be finite and >= 0");
  }
  if (!(beta2 >= 0.0) || !std::isfinite(beta2)) {
    throw ParameterError("beta2 must be finite and >= 0");
  }
  if (max_epochs < 1) throw ParameterError("max_epochs must be >= 1");
  if (mu < 1) throw ParameterError("mu must be >= 1");
  if (k_nn < 1) throw ParameterError("k_nn must be >= 1");
  if (!(tol >= 0.0)) throw ParameterError("tol must be >= 0");
}

FactorModel init_factors(Index rows, Index cols, const TrainConfig& cfg) {
  if (rows < 1 || cols < 1 || cfg.d < 1) {
    throw ParameterError("init_factors needs M, N, d >= 1");
  }
  FactorModel model;
  model.config = cfg;
  model.x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cfg.d));
  model.y.resize(static_cast<Eigen::Index>(cols), static_cast<Eigen::Index>(cfg.d));
  Rng rng(cfg.seed);
  // 1 - U[0,1) lies in (0, 1].
  for (Eigen::Index n = 0; n < model.x.size(); ++n) {
    model.x.data()[n] = 0.1 * (1.0 - rng.uniform());
  }
  for (Eigen::Index n = 0; n < model.y.size(); ++n) {
    model.y.data()[n] = 0.1 * (1.0 - rng.uniform());
  }
  return model;
}

double predict(const FactorModel& model, Index i, Index j) {
  require_index(model, i, j);
  return dot(model.x.row(static_cast<Eigen::Index>(i)).data(),
             model.y.row(static_cast<Eigen::Index>(j)).data(), model.rank());
}

Eigen::MatrixXd recover(const FactorModel& model) {
  return model.x * model.y.transpose();
}

double objective(const FactorModel& model, const ObservedMatrix& train,
                 const LaplacianMatrix& graph, const DiffOperator& diff,
                 const TrainConfig& cfg) {
  require_shapes(model, train, graph, diff);
  const Index d = model.rank();
  double data = 0.0;
  for (const Entry& e : train.entries()) {
    double r = e.v - dot(model.x.row(static_cast<Eigen::Index>(e.i)).data(),
                         model.y.row(static_cast<Eigen::Index>(e.j)).data(), d);
    data += r * r;
  }
  double tikhonov = model.x.squaredNorm() + model.y.squaredNorm();

  // |L X Y^T|^2 = tr((X^T A X)(Y^T Y)), |X Y^T D|^2 = tr((X^T X)(Y^T B Y)).
  Eigen::MatrixXd yty = model.y.transpose() * model.y;
  Eigen::MatrixXd xtx = model.x.transpose() * model.x;
  double spatial = 0.0;
  if (cfg.beta1 != 0.0) {
    FactorMatrix ax = graph.gram() * model.x;
    Eigen::MatrixXd xtax = model.x.transpose() * ax;
    spatial = xtax.cwiseProduct(yty).sum();
  }
  double temporal = 0.0;
  if (cfg.beta2 != 0.0) {
    Eigen::MatrixXd ytby = model.y.transpose() * temporal_gram_times(diff, model.y);
    temporal = xtx.cwiseProduct(ytby).sum();
  }
  return 0.5 * data + cfg.lambda * tikhonov + cfg.beta1 * spatial +
         cfg.beta2 * temporal;
}

Gradient objective_gradient(const FactorModel& model, const ObservedMatrix& train,
                            const LaplacianMatrix& graph, const DiffOperator& diff,
                            const TrainConfig& cfg) {
  require_shapes(model, train, graph, diff);
  const Index d = model.rank();
  Gradient g{2.0 * cfg.lambda * model.x, 2.0 * cfg.lambda * model.y};
  for (const Entry& e : train.entries()) {
    const auto i = static_cast<Eigen::Index>(e.i);
    const auto j = static_cast<Eigen::Index>(e.j);
    double r = e.v - dot(model.x.row(i).data(), model.y.row(j).data(), d);
    g.x.row(i) -= r * model.y.row(j);
    g.y.row(j) -= r * model.x.row(i);
  }
  if (cfg.beta1 != 0.0) {
    FactorMatrix ax = graph.gram() * model.x;
    Eigen::MatrixXd yty = model.y.transpose() * model.y;
    Eigen::MatrixXd xtax = model.x.transpose() * ax;
    g.x += 2.0 * cfg.beta1 * ax * yty;
    g.y += 2.0 * cfg.beta1 * model.y * xtax;
  }
  if (cfg.beta2 != 0.0) {
    FactorMatrix by = temporal_gram_times(diff, model.y);
    Eigen::MatrixXd ytby = model.y.transpose() * by;
    Eigen::MatrixXd xtx = model.x.transpose() * model.x;
    g.x += 2.0 * cfg.beta2 * model.x * ytby;
    g.y += 2.0 * cfg.beta2 * by * xtx;
  }
  return g;
}

double instant_loss(const FactorModel& model, Index i, Index j, double h,
                    const LaplacianMatrix& graph, const TrainConfig& cfg) {
  require_index(model, i, j);
  if (graph.size() != model.rows()) throw ShapeError("graph size mismatch");
  const Index d = model.rank();
  const double* yj = model.y.row(static_cast<Eigen::Index>(j)).data();
  const double* xi = model.x.row(static_cast<Eigen::Index>(i)).data();
  const double pred = dot(xi, yj, d);
  const double err = h - pred;

  double lxy = 0.0;
  for (SparseRowMatrix::InnerIterator it(graph.matrix(), static_cast<Eigen::Index>(i));
       it; ++it) {
    lxy += it.value() * dot(model.x.row(it.col()).data(), yj, d);
  }
  double xyd = 0.0;
  if (j + 1 < model.cols()) {
    xyd = dot(xi, model.y.row(static_cast<Eigen::Index>(j + 1)).data(), d) - pred;
  }
  return err * err + cfg.beta1 * lxy * lxy + cfg.beta2 * xyd * xyd +
         cfg.lambda * (dot(xi, xi, d) + dot(yj, yj, d));
}

SmoothnessTerms smoothness_terms(const FactorModel& model, Index i, Index j,
                                 const LaplacianMatrix& graph,
                                 const DiffOperator& diff) {
  require_index(model, i, j);
  const Index d = model.rank();
  const double* xi = model.x.row(static_cast<Eigen::Index>(i)).data();
  const double* yj = model.y.row(static_cast<Eigen::Index>(j)).data();
  SmoothnessTerms s;
  for (SparseRowMatrix::InnerIterator it(graph.gram(), static_cast<Eigen::Index>(i)); it;
       ++it) {
    s.spatial += it.value() * dot(model.x.row(it.col()).data(), yj, d);
  }
  diff.for_each_in_gram_column(j, [&](Index r, double b) {
    s.temporal += b * dot(xi, model.y.row(static_cast<Eigen::Index>(r)).data(), d);
  });
  return s;
}

void cheap_update(FactorModel& model, Index i, Index j, double h,
                  const TrainConfig& cfg, UpdateTarget target) {
  require_index(model, i, j);
  const Index d = model.rank();
  double* xi = model.x.row(static_cast<Eigen::Index>(i)).data();
  double* yj = model.y.row(static_cast<Eigen::Index>(j)).data();
  const double delta = h - dot(xi, yj, d);
  sgd_step(xi, yj, d, delta, 2.0 * cfg.eta, cfg.lambda, target);
}

void full_update(FactorModel& model, Index i, Index j, double h,
                 const LaplacianMatrix& graph, const DiffOperator& diff,
                 const TrainConfig& cfg, UpdateTarget target) {
  require_index(model, i, j);
  if (graph.size() != model.rows() || diff.slots() != model.cols()) {
    throw ShapeError("graph or slot count does not match the model");
  }
  const Index d = model.rank();
  double* xi = model.x.row(static_cast<Eigen::Index>(i)).data();
  double* yj = model.y.row(static_cast<Eigen::Index>(j)).data();
  double coef = h - dot(xi, yj, d);
  if (cfg.beta1 != 0.0 || cfg.beta2 != 0.0) {
    SmoothnessTerms s = smoothness_terms(model, i, j, graph, diff);
    if (cfg.beta1 != 0.0) coef -= cfg.beta1 * s.spatial;
    if (cfg.beta2 != 0.0) coef -= cfg.beta2 * s.temporal;
  }
  sgd_step(xi, yj, d, coef, 2.0 * cfg.eta, cfg.lambda, target);
}

bool should_stop(const LossTrace& trace, double tol) {
  if (trace.size() < 2) return false;
  double change = std::abs(trace.back().rmse - trace[trace.size() - 2].rmse);
  return change < tol;
}

double training_rmse(const FactorModel& model, const ObservedMatrix& train) {
  if (train.empty()) throw ParameterError("training RMSE of an empty entry set");
  const Index d = model.rank();
  double sum = 0.0;
  for (const Entry& e : train.entries()) {
    double r = e.v - dot(model.x.row(static_cast<Eigen::Index>(e.i)).data(),
                         model.y.row(static_cast<Eigen::Index>(e.j)).data(), d);
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(train.size()));
}

TrainResult train(const ObservedMatrix& train_m, const CoordinateSet& coords,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (coords.size() != train_m.rows()) {
    throw ShapeError("matrix has " + std::to_string(train_m.rows()) +
                     " rows but coordinates describe " + std::to_string(coords.size()) +
                     " sensors");
  }
  SensorGraph graph = build_sensor_graph(coords, cfg.k_nn);
  return train(train_m, graph.laplacian, cfg);
}

TrainResult train(const ObservedMatrix& train_m, const LaplacianMatrix& graph,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (train_m.empty()) throw ParameterError("cannot train on an empty matrix");
  if (graph.size() != train_m.rows()) {
    throw ShapeError("graph has " + std::to_string(graph.size()) +
                     " vertices but matrix has " + std::to_string(train_m.rows()) +
                     " rows");
  }
  const DiffOperator diff(train_m.cols());
  const std::vector<Entry>& by_row = train_m.entries();
  std::vector<std::size_t> by_col(by_row.size());
  std::iota(by_col.begin(), by_col.end(), std::size_t{0});
  std::stable_sort(by_col.begin(), by_col.end(), [&](std::size_t a, std::size_t b) {
    return by_row[a].j < by_row[b].j;
  });

  TrainResult result;
  result.model = init_factors(train_m.rows(), train_m.cols(), cfg);
  FactorModel& model = result.model;

  auto visit = [&](const Entry& e, std::size_t counter, UpdateTarget target) {
    if (is_full_update_step(counter, cfg.mu)) {
      full_update(model, e.i, e.j, e.v, graph, diff, cfg, target);
      ++result.full_updates;
    } else {
      cheap_update(model, e.i, e.j, e.v, cfg, target);
      ++result.cheap_updates;
    }
  };

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    // Column by column, X rows only.
    std::size_t counter = 0;
    for (std::size_t idx : by_col) visit(by_row[idx], counter++, UpdateTarget::kX);
    // Row by row, Y rows only.
    counter = 0;
    for (const Entry& e : by_row) visit(e, counter++, UpdateTarget::kY);

    if (!all_finite(model)) throw DivergenceError(epoch);
    double rmse = training_rmse(model, train_m);
    double obj = objective(model, train_m, graph, diff, cfg);
    if (!std::isfinite(rmse) || !std::isfinite(obj)) throw DivergenceError(epoch);
    result.trace.push_back({epoch, rmse, obj});
    if (should_stop(result.trace, cfg.tol)) break;
  }
  model.epochs = result.trace.size();
  model.train_rmse = result.trace.back().rmse;
  return result;
}

}  // namespace strecover
