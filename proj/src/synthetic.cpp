#include "strecover/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "strecover/error.hpp"
#include "strecover/rng.hpp"

namespace strecover {
namespace {

constexpr double kTargetMean = 5.0;

void smooth_spatially(Eigen::MatrixXd& u, const CoordinateSet& coords, Index k,
                      Index rounds) {
  if (rounds == 0 || u.rows() < 2) return;
  k = std::min<Index>(k, static_cast<Index>(u.rows()) - 1);
  auto neighbors = nearest_neighbors(pairwise_distances(coords), k);
  for (Index round = 0; round < rounds; ++round) {
    Eigen::MatrixXd next(u.rows(), u.cols());
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      Eigen::RowVectorXd acc = u.row(i);
      for (Index n : neighbors[static_cast<std::size_t>(i)]) {
        acc += u.row(static_cast<Eigen::Index>(n));
      }
      next.row(i) = acc / static_cast<double>(k + 1);
    }
    u.swap(next);
  }
}

void smooth_temporally(Eigen::MatrixXd& v, Index rounds) {
  const Eigen::Index n = v.rows();
  if (n < 2) return;
  for (Index round = 0; round < rounds; ++round) {
    Eigen::MatrixXd next(v.rows(), v.cols());
    for (Eigen::Index j = 0; j < n; ++j) {
      Eigen::Index lo = std::max<Eigen::Index>(0, j - 1);
      Eigen::Index hi = std::min<Eigen::Index>(n - 1, j + 1);
      next.row(j) = v.middleRows(lo, hi - lo + 1).colwise().mean();
    }
    v.swap(next);
  }
}

}  // namespace

void SynthSpec::validate() const {
  if (rows < 1 || cols < 1) throw ParameterError("synthetic rows and cols must be >= 1");
  if (rank < 1 || rank > std::min(rows, cols)) {
    throw ParameterError("synthetic rank must lie in [1, min(rows, cols)]");
  }
  if (!(noise >= 0.0) || !std::isfinite(noise)) {
    throw ParameterError("noise must be finite and >= 0");
  }
  if (!(box > 0.0) || !std::isfinite(box)) {
    throw ParameterError("box size must be finite and > 0");
  }
  if (smoothing_k < 1) throw ParameterError("smoothing_k must be >= 1");
}

SyntheticDataset generate(const SynthSpec& spec) {
  spec.validate();
  const auto m = static_cast<Eigen::Index>(spec.rows);
  const auto n = static_cast<Eigen::Index>(spec.cols);
  const auto r = static_cast<Eigen::Index>(spec.rank);
  Rng rng(spec.seed);

  Eigen::MatrixXd points(m, 2);
  for (Eigen::Index i = 0; i < m; ++i) {
    points(i, 0) = rng.uniform(0.0, spec.box);
    points(i, 1) = rng.uniform(0.0, spec.box);
  }
  CoordinateSet coords(points);

  // A positive baseline component plus zero-mean variations, so the
  // rescaled matrix resembles a speed field around its mean.
  auto draw_factor = [&](Eigen::Index rows) {
    Eigen::MatrixXd f(rows, r);
    for (Eigen::Index a = 0; a < rows; ++a) {
      f(a, 0) = rng.uniform(1.0, 2.0);
      for (Eigen::Index c = 1; c < r; ++c) f(a, c) = 0.5 * rng.normal();
    }
    return f;
  };
  Eigen::MatrixXd u = draw_factor(m);
  Eigen::MatrixXd v = draw_factor(n);

  smooth_spatially(u, coords, spec.smoothing_k, spec.spatial_rounds);
  smooth_temporally(v, spec.temporal_rounds);

  Eigen::MatrixXd h = u * v.transpose();
  const double mean = h.mean();
  if (mean > 0.0) h *= kTargetMean / mean;

  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(m * n));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double value = h(i, j);
      if (spec.noise > 0.0) value += spec.noise * rng.normal();
      entries.push_back({static_cast<Index>(i), static_cast<Index>(j), value});
    }
  }
  return {ObservedMatrix(spec.rows, spec.cols, std::move(entries)), std::move(coords)};
}

SynthSpec smoke_spec() {
  SynthSpec spec;
  spec.rows = 40;
  spec.cols = 60;
  spec.rank = 4;
  spec.spatial_rounds = 2;
  spec.temporal_rounds = 3;
  spec.noise = 0.1;
  spec.box = 100.0;
  spec.smoothing_k = 5;
  spec.seed = 2023;
  return spec;
}

SyntheticDataset smoke_dataset() { return generate(smoke_spec()); }

void write_dataset(const std::filesystem::path& dir, const SyntheticDataset& data) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");
  write_triplets(dir / "data.csv", data.matrix.entries());
  write_coordinates(dir / "coords.csv", data.coords);
  write_dims(dir / "meta.json", data.matrix.dims());
}

}  // namespace strecover
