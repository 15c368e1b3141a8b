#ifndef STRECOVER_SPATIAL_GRAPH_HPP_
#define STRECOVER_SPATIAL_GRAPH_HPP_

#include <cstddef>
#include <filesystem>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "strecover/data_model.hpp"

namespace strecover {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// M sensor positions, one row per sensor, `dim()` coordinates each.
class CoordinateSet {
 public:
  CoordinateSet() = default;
  explicit CoordinateSet(Eigen::MatrixXd points);

  Index size() const { return static_cast<Index>(points_.rows()); }
  Index dim() const { return static_cast<Index>(points_.cols()); }
  const Eigen::MatrixXd& points() const { return points_; }

  friend bool operator==(const CoordinateSet& a, const CoordinateSet& b) {
    return a.points_.rows() == b.points_.rows() &&
           a.points_.cols() == b.points_.cols() && a.points_ == b.points_;
  }

 private:
  Eigen::MatrixXd points_;
};

// Coordinate CSV: header `id,x,y` or `id,x1,...,xd`; ids must be 0..M-1.
CoordinateSet load_coordinates(const std::filesystem::path& path);
CoordinateSet parse_coordinates(std::string_view contents);
void write_coordinates(const std::filesystem::path& path, const CoordinateSet& coords);
std::string format_coordinates(const CoordinateSet& coords);

// Dense symmetric Euclidean distance matrix. Needs at least 2 points.
Eigen::MatrixXd pairwise_distances(const CoordinateSet& coords);

// Returns the k nearest neighbours of every vertex (self excluded), closest
// first, ties broken by lower index.
std::vector<std::vector<Index>> nearest_neighbors(const Eigen::MatrixXd& distances,
                                                  Index k);

// kNN weights w = 1/p on each vertex's k nearest neighbours, symmetrized by
// elementwise max. Throws DegenerateDistanceError when a chosen neighbour is
// at distance zero.
SparseRowMatrix knn_weights(const Eigen::MatrixXd& distances, Index k);

// Graph Laplacian L = diag(rowsum W) - W together with its Gram A = L^T L.
class LaplacianMatrix {
 public:
  LaplacianMatrix() = default;
  LaplacianMatrix(SparseRowMatrix laplacian, SparseRowMatrix gram);

  // Zero Laplacian on `m` vertices (graph without edges).
  static LaplacianMatrix empty(Index m);

  Index size() const { return static_cast<Index>(laplacian_.rows()); }
  const SparseRowMatrix& matrix() const { return laplacian_; }
  const SparseRowMatrix& gram() const { return gram_; }

 private:
  SparseRowMatrix laplacian_;
  SparseRowMatrix gram_;
};

// Throws ParameterError if W is not symmetric.
LaplacianMatrix laplacian(const SparseRowMatrix& weights);

// Row i of A = L^T L.
Eigen::SparseVector<double> gram_row(const LaplacianMatrix& lap, Index i);

// Everything derived from the coordinates in one place. A single-sensor
// set yields an edgeless graph.
struct SensorGraph {
  Eigen::MatrixXd distances;
  SparseRowMatrix weights;
  LaplacianMatrix laplacian;
};

SensorGraph build_sensor_graph(const CoordinateSet& coords, Index k);

}  // namespace strecover

#endif  // STRECOVER_SPATIAL_GRAPH_HPP_
