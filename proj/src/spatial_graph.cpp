#include "strecover/spatial_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "strecover/error.hpp"
#include "strecover/text_format.hpp"

namespace strecover {

CoordinateSet::CoordinateSet(Eigen::MatrixXd points) : points_(std::move(points)) {
  if (points_.cols() < 1) throw ParameterError("coordinates need at least one dimension");
  if (!points_.allFinite()) throw ParameterError("coordinates must be finite");
}

CoordinateSet parse_coordinates(std::string_view contents) {
  auto lines = text::lines(contents);
  if (lines.empty()) throw ParseError("missing header", 1);
  auto header = text::split(lines[0]);
  if (header.size() < 2 || text::trim(header[0]) != "id") {
    throw ParseError("expected header 'id,x,y' or 'id,x1,...,xd'", 1);
  }
  const std::size_t dim = header.size() - 1;
  bool xy = dim == 2 && text::trim(header[1]) == "x" && text::trim(header[2]) == "y";
  bool plain_x = dim == 1 && text::trim(header[1]) == "x";
  bool numbered = true;
  for (std::size_t c = 1; c <= dim; ++c) {
    numbered = numbered && text::trim(header[c]) == "x" + std::to_string(c);
  }
  if (!xy && !plain_x && !numbered) {
    throw ParseError("expected header 'id,x,y' or 'id,x1,...,xd'", 1);
  }

  std::vector<std::pair<std::int64_t, std::vector<double>>> rows;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    if (text::trim(lines[n]).empty()) {
      if (n + 1 == lines.size()) break;
      throw ParseError("empty line", line_no);
    }
    auto fields = text::split(lines[n]);
    if (fields.size() != dim + 1) {
      throw ParseError("expected " + std::to_string(dim + 1) + " fields", line_no);
    }
    auto id = text::parse_int(fields[0]);
    if (!id || *id < 0) throw ParseError("id must be a non-negative integer", line_no);
    std::vector<double> xs(dim);
    for (std::size_t c = 0; c < dim; ++c) {
      auto v = text::parse_double(fields[c + 1]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError("coordinate is not a finite number", line_no);
      }
      xs[c] = *v;
    }
    rows.emplace_back(*id, std::move(xs));
  }

  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd points(m, static_cast<Eigen::Index>(dim));
  std::vector<bool> seen(rows.size(), false);
  for (const auto& [id, xs] : rows) {
    if (id >= m || seen[static_cast<std::size_t>(id)]) {
      throw ParseError("ids must be exactly 0.." + std::to_string(m - 1) +
                           ", offending id " + std::to_string(id),
                       0);
    }
    seen[static_cast<std::size_t>(id)] = true;
    for (std::size_t c = 0; c < dim; ++c) {
      points(id, static_cast<Eigen::Index>(c)) = xs[c];
    }
  }
  return CoordinateSet(std::move(points));
}

CoordinateSet load_coordinates(const std::filesystem::path& path) {
  return parse_coordinates(text::read_file(path));
}

std::string format_coordinates(const CoordinateSet& coords) {
  std::string out = "id";
  if (coords.dim() == 2) {
    out += ",x,y";
  } else {
    for (Index c = 1; c <= coords.dim(); ++c) out += ",x" + std::to_string(c);
  }
  out += '\n';
  const auto& p = coords.points();
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    out += std::to_string(r);
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      out += ',';
      out += text::format_double(p(r, c));
    }
    out += '\n';
  }
  return out;
}

void write_coordinates(const std::filesystem::path& path, const CoordinateSet& coords) {
  text::write_file(path, format_coordinates(coords));
}

Eigen::MatrixXd pairwise_distances(const CoordinateSet& coords) {
  const Eigen::Index m = static_cast<Eigen::Index>(coords.size());
  if (m < 2) throw ParameterError("pairwise_distances needs at least 2 points");
  const auto& p = coords.points();
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = a + 1; b < m; ++b) {
      double d = (p.row(a) - p.row(b)).norm();
      dist(a, b) = d;
      dist(b, a) = d;
    }
  }
  return dist;
}

std::vector<std::vector<Index>> nearest_neighbors(const Eigen::MatrixXd& distances,
                                                  Index k) {
  const auto m = static_cast<Index>(distances.rows());
  if (distances.cols() != distances.rows()) {
    throw ShapeError("distance matrix must be square");
  }
  if (k < 1 || k + 1 > m) {
    throw ParameterError("neighbour count k=" + std::to_string(k) +
                         " must lie in [1, " + std::to_string(m > 0 ? m - 1 : 0) + "]");
  }
  std::vector<std::vector<Index>> result(m);
  std::vector<Index> candidates;
  candidates.reserve(m);
  for (Index i = 0; i < m; ++i) {
    candidates.clear();
    for (Index j = 0; j < m; ++j) {
      if (j != i) candidates.push_back(j);
    }
    auto closer = [&](Index a, Index b) {
      double da = distances(i, a), db = distances(i, b);
      return da != db ? da < db : a < b;
    };
    std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end(),
                      closer);
    result[i].assign(candidates.begin(), candidates.begin() + k);
  }
  return result;
}

SparseRowMatrix knn_weights(const Eigen::MatrixXd& distances, Index k) {
  auto neighbors = nearest_neighbors(distances, k);
  const auto m = static_cast<Eigen::Index>(distances.rows());

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * neighbors.size() * k);
  for (Index i = 0; i < neighbors.size(); ++i) {
    for (Index j : neighbors[i]) {
      double p = distances(i, j);
      if (p <= 0.0) {
        throw DegenerateDistanceError("sensors " + std::to_string(i) + " and " +
                                      std::to_string(j) +
                                      " coincide; deduplicate coordinates first");
      }
      double w = 1.0 / p;
      triplets.emplace_back(i, j, w);
      triplets.emplace_back(j, i, w);
    }
  }
  SparseRowMatrix w(m, m);
  w.setFromTriplets(triplets.begin(), triplets.end(),
                    [](double a, double b) { return std::max(a, b); });
  return w;
}

LaplacianMatrix::LaplacianMatrix(SparseRowMatrix laplacian, SparseRowMatrix gram)
    : laplacian_(std::move(laplacian)), gram_(std::move(gram)) {}

LaplacianMatrix LaplacianMatrix::empty(Index m) {
  const auto n = static_cast<Eigen::Index>(m);
  return LaplacianMatrix(SparseRowMatrix(n, n), SparseRowMatrix(n, n));
}

LaplacianMatrix laplacian(const SparseRowMatrix& weights) {
  const Eigen::Index m = weights.rows();
  if (weights.cols() != m) throw ShapeError("weight matrix must be square");

  double scale = 0.0;
  for (Eigen::Index r = 0; r < m; ++r) {
    for (SparseRowMatrix::InnerIterator it(weights, r); it; ++it) {
      if (it.value() < 0.0 || !std::isfinite(it.value())) {
        throw ParameterError("weights must be finite and non-negative");
      }
      if (it.col() == r && it.value() != 0.0) {
        throw ParameterError("weight matrix must have a zero diagonal");
      }
      scale = std::max(scale, it.value());
    }
  }
  SparseRowMatrix transposed = weights.transpose();
  SparseRowMatrix diff = weights - transposed;
  double asym = 0.0;
  for (Eigen::Index n = 0; n < diff.nonZeros(); ++n) {
    asym = std::max(asym, std::abs(diff.valuePtr()[n]));
  }
  if (asym > 1e-12 * scale) {
    throw ParameterError("weight matrix is not symmetric");
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(weights.nonZeros() + m));
  for (Eigen::Index r = 0; r < m; ++r) {
    double degree = 0.0;
    for (SparseRowMatrix::InnerIterator it(weights, r); it; ++it) {
      if (it.value() == 0.0) continue;
      degree += it.value();
      triplets.emplace_back(r, it.col(), -it.value());
    }
    if (degree != 0.0) triplets.emplace_back(r, r, degree);
  }
  SparseRowMatrix lap(m, m);
  lap.setFromTriplets(triplets.begin(), triplets.end());
  SparseRowMatrix lap_t = lap.transpose();
  SparseRowMatrix gram = (lap_t * lap).pruned();
  return LaplacianMatrix(std::move(lap), std::move(gram));
}

Eigen::SparseVector<double> gram_row(const LaplacianMatrix& lap, Index i) {
  if (i >= lap.size()) {
    throw IndexError("gram row " + std::to_string(i) + " out of range for " +
                     std::to_string(lap.size()) + " vertices");
  }
  Eigen::SparseVector<double> row(static_cast<Eigen::Index>(lap.size()));
  for (SparseRowMatrix::InnerIterator it(lap.gram(), static_cast<Eigen::Index>(i)); it;
       ++it) {
    row.insert(it.col()) = it.value();
  }
  return row;
}

SensorGraph build_sensor_graph(const CoordinateSet& coords, Index k) {
  const auto m = static_cast<Eigen::Index>(coords.size());
  if (m == 0) throw ParameterError("no coordinates");
  if (m == 1) {
    return SensorGraph{Eigen::MatrixXd::Zero(1, 1), SparseRowMatrix(1, 1),
                       LaplacianMatrix::empty(1)};
  }
  SensorGraph g;
  g.distances = pairwise_distances(coords);
  g.weights = knn_weights(g.distances, k);
  g.laplacian = laplacian(g.weights);
  return g;
}

}  // namespace strecover
