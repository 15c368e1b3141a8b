#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "strecover/error.hpp"
#include "strecover/spatial_graph.hpp"
#include "test_util.hpp"

namespace strecover {
namespace {

using testing::dense;
using testing::max_rel_err;

CoordinateSet line(std::initializer_list<double> xs) {
  Eigen::MatrixXd p(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index r = 0;
  for (double x : xs) p(r++, 0) = x;
  return CoordinateSet(p);
}

SparseRowMatrix sparse(const Eigen::MatrixXd& m) { return m.sparseView(); }

// Directed kNN weights by full sort, then max-symmetrized, all dense.
Eigen::MatrixXd brute_knn(const Eigen::MatrixXd& p, int k) {
  const int m = static_cast<int>(p.rows());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    std::vector<int> order;
    for (int t = 0; t < m; ++t)
      if (t != i) order.push_back(t);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      double da = (p.row(i) - p.row(a)).norm(), db = (p.row(i) - p.row(b)).norm();
      return da != db ? da < db : a < b;
    });
    for (int n = 0; n < k; ++n) w(i, order[n]) = 1.0 / (p.row(i) - p.row(order[n])).norm();
  }
  return w.cwiseMax(w.transpose());
}

TEST(Distances, Examples) {
  Eigen::MatrixXd p(2, 2);
  p << 0, 0, 3, 4;
  Eigen::MatrixXd d = pairwise_distances(CoordinateSet(p));
  EXPECT_EQ(d(0, 1), 5.0);
  EXPECT_EQ(d(1, 0), 5.0);
  EXPECT_EQ(d(0, 0), 0.0);

  Eigen::MatrixXd same = pairwise_distances(line({0, 0}));
  EXPECT_TRUE(same.isZero(0.0));

  Eigen::MatrixXd three = pairwise_distances(line({0, 1, 3}));
  EXPECT_EQ(three(0, 1), 1.0);
  EXPECT_EQ(three(0, 2), 3.0);
  EXPECT_EQ(three(1, 2), 2.0);
  EXPECT_THROW(pairwise_distances(line({1})), ParameterError);
}

TEST(Distances, SymmetricZeroDiagonalTriangle) {
  auto c = testing::random_points(12, 3, 4);
  Eigen::MatrixXd d = pairwise_distances(c);
  EXPECT_TRUE(d.isApprox(d.transpose(), 0.0));
  EXPECT_TRUE(d.diagonal().isZero(0.0));
  for (int a = 0; a < 12; ++a)
    for (int b = 0; b < 12; ++b)
      for (int e = 0; e < 12; ++e) EXPECT_LE(d(a, e), d(a, b) + d(b, e) + 1e-12);
}

TEST(KnnWeights, OneDimensionalExample) {
  auto w = dense(knn_weights(pairwise_distances(line({0, 1, 3})), 1));
  Eigen::MatrixXd expected(3, 3);
  expected << 0, 1, 0, 1, 0, 0.5, 0, 0.5, 0;
  EXPECT_EQ(w, expected);
}

TEST(KnnWeights, TwoPointsAtDistanceTwo) {
  auto w = dense(knn_weights(pairwise_distances(line({0, 2})), 1));
  EXPECT_EQ(w(0, 1), 0.5);
  EXPECT_EQ(w(1, 0), 0.5);
}

TEST(KnnWeights, EquilateralTieBreakByIndex) {
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 1, 1, 0, 1, 1, 1, 0;
  auto nn = nearest_neighbors(d, 1);
  EXPECT_EQ(nn[0], std::vector<Index>{1});
  EXPECT_EQ(nn[1], std::vector<Index>{0});
  EXPECT_EQ(nn[2], std::vector<Index>{0});
  auto w = dense(knn_weights(d, 1));
  EXPECT_EQ(w(0, 1), 1.0);
  EXPECT_EQ(w(0, 2), 1.0);
  EXPECT_EQ(w(1, 2), 0.0);
}

TEST(KnnWeights, MatchesBruteForce) {
  for (unsigned seed = 1; seed <= 10; ++seed) {
    int m = 3 + static_cast<int>(seed) % 15;
    auto c = testing::random_points(m, 2, seed);
    for (int k : {1, 2, m - 1}) {
      auto w = dense(knn_weights(pairwise_distances(c), static_cast<Index>(k)));
      EXPECT_LE(max_rel_err(w, brute_knn(c.points(), k)), 1e-15);
    }
  }
}

TEST(KnnWeights, PermutationEquivariant) {
  auto c = testing::random_points(15, 2, 21);
  std::vector<int> perm(15);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(3));
  Eigen::MatrixXd q(15, 2);
  for (int i = 0; i < 15; ++i) q.row(i) = c.points().row(perm[i]);
  auto w = dense(knn_weights(pairwise_distances(c), 4));
  auto wp = dense(knn_weights(pairwise_distances(CoordinateSet(q)), 4));
  for (int a = 0; a < 15; ++a)
    for (int b = 0; b < 15; ++b) EXPECT_EQ(wp(a, b), w(perm[a], perm[b]));
}

TEST(KnnWeights, Errors) {
  auto d = pairwise_distances(line({0, 0, 5}));
  EXPECT_THROW(knn_weights(d, 1), DegenerateDistanceError);
  auto ok = pairwise_distances(line({0, 1, 3}));
  EXPECT_THROW(knn_weights(ok, 0), ParameterError);
  EXPECT_THROW(knn_weights(ok, 3), ParameterError);
  EXPECT_THROW(knn_weights(Eigen::MatrixXd::Zero(2, 3), 1), ShapeError);
}

TEST(Laplacian, TwoNodeExample) {
  Eigen::MatrixXd w(2, 2);
  w << 0, 1, 1, 0;
  auto lap = laplacian(sparse(w));
  Eigen::MatrixXd l(2, 2), a(2, 2);
  l << 1, -1, -1, 1;
  a << 2, -2, -2, 2;
  EXPECT_EQ(dense(lap.matrix()), l);
  EXPECT_EQ(dense(lap.gram()), a);
  Eigen::VectorXd row0 = gram_row(lap, 0);
  EXPECT_EQ(row0(0), 2.0);
  EXPECT_EQ(row0(1), -2.0);
}

TEST(Laplacian, EmptyGraph) {
  auto lap = laplacian(SparseRowMatrix(3, 3));
  EXPECT_TRUE(dense(lap.matrix()).isZero(0.0));
  for (Index i = 0; i < 3; ++i) EXPECT_EQ(gram_row(lap, i).nonZeros(), 0);
  auto e = LaplacianMatrix::empty(4);
  EXPECT_EQ(e.size(), 4u);
  EXPECT_TRUE(dense(e.gram()).isZero(0.0));
}

TEST(Laplacian, PathGraphGramRow) {
  Eigen::MatrixXd w(3, 3);
  w << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  auto lap = laplacian(sparse(w));
  Eigen::VectorXd row1 = gram_row(lap, 1);
  EXPECT_EQ(row1, Eigen::Vector3d(-3, 6, -3));
  EXPECT_THROW(gram_row(lap, 3), IndexError);
}

TEST(Laplacian, RejectsInvalidWeights) {
  Eigen::MatrixXd asym(2, 2);
  asym << 0, 1, 2, 0;
  EXPECT_THROW(laplacian(sparse(asym)), ParameterError);
  Eigen::MatrixXd diag(2, 2);
  diag << 1, 1, 1, 0;
  EXPECT_THROW(laplacian(sparse(diag)), ParameterError);
  Eigen::MatrixXd neg(2, 2);
  neg << 0, -1, -1, 0;
  EXPECT_THROW(laplacian(sparse(neg)), ParameterError);
  EXPECT_THROW(laplacian(SparseRowMatrix(2, 3)), ShapeError);
}

TEST(Laplacian, MatchesDenseOracleAndIsPsd) {
  std::mt19937 gen(99);
  std::normal_distribution<double> z;
  for (unsigned seed = 1; seed <= 20; ++seed) {
    int m = 2 + static_cast<int>(seed) % 19;
    auto c = testing::random_points(m, 2, seed);
    int k = 1 + static_cast<int>(seed) % (m - 1);
    auto g = build_sensor_graph(c, static_cast<Index>(k));
    Eigen::MatrixXd w = brute_knn(c.points(), k);
    Eigen::MatrixXd l = Eigen::MatrixXd(w.rowwise().sum().asDiagonal()) - w;
    Eigen::MatrixXd a = l.transpose() * l;
    EXPECT_LE(max_rel_err(dense(g.laplacian.matrix()), l), 1e-12);
    EXPECT_LE(max_rel_err(dense(g.laplacian.gram()), a), 1e-12);
    for (int i = 0; i < m; ++i) {
      Eigen::VectorXd row = gram_row(g.laplacian, static_cast<Index>(i));
      EXPECT_LE(max_rel_err(row.transpose(), a.row(i)), 1e-12);
    }
    Eigen::MatrixXd ld = dense(g.laplacian.matrix());
    double scale = ld.cwiseAbs().maxCoeff();
    EXPECT_LE(ld.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12 * scale);
    for (int probe = 0; probe < 5; ++probe) {
      Eigen::VectorXd v(m);
      for (int i = 0; i < m; ++i) v(i) = z(gen);
      EXPECT_GE(v.dot(ld * v), -1e-10 * v.squaredNorm());
      EXPECT_GE(v.dot(dense(g.laplacian.gram()) * v), -1e-10 * v.squaredNorm());
    }
  }
}

TEST(SensorGraph, SingleSensorIsEdgeless) {
  auto g = build_sensor_graph(line({4}), 5);
  EXPECT_EQ(g.laplacian.size(), 1u);
  EXPECT_EQ(g.laplacian.gram().nonZeros(), 0);
}

TEST(Coordinates, ParseFormats) {
  auto two = parse_coordinates("id,x,y\n0,1.5,2\n1,-3,4\n");
  EXPECT_EQ(two.size(), 2u);
  EXPECT_EQ(two.dim(), 2u);
  EXPECT_EQ(two.points()(1, 0), -3.0);
  auto one = parse_coordinates("id,x\n1,5\n0,2\n");
  EXPECT_EQ(one.points()(0, 0), 2.0);
  EXPECT_EQ(one.points()(1, 0), 5.0);
  auto three = parse_coordinates("id,x1,x2,x3\n0,1,2,3\n");
  EXPECT_EQ(three.dim(), 3u);
}

TEST(Coordinates, ParseErrors) {
  EXPECT_THROW(parse_coordinates(""), ParseError);
  EXPECT_THROW(parse_coordinates("sensor,x,y\n0,1,2\n"), ParseError);
  EXPECT_THROW(parse_coordinates("id,x,y\n0,1\n"), ParseError);
  EXPECT_THROW(parse_coordinates("id,x,y\n0,1,2\n2,3,4\n"), ParseError);
  EXPECT_THROW(parse_coordinates("id,x,y\n0,1,2\n0,3,4\n"), ParseError);
  EXPECT_THROW(parse_coordinates("id,x,y\n0,1,inf\n"), ParseError);
}

TEST(Coordinates, RoundTrip) {
  auto dir = testing::scratch_dir();
  auto c = testing::random_points(9, 2, 5);
  write_coordinates(dir / "c.csv", c);
  EXPECT_EQ(load_coordinates(dir / "c.csv"), c);
  EXPECT_EQ(parse_coordinates(format_coordinates(c)), c);
}

}  // namespace
}  // namespace strecover
