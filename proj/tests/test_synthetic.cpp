#include <algorithm>
#include <numeric>
#include <random>

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "strecover/error.hpp"
#include "strecover/synthetic.hpp"
#include "strecover/text_format.hpp"
#include "test_util.hpp"

namespace strecover {
namespace {

Eigen::MatrixXd to_dense(const ObservedMatrix& m) {
  Eigen::MatrixXd h(Eigen::Index(m.rows()), Eigen::Index(m.cols()));
  for (const Entry& e : m.entries()) h(Eigen::Index(e.i), Eigen::Index(e.j)) = e.v;
  return h;
}

double mean_adjacent_column_gap(const Eigen::MatrixXd& h) {
  return (h.rightCols(h.cols() - 1) - h.leftCols(h.cols() - 1)).cwiseAbs().mean();
}

TEST(Generate, NoiselessUnsmoothedRankOne) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SynthSpec s;
    s.rows = 15;
    s.cols = 20;
    s.rank = 1;
    s.noise = 0.0;
    s.spatial_rounds = 0;
    s.temporal_rounds = 0;
    s.seed = seed;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_dense(generate(s).matrix));
    auto sv = svd.singularValues();
    EXPECT_LT(sv(1), 1e-8 * sv(0));
  }
}

TEST(Generate, NoiselessRankIsExact) {
  SynthSpec s;
  s.rows = 18;
  s.cols = 20;
  s.rank = 4;
  s.noise = 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_dense(generate(s).matrix));
  auto sv = svd.singularValues();
  EXPECT_GT(sv(3), 1e-6 * sv(0));
  EXPECT_LT(sv(4), 1e-8 * sv(0));
}

TEST(Generate, TemporalSmoothingBeatsShuffledColumns) {
  SynthSpec s;
  s.temporal_rounds = 3;
  Eigen::MatrixXd h = to_dense(generate(s).matrix);
  std::vector<int> perm(static_cast<std::size_t>(h.cols()));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 gen(4);
  for (int t = 0; t < 5; ++t) {
    std::shuffle(perm.begin(), perm.end(), gen);
    Eigen::MatrixXd shuffled(h.rows(), h.cols());
    for (Eigen::Index j = 0; j < h.cols(); ++j) shuffled.col(j) = h.col(perm[std::size_t(j)]);
    EXPECT_LT(mean_adjacent_column_gap(h), mean_adjacent_column_gap(shuffled));
  }
}

TEST(Generate, SpatialSmoothingMakesNeighboursSimilar) {
  SynthSpec s;
  s.spatial_rounds = 2;
  s.noise = 0.0;
  auto data = generate(s);
  Eigen::MatrixXd h = to_dense(data.matrix);
  auto nn = nearest_neighbors(pairwise_distances(data.coords), 3);
  double adjacent = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    for (Index n : nn[std::size_t(i)]) {
      adjacent += (h.row(i) - h.row(Eigen::Index(n))).squaredNorm();
      ++count;
    }
  adjacent /= double(count);
  double random = 0.0;
  std::mt19937 gen(1);
  std::uniform_int_distribution<int> pick(0, int(h.rows()) - 1);
  for (std::size_t k = 0; k < 2000; ++k) {
    int a = pick(gen), b = pick(gen);
    random += (h.row(a) - h.row(b)).squaredNorm();
  }
  random /= 2000.0;
  EXPECT_LT(adjacent, random);
}

TEST(Generate, MeanIsFiveWithoutNoise) {
  SynthSpec s;
  s.noise = 0.0;
  EXPECT_NEAR(to_dense(generate(s).matrix).mean(), 5.0, 1e-12);
}

TEST(Generate, DeterministicAndSeeded) {
  SynthSpec s;
  s.rows = 10;
  s.cols = 12;
  s.rank = 3;
  auto a = generate(s);
  auto b = generate(s);
  EXPECT_EQ(a.matrix, b.matrix);
  EXPECT_EQ(a.coords, b.coords);
  s.seed += 1;
  EXPECT_NE(generate(s).matrix, a.matrix);
}

TEST(Generate, Validation) {
  auto bad = [](auto mutate) {
    SynthSpec s;
    mutate(s);
    return s;
  };
  EXPECT_THROW(generate(bad([](SynthSpec& s) { s.rows = 0; })), ParameterError);
  EXPECT_THROW(generate(bad([](SynthSpec& s) { s.rank = 0; })), ParameterError);
  EXPECT_THROW(generate(bad([](SynthSpec& s) { s.rank = 41; })), ParameterError);
  EXPECT_THROW(generate(bad([](SynthSpec& s) { s.noise = -1; })), ParameterError);
  EXPECT_THROW(generate(bad([](SynthSpec& s) { s.box = 0; })), ParameterError);
  EXPECT_THROW(generate(bad([](SynthSpec& s) { s.smoothing_k = 0; })), ParameterError);
}

TEST(SmokeDataset, ShapeAndStability) {
  auto a = smoke_dataset();
  EXPECT_EQ(a.matrix.rows(), 40u);
  EXPECT_EQ(a.matrix.cols(), 60u);
  EXPECT_EQ(a.matrix.size(), 2400u);
  EXPECT_EQ(a.coords.size(), 40u);
  auto b = smoke_dataset();
  EXPECT_EQ(a.matrix, b.matrix);
  EXPECT_EQ(a.coords, b.coords);
  EXPECT_EQ(format_triplets(a.matrix.entries()), format_triplets(b.matrix.entries()));
  EXPECT_EQ(format_coordinates(a.coords), format_coordinates(b.coords));
}

TEST(WriteDataset, FilesLoadBack) {
  auto dir = testing::scratch_dir();
  auto data = smoke_dataset();
  write_dataset(dir / "smoke", data);
  auto dims = load_dims(dir / "smoke" / "meta.json");
  EXPECT_EQ(dims, (Dims{40, 60}));
  EXPECT_EQ(load_triplets(dir / "smoke" / "data.csv", dims), data.matrix);
  EXPECT_EQ(load_coordinates(dir / "smoke" / "coords.csv"), data.coords);
}

}  // namespace
}  // namespace strecover
