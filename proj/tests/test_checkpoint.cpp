#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "strecover/checkpoint.hpp"
#include "strecover/error.hpp"
#include "strecover/text_format.hpp"
#include "test_util.hpp"

namespace strecover {
namespace {

FactorModel random_model(int m, int n, int d, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, 3.0);
  FactorModel model;
  model.x = FactorMatrix(m, d);
  model.y = FactorMatrix(n, d);
  for (Eigen::Index k = 0; k < model.x.size(); ++k) model.x.data()[k] = z(gen);
  for (Eigen::Index k = 0; k < model.y.size(); ++k) model.y.data()[k] = z(gen) * 1e-7;
  model.config.d = Index(d);
  model.config.beta1 = 0.125;
  model.config.seed = 99;
  model.epochs = 17;
  model.train_rmse = 0.1 + 1e-17;
  return model;
}

TEST(ConfigJson, RoundTripAndOverlay) {
  TrainConfig cfg;
  cfg.d = 12;
  cfg.lambda = 0.3;
  cfg.tol = std::numeric_limits<double>::infinity();
  cfg.seed = 12345678901234ull;
  auto j = config_to_json(cfg);
  EXPECT_TRUE(j["tol"].is_null());
  EXPECT_EQ(config_from_json(j), cfg);

  auto partial = nlohmann::json::parse(R"({"eta": 0.01, "mu": 4})");
  TrainConfig merged = config_from_json(partial, cfg);
  EXPECT_EQ(merged.eta, 0.01);
  EXPECT_EQ(merged.mu, 4u);
  EXPECT_EQ(merged.d, 12u);
}

TEST(ConfigJson, RejectsUnknownKeysWrongTypesAndInvalidValues) {
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"alpha": 1})")), ParseError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"d": "forty"})")), ParseError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"d": -3})")), ParseError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"([1, 2])")), ParseError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"eta": 0})")), ParameterError);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  auto dir = testing::scratch_dir();
  auto model = random_model(5, 7, 3, 1);
  save_checkpoint(dir / "ck", model);
  auto back = load_checkpoint(dir / "ck");
  EXPECT_EQ(back.x, model.x);
  EXPECT_EQ(back.y, model.y);
  EXPECT_EQ(back.config, model.config);
  EXPECT_EQ(back.epochs, model.epochs);
  EXPECT_EQ(back.train_rmse, model.train_rmse);

  auto meta = nlohmann::json::parse(text::read_file(dir / "ck" / "meta.json"));
  EXPECT_EQ(meta["rows"], 5);
  EXPECT_EQ(meta["cols"], 7);
  EXPECT_EQ(meta["d"], 3);
  EXPECT_EQ(meta["epochs"], 17);
}

TEST(Checkpoint, UntrainedModelHasNullRmse) {
  auto dir = testing::scratch_dir();
  auto model = random_model(2, 2, 1, 2);
  model.train_rmse = std::numeric_limits<double>::quiet_NaN();
  save_checkpoint(dir, model);
  auto meta = nlohmann::json::parse(text::read_file(dir / "meta.json"));
  EXPECT_TRUE(meta["final_rmse"].is_null());
  EXPECT_TRUE(std::isnan(load_checkpoint(dir).train_rmse));
}

TEST(Checkpoint, Errors) {
  auto dir = testing::scratch_dir();
  EXPECT_THROW(load_checkpoint(dir / "missing"), IoError);
  save_checkpoint(dir / "ck", random_model(3, 4, 2, 3));
  text::write_file(dir / "ck" / "X.csv", "1,2\n3,4\n");
  EXPECT_THROW(load_checkpoint(dir / "ck"), ParseError);
  text::write_file(dir / "ck" / "meta.json", "{}");
  EXPECT_THROW(load_checkpoint(dir / "ck"), ParseError);
}

TEST(Trace, RoundTrip) {
  auto dir = testing::scratch_dir();
  LossTrace trace{{1, 2.5, 100.0}, {2, 1.0 / 3.0, 50.125}, {3, 1e-9, 1e300}};
  write_trace(dir / "trace.csv", trace);
  EXPECT_EQ(text::lines(text::read_file(dir / "trace.csv"))[0], "epoch,rmse,objective");
  EXPECT_EQ(load_trace(dir / "trace.csv"), trace);
  text::write_file(dir / "bad.csv", "epoch,rmse\n1,2\n");
  EXPECT_THROW(load_trace(dir / "bad.csv"), ParseError);
}

TEST(Dense, RoundTrip) {
  auto dir = testing::scratch_dir();
  Eigen::MatrixXd m(2, 3);
  m << 1.0 / 3.0, -2, 1e-310, 4.5, 0, 7e22;
  EXPECT_EQ(format_dense(m), text::format_double(1.0 / 3.0) + ",-2,1e-310\n4.5,0,7e+22\n");
  write_dense(dir / "d.csv", m);
  EXPECT_EQ(load_dense(dir / "d.csv"), m);
  text::write_file(dir / "ragged.csv", "1,2\n3\n");
  EXPECT_THROW(load_dense(dir / "ragged.csv"), ParseError);
}

}  // namespace
}  // namespace strecover
