#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "strecover/error.hpp"
#include "strecover/text_format.hpp"
#include "test_util.hpp"

namespace strecover {
namespace {

TEST(TextFormat, FormatDoubleRoundTrips) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int n = 0; n < 2000; ++n) {
    double v = u(gen) * std::pow(10.0, static_cast<double>(n % 40) - 20.0);
    auto back = text::parse_double(text::format_double(v));
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, v);
  }
  EXPECT_EQ(text::format_double(0.1), "0.1");
  EXPECT_EQ(text::format_double(5.0), "5");
  EXPECT_EQ(text::format_double(std::numeric_limits<double>::denorm_min()), "5e-324");
}

TEST(TextFormat, ParseNumbers) {
  EXPECT_EQ(text::parse_double(" +2.5 "), 2.5);
  EXPECT_EQ(text::parse_double("-1e3"), -1000.0);
  EXPECT_FALSE(text::parse_double("").has_value());
  EXPECT_FALSE(text::parse_double("1.5x").has_value());
  EXPECT_FALSE(text::parse_double("abc").has_value());
  EXPECT_EQ(text::parse_int("42"), 42);
  EXPECT_EQ(text::parse_int("+7"), 7);
  EXPECT_FALSE(text::parse_int("4.2").has_value());
  EXPECT_FALSE(text::parse_int(" ").has_value());
}

TEST(TextFormat, SplitKeepsEmptyFields) {
  auto parts = text::split("a,,b,", ',');
  ASSERT_EQ(parts.size(), 4u);
  EXPECT_EQ(parts[0], "a");
  EXPECT_EQ(parts[1], "");
  EXPECT_EQ(parts[2], "b");
  EXPECT_EQ(parts[3], "");
  EXPECT_EQ(text::trim("\t x \r"), "x");
}

TEST(TextFormat, LinesHandleCrlfAndTrailingNewline) {
  auto a = text::lines("h\r\n1\r\n2\r\n");
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[0], "h");
  EXPECT_EQ(a[2], "2");
  auto b = text::lines("h\n1");
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[1], "1");
  EXPECT_TRUE(text::lines("").empty());
}

TEST(TextFormat, FileRoundTripAndMissingFile) {
  auto dir = testing::scratch_dir();
  text::write_file(dir / "f.txt", "abc\n");
  EXPECT_EQ(text::read_file(dir / "f.txt"), "abc\n");
  EXPECT_THROW(text::read_file(dir / "missing.txt"), IoError);
  EXPECT_THROW(text::write_file(dir / "no" / "such" / "dir.txt", "x"), IoError);
}

}  // namespace
}  // namespace strecover
