#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "groundbridge/csv.hpp"
#include "groundbridge/error.hpp"

using namespace groundbridge;

TEST(Csv, ShortestFormRoundTripsBitExactly) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 30) - 15);
    EXPECT_EQ(csv::parse_double(csv::format_double(v)), v);
  }
  EXPECT_EQ(csv::format_double(0.1), "0.1");
  EXPECT_EQ(csv::parse_double(csv::format_double(std::numeric_limits<double>::denorm_min())),
            std::numeric_limits<double>::denorm_min());
}

TEST(Csv, FixedFormatDropsNegativeZero) {
  EXPECT_EQ(csv::format_fixed(-0.001, 2), "0.00");
  EXPECT_EQ(csv::format_fixed(0.125, 2), "0.12");
  EXPECT_EQ(csv::format_fixed(-0.5, 2), "-0.50");
}

TEST(Csv, SplitKeepsEmptyFieldsAndStripsCr) {
  const auto f = csv::split_line("a,,b,\r");
  ASSERT_EQ(f.size(), 4u);
  EXPECT_EQ(f[1], "");
  EXPECT_EQ(f[3], "");
  EXPECT_EQ(csv::join(f), "a,,b,");
}

TEST(Csv, ParseRejectsTrailingGarbage) {
  EXPECT_THROW(csv::parse_double("1.5x"), Error);
  EXPECT_THROW(csv::parse_double(""), Error);
  EXPECT_THROW(csv::parse_int("12.0"), Error);
  EXPECT_EQ(csv::parse_int("-42"), -42);
}

TEST(Csv, OpenFailuresAreIoErrors) {
  try {
    csv::open_in("/nonexistent/dir/file.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
    EXPECT_EQ(exit_code_for(e.kind()), 3);
  }
  EXPECT_EQ(exit_code_for(ErrorKind::config), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::contract), 2);
}
