#include <cmath>

#include <gtest/gtest.h>

#include "core.hpp"
#include "support/expect.hpp"

using namespace biotrack;

TEST(UnitGray, ScalesEightBitValues) {
  Image8 white(1, 1, 1, 255), black(1, 1, 1, 0);
  EXPECT_EQ(to_unit_gray(white).at(0, 0), 1.0);
  EXPECT_EQ(to_unit_gray(black).at(0, 0), 0.0);
}

TEST(UnitGray, LumaForRgb) {
  Image8 red(1, 1, 3, 0);
  red.pixels[0] = 255;
  EXPECT_NEAR(to_unit_gray(red).at(0, 0), 0.299, 1e-9);
  Image8 mix(1, 1, 3, 0);
  mix.pixels = {10, 200, 77};
  EXPECT_NEAR(to_unit_gray(mix).at(0, 0), (0.299 * 10 + 0.587 * 200 + 0.114 * 77) / 255.0, 1e-12);
}

TEST(UnitGray, MonotoneAndQuantizationRoundTrip) {
  Image8 ramp(256, 1, 1);
  for (int v = 0; v < 256; ++v) ramp.pixels[v] = static_cast<std::uint8_t>(v);
  const GrayFrame g = to_unit_gray(ramp);
  for (int v = 0; v < 256; ++v) {
    EXPECT_EQ(std::lround(255.0 * g.at(v, 0)), v);
    if (v > 0) EXPECT_LE(g.at(v - 1, 0), g.at(v, 0));
  }
  EXPECT_EQ(to_image8(g), ramp);
}

TEST(UnitGray, RejectsZeroSize) {
  Image8 empty;
  EXPECT_CODE(to_unit_gray(empty), ErrorCode::kValidation);
}

TEST(GrayFrameType, DimensionChecks) {
  EXPECT_CODE(GrayFrame(0, 3), ErrorCode::kValidation);
  EXPECT_CODE(GrayFrame(2, 2, std::vector<double>(3, 0.0)), ErrorCode::kValidation);
  GrayFrame f(3, 2, 0.5);
  EXPECT_EQ(f.data().size(), 6u);
  f.at(2, 1) = 0.25;
  EXPECT_EQ(f.clamped(10, 10), 0.25);
  EXPECT_EQ(f.clamped(-4, -4), 0.5);
}

TEST(FrameIndexType, Timestamps) {
  EXPECT_EQ(FrameIndex(0, 25).timestamp(), 0.0);
  EXPECT_EQ(FrameIndex(25, 25).timestamp(), 1.0);
  EXPECT_EQ(FrameIndex(30, 60).timestamp(), 0.5);
  EXPECT_CODE(FrameIndex(1, 0), ErrorCode::kValidation);
  EXPECT_CODE(FrameIndex(1, -25), ErrorCode::kValidation);
  EXPECT_CODE(FrameIndex(-1, 25), ErrorCode::kValidation);
}

TEST(Units, NamesRoundTrip) {
  for (Unit u : {Unit::kPx, Unit::kCm, Unit::kMm}) EXPECT_EQ(parse_unit(unit_name(u)), u);
  EXPECT_CODE(parse_unit("inch"), ErrorCode::kValidation);
}
