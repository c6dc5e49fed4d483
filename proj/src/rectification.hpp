#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "core.hpp"

namespace biotrack {

struct Correspondence {
  PixelPoint pixel;
  WorldPoint world;
};

// Planar projective mapping pixel -> world. Stored with unit Frobenius norm
// and its largest-magnitude entry positive, so equal mappings compare equal.
class Homography {
 public:
  static Homography from_matrix(const Eigen::Matrix3d& m, Unit unit = Unit::kPx);
  static Homography from_entries(std::span<const double> row_major, Unit unit = Unit::kPx);
  static Homography identity(Unit unit = Unit::kPx) {
    return from_matrix(Eigen::Matrix3d::Identity(), unit);
  }

  const Eigen::Matrix3d& matrix() const { return m_; }
  std::array<double, 9> entries() const;
  Unit unit() const { return unit_; }

  // (x', y', w') = H (x, y, 1); throws kDegenerate when |w'| < 1e-12.
  std::array<double, 2> map(double x, double y) const;

 private:
  Homography(const Eigen::Matrix3d& m, Unit unit) : m_(m), unit_(unit) {}

  Eigen::Matrix3d m_;
  Unit unit_;
};

WorldPoint apply(const Homography& h, PixelPoint p);
Homography invert(const Homography& h);

double reprojection_rms(const Homography& h, std::span<const Correspondence> points);

struct HomographyFit {
  Homography h;
  double rms;
};

// Direct linear transform with Hartley normalization on both point sets.
HomographyFit estimate_homography(std::span<const Correspondence> points);

struct Calibration {
  Homography h;
  std::vector<Correspondence> correspondences;
};

// {"unit": "cm", "h": [9], "correspondences": [{"px": [x, y], "world": [x, y]}]}
// When "h" is absent it is estimated from the correspondences.
Calibration calibration_from_json(const nlohmann::json& j);
nlohmann::json calibration_to_json(const Calibration& calibration);
Calibration load_calibration(const std::filesystem::path& path);
void save_calibration(const Calibration& calibration, const std::filesystem::path& path);

}  // namespace biotrack
