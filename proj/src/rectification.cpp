#include "rectification.hpp"

#include <cmath>
#include <fstream>

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace biotrack {
namespace {

constexpr double kMinDeterminant = 1e-12;
constexpr double kMinW = 1e-12;
// Ratio of the second-smallest to the largest singular value of the DLT
// system below which the null space is considered more than one-dimensional.
constexpr double kRankTolerance = 1e-10;

Eigen::Matrix3d normalizing_transform(const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double mean_radius = 0.0;
  for (const auto& p : pts) mean_radius += (p - centroid).norm();
  mean_radius /= static_cast<double>(pts.size());
  if (!(mean_radius > 0.0)) {
    throw Error(ErrorCode::kDegenerate, "degenerate configuration: all points coincide");
  }
  const double s = std::sqrt(2.0) / mean_radius;
  Eigen::Matrix3d t;
  t << s, 0, -s * centroid.x(),
       0, s, -s * centroid.y(),
       0, 0, 1;
  return t;
}

}  // namespace

Homography Homography::from_matrix(const Eigen::Matrix3d& m, Unit unit) {
  if (!m.allFinite()) throw Error(ErrorCode::kDegenerate, "homography has non-finite entries");
  const double norm = m.norm();
  if (!(norm > 0.0)) throw Error(ErrorCode::kDegenerate, "homography is zero");
  Eigen::Matrix3d n = m / norm;
  Eigen::Index r = 0, c = 0;
  for (Eigen::Index i = 0; i < 9; ++i) {
    const Eigen::Index ri = i / 3, ci = i % 3;
    if (std::abs(n(ri, ci)) > std::abs(n(r, c))) r = ri, c = ci;
  }
  if (n(r, c) < 0) n = -n;
  if (std::abs(n.determinant()) <= kMinDeterminant) {
    throw Error(ErrorCode::kDegenerate, "homography is singular");
  }
  return Homography(n, unit);
}

Homography Homography::from_entries(std::span<const double> row_major, Unit unit) {
  if (row_major.size() != 9) throw Error(ErrorCode::kValidation, "homography needs 9 entries");
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = row_major[i];
  return from_matrix(m, unit);
}

std::array<double, 9> Homography::entries() const {
  std::array<double, 9> out{};
  for (int i = 0; i < 9; ++i) out[i] = m_(i / 3, i % 3);
  return out;
}

std::array<double, 2> Homography::map(double x, double y) const {
  const Eigen::Vector3d q = m_ * Eigen::Vector3d(x, y, 1.0);
  if (std::abs(q.z()) < kMinW) {
    throw Error(ErrorCode::kDegenerate, "point maps to infinity");
  }
  return {q.x() / q.z(), q.y() / q.z()};
}

WorldPoint apply(const Homography& h, PixelPoint p) {
  const auto [x, y] = h.map(p.x, p.y);
  return {x, y, h.unit()};
}

Homography invert(const Homography& h) {
  // from_matrix already guarantees |det| > 1e-12 on the normalized matrix.
  return Homography::from_matrix(h.matrix().inverse(), h.unit());
}

double reprojection_rms(const Homography& h, std::span<const Correspondence> points) {
  if (points.empty()) throw Error(ErrorCode::kValidation, "reprojection error needs at least one point");
  double sum = 0.0;
  for (const auto& c : points) {
    const auto [x, y] = h.map(c.pixel.x, c.pixel.y);
    const double dx = x - c.world.x, dy = y - c.world.y;
    sum += dx * dx + dy * dy;
  }
  return std::sqrt(sum / static_cast<double>(points.size()));
}

HomographyFit estimate_homography(std::span<const Correspondence> points) {
  if (points.size() < 4) {
    throw Error(ErrorCode::kValidation, "homography needs at least 4 correspondences, got " +
                                            std::to_string(points.size()));
  }
  const Unit unit = points.front().world.unit;
  for (const auto& c : points) {
    if (c.world.unit != unit) throw Error(ErrorCode::kValidation, "mixed world units in calibration set");
  }

  const size_t n = points.size();
  std::vector<Eigen::Vector2d> src(n), dst(n);
  for (size_t i = 0; i < n; ++i) {
    src[i] = {points[i].pixel.x, points[i].pixel.y};
    dst[i] = {points[i].world.x, points[i].world.y};
  }
  const Eigen::Matrix3d t_src = normalizing_transform(src);
  const Eigen::Matrix3d t_dst = normalizing_transform(dst);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * n), 9);
  for (size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d s = t_src * src[i].homogeneous();
    const Eigen::Vector3d d = t_dst * dst[i].homogeneous();
    const auto r = static_cast<Eigen::Index>(2 * i);
    // [ s^T 0 -u s^T ; 0 s^T -v s^T ] h = 0
    a.block<1, 3>(r, 0) = s.transpose();
    a.block<1, 3>(r, 6) = -d.x() * s.transpose();
    a.block<1, 3>(r + 1, 3) = s.transpose();
    a.block<1, 3>(r + 1, 6) = -d.y() * s.transpose();
  }

  // Pad to a square system so V is always 9x9 and eight singular values are
  // available for the rank test even with exactly four points.
  if (a.rows() < 9) a.conservativeResizeLike(Eigen::MatrixXd::Zero(9, 9));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  if (!(sigma(0) > 0.0) || sigma(7) / sigma(0) < kRankTolerance) {
    throw Error(ErrorCode::kDegenerate,
                "degenerate configuration: correspondences do not determine a unique homography "
                "(collinear or repeated points)");
  }
  const Eigen::VectorXd null = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << null(0), null(1), null(2),
        null(3), null(4), null(5),
        null(6), null(7), null(8);

  const Homography h = Homography::from_matrix(t_dst.inverse() * hn * t_src, unit);
  return {h, reprojection_rms(h, points)};
}

Calibration calibration_from_json(const nlohmann::json& j) {
  try {
    const Unit unit = parse_unit(j.value("unit", std::string("px")));
    std::vector<Correspondence> corr;
    if (j.contains("correspondences")) {
      for (const auto& c : j.at("correspondences")) {
        const auto& px = c.at("px");
        const auto& world = c.at("world");
        corr.push_back({{px.at(0).get<double>(), px.at(1).get<double>()},
                        {world.at(0).get<double>(), world.at(1).get<double>(), unit}});
      }
    }
    if (j.contains("h") && !j.at("h").is_null()) {
      const auto entries = j.at("h").get<std::vector<double>>();
      return {Homography::from_entries(entries, unit), std::move(corr)};
    }
    if (corr.empty()) throw Error(ErrorCode::kValidation, "calibration needs \"h\" or correspondences");
    HomographyFit fit = estimate_homography(corr);
    return {fit.h, std::move(corr)};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed calibration: ") + e.what());
  }
}

nlohmann::json calibration_to_json(const Calibration& calibration) {
  nlohmann::json j;
  j["unit"] = std::string(unit_name(calibration.h.unit()));
  j["h"] = calibration.h.entries();
  j["correspondences"] = nlohmann::json::array();
  for (const auto& c : calibration.correspondences) {
    j["correspondences"].push_back({{"px", {c.pixel.x, c.pixel.y}}, {"world", {c.world.x, c.world.y}}});
  }
  return j;
}

Calibration load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open calibration " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return calibration_from_json(j);
}

void save_calibration(const Calibration& calibration, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write calibration " + path.string());
  out << calibration_to_json(calibration).dump(2) << '\n';
}

}  // namespace biotrack
