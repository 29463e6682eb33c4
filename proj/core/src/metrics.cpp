#include "meshcorr/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "meshcorr/errors.hpp"
#include "meshcorr/kdtree.hpp"

namespace meshcorr::metrics {

std::vector<double> MetricReport::all(const std::string& metric) const {
  std::vector<double> out;
  for (const auto& p : pairs) {
    if (metric == "geodesic_error")
      out.insert(out.end(), p.geodesic_errors.begin(), p.geodesic_errors.end());
    else if (metric == "chamfer")
      out.push_back(p.chamfer_mm);
    else if (metric == "conformal_distortion")
      out.insert(out.end(), p.conformal_distortions.begin(), p.conformal_distortions.end());
    else if (metric == "ground_truth_error")
      out.insert(out.end(), p.ground_truth_errors_mm.begin(), p.ground_truth_errors_mm.end());
    else if (metric == "landmark_error")
      for (const auto& [name, v] : p.landmark_errors_mm) out.push_back(v);
  }
  return out;
}

double MetricReport::statistic(std::vector<double> values, const std::string& stat) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "statistic over no values");
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    double pos = q * double(values.size() - 1);
    size_t lo = size_t(pos);
    size_t hi = std::min(lo + 1, values.size() - 1);
    double frac = pos - double(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
  };
  if (stat == "median") return quantile(0.5);
  if (stat == "iqr") return quantile(0.75) - quantile(0.25);
  if (stat == "mean") {
    double total = 0.0;
    for (double v : values) total += v;
    return total / double(values.size());
  }
  throw Error(ErrorCode::BadConfig, "unknown statistic '" + stat + "'");
}

std::vector<double> geodesic_error(const std::vector<uint32_t>& hard_map,
                                   const geodesics::GeodesicTable& d_x,
                                   const geodesics::GeodesicTable& d_y,
                                   const std::vector<std::pair<uint32_t, uint32_t>>& pairs,
                                   double normalization_area) {
  const double denom = std::sqrt(normalization_area);
  std::vector<double> errors;
  errors.reserve(pairs.size());
  for (const auto& [i, j] : pairs)
    errors.push_back(std::abs(d_y(hard_map[i], hard_map[j]) - d_x(i, j)) / denom);
  return errors;
}

double chamfer(const std::vector<meshkit::Vec3>& points, const meshkit::TriMesh& target) {
  if (points.empty()) throw Error(ErrorCode::EmptyInput, "chamfer: no points");
  KdTree tree(target.vertices);
  double total = 0.0;
  for (const auto& p : points) total += tree.nearest(p).distance;
  return total / double(points.size());
}

std::vector<double> conformal_distortion(const meshkit::TriMesh& mesh_x,
                                         const std::vector<meshkit::Vec3>& final_frame) {
  if (final_frame.size() != mesh_x.vertex_count())
    throw Error(ErrorCode::ShapeMismatch, "conformal_distortion: frame size != vertex count");

  // Isometric embedding of triangle (p0, p1, p2) into 2D columns.
  auto embed = [](const meshkit::Vec3& p0, const meshkit::Vec3& p1, const meshkit::Vec3& p2) {
    meshkit::Vec3 e1 = p1 - p0, e2 = p2 - p0;
    double len = e1.norm();
    Eigen::Matrix2d m;
    if (len <= 0) {
      m.setZero();
      return m;
    }
    meshkit::Vec3 u = e1 / len;
    meshkit::Vec3 perp = e2 - u.dot(e2) * u;
    m << len, u.dot(e2), 0.0, perp.norm();
    return m;
  };

  std::vector<double> out;
  out.reserve(mesh_x.face_count());
  for (size_t f = 0; f < mesh_x.face_count(); ++f) {
    if (mesh_x.face_area(f) < 1e-12)
      throw Error(ErrorCode::DegenerateSource,
                  "conformal_distortion: source triangle " + std::to_string(f) + " degenerate");
    const auto& t = mesh_x.faces[f];
    Eigen::Matrix2d src = embed(mesh_x.vertices[t[0]], mesh_x.vertices[t[1]],
                                mesh_x.vertices[t[2]]);
    Eigen::Matrix2d dst = embed(final_frame[t[0]], final_frame[t[1]], final_frame[t[2]]);
    Eigen::Matrix2d map = dst * src.inverse();
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(map);
    double s1 = svd.singularValues()(0), s2 = svd.singularValues()(1);
    if (s2 < 1e-9) {
      out.push_back(1e9);
      continue;
    }
    out.push_back(s1 / s2 + s2 / s1 - 2.0);
  }
  return out;
}

double landmark_error(const meshkit::Vec3& landmark_on_a, const meshkit::Vec3& landmark_on_b,
                      const meshkit::TriMesh& mesh_a, const meshkit::TriMesh& mesh_b,
                      const std::vector<uint32_t>& hard_map) {
  KdTree tree_a(mesh_a.vertices);
  KdTree tree_b(mesh_b.vertices);
  uint32_t snapped_a = tree_a.nearest(landmark_on_a).index;
  uint32_t predicted_b = hard_map[snapped_a];
  uint32_t snapped_b = tree_b.nearest(landmark_on_b).index;
  return (mesh_b.vertices[predicted_b] - mesh_b.vertices[snapped_b]).norm();
}

std::vector<uint32_t> nn_baseline(const meshkit::TriMesh& deformed_a, const meshkit::TriMesh& b) {
  KdTree tree(b.vertices);
  std::vector<uint32_t> map;
  map.reserve(deformed_a.vertex_count());
  for (const auto& v : deformed_a.vertices) map.push_back(tree.nearest(v).index);
  return map;
}

std::vector<std::pair<double, double>> cumulative_curve(const std::vector<double>& values,
                                                        size_t n_points) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "cumulative_curve: no values");
  if (n_points < 2) throw Error(ErrorCode::BadConfig, "cumulative_curve: need >= 2 points");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double hi = sorted.back();
  std::vector<std::pair<double, double>> curve;
  curve.reserve(n_points);
  for (size_t k = 0; k < n_points; ++k) {
    double threshold = hi * double(k) / double(n_points - 1);
    auto it = std::upper_bound(sorted.begin(), sorted.end(), threshold);
    curve.emplace_back(threshold, double(it - sorted.begin()) / double(sorted.size()));
  }
  return curve;
}

}  // namespace meshcorr::metrics
