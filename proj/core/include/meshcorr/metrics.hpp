#pragma once

#include <map>
#include <string>
#include <vector>

#include "meshcorr/geodesics.hpp"
#include "meshcorr/model.hpp"
#include "meshcorr/trimesh.hpp"

namespace meshcorr::metrics {

// Per-pair raw metric values; summaries are derived at report time.
struct PairMetrics {
  std::string pair_id;
  std::string organ;
  std::vector<double> geodesic_errors;        // dimensionless
  double chamfer_mm = 0.0;
  std::vector<double> conformal_distortions;  // per source triangle
  std::map<std::string, double> landmark_errors_mm;
  std::vector<double> ground_truth_errors_mm; // synthetic data only
};

struct MetricReport {
  std::vector<PairMetrics> pairs;

  std::vector<double> all(const std::string& metric) const;
  // statistic in {median, mean, iqr}
  static double statistic(std::vector<double> values, const std::string& stat);
};

// |D_Y(map(i), map(j)) - D_X(i, j)| / sqrt(area) for each sampled source
// pair; `normalization_area` is the surface area of the normalising mesh
// (the target by default).
std::vector<double> geodesic_error(const std::vector<uint32_t>& hard_map,
                                   const geodesics::GeodesicTable& d_x,
                                   const geodesics::GeodesicTable& d_y,
                                   const std::vector<std::pair<uint32_t, uint32_t>>& pairs,
                                   double normalization_area);

// Mean distance from each point to its nearest target vertex (one
// direction). Exactly equals the brute-force scan.
double chamfer(const std::vector<meshkit::Vec3>& points, const meshkit::TriMesh& target);

// Per-triangle anisotropic stretch between the source mesh and the final
// interpolation frame: sigma1/sigma2 + sigma2/sigma1 - 2 of the 2x2 linear
// map between isometrically flattened triangles. Zero iff the map is a
// similarity. Degenerate final triangles score the 1e9 sentinel.
// Throws Error(DegenerateSource) when a source triangle has area < 1e-12.
std::vector<double> conformal_distortion(const meshkit::TriMesh& mesh_x,
                                         const std::vector<meshkit::Vec3>& final_frame);

// Snap `landmark_on_a` to its nearest vertex a* of mesh_a, map it through
// hard_map (an A -> B index map), and return the distance in mm to the
// nearest mesh_b vertex of `landmark_on_b`.
double landmark_error(const meshkit::Vec3& landmark_on_a, const meshkit::Vec3& landmark_on_b,
                      const meshkit::TriMesh& mesh_a, const meshkit::TriMesh& mesh_b,
                      const std::vector<uint32_t>& hard_map);

// Nearest-neighbour assignment from each vertex of deformed_a to b; ties go
// to the lowest b index. Exactly equals the brute-force scan.
std::vector<uint32_t> nn_baseline(const meshkit::TriMesh& deformed_a, const meshkit::TriMesh& b);

// Monotone cumulative distribution sampled at n_points evenly spaced
// thresholds over [0, max(values)].
std::vector<std::pair<double, double>> cumulative_curve(const std::vector<double>& values,
                                                        size_t n_points);

}  // namespace meshcorr::metrics
