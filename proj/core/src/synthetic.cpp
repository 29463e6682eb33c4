#include "meshcorr/synthetic.hpp"

#include <cmath>

#include "meshcorr/decimate.hpp"
#include "meshcorr/errors.hpp"
#include "meshcorr/kdtree.hpp"
#include "meshcorr/mesh_io.hpp"
#include "meshcorr/rng.hpp"
#include "meshcorr/volume.hpp"

namespace meshcorr::pipeline {

namespace {

using meshkit::Face;
using meshkit::TriMesh;
using meshkit::Vec3;

// Unit-sphere template triangulation shared by every generated shape.
TriMesh make_template(size_t target_vertices) {
  TriMesh sphere = meshkit::icosphere(3);
  size_t target_faces = 2 * (std::max<size_t>(target_vertices, 12) - 2);
  TriMesh reduced = meshkit::quadric_decimate(sphere, target_faces).mesh;
  TriMesh projected = reduced;
  for (auto& v : projected.vertices) v.normalize();
  if (meshkit::validate_mesh(projected).ok) return projected;
  return reduced;
}

struct OrganShape {
  Vec3 radii;
  std::vector<Vec3> bump_centers;  // unit directions
  std::vector<double> bump_widths;
};

OrganShape make_organ_shape(Rng& rng) {
  OrganShape shape;
  shape.radii = {rng.uniform(16.0, 22.0), rng.uniform(13.0, 18.0), rng.uniform(10.0, 15.0)};
  size_t bumps = 3;
  for (size_t k = 0; k < bumps; ++k) {
    Vec3 dir(rng.normal(), rng.normal(), rng.normal());
    shape.bump_centers.push_back(dir.normalized());
    shape.bump_widths.push_back(rng.uniform(0.35, 0.6));
  }
  return shape;
}

struct PatientWarp {
  std::vector<double> bump_amps;
  Vec3 wave_dir;
  double wave_amp = 0.0;
  double wave_freq = 0.0;
  double wave_phase = 0.0;
  double twist = 0.0;
  Vec3 scale = Vec3::Ones();
  Vec3 shift = Vec3::Zero();
};

PatientWarp make_patient_warp(Rng& rng, size_t bumps, double amplitude_scale) {
  PatientWarp warp;
  for (size_t k = 0; k < bumps; ++k)
    warp.bump_amps.push_back(rng.uniform(1.0, 3.0) * amplitude_scale);
  Vec3 dir(rng.normal(), rng.normal(), rng.normal());
  warp.wave_dir = dir.normalized();
  warp.wave_amp = rng.uniform(0.5, 1.5) * amplitude_scale;
  warp.wave_freq = rng.uniform(0.08, 0.16);
  warp.wave_phase = rng.uniform(0.0, 2.0 * M_PI);
  warp.twist = rng.uniform(-0.12, 0.12) * amplitude_scale;
  warp.scale = {rng.uniform(0.92, 1.1), rng.uniform(0.92, 1.1), rng.uniform(0.92, 1.1)};
  warp.shift = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
  return warp;
}

Vec3 deform_vertex(const Vec3& unit, const OrganShape& organ, const PatientWarp& warp,
                   double max_radius) {
  Vec3 p = unit.cwiseProduct(organ.radii).cwiseProduct(warp.scale);
  for (size_t k = 0; k < organ.bump_centers.size(); ++k) {
    double d2 = (unit - organ.bump_centers[k]).squaredNorm();
    double w = organ.bump_widths[k];
    p += warp.bump_amps[k] * std::exp(-d2 / (w * w)) * unit;
  }
  p += warp.wave_amp * std::sin(warp.wave_freq * warp.wave_dir.dot(p) * 2.0 * M_PI +
                                warp.wave_phase) *
       Vec3(warp.wave_dir.y(), warp.wave_dir.z(), warp.wave_dir.x());
  double theta = warp.twist * p.z() / max_radius;
  double c = std::cos(theta), s = std::sin(theta);
  p = Vec3(c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z());
  return p + warp.shift;
}

// Canonical surface pattern in HU, a fixed function of the template position.
double canonical_pattern(const Vec3& unit) {
  return 35.0 * std::sin(3.1 * unit.x() + 0.4) * std::cos(2.3 * unit.y() - 0.2) +
         25.0 * std::sin(2.7 * unit.z() + 1.1);
}

// Area-weighted vertex normals for the inside/outside test.
std::vector<Vec3> vertex_normals(const TriMesh& mesh) {
  std::vector<Vec3> normals(mesh.vertex_count(), Vec3::Zero());
  for (const auto& f : mesh.faces) {
    Vec3 n = (mesh.vertices[f[1]] - mesh.vertices[f[0]])
                 .cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]);
    for (uint32_t idx : f) normals[idx] += n;
  }
  for (auto& n : normals) {
    double len = n.norm();
    if (len > 0) n /= len;
  }
  return normals;
}

volumes::Volume make_volume(const std::vector<const TriMesh*>& organ_meshes,
                            const std::vector<const std::vector<uint32_t>*>& canonical_maps,
                            const TriMesh& tmpl, Rng& rng) {
  Vec3 lo = organ_meshes.front()->vertices.front(), hi = lo;
  for (const auto* mesh : organ_meshes)
    for (const auto& v : mesh->vertices) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
  const double margin = 12.0;
  lo -= Vec3::Constant(margin);
  hi += Vec3::Constant(margin);

  volumes::Volume vol;
  vol.spacing = {2.5, 1.0, 1.0};
  vol.origin = {lo.z(), lo.y(), lo.x()};
  vol.dims = {size_t((hi.z() - lo.z()) / vol.spacing[0]) + 1,
              size_t((hi.y() - lo.y()) / vol.spacing[1]) + 1,
              size_t((hi.x() - lo.x()) / vol.spacing[2]) + 1};
  vol.voxels.resize(vol.voxel_count());

  std::vector<metrics::KdTree> trees;
  std::vector<std::vector<Vec3>> normals;
  trees.reserve(organ_meshes.size());
  for (const auto* mesh : organ_meshes) {
    trees.emplace_back(mesh->vertices);
    normals.push_back(vertex_normals(*mesh));
  }

  for (size_t iz = 0; iz < vol.nz(); ++iz)
    for (size_t iy = 0; iy < vol.ny(); ++iy)
      for (size_t ix = 0; ix < vol.nx(); ++ix) {
        Vec3 p = vol.position(iz, iy, ix);
        double hu = -70.0;
        for (size_t o = 0; o < trees.size(); ++o) {
          auto hit = trees[o].nearest(p);
          const TriMesh& mesh = *organ_meshes[o];
          bool inside = normals[o][hit.index].dot(p - mesh.vertices[hit.index]) < 0;
          if (inside) {
            uint32_t canonical = (*canonical_maps[o])[hit.index];
            hu = 70.0 + canonical_pattern(tmpl.vertices[canonical]);
            break;
          }
        }
        hu += rng.normal() * 5.0;
        vol.at(iz, iy, ix) = int16_t(std::lround(std::clamp(hu, -1000.0, 1000.0)));
      }
  return vol;
}

TriMesh permute_vertices(const TriMesh& mesh, const std::vector<uint32_t>& new_index_of) {
  TriMesh out;
  out.vertices.resize(mesh.vertex_count());
  for (size_t i = 0; i < mesh.vertex_count(); ++i)
    out.vertices[new_index_of[i]] = mesh.vertices[i];
  out.faces.reserve(mesh.faces.size());
  for (const auto& f : mesh.faces)
    out.faces.push_back({new_index_of[f[0]], new_index_of[f[1]], new_index_of[f[2]]});
  return out;
}

}  // namespace

DatasetManifest synth_generate(const SynthParams& params) {
  if (params.n_shapes < 4)
    throw Error(ErrorCode::BadConfig, "synth_generate: need n_shapes >= 4");
  std::filesystem::create_directories(params.out_dir);

  Rng rng(params.seed);
  TriMesh tmpl = make_template(params.target_vertices);
  const size_t n = tmpl.vertex_count();
  double max_radius = 22.0;

  std::vector<OrganShape> organs;
  std::vector<std::string> organ_names;
  for (size_t o = 0; o < params.n_organs; ++o) {
    organs.push_back(make_organ_shape(rng));
    organ_names.push_back("organ_" + std::string(1, char('a' + o)));
  }

  // Landmarks sit at fixed canonical vertices, spread over the index range.
  std::vector<uint32_t> landmark_ids;
  for (size_t k = 1; k <= 4; ++k) landmark_ids.push_back(uint32_t(k * n / 5));

  DatasetManifest manifest;
  manifest.organs = organ_names;

  for (size_t p = 0; p < params.n_shapes; ++p) {
    PatientEntry entry;
    char pid[16];
    std::snprintf(pid, sizeof(pid), "p%02zu", p);
    entry.id = pid;

    std::vector<TriMesh> patient_meshes;
    std::vector<std::vector<uint32_t>> patient_canonical;
    LandmarkSet landmarks;

    for (size_t o = 0; o < params.n_organs; ++o) {
      TriMesh mesh;
      double amplitude = 1.0;
      for (int attempt = 0; attempt < 6; ++attempt) {
        PatientWarp warp = make_patient_warp(rng, organs[o].bump_centers.size(), amplitude);
        mesh = tmpl;
        for (size_t i = 0; i < n; ++i)
          mesh.vertices[i] = deform_vertex(tmpl.vertices[i], organs[o], warp, max_radius);
        if (meshkit::validate_mesh(mesh).ok) break;
        amplitude *= 0.5;
        mesh.vertices.clear();
      }
      if (mesh.vertices.empty())
        throw Error(ErrorCode::BadConfig, "synth_generate: could not produce a valid mesh");

      // Permutation: new_index_of[canonical] = stored index.
      std::vector<uint32_t> new_index_of(n);
      for (size_t i = 0; i < n; ++i) new_index_of[i] = uint32_t(i);
      rng.shuffle(new_index_of);
      TriMesh stored = permute_vertices(mesh, new_index_of);
      std::vector<uint32_t> canonical(n);
      for (size_t i = 0; i < n; ++i) canonical[new_index_of[i]] = uint32_t(i);

      for (size_t k = 0; k < landmark_ids.size(); ++k) {
        std::string name = organ_names[o] + "_lm" + std::to_string(k);
        landmarks[name] = stored.vertices[new_index_of[landmark_ids[k]]];
      }

      auto mesh_path = params.out_dir / (entry.id + "_" + organ_names[o] + ".off");
      auto gt_path = params.out_dir / (entry.id + "_" + organ_names[o] + "_gt.txt");
      meshkit::save_off(stored, mesh_path);
      save_canonical_map(canonical, gt_path);
      entry.organ_meshes[organ_names[o]] = mesh_path;
      entry.ground_truth[organ_names[o]] = gt_path;
      patient_meshes.push_back(std::move(stored));
      patient_canonical.push_back(std::move(canonical));
    }

    std::vector<const TriMesh*> mesh_ptrs;
    std::vector<const std::vector<uint32_t>*> canonical_ptrs;
    for (size_t o = 0; o < params.n_organs; ++o) {
      mesh_ptrs.push_back(&patient_meshes[o]);
      canonical_ptrs.push_back(&patient_canonical[o]);
    }
    volumes::Volume vol = make_volume(mesh_ptrs, canonical_ptrs, tmpl, rng);
    auto vol_path = params.out_dir / (entry.id + ".vol");
    volumes::save_volume(vol, vol_path);
    entry.volume = vol_path;

    auto lm_path = params.out_dir / (entry.id + "_landmarks.txt");
    save_landmarks(landmarks, lm_path);
    entry.landmarks = lm_path;

    manifest.patients.push_back(std::move(entry));
  }

  manifest.save(params.out_dir / "manifest.json");
  return manifest;
}

}  // namespace meshcorr::pipeline
