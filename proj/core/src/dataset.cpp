#include "meshcorr/dataset.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "meshcorr/errors.hpp"
#include "meshcorr/rng.hpp"

namespace meshcorr::pipeline {

using nlohmann::json;

namespace {

[[noreturn]] void io_fail(const std::filesystem::path& path, const std::string& why) {
  throw Error(ErrorCode::IOFailure, path.string() + ": " + why);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& rel) {
  std::filesystem::path p(rel);
  return p.is_absolute() ? p : base / p;
}

}  // namespace

LandmarkSet load_landmarks(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) io_fail(path, "cannot open");
  LandmarkSet out;
  std::string name;
  double x, y, z;
  while (is >> name >> x >> y >> z) out[name] = meshkit::Vec3(x, y, z);
  return out;
}

void save_landmarks(const LandmarkSet& landmarks, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) io_fail(path, "cannot open for writing");
  os.precision(17);
  for (const auto& [name, p] : landmarks)
    os << name << " " << p.x() << " " << p.y() << " " << p.z() << "\n";
  if (!os) io_fail(path, "write failed");
}

std::vector<uint32_t> load_canonical_map(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) io_fail(path, "cannot open");
  std::vector<uint32_t> out;
  uint32_t v;
  while (is >> v) out.push_back(v);
  return out;
}

void save_canonical_map(const std::vector<uint32_t>& map, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) io_fail(path, "cannot open for writing");
  for (uint32_t v : map) os << v << "\n";
  if (!os) io_fail(path, "write failed");
}

std::vector<uint32_t> compose_ground_truth(const std::vector<uint32_t>& canonical_a,
                                           const std::vector<uint32_t>& canonical_b) {
  uint32_t max_id = 0;
  for (uint32_t c : canonical_b) max_id = std::max(max_id, c);
  std::vector<uint32_t> inverse(max_id + 1, UINT32_MAX);
  for (size_t i = 0; i < canonical_b.size(); ++i) inverse[canonical_b[i]] = uint32_t(i);
  std::vector<uint32_t> out;
  out.reserve(canonical_a.size());
  for (uint32_t c : canonical_a) {
    if (c >= inverse.size() || inverse[c] == UINT32_MAX)
      throw Error(ErrorCode::BadConfig,
                  "ground truth: canonical id " + std::to_string(c) + " missing from target");
    out.push_back(inverse[c]);
  }
  return out;
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) io_fail(path, "cannot open");
  json doc;
  try {
    is >> doc;
  } catch (const json::exception& e) {
    io_fail(path, std::string("bad JSON: ") + e.what());
  }
  auto base = path.parent_path();
  DatasetManifest manifest;
  for (const auto& organ : doc.at("organs")) manifest.organs.push_back(organ.get<std::string>());
  for (const auto& p : doc.at("patients")) {
    PatientEntry entry;
    entry.id = p.at("id").get<std::string>();
    for (const auto& [organ, mesh_path] : p.at("meshes").items())
      entry.organ_meshes[organ] = resolve(base, mesh_path.get<std::string>());
    if (p.contains("volume")) entry.volume = resolve(base, p.at("volume").get<std::string>());
    if (p.contains("landmarks"))
      entry.landmarks = resolve(base, p.at("landmarks").get<std::string>());
    if (p.contains("ground_truth"))
      for (const auto& [organ, gt_path] : p.at("ground_truth").items())
        entry.ground_truth[organ] = resolve(base, gt_path.get<std::string>());
    manifest.patients.push_back(std::move(entry));
  }
  manifest.validate();
  return manifest;
}

void DatasetManifest::save(const std::filesystem::path& path) const {
  json doc;
  doc["organs"] = organs;
  auto base = path.parent_path();
  auto relativize = [&](const std::filesystem::path& p) {
    auto rel = std::filesystem::relative(p, base);
    return rel.empty() ? p.string() : rel.string();
  };
  doc["patients"] = json::array();
  for (const auto& p : patients) {
    json entry;
    entry["id"] = p.id;
    json meshes;
    for (const auto& [organ, mp] : p.organ_meshes) meshes[organ] = relativize(mp);
    entry["meshes"] = meshes;
    if (!p.volume.empty()) entry["volume"] = relativize(p.volume);
    if (!p.landmarks.empty()) entry["landmarks"] = relativize(p.landmarks);
    if (!p.ground_truth.empty()) {
      json gt;
      for (const auto& [organ, gp] : p.ground_truth) gt[organ] = relativize(gp);
      entry["ground_truth"] = gt;
    }
    doc["patients"].push_back(entry);
  }
  std::ofstream os(path);
  if (!os) io_fail(path, "cannot open for writing");
  os << doc.dump(2) << "\n";
  if (!os) io_fail(path, "write failed");
}

void DatasetManifest::validate() const {
  for (const auto& p : patients) {
    for (const auto& organ : organs) {
      auto it = p.organ_meshes.find(organ);
      if (it == p.organ_meshes.end())
        throw Error(ErrorCode::BadConfig,
                    "manifest: patient " + p.id + " missing organ '" + organ + "'");
      if (!std::filesystem::exists(it->second))
        throw Error(ErrorCode::BadConfig, "manifest: missing mesh file " + it->second.string());
    }
    if (p.organ_meshes.size() != organs.size())
      throw Error(ErrorCode::BadConfig,
                  "manifest: patient " + p.id + " organ list differs from the dataset's");
    if (!p.volume.empty() && !std::filesystem::exists(p.volume))
      throw Error(ErrorCode::BadConfig, "manifest: missing volume " + p.volume.string());
    if (!p.landmarks.empty() && !std::filesystem::exists(p.landmarks))
      throw Error(ErrorCode::BadConfig, "manifest: missing landmarks " + p.landmarks.string());
    for (const auto& [organ, gp] : p.ground_truth)
      if (!std::filesystem::exists(gp))
        throw Error(ErrorCode::BadConfig, "manifest: missing ground truth " + gp.string());
  }
}

const PatientEntry& DatasetManifest::patient(const std::string& id) const {
  for (const auto& p : patients)
    if (p.id == id) return p;
  throw Error(ErrorCode::BadConfig, "manifest: no patient '" + id + "'");
}

std::vector<std::string> DatasetManifest::patient_ids() const {
  std::vector<std::string> out;
  for (const auto& p : patients) out.push_back(p.id);
  return out;
}

FoldSpec FoldSpec::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) io_fail(path, "cannot open");
  json doc;
  try {
    is >> doc;
  } catch (const json::exception& e) {
    io_fail(path, std::string("bad JSON: ") + e.what());
  }
  FoldSpec spec;
  for (const auto& f : doc.at("folds")) {
    Fold fold;
    fold.train = f.at("train").get<std::vector<std::string>>();
    fold.val = f.at("val").get<std::vector<std::string>>();
    fold.test = f.at("test").get<std::vector<std::string>>();
    spec.folds.push_back(std::move(fold));
  }
  if (doc.contains("repeated_test_patients"))
    spec.repeated_test_patients = doc.at("repeated_test_patients").get<std::vector<std::string>>();
  return spec;
}

void FoldSpec::save(const std::filesystem::path& path) const {
  json doc;
  doc["folds"] = json::array();
  for (const auto& f : folds)
    doc["folds"].push_back({{"train", f.train}, {"val", f.val}, {"test", f.test}});
  doc["repeated_test_patients"] = repeated_test_patients;
  std::ofstream os(path);
  if (!os) io_fail(path, "cannot open for writing");
  os << doc.dump(2) << "\n";
  if (!os) io_fail(path, "write failed");
}

void FoldSpec::validate(const std::vector<std::string>& all_patients) const {
  std::map<std::string, int> test_count;
  for (const auto& f : folds) {
    std::map<std::string, int> roles;
    for (const auto& id : f.train) ++roles[id];
    for (const auto& id : f.val) ++roles[id];
    for (const auto& id : f.test) {
      ++roles[id];
      ++test_count[id];
    }
    for (const auto& [id, count] : roles)
      if (count > 1)
        throw Error(ErrorCode::BadConfig, "fold spec: patient " + id + " in two roles");
  }
  for (const auto& id : all_patients)
    if (test_count[id] < 1)
      throw Error(ErrorCode::BadConfig, "fold spec: patient " + id + " never tests");
}

FoldSpec make_folds(std::vector<std::string> patient_ids, uint64_t seed) {
  const size_t n = patient_ids.size();
  if (n < 10)
    throw Error(ErrorCode::TooFewPatients,
                "make_folds: need >= 10 patients, have " + std::to_string(n));
  const size_t k_folds = 5;
  Rng rng(seed);
  rng.shuffle(patient_ids);

  FoldSpec spec;
  std::map<std::string, int> test_seen;

  // 34 patients reproduce the paper's 24/3/7 counts, cycling so the test
  // role wraps (35 slots over 34 patients).
  const bool paper_layout = (n == 34);
  size_t test_size = paper_layout ? 7 : 0;
  std::vector<size_t> test_sizes(k_folds, test_size);
  if (!paper_layout) {
    size_t base = n / k_folds, extra = n % k_folds;
    for (size_t f = 0; f < k_folds; ++f) test_sizes[f] = base + (f < extra ? 1 : 0);
  }
  size_t val_size = std::max<size_t>(1, size_t(std::llround(double(n) * 3.0 / 34.0)));

  size_t cursor = 0;
  for (size_t f = 0; f < k_folds; ++f) {
    Fold fold;
    std::vector<bool> used(n, false);
    for (size_t i = 0; i < test_sizes[f]; ++i) {
      size_t idx = (cursor + i) % n;
      fold.test.push_back(patient_ids[idx]);
      used[idx] = true;
      ++test_seen[patient_ids[idx]];
    }
    cursor += test_sizes[f];
    size_t assigned_val = 0;
    for (size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      if (assigned_val < val_size) {
        fold.val.push_back(patient_ids[i]);
        ++assigned_val;
      } else {
        fold.train.push_back(patient_ids[i]);
      }
    }
    spec.folds.push_back(std::move(fold));
  }
  for (const auto& [id, count] : test_seen)
    if (count > 1) spec.repeated_test_patients.push_back(id);
  return spec;
}

std::vector<ScheduledPair> pair_scheduler(const std::vector<std::string>& patients,
                                          const std::vector<std::string>& organs,
                                          PairPhase phase, uint64_t seed) {
  std::vector<ScheduledPair> pairs;
  for (const auto& organ : organs)
    for (const auto& a : patients)
      for (const auto& b : patients) {
        if (phase == PairPhase::Eval && a == b) continue;
        pairs.push_back({a, b, organ});
      }
  if (phase == PairPhase::Train) {
    Rng rng(seed);
    rng.shuffle(pairs);
  }
  return pairs;
}

}  // namespace meshcorr::pipeline
