#include "meshcorr/geodesics.hpp"

#include <cstring>
#include <fstream>
#include <limits>
#include <queue>
#include <thread>

#include "meshcorr/errors.hpp"
#include "meshcorr/rng.hpp"

namespace meshcorr::geodesics {

namespace {

constexpr char kMagic[8] = {'M', 'C', 'G', 'E', 'O', 'D', '0', '1'};

struct Adjacency {
  std::vector<size_t> offsets;
  std::vector<uint32_t> targets;
  std::vector<double> weights;
};

Adjacency build_adjacency(const meshkit::TriMesh& mesh) {
  auto edges = mesh.edges();
  std::vector<size_t> degree(mesh.vertex_count(), 0);
  for (const auto& e : edges) {
    ++degree[e[0]];
    ++degree[e[1]];
  }
  Adjacency adj;
  adj.offsets.assign(mesh.vertex_count() + 1, 0);
  for (size_t v = 0; v < mesh.vertex_count(); ++v) adj.offsets[v + 1] = adj.offsets[v] + degree[v];
  adj.targets.resize(adj.offsets.back());
  adj.weights.resize(adj.offsets.back());
  std::vector<size_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
  for (const auto& e : edges) {
    double w = (mesh.vertices[e[0]] - mesh.vertices[e[1]]).norm();
    adj.targets[cursor[e[0]]] = e[1];
    adj.weights[cursor[e[0]]++] = w;
    adj.targets[cursor[e[1]]] = e[0];
    adj.weights[cursor[e[1]]++] = w;
  }
  return adj;
}

void dijkstra(const Adjacency& adj, uint32_t source, double* dist, size_t n) {
  std::fill(dist, dist + n, std::numeric_limits<double>::infinity());
  dist[source] = 0.0;
  using Item = std::pair<double, uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
  queue.push({0.0, source});
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    for (size_t k = adj.offsets[u]; k < adj.offsets[u + 1]; ++k) {
      double nd = d + adj.weights[k];
      uint32_t v = adj.targets[k];
      if (nd < dist[v]) {
        dist[v] = nd;
        queue.push({nd, v});
      }
    }
  }
}

}  // namespace

GeodesicTable geodesic_all_pairs(const meshkit::TriMesh& mesh) {
  GeodesicTable table;
  table.n = mesh.vertex_count();
  table.d.resize(table.n * table.n);
  Adjacency adj = build_adjacency(mesh);

  size_t hw = std::max<size_t>(1, std::thread::hardware_concurrency());
  size_t workers = std::min(hw, table.n > 0 ? table.n : size_t(1));
  std::vector<std::thread> threads;
  for (size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w]() {
      for (size_t src = w; src < table.n; src += workers)
        dijkstra(adj, uint32_t(src), table.d.data() + src * table.n, table.n);
    });
  }
  for (auto& t : threads) t.join();
  return table;
}

std::vector<std::pair<uint32_t, uint32_t>> sample_pairs(size_t n, size_t k, uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "sample_pairs: need n >= 2");
  if (k < 1) throw Error(ErrorCode::TooFewSamples, "sample_pairs: need k >= 1");
  Rng rng(seed);
  std::vector<std::pair<uint32_t, uint32_t>> pairs;
  pairs.reserve(k);
  while (pairs.size() < k) {
    uint32_t i = uint32_t(rng.bounded(n));
    uint32_t j = uint32_t(rng.bounded(n));
    if (i == j) continue;
    pairs.emplace_back(i, j);
  }
  return pairs;
}

void save_table(const GeodesicTable& table, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IOFailure, path.string() + ": cannot open for writing");
  os.write(kMagic, sizeof(kMagic));
  uint64_t n = table.n;
  os.write(reinterpret_cast<const char*>(&n), sizeof(n));
  std::vector<float> row(table.n);
  for (size_t i = 0; i < table.n; ++i) {
    for (size_t j = 0; j < table.n; ++j) row[j] = float(table(i, j));
    os.write(reinterpret_cast<const char*>(row.data()), std::streamsize(row.size() * 4));
  }
  if (!os) throw Error(ErrorCode::IOFailure, path.string() + ": write failed");
}

GeodesicTable load_table(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IOFailure, path.string() + ": cannot open");
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error(ErrorCode::IOFailure, path.string() + ": bad geodesic cache magic");
  uint64_t n = 0;
  is.read(reinterpret_cast<char*>(&n), sizeof(n));
  GeodesicTable table;
  table.n = size_t(n);
  table.d.resize(table.n * table.n);
  std::vector<float> row(table.n);
  for (size_t i = 0; i < table.n; ++i) {
    is.read(reinterpret_cast<char*>(row.data()), std::streamsize(row.size() * 4));
    for (size_t j = 0; j < table.n; ++j) table(i, j) = double(row[j]);
  }
  if (!is) throw Error(ErrorCode::IOFailure, path.string() + ": truncated geodesic cache");
  return table;
}

}  // namespace meshcorr::geodesics
