#include "meshcorr/mesh_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "meshcorr/errors.hpp"

namespace meshcorr::meshkit {

namespace {

[[noreturn]] void io_fail(const std::filesystem::path& path, const std::string& why) {
  throw Error(ErrorCode::IOFailure, path.string() + ": " + why);
}

template <typename T>
void write_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  // Little-endian host assumed; asserted at startup on the targets we build.
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  T value;
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace

void save_off(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) io_fail(path, "cannot open for writing");
  os << "OFF\n" << mesh.vertices.size() << " " << mesh.faces.size() << " 0\n";
  os.precision(9);
  for (const auto& v : mesh.vertices)
    os << float(v.x()) << " " << float(v.y()) << " " << float(v.z()) << "\n";
  for (const auto& f : mesh.faces) os << "3 " << f[0] << " " << f[1] << " " << f[2] << "\n";
  if (!os) io_fail(path, "write failed");
}

TriMesh load_off(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) io_fail(path, "cannot open");
  std::string token;
  is >> token;
  if (token != "OFF") io_fail(path, "missing OFF header");
  size_t nv = 0, nf = 0, ne = 0;
  is >> nv >> nf >> ne;
  if (!is) io_fail(path, "bad OFF counts");
  TriMesh mesh;
  mesh.vertices.resize(nv);
  for (auto& v : mesh.vertices) {
    double x, y, z;
    is >> x >> y >> z;
    v = {x, y, z};
  }
  mesh.faces.resize(nf);
  for (auto& f : mesh.faces) {
    int arity;
    is >> arity;
    if (arity != 3) io_fail(path, "non-triangle face");
    is >> f[0] >> f[1] >> f[2];
  }
  if (!is) io_fail(path, "truncated OFF body");
  return mesh;
}

void save_ply(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) io_fail(path, "cannot open for writing");
  os << "ply\nformat binary_little_endian 1.0\n"
     << "element vertex " << mesh.vertices.size() << "\n"
     << "property float x\nproperty float y\nproperty float z\n"
     << "element face " << mesh.faces.size() << "\n"
     << "property list uchar uint vertex_indices\n"
     << "end_header\n";
  for (const auto& v : mesh.vertices) {
    write_le(os, float(v.x()));
    write_le(os, float(v.y()));
    write_le(os, float(v.z()));
  }
  for (const auto& f : mesh.faces) {
    write_le(os, uint8_t(3));
    write_le(os, uint32_t(f[0]));
    write_le(os, uint32_t(f[1]));
    write_le(os, uint32_t(f[2]));
  }
  if (!os) io_fail(path, "write failed");
}

TriMesh load_ply(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) io_fail(path, "cannot open");
  std::string line;
  std::getline(is, line);
  if (line != "ply") io_fail(path, "missing ply magic");
  size_t nv = 0, nf = 0;
  bool binary_le = false;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "format") {
      std::string fmt;
      ls >> fmt;
      binary_le = (fmt == "binary_little_endian");
    } else if (key == "element") {
      std::string what;
      size_t count;
      ls >> what >> count;
      if (what == "vertex") nv = count;
      if (what == "face") nf = count;
    } else if (key == "end_header") {
      break;
    }
  }
  if (!binary_le) io_fail(path, "expected binary little-endian PLY");
  TriMesh mesh;
  mesh.vertices.resize(nv);
  for (auto& v : mesh.vertices) {
    float x = read_le<float>(is), y = read_le<float>(is), z = read_le<float>(is);
    v = {double(x), double(y), double(z)};
  }
  mesh.faces.resize(nf);
  for (auto& f : mesh.faces) {
    uint8_t arity = read_le<uint8_t>(is);
    if (arity != 3) io_fail(path, "non-triangle face");
    f[0] = read_le<uint32_t>(is);
    f[1] = read_le<uint32_t>(is);
    f[2] = read_le<uint32_t>(is);
  }
  if (!is) io_fail(path, "truncated PLY body");
  return mesh;
}

void save_mesh(const TriMesh& mesh, const std::filesystem::path& path) {
  auto ext = path.extension().string();
  if (ext == ".off")
    save_off(mesh, path);
  else if (ext == ".ply")
    save_ply(mesh, path);
  else
    io_fail(path, "unknown mesh extension (use .off or .ply)");
}

TriMesh load_mesh(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  if (ext == ".off") return load_off(path);
  if (ext == ".ply") return load_ply(path);
  io_fail(path, "unknown mesh extension (use .off or .ply)");
}

}  // namespace meshcorr::meshkit
