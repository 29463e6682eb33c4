#include "meshcorr/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "meshcorr/errors.hpp"

namespace meshcorr::autodiff {

namespace {

constexpr char kMagic[8] = {'M', 'C', 'P', 'A', 'R', 'M', '0', '1'};

template <typename T>
void write_le(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

void write_buffer(std::ostream& os, const Tensor& t) {
  os.write(reinterpret_cast<const char*>(t.data()), std::streamsize(t.size() * sizeof(double)));
}

void read_buffer(std::istream& is, Tensor& t) {
  is.read(reinterpret_cast<char*>(t.mutable_data()), std::streamsize(t.size() * sizeof(double)));
}

}  // namespace

Tensor& NamedTensors::at(const std::string& name) {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return tensors[i];
  throw Error(ErrorCode::BadConfig, "no tensor named '" + name + "'");
}

const Tensor& NamedTensors::at(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return tensors[i];
  throw Error(ErrorCode::BadConfig, "no tensor named '" + name + "'");
}

bool NamedTensors::contains(const std::string& name) const {
  for (const auto& n : names)
    if (n == name) return true;
  return false;
}

void NamedTensors::add(const std::string& name, Tensor tensor) {
  if (contains(name)) throw Error(ErrorCode::BadConfig, "duplicate tensor name '" + name + "'");
  names.push_back(name);
  tensors.push_back(std::move(tensor));
}

size_t NamedTensors::total_scalars() const {
  size_t total = 0;
  for (const auto& t : tensors) total += t.size();
  return total;
}

void save_checkpoint(const NamedTensors& params, const std::filesystem::path& path,
                     const AdamState* adam) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IOFailure, path.string() + ": cannot open for writing");
  os.write(kMagic, sizeof(kMagic));
  write_le<uint32_t>(os, uint32_t(params.names.size()));
  for (size_t i = 0; i < params.names.size(); ++i) {
    const std::string& name = params.names[i];
    write_le<uint32_t>(os, uint32_t(name.size()));
    os.write(name.data(), std::streamsize(name.size()));
    const auto& shape = params.tensors[i].shape();
    write_le<uint32_t>(os, uint32_t(shape.size()));
    for (size_t d : shape) write_le<uint64_t>(os, uint64_t(d));
  }
  for (const auto& t : params.tensors) write_buffer(os, t);

  write_le<uint8_t>(os, adam ? 1 : 0);
  if (adam) {
    write_le<uint64_t>(os, adam->t);
    write_le<double>(os, adam->beta1);
    write_le<double>(os, adam->beta2);
    write_le<double>(os, adam->eps);
    write_le<double>(os, adam->lr);
    for (const auto& t : adam->m) write_buffer(os, t);
    for (const auto& t : adam->v) write_buffer(os, t);
  }
  if (!os) throw Error(ErrorCode::IOFailure, path.string() + ": write failed");
}

NamedTensors load_checkpoint(const std::filesystem::path& path, AdamState* adam) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IOFailure, path.string() + ": cannot open");
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error(ErrorCode::IOFailure, path.string() + ": bad checkpoint magic");

  NamedTensors params;
  uint32_t count = read_le<uint32_t>(is);
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t name_len = read_le<uint32_t>(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    uint32_t ndim = read_le<uint32_t>(is);
    std::vector<size_t> shape(ndim);
    for (auto& d : shape) d = size_t(read_le<uint64_t>(is));
    params.add(name, Tensor::zeros(shape));
  }
  for (auto& t : params.tensors) read_buffer(is, t);

  uint8_t has_adam = read_le<uint8_t>(is);
  if (adam) {
    if (has_adam) {
      adam->t = read_le<uint64_t>(is);
      adam->beta1 = read_le<double>(is);
      adam->beta2 = read_le<double>(is);
      adam->eps = read_le<double>(is);
      adam->lr = read_le<double>(is);
      adam->m.clear();
      adam->v.clear();
      for (const auto& t : params.tensors) adam->m.push_back(Tensor::zeros(t.shape()));
      for (const auto& t : params.tensors) adam->v.push_back(Tensor::zeros(t.shape()));
      for (auto& t : adam->m) read_buffer(is, t);
      for (auto& t : adam->v) read_buffer(is, t);
    } else {
      *adam = AdamState{};
    }
  }
  if (!is) throw Error(ErrorCode::IOFailure, path.string() + ": truncated checkpoint");
  return params;
}

}  // namespace meshcorr::autodiff
