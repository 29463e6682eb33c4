#include "meshcorr/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "meshcorr/errors.hpp"

namespace meshcorr::autodiff {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap cmap(const Tensor& t) {
  return ConstMap(t.data(), Eigen::Index(t.rows()), Eigen::Index(t.cols()));
}

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  auto fmt = [](const Tensor& t) {
    std::string s = "(";
    for (size_t i = 0; i < t.shape().size(); ++i)
      s += (i ? "," : "") + std::to_string(t.shape()[i]);
    return s + ")";
  };
  throw Error(ErrorCode::ShapeMismatch, std::string(op) + ": incompatible shapes " + fmt(a) +
                                            " and " + fmt(b));
}

void require_2d(const char* op, const Tensor& t) {
  if (t.rank() != 2)
    throw Error(ErrorCode::ShapeMismatch, std::string(op) + ": expected a rank-2 tensor");
}

}  // namespace

int Tape::attach(const Tensor& t) {
  if (t.node >= 0) return t.node;
  Tensor copy = t;
  copy.node = int(nodes_.size());
  nodes_.push_back({{}, false, nullptr});
  values_.push_back(copy);
  return copy.node;
}

Tensor Tape::record(Tensor value, std::vector<int> inputs,
                    std::function<void(Tape&, int)> backward) {
  bool needs = false;
  for (int i : inputs) needs = needs || nodes_[size_t(i)].needs_grad;
  value.node = int(nodes_.size());
  nodes_.push_back({std::move(inputs), needs, needs ? std::move(backward) : nullptr});
  values_.push_back(value);
  return value;
}

Tensor Tape::parameter(Tensor value) {
  value.node = int(nodes_.size());
  nodes_.push_back({{}, true, nullptr});
  values_.push_back(value);
  return value;
}

Tensor Tape::constant(Tensor value) {
  value.node = int(nodes_.size());
  nodes_.push_back({{}, false, nullptr});
  values_.push_back(value);
  return value;
}

double* Tape::bar(int node) {
  if (bars_.size() < nodes_.size()) bars_.resize(nodes_.size());
  Tensor& b = bars_[size_t(node)];
  if (b.size() == 0) b = Tensor::zeros(values_[size_t(node)].shape());
  return b.mutable_data();
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  require_2d("matmul", a);
  require_2d("matmul", b);
  if (a.cols() != b.rows()) shape_fail("matmul", a, b);
  int ia = attach(a), ib = attach(b);
  Tensor out({a.rows(), b.cols()});
  MutMap(out.mutable_data(), Eigen::Index(a.rows()), Eigen::Index(b.cols())).noalias() =
      cmap(a) * cmap(b);
  return record(std::move(out), {ia, ib}, [](Tape& t, int self) {
    const auto& node = t.nodes_[size_t(self)];
    int ia = node.inputs[0], ib = node.inputs[1];
    const Tensor& a = t.values_[size_t(ia)];
    const Tensor& b = t.values_[size_t(ib)];
    const Tensor& g = t.bars_[size_t(self)];
    if (t.nodes_[size_t(ia)].needs_grad)
      MutMap(t.bar(ia), Eigen::Index(a.rows()), Eigen::Index(a.cols())).noalias() +=
          cmap(g) * cmap(b).transpose();
    if (t.nodes_[size_t(ib)].needs_grad)
      MutMap(t.bar(ib), Eigen::Index(b.rows()), Eigen::Index(b.cols())).noalias() +=
          cmap(a).transpose() * cmap(g);
  });
}

Tensor Tape::matmul_nt(const Tensor& a, const Tensor& b) {
  require_2d("matmul_nt", a);
  require_2d("matmul_nt", b);
  if (a.cols() != b.cols()) shape_fail("matmul_nt", a, b);
  int ia = attach(a), ib = attach(b);
  Tensor out({a.rows(), b.rows()});
  MutMap(out.mutable_data(), Eigen::Index(a.rows()), Eigen::Index(b.rows())).noalias() =
      cmap(a) * cmap(b).transpose();
  return record(std::move(out), {ia, ib}, [](Tape& t, int self) {
    const auto& node = t.nodes_[size_t(self)];
    int ia = node.inputs[0], ib = node.inputs[1];
    const Tensor& a = t.values_[size_t(ia)];
    const Tensor& b = t.values_[size_t(ib)];
    const Tensor& g = t.bars_[size_t(self)];
    if (t.nodes_[size_t(ia)].needs_grad)
      MutMap(t.bar(ia), Eigen::Index(a.rows()), Eigen::Index(a.cols())).noalias() +=
          cmap(g) * cmap(b);
    if (t.nodes_[size_t(ib)].needs_grad)
      MutMap(t.bar(ib), Eigen::Index(b.rows()), Eigen::Index(b.cols())).noalias() +=
          cmap(g).transpose() * cmap(a);
  });
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) shape_fail("add", a, b);
  int ia = attach(a), ib = attach(b);
  Tensor out(a.shape());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.mutable_data();
  for (size_t i = 0; i < a.size(); ++i) po[i] = pa[i] + pb[i];
  return record(std::move(out), {ia, ib}, [](Tape& t, int self) {
    const auto& node = t.nodes_[size_t(self)];
    const Tensor& g = t.bars_[size_t(self)];
    for (int input : node.inputs) {
      if (!t.nodes_[size_t(input)].needs_grad) continue;
      double* bi = t.bar(input);
      const double* pg = g.data();
      for (size_t i = 0; i < g.size(); ++i) bi[i] += pg[i];
    }
  });
}

Tensor Tape::sub(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) shape_fail("sub", a, b);
  int ia = attach(a), ib = attach(b);
  Tensor out(a.shape());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.mutable_data();
  for (size_t i = 0; i < a.size(); ++i) po[i] = pa[i] - pb[i];
  return record(std::move(out), {ia, ib}, [](Tape& t, int self) {
    const auto& node = t.nodes_[size_t(self)];
    int ia = node.inputs[0], ib = node.inputs[1];
    const Tensor& g = t.bars_[size_t(self)];
    const double* pg = g.data();
    if (t.nodes_[size_t(ia)].needs_grad) {
      double* bi = t.bar(ia);
      for (size_t i = 0; i < g.size(); ++i) bi[i] += pg[i];
    }
    if (t.nodes_[size_t(ib)].needs_grad) {
      double* bi = t.bar(ib);
      for (size_t i = 0; i < g.size(); ++i) bi[i] -= pg[i];
    }
  });
}

Tensor Tape::elementwise_mul(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) shape_fail("elementwise_mul", a, b);
  int ia = attach(a), ib = attach(b);
  Tensor out(a.shape());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.mutable_data();
  for (size_t i = 0; i < a.size(); ++i) po[i] = pa[i] * pb[i];
  return record(std::move(out), {ia, ib}, [](Tape& t, int self) {
    const auto& node = t.nodes_[size_t(self)];
    int ia = node.inputs[0], ib = node.inputs[1];
    const Tensor& a = t.values_[size_t(ia)];
    const Tensor& b = t.values_[size_t(ib)];
    const Tensor& g = t.bars_[size_t(self)];
    const double* pg = g.data();
    if (t.nodes_[size_t(ia)].needs_grad) {
      double* bi = t.bar(ia);
      const double* pb = b.data();
      for (size_t i = 0; i < g.size(); ++i) bi[i] += pg[i] * pb[i];
    }
    if (t.nodes_[size_t(ib)].needs_grad) {
      double* bi = t.bar(ib);
      const double* pa = a.data();
      for (size_t i = 0; i < g.size(); ++i) bi[i] += pg[i] * pa[i];
    }
  });
}

Tensor Tape::scalar_mul(const Tensor& a, double c) {
  int ia = attach(a);
  Tensor out(a.shape());
  const double* pa = a.data();
  double* po = out.mutable_data();
  for (size_t i = 0; i < a.size(); ++i) po[i] = pa[i] * c;
  return record(std::move(out), {ia}, [c](Tape& t, int self) {
    int ia = t.nodes_[size_t(self)].inputs[0];
    if (!t.nodes_[size_t(ia)].needs_grad) return;
    const Tensor& g = t.bars_[size_t(self)];
    const double* pg = g.data();
    double* bi = t.bar(ia);
    for (size_t i = 0; i < g.size(); ++i) bi[i] += pg[i] * c;
  });
}

Tensor Tape::concat_cols(const Tensor& a, const Tensor& b) {
  require_2d("concat_cols", a);
  require_2d("concat_cols", b);
  if (a.rows() != b.rows()) shape_fail("concat_cols", a, b);
  int ia = attach(a), ib = attach(b);
  const size_t n = a.rows(), ca = a.cols(), cb = b.cols();
  Tensor out({n, ca + cb});
  double* po = out.mutable_data();
  const double* pa = a.data();
  const double* pb = b.data();
  for (size_t r = 0; r < n; ++r) {
    std::copy(pa + r * ca, pa + (r + 1) * ca, po + r * (ca + cb));
    std::copy(pb + r * cb, pb + (r + 1) * cb, po + r * (ca + cb) + ca);
  }
  return record(std::move(out), {ia, ib}, [ca, cb, n](Tape& t, int self) {
    const auto& node = t.nodes_[size_t(self)];
    int ia = node.inputs[0], ib = node.inputs[1];
    const Tensor& g = t.bars_[size_t(self)];
    const double* pg = g.data();
    if (t.nodes_[size_t(ia)].needs_grad) {
      double* bi = t.bar(ia);
      for (size_t r = 0; r < n; ++r)
        for (size_t c = 0; c < ca; ++c) bi[r * ca + c] += pg[r * (ca + cb) + c];
    }
    if (t.nodes_[size_t(ib)].needs_grad) {
      double* bi = t.bar(ib);
      for (size_t r = 0; r < n; ++r)
        for (size_t c = 0; c < cb; ++c) bi[r * cb + c] += pg[r * (ca + cb) + ca + c];
    }
  });
}

Tensor Tape::gather_rows(const Tensor& a, std::vector<uint32_t> indices) {
  require_2d("gather_rows", a);
  for (uint32_t idx : indices)
    if (idx >= a.rows())
      throw Error(ErrorCode::ShapeMismatch, "gather_rows: index out of range");
  int ia = attach(a);
  const size_t c = a.cols();
  Tensor out({indices.size(), c});
  double* po = out.mutable_data();
  const double* pa = a.data();
  for (size_t r = 0; r < indices.size(); ++r)
    std::copy(pa + indices[r] * c, pa + (indices[r] + 1) * c, po + r * c);
  return record(std::move(out), {ia}, [idx = std::move(indices), c](Tape& t, int self) {
    int ia = t.nodes_[size_t(self)].inputs[0];
    if (!t.nodes_[size_t(ia)].needs_grad) return;
    const Tensor& g = t.bars_[size_t(self)];
    const double* pg = g.data();
    double* bi = t.bar(ia);
    for (size_t r = 0; r < idx.size(); ++r)
      for (size_t k = 0; k < c; ++k) bi[idx[r] * c + k] += pg[r * c + k];
  });
}

Tensor Tape::segment_max(const Tensor& a, std::vector<size_t> offsets,
                         std::vector<uint32_t> indices) {
  require_2d("segment_max", a);
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != indices.size())
    throw Error(ErrorCode::ShapeMismatch, "segment_max: malformed offsets");
  const size_t segments = offsets.size() - 1, c = a.cols();
  for (size_t s = 0; s < segments; ++s)
    if (offsets[s + 1] <= offsets[s])
      throw Error(ErrorCode::EmptySegment, "segment_max: segment " + std::to_string(s) +
                                               " is empty");
  for (uint32_t idx : indices)
    if (idx >= a.rows())
      throw Error(ErrorCode::ShapeMismatch, "segment_max: row index out of range");

  int ia = attach(a);
  Tensor out({segments, c});
  std::vector<uint32_t> winners(segments * c);
  double* po = out.mutable_data();
  const double* pa = a.data();
  for (size_t s = 0; s < segments; ++s) {
    for (size_t k = 0; k < c; ++k) {
      double best = -std::numeric_limits<double>::infinity();
      uint32_t best_row = indices[offsets[s]];
      for (size_t e = offsets[s]; e < offsets[s + 1]; ++e) {
        uint32_t row = indices[e];
        double v = pa[row * c + k];
        if (v > best || (v == best && row < best_row)) {
          best = v;
          best_row = row;
        }
      }
      po[s * c + k] = best;
      winners[s * c + k] = best_row;
    }
  }
  return record(std::move(out), {ia},
                [win = std::move(winners), segments, c](Tape& t, int self) {
                  int ia = t.nodes_[size_t(self)].inputs[0];
                  if (!t.nodes_[size_t(ia)].needs_grad) return;
                  const Tensor& g = t.bars_[size_t(self)];
                  const double* pg = g.data();
                  double* bi = t.bar(ia);
                  for (size_t s = 0; s < segments; ++s)
                    for (size_t k = 0; k < c; ++k) bi[win[s * c + k] * c + k] += pg[s * c + k];
                });
}

Tensor Tape::relu(const Tensor& a) {
  int ia = attach(a);
  Tensor out(a.shape());
  const double* pa = a.data();
  double* po = out.mutable_data();
  for (size_t i = 0; i < a.size(); ++i) po[i] = pa[i] > 0 ? pa[i] : 0.0;
  return record(std::move(out), {ia}, [](Tape& t, int self) {
    int ia = t.nodes_[size_t(self)].inputs[0];
    if (!t.nodes_[size_t(ia)].needs_grad) return;
    const Tensor& a = t.values_[size_t(ia)];
    const Tensor& g = t.bars_[size_t(self)];
    const double* pa = a.data();
    const double* pg = g.data();
    double* bi = t.bar(ia);
    for (size_t i = 0; i < g.size(); ++i)
      if (pa[i] > 0) bi[i] += pg[i];
  });
}

Tensor Tape::row_softmax(const Tensor& a, double temperature) {
  require_2d("row_softmax", a);
  if (temperature <= 0)
    throw Error(ErrorCode::BadConfig, "row_softmax: temperature must be > 0");
  int ia = attach(a);
  const size_t n = a.rows(), c = a.cols();
  Tensor out({n, c});
  const double* pa = a.data();
  double* po = out.mutable_data();
  for (size_t r = 0; r < n; ++r) {
    double hi = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < c; ++k) hi = std::max(hi, pa[r * c + k] / temperature);
    double total = 0.0;
    for (size_t k = 0; k < c; ++k) {
      double e = std::exp(pa[r * c + k] / temperature - hi);
      po[r * c + k] = e;
      total += e;
    }
    for (size_t k = 0; k < c; ++k) po[r * c + k] /= total;
  }
  return record(std::move(out), {ia}, [temperature, n, c](Tape& t, int self) {
    int ia = t.nodes_[size_t(self)].inputs[0];
    if (!t.nodes_[size_t(ia)].needs_grad) return;
    const Tensor& y = t.values_[size_t(self)];
    const Tensor& g = t.bars_[size_t(self)];
    const double* py = y.data();
    const double* pg = g.data();
    double* bi = t.bar(ia);
    for (size_t r = 0; r < n; ++r) {
      double dot = 0.0;
      for (size_t k = 0; k < c; ++k) dot += pg[r * c + k] * py[r * c + k];
      for (size_t k = 0; k < c; ++k)
        bi[r * c + k] += py[r * c + k] * (pg[r * c + k] - dot) / temperature;
    }
  });
}

Tensor Tape::sum(const Tensor& a) {
  int ia = attach(a);
  double total = 0.0;
  const double* pa = a.data();
  for (size_t i = 0; i < a.size(); ++i) total += pa[i];
  return record(Tensor::scalar(total), {ia}, [](Tape& t, int self) {
    int ia = t.nodes_[size_t(self)].inputs[0];
    if (!t.nodes_[size_t(ia)].needs_grad) return;
    double g = t.bars_[size_t(self)].value();
    double* bi = t.bar(ia);
    size_t size = t.values_[size_t(ia)].size();
    for (size_t i = 0; i < size; ++i) bi[i] += g;
  });
}

Tensor Tape::mean(const Tensor& a) {
  int ia = attach(a);
  double total = 0.0;
  const double* pa = a.data();
  for (size_t i = 0; i < a.size(); ++i) total += pa[i];
  const double inv = 1.0 / double(a.size());
  return record(Tensor::scalar(total * inv), {ia}, [inv](Tape& t, int self) {
    int ia = t.nodes_[size_t(self)].inputs[0];
    if (!t.nodes_[size_t(ia)].needs_grad) return;
    double g = t.bars_[size_t(self)].value() * inv;
    double* bi = t.bar(ia);
    size_t size = t.values_[size_t(ia)].size();
    for (size_t i = 0; i < size; ++i) bi[i] += g;
  });
}

Tensor Tape::squared_norm(const Tensor& a) {
  int ia = attach(a);
  double total = 0.0;
  const double* pa = a.data();
  for (size_t i = 0; i < a.size(); ++i) total += pa[i] * pa[i];
  return record(Tensor::scalar(total), {ia}, [](Tape& t, int self) {
    int ia = t.nodes_[size_t(self)].inputs[0];
    if (!t.nodes_[size_t(ia)].needs_grad) return;
    const Tensor& a = t.values_[size_t(ia)];
    double g = t.bars_[size_t(self)].value();
    const double* pa = a.data();
    double* bi = t.bar(ia);
    for (size_t i = 0; i < a.size(); ++i) bi[i] += 2.0 * g * pa[i];
  });
}

Tensor Tape::rotate_rows(const Tensor& a, std::vector<Eigen::Matrix3d> rotations) {
  require_2d("rotate_rows", a);
  if (a.cols() != 3 || rotations.size() != a.rows())
    throw Error(ErrorCode::ShapeMismatch, "rotate_rows: expected m x 3 input and m rotations");
  int ia = attach(a);
  const size_t m = a.rows();
  Tensor out({m, 3});
  const double* pa = a.data();
  double* po = out.mutable_data();
  for (size_t r = 0; r < m; ++r) {
    Eigen::Vector3d v(pa[r * 3], pa[r * 3 + 1], pa[r * 3 + 2]);
    Eigen::Vector3d w = rotations[r] * v;
    po[r * 3] = w.x();
    po[r * 3 + 1] = w.y();
    po[r * 3 + 2] = w.z();
  }
  return record(std::move(out), {ia}, [rot = std::move(rotations), m](Tape& t, int self) {
    int ia = t.nodes_[size_t(self)].inputs[0];
    if (!t.nodes_[size_t(ia)].needs_grad) return;
    const Tensor& g = t.bars_[size_t(self)];
    const double* pg = g.data();
    double* bi = t.bar(ia);
    for (size_t r = 0; r < m; ++r) {
      Eigen::Vector3d gv(pg[r * 3], pg[r * 3 + 1], pg[r * 3 + 2]);
      Eigen::Vector3d back = rot[r].transpose() * gv;
      bi[r * 3] += back.x();
      bi[r * 3 + 1] += back.y();
      bi[r * 3 + 2] += back.z();
    }
  });
}

void Tape::backward(const Tensor& loss) {
  if (loss.node < 0 || size_t(loss.node) >= nodes_.size())
    throw Error(ErrorCode::NonScalarLoss, "backward: loss is not attached to this tape");
  if (!loss.is_scalar())
    throw Error(ErrorCode::NonScalarLoss, "backward: loss must be a scalar");
  bars_.assign(nodes_.size(), Tensor());
  bar(loss.node)[0] = 1.0;
  for (int self = loss.node; self >= 0; --self) {
    if (!has_bar(self)) continue;
    const Node& node = nodes_[size_t(self)];
    if (node.backward) node.backward(*this, self);
  }
}

Tensor Tape::grad(const Tensor& leaf) const {
  if (leaf.node >= 0 && has_bar(leaf.node)) return bars_[size_t(leaf.node)];
  return Tensor::zeros(leaf.shape());
}

}  // namespace meshcorr::autodiff
