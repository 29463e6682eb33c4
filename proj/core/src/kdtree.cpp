#include "meshcorr/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "meshcorr/errors.hpp"

namespace meshcorr::metrics {

namespace {
constexpr uint32_t kLeafSize = 8;
}

KdTree::KdTree(const std::vector<meshkit::Vec3>& points) : points_(points) {
  if (points_.empty()) throw Error(ErrorCode::EmptyInput, "KdTree: no points");
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  root_ = build(0, uint32_t(points_.size()));
}

int KdTree::build(uint32_t begin, uint32_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  if (end - begin <= kLeafSize) {
    nodes_.push_back(node);
    return int(nodes_.size()) - 1;
  }
  meshkit::Vec3 lo = points_[order_[begin]], hi = lo;
  for (uint32_t k = begin; k < end; ++k) {
    lo = lo.cwiseMin(points_[order_[k]]);
    hi = hi.cwiseMax(points_[order_[k]]);
  }
  meshkit::Vec3 extent = hi - lo;
  int axis = 0;
  if (extent.y() > extent.x()) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;

  uint32_t mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](uint32_t a, uint32_t b) { return points_[a][axis] < points_[b][axis]; });
  node.axis = axis;
  node.split = points_[order_[mid]][axis];

  int self = int(nodes_.size());
  nodes_.push_back(node);
  int left = build(begin, mid);
  int right = build(mid, end);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void KdTree::search(int node_id, const meshkit::Vec3& query, double& best_d2,
                    uint32_t& best_idx) const {
  const Node& node = nodes_[size_t(node_id)];
  if (node.axis < 0) {
    for (uint32_t k = node.begin; k < node.end; ++k) {
      uint32_t idx = order_[k];
      double d2 = (query - points_[idx]).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && idx < best_idx)) {
        best_d2 = d2;
        best_idx = idx;
      }
    }
    return;
  }
  double gap = query[node.axis] - node.split;
  int near = gap < 0 ? node.left : node.right;
  int far = gap < 0 ? node.right : node.left;
  search(near, query, best_d2, best_idx);
  // Equal-distance candidates may sit exactly on the splitting plane, so the
  // far side is pruned only when strictly beyond the current best.
  if (gap * gap <= best_d2) search(far, query, best_d2, best_idx);
}

KdTree::Hit KdTree::nearest(const meshkit::Vec3& query) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  uint32_t best_idx = std::numeric_limits<uint32_t>::max();
  search(root_, query, best_d2, best_idx);
  return {best_idx, std::sqrt(best_d2)};
}

}  // namespace meshcorr::metrics
