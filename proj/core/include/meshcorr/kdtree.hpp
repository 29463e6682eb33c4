#pragma once

#include <vector>

#include "meshcorr/trimesh.hpp"

namespace meshcorr::metrics {

// Static 3D kd-tree over a point list. Nearest-neighbour queries return
// exactly the brute-force answer, including the lowest-index tie rule:
// candidates are compared by (distance^2, index) and subtrees are pruned only
// when strictly farther than the current best.
class KdTree {
 public:
  explicit KdTree(const std::vector<meshkit::Vec3>& points);

  struct Hit {
    uint32_t index = 0;
    double distance = 0.0;
  };
  Hit nearest(const meshkit::Vec3& query) const;
  size_t size() const { return points_.size(); }

 private:
  struct Node {
    int left = -1, right = -1;
    uint32_t begin = 0, end = 0;  // leaf range into order_
    int axis = -1;
    double split = 0.0;
  };

  int build(uint32_t begin, uint32_t end);
  void search(int node, const meshkit::Vec3& query, double& best_d2, uint32_t& best_idx) const;

  std::vector<meshkit::Vec3> points_;
  std::vector<uint32_t> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace meshcorr::metrics
