#include "sqsplat/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace sqsplat {

KdTree3::KdTree3(const std::vector<Eigen::Vector3d>& points) {
  points_ = points;
  original_.resize(points.size());
  std::iota(original_.begin(), original_.end(), 0u);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::uint32_t KdTree3::build(std::uint32_t begin, std::uint32_t end) {
  const std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= kLeafSize) {
    nodes_[id] = {0.0, -1, begin, end};
    return id;
  }
  Eigen::Vector3d lo = points_[begin], hi = points_[begin];
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[i]);
    hi = hi.cwiseMax(points_[i]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;

  // Deterministic median partition: order by (coordinate, original index).
  std::vector<std::uint32_t> idx(end - begin);
  std::iota(idx.begin(), idx.end(), begin);
  std::nth_element(idx.begin(), idx.begin() + (mid - begin), idx.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = points_[a][axis], cb = points_[b][axis];
                     if (ca != cb) return ca < cb;
                     return original_[a] < original_[b];
                   });
  std::sort(idx.begin(), idx.begin() + (mid - begin),
            [&](std::uint32_t a, std::uint32_t b) { return original_[a] < original_[b]; });
  std::sort(idx.begin() + (mid - begin), idx.end(),
            [&](std::uint32_t a, std::uint32_t b) { return original_[a] < original_[b]; });
  std::vector<Eigen::Vector3d> tmp_pts(idx.size());
  std::vector<std::uint32_t> tmp_orig(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    tmp_pts[k] = points_[idx[k]];
    tmp_orig[k] = original_[idx[k]];
  }
  std::copy(tmp_pts.begin(), tmp_pts.end(), points_.begin() + begin);
  std::copy(tmp_orig.begin(), tmp_orig.end(), original_.begin() + begin);

  const double split = points_[mid][axis];
  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  nodes_[id] = {split, axis, left, right};
  return id;
}

KdTree3::Result KdTree3::nearest(const Eigen::Vector3d& q) const {
  return nearest_excluding(q, static_cast<std::size_t>(-1));
}

KdTree3::Result KdTree3::nearest_excluding(const Eigen::Vector3d& q,
                                           std::size_t exclude) const {
  Result best;
  best.sqdist = std::numeric_limits<double>::infinity();
  best.index = 0;
  if (!nodes_.empty()) search(root_, q, exclude, best);
  return best;
}

void KdTree3::search(std::uint32_t node, const Eigen::Vector3d& q,
                     std::size_t exclude, Result& best) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (std::uint32_t i = n.left; i < n.right; ++i) {
      if (original_[i] == exclude) continue;
      const double dx = q.x() - points_[i].x();
      const double dy = q.y() - points_[i].y();
      const double dz = q.z() - points_[i].z();
      const double d = (dx * dx + dy * dy) + dz * dz;
      if (d < best.sqdist ||
          (d == best.sqdist && original_[i] < best.index)) {
        best.sqdist = d;
        best.index = original_[i];
      }
    }
    return;
  }
  const double delta = q[n.axis] - n.split;
  const std::uint32_t near = delta < 0.0 ? n.left : n.right;
  const std::uint32_t far = delta < 0.0 ? n.right : n.left;
  search(near, q, exclude, best);
  if (delta * delta <= best.sqdist) search(far, q, exclude, best);
}

}  // namespace sqsplat
