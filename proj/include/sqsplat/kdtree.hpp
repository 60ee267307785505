#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace sqsplat {

/// Exact nearest-neighbor index over a fixed set of 3D points (median-split
/// kd-tree). Construction and queries are deterministic; ties resolve to the
/// lowest original point index.
class KdTree3 {
 public:
  KdTree3() = default;
  explicit KdTree3(const std::vector<Eigen::Vector3d>& points);

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return points_.size(); }

  struct Result {
    std::size_t index = 0;
    double sqdist = 0.0;
  };

  Result nearest(const Eigen::Vector3d& query) const;

  /// Nearest point whose original index differs from `exclude`; lets callers
  /// query a cloud against itself.
  Result nearest_excluding(const Eigen::Vector3d& query, std::size_t exclude) const;

 private:
  struct Node {
    double split = 0.0;
    std::int32_t axis = -1;    // -1 marks a leaf
    std::uint32_t left = 0;    // child node or leaf range begin
    std::uint32_t right = 0;   // child node or leaf range end
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::uint32_t node, const Eigen::Vector3d& q, std::size_t exclude,
              Result& best) const;

  std::vector<Eigen::Vector3d> points_;   // reordered copy
  std::vector<std::uint32_t> original_;   // reordered index -> input index
  std::vector<Node> nodes_;
  std::uint32_t root_ = 0;

  static constexpr std::uint32_t kLeafSize = 16;
};

}  // namespace sqsplat
