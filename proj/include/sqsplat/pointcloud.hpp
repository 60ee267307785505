#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <vector>

#include "sqsplat/rotation.hpp"

namespace sqsplat {

struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> normals;  // empty or same length as points

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  Eigen::Vector3d centroid() const;

  /// Keep every stride-th point so that at most max_points remain.
  PointCloud subsample(std::size_t max_points) const;
};

/// Each point mapped to R * p (column-vector convention). Normals rotate the
/// same way.
PointCloud apply_rotation(const PointCloud& cloud, const Rotation& R);

/// ASCII PLY with float x, y, z (plus nx, ny, nz when normals are present).
void save_ply_ascii(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud load_ply_ascii(const std::filesystem::path& path);

}  // namespace sqsplat
