#pragma once

#include <Eigen/Core>

#include "sqsplat/rotation.hpp"

namespace sqsplat {

/// Pinhole camera with a world-to-camera rigid transform: a point p in world
/// coordinates maps to R_cw * p + t_cw in camera coordinates (+z forward).
struct CameraView {
  double fx = 1.0, fy = 1.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
  Rotation R_cw;
  Eigen::Vector3d t_cw = Eigen::Vector3d::Zero();

  Eigen::Vector3d to_camera(const Eigen::Vector3d& p_world) const {
    return R_cw.dcm * p_world + t_cw;
  }

  /// Camera center expressed in world coordinates.
  Eigen::Vector3d center() const { return -(R_cw.dcm.transpose() * t_cw); }

  bool is_valid() const {
    return fx > 0 && fy > 0 && width > 0 && height > 0 && cx >= 0 &&
           cx < width && cy >= 0 && cy < height && R_cw.is_valid(1e-9);
  }

  /// Look-at constructor: camera at `eye`, +z toward `target`.
  static CameraView look_at(const Eigen::Vector3d& eye,
                            const Eigen::Vector3d& target,
                            const Eigen::Vector3d& up, double fx, double fy,
                            int width, int height);
};

}  // namespace sqsplat
