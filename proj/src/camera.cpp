#include "sqsplat/camera.hpp"

#include <cmath>

namespace sqsplat {

CameraView CameraView::look_at(const Eigen::Vector3d& eye,
                               const Eigen::Vector3d& target,
                               const Eigen::Vector3d& up, double fx, double fy,
                               int width, int height) {
  Eigen::Vector3d z_c = (target - eye).normalized();
  Eigen::Vector3d u = up;
  if (std::abs(u.normalized().dot(z_c)) > 1.0 - 1e-9)
    u = Eigen::Vector3d(0, 1, 0);  // fallback when looking along `up`
  // CV convention: x right, y down, z forward.
  Eigen::Vector3d y_c = -(u - u.dot(z_c) * z_c).normalized();
  Eigen::Vector3d x_c = y_c.cross(z_c);

  CameraView cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.width = width;
  cam.height = height;
  cam.R_cw.dcm.row(0) = x_c;
  cam.R_cw.dcm.row(1) = y_c;
  cam.R_cw.dcm.row(2) = z_c;
  cam.t_cw = -(cam.R_cw.dcm * eye);
  return cam;
}

}  // namespace sqsplat
