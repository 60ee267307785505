#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <vector>

#include "sqsplat/pointcloud.hpp"

namespace sqsplat {

/// One trainable splat. Covariance is never stored directly; it is assembled
/// from (log_scale, rot_quat) so it stays SPD through optimization.
struct Gaussian3D {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d log_scale = Eigen::Vector3d::Zero();
  Eigen::Vector4d rot_quat = Eigen::Vector4d(1, 0, 0, 0);  // (w, x, y, z)
  double opacity_logit = 0.0;
  Eigen::Matrix<double, 3, 16> sh_coeffs =
      Eigen::Matrix<double, 3, 16>::Zero();  // rows RGB, cols SH basis

  static constexpr double kScaleMin = 1e-6;
  static constexpr double kScaleMax = 1e3;
};

struct GaussianModel {
  std::vector<Gaussian3D> gaussians;
  int active_sh_degree = 0;  // in [0, 3]

  std::size_t size() const { return gaussians.size(); }
};

/// Real spherical harmonics basis through degree 3 (16 functions) evaluated
/// at a unit direction.
void sh_basis(const Eigen::Vector3d& dir, double out[16]);

/// Basis values plus their gradients w.r.t. the (unconstrained) direction
/// components; callers chain through the normalization Jacobian themselves.
void sh_basis_with_grad(const Eigen::Vector3d& dir, double out[16],
                        Eigen::Vector3d grad[16]);

/// Sigma = R diag(exp(log_scale))^2 R^T; symmetric positive definite.
Eigen::Matrix3d covariance(const Gaussian3D& g);

/// Density with the 1/(2 pi sqrt(det)) prefactor. Throws SingularCovariance
/// when det(Sigma) < 1e-30. The renderer deliberately does not use this
/// normalization: opacity is a learned quantity modulated by the bare
/// exponential (see render.hpp).
double eval_density(const Gaussian3D& g, const Eigen::Vector3d& x);

/// clamp(sum of coeff * basis + 0.5, 0, 1) per channel, truncated at the
/// given degree. Coefficients above the degree are ignored.
Eigen::Vector3d eval_sh_color(const Gaussian3D& g, const Eigen::Vector3d& view_dir,
                              int degree);

/// One isotropic Gaussian per point. The shared isotropic scale is the mean
/// nearest-neighbor distance of the cloud clamped to [1e-4, 0.5]; the DC SH
/// coefficient is set so eval_sh_color at degree 0 equals base_color.
GaussianModel from_pointcloud(const PointCloud& pc, double init_opacity,
                              const Eigen::Vector3d& base_color);

/// Means of Gaussians whose opacity exceeds the threshold.
PointCloud model_means(const GaussianModel& model, double min_opacity = 0.0);

/// Binary little-endian PLY with per-vertex double properties, in order:
/// x y z, f_dc_0..2, f_rest_0..44 (channel-major, 15 per channel),
/// opacity (logit), scale_0..2 (log), rot_0..3 (w x y z quaternion).
/// Round-trips bit-exactly for finite values.
void save_gaussian_ply(const std::filesystem::path& path, const GaussianModel& m);
GaussianModel load_gaussian_ply(const std::filesystem::path& path);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace sqsplat
