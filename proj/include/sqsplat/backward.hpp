#pragma once

#include <Eigen/Core>
#include <vector>

#include "sqsplat/camera.hpp"
#include "sqsplat/gaussian.hpp"
#include "sqsplat/image.hpp"
#include "sqsplat/metrics.hpp"

namespace sqsplat {

/// Exact partial derivatives of one loss evaluation with respect to a single
/// Gaussian's parameters.
struct GaussianGrad {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d log_scale = Eigen::Vector3d::Zero();
  Eigen::Vector4d rot_quat = Eigen::Vector4d::Zero();
  double opacity_logit = 0.0;
  Eigen::Matrix<double, 3, 16> sh = Eigen::Matrix<double, 3, 16>::Zero();
};

struct GradientBuffer {
  std::vector<GaussianGrad> g;        // one entry per model Gaussian
  std::vector<double> grad2d_norm;    // NDC-scaled |dL/d mean2d|, per Gaussian
  std::vector<std::uint8_t> visible;  // survived projection this frame

  void resize(std::size_t n) {
    g.assign(n, {});
    grad2d_norm.assign(n, 0.0);
    visible.assign(n, 0);
  }
};

struct BackwardResult {
  LossComponents loss;
  GradientBuffer grads;
  ImageBuffer render;  // the forward image, reusable for metrics
};

/// Renders with cache, evaluates the combined loss against `truth`, and
/// replays the per-pixel compositing lists in reverse to produce exact
/// analytic gradients for every Gaussian parameter (chain rule through
/// compositing, projection, the covariance factorization, the opacity
/// sigmoid, and SH evaluation including the view-direction dependence on the
/// mean). Culled Gaussians receive exactly zero gradient.
BackwardResult backward(const GaussianModel& model, const CameraView& cam,
                        const ImageBuffer& truth, double beta, int threads = 1);

}  // namespace sqsplat
