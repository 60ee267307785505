#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "sqsplat/camera.hpp"
#include "sqsplat/gaussian.hpp"
#include "sqsplat/image.hpp"

namespace sqsplat {

/// A Gaussian splatted onto the image plane.
struct ProjectedGaussian {
  Eigen::Vector2d mean2d;            // pixels
  Eigen::Matrix2d cov2d;             // pixels^2, includes the 0.3 px^2 floor
  double depth = 0.0;                // camera-frame z
  Eigen::Vector3d color;             // SH-evaluated, clamped to [0,1]
  double opacity = 0.0;              // sigmoid(opacity_logit)
  int source_index = -1;             // index into the GaussianModel

  // Derived, cached for rasterization/backward.
  Eigen::Matrix2d conic;             // inverse of cov2d
  double radius = 0.0;               // 3 * sqrt(max eigenvalue of cov2d)
};

inline constexpr double kNearPlane = 0.01;
inline constexpr double kCovBlurFloor = 0.3;   // px^2
inline constexpr double kAlphaMin = 1.0 / 255.0;
inline constexpr double kAlphaMax = 0.99;
inline constexpr double kTransmittanceStop = 1e-4;

/// Perspective projection of one Gaussian. Returns nullopt (culled) when the
/// camera-frame depth is <= 0.01 or the projected mean lies further than
/// 3 sigma outside the image rectangle.
std::optional<ProjectedGaussian> project(const Gaussian3D& g,
                                         const CameraView& cam, int sh_degree);

/// Per-pixel front-to-back contribution record for gradient replay.
struct CacheEntry {
  std::int32_t proj;      // index into CompositingCache::projected
  double alpha;           // alpha' after the min(0.99, .) clamp
  double transmittance;   // product of (1 - alpha') of closer entries
};

struct CompositingCache {
  int height = 0, width = 0;
  std::vector<ProjectedGaussian> projected;      // survivors, depth-sorted
  std::vector<std::vector<CacheEntry>> pixels;   // height * width lists
  std::vector<double> raw_color;                 // pre-clamp accumulation
};

/// Forward render against a black background. Deterministic for any thread
/// count: the image is partitioned into fixed 16-row bands regardless of
/// `threads`, and bands never share pixels.
ImageBuffer render(const GaussianModel& model, const CameraView& cam,
                   int threads = 1);

/// Same image as render(), bit for bit, plus the per-pixel compositing lists
/// the backward pass replays.
std::pair<ImageBuffer, CompositingCache> render_with_cache(
    const GaussianModel& model, const CameraView& cam, int threads = 1);

}  // namespace sqsplat
