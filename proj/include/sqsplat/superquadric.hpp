#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <vector>

#include "sqsplat/pointcloud.hpp"
#include "sqsplat/rotation.hpp"

namespace sqsplat {

/// One superquadric primitive: 16 parameters (3 scale + 2 exponent +
/// 3 translation + 6 rotation + 2 taper).
struct SuperquadricParams {
  Eigen::Vector3d alpha = Eigen::Vector3d::Ones();   // per-axis scale, > 0
  Eigen::Vector2d epsilon = Eigen::Vector2d::Ones(); // shape exponents
  Eigen::Vector3d trans = Eigen::Vector3d::Zero();
  Vector6d rot6d = (Vector6d() << 1, 0, 0, 0, 1, 0).finished();
  Eigen::Vector2d taper = Eigen::Vector2d::Zero();   // each in [-1, 1]

  static constexpr int kParamCount = 16;
  static constexpr double kEpsilonMin = 0.05;
  static constexpr double kEpsilonMax = 2.0;

  /// Clamp exponents into [0.05, 2.0]; exponents near zero overflow the
  /// |.|^(2/eps) terms of the implicit equation.
  void clamp_epsilon();

  /// Enforce invariants (positive scales, clamped exponents, taper range).
  /// Throws std::invalid_argument on non-positive alpha.
  void validate() const;
};

struct PrimitiveAssembly {
  std::vector<SuperquadricParams> primitives;

  std::size_t size() const { return primitives.size(); }
};

/// Point on the untapered superquadric surface in the body frame:
///   x = a1 * sg(cos eta)|cos eta|^e1 * sg(cos w)|cos w|^e2
///   y = a2 * sg(cos eta)|cos eta|^e1 * sg(sin w)|sin w|^e2
///   z = a3 * sg(sin eta)|sin eta|^e1
/// with eta in [-pi/2, pi/2] and omega in [-pi, pi).
Eigen::Vector3d parametric_point(const Eigen::Vector3d& alpha,
                                 const Eigen::Vector2d& epsilon, double eta,
                                 double omega);

/// Linear taper along x and y as a function of z:
///   x' = (kx * z / a3 + 1) x,  y' = (ky * z / a3 + 1) y.
Eigen::Vector3d apply_taper(const Eigen::Vector2d& taper, double alpha_z,
                            const Eigen::Vector3d& p);

/// Implicit superquadric residual F(p) - 1 with
/// F = ((|x/a1|^(2/e2) + |y/a2|^(2/e2))^(e2/e1) + |z/a3|^(2/e1));
/// zero (to rounding) for untapered body-frame surface points.
double implicit_residual(const Eigen::Vector3d& alpha,
                         const Eigen::Vector2d& epsilon,
                         const Eigen::Vector3d& p);

/// Body-frame surface point for a full parameter set (taper applied, pose
/// not applied).
Eigen::Vector3d surface_point_body(const SuperquadricParams& sq, double eta,
                                   double omega);

/// World-frame surface point: rot6d/trans applied after tapering.
Eigen::Vector3d surface_point(const SuperquadricParams& sq, double eta,
                              double omega);

/// Grid sample of the posed surface. eta rows are placed at cell centers of
/// [-pi/2, pi/2] (poles are degenerate cells of the parameterization) and
/// omega columns sample [-pi, pi) uniformly from -pi. Exact duplicate
/// coordinates, if any cells still collapse, are removed by bitwise hashing.
PointCloud sample_surface(const SuperquadricParams& sq, int n_eta, int n_omega);

/// Concatenated per-primitive samples, points_per_primitive each (grid is
/// chosen slightly larger and trimmed deterministically).
PointCloud assembly_to_pointcloud(const PrimitiveAssembly& assembly,
                                  int points_per_primitive);

/// JSON document {"primitives":[{"alpha":..., "epsilon":..., "trans":...,
/// "rot6d":..., "taper":...}]}.
void save_assembly_json(const std::filesystem::path& path,
                        const PrimitiveAssembly& assembly);
PrimitiveAssembly load_assembly_json(const std::filesystem::path& path);

}  // namespace sqsplat
