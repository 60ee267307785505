#pragma once

#include <Eigen/Core>
#include <array>

namespace sqsplat {

using Vector6d = Eigen::Matrix<double, 6, 1>;

/// A 3x3 direction cosine matrix, kept orthonormal with det +1.
struct Rotation {
  Eigen::Matrix3d dcm = Eigen::Matrix3d::Identity();

  static Rotation identity() { return {}; }

  /// Orthonormality and determinant check at the given tolerance.
  bool is_valid(double tol = 1e-9) const;

  Rotation transpose() const { return {dcm.transpose()}; }

  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return dcm * v; }
  Rotation operator*(const Rotation& o) const { return {dcm * o.dcm}; }
};

/// Gram-Schmidt construction of a DCM from the 6D rotation representation:
/// e1 = normalize(a), e2 = normalize(b - (b.e1)e1), e3 = e1 x e2 where
/// r = [a; b]. Throws DegenerateRotation when a or the residual of b is
/// numerically zero (norm <= 1e-12).
Rotation rot6d_to_dcm(const Vector6d& r);

/// First two columns of R stacked into a 6-vector; rot6d_to_dcm of the
/// result reproduces R exactly.
Vector6d dcm_to_rot6d(const Rotation& R);

/// Partial derivatives dR/dr_k of the Gram-Schmidt map, k = 0..5.
std::array<Eigen::Matrix3d, 6> rot6d_to_dcm_jacobian(const Vector6d& r);

/// The four shape-ambiguity matrices: identity and the three 180-degree
/// axis flips (a Klein four-group). Returned as R * P_k, k = 0..3.
std::array<Rotation, 4> permutation_set(const Rotation& R);

/// The raw permutation matrices P_k themselves.
const std::array<Eigen::Matrix3d, 4>& ambiguity_permutations();

/// Relative rotation angle acos((trace(Ra^T Rb) - 1) / 2) in degrees,
/// clamped to [0, 180].
double geodesic_angle_deg(const Rotation& a, const Rotation& b);

/// Rotation about a (non-zero) axis by an angle in radians.
Rotation axis_angle(const Eigen::Vector3d& axis, double angle_rad);

/// Rotation matrix from a quaternion (w, x, y, z); normalizes internally so
/// any non-zero quaternion is accepted.
Eigen::Matrix3d quat_to_matrix(const Eigen::Vector4d& q);

/// dR/dq_k of quat_to_matrix including the internal normalization, k = 0..3.
std::array<Eigen::Matrix3d, 4> quat_to_matrix_jacobian(const Eigen::Vector4d& q);

}  // namespace sqsplat
