#include "sqsplat/rotation.hpp"

#include <cmath>

#include "sqsplat/errors.hpp"

namespace sqsplat {

bool Rotation::is_valid(double tol) const {
  const Eigen::Matrix3d gram = dcm * dcm.transpose();
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol)
    return false;
  return std::abs(dcm.determinant() - 1.0) <= tol;
}

Rotation rot6d_to_dcm(const Vector6d& r) {
  const Eigen::Vector3d a = r.head<3>();
  const Eigen::Vector3d b = r.tail<3>();
  const double na = a.norm();
  if (na <= 1e-12) throw DegenerateRotation("rot6d: first vector is zero");
  const Eigen::Vector3d e1 = a / na;
  const Eigen::Vector3d u = b - b.dot(e1) * e1;
  const double nu = u.norm();
  if (nu <= 1e-12)
    throw DegenerateRotation("rot6d: second vector is parallel to the first");
  const Eigen::Vector3d e2 = u / nu;
  const Eigen::Vector3d e3 = e1.cross(e2);
  Rotation out;
  out.dcm.col(0) = e1;
  out.dcm.col(1) = e2;
  out.dcm.col(2) = e3;
  return out;
}

Vector6d dcm_to_rot6d(const Rotation& R) {
  Vector6d r;
  r.head<3>() = R.dcm.col(0);
  r.tail<3>() = R.dcm.col(1);
  return r;
}

std::array<Eigen::Matrix3d, 6> rot6d_to_dcm_jacobian(const Vector6d& r) {
  const Eigen::Vector3d a = r.head<3>();
  const Eigen::Vector3d b = r.tail<3>();
  const double na = a.norm();
  if (na <= 1e-12) throw DegenerateRotation("rot6d: first vector is zero");
  const Eigen::Vector3d e1 = a / na;
  const Eigen::Vector3d u = b - b.dot(e1) * e1;
  const double nu = u.norm();
  if (nu <= 1e-12)
    throw DegenerateRotation("rot6d: second vector is parallel to the first");
  const Eigen::Vector3d e2 = u / nu;

  const Eigen::Matrix3d de1_da =
      (Eigen::Matrix3d::Identity() - e1 * e1.transpose()) / na;
  const Eigen::Matrix3d proj_e2 =
      (Eigen::Matrix3d::Identity() - e2 * e2.transpose()) / nu;

  std::array<Eigen::Matrix3d, 6> jac;
  for (int k = 0; k < 6; ++k) {
    Eigen::Vector3d de1 = Eigen::Vector3d::Zero();
    Eigen::Vector3d du;
    if (k < 3) {
      de1 = de1_da.col(k);
      du = -(b.dot(de1)) * e1 - b.dot(e1) * de1;
    } else {
      Eigen::Vector3d db = Eigen::Vector3d::Zero();
      db[k - 3] = 1.0;
      du = db - (db.dot(e1)) * e1;
    }
    const Eigen::Vector3d de2 = proj_e2 * du;
    const Eigen::Vector3d de3 = de1.cross(e2) + e1.cross(de2);
    jac[k].col(0) = de1;
    jac[k].col(1) = de2;
    jac[k].col(2) = de3;
  }
  return jac;
}

const std::array<Eigen::Matrix3d, 4>& ambiguity_permutations() {
  static const std::array<Eigen::Matrix3d, 4> perms = [] {
    std::array<Eigen::Matrix3d, 4> p;
    p[0] = Eigen::Matrix3d::Identity();
    p[1] = Eigen::Vector3d(1, -1, -1).asDiagonal();
    p[2] = Eigen::Vector3d(-1, 1, -1).asDiagonal();
    p[3] = Eigen::Vector3d(-1, -1, 1).asDiagonal();
    return p;
  }();
  return perms;
}

std::array<Rotation, 4> permutation_set(const Rotation& R) {
  const auto& perms = ambiguity_permutations();
  std::array<Rotation, 4> out;
  for (int k = 0; k < 4; ++k) out[k] = {R.dcm * perms[k]};
  return out;
}

double geodesic_angle_deg(const Rotation& a, const Rotation& b) {
  const double tr = (a.dcm.transpose() * b.dcm).trace();
  const double c = std::clamp((tr - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

Rotation axis_angle(const Eigen::Vector3d& axis, double angle_rad) {
  const Eigen::Vector3d n = axis.normalized();
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  Eigen::Matrix3d K;
  K << 0, -n.z(), n.y(), n.z(), 0, -n.x(), -n.y(), n.x(), 0;
  Rotation out;
  out.dcm = Eigen::Matrix3d::Identity() + s * K + (1.0 - c) * K * K;
  return out;
}

namespace {

Eigen::Matrix3d matrix_from_unit_quat(double w, double x, double y, double z) {
  Eigen::Matrix3d R;
  R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return R;
}

// dR/dn_i for a unit quaternion n = (w, x, y, z).
std::array<Eigen::Matrix3d, 4> unit_quat_jacobian(double w, double x, double y,
                                                  double z) {
  std::array<Eigen::Matrix3d, 4> d;
  d[0] << 0, -z, y, z, 0, -x, -y, x, 0;
  d[1] << 0, y, z, y, -2 * x, -w, z, w, -2 * x;
  d[2] << -2 * y, x, w, x, 0, z, -w, z, -2 * y;
  d[3] << -2 * z, -w, x, w, -2 * z, y, x, y, 0;
  for (auto& m : d) m *= 2.0;
  return d;
}

}  // namespace

Eigen::Matrix3d quat_to_matrix(const Eigen::Vector4d& q) {
  const Eigen::Vector4d n = q / q.norm();
  return matrix_from_unit_quat(n[0], n[1], n[2], n[3]);
}

std::array<Eigen::Matrix3d, 4> quat_to_matrix_jacobian(const Eigen::Vector4d& q) {
  const double norm = q.norm();
  const Eigen::Vector4d n = q / norm;
  const auto dR_dn = unit_quat_jacobian(n[0], n[1], n[2], n[3]);
  // dn/dq = (I - n n^T) / |q|
  const Eigen::Matrix4d dn_dq =
      (Eigen::Matrix4d::Identity() - n * n.transpose()) / norm;
  std::array<Eigen::Matrix3d, 4> out;
  for (int k = 0; k < 4; ++k) {
    out[k].setZero();
    for (int i = 0; i < 4; ++i) out[k] += dR_dn[i] * dn_dq(i, k);
  }
  return out;
}

}  // namespace sqsplat
