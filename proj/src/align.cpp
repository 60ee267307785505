#include "sqsplat/align.hpp"

#include <cmath>

#include "sqsplat/errors.hpp"
#include "sqsplat/kdtree.hpp"

namespace sqsplat {

namespace {

// Chamfer objective and its gradient w.r.t. the rotation matrix for fixed
// nearest-neighbor correspondences. Both directions use static trees:
// |x - R y| = |R^T x - y| lets the Si tree answer the forward term.
struct Objective {
  const PointCloud& s0;
  const PointCloud& si;
  KdTree3 tree0;
  KdTree3 treei;

  Objective(const PointCloud& a, const PointCloud& b)
      : s0(a), si(b), tree0(a.points), treei(b.points) {}

  double value(const Eigen::Matrix3d& R) const {
    double term0 = 0.0;
    for (const auto& x : s0.points)
      term0 += treei.nearest(R.transpose() * x).sqdist;
    double term1 = 0.0;
    for (const auto& y : si.points) term1 += tree0.nearest(R * y).sqdist;
    return term0 / double(s0.size()) + term1 / double(si.size());
  }

  double value_and_grad(const Eigen::Matrix3d& R, Eigen::Matrix3d& dR) const {
    dR.setZero();
    double term0 = 0.0;
    for (const auto& x : s0.points) {
      const auto nn = treei.nearest(R.transpose() * x);
      const Eigen::Vector3d y = si.points[nn.index];
      const Eigen::Vector3d r = x - R * y;
      term0 += r.squaredNorm();
      dR -= (2.0 / double(s0.size())) * r * y.transpose();
    }
    double term1 = 0.0;
    for (const auto& y : si.points) {
      const auto nn = tree0.nearest(R * y);
      const Eigen::Vector3d r = s0.points[nn.index] - R * y;
      term1 += r.squaredNorm();
      dR -= (2.0 / double(si.size())) * r * y.transpose();
    }
    return term0 / double(s0.size()) + term1 / double(si.size());
  }
};

double chamfer_objective_eval(const PointCloud& s0, const PointCloud& si,
                              const Rotation& R) {
  const Objective obj(s0, si);
  return obj.value(R.dcm);
}

}  // namespace

std::vector<Rotation> quasi_random_rotations(int n) {
  if (n < 1) throw std::invalid_argument("quasi_random_rotations: n >= 1");
  // Additive Kronecker sequence on the plastic constant (three-dimensional
  // low-discrepancy lattice), mapped onto SO(3) through the uniform
  // quaternion construction.
  constexpr double kPlastic = 1.32471795724474602596;
  const double a1 = 1.0 / kPlastic;
  const double a2 = a1 * a1;
  const double a3 = a2 * a1;
  std::vector<Rotation> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double u1 = std::fmod(0.5 + a1 * (i + 1), 1.0);
    const double u2 = std::fmod(0.5 + a2 * (i + 1), 1.0);
    const double u3 = std::fmod(0.5 + a3 * (i + 1), 1.0);
    const double r1 = std::sqrt(1.0 - u1);
    const double r2 = std::sqrt(u1);
    const double t1 = 2.0 * M_PI * u2;
    const double t2 = 2.0 * M_PI * u3;
    // (w, x, y, z) uniform on the unit quaternion sphere.
    const Eigen::Vector4d q(r2 * std::cos(t2), r1 * std::sin(t1),
                            r1 * std::cos(t1), r2 * std::sin(t2));
    out.push_back({quat_to_matrix(q)});
  }
  return out;
}

AlignmentResult refine_rotation(const PointCloud& s0_full,
                                const PointCloud& si_full,
                                const Rotation& R_init,
                                const AlignOptions& opts) {
  if (s0_full.empty() || si_full.empty())
    throw EmptyCloud("refine_rotation: empty point cloud");
  const PointCloud s0 = s0_full.subsample(std::size_t(opts.max_points));
  const PointCloud si = si_full.subsample(std::size_t(opts.max_points));
  const Objective obj(s0, si);

  Vector6d r = dcm_to_rot6d(R_init);
  Eigen::Matrix3d R = R_init.dcm;
  double current = obj.value(R);
  int iters = 0;

  for (; iters < opts.max_iters; ++iters) {
    Eigen::Matrix3d dR;
    obj.value_and_grad(R, dR);
    const auto jac = rot6d_to_dcm_jacobian(r);
    Vector6d grad;
    for (int k = 0; k < 6; ++k)
      grad[k] = (dR.array() * jac[k].array()).sum();
    const double gnorm = grad.norm();
    if (gnorm < 1e-14) break;

    // Backtracking: first trial moves the 6D parameters by at most 0.3.
    double step = 0.3 / gnorm;
    bool accepted = false;
    bool converged = false;
    for (int half = 0; half < 24; ++half, step *= 0.5) {
      const Vector6d r_trial = r - step * grad;
      Rotation R_trial;
      try {
        R_trial = rot6d_to_dcm(r_trial);
      } catch (const DegenerateRotation&) {
        continue;
      }
      const double trial = obj.value(R_trial.dcm);
      if (trial < current) {
        converged = (current - trial) <= opts.rel_tol * std::max(current, 1e-300);
        r = dcm_to_rot6d(R_trial);  // re-projected onto the manifold
        R = R_trial.dcm;
        current = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted || converged) {
      ++iters;
      break;
    }
  }

  AlignmentResult result;
  result.rotation = {R};
  // Canonical fresh evaluation: chamfer(S0, R * Si) on the subsampled clouds.
  result.chamfer_final = chamfer_objective_eval(s0, si, result.rotation);
  result.iterations_used = iters;
  return result;
}

AlignmentResult align_multistart(const PointCloud& s0, const PointCloud& si,
                                 int n_starts, const AlignOptions& opts) {
  if (s0.empty() || si.empty())
    throw EmptyCloud("align_multistart: empty point cloud");
  const auto starts = quasi_random_rotations(n_starts);
  AlignmentResult best;
  bool have = false;
  for (int k = 0; k < int(starts.size()); ++k) {
    AlignmentResult r = refine_rotation(s0, si, starts[k], opts);
    r.start_index = k;
    if (!have || r.chamfer_final < best.chamfer_final) {
      best = r;
      have = true;
    }
  }
  return best;
}

std::vector<std::pair<Rotation, Eigen::Vector3d>> implicit_pose_stream(
    const std::vector<PrimitiveAssembly>& assemblies,
    const std::vector<Eigen::Vector3d>& translations, const AlignOptions& opts) {
  if (assemblies.empty())
    throw std::invalid_argument("implicit_pose_stream: no assemblies");
  if (assemblies.size() != translations.size())
    throw std::invalid_argument("implicit_pose_stream: length mismatch");

  const int ppp =
      std::max<int>(64, int(1024 / assemblies.front().primitives.size()));
  const PointCloud s0 = assembly_to_pointcloud(assemblies.front(), ppp);

  std::vector<std::pair<Rotation, Eigen::Vector3d>> out;
  out.reserve(assemblies.size());
  out.emplace_back(Rotation::identity(), translations.front());
  for (std::size_t i = 1; i < assemblies.size(); ++i) {
    const PointCloud si = assembly_to_pointcloud(assemblies[i], ppp);
    const AlignmentResult r = align_multistart(s0, si, 16, opts);
    out.emplace_back(r.rotation.transpose(), translations[i]);
  }
  return out;
}

}  // namespace sqsplat
