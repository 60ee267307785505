#pragma once

#include <vector>

#include "sqsplat/pointcloud.hpp"
#include "sqsplat/rotation.hpp"
#include "sqsplat/superquadric.hpp"

namespace sqsplat {

struct AlignmentResult {
  Rotation rotation;          // argmin over R of chamfer(S0, R * Si)
  double chamfer_final = 0.0; // fresh evaluation at the returned rotation
  int start_index = -1;       // which quasi-random start won
  int iterations_used = 0;
};

struct AlignOptions {
  int max_iters = 200;
  double rel_tol = 1e-6;
  int max_points = 1024;  // deterministic stride subsampling before alignment
};

/// n rotations from a deterministic low-discrepancy sequence mapped uniformly
/// onto SO(3). For n = 16 the minimum pairwise geodesic angle exceeds 40
/// degrees (frozen as a regression test).
std::vector<Rotation> quasi_random_rotations(int n);

/// First-order descent on the 6D rotation parameterization of
/// chamfer(S0, R * Si), nearest-neighbor correspondences refreshed every
/// step, backtracking line search, stop at max_iters or relative improvement
/// below rel_tol. The result never has larger chamfer than R_init.
AlignmentResult refine_rotation(const PointCloud& s0, const PointCloud& si,
                                const Rotation& R_init,
                                const AlignOptions& opts = {});

/// refine_rotation from each of quasi_random_rotations(n_starts); minimal
/// chamfer wins, ties broken by start index.
AlignmentResult align_multistart(const PointCloud& s0, const PointCloud& si,
                                 int n_starts = 16,
                                 const AlignOptions& opts = {});

/// Pose recovery for the implicit (ambiguity-free) estimator: pose 0 is the
/// identity; pose i carries the rotation taking the first assembly's cloud
/// onto assembly i's cloud (the inverse of the alignment argmin, i.e. the
/// camera-from-body rotation when assemblies are expressed in camera axes).
/// Translations pass through unchanged.
std::vector<std::pair<Rotation, Eigen::Vector3d>> implicit_pose_stream(
    const std::vector<PrimitiveAssembly>& assemblies,
    const std::vector<Eigen::Vector3d>& translations,
    const AlignOptions& opts = {});

}  // namespace sqsplat
