#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sqsplat/camera.hpp"
#include "sqsplat/gaussian.hpp"
#include "sqsplat/image.hpp"
#include "sqsplat/rng.hpp"
#include "sqsplat/rotation.hpp"
#include "sqsplat/superquadric.hpp"

namespace sqsplat {

/// Folded normal |N(mu, sigma)| with (mu, sigma) solved so the folded mean
/// and standard deviation hit the requested targets. When no parameters can
/// reach the target ratio (std/mean above the half-normal limit ~0.7555),
/// the half-normal with exact mean is used.
struct FoldedNormal {
  double mu = 0.0;
  double sigma = 0.0;

  static FoldedNormal match_moments(double mean, double stddev);
  double sample(Rng& rng) const;
};

struct SyntheticScene {
  PrimitiveAssembly truth_assembly;
  PointCloud truth_cloud;      // dense surface sample, >= 10k points
  GaussianModel truth_model;   // dense opaque Gaussians behind the frames
  std::vector<CameraView> views;
  std::vector<ImageBuffer> frames;
  double extent = 1.0;                  // max |p| over the truth cloud
  Eigen::Vector3d principal_axis = {1, 0, 0};  // longest axis of the cloud
};

/// Deterministic synthetic satellite: one body primitive (a sphere when
/// m_primitives == 1) plus flattened panel primitives alternating along the
/// +x/-x wing axis, viewed from a randomized orbit with the target centered
/// and fully inside every frustum. Frames are rendered from truth_model, so
/// the training target is exactly representable.
SyntheticScene generate_scene(std::uint64_t seed, int m_primitives, int n_views,
                              int resolution, int threads = 1);

enum class EstimatorVariant { kOriginal, kAmbiguityAware, kAmbiguityFree };

EstimatorVariant estimator_variant_from_string(const std::string& name);
std::string to_string(EstimatorVariant v);

struct NoiseStats {
  double mean = 0.0;
  double std = 0.0;
};

/// Simulated shape-and-pose estimator. Default noise magnitudes follow the
/// per-variant pose-error statistics of the reference CNNs (training split).
struct EstimatorSim {
  NoiseStats rot_error_deg;
  NoiseStats trans_error;       // relative translation error
  double shape_perturb = 0.0;   // relative noise on alpha, trans, taper
  EstimatorVariant variant = EstimatorVariant::kOriginal;

  static EstimatorSim defaults(EstimatorVariant v);
};

struct EstimateResult {
  PrimitiveAssembly assembly;
  Rotation rotation;            // estimated world-to-camera rotation
  Eigen::Vector3d translation;  // estimated world-to-camera translation
};

/// Perturb the truth assembly and pose of one view. Rotation error is drawn
/// from the folded normal matched to the variant's statistics; the
/// ambiguity-free variant errs predominantly about the scene's longest
/// principal axis, the ambiguity-aware variant first applies a uniformly
/// chosen shape-ambiguity permutation, the original variant errs about a
/// uniform axis. Translation error is a relative offset in a uniform
/// direction. Zero noise reproduces the truth exactly (up to the
/// ambiguity-aware permutation).
EstimateResult simulate_estimate(const SyntheticScene& scene, int view_index,
                                 const EstimatorSim& sim, std::uint64_t seed);

/// Relative perturbation of alpha / trans / taper, shared by the estimator
/// and by standalone primitive-init experiments.
PrimitiveAssembly perturb_assembly(const PrimitiveAssembly& assembly,
                                   double relative_noise, double extent,
                                   Rng& rng);

struct DatasetManifest {
  std::map<std::string, std::string> files;  // relative path -> sha256
};

/// Writes frames/%04d.png + frames/%04d.f32 (+ sidecars), poses.json,
/// camera.json, truth/cloud.ply, truth/assembly.json and manifest.json.
DatasetManifest export_dataset(const SyntheticScene& scene,
                               const std::filesystem::path& dir);

}  // namespace sqsplat
