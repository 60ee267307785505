#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sqsplat/backward.hpp"
#include "sqsplat/gaussian.hpp"

namespace sqsplat {

/// Per-parameter-group learning rates. The mean rate is multiplied by the
/// scene extent at use so positional steps scale with the scene.
struct LearningRates {
  double mean = 1.6e-4;
  double opacity = 0.05;
  double scale = 5e-3;
  double rotation = 1e-3;
  double sh_dc = 2.5e-3;
  double sh_rest = 1.25e-4;
};

/// Adam with first/second moments mirroring the model layout. Moments are
/// remapped (survivors keep state, new Gaussians start at zero) whenever
/// densify/prune changes the model.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  explicit AdamOptimizer(std::size_t n) { resize(n); }

  void resize(std::size_t n);
  std::size_t size() const { return m_.size(); }
  std::int64_t step_count() const { return t_; }

  /// One update. Throws ShapeMismatch when the gradient buffer does not
  /// mirror the model. Renormalizes quaternions and clamps log scales to the
  /// representable range afterwards.
  void step(GaussianModel& model, const GradientBuffer& grads,
            const LearningRates& lr, double scene_extent);

  /// source_of_new[i] = previous index of new Gaussian i, or -1 for a fresh
  /// entry (zero moments).
  void remap(const std::vector<std::int32_t>& source_of_new);

  /// Binary checkpoint sidecar.
  void save(const std::filesystem::path& path) const;
  static AdamOptimizer load(const std::filesystem::path& path);

  const GaussianGrad& first_moment(std::size_t i) const { return m_[i]; }
  const GaussianGrad& second_moment(std::size_t i) const { return v_[i]; }

 private:
  std::vector<GaussianGrad> m_, v_;
  std::int64_t t_ = 0;

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
};

}  // namespace sqsplat
