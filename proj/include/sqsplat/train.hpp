#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqsplat/backward.hpp"
#include "sqsplat/metrics.hpp"
#include "sqsplat/optim.hpp"
#include "sqsplat/rng.hpp"
#include "sqsplat/superquadric.hpp"

namespace sqsplat {

struct TrainConfig {
  double beta = 0.2;
  int steps_per_image = 5;
  std::int64_t total_iterations = 1500;
  int sh_degree_init = 0;
  int sh_degree_max = 3;
  std::int64_t sh_increase_interval = 1000;
  std::int64_t densify_interval = 100;
  std::int64_t densify_start_iter = 500;
  LearningRates lr;
  double densify_grad_threshold = 2e-4;   // NDC-scaled positional grad
  double prune_opacity_threshold = 0.005;
  double split_scale_threshold = 0.01;    // fraction of scene extent
  double split_factor = 1.6;
  bool opacity_reset = false;             // off: not part of the 1500-iter regime
  std::int64_t opacity_reset_interval = 3000;
  std::int64_t checkpoint_interval = 500;
  double scene_extent = 1.0;
  int threads = 1;
  std::uint64_t seed = 0;

  /// Named hyperparameter columns: "rt-poses" (SH init 2, interval 1000,
  /// densify from 500) and "est-poses" (SH init 1, interval 500, densify
  /// from 100). Throws std::invalid_argument for unknown names.
  static TrainConfig preset(const std::string& name);
};

/// JSON round-trip; load merges over `base` so partial files are fine.
void save_train_config(const std::filesystem::path& path, const TrainConfig& c);
TrainConfig load_train_config(const std::filesystem::path& path,
                              TrainConfig base = {});
TrainConfig merge_train_config(const std::string& json_text, TrainConfig base);
std::string train_config_json(const TrainConfig& c);

/// Sequential source of (frame, view) pairs; each is consumed once.
class FrameStream {
 public:
  virtual ~FrameStream() = default;
  virtual std::optional<std::pair<const ImageBuffer*, const CameraView*>>
  next() = 0;
};

class VectorFrameStream final : public FrameStream {
 public:
  VectorFrameStream(const std::vector<ImageBuffer>* frames,
                    const std::vector<CameraView>* views)
      : frames_(frames), views_(views) {}
  std::optional<std::pair<const ImageBuffer*, const CameraView*>> next() override {
    if (i_ >= frames_->size() || i_ >= views_->size()) return std::nullopt;
    const std::size_t i = i_++;
    return std::make_pair(&(*frames_)[i], &(*views_)[i]);
  }

 private:
  const std::vector<ImageBuffer>* frames_;
  const std::vector<CameraView>* views_;
  std::size_t i_ = 0;
};

/// Accumulated densification statistics between densify/prune events.
struct DensifyStats {
  std::vector<double> grad_sum;      // sum of NDC positional gradient norms
  std::vector<std::int64_t> count;   // frames in which the Gaussian projected

  void resize(std::size_t n) {
    grad_sum.assign(n, 0.0);
    count.assign(n, 0);
  }
  void accumulate(const GradientBuffer& grads) {
    for (std::size_t i = 0; i < grads.visible.size(); ++i) {
      if (!grads.visible[i]) continue;
      grad_sum[i] += grads.grad2d_norm[i];
      ++count[i];
    }
  }
};

/// Clone/split Gaussians whose mean accumulated positional gradient exceeds
/// the threshold (clone below the size threshold, split into two above it,
/// children scales divided by split_factor, means drawn from the parent
/// density), prune Gaussians below the opacity threshold, remap optimizer
/// moments, and reset the statistics.
void densify_and_prune(GaussianModel& model, DensifyStats& stats,
                       AdamOptimizer& opt, const TrainConfig& config, Rng& rng);

struct TrainResult {
  GaussianModel model;
  std::vector<MetricsRecord> log;
  ThresholdTracker::Summary tracker;
  bool diverged = false;
  std::int64_t diverged_at = -1;
};

struct TrainCallbacks {
  std::function<void(std::int64_t iteration, const GaussianModel&,
                     const AdamOptimizer&)>
      on_checkpoint;
};

/// Per-image sequential training: steps_per_image optimizer steps against
/// each incoming frame, which is then discarded. SH degree ramps every
/// sh_increase_interval iterations; densify/prune runs on its schedule; a
/// MetricsRecord is appended every iteration (chamfer against `chamfer_truth`
/// when provided, else 0). Throws EmptyStream if the stream yields nothing.
TrainResult train_sequential(GaussianModel model, FrameStream& stream,
                             const TrainConfig& config,
                             const PointCloud* chamfer_truth = nullptr,
                             const TrainCallbacks* callbacks = nullptr);

enum class InitStyle { kRandom, kPrimitives };

inline constexpr int kRandomInitPoints = 5000;

/// random: kRandomInitPoints means uniform in the cube of half-width
/// `extent`. primitives: surface samples of the assembly (requires one;
/// throws MissingAssembly). points_per_primitive <= 0 picks
/// ~kRandomInitPoints / M so both styles start at comparable sizes.
GaussianModel initialize_model(InitStyle style, std::uint64_t seed, double extent,
                               const PrimitiveAssembly* assembly = nullptr,
                               int points_per_primitive = 0,
                               double init_opacity = 0.1,
                               const Eigen::Vector3d& base_color = {0.5, 0.5,
                                                                    0.5});

}  // namespace sqsplat
