#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sqsplat/gaussian.hpp"
#include "sqsplat/image.hpp"
#include "sqsplat/pointcloud.hpp"

namespace sqsplat {

/// Mean absolute per-entry difference over all H*W*3 values.
double l1_image(const ImageBuffer& render, const ImageBuffer& truth);

/// Mean squared per-entry difference.
double mse_image(const ImageBuffer& render, const ImageBuffer& truth);

/// Global (whole-image, single-window) SSIM on grayscale = channel mean,
/// with C1 = 0.01^2 and C2 = 0.03^2 for unit dynamic range. This is the
/// form used by the training loss.
double ssim(const ImageBuffer& a, const ImageBuffer& b);

/// Conventional 11x11 Gaussian-window (sigma 1.5) SSIM, averaged over valid
/// windows. Evaluation-only alternative; same interface, not the default.
double ssim_windowed(const ImageBuffer& a, const ImageBuffer& b);

/// 20 log10(1 / sqrt(MSE)) in dB, capped at 100 (MSE < 1e-10 counts as 0).
double psnr(const ImageBuffer& render, const ImageBuffer& truth);

/// Symmetric mean squared nearest-neighbor distance (spatial index route).
double chamfer(const PointCloud& s0, const PointCloud& s1);

/// All-pairs oracle; agrees with chamfer() to strict tolerance.
double chamfer_bruteforce(const PointCloud& s0, const PointCloud& s1);

/// Chamfer between means of Gaussians with opacity > 0.1 and `truth`.
double model_chamfer(const GaussianModel& model, const PointCloud& truth);

struct LossComponents {
  double total = 0.0;
  double l1 = 0.0;
  double ssim = 0.0;
};

/// L = (1 - beta) * L1 + beta * (1 - SSIM).
LossComponents combined_loss(const ImageBuffer& render, const ImageBuffer& truth,
                             double beta);

/// Loss plus its exact gradient with respect to every render entry
/// (d total / d render[i], H*W*3 values). The renderer's clamp to [0,1] is
/// applied by the caller on raw compositing output; this gradient is with
/// respect to the clamped image.
LossComponents combined_loss_with_grad(const ImageBuffer& render,
                                       const ImageBuffer& truth, double beta,
                                       std::vector<double>& grad_out);

struct MetricsRecord {
  std::int64_t iteration = 0;
  double wall_time_s = 0.0;
  double loss = 0.0;
  double l1 = 0.0;
  double ssim = 0.0;
  double psnr = 0.0;
  double chamfer = 0.0;
};

/// Time/iterations until the tracked metric (L1) first drops below
/// multiplier * best, where best is the minimum over the whole run and is
/// only known after the run; hits are therefore resolved in finalize().
class ThresholdTracker {
 public:
  explicit ThresholdTracker(std::vector<double> multipliers = {2.0, 1.5, 1.1});

  /// Records must arrive in nondecreasing iteration order.
  void update(const MetricsRecord& rec);

  double best_metric() const { return best_; }

  struct Hit {
    std::int64_t iteration = 0;
    double time_s = 0.0;
  };
  struct Summary {
    double best = 0.0;
    std::map<std::string, Hit> hits;  // key: multiplier at one decimal
  };
  Summary finalize() const;

  const std::vector<double>& multipliers() const { return multipliers_; }

  static std::string multiplier_key(double m);

 private:
  struct Entry {
    std::int64_t iteration;
    double time_s;
    double metric;
  };
  std::vector<double> multipliers_;
  std::vector<Entry> entries_;
  double best_ = 0.0;
};

/// CSV log: iteration,wall_time_s,loss,l1,ssim,psnr,chamfer with 9
/// significant digits.
void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path);

/// Tracker summary as JSON {"best":..., "hits":{"2.0":{"iter":...,
/// "time_s":...}, ...}}.
void write_tracker_json(const std::filesystem::path& path,
                        const ThresholdTracker::Summary& summary);
ThresholdTracker::Summary read_tracker_json(const std::filesystem::path& path);

}  // namespace sqsplat
