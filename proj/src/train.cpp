#include "sqsplat/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "sqsplat/errors.hpp"
#include "sqsplat/rotation.hpp"

namespace sqsplat {

TrainConfig TrainConfig::preset(const std::string& name) {
  TrainConfig c;
  if (name == "rt-poses") {
    c.sh_degree_init = 2;
    c.sh_increase_interval = 1000;
    c.densify_start_iter = 500;
  } else if (name == "est-poses") {
    c.sh_degree_init = 1;
    c.sh_increase_interval = 500;
    c.densify_start_iter = 100;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return c;
}

namespace {

nlohmann::json config_to_json(const TrainConfig& c) {
  return {
      {"beta", c.beta},
      {"steps_per_image", c.steps_per_image},
      {"total_iterations", c.total_iterations},
      {"sh_degree_init", c.sh_degree_init},
      {"sh_degree_max", c.sh_degree_max},
      {"sh_increase_interval", c.sh_increase_interval},
      {"densify_interval", c.densify_interval},
      {"densify_start_iter", c.densify_start_iter},
      {"lr",
       {{"mean", c.lr.mean},
        {"opacity", c.lr.opacity},
        {"scale", c.lr.scale},
        {"rotation", c.lr.rotation},
        {"sh_dc", c.lr.sh_dc},
        {"sh_rest", c.lr.sh_rest}}},
      {"densify_grad_threshold", c.densify_grad_threshold},
      {"prune_opacity_threshold", c.prune_opacity_threshold},
      {"split_scale_threshold", c.split_scale_threshold},
      {"split_factor", c.split_factor},
      {"opacity_reset", c.opacity_reset},
      {"opacity_reset_interval", c.opacity_reset_interval},
      {"checkpoint_interval", c.checkpoint_interval},
      {"scene_extent", c.scene_extent},
      {"threads", c.threads},
      {"seed", c.seed},
  };
}

TrainConfig config_from_json(const nlohmann::json& j, TrainConfig c) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("beta", c.beta);
  get("steps_per_image", c.steps_per_image);
  get("total_iterations", c.total_iterations);
  get("sh_degree_init", c.sh_degree_init);
  get("sh_degree_max", c.sh_degree_max);
  get("sh_increase_interval", c.sh_increase_interval);
  get("densify_interval", c.densify_interval);
  get("densify_start_iter", c.densify_start_iter);
  if (j.contains("lr")) {
    const auto& l = j.at("lr");
    auto getl = [&](const char* key, double& field) {
      if (l.contains(key)) field = l.at(key).get<double>();
    };
    getl("mean", c.lr.mean);
    getl("opacity", c.lr.opacity);
    getl("scale", c.lr.scale);
    getl("rotation", c.lr.rotation);
    getl("sh_dc", c.lr.sh_dc);
    getl("sh_rest", c.lr.sh_rest);
  }
  get("densify_grad_threshold", c.densify_grad_threshold);
  get("prune_opacity_threshold", c.prune_opacity_threshold);
  get("split_scale_threshold", c.split_scale_threshold);
  get("split_factor", c.split_factor);
  get("opacity_reset", c.opacity_reset);
  get("opacity_reset_interval", c.opacity_reset_interval);
  get("checkpoint_interval", c.checkpoint_interval);
  get("scene_extent", c.scene_extent);
  get("threads", c.threads);
  get("seed", c.seed);
  return c;
}

}  // namespace

void save_train_config(const std::filesystem::path& path, const TrainConfig& c) {
  std::ofstream f(path);
  if (!f) throw IoFailure("cannot open for writing: " + path.string());
  f << config_to_json(c).dump(2) << "\n";
}

TrainConfig load_train_config(const std::filesystem::path& path,
                              TrainConfig base) {
  std::ifstream f(path);
  if (!f) throw IoFailure("cannot open: " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoFailure("bad config JSON " + path.string() + ": " + e.what());
  }
  return config_from_json(j, base);
}

TrainConfig merge_train_config(const std::string& json_text, TrainConfig base) {
  return config_from_json(nlohmann::json::parse(json_text), base);
}

std::string train_config_json(const TrainConfig& c) {
  return config_to_json(c).dump(2);
}

void densify_and_prune(GaussianModel& model, DensifyStats& stats,
                       AdamOptimizer& opt, const TrainConfig& config, Rng& rng) {
  const std::size_t n = model.size();
  const double split_threshold = config.split_scale_threshold * config.scene_extent;

  std::vector<Gaussian3D> next;
  std::vector<std::int32_t> source;
  next.reserve(n + n / 8);
  source.reserve(n + n / 8);

  std::vector<std::int32_t> clones;
  std::vector<std::int32_t> splits;
  for (std::size_t i = 0; i < n; ++i) {
    const Gaussian3D& g = model.gaussians[i];
    if (sigmoid(g.opacity_logit) < config.prune_opacity_threshold) continue;
    const double mean_grad =
        stats.count[i] > 0 ? stats.grad_sum[i] / double(stats.count[i]) : 0.0;
    if (mean_grad > config.densify_grad_threshold) {
      const double max_scale = std::exp(g.log_scale.maxCoeff());
      if (max_scale < split_threshold) {
        next.push_back(g);  // keep the original, clone appended below
        source.push_back(std::int32_t(i));
        clones.push_back(std::int32_t(i));
      } else {
        splits.push_back(std::int32_t(i));  // parent replaced by two children
      }
    } else {
      next.push_back(g);
      source.push_back(std::int32_t(i));
    }
  }

  for (std::int32_t i : clones) {
    next.push_back(model.gaussians[i]);
    source.push_back(-1);
  }
  for (std::int32_t i : splits) {
    const Gaussian3D& parent = model.gaussians[i];
    const Eigen::Matrix3d R = quat_to_matrix(parent.rot_quat);
    const Eigen::Vector3d s = parent.log_scale.array().exp();
    for (int child = 0; child < 2; ++child) {
      Gaussian3D c = parent;
      const Eigen::Vector3d draw(rng.normal(), rng.normal(), rng.normal());
      c.mean = parent.mean + R * (s.cwiseProduct(draw));
      c.log_scale =
          parent.log_scale - Eigen::Vector3d::Constant(std::log(config.split_factor));
      next.push_back(c);
      source.push_back(-1);
    }
  }

  model.gaussians = std::move(next);
  opt.remap(source);
  stats.resize(model.size());
}

TrainResult train_sequential(GaussianModel model, FrameStream& stream,
                             const TrainConfig& config,
                             const PointCloud* chamfer_truth,
                             const TrainCallbacks* callbacks) {
  TrainResult result;
  AdamOptimizer opt(model.size());
  DensifyStats stats;
  stats.resize(model.size());
  ThresholdTracker tracker;
  Rng rng(config.seed, "optimizer");

  const auto t0 = std::chrono::steady_clock::now();
  std::int64_t iter = 0;  // 0-based during a step; records are 1-based
  bool any_frame = false;

  while (iter < config.total_iterations) {
    const auto frame = stream.next();
    if (!frame) break;
    any_frame = true;
    const ImageBuffer& truth = *frame->first;
    const CameraView& cam = *frame->second;

    for (int s = 0; s < config.steps_per_image && iter < config.total_iterations;
         ++s) {
      model.active_sh_degree =
          std::min<int>(config.sh_degree_max,
                        config.sh_degree_init +
                            int(iter / config.sh_increase_interval));

      BackwardResult bw =
          backward(model, cam, truth, config.beta, config.threads);

      MetricsRecord rec;
      rec.iteration = iter + 1;
      rec.loss = bw.loss.total;
      rec.l1 = bw.loss.l1;
      rec.ssim = bw.loss.ssim;
      rec.psnr = psnr(bw.render, truth);

      if (!std::isfinite(bw.loss.total)) {
        result.diverged = true;
        result.diverged_at = rec.iteration;
        break;
      }

      opt.step(model, bw.grads, config.lr, config.scene_extent);
      stats.accumulate(bw.grads);
      ++iter;

      rec.chamfer = chamfer_truth ? model_chamfer(model, *chamfer_truth) : 0.0;
      rec.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      tracker.update(rec);
      result.log.push_back(rec);

      if (callbacks && callbacks->on_checkpoint &&
          config.checkpoint_interval > 0 &&
          iter % config.checkpoint_interval == 0)
        callbacks->on_checkpoint(iter, model, opt);

      if (iter >= config.densify_start_iter &&
          iter % config.densify_interval == 0 && iter < config.total_iterations)
        densify_and_prune(model, stats, opt, config, rng);

      if (config.opacity_reset && config.opacity_reset_interval > 0 &&
          iter % config.opacity_reset_interval == 0) {
        const double cap = logit(0.01);
        for (auto& g : model.gaussians)
          g.opacity_logit = std::min(g.opacity_logit, cap);
      }
    }
    if (result.diverged) break;
  }

  if (!any_frame) throw EmptyStream("train_sequential: no frames");

  result.model = std::move(model);
  result.tracker = tracker.finalize();
  return result;
}

GaussianModel initialize_model(InitStyle style, std::uint64_t seed, double extent,
                               const PrimitiveAssembly* assembly,
                               int points_per_primitive, double init_opacity,
                               const Eigen::Vector3d& base_color) {
  if (style == InitStyle::kRandom) {
    Rng rng(seed, "init");
    PointCloud pc;
    pc.points.reserve(kRandomInitPoints);
    for (int i = 0; i < kRandomInitPoints; ++i)
      pc.points.emplace_back(rng.uniform(-extent, extent),
                             rng.uniform(-extent, extent),
                             rng.uniform(-extent, extent));
    return from_pointcloud(pc, init_opacity, base_color);
  }
  if (!assembly || assembly->primitives.empty())
    throw MissingAssembly("initialize: primitives style requires an assembly");
  int ppp = points_per_primitive;
  if (ppp <= 0)
    ppp = std::max<int>(
        100, int(kRandomInitPoints / assembly->primitives.size()));
  return from_pointcloud(assembly_to_pointcloud(*assembly, ppp), init_opacity,
                         base_color);
}

}  // namespace sqsplat
