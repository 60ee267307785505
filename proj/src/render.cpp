#include "sqsplat/render.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "sqsplat/rotation.hpp"

namespace sqsplat {

namespace {

constexpr int kBandRows = 16;

double max_eigenvalue_2x2(const Eigen::Matrix2d& m) {
  const double mid = 0.5 * (m(0, 0) + m(1, 1));
  const double off = 0.5 * (m(0, 0) - m(1, 1));
  return mid + std::sqrt(off * off + m(0, 1) * m(1, 0));
}

std::vector<ProjectedGaussian> project_and_sort(const GaussianModel& model,
                                                const CameraView& cam) {
  std::vector<ProjectedGaussian> out;
  out.reserve(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    auto p = project(model.gaussians[i], cam, model.active_sh_degree);
    if (!p) continue;
    p->source_index = int(i);
    out.push_back(*p);
  }
  std::sort(out.begin(), out.end(),
            [](const ProjectedGaussian& a, const ProjectedGaussian& b) {
              if (a.depth != b.depth) return a.depth < b.depth;
              return a.source_index < b.source_index;
            });
  return out;
}

// Rasterize the rows [y0, y1) of one band. Gaussians arrive depth-sorted, so
// each pixel sees its contributions front to back.
template <bool WithCache>
void rasterize_band(const std::vector<ProjectedGaussian>& sorted, int width,
                    int y0, int y1, double* raw, double* transmittance,
                    std::vector<std::vector<CacheEntry>>* pixels) {
  for (std::int32_t gi = 0; gi < std::int32_t(sorted.size()); ++gi) {
    const ProjectedGaussian& g = sorted[gi];
    const double r = g.radius;
    const int gx0 = std::max(0, int(std::ceil(g.mean2d.x() - r)));
    const int gx1 = std::min(width - 1, int(std::floor(g.mean2d.x() + r)));
    const int gy0 = std::max(y0, int(std::ceil(g.mean2d.y() - r)));
    const int gy1 = std::min(y1 - 1, int(std::floor(g.mean2d.y() + r)));
    if (gx0 > gx1 || gy0 > gy1) continue;
    const double a = g.conic(0, 0), b = g.conic(0, 1), c = g.conic(1, 1);
    for (int y = gy0; y <= gy1; ++y) {
      const double dy = double(y) - g.mean2d.y();
      for (int x = gx0; x <= gx1; ++x) {
        const std::size_t pix = std::size_t(y) * width + x;
        double& T = transmittance[pix];
        if (T < kTransmittanceStop) continue;
        const double dx = double(x) - g.mean2d.x();
        const double power = -0.5 * (a * dx * dx + c * dy * dy) - b * dx * dy;
        if (power > 0.0) continue;  // numerical guard; exponent must be <= 0
        const double alpha = std::min(kAlphaMax, g.opacity * std::exp(power));
        if (alpha < kAlphaMin) continue;
        double* px = raw + pix * 3;
        const double w = alpha * T;
        px[0] += g.color.x() * w;
        px[1] += g.color.y() * w;
        px[2] += g.color.z() * w;
        if constexpr (WithCache) (*pixels)[pix].push_back({gi, alpha, T});
        T *= (1.0 - alpha);
      }
    }
  }
}

template <bool WithCache>
void rasterize(const std::vector<ProjectedGaussian>& sorted, int height,
               int width, int threads, double* raw, double* transmittance,
               std::vector<std::vector<CacheEntry>>* pixels) {
  const int n_bands = (height + kBandRows - 1) / kBandRows;
  auto run_band = [&](int band) {
    const int y0 = band * kBandRows;
    const int y1 = std::min(height, y0 + kBandRows);
    rasterize_band<WithCache>(sorted, width, y0, y1, raw, transmittance, pixels);
  };
  if (threads <= 1 || n_bands <= 1) {
    for (int band = 0; band < n_bands; ++band) run_band(band);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int band = next.fetch_add(1); band < n_bands; band = next.fetch_add(1))
      run_band(band);
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min(threads, n_bands);
  pool.reserve(n_threads - 1);
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

ImageBuffer clamp_to_image(const std::vector<double>& raw, int height, int width) {
  ImageBuffer img(height, width);
  for (std::size_t i = 0; i < raw.size(); ++i)
    img.data[i] = std::clamp(raw[i], 0.0, 1.0);
  return img;
}

}  // namespace

std::optional<ProjectedGaussian> project(const Gaussian3D& g,
                                         const CameraView& cam, int sh_degree) {
  const Eigen::Vector3d mu_cam = cam.to_camera(g.mean);
  const double z = mu_cam.z();
  if (z <= kNearPlane) return std::nullopt;
  const double x = mu_cam.x(), y = mu_cam.y();

  ProjectedGaussian p;
  p.mean2d = {cam.fx * x / z + cam.cx, cam.fy * y / z + cam.cy};
  p.depth = z;

  Eigen::Matrix<double, 2, 3> J;
  J << cam.fx / z, 0.0, -cam.fx * x / (z * z),
       0.0, cam.fy / z, -cam.fy * y / (z * z);
  const Eigen::Matrix3d M = cam.R_cw.dcm * covariance(g) * cam.R_cw.dcm.transpose();
  p.cov2d = J * M * J.transpose() + kCovBlurFloor * Eigen::Matrix2d::Identity();
  p.radius = 3.0 * std::sqrt(max_eigenvalue_2x2(p.cov2d));

  if (p.mean2d.x() < -p.radius || p.mean2d.x() > (cam.width - 1) + p.radius ||
      p.mean2d.y() < -p.radius || p.mean2d.y() > (cam.height - 1) + p.radius)
    return std::nullopt;

  const double det = p.cov2d.determinant();
  p.conic << p.cov2d(1, 1) / det, -p.cov2d(0, 1) / det,
             -p.cov2d(1, 0) / det, p.cov2d(0, 0) / det;

  p.color = eval_sh_color(g, (g.mean - cam.center()).normalized(), sh_degree);
  p.opacity = sigmoid(g.opacity_logit);
  return p;
}

ImageBuffer render(const GaussianModel& model, const CameraView& cam,
                   int threads) {
  const auto sorted = project_and_sort(model, cam);
  std::vector<double> raw(std::size_t(cam.height) * cam.width * 3, 0.0);
  std::vector<double> transmittance(std::size_t(cam.height) * cam.width, 1.0);
  rasterize<false>(sorted, cam.height, cam.width, threads, raw.data(),
                   transmittance.data(), nullptr);
  return clamp_to_image(raw, cam.height, cam.width);
}

std::pair<ImageBuffer, CompositingCache> render_with_cache(
    const GaussianModel& model, const CameraView& cam, int threads) {
  CompositingCache cache;
  cache.height = cam.height;
  cache.width = cam.width;
  cache.projected = project_and_sort(model, cam);
  cache.pixels.resize(std::size_t(cam.height) * cam.width);
  cache.raw_color.assign(std::size_t(cam.height) * cam.width * 3, 0.0);
  std::vector<double> transmittance(std::size_t(cam.height) * cam.width, 1.0);
  rasterize<true>(cache.projected, cam.height, cam.width, threads,
                  cache.raw_color.data(), transmittance.data(), &cache.pixels);
  return {clamp_to_image(cache.raw_color, cam.height, cam.width),
          std::move(cache)};
}

}  // namespace sqsplat
