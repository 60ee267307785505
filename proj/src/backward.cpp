#include "sqsplat/backward.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "sqsplat/render.hpp"
#include "sqsplat/rotation.hpp"

namespace sqsplat {

namespace {

constexpr int kBandRows = 16;

// Per-projected-Gaussian accumulators for the image-space stage.
struct ScreenAccum {
  std::vector<Eigen::Vector3d> color;
  std::vector<double> alpha;  // dL/d opacity (post-sigmoid)
  std::vector<Eigen::Vector2d> mean2d;
  std::vector<Eigen::Matrix2d> conic;

  explicit ScreenAccum(std::size_t n)
      : color(n, Eigen::Vector3d::Zero()),
        alpha(n, 0.0),
        mean2d(n, Eigen::Vector2d::Zero()),
        conic(n, Eigen::Matrix2d::Zero()) {}

  void add(const ScreenAccum& o) {
    for (std::size_t i = 0; i < color.size(); ++i) {
      color[i] += o.color[i];
      alpha[i] += o.alpha[i];
      mean2d[i] += o.mean2d[i];
      conic[i] += o.conic[i];
    }
  }
};

// Reverse replay of the rows [y0, y1). dL/dC comes in per clamped-image
// entry; raw compositing output always lies in [0,1] against a black
// background, so the clamp is a pass-through.
void replay_band(const CompositingCache& cache, const std::vector<double>& dL_dC,
                 int y0, int y1, ScreenAccum& acc) {
  const int width = cache.width;
  for (int y = y0; y < y1; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t pix = std::size_t(y) * width + x;
      const auto& list = cache.pixels[pix];
      if (list.empty()) continue;
      const Eigen::Vector3d dC(dL_dC[pix * 3 + 0], dL_dC[pix * 3 + 1],
                               dL_dC[pix * 3 + 2]);
      Eigen::Vector3d suffix = Eigen::Vector3d::Zero();  // sum of later terms
      for (std::size_t k = list.size(); k-- > 0;) {
        const CacheEntry& e = list[k];
        const ProjectedGaussian& g = cache.projected[e.proj];
        const double T = e.transmittance;
        const double w = e.alpha * T;

        acc.color[e.proj] += dC * w;

        const Eigen::Vector3d dC_dalpha = g.color * T - suffix / (1.0 - e.alpha);
        const double dL_dalpha_prime = dC.dot(dC_dalpha);
        suffix += g.color * w;

        if (e.alpha >= kAlphaMax) continue;  // clamped: opaque to gradients

        // alpha' = opacity * exp(power); exp(power) recovered by division.
        const double gexp = e.alpha / g.opacity;
        acc.alpha[e.proj] += dL_dalpha_prime * gexp;
        const double dL_dpower = dL_dalpha_prime * e.alpha;

        const Eigen::Vector2d d(double(x) - g.mean2d.x(),
                                double(y) - g.mean2d.y());
        acc.mean2d[e.proj] += dL_dpower * (g.conic * d);
        const double hx = -0.5 * d.x() * d.x();
        const double hxy = -0.5 * d.x() * d.y();
        const double hy = -0.5 * d.y() * d.y();
        Eigen::Matrix2d dpower_dconic;
        dpower_dconic << hx, hxy, hxy, hy;
        acc.conic[e.proj] += dL_dpower * dpower_dconic;
      }
    }
  }
}

}  // namespace

BackwardResult backward(const GaussianModel& model, const CameraView& cam,
                        const ImageBuffer& truth, double beta, int threads) {
  auto [image, cache] = render_with_cache(model, cam, threads);

  BackwardResult out;
  std::vector<double> dL_dC;
  out.loss = combined_loss_with_grad(image, truth, beta, dL_dC);
  out.grads.resize(model.size());

  const std::size_t n_proj = cache.projected.size();
  const int n_bands = (cam.height + kBandRows - 1) / kBandRows;

  // Image-space stage: band-parallel with a fixed reduction order, so the
  // result is independent of the thread schedule.
  std::vector<ScreenAccum> band_acc(n_bands, ScreenAccum(n_proj));
  {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int band = next.fetch_add(1); band < n_bands;
           band = next.fetch_add(1)) {
        const int y0 = band * kBandRows;
        const int y1 = std::min(cam.height, y0 + kBandRows);
        replay_band(cache, dL_dC, y0, y1, band_acc[band]);
      }
    };
    const int n_threads = std::max(1, std::min(threads, n_bands));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
  }
  ScreenAccum acc(n_proj);
  for (const auto& b : band_acc) acc.add(b);

  // Parameter-space stage: chain each projected Gaussian's screen gradients
  // back to the 3D parameters.
  const Eigen::Matrix3d& Rcw = cam.R_cw.dcm;
  const Eigen::Vector3d cam_center = cam.center();
  const int sh_count = (model.active_sh_degree + 1) * (model.active_sh_degree + 1);

  for (std::size_t pi = 0; pi < n_proj; ++pi) {
    const ProjectedGaussian& p = cache.projected[pi];
    const Gaussian3D& g = model.gaussians[p.source_index];
    GaussianGrad& gg = out.grads.g[p.source_index];
    out.grads.visible[p.source_index] = 1;

    const Eigen::Vector3d mu_cam = cam.to_camera(g.mean);
    const double z = mu_cam.z();
    const double inv_z = 1.0 / z;
    const double inv_z2 = inv_z * inv_z;

    Eigen::Matrix<double, 2, 3> J;
    J << cam.fx * inv_z, 0.0, -cam.fx * mu_cam.x() * inv_z2,
         0.0, cam.fy * inv_z, -cam.fy * mu_cam.y() * inv_z2;

    const Eigen::Matrix3d Q = quat_to_matrix(g.rot_quat);
    const Eigen::Vector3d s2 = (2.0 * g.log_scale).array().exp();
    const Eigen::Matrix3d sigma = Q * s2.asDiagonal() * Q.transpose();
    const Eigen::Matrix3d M = Rcw * sigma * Rcw.transpose();

    Eigen::Vector3d d_mu_cam = J.transpose() * acc.mean2d[pi];

    // Covariance path: conic -> cov2d -> M (and J) -> Sigma -> factors.
    const Eigen::Matrix2d g_cov = -p.conic * acc.conic[pi] * p.conic;
    const Eigen::Matrix3d g_M = J.transpose() * g_cov * J;
    const Eigen::Matrix<double, 2, 3> g_J = 2.0 * g_cov * J * M;
    d_mu_cam.x() += g_J(0, 2) * (-cam.fx * inv_z2);
    d_mu_cam.y() += g_J(1, 2) * (-cam.fy * inv_z2);
    d_mu_cam.z() += g_J(0, 0) * (-cam.fx * inv_z2) +
                    g_J(0, 2) * (2.0 * cam.fx * mu_cam.x() * inv_z2 * inv_z) +
                    g_J(1, 1) * (-cam.fy * inv_z2) +
                    g_J(1, 2) * (2.0 * cam.fy * mu_cam.y() * inv_z2 * inv_z);

    const Eigen::Matrix3d g_sigma = Rcw.transpose() * g_M * Rcw;
    const Eigen::Matrix3d qs = Q.transpose() * g_sigma * Q;
    for (int k = 0; k < 3; ++k)
      gg.log_scale[k] += qs(k, k) * 2.0 * s2[k];
    const Eigen::Matrix3d g_Q = 2.0 * g_sigma * Q * s2.asDiagonal();
    const auto dQ_dq = quat_to_matrix_jacobian(g.rot_quat);
    for (int k = 0; k < 4; ++k)
      gg.rot_quat[k] += (g_Q.array() * dQ_dq[k].array()).sum();

    // Color path: clamped SH color; the clamp gates both the coefficient and
    // the view-direction gradients per channel.
    const Eigen::Vector3d view_vec = g.mean - cam_center;
    const double view_norm = view_vec.norm();
    const Eigen::Vector3d dir = view_vec / view_norm;
    double basis[16];
    Eigen::Vector3d basis_grad[16];
    sh_basis_with_grad(dir, basis, basis_grad);
    Eigen::Vector3d raw = Eigen::Vector3d::Constant(0.5);
    for (int k = 0; k < sh_count; ++k) raw += g.sh_coeffs.col(k) * basis[k];
    Eigen::Vector3d d_dir = Eigen::Vector3d::Zero();
    for (int ch = 0; ch < 3; ++ch) {
      if (!(raw[ch] > 0.0 && raw[ch] < 1.0)) continue;
      const double d_raw = acc.color[pi][ch];
      for (int k = 0; k < sh_count; ++k) {
        gg.sh(ch, k) += d_raw * basis[k];
        d_dir += d_raw * g.sh_coeffs(ch, k) * basis_grad[k];
      }
    }
    const Eigen::Vector3d d_view =
        (d_dir - dir * dir.dot(d_dir)) / view_norm;

    // Opacity path.
    const double a = p.opacity;
    gg.opacity_logit += acc.alpha[pi] * a * (1.0 - a);

    // Mean collects the projection, Jacobian, and view-direction terms.
    gg.mean += Rcw.transpose() * d_mu_cam + d_view;

    // Densification statistic: positional gradient in NDC-like units.
    const double gx = acc.mean2d[pi].x() * (cam.width * 0.5);
    const double gy = acc.mean2d[pi].y() * (cam.height * 0.5);
    out.grads.grad2d_norm[p.source_index] = std::sqrt(gx * gx + gy * gy);
  }

  out.render = std::move(image);
  return out;
}

}  // namespace sqsplat
