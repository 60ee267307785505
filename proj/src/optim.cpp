#include "sqsplat/optim.hpp"

#include <bit>
#include <cmath>
#include <fstream>

#include "sqsplat/errors.hpp"

namespace sqsplat {

namespace {

// Flattened view over one gradient-shaped record: 59 doubles.
constexpr int kDoublesPerGaussian = 59;

void flatten(const GaussianGrad& g, double* out) {
  int o = 0;
  for (int i = 0; i < 3; ++i) out[o++] = g.mean[i];
  for (int i = 0; i < 3; ++i) out[o++] = g.log_scale[i];
  for (int i = 0; i < 4; ++i) out[o++] = g.rot_quat[i];
  out[o++] = g.opacity_logit;
  for (int ch = 0; ch < 3; ++ch)
    for (int k = 0; k < 16; ++k) out[o++] = g.sh(ch, k);
}

void unflatten(const double* in, GaussianGrad& g) {
  int o = 0;
  for (int i = 0; i < 3; ++i) g.mean[i] = in[o++];
  for (int i = 0; i < 3; ++i) g.log_scale[i] = in[o++];
  for (int i = 0; i < 4; ++i) g.rot_quat[i] = in[o++];
  g.opacity_logit = in[o++];
  for (int ch = 0; ch < 3; ++ch)
    for (int k = 0; k < 16; ++k) g.sh(ch, k) = in[o++];
}

}  // namespace

void AdamOptimizer::resize(std::size_t n) {
  m_.assign(n, {});
  v_.assign(n, {});
  t_ = 0;
}

void AdamOptimizer::step(GaussianModel& model, const GradientBuffer& grads,
                         const LearningRates& lr, double scene_extent) {
  const std::size_t n = model.size();
  if (grads.g.size() != n || m_.size() != n)
    throw ShapeMismatch("adam: model/gradient/moment sizes disagree");

  ++t_;
  const double bc1 = 1.0 - std::pow(kBeta1, double(t_));
  const double bc2 = 1.0 - std::pow(kBeta2, double(t_));

  auto adam = [&](double& param, double& m, double& v, double g, double rate) {
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g * g;
    param -= rate * (m / bc1) / (std::sqrt(v / bc2) + kEps);
  };

  const double lr_mean = lr.mean * scene_extent;
  for (std::size_t i = 0; i < n; ++i) {
    Gaussian3D& p = model.gaussians[i];
    const GaussianGrad& g = grads.g[i];
    GaussianGrad& m = m_[i];
    GaussianGrad& v = v_[i];

    for (int k = 0; k < 3; ++k)
      adam(p.mean[k], m.mean[k], v.mean[k], g.mean[k], lr_mean);
    for (int k = 0; k < 3; ++k)
      adam(p.log_scale[k], m.log_scale[k], v.log_scale[k], g.log_scale[k],
           lr.scale);
    for (int k = 0; k < 4; ++k)
      adam(p.rot_quat[k], m.rot_quat[k], v.rot_quat[k], g.rot_quat[k],
           lr.rotation);
    adam(p.opacity_logit, m.opacity_logit, v.opacity_logit, g.opacity_logit,
         lr.opacity);
    for (int ch = 0; ch < 3; ++ch) {
      adam(p.sh_coeffs(ch, 0), m.sh(ch, 0), v.sh(ch, 0), g.sh(ch, 0), lr.sh_dc);
      for (int k = 1; k < 16; ++k)
        adam(p.sh_coeffs(ch, k), m.sh(ch, k), v.sh(ch, k), g.sh(ch, k),
             lr.sh_rest);
    }

    const double qn = p.rot_quat.norm();
    if (qn > 1e-12)
      p.rot_quat /= qn;
    else
      p.rot_quat = Eigen::Vector4d(1, 0, 0, 0);
    const double lo = std::log(Gaussian3D::kScaleMin);
    const double hi = std::log(Gaussian3D::kScaleMax);
    for (int k = 0; k < 3; ++k)
      p.log_scale[k] = std::clamp(p.log_scale[k], lo, hi);
  }
}

void AdamOptimizer::remap(const std::vector<std::int32_t>& source_of_new) {
  std::vector<GaussianGrad> nm(source_of_new.size());
  std::vector<GaussianGrad> nv(source_of_new.size());
  for (std::size_t i = 0; i < source_of_new.size(); ++i) {
    const std::int32_t s = source_of_new[i];
    if (s >= 0) {
      nm[i] = m_[s];
      nv[i] = v_[s];
    }
  }
  m_ = std::move(nm);
  v_ = std::move(nv);
}

void AdamOptimizer::save(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoFailure("cannot open for writing: " + path.string());
  const char magic[8] = {'S', 'Q', 'A', 'D', 'A', 'M', '1', '\n'};
  f.write(magic, 8);
  const std::uint64_t n = m_.size();
  const std::int64_t t = t_;
  f.write(reinterpret_cast<const char*>(&t), 8);
  f.write(reinterpret_cast<const char*>(&n), 8);
  std::vector<double> row(kDoublesPerGaussian);
  for (const auto* buf : {&m_, &v_}) {
    for (const auto& g : *buf) {
      flatten(g, row.data());
      f.write(reinterpret_cast<const char*>(row.data()),
              kDoublesPerGaussian * 8);
    }
  }
  if (!f) throw IoFailure("write failed: " + path.string());
}

AdamOptimizer AdamOptimizer::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoFailure("cannot open: " + path.string());
  char magic[8];
  f.read(magic, 8);
  if (std::string(magic, 8) != "SQADAM1\n")
    throw IoFailure("bad optimizer checkpoint: " + path.string());
  AdamOptimizer opt;
  std::uint64_t n = 0;
  f.read(reinterpret_cast<char*>(&opt.t_), 8);
  f.read(reinterpret_cast<char*>(&n), 8);
  opt.m_.resize(n);
  opt.v_.resize(n);
  std::vector<double> row(kDoublesPerGaussian);
  for (auto* buf : {&opt.m_, &opt.v_}) {
    for (auto& g : *buf) {
      f.read(reinterpret_cast<char*>(row.data()), kDoublesPerGaussian * 8);
      unflatten(row.data(), g);
    }
  }
  if (!f) throw IoFailure("truncated optimizer checkpoint: " + path.string());
  return opt;
}

}  // namespace sqsplat
