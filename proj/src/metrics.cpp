#include "sqsplat/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sqsplat/errors.hpp"
#include "sqsplat/kdtree.hpp"
#include "sqsplat/kernels.hpp"

namespace sqsplat {

namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;
constexpr double kPsnrCap = 100.0;

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b) {
  if (!a.same_shape(b))
    throw DimensionMismatch("image dimensions differ: " +
                            std::to_string(a.height) + "x" + std::to_string(a.width) +
                            " vs " + std::to_string(b.height) + "x" +
                            std::to_string(b.width));
}

std::vector<double> to_gray(const ImageBuffer& img) {
  std::vector<double> g(std::size_t(img.height) * img.width);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double* p = img.data.data() + i * 3;
    g[i] = (p[0] + p[1] + p[2]) / 3.0;
  }
  return g;
}

struct SsimTerms {
  double mu_a, mu_b, var_a, var_b, cov;
  double a1, a2, b1, b2;  // numerator/denominator factors
  double value;
};

SsimTerms ssim_terms(const std::vector<double>& ga, const std::vector<double>& gb) {
  const std::size_t n = ga.size();
  SsimTerms t;
  t.mu_a = kernels::sum(ga.data(), n) / double(n);
  t.mu_b = kernels::sum(gb.data(), n) / double(n);
  // E[x^2] - mu^2 form would lose precision; use centered sums.
  double sa = 0, sb = 0, sab = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = ga[i] - t.mu_a;
    const double db = gb[i] - t.mu_b;
    sa += da * da;
    sb += db * db;
    sab += da * db;
  }
  t.var_a = sa / double(n);
  t.var_b = sb / double(n);
  t.cov = sab / double(n);
  t.a1 = 2.0 * t.mu_a * t.mu_b + kC1;
  t.a2 = 2.0 * t.cov + kC2;
  t.b1 = t.mu_a * t.mu_a + t.mu_b * t.mu_b + kC1;
  t.b2 = t.var_a + t.var_b + kC2;
  t.value = (t.a1 * t.a2) / (t.b1 * t.b2);
  return t;
}

}  // namespace

double l1_image(const ImageBuffer& render, const ImageBuffer& truth) {
  require_same_shape(render, truth);
  return kernels::sum_abs_diff(render.data.data(), truth.data.data(),
                               render.count()) /
         double(render.count());
}

double mse_image(const ImageBuffer& render, const ImageBuffer& truth) {
  require_same_shape(render, truth);
  return kernels::sum_sq_diff(render.data.data(), truth.data.data(),
                              render.count()) /
         double(render.count());
}

double ssim(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b);
  if (&a == &b) return 1.0;
  const auto ga = to_gray(a);
  const auto gb = to_gray(b);
  if (ga == gb) return 1.0;  // SSIM(a, a) = 1 exactly
  return ssim_terms(ga, gb).value;
}

double ssim_windowed(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b);
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  if (a.height < kWin || a.width < kWin) return ssim(a, b);

  double w[kWin];
  double wsum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - (kWin - 1) / 2.0;
    w[i] = std::exp(-0.5 * d * d / (kSigma * kSigma));
    wsum += w[i];
  }
  for (double& v : w) v /= wsum;

  const auto ga = to_gray(a);
  const auto gb = to_gray(b);
  const int W = a.width;
  double total = 0.0;
  std::size_t windows = 0;
  for (int y = 0; y + kWin <= a.height; ++y) {
    for (int x = 0; x + kWin <= a.width; ++x) {
      double mu_a = 0, mu_b = 0;
      for (int i = 0; i < kWin; ++i)
        for (int j = 0; j < kWin; ++j) {
          const double wij = w[i] * w[j];
          mu_a += wij * ga[std::size_t(y + i) * W + (x + j)];
          mu_b += wij * gb[std::size_t(y + i) * W + (x + j)];
        }
      double va = 0, vb = 0, cov = 0;
      for (int i = 0; i < kWin; ++i)
        for (int j = 0; j < kWin; ++j) {
          const double wij = w[i] * w[j];
          const double da = ga[std::size_t(y + i) * W + (x + j)] - mu_a;
          const double db = gb[std::size_t(y + i) * W + (x + j)] - mu_b;
          va += wij * da * da;
          vb += wij * db * db;
          cov += wij * da * db;
        }
      const double a1 = 2 * mu_a * mu_b + kC1;
      const double a2 = 2 * cov + kC2;
      const double b1 = mu_a * mu_a + mu_b * mu_b + kC1;
      const double b2 = va + vb + kC2;
      total += (a1 * a2) / (b1 * b2);
      ++windows;
    }
  }
  return total / double(windows);
}

double psnr(const ImageBuffer& render, const ImageBuffer& truth) {
  const double mse = mse_image(render, truth);
  if (mse < 1e-10) return kPsnrCap;
  return std::min(kPsnrCap, 20.0 * std::log10(1.0 / std::sqrt(mse)));
}

namespace {

double chamfer_term_kd(const PointCloud& from, const KdTree3& to_tree) {
  double s = 0.0;
  for (const auto& p : from.points) s += to_tree.nearest(p).sqdist;
  return s / double(from.size());
}

}  // namespace

double chamfer(const PointCloud& s0, const PointCloud& s1) {
  if (s0.empty() || s1.empty()) throw EmptyCloud("chamfer: empty point cloud");
  const KdTree3 t0(s0.points);
  const KdTree3 t1(s1.points);
  return chamfer_term_kd(s0, t1) + chamfer_term_kd(s1, t0);
}

double chamfer_bruteforce(const PointCloud& s0, const PointCloud& s1) {
  if (s0.empty() || s1.empty()) throw EmptyCloud("chamfer: empty point cloud");
  auto soa = [](const PointCloud& c) {
    std::array<std::vector<double>, 3> v;
    for (auto& a : v) a.reserve(c.size());
    for (const auto& p : c.points) {
      v[0].push_back(p.x());
      v[1].push_back(p.y());
      v[2].push_back(p.z());
    }
    return v;
  };
  const auto a = soa(s0);
  const auto b = soa(s1);
  double term0 = 0.0;
  for (const auto& p : s0.points)
    term0 += kernels::min_sqdist(p.x(), p.y(), p.z(), b[0].data(), b[1].data(),
                                 b[2].data(), s1.size());
  double term1 = 0.0;
  for (const auto& p : s1.points)
    term1 += kernels::min_sqdist(p.x(), p.y(), p.z(), a[0].data(), a[1].data(),
                                 a[2].data(), s0.size());
  return term0 / double(s0.size()) + term1 / double(s1.size());
}

double model_chamfer(const GaussianModel& model, const PointCloud& truth) {
  const PointCloud means = model_means(model, 0.1);
  if (means.empty())
    throw EmptyCloud("model_chamfer: no Gaussian passes the opacity filter");
  return chamfer(means, truth);
}

LossComponents combined_loss(const ImageBuffer& render, const ImageBuffer& truth,
                             double beta) {
  LossComponents c;
  c.l1 = l1_image(render, truth);
  c.ssim = ssim(render, truth);
  c.total = (1.0 - beta) * c.l1 + beta * (1.0 - c.ssim);
  return c;
}

LossComponents combined_loss_with_grad(const ImageBuffer& render,
                                       const ImageBuffer& truth, double beta,
                                       std::vector<double>& grad_out) {
  require_same_shape(render, truth);
  const std::size_t n3 = render.count();
  const std::size_t n = n3 / 3;
  grad_out.assign(n3, 0.0);

  // L1 term; subgradient at 0 is 0.
  const double l1_w = (1.0 - beta) / double(n3);
  for (std::size_t i = 0; i < n3; ++i) {
    const double d = render.data[i] - truth.data[i];
    if (d > 0.0)
      grad_out[i] = l1_w;
    else if (d < 0.0)
      grad_out[i] = -l1_w;
  }

  const auto gr = to_gray(render);
  const auto gt = to_gray(truth);
  LossComponents c;
  c.l1 = kernels::sum_abs_diff(render.data.data(), truth.data.data(), n3) /
         double(n3);

  if (gr == gt) {
    c.ssim = 1.0;  // gradient of (1 - SSIM) at the exact optimum: use 0
  } else {
    // SSIM(I=truth, R=render); d(1-SSIM)/dR_k distributed over channels.
    const SsimTerms t = ssim_terms(gt, gr);
    c.ssim = t.value;
    const double inv = 1.0 / (t.b1 * t.b2);
    const double common = t.a1 * t.a2 * inv;
    for (std::size_t k = 0; k < n; ++k) {
      const double d_ssim =
          (2.0 / double(n)) *
          (t.mu_a * t.a2 * inv + (gt[k] - t.mu_a) * t.a1 * inv -
           t.mu_b * common / t.b1 - (gr[k] - t.mu_b) * common / t.b2);
      const double d_loss = beta * (-d_ssim) / 3.0;
      grad_out[k * 3 + 0] += d_loss;
      grad_out[k * 3 + 1] += d_loss;
      grad_out[k * 3 + 2] += d_loss;
    }
  }
  c.total = (1.0 - beta) * c.l1 + beta * (1.0 - c.ssim);
  return c;
}

// ---------------------------------------------------------------------------

ThresholdTracker::ThresholdTracker(std::vector<double> multipliers)
    : multipliers_(std::move(multipliers)) {}

void ThresholdTracker::update(const MetricsRecord& rec) {
  if (!entries_.empty() && rec.iteration < entries_.back().iteration)
    throw OutOfOrderRecord("tracker: iteration " + std::to_string(rec.iteration) +
                           " after " + std::to_string(entries_.back().iteration));
  if (entries_.empty() || rec.l1 < best_) best_ = rec.l1;
  entries_.push_back({rec.iteration, rec.wall_time_s, rec.l1});
}

ThresholdTracker::Summary ThresholdTracker::finalize() const {
  Summary s;
  if (entries_.empty()) return s;
  s.best = best_;
  for (double m : multipliers_) {
    const double threshold = m * s.best;
    for (const Entry& e : entries_) {
      if (e.metric <= threshold) {
        s.hits[multiplier_key(m)] = {e.iteration, e.time_s};
        break;
      }
    }
  }
  return s;
}

std::string ThresholdTracker::multiplier_key(double m) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", m);
  return buf;
}

// ---------------------------------------------------------------------------

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<MetricsRecord>& records) {
  std::ofstream f(path);
  if (!f) throw IoFailure("cannot open for writing: " + path.string());
  f << "iteration,wall_time_s,loss,l1,ssim,psnr,chamfer\n";
  char line[256];
  for (const auto& r : records) {
    std::snprintf(line, sizeof(line), "%lld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  static_cast<long long>(r.iteration), r.wall_time_s, r.loss,
                  r.l1, r.ssim, r.psnr, r.chamfer);
    f << line;
  }
  if (!f) throw IoFailure("write failed: " + path.string());
}

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoFailure("cannot open: " + path.string());
  std::string line;
  if (!std::getline(f, line) ||
      line != "iteration,wall_time_s,loss,l1,ssim,psnr,chamfer")
    throw IoFailure("bad metrics CSV header: " + path.string());
  std::vector<MetricsRecord> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    MetricsRecord r;
    long long iter = 0;
    if (std::sscanf(line.c_str(), "%lld,%lg,%lg,%lg,%lg,%lg,%lg", &iter,
                    &r.wall_time_s, &r.loss, &r.l1, &r.ssim, &r.psnr,
                    &r.chamfer) != 7)
      throw IoFailure("bad metrics CSV row: " + line);
    r.iteration = iter;
    out.push_back(r);
  }
  return out;
}

void write_tracker_json(const std::filesystem::path& path,
                        const ThresholdTracker::Summary& summary) {
  nlohmann::json doc;
  doc["best"] = summary.best;
  doc["hits"] = nlohmann::json::object();
  for (const auto& [key, hit] : summary.hits)
    doc["hits"][key] = {{"iter", hit.iteration}, {"time_s", hit.time_s}};
  std::ofstream f(path);
  if (!f) throw IoFailure("cannot open for writing: " + path.string());
  f << doc.dump(2) << "\n";
}

ThresholdTracker::Summary read_tracker_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoFailure("cannot open: " + path.string());
  nlohmann::json doc;
  try {
    f >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoFailure("bad tracker JSON " + path.string() + ": " + e.what());
  }
  ThresholdTracker::Summary s;
  s.best = doc.at("best");
  for (const auto& [key, val] : doc.at("hits").items())
    s.hits[key] = {val.at("iter"), val.at("time_s")};
  return s;
}

}  // namespace sqsplat
