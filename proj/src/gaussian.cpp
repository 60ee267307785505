#include "sqsplat/gaussian.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sqsplat/errors.hpp"
#include "sqsplat/kdtree.hpp"
#include "sqsplat/rotation.hpp"

namespace sqsplat {

namespace {

constexpr double kSH0 = 0.28209479177387814;
constexpr double kSH1 = 0.4886025119029199;
constexpr double kSH2[5] = {1.0925484305920792, -1.0925484305920792,
                            0.31539156525252005, -1.0925484305920792,
                            0.5462742152960396};
constexpr double kSH3[7] = {-0.5900435899266435, 2.890611442640554,
                            -0.4570457994644658, 0.3731763325901154,
                            -0.4570457994644658, 1.445305721320277,
                            -0.5900435899266435};

}  // namespace

void sh_basis(const Eigen::Vector3d& d, double out[16]) {
  const double x = d.x(), y = d.y(), z = d.z();
  const double xx = x * x, yy = y * y, zz = z * z;
  out[0] = kSH0;
  out[1] = -kSH1 * y;
  out[2] = kSH1 * z;
  out[3] = -kSH1 * x;
  out[4] = kSH2[0] * x * y;
  out[5] = kSH2[1] * y * z;
  out[6] = kSH2[2] * (2.0 * zz - xx - yy);
  out[7] = kSH2[3] * x * z;
  out[8] = kSH2[4] * (xx - yy);
  out[9] = kSH3[0] * y * (3.0 * xx - yy);
  out[10] = kSH3[1] * x * y * z;
  out[11] = kSH3[2] * y * (4.0 * zz - xx - yy);
  out[12] = kSH3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
  out[13] = kSH3[4] * x * (4.0 * zz - xx - yy);
  out[14] = kSH3[5] * z * (xx - yy);
  out[15] = kSH3[6] * x * (xx - 3.0 * yy);
}

void sh_basis_with_grad(const Eigen::Vector3d& d, double out[16],
                        Eigen::Vector3d grad[16]) {
  sh_basis(d, out);
  const double x = d.x(), y = d.y(), z = d.z();
  const double xx = x * x, yy = y * y, zz = z * z;
  grad[0].setZero();
  grad[1] = {0.0, -kSH1, 0.0};
  grad[2] = {0.0, 0.0, kSH1};
  grad[3] = {-kSH1, 0.0, 0.0};
  grad[4] = {kSH2[0] * y, kSH2[0] * x, 0.0};
  grad[5] = {0.0, kSH2[1] * z, kSH2[1] * y};
  grad[6] = {-2.0 * kSH2[2] * x, -2.0 * kSH2[2] * y, 4.0 * kSH2[2] * z};
  grad[7] = {kSH2[3] * z, 0.0, kSH2[3] * x};
  grad[8] = {2.0 * kSH2[4] * x, -2.0 * kSH2[4] * y, 0.0};
  grad[9] = {kSH3[0] * 6.0 * x * y, kSH3[0] * (3.0 * xx - 3.0 * yy), 0.0};
  grad[10] = {kSH3[1] * y * z, kSH3[1] * x * z, kSH3[1] * x * y};
  grad[11] = {-2.0 * kSH3[2] * x * y, kSH3[2] * (4.0 * zz - xx - 3.0 * yy),
              8.0 * kSH3[2] * y * z};
  grad[12] = {-6.0 * kSH3[3] * x * z, -6.0 * kSH3[3] * y * z,
              kSH3[3] * (6.0 * zz - 3.0 * xx - 3.0 * yy)};
  grad[13] = {kSH3[4] * (4.0 * zz - 3.0 * xx - yy), -2.0 * kSH3[4] * x * y,
              8.0 * kSH3[4] * x * z};
  grad[14] = {2.0 * kSH3[5] * x * z, -2.0 * kSH3[5] * y * z,
              kSH3[5] * (xx - yy)};
  grad[15] = {kSH3[6] * (3.0 * xx - 3.0 * yy), -6.0 * kSH3[6] * x * y, 0.0};
}

Eigen::Matrix3d covariance(const Gaussian3D& g) {
  const Eigen::Matrix3d R = quat_to_matrix(g.rot_quat);
  const Eigen::Vector3d s2 = (2.0 * g.log_scale).array().exp();
  return R * s2.asDiagonal() * R.transpose();
}

double eval_density(const Gaussian3D& g, const Eigen::Vector3d& x) {
  const Eigen::Matrix3d sigma = covariance(g);
  const double det = sigma.determinant();
  if (det < 1e-30) throw SingularCovariance("eval_density: |Sigma| < 1e-30");
  const Eigen::Vector3d d = x - g.mean;
  const double maha = d.dot(sigma.inverse() * d);
  return std::exp(-0.5 * maha) / (2.0 * M_PI * std::sqrt(det));
}

Eigen::Vector3d eval_sh_color(const Gaussian3D& g,
                              const Eigen::Vector3d& view_dir, int degree) {
  double basis[16];
  sh_basis(view_dir, basis);
  const int n = (degree + 1) * (degree + 1);
  Eigen::Vector3d c(0.5, 0.5, 0.5);
  for (int k = 0; k < n; ++k) c += g.sh_coeffs.col(k) * basis[k];
  return c.cwiseMax(0.0).cwiseMin(1.0);
}

GaussianModel from_pointcloud(const PointCloud& pc, double init_opacity,
                              const Eigen::Vector3d& base_color) {
  if (pc.empty()) throw EmptyCloud("from_pointcloud: empty cloud");

  double scale = 0.01;
  if (pc.size() > 1) {
    const KdTree3 tree(pc.points);
    double total = 0.0;
    for (std::size_t i = 0; i < pc.size(); ++i)
      total += std::sqrt(tree.nearest_excluding(pc.points[i], i).sqdist);
    scale = total / double(pc.size());
  }
  scale = std::clamp(scale, 1e-4, 0.5);

  GaussianModel model;
  model.active_sh_degree = 0;
  model.gaussians.resize(pc.size());
  const double log_sigma = std::log(scale);
  const double op_logit = logit(init_opacity);
  const Eigen::Vector3d dc = (base_color - Eigen::Vector3d::Constant(0.5)) / kSH0;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    Gaussian3D& g = model.gaussians[i];
    g.mean = pc.points[i];
    g.log_scale.setConstant(log_sigma);
    g.rot_quat = Eigen::Vector4d(1, 0, 0, 0);
    g.opacity_logit = op_logit;
    g.sh_coeffs.col(0) = dc;
  }
  return model;
}

PointCloud model_means(const GaussianModel& model, double min_opacity) {
  PointCloud out;
  out.points.reserve(model.size());
  for (const auto& g : model.gaussians)
    if (sigmoid(g.opacity_logit) > min_opacity) out.points.push_back(g.mean);
  return out;
}

// ---------------------------------------------------------------------------
// Binary PLY

namespace {

void put_le_double(std::string& buf, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i)
    buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double get_le_double(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::vector<std::string> canonical_properties() {
  std::vector<std::string> names = {"x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2"};
  for (int i = 0; i < 45; ++i) names.push_back("f_rest_" + std::to_string(i));
  names.push_back("opacity");
  for (int i = 0; i < 3; ++i) names.push_back("scale_" + std::to_string(i));
  for (int i = 0; i < 4; ++i) names.push_back("rot_" + std::to_string(i));
  return names;
}

}  // namespace

void save_gaussian_ply(const std::filesystem::path& path,
                       const GaussianModel& m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoFailure("cannot open for writing: " + path.string());

  std::ostringstream header;
  header << "ply\nformat binary_little_endian 1.0\n";
  header << "comment active_sh_degree " << m.active_sh_degree << "\n";
  header << "element vertex " << m.size() << "\n";
  for (const auto& name : canonical_properties())
    header << "property double " << name << "\n";
  header << "end_header\n";
  f << header.str();

  std::string buf;
  buf.reserve(m.size() * 59 * 8);
  for (const auto& g : m.gaussians) {
    for (int i = 0; i < 3; ++i) put_le_double(buf, g.mean[i]);
    for (int ch = 0; ch < 3; ++ch) put_le_double(buf, g.sh_coeffs(ch, 0));
    for (int ch = 0; ch < 3; ++ch)
      for (int k = 1; k < 16; ++k) put_le_double(buf, g.sh_coeffs(ch, k));
    put_le_double(buf, g.opacity_logit);
    for (int i = 0; i < 3; ++i) put_le_double(buf, g.log_scale[i]);
    for (int i = 0; i < 4; ++i) put_le_double(buf, g.rot_quat[i]);
  }
  f.write(buf.data(), std::streamsize(buf.size()));
  if (!f) throw IoFailure("write failed: " + path.string());
}

GaussianModel load_gaussian_ply(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoFailure("cannot open: " + path.string());
  std::string line;
  if (!std::getline(f, line) || line != "ply")
    throw IoFailure("not a PLY file: " + path.string());

  GaussianModel model;
  model.active_sh_degree = 3;
  std::size_t count = 0;
  std::vector<std::string> props;
  while (std::getline(f, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "binary_little_endian")
        throw IoFailure("expected binary_little_endian PLY: " + path.string());
    } else if (tok == "comment") {
      std::string key;
      ss >> key;
      if (key == "active_sh_degree") ss >> model.active_sh_degree;
    } else if (tok == "element") {
      std::string name;
      ss >> name >> count;
      if (name != "vertex")
        throw IoFailure("unsupported PLY element: " + name);
    } else if (tok == "property") {
      std::string type, name;
      ss >> type >> name;
      if (type != "double")
        throw IoFailure("gaussian PLY properties must be double");
      props.push_back(name);
    } else if (tok == "end_header") {
      break;
    }
  }
  if (props != canonical_properties())
    throw IoFailure("gaussian PLY property order mismatch: " + path.string());

  const std::size_t stride = 59 * 8;
  std::string buf(count * stride, '\0');
  f.read(buf.data(), std::streamsize(buf.size()));
  if (std::size_t(f.gcount()) != buf.size())
    throw IoFailure("truncated gaussian PLY: " + path.string());

  model.gaussians.resize(count);
  for (std::size_t v = 0; v < count; ++v) {
    const char* p = buf.data() + v * stride;
    Gaussian3D& g = model.gaussians[v];
    int off = 0;
    auto next = [&] { return get_le_double(p + 8 * off++); };
    for (int i = 0; i < 3; ++i) g.mean[i] = next();
    for (int ch = 0; ch < 3; ++ch) g.sh_coeffs(ch, 0) = next();
    for (int ch = 0; ch < 3; ++ch)
      for (int k = 1; k < 16; ++k) g.sh_coeffs(ch, k) = next();
    g.opacity_logit = next();
    for (int i = 0; i < 3; ++i) g.log_scale[i] = next();
    for (int i = 0; i < 4; ++i) g.rot_quat[i] = next();
  }
  return model;
}

}  // namespace sqsplat
