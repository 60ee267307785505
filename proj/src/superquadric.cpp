#include "sqsplat/superquadric.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "sqsplat/errors.hpp"

namespace sqsplat {
namespace {

// sign(s) * |s|^e with the 0^e = 0 convention.
double sgnpow(double s, double e) {
  if (s == 0.0) return 0.0;
  const double m = std::pow(std::abs(s), e);
  return s < 0.0 ? -m : m;
}

struct CoordKey {
  std::uint64_t a, b, c;
  bool operator==(const CoordKey&) const = default;
};

struct CoordKeyHash {
  std::size_t operator()(const CoordKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::uint64_t v : {k.a, k.b, k.c}) {
      h ^= v;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

CoordKey key_of(const Eigen::Vector3d& p) {
  CoordKey k;
  std::memcpy(&k.a, &p.x(), 8);
  std::memcpy(&k.b, &p.y(), 8);
  std::memcpy(&k.c, &p.z(), 8);
  return k;
}

}  // namespace

void SuperquadricParams::clamp_epsilon() {
  epsilon.x() = std::clamp(epsilon.x(), kEpsilonMin, kEpsilonMax);
  epsilon.y() = std::clamp(epsilon.y(), kEpsilonMin, kEpsilonMax);
}

void SuperquadricParams::validate() const {
  if (!(alpha.minCoeff() > 0.0))
    throw std::invalid_argument("superquadric: alpha must be strictly positive");
  if (epsilon.minCoeff() < kEpsilonMin - 1e-12 ||
      epsilon.maxCoeff() > kEpsilonMax + 1e-12)
    throw std::invalid_argument("superquadric: epsilon outside [0.05, 2.0]");
  if (taper.cwiseAbs().maxCoeff() > 1.0 + 1e-12)
    throw std::invalid_argument("superquadric: taper outside [-1, 1]");
}

Eigen::Vector3d parametric_point(const Eigen::Vector3d& alpha,
                                 const Eigen::Vector2d& epsilon, double eta,
                                 double omega) {
  const double ce = std::cos(eta), se = std::sin(eta);
  const double cw = std::cos(omega), sw = std::sin(omega);
  const double fe = sgnpow(ce, epsilon.x());
  return {alpha.x() * fe * sgnpow(cw, epsilon.y()),
          alpha.y() * fe * sgnpow(sw, epsilon.y()),
          alpha.z() * sgnpow(se, epsilon.x())};
}

Eigen::Vector3d apply_taper(const Eigen::Vector2d& taper, double alpha_z,
                            const Eigen::Vector3d& p) {
  const double fz = p.z() / alpha_z;
  return {(taper.x() * fz + 1.0) * p.x(), (taper.y() * fz + 1.0) * p.y(),
          p.z()};
}

double implicit_residual(const Eigen::Vector3d& alpha,
                         const Eigen::Vector2d& epsilon,
                         const Eigen::Vector3d& p) {
  const double tx = std::pow(std::abs(p.x() / alpha.x()), 2.0 / epsilon.y());
  const double ty = std::pow(std::abs(p.y() / alpha.y()), 2.0 / epsilon.y());
  const double tz = std::pow(std::abs(p.z() / alpha.z()), 2.0 / epsilon.x());
  return std::pow(tx + ty, epsilon.y() / epsilon.x()) + tz - 1.0;
}

Eigen::Vector3d surface_point_body(const SuperquadricParams& sq, double eta,
                                   double omega) {
  SuperquadricParams c = sq;
  c.clamp_epsilon();
  const Eigen::Vector3d p = parametric_point(c.alpha, c.epsilon, eta, omega);
  return apply_taper(c.taper, c.alpha.z(), p);
}

Eigen::Vector3d surface_point(const SuperquadricParams& sq, double eta,
                              double omega) {
  const Rotation R = rot6d_to_dcm(sq.rot6d);
  return R.dcm * surface_point_body(sq, eta, omega) + sq.trans;
}

PointCloud sample_surface(const SuperquadricParams& sq, int n_eta, int n_omega) {
  if (n_eta < 2 || n_omega < 3)
    throw std::invalid_argument("sample_surface: need n_eta >= 2, n_omega >= 3");
  const Rotation R = rot6d_to_dcm(sq.rot6d);
  SuperquadricParams c = sq;
  c.clamp_epsilon();

  PointCloud cloud;
  cloud.points.reserve(static_cast<std::size_t>(n_eta) * n_omega);
  std::unordered_set<CoordKey, CoordKeyHash> seen;
  for (int i = 0; i < n_eta; ++i) {
    const double eta = M_PI * ((i + 0.5) / double(n_eta) - 0.5);
    for (int j = 0; j < n_omega; ++j) {
      const double omega = -M_PI + 2.0 * M_PI * double(j) / double(n_omega);
      const Eigen::Vector3d body = apply_taper(
          c.taper, c.alpha.z(), parametric_point(c.alpha, c.epsilon, eta, omega));
      if (!seen.insert(key_of(body)).second) continue;
      cloud.points.emplace_back(R.dcm * body + c.trans);
    }
  }
  return cloud;
}

PointCloud assembly_to_pointcloud(const PrimitiveAssembly& assembly,
                                  int points_per_primitive) {
  if (assembly.primitives.empty())
    throw std::invalid_argument("assembly_to_pointcloud: empty assembly");
  if (points_per_primitive < 1)
    throw std::invalid_argument("assembly_to_pointcloud: need >= 1 point");

  const int ppp = points_per_primitive;
  int n_omega = std::max(3, int(std::ceil(std::sqrt(2.0 * ppp))));
  int n_eta = std::max(2, int(std::ceil(double(ppp) / n_omega)));

  PointCloud out;
  out.points.reserve(assembly.primitives.size() * std::size_t(ppp));
  for (const auto& sq : assembly.primitives) {
    const PointCloud sample = sample_surface(sq, n_eta, n_omega);
    const std::size_t n = sample.points.size();
    if (n <= std::size_t(ppp)) {
      out.points.insert(out.points.end(), sample.points.begin(),
                        sample.points.end());
    } else {
      // Even deterministic selection of exactly ppp points.
      for (int k = 0; k < ppp; ++k)
        out.points.push_back(sample.points[std::size_t(k) * n / ppp]);
    }
  }
  return out;
}

void save_assembly_json(const std::filesystem::path& path,
                        const PrimitiveAssembly& assembly) {
  nlohmann::json doc;
  auto& prims = doc["primitives"];
  prims = nlohmann::json::array();
  for (const auto& sq : assembly.primitives) {
    nlohmann::json j;
    j["alpha"] = {sq.alpha.x(), sq.alpha.y(), sq.alpha.z()};
    j["epsilon"] = {sq.epsilon.x(), sq.epsilon.y()};
    j["trans"] = {sq.trans.x(), sq.trans.y(), sq.trans.z()};
    j["rot6d"] = {sq.rot6d[0], sq.rot6d[1], sq.rot6d[2],
                  sq.rot6d[3], sq.rot6d[4], sq.rot6d[5]};
    j["taper"] = {sq.taper.x(), sq.taper.y()};
    prims.push_back(std::move(j));
  }
  std::ofstream f(path);
  if (!f) throw IoFailure("cannot open for writing: " + path.string());
  f << doc.dump(2) << "\n";
  if (!f) throw IoFailure("write failed: " + path.string());
}

PrimitiveAssembly load_assembly_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoFailure("cannot open: " + path.string());
  nlohmann::json doc;
  try {
    f >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoFailure("bad assembly JSON " + path.string() + ": " + e.what());
  }
  PrimitiveAssembly assembly;
  for (const auto& j : doc.at("primitives")) {
    SuperquadricParams sq;
    for (int i = 0; i < 3; ++i) sq.alpha[i] = j.at("alpha").at(i);
    for (int i = 0; i < 2; ++i) sq.epsilon[i] = j.at("epsilon").at(i);
    for (int i = 0; i < 3; ++i) sq.trans[i] = j.at("trans").at(i);
    for (int i = 0; i < 6; ++i) sq.rot6d[i] = j.at("rot6d").at(i);
    for (int i = 0; i < 2; ++i) sq.taper[i] = j.at("taper").at(i);
    sq.clamp_epsilon();
    sq.validate();
    assembly.primitives.push_back(sq);
  }
  if (assembly.primitives.empty())
    throw IoFailure("assembly JSON has no primitives: " + path.string());
  return assembly;
}

}  // namespace sqsplat
