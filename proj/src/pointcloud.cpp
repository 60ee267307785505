#include "sqsplat/pointcloud.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "sqsplat/errors.hpp"

namespace sqsplat {

Eigen::Vector3d PointCloud::centroid() const {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& p : points) c += p;
  return points.empty() ? c : Eigen::Vector3d(c / double(points.size()));
}

PointCloud PointCloud::subsample(std::size_t max_points) const {
  if (points.size() <= max_points || max_points == 0) return *this;
  const std::size_t stride = (points.size() + max_points - 1) / max_points;
  PointCloud out;
  out.points.reserve(points.size() / stride + 1);
  for (std::size_t i = 0; i < points.size(); i += stride) {
    out.points.push_back(points[i]);
    if (!normals.empty()) out.normals.push_back(normals[i]);
  }
  return out;
}

PointCloud apply_rotation(const PointCloud& cloud, const Rotation& R) {
  PointCloud out;
  out.points.reserve(cloud.points.size());
  for (const auto& p : cloud.points) out.points.push_back(R.dcm * p);
  out.normals.reserve(cloud.normals.size());
  for (const auto& n : cloud.normals) out.normals.push_back(R.dcm * n);
  return out;
}

void save_ply_ascii(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream f(path);
  if (!f) throw IoFailure("cannot open for writing: " + path.string());
  const bool with_normals = !cloud.normals.empty();
  f << "ply\nformat ascii 1.0\n";
  f << "element vertex " << cloud.points.size() << "\n";
  f << "property float x\nproperty float y\nproperty float z\n";
  if (with_normals)
    f << "property float nx\nproperty float ny\nproperty float nz\n";
  f << "end_header\n";
  char line[256];
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    if (with_normals) {
      const auto& n = cloud.normals[i];
      std::snprintf(line, sizeof(line), "%.17g %.17g %.17g %.17g %.17g %.17g\n",
                    p.x(), p.y(), p.z(), n.x(), n.y(), n.z());
    } else {
      std::snprintf(line, sizeof(line), "%.17g %.17g %.17g\n", p.x(), p.y(),
                    p.z());
    }
    f << line;
  }
  if (!f) throw IoFailure("write failed: " + path.string());
}

PointCloud load_ply_ascii(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoFailure("cannot open: " + path.string());
  std::string line;
  if (!std::getline(f, line) || line.rfind("ply", 0) != 0)
    throw IoFailure("not a PLY file: " + path.string());

  std::size_t vertex_count = 0;
  std::vector<std::string> props;
  bool in_vertex_element = false;
  while (std::getline(f, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "ascii")
        throw IoFailure("expected ascii PLY: " + path.string());
    } else if (tok == "element") {
      std::string name;
      ss >> name >> vertex_count;
      in_vertex_element = (name == "vertex");
      if (!in_vertex_element)
        throw IoFailure("unsupported PLY element '" + name + "'");
    } else if (tok == "property" && in_vertex_element) {
      std::string type, name;
      ss >> type >> name;
      props.push_back(name);
    } else if (tok == "end_header") {
      break;
    }
  }

  int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1;
  for (int i = 0; i < int(props.size()); ++i) {
    if (props[i] == "x") ix = i;
    else if (props[i] == "y") iy = i;
    else if (props[i] == "z") iz = i;
    else if (props[i] == "nx") inx = i;
    else if (props[i] == "ny") iny = i;
    else if (props[i] == "nz") inz = i;
  }
  if (ix < 0 || iy < 0 || iz < 0)
    throw IoFailure("PLY vertex element lacks x/y/z: " + path.string());
  const bool with_normals = inx >= 0 && iny >= 0 && inz >= 0;

  PointCloud cloud;
  cloud.points.reserve(vertex_count);
  std::vector<double> row(props.size());
  for (std::size_t v = 0; v < vertex_count; ++v) {
    if (!std::getline(f, line))
      throw IoFailure("truncated PLY: " + path.string());
    std::istringstream ss(line);
    for (double& val : row)
      if (!(ss >> val)) throw IoFailure("bad PLY row: " + path.string());
    cloud.points.emplace_back(row[ix], row[iy], row[iz]);
    if (with_normals) cloud.normals.emplace_back(row[inx], row[iny], row[inz]);
  }
  return cloud;
}

}  // namespace sqsplat
