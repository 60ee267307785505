#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <vector>

namespace sqsplat {

/// H x W x 3 image with channel values in [0, 1], row-major, RGB interleaved.
struct ImageBuffer {
  int height = 0;
  int width = 0;
  std::vector<double> data;  // height * width * 3

  ImageBuffer() = default;
  ImageBuffer(int h, int w) : height(h), width(w), data(std::size_t(h) * w * 3, 0.0) {}

  double& at(int y, int x, int c) { return data[(std::size_t(y) * width + x) * 3 + c]; }
  double at(int y, int x, int c) const { return data[(std::size_t(y) * width + x) * 3 + c]; }

  Eigen::Vector3d pixel(int y, int x) const {
    const std::size_t i = (std::size_t(y) * width + x) * 3;
    return {data[i], data[i + 1], data[i + 2]};
  }

  std::size_t count() const { return data.size(); }

  bool same_shape(const ImageBuffer& o) const {
    return height == o.height && width == o.width;
  }

  void clamp01();

  /// Quantize every channel through float32 (the on-disk precision).
  void round_to_f32();
};

/// 8-bit RGB PNG; linear values scaled by 255 and rounded half up.
/// For inspection only — quantitative paths use the f32 format below.
void save_png(const std::filesystem::path& path, const ImageBuffer& img);

/// Raw little-endian float32 array (H*W*3, row-major RGB) plus a JSON
/// sidecar {"height":H,"width":W,"channels":3} at <path>.json.
void save_f32(const std::filesystem::path& path, const ImageBuffer& img);
ImageBuffer load_f32(const std::filesystem::path& path);

}  // namespace sqsplat
