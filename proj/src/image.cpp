#include "sqsplat/image.hpp"

#include <png.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "sqsplat/errors.hpp"

namespace sqsplat {

void ImageBuffer::clamp01() {
  for (double& v : data) v = std::clamp(v, 0.0, 1.0);
}

void ImageBuffer::round_to_f32() {
  for (double& v : data) v = double(float(v));
}

void save_png(const std::filesystem::path& path, const ImageBuffer& img) {
  std::FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw IoFailure("cannot open for writing: " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoFailure("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoFailure("libpng write failed: " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<unsigned char> row(std::size_t(img.width) * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(img.at(y, x, c), 0.0, 1.0);
        row[std::size_t(x) * 3 + c] =
            static_cast<unsigned char>(std::floor(v * 255.0 + 0.5));
      }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

void save_f32(const std::filesystem::path& path, const ImageBuffer& img) {
  {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoFailure("cannot open for writing: " + path.string());
    std::string buf;
    buf.reserve(img.data.size() * 4);
    for (double v : img.data) {
      const auto bits = std::bit_cast<std::uint32_t>(float(v));
      for (int i = 0; i < 4; ++i)
        buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
    }
    f.write(buf.data(), std::streamsize(buf.size()));
    if (!f) throw IoFailure("write failed: " + path.string());
  }
  nlohmann::json sidecar = {
      {"height", img.height}, {"width", img.width}, {"channels", 3}};
  std::ofstream j(path.string() + ".json");
  if (!j) throw IoFailure("cannot write sidecar for: " + path.string());
  j << sidecar.dump() << "\n";
}

ImageBuffer load_f32(const std::filesystem::path& path) {
  nlohmann::json sidecar;
  {
    std::ifstream j(path.string() + ".json");
    if (!j) throw IoFailure("missing sidecar for: " + path.string());
    try {
      j >> sidecar;
    } catch (const nlohmann::json::exception& e) {
      throw IoFailure("bad sidecar " + path.string() + ".json: " + e.what());
    }
  }
  const int h = sidecar.at("height");
  const int w = sidecar.at("width");
  if (sidecar.at("channels") != 3)
    throw IoFailure("expected 3 channels: " + path.string());

  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoFailure("cannot open: " + path.string());
  const std::size_t n = std::size_t(h) * w * 3;
  std::string buf(n * 4, '\0');
  f.read(buf.data(), std::streamsize(buf.size()));
  if (std::size_t(f.gcount()) != buf.size())
    throw IoFailure("truncated f32 image: " + path.string());

  ImageBuffer img(h, w);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b)
      bits |= std::uint32_t(static_cast<unsigned char>(buf[i * 4 + b])) << (8 * b);
    img.data[i] = double(std::bit_cast<float>(bits));
  }
  return img;
}

}  // namespace sqsplat
