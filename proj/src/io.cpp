#include "stitchkit/io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace stitchkit {

namespace {

constexpr float kFloMagic = 202021.25f;

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::uint8_t quantize(float v) {
  float c = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  return std::uint8_t(std::lround(c * 255.0));
}

}  // namespace

void write_flo(const std::filesystem::path& path, const WarpField& warp) {
  auto out = open_out(path);
  out.write(reinterpret_cast<const char*>(&kFloMagic), 4);
  std::int32_t w = warp.width, h = warp.height;
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  out.write(reinterpret_cast<const char*>(warp.disp.data()),
            std::streamsize(warp.disp.size() * sizeof(float)));
  if (!out) throw IoError("short write: " + path.string());
}

WarpField read_flo(const std::filesystem::path& path) {
  auto in = open_in(path);
  float magic = 0.0f;
  std::int32_t w = 0, h = 0;
  in.read(reinterpret_cast<char*>(&magic), 4);
  if (!in || magic != kFloMagic) throw BadMagic("not a .flo file: " + path.string());
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  if (!in || w <= 0 || h <= 0) throw TruncatedFile("bad .flo header: " + path.string());
  WarpField warp(w, h);
  in.read(reinterpret_cast<char*>(warp.disp.data()),
          std::streamsize(warp.disp.size() * sizeof(float)));
  if (std::size_t(in.gcount()) != warp.disp.size() * sizeof(float))
    throw TruncatedFile("truncated .flo payload: " + path.string());
  return warp;
}

void write_pfm(const std::filesystem::path& path, const DepthMap& depth) {
  auto out = open_out(path);
  out << "Pf\n" << depth.width << " " << depth.height << "\n-1.0\n";
  // PFM stores rows bottom-to-top
  for (int y = depth.height - 1; y >= 0; --y)
    out.write(reinterpret_cast<const char*>(&depth.values[std::size_t(y) * depth.width]),
              std::streamsize(depth.width * sizeof(float)));
  if (!out) throw IoError("short write: " + path.string());
}

DepthMap read_pfm(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string tag;
  in >> tag;
  if (tag != "Pf") throw BadMagic("not a grayscale PFM: " + path.string());
  int w = 0, h = 0;
  double scale = 0.0;
  in >> w >> h >> scale;
  if (!in || w <= 0 || h <= 0) throw TruncatedFile("bad PFM header: " + path.string());
  if (scale >= 0.0) throw BadMagic("big-endian PFM not supported: " + path.string());
  in.get();  // single whitespace after the scale
  DepthMap depth(w, h);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(&depth.values[std::size_t(y) * w]),
            std::streamsize(w * sizeof(float)));
    if (std::size_t(in.gcount()) != w * sizeof(float))
      throw TruncatedFile("truncated PFM payload: " + path.string());
  }
  return depth;
}

namespace {

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngWriter() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

void write_png_bytes(const std::filesystem::path& path, const std::uint8_t* bytes,
                     int width, int height, int channels) {
  PngWriter w;
  w.fp = std::fopen(path.string().c_str(), "wb");
  if (!w.fp) throw IoError("cannot open for writing: " + path.string());
  w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  w.info = png_create_info_struct(w.png);
  if (!w.png || !w.info || setjmp(png_jmpbuf(w.png)))
    throw IoError("libpng write failure: " + path.string());
  png_init_io(w.png, w.fp);
  png_set_IHDR(w.png, w.info, width, height, 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(bytes + std::size_t(y) * width * channels);
  png_write_image(w.png, rows.data());
  png_write_end(w.png, nullptr);
}

std::vector<std::uint8_t> read_png_bytes(const std::filesystem::path& path,
                                         int expect_channels, int& width, int& height) {
  PngReader r;
  r.fp = std::fopen(path.string().c_str(), "rb");
  if (!r.fp) throw IoError("cannot open for reading: " + path.string());
  std::uint8_t sig[8];
  if (std::fread(sig, 1, 8, r.fp) != 8 || png_sig_cmp(sig, 0, 8))
    throw BadMagic("not a PNG: " + path.string());
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  r.info = png_create_info_struct(r.png);
  if (!r.png || !r.info || setjmp(png_jmpbuf(r.png)))
    throw IoError("libpng read failure: " + path.string());
  png_init_io(r.png, r.fp);
  png_set_sig_bytes(r.png, 8);
  png_read_info(r.png, r.info);
  width = int(png_get_image_width(r.png, r.info));
  height = int(png_get_image_height(r.png, r.info));
  png_set_strip_16(r.png);
  png_set_strip_alpha(r.png);
  const int color = png_get_color_type(r.png, r.info);
  if (expect_channels == 3 && color != PNG_COLOR_TYPE_RGB) png_set_gray_to_rgb(r.png);
  if (expect_channels == 1 && color != PNG_COLOR_TYPE_GRAY) png_set_rgb_to_gray(r.png, 1, -1, -1);
  png_read_update_info(r.png, r.info);
  std::vector<std::uint8_t> bytes(std::size_t(width) * height * expect_channels);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y)
    rows[y] = bytes.data() + std::size_t(y) * width * expect_channels;
  png_read_image(r.png, rows.data());
  return bytes;
}

}  // namespace

void write_png_rgb(const std::filesystem::path& path, const Image& image) {
  std::vector<std::uint8_t> bytes(image.data.size());
  for (std::size_t i = 0; i < image.data.size(); ++i) bytes[i] = quantize(image.data[i]);
  write_png_bytes(path, bytes.data(), image.width, image.height, 3);
}

Image read_png_rgb(const std::filesystem::path& path) {
  int w = 0, h = 0;
  auto bytes = read_png_bytes(path, 3, w, h);
  Image img(w, h);
  for (std::size_t i = 0; i < bytes.size(); ++i) img.data[i] = float(bytes[i]) / 255.0f;
  return img;
}

void write_png_mask(const std::filesystem::path& path, const Mask& mask) {
  std::vector<std::uint8_t> bytes(mask.bits.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = mask.bits[i] ? 255 : 0;
  write_png_bytes(path, bytes.data(), mask.width, mask.height, 1);
}

Mask read_png_mask(const std::filesystem::path& path) {
  int w = 0, h = 0;
  auto bytes = read_png_bytes(path, 1, w, h);
  Mask mask(w, h);
  for (std::size_t i = 0; i < bytes.size(); ++i) mask.bits[i] = bytes[i] >= 128 ? 1 : 0;
  return mask;
}

std::string read_text_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("short write: " + path.string());
}

}  // namespace stitchkit
