#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "stitchkit/errors.hpp"

namespace stitchkit {

constexpr float kDepthSentinel = std::numeric_limits<float>::infinity();

inline bool depth_valid(float d) { return std::isfinite(d) && d > 0.0f; }

// Dense H x W RGB image, float channels in [0,1], row-major interleaved.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // 3 * width * height

  Image() = default;
  Image(int w, int h, float fill = 0.0f)
      : width(w), height(h), data(std::size_t(3) * w * h, fill) {}

  float* at(int x, int y) { return data.data() + 3 * (std::size_t(y) * width + x); }
  const float* at(int x, int y) const {
    return data.data() + 3 * (std::size_t(y) * width + x);
  }
  bool same_size(const Image& o) const {
    return width == o.width && height == o.height;
  }
};

// Metric depth along the camera z-axis; kDepthSentinel marks sky / no hit.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  DepthMap() = default;
  DepthMap(int w, int h, float fill = kDepthSentinel)
      : width(w), height(h), values(std::size_t(w) * h, fill) {}

  float& at(int x, int y) { return values[std::size_t(y) * width + x]; }
  float at(int x, int y) const { return values[std::size_t(y) * width + x]; }
};

// Per-pixel displacement (du, dv) in pixels: target pixel (u,v) maps to
// reference-frame location (u+du, v+dv).
struct WarpField {
  int width = 0;
  int height = 0;
  std::vector<float> disp;  // 2 * width * height, interleaved (du, dv)

  WarpField() = default;
  WarpField(int w, int h) : width(w), height(h), disp(std::size_t(2) * w * h, 0.0f) {}

  float* at(int x, int y) { return disp.data() + 2 * (std::size_t(y) * width + x); }
  const float* at(int x, int y) const {
    return disp.data() + 2 * (std::size_t(y) * width + x);
  }
};

enum class MaskRole : std::uint8_t {
  overlap,
  occupancy_ref,
  occupancy_warped_target,
  hole,
  validity,
};

struct Mask {
  int width = 0;
  int height = 0;
  MaskRole role = MaskRole::overlap;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(int w, int h, MaskRole r = MaskRole::overlap, std::uint8_t fill = 0)
      : width(w), height(h), role(r), bits(std::size_t(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return bits[std::size_t(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return bits[std::size_t(y) * width + x]; }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits) n += (b != 0);
    return n;
  }
  double mean() const { return bits.empty() ? 0.0 : double(count()) / double(bits.size()); }
};

// Bilinear sample of a single-channel grid; caller guarantees in-bounds
// corners or checks the return of the *_checked variant.
inline float bilinear(const std::vector<float>& v, int w, int h, double x, double y,
                      int stride = 1, int channel = 0) {
  int x0 = int(std::floor(x));
  int y0 = int(std::floor(y));
  double fx = x - x0, fy = y - y0;
  auto clampi = [](int a, int lo, int hi) { return a < lo ? lo : (a > hi ? hi : a); };
  int x1 = clampi(x0 + 1, 0, w - 1);
  int y1 = clampi(y0 + 1, 0, h - 1);
  x0 = clampi(x0, 0, w - 1);
  y0 = clampi(y0, 0, h - 1);
  auto pick = [&](int xx, int yy) {
    return double(v[stride * (std::size_t(yy) * w + xx) + channel]);
  };
  double top = pick(x0, y0) * (1 - fx) + pick(x1, y0) * fx;
  double bot = pick(x0, y1) * (1 - fx) + pick(x1, y1) * fx;
  return float(top * (1 - fy) + bot * fy);
}

}  // namespace stitchkit
