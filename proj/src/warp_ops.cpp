#include "stitchkit/warp_ops.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <vector>

namespace stitchkit {

namespace {

struct Accum {
  std::vector<double> num;  // 3 per pixel
  std::vector<double> den;
  Accum(std::size_t pixels) : num(3 * pixels, 0.0), den(pixels, 0.0) {}
};

void splat_rows(const Image& image, const WarpField& warp,
                const ImportanceMap& importance, const CanvasSpec& canvas,
                const Mask* validity, int y0, int y1, Accum& acc) {
  const int cw = canvas.width, ch = canvas.height;
  for (int y = y0; y < y1; ++y) {
    for (int x = 0; x < image.width; ++x) {
      if (validity && !validity->at(x, y)) continue;
      const float* w = warp.at(x, y);
      const double dx = x + double(w[0]) + canvas.anchor_x;
      const double dy = y + double(w[1]) + canvas.anchor_y;
      if (!std::isfinite(dx) || !std::isfinite(dy)) continue;
      const int ix = int(std::floor(dx));
      const int iy = int(std::floor(dy));
      const double fx = dx - ix, fy = dy - iy;
      const double zc = std::clamp(double(importance.at(x, y)), -20.0, 20.0);
      const double ez = std::exp(zc);
      const float* px = image.at(x, y);
      const double bw[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
      const int nx[4] = {ix, ix + 1, ix, ix + 1};
      const int ny[4] = {iy, iy, iy + 1, iy + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || nx[k] >= cw || ny[k] < 0 || ny[k] >= ch) continue;
        const std::size_t p = std::size_t(ny[k]) * cw + nx[k];
        const double wk = bw[k] * ez;
        acc.den[p] += wk;
        acc.num[3 * p + 0] += wk * px[0];
        acc.num[3 * p + 1] += wk * px[1];
        acc.num[3 * p + 2] += wk * px[2];
      }
    }
  }
}

}  // namespace

ForwardWarpResult forward_warp_softmax(const Image& image, const WarpField& warp,
                                       const ImportanceMap& importance,
                                       const CanvasSpec& canvas,
                                       const Mask* validity, int workers) {
  if (warp.width != image.width || warp.height != image.height ||
      importance.width != image.width || importance.height != image.height)
    throw DimensionMismatch("forward_warp_softmax: inconsistent input dimensions");

  const std::size_t pixels = std::size_t(canvas.width) * canvas.height;
  const int chunks = kSplatChunks;
  std::vector<Accum> partial(chunks, Accum(pixels));

  auto run_chunk = [&](int c) {
    const int rows = image.height;
    const int y0 = rows * c / chunks;
    const int y1 = rows * (c + 1) / chunks;
    splat_rows(image, warp, importance, canvas, validity, y0, y1, partial[c]);
  };

  if (workers <= 1) {
    for (int c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::future<void>> futs;
    futs.reserve(chunks);
    for (int c = 0; c < chunks; ++c)
      futs.push_back(std::async(std::launch::async, run_chunk, c));
    for (auto& f : futs) f.get();
  }

  // merge in ascending chunk order: fixed summation order for any worker count
  ForwardWarpResult out;
  out.image = Image(canvas.width, canvas.height, 0.0f);
  out.occupancy = Mask(canvas.width, canvas.height, MaskRole::occupancy_warped_target, 0);
  out.weight_sum.assign(pixels, 0.0);
  std::vector<double> num(3 * pixels, 0.0);
  for (int c = 0; c < chunks; ++c) {
    for (std::size_t p = 0; p < pixels; ++p) {
      out.weight_sum[p] += partial[c].den[p];
      num[3 * p + 0] += partial[c].num[3 * p + 0];
      num[3 * p + 1] += partial[c].num[3 * p + 1];
      num[3 * p + 2] += partial[c].num[3 * p + 2];
    }
  }
  for (std::size_t p = 0; p < pixels; ++p) {
    if (out.weight_sum[p] > kSplatWeightEps) {
      out.occupancy.bits[p] = 1;
      out.image.data[3 * p + 0] = float(num[3 * p + 0] / out.weight_sum[p]);
      out.image.data[3 * p + 1] = float(num[3 * p + 1] / out.weight_sum[p]);
      out.image.data[3 * p + 2] = float(num[3 * p + 2] / out.weight_sum[p]);
    }
  }
  return out;
}

Mask splat_support(const WarpField& warp, const Mask& source_bits,
                   const CanvasSpec& canvas) {
  if (source_bits.width != warp.width || source_bits.height != warp.height)
    throw DimensionMismatch("splat_support: mask does not match warp");
  std::vector<double> den(std::size_t(canvas.width) * canvas.height, 0.0);
  for (int y = 0; y < warp.height; ++y)
    for (int x = 0; x < warp.width; ++x) {
      if (!source_bits.at(x, y)) continue;
      const float* w = warp.at(x, y);
      const double dx = x + double(w[0]) + canvas.anchor_x;
      const double dy = y + double(w[1]) + canvas.anchor_y;
      if (!std::isfinite(dx) || !std::isfinite(dy)) continue;
      const int ix = int(std::floor(dx));
      const int iy = int(std::floor(dy));
      const double fx = dx - ix, fy = dy - iy;
      const double bw[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
      const int nx[4] = {ix, ix + 1, ix, ix + 1};
      const int ny[4] = {iy, iy, iy + 1, iy + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || nx[k] >= canvas.width || ny[k] < 0 || ny[k] >= canvas.height)
          continue;
        den[std::size_t(ny[k]) * canvas.width + nx[k]] += bw[k];
      }
    }
  Mask out(canvas.width, canvas.height, MaskRole::overlap, 0);
  for (std::size_t p = 0; p < den.size(); ++p)
    out.bits[p] = den[p] > kSplatWeightEps ? 1 : 0;
  return out;
}

BackwardWarpResult backward_warp(const Image& image, const WarpField& warp) {
  BackwardWarpResult out;
  out.image = Image(warp.width, warp.height, 0.0f);
  out.in_bounds = Mask(warp.width, warp.height, MaskRole::validity, 0);
  for (int y = 0; y < warp.height; ++y) {
    for (int x = 0; x < warp.width; ++x) {
      const float* w = warp.at(x, y);
      const double sx = x + double(w[0]);
      const double sy = y + double(w[1]);
      if (sx < 0.0 || sx > image.width - 1 || sy < 0.0 || sy > image.height - 1)
        continue;
      float* dst = out.image.at(x, y);
      for (int c = 0; c < 3; ++c)
        dst[c] = bilinear(image.data, image.width, image.height, sx, sy, 3, c);
      out.in_bounds.at(x, y) = 1;
    }
  }
  return out;
}

ImportanceMap importance_from_depth(const DepthMap& depth_t, double beta) {
  if (beta < 0.0) throw InvalidSpec("importance_from_depth: beta must be >= 0");
  ImportanceMap z(depth_t.width, depth_t.height, -20.0f);
  double sum = 0.0;
  std::size_t n = 0;
  for (float d : depth_t.values)
    if (depth_valid(d)) {
      sum += d;
      ++n;
    }
  if (n == 0) return z;
  const double mean = sum / double(n);
  for (std::size_t i = 0; i < depth_t.values.size(); ++i) {
    const float d = depth_t.values[i];
    if (!depth_valid(d)) continue;
    z.z[i] = float(std::clamp(-beta * double(d) / mean, -20.0, 20.0));
  }
  return z;
}

void to_canvas(const Image& ref, const CanvasSpec& spec, Image& ref_padded,
               Mask& m_ref) {
  const int ax = int(std::lround(spec.anchor_x));
  const int ay = int(std::lround(spec.anchor_y));
  if (ax < 0 || ay < 0 || ax + ref.width > spec.width || ay + ref.height > spec.height)
    throw AnchorOutOfCanvas("reference does not fit inside the canvas");
  ref_padded = Image(spec.width, spec.height, 0.0f);
  m_ref = Mask(spec.width, spec.height, MaskRole::occupancy_ref, 0);
  for (int y = 0; y < ref.height; ++y)
    for (int x = 0; x < ref.width; ++x) {
      const float* src = ref.at(x, y);
      float* dst = ref_padded.at(x + ax, y + ay);
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
      m_ref.at(x + ax, y + ay) = 1;
    }
}

StitchCanvas make_canvas(const Image& ref, const Image& target,
                         const WarpField& warp, const ImportanceMap& importance,
                         const Mask* validity, int workers) {
  StitchCanvas canvas;
  canvas.spec = CanvasSpec::for_reference(ref.width, ref.height);
  to_canvas(ref, canvas.spec, canvas.ref_padded, canvas.m_ref);
  auto fw = forward_warp_softmax(target, warp, importance, canvas.spec, validity, workers);
  canvas.warped_target = std::move(fw.image);
  canvas.m_wt = std::move(fw.occupancy);
  canvas.hole = Mask(canvas.spec.width, canvas.spec.height, MaskRole::hole, 0);
  for (std::size_t i = 0; i < canvas.hole.bits.size(); ++i)
    canvas.hole.bits[i] = (!canvas.m_ref.bits[i] && !canvas.m_wt.bits[i]) ? 1 : 0;
  return canvas;
}

}  // namespace stitchkit
