#include "stitchkit/blend.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "stitchkit/estimators.hpp"
#include "stitchkit/io.hpp"

namespace stitchkit {

Mask canvas_overlap_region(const WarpField& warp, const Mask& warp_valid,
                           const Mask& overlap, const StitchCanvas& canvas) {
  // pixels supported by OV splats, untouched by NOV splats, inside both
  // footprints; NOV contamination happens along occlusion boundaries
  Mask ov_src = overlap;
  Mask nov_src(overlap.width, overlap.height, MaskRole::overlap, 0);
  for (std::size_t i = 0; i < overlap.bits.size(); ++i)
    nov_src.bits[i] = warp_valid.bits[i] && !overlap.bits[i];
  Mask support = splat_support(warp, ov_src, canvas.spec);
  const Mask contaminated = splat_support(warp, nov_src, canvas.spec);
  for (std::size_t i = 0; i < support.bits.size(); ++i)
    support.bits[i] = support.bits[i] && !contaminated.bits[i] &&
                      canvas.m_ref.bits[i] && canvas.m_wt.bits[i];
  return support;
}

Image average_blend(const StitchCanvas& canvas) {
  Image out(canvas.spec.width, canvas.spec.height, 0.0f);
  const std::size_t pixels = std::size_t(out.width) * out.height;
  for (std::size_t p = 0; p < pixels; ++p) {
    const bool r = canvas.m_ref.bits[p];
    const bool w = canvas.m_wt.bits[p];
    if (!r && !w) continue;
    for (int c = 0; c < 3; ++c) {
      const float vr = canvas.ref_padded.data[3 * p + c];
      const float vw = canvas.warped_target.data[3 * p + c];
      out.data[3 * p + c] = r && w ? 0.5f * (vr + vw) : (r ? vr : vw);
    }
  }
  return out;
}

FillResult fill_holes_diffusion(const Image& image, const Mask& hole,
                                int max_iters, double tol) {
  if (hole.width != image.width || hole.height != image.height)
    throw DimensionMismatch("fill_holes_diffusion: mask does not match image");

  FillResult out;
  out.image = image;
  const int w = image.width, h = image.height;

  // hole pixels reachable from data via 4-connectivity are fillable
  std::vector<std::uint8_t> fillable(hole.bits.size(), 0);
  std::deque<std::size_t> frontier;
  auto idx = [w](int x, int y) { return std::size_t(y) * w + x; };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!hole.at(x, y)) continue;
      const bool data_neighbor = (x > 0 && !hole.at(x - 1, y)) ||
                                 (x + 1 < w && !hole.at(x + 1, y)) ||
                                 (y > 0 && !hole.at(x, y - 1)) ||
                                 (y + 1 < h && !hole.at(x, y + 1));
      if (data_neighbor) {
        fillable[idx(x, y)] = 1;
        frontier.push_back(idx(x, y));
      }
    }
  while (!frontier.empty()) {
    const std::size_t p = frontier.front();
    frontier.pop_front();
    const int x = int(p % w), y = int(p / w);
    const int nx[4] = {x - 1, x + 1, x, x};
    const int ny[4] = {y, y, y - 1, y + 1};
    for (int k = 0; k < 4; ++k) {
      if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h) continue;
      const std::size_t q = idx(nx[k], ny[k]);
      if (hole.bits[q] && !fillable[q]) {
        fillable[q] = 1;
        frontier.push_back(q);
      }
    }
  }
  std::vector<std::size_t> active;
  for (std::size_t p = 0; p < hole.bits.size(); ++p) {
    if (hole.bits[p] && !fillable[p]) ++out.unfillable;
    if (hole.bits[p] && fillable[p]) active.push_back(p);
  }
  if (active.empty()) return out;

  // Jacobi sweeps over the active set; fixed update order keeps the result
  // independent of any parallel scheduling of a sweep
  std::vector<float> next(active.size() * 3);
  for (out.iterations = 1; out.iterations <= max_iters; ++out.iterations) {
    double max_update = 0.0;
    for (std::size_t i = 0; i < active.size(); ++i) {
      const std::size_t p = active[i];
      const int x = int(p % w), y = int(p / w);
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        int n = 0;
        for (int k = 0; k < 4; ++k) {
          if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h) continue;
          const std::size_t q = idx(nx[k], ny[k]);
          if (hole.bits[q] && !fillable[q]) continue;  // dead pixels carry no data
          sum += out.image.data[3 * q + c];
          ++n;
        }
        const float v = n ? float(sum / n) : out.image.data[3 * p + c];
        max_update = std::max(max_update, std::abs(double(v) - out.image.data[3 * p + c]));
        next[3 * i + c] = v;
      }
    }
    for (std::size_t i = 0; i < active.size(); ++i)
      for (int c = 0; c < 3; ++c) out.image.data[3 * active[i] + c] = next[3 * i + c];
    if (max_update < tol) break;
  }
  return out;
}

Mask enclosed_holes(const Mask& hole) {
  Mask out = hole;
  // flood away the components that touch the canvas border
  std::deque<std::size_t> frontier;
  const int w = hole.width, h = hole.height;
  auto push = [&](int x, int y) {
    const std::size_t p = std::size_t(y) * w + x;
    if (out.bits[p]) {
      out.bits[p] = 0;
      frontier.push_back(p);
    }
  };
  for (int x = 0; x < w; ++x) {
    push(x, 0);
    push(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    push(0, y);
    push(w - 1, y);
  }
  while (!frontier.empty()) {
    const std::size_t p = frontier.front();
    frontier.pop_front();
    const int x = int(p % w), y = int(p / w);
    if (x > 0) push(x - 1, y);
    if (x + 1 < w) push(x + 1, y);
    if (y > 0) push(x, y - 1);
    if (y + 1 < h) push(x, y + 1);
  }
  return out;
}

namespace {

// Two-pass chamfer distance (3-4 weights scaled to ~unit steps) from the
// mask's zero set; inside the mask the value grows with depth.
std::vector<float> chamfer_distance(const Mask& mask) {
  const int w = mask.width, h = mask.height;
  const float big = 1e9f;
  std::vector<float> d(mask.bits.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = mask.bits[i] ? big : 0.0f;
  auto at = [&](int x, int y) -> float& { return d[std::size_t(y) * w + x]; };
  const float a = 1.0f, b = 1.3333f;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float v = at(x, y);
      if (x > 0) v = std::min(v, at(x - 1, y) + a);
      if (y > 0) v = std::min(v, at(x, y - 1) + a);
      if (x > 0 && y > 0) v = std::min(v, at(x - 1, y - 1) + b);
      if (x + 1 < w && y > 0) v = std::min(v, at(x + 1, y - 1) + b);
      at(x, y) = v;
    }
  for (int y = h - 1; y >= 0; --y)
    for (int x = w - 1; x >= 0; --x) {
      float v = at(x, y);
      if (x + 1 < w) v = std::min(v, at(x + 1, y) + a);
      if (y + 1 < h) v = std::min(v, at(x, y + 1) + a);
      if (x + 1 < w && y + 1 < h) v = std::min(v, at(x + 1, y + 1) + b);
      if (x > 0 && y + 1 < h) v = std::min(v, at(x - 1, y + 1) + b);
      at(x, y) = v;
    }
  return d;
}

}  // namespace

Image feather_blend(const StitchCanvas& canvas, double feather_px) {
  if (feather_px < 1.0) throw InvalidSpec("feather_blend: feather_px must be >= 1");
  Image out(canvas.spec.width, canvas.spec.height, 0.0f);
  const auto dist_r = chamfer_distance(canvas.m_ref);
  const auto dist_w = chamfer_distance(canvas.m_wt);
  const std::size_t pixels = std::size_t(out.width) * out.height;
  for (std::size_t p = 0; p < pixels; ++p) {
    const bool r = canvas.m_ref.bits[p];
    const bool w = canvas.m_wt.bits[p];
    if (!r && !w) continue;
    if (r != w) {  // exclusive region: copy bit-exact
      const Image& src = r ? canvas.ref_padded : canvas.warped_target;
      for (int c = 0; c < 3; ++c) out.data[3 * p + c] = src.data[3 * p + c];
      continue;
    }
    const double wr = std::min(double(dist_r[p]), feather_px);
    const double ww = std::min(double(dist_w[p]), feather_px);
    const double norm = wr + ww;
    const double fr = norm > 0.0 ? wr / norm : 0.5;
    for (int c = 0; c < 3; ++c)
      out.data[3 * p + c] = float(fr * canvas.ref_padded.data[3 * p + c] +
                                  (1.0 - fr) * canvas.warped_target.data[3 * p + c]);
  }
  return out;
}

PipelineResult stitch_pipeline(const DatasetSample& sample,
                               const PipelineOptions& options) {
  PipelineResult res;

  switch (options.estimator) {
    case EstimatorChoice::oracle:
      res.warp_used = oracle_warp(sample);
      res.warp_valid = sample.validity;
      break;
    case EstimatorChoice::homography: {
      const auto cs = sample_correspondences(sample, 200, options.seed);
      const Homography h = fit_homography(cs, RansacParams{1000, 1.0, options.seed});
      auto hw = homography_to_warp(h, sample.image_target.width,
                                   sample.image_target.height);
      res.warp_used = std::move(hw.warp);
      res.warp_valid = std::move(hw.valid);
      break;
    }
    case EstimatorChoice::file: {
      if (!options.warp_file) throw InvalidSpec("file estimator needs a path");
      res.warp_used = read_flo(*options.warp_file);
      if (res.warp_used.width != sample.image_target.width ||
          res.warp_used.height != sample.image_target.height)
        throw DimensionMismatch("loaded warp does not match the target size");
      res.warp_valid = Mask(res.warp_used.width, res.warp_used.height,
                            MaskRole::validity, 1);
      break;
    }
  }

  const ImportanceMap importance =
      importance_from_depth(sample.depth_target, options.importance_beta);
  res.canvas = make_canvas(sample.image_ref, sample.image_target, res.warp_used,
                           importance, &res.warp_valid, options.workers);

  Image blended = options.blend == BlendChoice::average
                      ? average_blend(res.canvas)
                      : feather_blend(res.canvas, options.feather_px);
  if (options.fill_holes) {
    // fill only holes enclosed by content; the empty canvas margin (a single
    // component touching the border) is not a stitching artifact
    auto filled = fill_holes_diffusion(blended, enclosed_holes(res.canvas.hole));
    res.unfillable_holes = filled.unfillable;
    blended = std::move(filled.image);
  }
  res.canvas.stitched = std::move(blended);

  res.warp_loss_value =
      warp_loss(res.warp_used, sample.warp_gt, sample.overlap, 0.3).total;
  res.recon = recon_loss(res.canvas.stitched, res.canvas.ref_padded,
                         res.canvas.warped_target, res.canvas.m_ref, res.canvas.m_wt);
  try {
    const auto f = fundamental_from_cameras(sample.cam_ref, sample.cam_target);
    res.sampson_loss = sampson_epipolar_loss(res.warp_used, f, sample.overlap).loss;
  } catch (const DegenerateBaseline&) {
    res.sampson_loss = 0.0;  // identical cameras: constraint is vacuous
  }
  // OV region carried onto the canvas, intersected with both footprints
  const Mask canvas_overlap =
      canvas_overlap_region(res.warp_used, res.warp_valid, sample.overlap, res.canvas);
  try {
    res.masked_psnr_db = masked_psnr(res.canvas.ref_padded, res.canvas.warped_target,
                                     canvas_overlap, res.canvas.hole);
  } catch (const EmptyEvalRegion&) {
    res.masked_psnr_db = 0.0;
  }
  return res;
}

}  // namespace stitchkit
