#pragma once

#include "stitchkit/types.hpp"

namespace stitchkit {

// Per-source-pixel log-weight for softmax splatting, clamped to [-20, 20]
// before exponentiation.
struct ImportanceMap {
  int width = 0;
  int height = 0;
  std::vector<float> z;

  ImportanceMap() = default;
  ImportanceMap(int w, int h, float fill = 0.0f)
      : width(w), height(h), z(std::size_t(w) * h, fill) {}

  float& at(int x, int y) { return z[std::size_t(y) * width + x]; }
  float at(int x, int y) const { return z[std::size_t(y) * width + x]; }
};

struct CanvasSpec {
  int width = 0;
  int height = 0;
  double anchor_x = 0.0;  // offset of the reference origin inside the canvas
  double anchor_y = 0.0;

  // 2x canvas with the reference centered.
  static CanvasSpec for_reference(int ref_width, int ref_height) {
    return CanvasSpec{2 * ref_width, 2 * ref_height, ref_width / 2.0,
                      ref_height / 2.0};
  }
};

// Layers of the stitched frame; size is exactly twice the reference size.
struct StitchCanvas {
  CanvasSpec spec;
  Image ref_padded;
  Image warped_target;
  Mask m_ref;   // reference footprint
  Mask m_wt;    // splat-covered pixels
  Mask hole;    // neither footprint
  Image stitched;
};

struct ForwardWarpResult {
  Image image;
  Mask occupancy;
  std::vector<double> weight_sum;  // per output pixel, exposed for diagnostics
};

inline constexpr double kSplatWeightEps = 1e-8;
inline constexpr int kSplatChunks = 16;

// Softmax splatting: every source pixel q scatters to the 4 bilinear
// neighbors of q + warp(q) + anchor with weight b(.) * exp(Z(q)); outputs are
// weight-normalized, pixels with weight-sum <= eps are holes (value 0).
// Accumulation runs over a fixed number of row chunks merged in ascending
// order, so the result does not depend on the worker count.
ForwardWarpResult forward_warp_softmax(const Image& image, const WarpField& warp,
                                       const ImportanceMap& importance,
                                       const CanvasSpec& canvas,
                                       const Mask* validity = nullptr,
                                       int workers = 1);

// Canvas-side support of a source-pixel subset: occupancy of the splats cast
// by source pixels with the bit set (uniform importance). Used to carry the
// OV region onto the canvas.
Mask splat_support(const WarpField& warp, const Mask& source_bits,
                   const CanvasSpec& canvas);

struct BackwardWarpResult {
  Image image;
  Mask in_bounds;  // 0 where the sample fell outside the source image
};

// Bilinear gather: output(x) = image sampled at x + warp(x).
BackwardWarpResult backward_warp(const Image& image, const WarpField& warp);

// Z = -beta * depth / mean(valid depth); sentinel-depth pixels get -20.
ImportanceMap importance_from_depth(const DepthMap& depth_t, double beta);

// Pads the reference image onto the canvas at the anchor and derives its
// occupancy footprint. Throws AnchorOutOfCanvas if it does not fit.
void to_canvas(const Image& ref, const CanvasSpec& spec, Image& ref_padded,
               Mask& m_ref);

// Assembles every layer except the final stitched image.
StitchCanvas make_canvas(const Image& ref, const Image& target,
                         const WarpField& warp, const ImportanceMap& importance,
                         const Mask* validity = nullptr, int workers = 1);

}  // namespace stitchkit
