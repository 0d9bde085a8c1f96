#pragma once

#include <optional>
#include <string>

#include "stitchkit/losses.hpp"
#include "stitchkit/scene.hpp"
#include "stitchkit/warp_ops.hpp"

namespace stitchkit {

// (I^R + I^WT)/2 on the shared footprint, the single available layer on
// exclusive regions, 0 on holes.
Image average_blend(const StitchCanvas& canvas);

struct FillResult {
  Image image;
  std::size_t unfillable = 0;  // hole pixels with no data in their component
  int iterations = 0;
};

// Jacobi iteration of the discrete Laplace equation on hole pixels with
// Dirichlet boundary from the non-hole neighbors.
FillResult fill_holes_diffusion(const Image& image, const Mask& hole,
                                int max_iters = 2000, double tol = 1e-5);

// Hole components that do not touch the canvas border.
Mask enclosed_holes(const Mask& hole);

// The OV region on the canvas: supported by overlap-source splats, free of
// non-overlap contamination, inside both footprints.
Mask canvas_overlap_region(const WarpField& warp, const Mask& warp_valid,
                           const Mask& overlap, const StitchCanvas& canvas);

// Distance-transform feathering inside the overlap band; exclusive regions
// are left untouched.
Image feather_blend(const StitchCanvas& canvas, double feather_px);

enum class EstimatorChoice { oracle, homography, file };
enum class BlendChoice { average, feather };

struct PipelineOptions {
  EstimatorChoice estimator = EstimatorChoice::oracle;
  BlendChoice blend = BlendChoice::average;
  bool fill_holes = true;
  double feather_px = 8.0;
  double importance_beta = 10.0;
  std::optional<std::string> warp_file;  // for EstimatorChoice::file
  int workers = 1;
  std::uint64_t seed = 7;  // correspondence sampling for the homography fit
};

struct PipelineResult {
  StitchCanvas canvas;
  WarpField warp_used;
  Mask warp_valid;
  double warp_loss_value = 0.0;
  ReconLoss recon;
  double sampson_loss = 0.0;
  double masked_psnr_db = 0.0;
  std::size_t unfillable_holes = 0;
};

// Full stitch: estimator -> forward splat -> canvas -> blend -> hole fill,
// with the loss evaluators run on the result.
PipelineResult stitch_pipeline(const DatasetSample& sample,
                               const PipelineOptions& options);

}  // namespace stitchkit
