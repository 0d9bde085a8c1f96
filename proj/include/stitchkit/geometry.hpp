#pragma once

#include <Eigen/Dense>

#include "stitchkit/camera.hpp"
#include "stitchkit/types.hpp"

namespace stitchkit {

// Rank-2 fundamental matrix, unit Frobenius norm, mapping target pixels to
// epipolar lines in the reference image: x_r^T F x_t = 0.
struct FundamentalMatrix {
  Eigen::Matrix3d F = Eigen::Matrix3d::Zero();
};

struct GtWarp {
  WarpField warp;
  Mask validity;  // 0 where depth is sentinel or projection degenerate
};

// Ground-truth dense warp from the target view into the reference view:
// back-project each target pixel at its depth, reproject into the reference
// camera, store the displacement. Degenerate pixels are flagged, not fatal.
GtWarp gt_warp_field(const Camera& cam_t, const Camera& cam_r,
                     const DepthMap& depth_t);

// Overlap bit set iff the warped position is inside the reference bounds, the
// source pixel is valid, and the reprojected depth agrees with the reference
// depth map within relative tolerance tau_occ (visibility test).
Mask overlap_mask(const WarpField& warp, const Mask& validity,
                  const Camera& cam_t, const Camera& cam_r,
                  const DepthMap& depth_r, const DepthMap& depth_t,
                  double tau_occ = 0.01);

// F = K_r^{-T} [t_rel]x R_rel K_t^{-1}, normalized to unit Frobenius norm with
// a deterministic sign. Throws DegenerateBaseline when the baseline vanishes.
FundamentalMatrix fundamental_from_cameras(const Camera& cam_r,
                                           const Camera& cam_t);

}  // namespace stitchkit
