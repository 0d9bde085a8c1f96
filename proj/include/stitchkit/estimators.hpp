#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "stitchkit/scene.hpp"
#include "stitchkit/types.hpp"

namespace stitchkit {

struct Correspondence {
  Eigen::Vector2d x_t;
  Eigen::Vector2d x_r;
  double weight = 1.0;
};

struct Homography {
  Eigen::Matrix3d H = Eigen::Matrix3d::Identity();
};

struct RansacParams {
  int iterations = 1000;
  double inlier_px = 1.0;
  std::uint64_t seed = 0;
};

// Returns the GT warp after recomputing it from cameras + depth and checking
// the stored field against the recomputation (max deviation 1e-6 px).
WarpField oracle_warp(const DatasetSample& sample);

// Ideal matches drawn uniformly from the overlap mask; x_r = x_t + W_gt(x_t).
std::vector<Correspondence> sample_correspondences(const DatasetSample& sample,
                                                   std::size_t n,
                                                   std::uint64_t seed);

// RANSAC over 4-point minimal DLT fits with Hartley normalization; the final
// model is re-fit on the largest inlier set.
Homography fit_homography(const std::vector<Correspondence>& correspondences,
                          const RansacParams& ransac = {});

// Exact DLT on all correspondences (no RANSAC); used for oracles and tests.
Homography fit_homography_dlt(const std::vector<Correspondence>& correspondences);

struct HomographyWarp {
  WarpField warp;
  Mask valid;  // 0 where the homogeneous divisor vanishes
};

HomographyWarp homography_to_warp(const Homography& h, int width, int height);

// Transfer error |H x_t - x_r| per correspondence.
std::vector<double> transfer_errors(const Homography& h,
                                    const std::vector<Correspondence>& cs);

}  // namespace stitchkit
