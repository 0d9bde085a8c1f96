#include "stitchkit/geometry.hpp"

#include <cmath>

namespace stitchkit {

GtWarp gt_warp_field(const Camera& cam_t, const Camera& cam_r,
                     const DepthMap& depth_t) {
  if (depth_t.width != cam_t.width || depth_t.height != cam_t.height)
    throw DimensionMismatch("depth map does not match target camera resolution");

  GtWarp out;
  out.warp = WarpField(cam_t.width, cam_t.height);
  out.validity = Mask(cam_t.width, cam_t.height, MaskRole::validity, 0);

  const Eigen::Matrix3d Kt_inv = cam_t.K.inverse();
  const Eigen::Matrix3d Rt_T = cam_t.R.transpose();

  for (int y = 0; y < cam_t.height; ++y) {
    for (int x = 0; x < cam_t.width; ++x) {
      const float d = depth_t.at(x, y);
      if (!depth_valid(d)) continue;
      const Eigen::Vector3d ray = Kt_inv * Eigen::Vector3d(x, y, 1.0);
      const Eigen::Vector3d world = Rt_T * (ray * double(d) - cam_t.t);
      const Eigen::Vector3d pc = cam_r.R * world + cam_r.t;
      if (std::abs(pc.z()) < 1e-12) continue;  // flagged invalid
      const Eigen::Vector3d h = cam_r.K * pc;
      float* w = out.warp.at(x, y);
      w[0] = float(h.x() / h.z() - x);
      w[1] = float(h.y() / h.z() - y);
      out.validity.at(x, y) = 1;
    }
  }
  return out;
}

Mask overlap_mask(const WarpField& warp, const Mask& validity,
                  const Camera& cam_t, const Camera& cam_r,
                  const DepthMap& depth_r, const DepthMap& depth_t,
                  double tau_occ) {
  if (warp.width != cam_t.width || warp.height != cam_t.height ||
      depth_t.width != warp.width || depth_t.height != warp.height ||
      depth_r.width != cam_r.width || depth_r.height != cam_r.height)
    throw DimensionMismatch("overlap_mask: inconsistent input dimensions");

  Mask ov(warp.width, warp.height, MaskRole::overlap, 0);
  const Eigen::Matrix3d Kt_inv = cam_t.K.inverse();
  const Eigen::Matrix3d Rt_T = cam_t.R.transpose();

  for (int y = 0; y < warp.height; ++y) {
    for (int x = 0; x < warp.width; ++x) {
      if (!validity.at(x, y)) continue;
      const float* w = warp.at(x, y);
      const double u = x + w[0];
      const double v = y + w[1];
      if (!cam_r.in_bounds(Eigen::Vector2d(u, v))) continue;

      // depth of this pixel's 3D point in the reference frame
      const float d = depth_t.at(x, y);
      if (!depth_valid(d)) continue;
      const Eigen::Vector3d ray = Kt_inv * Eigen::Vector3d(x, y, 1.0);
      const Eigen::Vector3d world = Rt_T * (ray * double(d) - cam_t.t);
      const double z_r = (cam_r.R * world + cam_r.t).z();
      if (z_r <= 0.0) continue;

      const float sampled = bilinear(depth_r.values, depth_r.width, depth_r.height, u, v);
      if (!std::isfinite(sampled)) continue;  // reference sees sky there
      if (std::abs(z_r - double(sampled)) > tau_occ * z_r) continue;  // occluded
      ov.at(x, y) = 1;
    }
  }
  return ov;
}

FundamentalMatrix fundamental_from_cameras(const Camera& cam_r,
                                           const Camera& cam_t) {
  const Eigen::Matrix3d R_rel = cam_r.R * cam_t.R.transpose();
  const Eigen::Vector3d t_rel = cam_r.t - R_rel * cam_t.t;
  if (t_rel.norm() <= 1e-9)
    throw DegenerateBaseline("zero baseline between cameras");

  Eigen::Matrix3d tx;
  tx << 0, -t_rel.z(), t_rel.y(), t_rel.z(), 0, -t_rel.x(), -t_rel.y(), t_rel.x(), 0;

  Eigen::Matrix3d F = cam_r.K.inverse().transpose() * tx * R_rel * cam_t.K.inverse();
  F /= F.norm();

  // deterministic sign: largest-magnitude entry positive
  double best = 0.0;
  for (int i = 0; i < 9; ++i)
    if (std::abs(F.data()[i]) > std::abs(best)) best = F.data()[i];
  if (best < 0.0) F = -F;
  return FundamentalMatrix{F};
}

}  // namespace stitchkit
