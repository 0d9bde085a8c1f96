#include "stitchkit/estimators.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "stitchkit/rng.hpp"

namespace stitchkit {

namespace {

struct Normalization {
  Eigen::Matrix3d T;
};

// Hartley normalization: translate to the centroid, scale to mean distance
// sqrt(2).
Normalization normalize_points(const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= double(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= double(pts.size());
  const double s = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
  Normalization n;
  n.T << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
  return n;
}

Eigen::Matrix3d dlt(const std::vector<Correspondence>& cs) {
  std::vector<Eigen::Vector2d> src, dst;
  src.reserve(cs.size());
  dst.reserve(cs.size());
  for (const auto& c : cs) {
    src.push_back(c.x_t);
    dst.push_back(c.x_r);
  }
  const auto nt = normalize_points(src);
  const auto nr = normalize_points(dst);

  Eigen::MatrixXd A(2 * cs.size(), 9);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const Eigen::Vector3d p = nt.T * src[i].homogeneous();
    const Eigen::Vector3d q = nr.T * dst[i].homogeneous();
    A.row(2 * i) << 0, 0, 0, -p.x(), -p.y(), -1, q.y() * p.x(), q.y() * p.y(), q.y();
    A.row(2 * i + 1) << p.x(), p.y(), 1, 0, 0, 0, -q.x() * p.x(), -q.x() * p.y(), -q.x();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d Hn;
  Hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return nr.T.inverse() * Hn * nt.T;
}

Eigen::Matrix3d canonical(Eigen::Matrix3d H) {
  if (std::abs(H(2, 2)) > 1e-9)
    H /= H(2, 2);
  else
    H /= H.norm();
  return H;
}

bool three_collinear(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                     const Eigen::Vector2d& c) {
  const double area = (b.x() - a.x()) * (c.y() - a.y()) -
                      (b.y() - a.y()) * (c.x() - a.x());
  return std::abs(area) < 1e-9;
}

bool degenerate_quad(const std::vector<Correspondence>& cs,
                     const std::array<std::size_t, 4>& idx) {
  for (int drop = 0; drop < 4; ++drop) {
    std::array<std::size_t, 3> k;
    int j = 0;
    for (int i = 0; i < 4; ++i)
      if (i != drop) k[j++] = idx[i];
    if (three_collinear(cs[k[0]].x_t, cs[k[1]].x_t, cs[k[2]].x_t)) return true;
    if (three_collinear(cs[k[0]].x_r, cs[k[1]].x_r, cs[k[2]].x_r)) return true;
  }
  return false;
}

}  // namespace

std::vector<double> transfer_errors(const Homography& h,
                                    const std::vector<Correspondence>& cs) {
  std::vector<double> errs;
  errs.reserve(cs.size());
  for (const auto& c : cs) {
    const Eigen::Vector3d q = h.H * c.x_t.homogeneous();
    if (std::abs(q.z()) < 1e-12) {
      errs.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    errs.push_back((q.hnormalized() - c.x_r).norm());
  }
  return errs;
}

Homography fit_homography_dlt(const std::vector<Correspondence>& cs) {
  if (cs.size() < 4) throw InvalidSpec("fit_homography: need at least 4 correspondences");
  Homography h{canonical(dlt(cs))};
  if (std::abs(h.H.determinant()) <= 1e-12)
    throw DegenerateConfiguration("homography fit is singular");
  return h;
}

Homography fit_homography(const std::vector<Correspondence>& cs,
                          const RansacParams& ransac) {
  if (cs.size() < 4) throw InvalidSpec("fit_homography: need at least 4 correspondences");
  if (cs.size() == 4) {
    if (degenerate_quad(cs, {0, 1, 2, 3}))
      throw DegenerateConfiguration("four correspondences are collinear-degenerate");
    return fit_homography_dlt(cs);
  }

  Rng rng(ransac.seed, 0x4A5);
  std::size_t best_inliers = 0;
  int best_iteration = -1;
  std::vector<std::uint8_t> best_mask;
  for (int it = 0; it < ransac.iterations; ++it) {
    std::array<std::size_t, 4> idx;
    for (int k = 0; k < 4; ++k) {
      bool fresh;
      do {
        idx[k] = std::size_t(rng.uniform_int(cs.size()));
        fresh = true;
        for (int j = 0; j < k; ++j) fresh = fresh && idx[j] != idx[k];
      } while (!fresh);
    }
    if (degenerate_quad(cs, idx)) continue;
    std::vector<Correspondence> minimal{cs[idx[0]], cs[idx[1]], cs[idx[2]], cs[idx[3]]};
    Homography h;
    try {
      h = fit_homography_dlt(minimal);
    } catch (const DegenerateConfiguration&) {
      continue;
    }
    const auto errs = transfer_errors(h, cs);
    std::vector<std::uint8_t> mask(cs.size(), 0);
    std::size_t inliers = 0;
    for (std::size_t i = 0; i < cs.size(); ++i)
      if (errs[i] < ransac.inlier_px) {
        mask[i] = 1;
        ++inliers;
      }
    // ties resolved toward the lowest iteration index
    if (inliers > best_inliers) {
      best_inliers = inliers;
      best_iteration = it;
      best_mask = std::move(mask);
    }
  }
  if (best_iteration < 0 || best_inliers < 4)
    throw DegenerateConfiguration("all RANSAC minimal samples were degenerate");

  std::vector<Correspondence> inlier_set;
  inlier_set.reserve(best_inliers);
  for (std::size_t i = 0; i < cs.size(); ++i)
    if (best_mask[i]) inlier_set.push_back(cs[i]);
  return fit_homography_dlt(inlier_set);
}

HomographyWarp homography_to_warp(const Homography& h, int width, int height) {
  if (std::abs(h.H.determinant()) <= 1e-12)
    throw DegenerateConfiguration("homography_to_warp: singular matrix");
  HomographyWarp out;
  out.warp = WarpField(width, height);
  out.valid = Mask(width, height, MaskRole::validity, 0);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const Eigen::Vector3d q = h.H * Eigen::Vector3d(x, y, 1.0);
      if (std::abs(q.z()) < 1e-9) continue;  // sent toward infinity
      float* w = out.warp.at(x, y);
      w[0] = float(q.x() / q.z() - x);
      w[1] = float(q.y() / q.z() - y);
      out.valid.at(x, y) = 1;
    }
  return out;
}

WarpField oracle_warp(const DatasetSample& sample) {
  const GtWarp gtw = gt_warp_field(sample.cam_target, sample.cam_ref,
                                   sample.depth_target);
  if (gtw.warp.width != sample.warp_gt.width ||
      gtw.warp.height != sample.warp_gt.height)
    throw InconsistentSample("stored warp has the wrong dimensions");
  for (std::size_t i = 0; i < gtw.warp.disp.size(); ++i)
    if (std::abs(double(gtw.warp.disp[i]) - sample.warp_gt.disp[i]) > 1e-6)
      throw InconsistentSample("stored warp deviates from the recomputed field");
  return gtw.warp;
}

std::vector<Correspondence> sample_correspondences(const DatasetSample& sample,
                                                   std::size_t n,
                                                   std::uint64_t seed) {
  if (n < 4) throw InvalidSpec("sample_correspondences: need n >= 4");
  std::vector<std::size_t> overlap_pixels;
  for (std::size_t i = 0; i < sample.overlap.bits.size(); ++i)
    if (sample.overlap.bits[i]) overlap_pixels.push_back(i);
  if (overlap_pixels.size() < n)
    throw InsufficientOverlap("overlap region smaller than the requested count");

  Rng rng(seed, 0xC0);
  std::vector<Correspondence> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t p = overlap_pixels[rng.uniform_int(overlap_pixels.size())];
    const int x = int(p % sample.overlap.width);
    const int y = int(p / sample.overlap.width);
    const float* w = sample.warp_gt.at(x, y);
    Correspondence c;
    c.x_t = Eigen::Vector2d(x, y);
    c.x_r = Eigen::Vector2d(x + double(w[0]), y + double(w[1]));
    out.push_back(c);
  }
  return out;
}

}  // namespace stitchkit
