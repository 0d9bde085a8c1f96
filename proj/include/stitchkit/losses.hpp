#pragma once

#include <string>
#include <vector>

#include "stitchkit/geometry.hpp"
#include "stitchkit/types.hpp"

namespace stitchkit {

struct LossConfig {
  double alpha = 0.3;     // NOV regularization weight
  double lambda_r = 1.0;
  double lambda_a = 0.1;
};

struct WarpLossResult {
  double total = 0.0;
  double ov_mean = 0.0;
  double nov_mean = 0.0;
  bool empty_ov = false;
  bool empty_nov = false;
};

// Per-region mean L1 of the displacement error: OV mean + alpha * NOV mean.
// An empty region contributes 0 and raises the corresponding warning flag.
WarpLossResult warp_loss(const WarpField& w, const WarpField& w_gt,
                         const Mask& overlap, double alpha);

struct ReconLoss {
  double total = 0.0;
  double l_ref = 0.0;
  double l_wt = 0.0;
  bool empty_ref = false;
  bool empty_wt = false;
};

// Hole-aware reconstruction terms: masked mean |I^S - I^R| over M^R plus
// masked mean |I^S - I^WT| over M^WT.
ReconLoss recon_loss(const Image& i_s, const Image& i_r, const Image& i_wt,
                     const Mask& m_r, const Mask& m_wt);

struct LsganLosses {
  double l_d = 0.0;
  double l_adv = 0.0;
};

// Least-squares adversarial objectives as pure functions of score maps.
LsganLosses lsgan_losses(const std::vector<double>& d_real,
                         const std::vector<double>& d_fake);

double sigmo_total_loss(double recon_total, double l_adv, const LossConfig& config);

struct SampsonResult {
  double loss = 0.0;
  std::size_t skipped = 0;  // degenerate-denominator pixels
  std::size_t counted = 0;
};

// Mean first-order epipolar (Sampson) residual of (x, x + W(x)) over the
// region, homogeneous pixel coordinates with 1 appended.
SampsonResult sampson_epipolar_loss(const WarpField& w, const FundamentalMatrix& f,
                                    const Mask& region);

struct EpeSampleInput {
  const WarpField* w = nullptr;
  const WarpField* w_gt = nullptr;
  const Mask* overlap = nullptr;
  const Mask* validity = nullptr;  // optional, restricts NOV to valid pixels
  double overlap_ratio = 0.0;
  std::string id;
};

struct EpeCell {
  double sum = 0.0;
  std::size_t count = 0;
  double mean() const { return count ? sum / double(count) : 0.0; }
};

struct EpeReport {
  std::vector<std::pair<double, double>> buckets;  // left-closed, right-open
  std::vector<EpeCell> ov;    // one per bucket + trailing "other"
  std::vector<EpeCell> nov;
  EpeCell ov_total;
  EpeCell nov_total;
  std::size_t sample_count = 0;

  std::string to_text(const std::string& title = "End-point error (px)") const;
  std::string to_json() const;
};

std::vector<std::pair<double, double>> default_epe_buckets();

EpeReport epe_report(const std::vector<EpeSampleInput>& samples,
                     std::vector<std::pair<double, double>> buckets =
                         default_epe_buckets());

// PSNR over overlap AND NOT hole, all three channels; returns the 99 dB cap
// when the masked MSE is exactly zero. Throws EmptyEvalRegion.
double masked_psnr(const Image& i_r, const Image& i_wt, const Mask& overlap,
                   const Mask& hole, double peak = 1.0);

}  // namespace stitchkit
