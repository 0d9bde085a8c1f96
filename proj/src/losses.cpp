#include "stitchkit/losses.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace stitchkit {

WarpLossResult warp_loss(const WarpField& w, const WarpField& w_gt,
                         const Mask& overlap, double alpha) {
  if (w.width != w_gt.width || w.height != w_gt.height ||
      overlap.width != w.width || overlap.height != w.height)
    throw DimensionMismatch("warp_loss: inconsistent dimensions");
  if (alpha < 0.0) throw InvalidSpec("warp_loss: alpha must be >= 0");

  double ov_sum = 0.0, nov_sum = 0.0;
  std::size_t ov_n = 0, nov_n = 0;
  for (int y = 0; y < w.height; ++y)
    for (int x = 0; x < w.width; ++x) {
      const float* a = w.at(x, y);
      const float* b = w_gt.at(x, y);
      const double l1 = std::abs(double(a[0]) - b[0]) + std::abs(double(a[1]) - b[1]);
      if (overlap.at(x, y)) {
        ov_sum += l1;
        ++ov_n;
      } else {
        nov_sum += l1;
        ++nov_n;
      }
    }

  WarpLossResult r;
  r.empty_ov = ov_n == 0;
  r.empty_nov = nov_n == 0;
  r.ov_mean = ov_n ? ov_sum / double(ov_n) : 0.0;
  r.nov_mean = nov_n ? nov_sum / double(nov_n) : 0.0;
  r.total = r.ov_mean + alpha * r.nov_mean;
  return r;
}

ReconLoss recon_loss(const Image& i_s, const Image& i_r, const Image& i_wt,
                     const Mask& m_r, const Mask& m_wt) {
  if (!i_s.same_size(i_r) || !i_s.same_size(i_wt) || m_r.width != i_s.width ||
      m_r.height != i_s.height || m_wt.width != i_s.width || m_wt.height != i_s.height)
    throw DimensionMismatch("recon_loss: layers are not on the same canvas");

  double sum_r = 0.0, sum_wt = 0.0;
  std::size_t n_r = 0, n_wt = 0;
  const std::size_t pixels = std::size_t(i_s.width) * i_s.height;
  for (std::size_t p = 0; p < pixels; ++p) {
    if (m_r.bits[p]) {
      for (int c = 0; c < 3; ++c)
        sum_r += std::abs(double(i_s.data[3 * p + c]) - i_r.data[3 * p + c]);
      ++n_r;
    }
    if (m_wt.bits[p]) {
      for (int c = 0; c < 3; ++c)
        sum_wt += std::abs(double(i_s.data[3 * p + c]) - i_wt.data[3 * p + c]);
      ++n_wt;
    }
  }

  ReconLoss r;
  r.empty_ref = n_r == 0;
  r.empty_wt = n_wt == 0;
  r.l_ref = n_r ? sum_r / double(3 * n_r) : 0.0;
  r.l_wt = n_wt ? sum_wt / double(3 * n_wt) : 0.0;
  r.total = r.l_ref + r.l_wt;
  return r;
}

LsganLosses lsgan_losses(const std::vector<double>& d_real,
                         const std::vector<double>& d_fake) {
  if (d_real.empty() || d_fake.empty())
    throw InvalidSpec("lsgan_losses: empty score map");
  double real_term = 0.0, fake_term = 0.0, adv_term = 0.0;
  for (double s : d_real) real_term += (s - 1.0) * (s - 1.0);
  for (double s : d_fake) {
    fake_term += s * s;
    adv_term += (s - 1.0) * (s - 1.0);
  }
  LsganLosses out;
  out.l_d = real_term / double(d_real.size()) + fake_term / double(d_fake.size());
  out.l_adv = adv_term / double(d_fake.size());
  return out;
}

double sigmo_total_loss(double recon_total, double l_adv, const LossConfig& config) {
  if (recon_total < 0.0 || l_adv < 0.0)
    throw InvalidSpec("sigmo_total_loss: components must be >= 0");
  return config.lambda_r * recon_total + config.lambda_a * l_adv;
}

SampsonResult sampson_epipolar_loss(const WarpField& w, const FundamentalMatrix& f,
                                    const Mask& region) {
  if (region.width != w.width || region.height != w.height)
    throw DimensionMismatch("sampson_epipolar_loss: mask does not match warp");

  const Eigen::Matrix3d& F = f.F;
  const Eigen::Matrix3d Ft = F.transpose();
  SampsonResult r;
  double sum = 0.0;
  for (int y = 0; y < w.height; ++y)
    for (int x = 0; x < w.width; ++x) {
      if (!region.at(x, y)) continue;
      const float* d = w.at(x, y);
      const Eigen::Vector3d xt(x, y, 1.0);
      const Eigen::Vector3d xr(x + double(d[0]), y + double(d[1]), 1.0);
      const Eigen::Vector3d Fx = F * xt;
      const Eigen::Vector3d Ftxp = Ft * xr;
      const double num = xr.dot(Fx);
      double den = Fx.x() * Fx.x() + Fx.y() * Fx.y() + Ftxp.x() * Ftxp.x() +
                   Ftxp.y() * Ftxp.y();
      if (den < 1e-12) {
        ++r.skipped;
        continue;
      }
      sum += num * num / den;
      ++r.counted;
    }
  r.loss = r.counted ? sum / double(r.counted) : 0.0;
  return r;
}

std::vector<std::pair<double, double>> default_epe_buckets() {
  return {{0.2, 0.4}, {0.4, 0.6}, {0.6, 0.8}};
}

EpeReport epe_report(const std::vector<EpeSampleInput>& samples,
                     std::vector<std::pair<double, double>> buckets) {
  if (samples.empty()) throw InvalidSpec("epe_report: empty sample list");
  EpeReport rep;
  rep.buckets = std::move(buckets);
  rep.ov.assign(rep.buckets.size() + 1, {});   // + "other"
  rep.nov.assign(rep.buckets.size() + 1, {});
  rep.sample_count = samples.size();

  for (const auto& s : samples) {
    std::size_t bi = rep.buckets.size();  // "other" by default
    for (std::size_t i = 0; i < rep.buckets.size(); ++i)
      if (s.overlap_ratio >= rep.buckets[i].first &&
          s.overlap_ratio < rep.buckets[i].second) {
        bi = i;
        break;
      }
    const WarpField& w = *s.w;
    const WarpField& g = *s.w_gt;
    if (w.width != g.width || w.height != g.height)
      throw DimensionMismatch("epe_report: warp/gt size mismatch for " + s.id);
    for (int y = 0; y < w.height; ++y)
      for (int x = 0; x < w.width; ++x) {
        if (s.validity && !s.validity->at(x, y)) continue;
        const float* a = w.at(x, y);
        const float* b = g.at(x, y);
        const double du = double(a[0]) - b[0];
        const double dv = double(a[1]) - b[1];
        const double epe = std::sqrt(du * du + dv * dv);
        auto& cell = s.overlap->at(x, y) ? rep.ov[bi] : rep.nov[bi];
        cell.sum += epe;
        ++cell.count;
        auto& total = s.overlap->at(x, y) ? rep.ov_total : rep.nov_total;
        total.sum += epe;
        ++total.count;
      }
  }
  return rep;
}

std::string EpeReport::to_text(const std::string& title) const {
  std::ostringstream ss;
  ss << title << "  (" << sample_count << " samples; per-region means; "
     << "buckets left-closed)\n";
  ss << "          ";
  char buf[64];
  for (const auto& b : buckets) {
    std::snprintf(buf, sizeof buf, "%3.0f~%-3.0f%%  ", 100 * b.first, 100 * b.second);
    ss << buf;
  }
  ss << "   other       total\n";
  for (int region = 0; region < 2; ++region) {
    const auto& cells = region == 0 ? ov : nov;
    const auto& total = region == 0 ? ov_total : nov_total;
    ss << (region == 0 ? "  OV      " : "  NOV     ");
    for (const auto& c : cells) {
      std::snprintf(buf, sizeof buf, "%9.4f  ", c.mean());
      ss << buf;
    }
    std::snprintf(buf, sizeof buf, "%9.4f\n", total.mean());
    ss << buf;
  }
  return ss.str();
}

std::string EpeReport::to_json() const {
  nlohmann::json j;
  j["sample_count"] = sample_count;
  j["normalization"] = "per-region mean";
  auto cell_json = [](const EpeCell& c) {
    return nlohmann::json{{"mean", c.mean()}, {"pixels", c.count}};
  };
  for (std::size_t i = 0; i <= buckets.size(); ++i) {
    nlohmann::json row;
    if (i < buckets.size()) {
      row["bucket"] = {buckets[i].first, buckets[i].second};
    } else {
      row["bucket"] = "other";
    }
    row["ov"] = cell_json(ov[i]);
    row["nov"] = cell_json(nov[i]);
    j["rows"].push_back(row);
  }
  j["total"]["ov"] = cell_json(ov_total);
  j["total"]["nov"] = cell_json(nov_total);
  return j.dump(2);
}

double masked_psnr(const Image& i_r, const Image& i_wt, const Mask& overlap,
                   const Mask& hole, double peak) {
  if (!i_r.same_size(i_wt) || overlap.width != i_r.width ||
      overlap.height != i_r.height || hole.width != i_r.width ||
      hole.height != i_r.height)
    throw DimensionMismatch("masked_psnr: inconsistent dimensions");

  double sum = 0.0;
  std::size_t n = 0;
  const std::size_t pixels = std::size_t(i_r.width) * i_r.height;
  for (std::size_t p = 0; p < pixels; ++p) {
    if (!overlap.bits[p] || hole.bits[p]) continue;
    for (int c = 0; c < 3; ++c) {
      const double d = double(i_r.data[3 * p + c]) - i_wt.data[3 * p + c];
      sum += d * d;
    }
    ++n;
  }
  if (n == 0) throw EmptyEvalRegion("masked_psnr: overlap minus holes is empty");
  const double mse = sum / double(3 * n);
  if (mse == 0.0) return 99.0;
  return std::min(99.0, 10.0 * std::log10(peak * peak / mse));
}

}  // namespace stitchkit
