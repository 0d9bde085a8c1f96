// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stitchkit/blend.hpp"
#include "stitchkit/dataset.hpp"
#include "stitchkit/estimators.hpp"
#include "stitchkit/geometry.hpp"
#include "stitchkit/io.hpp"
#include "stitchkit/losses.hpp"
#include "stitchkit/rng.hpp"
#include "stitchkit/scene.hpp"
#include "stitchkit/warp_ops.hpp"

using namespace stitchkit;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  (%s)\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

template <typename Fn>
void parallel_samples(int n, Fn&& fn) {
  const int jobs = 8;
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::future<void>> futs;
  for (int j = 0; j < jobs; ++j)
    futs.push_back(std::async(std::launch::async, worker));
  for (auto& f : futs) f.get();
}

double sample_oracle_psnr(const DatasetSample& s) {
  const ImportanceMap imp = importance_from_depth(s.depth_target, 10.0);
  StitchCanvas canvas =
      make_canvas(s.image_ref, s.image_target, s.warp_gt, imp, &s.validity);
  const Mask ovl = canvas_overlap_region(s.warp_gt, s.validity, s.overlap, canvas);
  return masked_psnr(canvas.ref_padded, canvas.warped_target, ovl, canvas.hole);
}

// mean OV EPE of a prediction against the GT field
double ov_epe(const WarpField& pred, const Mask& pred_valid,
              const DatasetSample& s) {
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < pred.height; ++y)
    for (int x = 0; x < pred.width; ++x) {
      if (!s.overlap.at(x, y) || !pred_valid.at(x, y)) continue;
      const float* a = pred.at(x, y);
      const float* b = s.warp_gt.at(x, y);
      sum += std::hypot(double(a[0]) - b[0], double(a[1]) - b[1]);
      ++n;
    }
  return n ? sum / double(n) : 0.0;
}

// ----- criterion 1: oracle alignment on a representative 50-sample corpus

void criterion_1() {
  const Layout layouts[] = {Layout::single_plane, Layout::two_plane,
                            Layout::heightfield, Layout::box_room};
  const TextureKind textures[] = {TextureKind::checker, TextureKind::value_noise,
                                  TextureKind::voronoi};
  const OverlapBucket buckets[] = {{0.2, 0.4}, {0.4, 0.6}, {0.6, 0.8}};
  const int n = 50;
  std::vector<double> psnr(n, 0.0);
  std::vector<int> ok(n, 0);
  parallel_samples(n, [&](int i) {
    SceneSpec spec;
    spec.layout = layouts[i % 4];
    spec.texture.kind = textures[(i / 4) % 3];
    try {
      auto s = generate_pair(spec, buckets[i % 3], 1000 + i, 256, 256);
      psnr[i] = sample_oracle_psnr(s);
      ok[i] = 1;
    } catch (const BucketUnreachable&) {
      ok[i] = -1;  // do not count unreachable buckets against the criterion
    }
  });
  int usable = 0, passed = 0;
  double worst = 1e9;
  for (int i = 0; i < n; ++i) {
    if (ok[i] != 1) continue;
    ++usable;
    if (psnr[i] >= 28.0) ++passed;
    worst = std::min(worst, psnr[i]);
  }
  std::ostringstream d;
  d << passed << "/" << usable << " samples >= 28 dB, worst " << worst << " dB";
  report(1, usable >= 45 && double(passed) >= 0.95 * double(usable), d.str());
}

// ----- criterion 2: parallax separation, homography vs oracle

struct ParallaxCorpus {
  std::vector<DatasetSample> two_plane;
  std::vector<DatasetSample> single_plane;
};

ParallaxCorpus make_parallax_corpus() {
  ParallaxCorpus c;
  c.two_plane.resize(20);
  c.single_plane.resize(20);
  parallel_samples(40, [&](int i) {
    if (i < 20) {
      SceneSpec spec;
      spec.layout = Layout::two_plane;
      spec.parallax = 1.0;  // far/near = 4/2 -> depth ratio 2
      // keep only poses with baseline/near >= 0.1
      for (std::uint64_t seed = 100 * std::uint64_t(i) + 1;; ++seed) {
        auto s = generate_pair(spec, {0.3, 0.6}, seed, 256, 256);
        const double b = (s.cam_target.center() - s.cam_ref.center()).norm();
        if (b / spec.near < 0.1) continue;
        c.two_plane[i] = std::move(s);
        break;
      }
    } else {
      SceneSpec spec;
      spec.layout = Layout::single_plane;
      c.single_plane[i - 20] =
          generate_pair(spec, {0.3, 0.6}, 5000 + std::uint64_t(i), 256, 256);
    }
  });
  return c;
}

void criterion_2(const ParallaxCorpus& corpus,
                 std::vector<WarpField>* homog_out,
                 std::vector<Mask>* homog_valid_out) {
  homog_out->resize(20);
  homog_valid_out->resize(20);
  std::vector<double> epe_two(20, 0.0), epe_single(20, 0.0), epe_oracle(20, 0.0);
  parallel_samples(40, [&](int i) {
    const DatasetSample& s =
        i < 20 ? corpus.two_plane[i] : corpus.single_plane[i - 20];
    const auto cs = sample_correspondences(s, 200, s.seed);
    auto hw = homography_to_warp(
        fit_homography(cs, RansacParams{1000, 1.0, s.seed}),
        s.warp_gt.width, s.warp_gt.height);
    if (i < 20) {
      epe_two[i] = ov_epe(hw.warp, hw.valid, s);
      epe_oracle[i] = ov_epe(s.warp_gt, s.validity, s);
      (*homog_out)[i] = std::move(hw.warp);
      (*homog_valid_out)[i] = std::move(hw.valid);
    } else {
      epe_single[i - 20] = ov_epe(hw.warp, hw.valid, s);
    }
  });
  double mean_two = 0.0, mean_single = 0.0, oracle_max = 0.0;
  for (int i = 0; i < 20; ++i) {
    mean_two += epe_two[i] / 20.0;
    mean_single += epe_single[i] / 20.0;
    oracle_max = std::max(oracle_max, epe_oracle[i]);
  }
  std::ostringstream d;
  d << "homography OV EPE: two-plane " << mean_two << " px, single-plane "
    << mean_single << " px; oracle " << oracle_max;
  report(2, mean_two >= 2.0 && oracle_max == 0.0 && mean_single < 0.1, d.str());
}

// ----- criterion 3: epipolar consistency under tangent/normal perturbation

void criterion_3(const ParallaxCorpus& corpus) {
  double worst_gt = 0.0, worst_along = 0.0, best_across = 1e30;
  for (const auto& s : corpus.two_plane) {
    const auto fm = fundamental_from_cameras(s.cam_ref, s.cam_target);
    worst_gt = std::max(worst_gt,
                        sampson_epipolar_loss(s.warp_gt, fm, s.overlap).loss);
    WarpField along = s.warp_gt, across = s.warp_gt;
    for (int y = 0; y < s.warp_gt.height; ++y)
      for (int x = 0; x < s.warp_gt.width; ++x) {
        if (!s.overlap.at(x, y)) continue;
        Eigen::Vector3d line = fm.F * Eigen::Vector3d(x, y, 1.0);
        const double n = std::hypot(line(0), line(1));
        if (n < 1e-12) continue;
        along.at(x, y)[0] += float(-line(1) / n);  // 1 px along the line
        along.at(x, y)[1] += float(line(0) / n);
        across.at(x, y)[0] += float(line(0) / n);  // 1 px across
        across.at(x, y)[1] += float(line(1) / n);
      }
    worst_along = std::max(worst_along,
                           sampson_epipolar_loss(along, fm, s.overlap).loss);
    best_across = std::min(best_across,
                           sampson_epipolar_loss(across, fm, s.overlap).loss);
  }
  std::ostringstream d;
  d << "gt " << worst_gt << ", along " << worst_along << ", across "
    << best_across;
  report(3, worst_gt < 1e-10 && worst_along < 1e-8 && best_across > 1e-4,
         d.str());
}

// ----- criterion 4: Eq. 1 alpha behavior on fixed homography predictions

void criterion_4(const ParallaxCorpus& corpus,
                 const std::vector<WarpField>& homog,
                 const std::vector<Mask>& homog_valid) {
  (void)homog_valid;
  bool increasing = true, alpha0_exact = true, any_nov = false;
  for (int i = 0; i < 20; ++i) {
    const DatasetSample& s = corpus.two_plane[i];
    const auto r0 = warp_loss(homog[i], s.warp_gt, s.overlap, 0.0);
    if (r0.nov_mean > 0.0) any_nov = true;
    if (std::abs(r0.total - r0.ov_mean) > 1e-12) alpha0_exact = false;
    double prev = r0.total;
    for (double a : {0.3, 0.5, 1.0}) {
      const double v = warp_loss(homog[i], s.warp_gt, s.overlap, a).total;
      if (!(v > prev)) increasing = false;
      prev = v;
    }
  }
  std::ostringstream d;
  d << "strictly increasing over {0,0.3,0.5,1.0}: " << (increasing ? "yes" : "no")
    << ", alpha=0 == OV mean: " << (alpha0_exact ? "yes" : "no");
  report(4, increasing && alpha0_exact && any_nov, d.str());
}

// ----- criterion 5: splatting unit suite

void criterion_5() {
  bool identity_ok = true, shift_ok = true, softmax_ok = true,
       conserve_ok = true, jobs_ok = true;

  Rng rng(5);
  Image img(16, 16);
  for (auto& v : img.data) v = float(rng.uniform());

  {  // identity
    WarpField w(16, 16);
    ImportanceMap z(16, 16, 0.0f);
    auto res = forward_warp_softmax(img, w, z, CanvasSpec{16, 16, 0, 0});
    for (std::size_t i = 0; i < img.data.size(); ++i)
      if (std::abs(res.image.data[i] - img.data[i]) > 1e-6) identity_ok = false;
  }
  {  // integer shift
    WarpField w(16, 16);
    for (std::size_t i = 0; i < 256; ++i) w.disp[2 * i] = 1.0f;
    ImportanceMap z(16, 16, 0.0f);
    auto res = forward_warp_softmax(img, w, z, CanvasSpec{16, 16, 0, 0});
    for (int y = 0; y < 16 && shift_ok; ++y) {
      if (res.occupancy.at(0, y)) shift_ok = false;
      for (int x = 1; x < 16; ++x)
        for (int c = 0; c < 3; ++c)
          if (res.image.at(x, y)[c] != img.at(x - 1, y)[c]) shift_ok = false;
    }
  }
  {  // 2-pixel softmax collision
    Image two(3, 1);
    const float a[3] = {0.9f, 0.1f, 0.4f}, b[3] = {0.2f, 0.8f, 0.6f};
    for (int c = 0; c < 3; ++c) {
      two.at(0, 0)[c] = a[c];
      two.at(2, 0)[c] = b[c];
    }
    WarpField w(3, 1);
    w.at(0, 0)[0] = 1.0f;
    w.at(2, 0)[0] = -1.0f;
    w.at(1, 0)[1] = 9.0f;
    ImportanceMap z(3, 1, 0.0f);
    z.at(0, 0) = 1.25f;
    z.at(2, 0) = -0.5f;
    auto res = forward_warp_softmax(two, w, z, CanvasSpec{3, 1, 0, 0});
    // double accumulation; only the final float cast rounds, so the result
    // matches the identically-rounded formula to 1e-12 exactly
    const double wa = std::exp(1.25), wb = std::exp(-0.5);
    for (int c = 0; c < 3; ++c) {
      const float want = float((a[c] * wa + b[c] * wb) / (wa + wb));
      if (std::abs(double(res.image.at(1, 0)[c]) - double(want)) > 1e-12)
        softmax_ok = false;
    }
  }
  {  // weight conservation for fully-interior sources
    WarpField w(16, 16);
    Rng r2(6);
    for (auto& v : w.disp) v = float(r2.uniform(-1.5, 1.5));
    ImportanceMap z(16, 16, 0.0f);
    auto res = forward_warp_softmax(img, w, z, CanvasSpec{24, 24, 4, 4});
    double total = 0.0;
    for (double v : res.weight_sum) total += v;
    if (std::abs(total - 256.0) > 1e-9) conserve_ok = false;
  }
  {  // worker-count independence
    WarpField w(64, 64);
    Image big(64, 64);
    ImportanceMap z(64, 64);
    Rng r3(7);
    for (auto& v : big.data) v = float(r3.uniform());
    for (auto& v : w.disp) v = float(r3.uniform(-10.0, 10.0));
    for (auto& v : z.z) v = float(r3.uniform(-15.0, 15.0));
    const auto spec = CanvasSpec::for_reference(64, 64);
    auto base = forward_warp_softmax(big, w, z, spec, nullptr, 1);
    for (int jobs : {2, 5, 8})
      if (forward_warp_softmax(big, w, z, spec, nullptr, jobs).image.data !=
          base.image.data)
        jobs_ok = false;
  }
  std::ostringstream d;
  d << "identity " << identity_ok << ", shift " << shift_ok << ", softmax "
    << softmax_ok << ", conservation " << conserve_ok << ", jobs " << jobs_ok;
  report(5, identity_ok && shift_ok && softmax_ok && conserve_ok && jobs_ok,
         d.str());
}

// ----- criterion 6: loss-evaluator exactness

void criterion_6() {
  bool eq2_ok = true, eq3_ok = true, eq4_ok = true;
  {  // Eq. 2 toy case on a 4x4 canvas
    Image s(4, 4, 0.3f), r(4, 4, 0.3f), wt(4, 4, 0.3f);
    Mask m_r(4, 4, MaskRole::occupancy_ref, 0);
    Mask m_wt(4, 4, MaskRole::occupancy_warped_target, 0);
    int off = 0;
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) {
        if (x == 0) {
          m_r.at(x, y) = 1;
        } else {
          m_wt.at(x, y) = 1;
          if (off < 10) {
            for (int c = 0; c < 3; ++c) wt.at(x, y)[c] = 0.8f;
            ++off;
          }
        }
      }
    const auto l = recon_loss(s, r, wt, m_r, m_wt);
    const double want_wt = 0.5 * 10.0 / 12.0;
    if (l.l_ref != 0.0) eq2_ok = false;
    if (std::abs(l.l_wt - want_wt) > 1e-12) eq2_ok = false;
    if (std::abs(l.total - want_wt) > 1e-12) eq2_ok = false;
  }
  {  // Eq. 3 exact cases
    std::vector<double> ones(5, 1.0), zeros(5, 0.0);
    const auto perfect = lsgan_losses(ones, zeros);
    const auto fooled = lsgan_losses(ones, ones);
    if (perfect.l_d != 0.0 || perfect.l_adv != 1.0 || fooled.l_adv != 0.0)
      eq3_ok = false;
  }
  {  // Eq. 4 with the default weights
    LossConfig cfg;
    if (sigmo_total_loss(1.0, 1.0, cfg) != 1.0 + 0.1) eq4_ok = false;
    if (sigmo_total_loss(0.4, 0.25, cfg) != 0.4 + 0.1 * 0.25) eq4_ok = false;
    if (sigmo_total_loss(0.0, 0.0, cfg) != 0.0) eq4_ok = false;
  }
  std::ostringstream d;
  d << "Eq.2 " << eq2_ok << ", Eq.3 " << eq3_ok << ", Eq.4 " << eq4_ok;
  report(6, eq2_ok && eq3_ok && eq4_ok, d.str());
}

// ----- criterion 7: format round trips and fault injection

void criterion_7() {
  const fs::path dir = fs::temp_directory_path() / "sk_accept_io";
  fs::remove_all(dir);
  fs::create_directories(dir);
  bool round_ok = true, fault_ok = true;
  Rng rng(8);

  WarpField w(11, 7);
  for (auto& v : w.disp) v = float(rng.uniform(-30.0, 30.0));
  write_flo(dir / "w.flo", w);
  if (read_flo(dir / "w.flo").disp != w.disp) round_ok = false;

  DepthMap depth(9, 5);
  for (auto& v : depth.values) v = float(rng.uniform(0.5, 8.0));
  depth.at(2, 2) = kDepthSentinel;
  write_pfm(dir / "d.pfm", depth);
  if (read_pfm(dir / "d.pfm").values != depth.values) round_ok = false;

  Mask m(8, 8, MaskRole::overlap, 0);
  for (auto& b : m.bits) b = rng.uniform() < 0.5;
  write_png_mask(dir / "m.png", m);
  if (read_png_mask(dir / "m.png").bits != m.bits) round_ok = false;

  Camera cam = default_camera(77, 55);
  cam.R = Eigen::AngleAxisd(0.21, Eigen::Vector3d::UnitY()).toRotationMatrix();
  cam.t = Eigen::Vector3d(0.3, 0.1, -0.2);
  Camera cam_back = Camera::from_json(cam.to_json());
  if ((cam_back.K - cam.K).norm() != 0.0 || (cam_back.R - cam.R).norm() != 0.0 ||
      (cam_back.t - cam.t).norm() != 0.0 || cam_back.width != 77)
    round_ok = false;

  // fault injection: corrupted magic and truncated payloads
  auto bytes = read_text_file(dir / "w.flo");
  auto bad = bytes;
  bad[0] = 'z';
  write_text_file(dir / "bad.flo", bad);
  try {
    read_flo(dir / "bad.flo");
    fault_ok = false;
  } catch (const BadMagic&) {
  }
  bytes.resize(bytes.size() - 8);
  write_text_file(dir / "trunc.flo", bytes);
  try {
    read_flo(dir / "trunc.flo");
    fault_ok = false;
  } catch (const TruncatedFile&) {
  }
  auto pfm = read_text_file(dir / "d.pfm");
  pfm[0] = 'X';
  write_text_file(dir / "bad.pfm", pfm);
  try {
    read_pfm(dir / "bad.pfm");
    fault_ok = false;
  } catch (const BadMagic&) {
  }
  write_text_file(dir / "bad.png", "not a png at all");
  try {
    read_png_mask(dir / "bad.png");
    fault_ok = false;
  } catch (const BadMagic&) {
  }
  fs::remove_all(dir);
  std::ostringstream d;
  d << "round trips bit-identical: " << round_ok
    << ", named faults raised: " << fault_ok;
  report(7, round_ok && fault_ok, d.str());
}

// ----- criterion 8: canvas contract

void criterion_8() {
  SceneSpec spec;
  spec.layout = Layout::two_plane;
  auto s = generate_pair(spec, {0.4, 0.6}, 321, 96, 80);
  const ImportanceMap imp = importance_from_depth(s.depth_target, 10.0);
  auto canvas = make_canvas(s.image_ref, s.image_target, s.warp_gt, imp, &s.validity);
  const bool dims_ok = canvas.spec.width == 192 && canvas.spec.height == 160;
  const bool bits_ok = canvas.m_ref.count() == std::size_t(96) * 80;

  bool exclusive_ok = true;
  canvas.stitched = average_blend(canvas);
  Image feathered = feather_blend(canvas, 8.0);
  for (int y = 0; y < canvas.spec.height && exclusive_ok; ++y)
    for (int x = 0; x < canvas.spec.width; ++x) {
      const bool r = canvas.m_ref.at(x, y), t = canvas.m_wt.at(x, y);
      if (r == t) continue;  // only exclusive pixels checked
      const float* want = r ? canvas.ref_padded.at(x, y)
                            : canvas.warped_target.at(x, y);
      for (int c = 0; c < 3; ++c)
        if (canvas.stitched.at(x, y)[c] != want[c] ||
            feathered.at(x, y)[c] != want[c]) {
          exclusive_ok = false;
          break;
        }
    }
  std::ostringstream d;
  d << "2x dims " << dims_ok << ", |M^R| " << bits_ok
    << ", exclusive regions bit-exact " << exclusive_ok;
  report(8, dims_ok && bits_ok && exclusive_ok, d.str());
}

// ----- criterion 9: report layouts via the CLI

void criterion_9() {
  const fs::path data = fs::temp_directory_path() / "sk_accept_cli";
  fs::remove_all(data);
  auto run = [&](const std::string& args) {
    const std::string cmd =
        std::string(STITCHKIT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  bool ok = run("generate --out " + data.string() +
                " --count 3 --buckets 20-40,40-60,60-80 --layout two_plane"
                " --size 64x64 --seed 77") == 0;
  const fs::path rep = data / "report.txt";
  ok = ok && run("evaluate --data " + data.string() +
                 " --pred homography --report all --out " + rep.string()) == 0;
  bool layout_ok = false, agree_ok = false;
  if (ok) {
    const std::string text = read_text_file(rep);
    const auto j = nlohmann::json::parse(read_text_file(rep.string() + ".json"));
    // Table 1 structure: OV/NOV rows, the three default bucket columns + total
    layout_ok = text.find("20~40") != std::string::npos &&
                text.find("40~60") != std::string::npos &&
                text.find("60~80") != std::string::npos &&
                text.find("OV") != std::string::npos &&
                text.find("NOV") != std::string::npos &&
                text.find("total") != std::string::npos &&
                // Table 2 structure: dataset x method with a mean PSNR
                text.find("dataset") != std::string::npos &&
                text.find("method") != std::string::npos &&
                text.find("homography") != std::string::npos;
    // text and JSON agree field-for-field on every reported mean
    agree_ok = true;
    char buf[64];
    for (const auto& row : j["epe"]["rows"]) {
      for (const char* region : {"ov", "nov"}) {
        std::snprintf(buf, sizeof buf, "%9.4f", row[region]["mean"].get<double>());
        if (text.find(buf) == std::string::npos) agree_ok = false;
      }
    }
    for (const char* region : {"ov", "nov"}) {
      std::snprintf(buf, sizeof buf, "%9.4f",
                    j["epe"]["total"][region]["mean"].get<double>());
      if (text.find(buf) == std::string::npos) agree_ok = false;
    }
    std::snprintf(buf, sizeof buf, "%8.4f", j["psnr"]["mean_db"].get<double>());
    if (text.find(buf) == std::string::npos) agree_ok = false;
  }
  fs::remove_all(data);
  std::ostringstream d;
  d << "cli ok " << ok << ", table layouts " << layout_ok
    << ", text/json agree " << agree_ok;
  report(9, ok && layout_ok && agree_ok, d.str());
}

}  // namespace

int main() {
  criterion_1();
  ParallaxCorpus corpus = make_parallax_corpus();
  std::vector<WarpField> homog;
  std::vector<Mask> homog_valid;
  criterion_2(corpus, &homog, &homog_valid);
  criterion_3(corpus);
  criterion_4(corpus, homog, homog_valid);
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  if (g_failures) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all 9 criteria passed\n");
  return 0;
}
