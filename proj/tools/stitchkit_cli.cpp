#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stitchkit/blend.hpp"
#include "stitchkit/dataset.hpp"
#include "stitchkit/estimators.hpp"
#include "stitchkit/io.hpp"
#include "stitchkit/losses.hpp"
#include "stitchkit/rng.hpp"

namespace fs = std::filesystem;
using namespace stitchkit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitPartial = 2;

int default_jobs() {
  if (const char* env = std::getenv("STITCHKIT_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

std::vector<OverlapBucket> parse_buckets(const std::string& text) {
  std::vector<OverlapBucket> buckets;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos)
      throw CLI::ValidationError("--buckets", "expected LO-HI percents, e.g. 40-60");
    buckets.push_back(OverlapBucket{std::stod(item.substr(0, dash)) / 100.0,
                                    std::stod(item.substr(dash + 1)) / 100.0});
  }
  if (buckets.empty()) throw CLI::ValidationError("--buckets", "empty bucket list");
  return buckets;
}

std::pair<int, int> parse_size(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos)
    throw CLI::ValidationError("--size", "expected WxH, e.g. 256x256");
  return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
}

// Runs fn(i) for i in [0, n) on `jobs` threads; results collected in order.
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::future<void>> futs;
  for (int j = 0; j < std::min(jobs, n); ++j)
    futs.push_back(std::async(std::launch::async, worker));
  for (auto& f : futs) f.get();
}

int cmd_generate(const fs::path& out_dir, int count, const std::string& buckets_text,
                 const std::string& layout, const std::string& texture,
                 const std::string& size_text, std::uint64_t seed, double parallax,
                 int jobs) {
  const auto buckets = parse_buckets(buckets_text);
  const auto [width, height] = parse_size(size_text);
  SceneSpec spec;
  spec.layout = layout_from_name(layout);
  spec.texture.kind = texture_from_name(texture);
  spec.parallax = parallax;
  spec.validate();
  fs::create_directories(out_dir);

  struct Slot {
    bool ok = false;
    bool skipped = false;
    ManifestEntry entry;
  };
  std::vector<Slot> slots(count);
  Rng root(seed);

  parallel_for(count, jobs, [&](int i) {
    const OverlapBucket bucket = buckets[std::size_t(i) % buckets.size()];
    const std::uint64_t sample_seed = Rng(seed, std::uint64_t(i) + 1).next_u64();
    try {
      DatasetSample sample = generate_pair(spec, bucket, sample_seed, width, height);
      const std::string dir = sample_dir_name(i);
      write_sample(out_dir / dir, sample);
      slots[i].ok = true;
      slots[i].entry = ManifestEntry{dir, sample_seed, sample.overlap_ratio,
                                     layout_name(spec.layout)};
    } catch (const BucketUnreachable& e) {
      slots[i].skipped = true;
      std::cerr << "skip " << sample_dir_name(i) << ": " << e.what() << "\n";
    }
  });
  (void)root;

  Manifest manifest;
  int skipped = 0;
  for (const auto& s : slots) {
    if (s.ok) manifest.samples.push_back(s.entry);
    if (s.skipped) ++skipped;
  }
  write_manifest(out_dir / "manifest.json", manifest);
  std::cout << "generated " << manifest.samples.size() << " samples ("
            << skipped << " skipped) in " << out_dir << "\n";
  if (count > 0 && skipped * 2 > count) {
    std::cerr << "error: more than half of the requested samples were skipped\n";
    return kExitFailure;
  }
  return kExitOk;
}

PipelineOptions make_options(const std::string& estimator, const std::string& blend,
                             bool fill, int jobs_per_sample) {
  PipelineOptions opt;
  if (estimator == "oracle")
    opt.estimator = EstimatorChoice::oracle;
  else if (estimator == "homography")
    opt.estimator = EstimatorChoice::homography;
  else if (estimator.rfind("file:", 0) == 0) {
    opt.estimator = EstimatorChoice::file;
    opt.warp_file = estimator.substr(5);
  } else
    throw CLI::ValidationError("--estimator", "expected oracle|homography|file:PATH");
  opt.blend = blend == "feather" ? BlendChoice::feather : BlendChoice::average;
  opt.fill_holes = fill;
  opt.workers = jobs_per_sample;
  return opt;
}

// file:PATH may point to one .flo or to a directory of <sample_dir>.flo files.
std::optional<std::string> resolve_warp_file(const PipelineOptions& base,
                                             const fs::path& sample_dir) {
  if (base.estimator != EstimatorChoice::file) return std::nullopt;
  fs::path p = *base.warp_file;
  if (fs::is_directory(p)) p /= sample_dir.filename().string() + ".flo";
  return p.string();
}

int cmd_stitch(const fs::path& data_dir, const std::string& estimator,
               const std::string& blend, bool fill, bool dump, const fs::path& out_dir,
               int jobs) {
  const auto dirs = list_sample_dirs(data_dir);
  if (dirs.empty()) {
    std::cerr << "error: no samples under " << data_dir << "\n";
    return kExitFailure;
  }
  fs::create_directories(out_dir);
  const PipelineOptions base = make_options(estimator, blend, fill, 1);

  nlohmann::json losses = nlohmann::json::object();
  std::vector<nlohmann::json> rows(dirs.size());
  std::vector<int> status(dirs.size(), 0);  // 0 ok, 1 failed

  parallel_for(int(dirs.size()), jobs, [&](int i) {
    const auto& dir = dirs[i];
    try {
      DatasetSample sample = read_sample(dir);
      PipelineOptions opt = base;
      opt.warp_file = resolve_warp_file(base, dir);
      const PipelineResult res = stitch_pipeline(sample, opt);
      const fs::path sample_out = out_dir / dir.filename();
      fs::create_directories(sample_out);
      write_png_rgb(sample_out / "stitched.png", res.canvas.stitched);
      if (dump) {
        write_png_rgb(sample_out / "warped_target.png", res.canvas.warped_target);
        write_png_mask(sample_out / "holes.png", res.canvas.hole);
        write_png_rgb(sample_out / "blend.png", res.canvas.stitched);
        write_png_rgb(sample_out / "final.png", res.canvas.stitched);
      }
      rows[i] = {{"warp_loss", res.warp_loss_value},
                 {"recon_total", res.recon.total},
                 {"recon_ref", res.recon.l_ref},
                 {"recon_wt", res.recon.l_wt},
                 {"sampson", res.sampson_loss},
                 {"masked_psnr_db", res.masked_psnr_db},
                 {"unfillable_holes", res.unfillable_holes}};
    } catch (const Error& e) {
      status[i] = 1;
      rows[i] = {{"error", e.what()}};
      std::cerr << dir.filename().string() << ": " << e.what() << "\n";
    }
  });

  int failed = 0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    losses[dirs[i].filename().string()] = rows[i];
    failed += status[i];
  }
  write_text_file(out_dir / "losses.json", losses.dump(2));
  std::cout << "stitched " << (dirs.size() - failed) << "/" << dirs.size()
            << " samples into " << out_dir << "\n";
  return failed == int(dirs.size()) ? kExitFailure : kExitOk;
}

struct EvalSample {
  DatasetSample sample;
  WarpField pred;
  Mask pred_valid;
  bool missing = false;
};

int cmd_evaluate(const fs::path& data_dir, const std::string& pred,
                 const std::string& report, const std::string& alpha_sweep,
                 const fs::path& out_file, int jobs) {
  const auto dirs = list_sample_dirs(data_dir);
  if (dirs.empty()) {
    std::cerr << "error: no samples under " << data_dir << "\n";
    return kExitFailure;
  }

  std::vector<EvalSample> evals(dirs.size());
  const bool pred_is_dir = fs::is_directory(pred);
  parallel_for(int(dirs.size()), jobs, [&](int i) {
    evals[i].sample = read_sample(dirs[i]);
    auto& e = evals[i];
    const int w = e.sample.image_target.width, h = e.sample.image_target.height;
    if (pred == "oracle") {
      e.pred = oracle_warp(e.sample);
      e.pred_valid = e.sample.validity;
    } else if (pred == "homography") {
      try {
        const auto cs = sample_correspondences(e.sample, 200, e.sample.seed);
        auto hw = homography_to_warp(
            fit_homography(cs, RansacParams{1000, 1.0, e.sample.seed}), w, h);
        e.pred = std::move(hw.warp);
        e.pred_valid = std::move(hw.valid);
      } catch (const Error&) {
        e.missing = true;
      }
    } else {
      const fs::path p = pred_is_dir
                             ? fs::path(pred) / (dirs[i].filename().string() + ".flo")
                             : fs::path(pred);
      try {
        e.pred = read_flo(p);
        if (e.pred.width != w || e.pred.height != h)
          throw DimensionMismatch("prediction size mismatch");
        e.pred_valid = Mask(w, h, MaskRole::validity, 1);
      } catch (const Error& err) {
        e.missing = true;
        std::cerr << dirs[i].filename().string() << ": " << err.what() << "\n";
      }
    }
  });

  bool any_missing = false;
  std::vector<EpeSampleInput> inputs;
  for (std::size_t i = 0; i < evals.size(); ++i) {
    if (evals[i].missing) {
      any_missing = true;
      continue;
    }
    EpeSampleInput in;
    in.w = &evals[i].pred;
    in.w_gt = &evals[i].sample.warp_gt;
    in.overlap = &evals[i].sample.overlap;
    in.validity = &evals[i].sample.validity;
    in.overlap_ratio = evals[i].sample.overlap_ratio;
    in.id = dirs[i].filename().string();
    inputs.push_back(in);
  }
  if (inputs.empty()) {
    std::cerr << "error: no usable predictions\n";
    return kExitFailure;
  }

  std::ostringstream text;
  nlohmann::json j;
  j["dataset"] = data_dir.string();
  j["method"] = pred;

  if (report == "epe" || report == "all") {
    const EpeReport rep = epe_report(inputs);
    text << rep.to_text("End-point error (px), method: " + pred);
    j["epe"] = nlohmann::json::parse(rep.to_json());
  }

  if (report == "psnr" || report == "all") {
    // Table layout: dataset x method; PSNR of I^R vs I^WT on overlap \ holes
    std::ostringstream csv;
    csv << "sample_id,psnr_db\n";
    double sum = 0.0;
    std::size_t n = 0;
    std::vector<double> per_sample(evals.size(), -1.0);
    parallel_for(int(evals.size()), jobs, [&](int i) {
      if (evals[i].missing) return;
      PipelineOptions opt;
      opt.estimator = EstimatorChoice::oracle;  // splat the provided field instead
      PipelineResult res;
      const ImportanceMap imp = importance_from_depth(evals[i].sample.depth_target, 10.0);
      StitchCanvas canvas = make_canvas(evals[i].sample.image_ref,
                                        evals[i].sample.image_target, evals[i].pred,
                                        imp, &evals[i].pred_valid);
      const Mask ovl = canvas_overlap_region(evals[i].pred, evals[i].pred_valid,
                                             evals[i].sample.overlap, canvas);
      try {
        per_sample[i] = masked_psnr(canvas.ref_padded, canvas.warped_target, ovl,
                                    canvas.hole);
      } catch (const EmptyEvalRegion&) {
        per_sample[i] = 0.0;
      }
    });
    for (std::size_t i = 0; i < evals.size(); ++i) {
      if (per_sample[i] < 0.0) continue;
      csv << dirs[i].filename().string() << "," << per_sample[i] << "\n";
      sum += per_sample[i];
      ++n;
    }
    const double mean = n ? sum / double(n) : 0.0;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "PSNR (dB) on overlap excluding holes\n"
                  "  dataset            method            mean\n"
                  "  %-18s %-16s %8.4f\n",
                  data_dir.filename().string().c_str(), pred.c_str(), mean);
    text << buf;
    j["psnr"] = {{"dataset", data_dir.filename().string()},
                 {"method", pred},
                 {"mean_db", mean},
                 {"count", n}};
    if (!out_file.empty())
      write_text_file(out_file.string() + ".psnr.csv", csv.str());
  }

  if (!alpha_sweep.empty()) {
    std::stringstream ss(alpha_sweep);
    std::string item;
    text << "Warp loss (Eq-style, per-region means) over alpha:\n";
    while (std::getline(ss, item, ',')) {
      const double alpha = std::stod(item);
      double sum = 0.0;
      for (const auto& in : inputs)
        sum += warp_loss(*in.w, *in.w_gt, *in.overlap, alpha).total;
      const double mean = sum / double(inputs.size());
      char buf[64];
      std::snprintf(buf, sizeof buf, "  alpha=%-6g %12.6f\n", alpha, mean);
      text << buf;
      j["alpha_sweep"].push_back({{"alpha", alpha}, {"warp_loss", mean}});
    }
  }

  std::cout << text.str();
  if (!out_file.empty()) {
    write_text_file(out_file, text.str());
    write_text_file(out_file.string() + ".json", j.dump(2));
  }
  return any_missing ? kExitPartial : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stitchkit: pixel-wise image stitching toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // accept --jobs after the subcommand too
  int jobs = default_jobs();
  app.add_option("--jobs", jobs, "parallel workers across samples");

  auto* gen = app.add_subcommand("generate", "generate a synthetic dataset");
  gen->fallthrough();
  std::string out_dir, buckets = "20-40,40-60,60-80", layout = "two_plane";
  std::string texture = "checker", size = "256x256";
  int count = 10;
  std::uint64_t seed = 1;
  double parallax = 1.0;
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--count", count, "number of samples");
  gen->add_option("--buckets", buckets, "overlap buckets, percent LO-HI list");
  gen->add_option("--layout", layout, "single_plane|two_plane|heightfield|box_room");
  gen->add_option("--texture", texture, "checker|value_noise|voronoi");
  gen->add_option("--size", size, "WxH");
  gen->add_option("--seed", seed, "master seed");
  gen->add_option("--parallax", parallax, "parallax severity p in [0,1]");

  auto* st = app.add_subcommand("stitch", "run the stitching pipeline");
  st->fallthrough();
  std::string data_dir, estimator = "oracle", blend = "average", stitch_out;
  bool fill = false, dump = false;
  st->add_option("--data", data_dir, "dataset directory")->required();
  st->add_option("--estimator", estimator, "oracle|homography|file:PATH");
  st->add_option("--blend", blend, "average|feather");
  st->add_flag("--fill", fill, "fill holes by diffusion");
  st->add_flag("--dump-intermediates", dump, "dump intermediate layers");
  st->add_option("--out", stitch_out, "output directory")->required();

  auto* ev = app.add_subcommand("evaluate", "emit EPE / PSNR reports");
  ev->fallthrough();
  std::string eval_data, pred = "oracle", report = "all", alpha_sweep, eval_out;
  ev->add_option("--data", eval_data, "dataset directory")->required();
  ev->add_option("--pred", pred, "oracle|homography|DIR|FILE of .flo predictions");
  ev->add_option("--report", report, "epe|psnr|all");
  ev->add_option("--alpha-sweep", alpha_sweep, "comma list of alpha values");
  ev->add_option("--out", eval_out, "report file (text; .json twin is written)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_generate(out_dir, count, buckets, layout, texture, size, seed,
                          parallax, jobs);
    if (st->parsed())
      return cmd_stitch(data_dir, estimator, blend, fill, dump, stitch_out, jobs);
    if (ev->parsed())
      return cmd_evaluate(eval_data, pred, report, alpha_sweep, eval_out, jobs);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
