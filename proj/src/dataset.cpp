#include "stitchkit/dataset.hpp"

#include <algorithm>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "stitchkit/io.hpp"

namespace stitchkit {

namespace {

nlohmann::json spec_to_json(const SceneSpec& spec) {
  return nlohmann::json{
      {"layout", layout_name(spec.layout)},
      {"near", spec.near},
      {"far", spec.far},
      {"parallax", spec.parallax},
      {"texture",
       {{"kind", texture_name(spec.texture.kind)},
        {"frequency", spec.texture.frequency},
        {"seed", spec.texture.seed}}},
  };
}

SceneSpec spec_from_json(const nlohmann::json& j) {
  SceneSpec spec;
  spec.layout = layout_from_name(j.at("layout").get<std::string>());
  spec.near = j.at("near").get<double>();
  spec.far = j.at("far").get<double>();
  spec.parallax = j.at("parallax").get<double>();
  const auto& t = j.at("texture");
  spec.texture.kind = texture_from_name(t.at("kind").get<std::string>());
  spec.texture.frequency = t.at("frequency").get<double>();
  spec.texture.seed = t.at("seed").get<std::uint64_t>();
  return spec;
}

}  // namespace

std::string sample_dir_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%06d", index);
  return buf;
}

void write_sample(const std::filesystem::path& dir, const DatasetSample& sample) {
  std::filesystem::create_directories(dir);
  write_png_rgb(dir / "ref.png", sample.image_ref);
  write_png_rgb(dir / "target.png", sample.image_target);
  write_pfm(dir / "depth_ref.pfm", sample.depth_ref);
  write_pfm(dir / "depth_target.pfm", sample.depth_target);
  write_flo(dir / "warp_gt.flo", sample.warp_gt);
  write_png_mask(dir / "overlap.png", sample.overlap);
  write_png_rgb(dir / "stitched_gt.png", sample.sample_stitched);

  nlohmann::json cams;
  cams["ref"] = nlohmann::json::parse(sample.cam_ref.to_json());
  cams["target"] = nlohmann::json::parse(sample.cam_target.to_json());
  write_text_file(dir / "cams.json", cams.dump(2));

  nlohmann::json meta;
  meta["overlap_ratio"] = sample.overlap_ratio;
  meta["seed"] = sample.seed;
  meta["spec"] = spec_to_json(sample.spec);
  write_text_file(dir / "meta.json", meta.dump(2));
}

DatasetSample read_sample(const std::filesystem::path& dir) {
  DatasetSample s;
  s.image_ref = read_png_rgb(dir / "ref.png");
  s.image_target = read_png_rgb(dir / "target.png");
  s.depth_ref = read_pfm(dir / "depth_ref.pfm");
  s.depth_target = read_pfm(dir / "depth_target.pfm");
  s.warp_gt = read_flo(dir / "warp_gt.flo");
  s.overlap = read_png_mask(dir / "overlap.png");
  s.sample_stitched = read_png_rgb(dir / "stitched_gt.png");

  const auto cams = nlohmann::json::parse(read_text_file(dir / "cams.json"));
  s.cam_ref = Camera::from_json(cams.at("ref").dump());
  s.cam_target = Camera::from_json(cams.at("target").dump());

  const auto meta = nlohmann::json::parse(read_text_file(dir / "meta.json"));
  s.overlap_ratio = meta.at("overlap_ratio").get<double>();
  s.seed = meta.at("seed").get<std::uint64_t>();
  s.spec = spec_from_json(meta.at("spec"));

  s.validity = gt_warp_field(s.cam_target, s.cam_ref, s.depth_target).validity;
  return s;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  nlohmann::json j;
  j["samples"] = nlohmann::json::array();
  for (const auto& e : manifest.samples)
    j["samples"].push_back({{"dir", e.dir},
                            {"seed", e.seed},
                            {"overlap_ratio", e.overlap_ratio},
                            {"layout", e.layout}});
  write_text_file(path, j.dump(2));
}

Manifest read_manifest(const std::filesystem::path& path) {
  const auto j = nlohmann::json::parse(read_text_file(path));
  Manifest m;
  for (const auto& e : j.at("samples")) {
    ManifestEntry entry;
    entry.dir = e.at("dir").get<std::string>();
    entry.seed = e.at("seed").get<std::uint64_t>();
    entry.overlap_ratio = e.at("overlap_ratio").get<double>();
    entry.layout = e.at("layout").get<std::string>();
    m.samples.push_back(std::move(entry));
  }
  return m;
}

std::vector<std::filesystem::path> list_sample_dirs(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> dirs;
  const auto manifest_path = root / "manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    for (const auto& e : read_manifest(manifest_path).samples)
      dirs.push_back(root / e.dir);
    return dirs;
  }
  for (const auto& entry : std::filesystem::directory_iterator(root))
    if (entry.is_directory() && entry.path().filename().string().rfind("sample_", 0) == 0)
      dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

}  // namespace stitchkit
