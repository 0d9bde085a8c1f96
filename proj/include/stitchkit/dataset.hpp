#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stitchkit/scene.hpp"

namespace stitchkit {

std::string sample_dir_name(int index);

// On-disk layout per sample, under <root>/sample_%06d/:
//   ref.png, target.png, depth_ref.pfm, depth_target.pfm, warp_gt.flo,
//   overlap.png, cams.json, stitched_gt.png, meta.json
void write_sample(const std::filesystem::path& dir, const DatasetSample& sample);

// Restores a sample; validity is recomputed from cameras + depth.
DatasetSample read_sample(const std::filesystem::path& dir);

struct ManifestEntry {
  std::string dir;
  std::uint64_t seed = 0;
  double overlap_ratio = 0.0;
  std::string layout;
};

struct Manifest {
  std::vector<ManifestEntry> samples;
};

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

// Sample directories listed in <root>/manifest.json, or scanned when no
// manifest is present.
std::vector<std::filesystem::path> list_sample_dirs(const std::filesystem::path& root);

}  // namespace stitchkit
