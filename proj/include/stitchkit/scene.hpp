#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "stitchkit/camera.hpp"
#include "stitchkit/geometry.hpp"
#include "stitchkit/types.hpp"

namespace stitchkit {

enum class Layout { single_plane, two_plane, heightfield, box_room };
enum class TextureKind { checker, value_noise, voronoi };

Layout layout_from_name(const std::string& name);
std::string layout_name(Layout layout);
TextureKind texture_from_name(const std::string& name);
std::string texture_name(TextureKind kind);

struct TextureSpec {
  TextureKind kind = TextureKind::checker;
  double frequency = 0.5;  // cells per world unit
  std::uint64_t seed = 0;
};

struct SceneSpec {
  Layout layout = Layout::two_plane;
  double near = 2.0;
  double far = 4.0;
  TextureSpec texture;
  double parallax = 1.0;  // p in [0,1], 0 = flat scene

  void validate() const;
};

struct OverlapBucket {
  double lo = 0.0;
  double hi = 1.0;
  bool contains(double r) const { return r >= lo && r < hi + 1e-12; }
};

// Procedural ray-cast scene; deterministic function of (spec, seed).
class Scene {
 public:
  Scene(const SceneSpec& spec, std::uint64_t seed);

  struct Hit {
    bool hit = false;
    double t = 0.0;
    Eigen::Vector3d point = Eigen::Vector3d::Zero();
    Eigen::Vector3d normal = Eigen::Vector3d::Zero();
    Eigen::Vector3d albedo = Eigen::Vector3d::Zero();
  };

  Hit raycast(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) const;

  const SceneSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }

 private:
  Eigen::Vector3d albedo_at(double u, double v) const;
  double height_at(double x, double y) const;

  SceneSpec spec_;
  std::uint64_t seed_ = 0;
  std::uint64_t tex_seed_ = 0;
  double far_eff_ = 0.0;    // two_plane far depth after parallax scaling
  double relief_amp_ = 0.0; // heightfield relief amplitude
  double room_half_ = 0.0;  // box_room half width
};

Scene make_scene(const SceneSpec& spec, std::uint64_t seed);

struct RenderResult {
  Image image;
  DepthMap depth;
};

// Per-pixel ray cast through pixel centers, Lambertian shading under a fixed
// directional light; sky pixels get albedo 0 and sentinel depth.
RenderResult render(const Scene& scene, const Camera& camera);

// Rejection-samples a relative pose until the coarse-probe overlap ratio
// lands in the bucket (probe grid 32x32, at most 200 attempts).
std::pair<Camera, Camera> sample_camera_pair(const Scene& scene,
                                             const OverlapBucket& bucket,
                                             std::uint64_t seed, int width,
                                             int height);

struct DatasetSample {
  Image image_ref;
  Image image_target;
  DepthMap depth_ref;
  DepthMap depth_target;
  WarpField warp_gt;
  Mask validity;
  Mask overlap;
  Camera cam_ref;
  Camera cam_target;
  Image sample_stitched;  // on the 2x canvas
  double overlap_ratio = 0.0;
  std::uint64_t seed = 0;
  SceneSpec spec;
};

DatasetSample generate_pair(const SceneSpec& spec, const OverlapBucket& bucket,
                            std::uint64_t seed, int width = 256, int height = 256);

}  // namespace stitchkit
