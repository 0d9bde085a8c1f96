#include "stitchkit/scene.hpp"

#include <algorithm>
#include <cmath>

#include "stitchkit/blend.hpp"
#include "stitchkit/rng.hpp"
#include "stitchkit/warp_ops.hpp"

namespace stitchkit {

namespace {

constexpr double kRayEps = 1e-6;
constexpr double kHeightfieldFreq = 0.8;  // bumps per world unit

// Fixed checker colors so the rendered signal is analytically reproducible.
const Eigen::Vector3d kCheckerA(0.90, 0.85, 0.80);
const Eigen::Vector3d kCheckerB(0.15, 0.20, 0.25);

const Eigen::Vector3d kLightDir = Eigen::Vector3d(0.35, -0.45, 0.82).normalized();

std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 0x632be59bd9b4e019ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double hash01(std::uint64_t seed, std::int64_t ix, std::int64_t iy,
              std::uint64_t channel = 0) {
  std::uint64_t h = hash_mix(hash_mix(seed, std::uint64_t(ix) * 2 + 1),
                             hash_mix(std::uint64_t(iy) * 2 + 1, channel));
  return double(h >> 11) * 0x1.0p-53;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(std::uint64_t seed, double u, double v) {
  const double fu = std::floor(u), fv = std::floor(v);
  const std::int64_t ix = std::int64_t(fu), iy = std::int64_t(fv);
  const double tx = smoothstep(u - fu), ty = smoothstep(v - fv);
  const double c00 = hash01(seed, ix, iy);
  const double c10 = hash01(seed, ix + 1, iy);
  const double c01 = hash01(seed, ix, iy + 1);
  const double c11 = hash01(seed, ix + 1, iy + 1);
  const double top = c00 * (1 - tx) + c10 * tx;
  const double bot = c01 * (1 - tx) + c11 * tx;
  return top * (1 - ty) + bot * ty;
}

double fractal_noise(std::uint64_t seed, double u, double v) {
  return 0.65 * value_noise(seed, u, v) + 0.35 * value_noise(seed ^ 0x5bf0u, 2 * u, 2 * v);
}

Eigen::Matrix3d rot_y(double a) {
  Eigen::Matrix3d m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}

Eigen::Matrix3d rot_x(double a) {
  Eigen::Matrix3d m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}

}  // namespace

Layout layout_from_name(const std::string& name) {
  if (name == "single_plane") return Layout::single_plane;
  if (name == "two_plane") return Layout::two_plane;
  if (name == "heightfield") return Layout::heightfield;
  if (name == "box_room") return Layout::box_room;
  throw InvalidSpec("unknown layout: " + name);
}

std::string layout_name(Layout layout) {
  switch (layout) {
    case Layout::single_plane: return "single_plane";
    case Layout::two_plane: return "two_plane";
    case Layout::heightfield: return "heightfield";
    case Layout::box_room: return "box_room";
  }
  return "?";
}

TextureKind texture_from_name(const std::string& name) {
  if (name == "checker") return TextureKind::checker;
  if (name == "value_noise") return TextureKind::value_noise;
  if (name == "voronoi") return TextureKind::voronoi;
  throw InvalidSpec("unknown texture: " + name);
}

std::string texture_name(TextureKind kind) {
  switch (kind) {
    case TextureKind::checker: return "checker";
    case TextureKind::value_noise: return "value_noise";
    case TextureKind::voronoi: return "voronoi";
  }
  return "?";
}

void SceneSpec::validate() const {
  if (!(near > 0.0 && near < far)) throw InvalidSpec("require 0 < near < far");
  if (parallax < 0.0 || parallax > 1.0) throw InvalidSpec("parallax p must be in [0,1]");
  if (texture.frequency <= 0.0) throw InvalidSpec("texture frequency must be positive");
}

Scene::Scene(const SceneSpec& spec, std::uint64_t seed) : spec_(spec), seed_(seed) {
  spec.validate();
  tex_seed_ = hash_mix(seed, spec.texture.seed);
  far_eff_ = spec.near + spec.parallax * (spec.far - spec.near);
  relief_amp_ = spec.parallax * (spec.far - spec.near);
  room_half_ = 0.75 * spec.far;
}

Eigen::Vector3d Scene::albedo_at(double u, double v) const {
  const double f = spec_.texture.frequency;
  switch (spec_.texture.kind) {
    case TextureKind::checker: {
      const std::int64_t cu = std::int64_t(std::floor(u * f));
      const std::int64_t cv = std::int64_t(std::floor(v * f));
      return ((cu + cv) & 1) ? kCheckerB : kCheckerA;
    }
    case TextureKind::value_noise: {
      return Eigen::Vector3d(0.15 + 0.7 * fractal_noise(tex_seed_ ^ 1, u * f, v * f),
                             0.15 + 0.7 * fractal_noise(tex_seed_ ^ 2, u * f, v * f),
                             0.15 + 0.7 * fractal_noise(tex_seed_ ^ 3, u * f, v * f));
    }
    case TextureKind::voronoi: {
      const double su = u * f, sv = v * f;
      const std::int64_t iu = std::int64_t(std::floor(su));
      const std::int64_t iv = std::int64_t(std::floor(sv));
      double best = 1e30;
      std::int64_t bu = iu, bv = iv;
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          const std::int64_t cx = iu + dx, cy = iv + dy;
          const double px = double(cx) + hash01(tex_seed_ ^ 7, cx, cy, 0);
          const double py = double(cy) + hash01(tex_seed_ ^ 7, cx, cy, 1);
          const double d2 = (su - px) * (su - px) + (sv - py) * (sv - py);
          if (d2 < best) {
            best = d2;
            bu = cx;
            bv = cy;
          }
        }
      return Eigen::Vector3d(0.15 + 0.7 * hash01(tex_seed_ ^ 9, bu, bv, 0),
                             0.15 + 0.7 * hash01(tex_seed_ ^ 9, bu, bv, 1),
                             0.15 + 0.7 * hash01(tex_seed_ ^ 9, bu, bv, 2));
    }
  }
  return Eigen::Vector3d::Zero();
}

// Heightfield surface depth: a relief wall fronto-parallel to the reference
// view, carved out of the far plane.
double Scene::height_at(double x, double y) const {
  return spec_.far - relief_amp_ * fractal_noise(tex_seed_ ^ 0xB00FULL,
                                                 x * kHeightfieldFreq,
                                                 y * kHeightfieldFreq);
}

Scene::Hit Scene::raycast(const Eigen::Vector3d& origin,
                          const Eigen::Vector3d& dir) const {
  Hit hit;
  switch (spec_.layout) {
    case Layout::single_plane: {
      const double d0 = 0.5 * (spec_.near + spec_.far);
      if (dir.z() <= kRayEps) return hit;
      const double t = (d0 - origin.z()) / dir.z();
      if (t <= kRayEps) return hit;
      hit.hit = true;
      hit.t = t;
      hit.point = origin + t * dir;
      hit.normal = Eigen::Vector3d(0, 0, -1);
      hit.albedo = albedo_at(hit.point.x(), hit.point.y());
      return hit;
    }
    case Layout::two_plane: {
      double best = 1e30;
      // near plane occupies world x < 0, far plane x >= 0, joined by a wall
      if (dir.z() > kRayEps) {
        const double tn = (spec_.near - origin.z()) / dir.z();
        if (tn > kRayEps && (origin + tn * dir).x() < 0.0 && tn < best) {
          best = tn;
          hit.hit = true;
          hit.point = origin + tn * dir;
          hit.normal = Eigen::Vector3d(0, 0, -1);
        }
        const double tf = (far_eff_ - origin.z()) / dir.z();
        if (tf > kRayEps && (origin + tf * dir).x() >= 0.0 && tf < best) {
          best = tf;
          hit.hit = true;
          hit.point = origin + tf * dir;
          hit.normal = Eigen::Vector3d(0, 0, -1);
        }
      }
      if (std::abs(dir.x()) > kRayEps && far_eff_ - spec_.near > 1e-12) {
        const double tw = (0.0 - origin.x()) / dir.x();
        if (tw > kRayEps && tw < best) {
          const Eigen::Vector3d p = origin + tw * dir;
          if (p.z() >= spec_.near && p.z() <= far_eff_) {
            best = tw;
            hit.hit = true;
            hit.point = p;
            hit.normal = Eigen::Vector3d(dir.x() > 0 ? -1 : 1, 0, 0);
          }
        }
      }
      if (hit.hit) {
        hit.t = best;
        // wall textured in its own plane to avoid stretching
        if (std::abs(hit.normal.x()) > 0.5)
          hit.albedo = albedo_at(hit.point.y(), hit.point.z());
        else
          hit.albedo = albedo_at(hit.point.x(), hit.point.y());
      }
      return hit;
    }
    case Layout::heightfield: {
      if (dir.z() <= kRayEps) return hit;
      // march to the first crossing of z = height(x, y), then bisect
      const double t_lo = (0.5 * spec_.near - origin.z()) / dir.z();
      const double t_hi = (spec_.far + 0.1 - origin.z()) / dir.z();
      if (t_hi <= kRayEps) return hit;
      auto f = [&](double t) {
        const Eigen::Vector3d p = origin + t * dir;
        return p.z() - height_at(p.x(), p.y());
      };
      constexpr int kSteps = 192;
      double t_prev = std::max(t_lo, kRayEps);
      if (f(t_prev) >= 0.0) return hit;  // starts behind the surface
      double t_cross = -1.0;
      for (int i = 1; i <= kSteps; ++i) {
        const double t = t_prev + (t_hi - std::max(t_lo, kRayEps)) / kSteps;
        if (f(t) >= 0.0) {
          t_cross = t;
          break;
        }
        t_prev = t;
      }
      if (t_cross < 0.0) return hit;  // sky
      double a = t_prev, b = t_cross;
      for (int i = 0; i < 48; ++i) {
        const double m = 0.5 * (a + b);
        (f(m) >= 0.0 ? b : a) = m;
      }
      hit.hit = true;
      hit.t = 0.5 * (a + b);
      hit.point = origin + hit.t * dir;
      const double eps = 1e-4;
      const double sx = (height_at(hit.point.x() + eps, hit.point.y()) -
                         height_at(hit.point.x() - eps, hit.point.y())) /
                        (2 * eps);
      const double sy = (height_at(hit.point.x(), hit.point.y() + eps) -
                         height_at(hit.point.x(), hit.point.y() - eps)) /
                        (2 * eps);
      hit.normal = Eigen::Vector3d(sx, sy, -1.0).normalized();
      hit.albedo = albedo_at(hit.point.x(), hit.point.y());
      return hit;
    }
    case Layout::box_room: {
      // camera is inside the box; take the slab exit point
      const Eigen::Vector3d lo(-room_half_, -room_half_, -spec_.near);
      const Eigen::Vector3d hi(room_half_, room_half_, spec_.far);
      double best = 1e30;
      int axis = -1;
      for (int i = 0; i < 3; ++i) {
        if (std::abs(dir[i]) < 1e-12) continue;
        const double face = dir[i] > 0 ? hi[i] : lo[i];
        const double t = (face - origin[i]) / dir[i];
        if (t > kRayEps && t < best) {
          best = t;
          axis = i;
        }
      }
      if (axis < 0) return hit;
      hit.hit = true;
      hit.t = best;
      hit.point = origin + best * dir;
      hit.normal = Eigen::Vector3d::Zero();
      hit.normal[axis] = dir[axis] > 0 ? -1.0 : 1.0;
      if (axis == 0)
        hit.albedo = albedo_at(hit.point.z(), hit.point.y());
      else if (axis == 1)
        hit.albedo = albedo_at(hit.point.x(), hit.point.z());
      else
        hit.albedo = albedo_at(hit.point.x(), hit.point.y());
      return hit;
    }
  }
  return hit;
}

Scene make_scene(const SceneSpec& spec, std::uint64_t seed) {
  return Scene(spec, seed);
}

RenderResult render(const Scene& scene, const Camera& camera) {
  if (camera.width > 1024 || camera.height > 1024)
    throw InvalidSpec("render: resolution capped at 1024x1024");
  RenderResult out;
  out.image = Image(camera.width, camera.height, 0.0f);
  out.depth = DepthMap(camera.width, camera.height);
  const Eigen::Matrix3d Kinv = camera.K.inverse();
  const Eigen::Matrix3d RT = camera.R.transpose();
  const Eigen::Vector3d origin = camera.center();
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      const Eigen::Vector3d dir_cam = (Kinv * Eigen::Vector3d(x, y, 1.0)).normalized();
      const Eigen::Vector3d dir = RT * dir_cam;
      const auto hit = scene.raycast(origin, dir);
      if (!hit.hit) continue;
      out.depth.at(x, y) = float(hit.t * dir_cam.z());
      const double diffuse = std::max(0.0, hit.normal.dot(-kLightDir));
      const double shade = 0.25 + 0.75 * diffuse;
      float* px = out.image.at(x, y);
      for (int c = 0; c < 3; ++c)
        px[c] = float(std::clamp(hit.albedo[c] * shade, 0.0, 1.0));
    }
  }
  return out;
}

std::pair<Camera, Camera> sample_camera_pair(const Scene& scene,
                                             const OverlapBucket& bucket,
                                             std::uint64_t seed, int width,
                                             int height) {
  if (bucket.lo < 0.0 || bucket.hi > 1.0 || bucket.lo >= bucket.hi)
    throw InvalidSpec("overlap bucket must be a sub-interval of [0,1]");
  const Camera cam_r = default_camera(width, height);
  constexpr int kProbe = 32;
  const Camera probe_r = scaled_camera(cam_r, kProbe, kProbe);
  const DepthMap depth_probe_r = render(scene, probe_r).depth;

  Rng rng(seed, 0xCA3);
  const double b_max = 0.4 * scene.spec().near;
  for (int attempt = 0; attempt < 200; ++attempt) {
    Camera cam_t = cam_r;
    if (!(attempt == 0 && bucket.hi >= 0.999)) {
      const double phi = rng.uniform(0.0, 2.0 * M_PI);
      const Eigen::Vector3d bdir =
          Eigen::Vector3d(std::cos(phi), 0.4 * std::sin(phi), 0.0).normalized();
      const double b = rng.uniform(0.0, b_max);
      const double yaw = rng.uniform(-0.8, 0.8);
      const double pitch = rng.uniform(-0.15, 0.15);
      cam_t.R = rot_x(pitch) * rot_y(yaw);
      cam_t.t = -cam_t.R * (b * bdir);
    }
    const Camera probe_t = scaled_camera(cam_t, kProbe, kProbe);
    const DepthMap depth_probe_t = render(scene, probe_t).depth;
    const GtWarp gtw = gt_warp_field(probe_t, probe_r, depth_probe_t);
    const Mask ov = overlap_mask(gtw.warp, gtw.validity, probe_t, probe_r,
                                 depth_probe_r, depth_probe_t);
    if (bucket.contains(ov.mean())) return {cam_r, cam_t};
  }
  throw BucketUnreachable("no pose reached the requested overlap bucket in 200 attempts");
}

DatasetSample generate_pair(const SceneSpec& spec, const OverlapBucket& bucket,
                            std::uint64_t seed, int width, int height) {
  DatasetSample s;
  s.spec = spec;
  s.seed = seed;
  const Scene scene = make_scene(spec, seed);
  auto [cam_r, cam_t] = sample_camera_pair(scene, bucket, seed, width, height);
  s.cam_ref = cam_r;
  s.cam_target = cam_t;
  auto rr = render(scene, cam_r);
  auto rt = render(scene, cam_t);
  s.image_ref = std::move(rr.image);
  s.depth_ref = std::move(rr.depth);
  s.image_target = std::move(rt.image);
  s.depth_target = std::move(rt.depth);
  GtWarp gtw = gt_warp_field(cam_t, cam_r, s.depth_target);
  s.warp_gt = std::move(gtw.warp);
  s.validity = std::move(gtw.validity);
  s.overlap = overlap_mask(s.warp_gt, s.validity, cam_t, cam_r, s.depth_ref,
                           s.depth_target);
  s.overlap_ratio = s.overlap.mean();

  const ImportanceMap importance = importance_from_depth(s.depth_target, 10.0);
  StitchCanvas canvas =
      make_canvas(s.image_ref, s.image_target, s.warp_gt, importance, &s.validity);
  s.sample_stitched = average_blend(canvas);
  return s;
}

}  // namespace stitchkit
