#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "stitchkit/camera.hpp"
#include "stitchkit/geometry.hpp"
#include "stitchkit/scene.hpp"

using namespace stitchkit;

namespace {

SceneSpec checker_spec(Layout layout) {
  SceneSpec s;
  s.layout = layout;
  s.texture.kind = TextureKind::checker;
  return s;
}

}  // namespace

TEST_CASE("make_scene: single plane hits at the plane depth on every ray") {
  SceneSpec spec = checker_spec(Layout::single_plane);
  Scene scene = make_scene(spec, 7);
  const double d0 = 0.5 * (spec.near + spec.far);
  for (double ux : {-0.3, 0.0, 0.25})
    for (double uy : {-0.2, 0.1}) {
      Eigen::Vector3d dir = Eigen::Vector3d(ux, uy, 1.0).normalized();
      auto hit = scene.raycast(Eigen::Vector3d::Zero(), dir);
      REQUIRE(hit.hit);
      CHECK(hit.point.z() == doctest::Approx(d0).epsilon(1e-12));
      CHECK(hit.t * dir.z() == doctest::Approx(d0).epsilon(1e-12));
    }
}

TEST_CASE("make_scene: deterministic in (spec, seed)") {
  SceneSpec spec = checker_spec(Layout::heightfield);
  spec.texture.kind = TextureKind::value_noise;
  Scene a = make_scene(spec, 123);
  Scene b = make_scene(spec, 123);
  for (double ux : {-0.2, 0.0, 0.3}) {
    Eigen::Vector3d dir = Eigen::Vector3d(ux, 0.1, 1.0).normalized();
    auto ha = a.raycast(Eigen::Vector3d::Zero(), dir);
    auto hb = b.raycast(Eigen::Vector3d::Zero(), dir);
    REQUIRE(ha.hit == hb.hit);
    CHECK(ha.t == hb.t);  // bit-identical
    CHECK((ha.albedo - hb.albedo).norm() == 0.0);
  }
}

TEST_CASE("make_scene: two planes at exactly near and far when p=1") {
  SceneSpec spec = checker_spec(Layout::two_plane);
  spec.parallax = 1.0;
  Scene scene = make_scene(spec, 3);
  // a ray aimed into x<0 hits the near plane, into x>0 the far plane
  Eigen::Vector3d dn = Eigen::Vector3d(-0.3, 0.0, 1.0).normalized();
  Eigen::Vector3d df = Eigen::Vector3d(0.3, 0.0, 1.0).normalized();
  auto hn = scene.raycast(Eigen::Vector3d::Zero(), dn);
  auto hf = scene.raycast(Eigen::Vector3d::Zero(), df);
  REQUIRE(hn.hit);
  REQUIRE(hf.hit);
  CHECK(hn.point.z() == doctest::Approx(spec.near).epsilon(1e-12));
  CHECK(hf.point.z() == doctest::Approx(spec.far).epsilon(1e-12));
}

TEST_CASE("make_scene: invalid specs throw") {
  SceneSpec spec;
  spec.near = 5.0;
  spec.far = 2.0;
  CHECK_THROWS_AS(make_scene(spec, 0), InvalidSpec);
  spec = SceneSpec{};
  spec.parallax = 1.5;
  CHECK_THROWS_AS(make_scene(spec, 0), InvalidSpec);
}

TEST_CASE("render: checker plane matches the analytic texture lookup") {
  SceneSpec spec = checker_spec(Layout::single_plane);
  Scene scene = make_scene(spec, 11);
  Camera cam = default_camera(64, 64);
  auto rr = render(scene, cam);
  // closed-form oracle: plane z = (near+far)/2, fronto-parallel normal
  // (0,0,-1), fixed checker colors, Lambertian shade
  const double d0 = 0.5 * (spec.near + spec.far);
  const Eigen::Vector3d light = Eigen::Vector3d(0.35, -0.45, 0.82).normalized();
  const double shade = 0.25 + 0.75 * std::max(0.0, Eigen::Vector3d(0, 0, -1).dot(-light));
  const Eigen::Vector3d ca(0.90, 0.85, 0.80), cb(0.15, 0.20, 0.25);
  const Eigen::Matrix3d Kinv = cam.K.inverse();
  for (int y = 0; y < 64; y += 5)
    for (int x = 0; x < 64; x += 5) {
      const Eigen::Vector3d dir = Kinv * Eigen::Vector3d(x, y, 1.0);
      const double wx = d0 * dir.x() / dir.z();
      const double wy = d0 * dir.y() / dir.z();
      const long cu = long(std::floor(wx * spec.texture.frequency));
      const long cv = long(std::floor(wy * spec.texture.frequency));
      const Eigen::Vector3d albedo = ((cu + cv) & 1) ? cb : ca;
      const float* px = rr.image.at(x, y);
      for (int c = 0; c < 3; ++c)
        CHECK(std::abs(px[c] - albedo[c] * shade) < 1e-6);
      CHECK(rr.depth.at(x, y) == doctest::Approx(d0).epsilon(1e-6));
    }
}

TEST_CASE("render: camera looking away gives sky image and sentinel depth") {
  SceneSpec spec = checker_spec(Layout::single_plane);
  Scene scene = make_scene(spec, 1);
  Camera cam = default_camera(16, 16);
  cam.R = Eigen::AngleAxisd(M_PI, Eigen::Vector3d::UnitY()).toRotationMatrix();
  auto rr = render(scene, cam);
  for (int i = 0; i < 16 * 16; ++i) {
    CHECK(rr.depth.values[i] == kDepthSentinel);
    CHECK(rr.image.data[3 * i] == 0.0f);
  }
}

TEST_CASE("render: bit-identical across invocations") {
  SceneSpec spec = checker_spec(Layout::box_room);
  spec.texture.kind = TextureKind::voronoi;
  Scene scene = make_scene(spec, 21);
  Camera cam = default_camera(48, 48);
  auto a = render(scene, cam);
  auto b = render(scene, cam);
  CHECK(a.image.data == b.image.data);
  CHECK(std::equal(a.depth.values.begin(), a.depth.values.end(),
                   b.depth.values.begin(),
                   [](float x, float y) { return std::memcmp(&x, &y, 4) == 0; }));
}

TEST_CASE("render: resolution cap enforced") {
  Scene scene = make_scene(checker_spec(Layout::single_plane), 0);
  Camera cam = default_camera(2000, 4);
  CHECK_THROWS_AS(render(scene, cam), InvalidSpec);
}

TEST_CASE("sample_camera_pair: full-overlap bucket accepts identical cameras") {
  Scene scene = make_scene(checker_spec(Layout::single_plane), 5);
  auto [cam_r, cam_t] = sample_camera_pair(scene, {0.99, 1.0}, 5, 64, 64);
  CHECK((cam_r.R - cam_t.R).norm() == 0.0);
  CHECK((cam_r.t - cam_t.t).norm() == 0.0);
}

TEST_CASE("sample_camera_pair: realized ratio within bucket +- 0.05") {
  SceneSpec spec = checker_spec(Layout::two_plane);
  Scene scene = make_scene(spec, 31);
  auto [cam_r, cam_t] = sample_camera_pair(scene, {0.2, 0.4}, 31, 128, 128);
  // recompute the ratio at full resolution
  auto rt = render(scene, cam_t);
  auto rr = render(scene, cam_r);
  auto gtw = gt_warp_field(cam_t, cam_r, rt.depth);
  Mask ovl = overlap_mask(gtw.warp, gtw.validity, cam_t, cam_r, rr.depth, rt.depth);
  CHECK(ovl.mean() >= 0.2 - 0.05);
  CHECK(ovl.mean() <= 0.4 + 0.05);
}

TEST_CASE("sample_camera_pair: infeasible bucket throws BucketUnreachable") {
  Scene scene = make_scene(checker_spec(Layout::single_plane), 2);
  CHECK_THROWS_AS(sample_camera_pair(scene, {0.0, 0.001}, 2, 32, 32),
                  BucketUnreachable);
}

TEST_CASE("generate_pair: identical-camera degenerate sample") {
  SceneSpec spec = checker_spec(Layout::single_plane);
  auto s = generate_pair(spec, {0.99, 1.0}, 9, 64, 64);
  CHECK(s.overlap.count() == 64u * 64u);
  for (float v : s.warp_gt.disp) CHECK(std::abs(v) < 1e-6);
  // the stitched overlap region equals the render itself
  const int ax = 32, ay = 32;
  for (int y = 0; y < 64; y += 9)
    for (int x = 0; x < 64; x += 9) {
      const float* got = s.sample_stitched.at(x + ax, y + ay);
      const float* want = s.image_ref.at(x, y);
      for (int c = 0; c < 3; ++c) CHECK(std::abs(got[c] - want[c]) < 1e-5);
    }
}

TEST_CASE("generate_pair: overlap_ratio equals the recomputed mask mean") {
  SceneSpec spec = checker_spec(Layout::two_plane);
  auto s = generate_pair(spec, {0.4, 0.6}, 13, 64, 64);
  CHECK(s.overlap_ratio == s.overlap.mean());
}

TEST_CASE("generate_pair: deterministic and free of stray non-finites") {
  SceneSpec spec = checker_spec(Layout::heightfield);
  auto a = generate_pair(spec, {0.4, 0.6}, 77, 64, 64);
  auto b = generate_pair(spec, {0.4, 0.6}, 77, 64, 64);
  CHECK(a.image_ref.data == b.image_ref.data);
  CHECK(a.warp_gt.disp == b.warp_gt.disp);
  CHECK(a.overlap.bits == b.overlap.bits);
  for (float v : a.warp_gt.disp) CHECK(std::isfinite(v));
  for (float d : a.depth_target.values)
    CHECK((std::isfinite(d) ? d > 0.0f : d == kDepthSentinel));
}

TEST_CASE("generate_pair: bucketed sweep lands every sample in its bucket") {
  // scaled-down audit of the bucket sweep: 3 buckets x 4 seeds
  const OverlapBucket buckets[] = {{0.2, 0.4}, {0.4, 0.6}, {0.6, 0.8}};
  SceneSpec spec = checker_spec(Layout::two_plane);
  int counts[3] = {0, 0, 0};
  for (int bi = 0; bi < 3; ++bi)
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      auto s = generate_pair(spec, buckets[bi], seed, 64, 64);
      if (s.overlap_ratio >= buckets[bi].lo - 0.05 &&
          s.overlap_ratio <= buckets[bi].hi + 0.05)
        ++counts[bi];
    }
  CHECK(counts[0] == 4);
  CHECK(counts[1] == 4);
  CHECK(counts[2] == 4);
}
