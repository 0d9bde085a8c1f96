// numpy-facing bindings; arrays are copied at the boundary.
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <optional>

#include "stitchkit/blend.hpp"
#include "stitchkit/dataset.hpp"
#include "stitchkit/estimators.hpp"
#include "stitchkit/geometry.hpp"
#include "stitchkit/io.hpp"
#include "stitchkit/losses.hpp"
#include "stitchkit/scene.hpp"
#include "stitchkit/warp_ops.hpp"

namespace py = pybind11;
using namespace stitchkit;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using BoolArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;

py::array image_to_numpy(const Image& im) {
  py::array_t<float> out({im.height, im.width, 3});
  std::memcpy(out.mutable_data(), im.data.data(), im.data.size() * sizeof(float));
  return out;
}

Image image_from_numpy(const FloatArray& a) {
  if (a.ndim() != 3 || a.shape(2) != 3)
    throw py::value_error("expected an (H, W, 3) float array");
  Image im(int(a.shape(1)), int(a.shape(0)));
  std::memcpy(im.data.data(), a.data(), im.data.size() * sizeof(float));
  return im;
}

py::array depth_to_numpy(const DepthMap& d) {
  py::array_t<float> out({d.height, d.width});
  std::memcpy(out.mutable_data(), d.values.data(), d.values.size() * sizeof(float));
  return out;
}

DepthMap depth_from_numpy(const FloatArray& a) {
  if (a.ndim() != 2) throw py::value_error("expected an (H, W) float array");
  DepthMap d(int(a.shape(1)), int(a.shape(0)));
  std::memcpy(d.values.data(), a.data(), d.values.size() * sizeof(float));
  return d;
}

py::array warp_to_numpy(const WarpField& w) {
  py::array_t<float> out({w.height, w.width, 2});
  std::memcpy(out.mutable_data(), w.disp.data(), w.disp.size() * sizeof(float));
  return out;
}

WarpField warp_from_numpy(const FloatArray& a) {
  if (a.ndim() != 3 || a.shape(2) != 2)
    throw py::value_error("expected an (H, W, 2) float array");
  WarpField w(int(a.shape(1)), int(a.shape(0)));
  std::memcpy(w.disp.data(), a.data(), w.disp.size() * sizeof(float));
  return w;
}

py::array mask_to_numpy(const Mask& m) {
  py::array_t<bool> out({m.height, m.width});
  bool* p = out.mutable_data();
  for (std::size_t i = 0; i < m.bits.size(); ++i) p[i] = m.bits[i] != 0;
  return out;
}

Mask mask_from_numpy(const BoolArray& a, MaskRole role = MaskRole::overlap) {
  if (a.ndim() != 2) throw py::value_error("expected an (H, W) bool array");
  Mask m(int(a.shape(1)), int(a.shape(0)), role);
  const bool* p = a.data();
  for (std::size_t i = 0; i < m.bits.size(); ++i) m.bits[i] = p[i] ? 1 : 0;
  return m;
}

py::array importance_to_numpy(const ImportanceMap& im) {
  py::array_t<float> out({im.height, im.width});
  std::memcpy(out.mutable_data(), im.z.data(), im.z.size() * sizeof(float));
  return out;
}

ImportanceMap importance_from_numpy(const FloatArray& a) {
  if (a.ndim() != 2) throw py::value_error("expected an (H, W) float array");
  ImportanceMap im(int(a.shape(1)), int(a.shape(0)));
  std::memcpy(im.z.data(), a.data(), im.z.size() * sizeof(float));
  return im;
}

std::optional<Mask> optional_mask(const std::optional<BoolArray>& a) {
  if (!a) return std::nullopt;
  return mask_from_numpy(*a, MaskRole::validity);
}

std::vector<Correspondence> correspondences_from_numpy(const FloatArray& a) {
  if (a.ndim() != 2 || a.shape(1) != 4)
    throw py::value_error("expected an (N, 4) array of (xt, yt, xr, yr) rows");
  std::vector<Correspondence> cs(std::size_t(a.shape(0)));
  auto r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    cs[i].x_t = {double(r(i, 0)), double(r(i, 1))};
    cs[i].x_r = {double(r(i, 2)), double(r(i, 3))};
  }
  return cs;
}

SceneSpec make_spec(const std::string& layout, double near, double far,
                    double parallax, const std::string& texture,
                    double frequency, std::uint64_t texture_seed) {
  SceneSpec spec;
  spec.layout = layout_from_name(layout);
  spec.near = near;
  spec.far = far;
  spec.parallax = parallax;
  spec.texture.kind = texture_from_name(texture);
  spec.texture.frequency = frequency;
  spec.texture.seed = texture_seed;
  spec.validate();
  return spec;
}

}  // namespace

PYBIND11_MODULE(_stitchkit, m) {
  m.doc() = "pixel-wise stitching core";

  py::register_exception<Error>(m, "StitchError");

  // ----- cameras and geometry

  py::class_<Camera>(m, "Camera")
      .def(py::init<>())
      .def_readwrite("K", &Camera::K)
      .def_readwrite("R", &Camera::R)
      .def_readwrite("t", &Camera::t)
      .def_readwrite("width", &Camera::width)
      .def_readwrite("height", &Camera::height)
      .def("center", &Camera::center)
      .def("to_json", &Camera::to_json)
      .def_static("from_json", &Camera::from_json);

  m.def("default_camera", &default_camera, py::arg("width"), py::arg("height"));

  m.def(
      "project",
      [](const Camera& cam, const Eigen::Vector3d& point) {
        const Projection p = project(cam, point);
        return py::make_tuple(p.pixel, p.depth);
      },
      py::arg("camera"), py::arg("point"));

  m.def("backproject", &backproject, py::arg("camera"), py::arg("pixel"),
        py::arg("depth"));

  m.def(
      "gt_warp_field",
      [](const Camera& cam_t, const Camera& cam_r, const FloatArray& depth_t) {
        const GtWarp g = gt_warp_field(cam_t, cam_r, depth_from_numpy(depth_t));
        return py::make_tuple(warp_to_numpy(g.warp), mask_to_numpy(g.validity));
      },
      py::arg("cam_target"), py::arg("cam_ref"), py::arg("depth_target"));

  m.def(
      "overlap_mask",
      [](const FloatArray& warp, const BoolArray& validity, const Camera& cam_t,
         const Camera& cam_r, const FloatArray& depth_r, const FloatArray& depth_t,
         double tau_occ) {
        return mask_to_numpy(overlap_mask(
            warp_from_numpy(warp), mask_from_numpy(validity, MaskRole::validity),
            cam_t, cam_r, depth_from_numpy(depth_r), depth_from_numpy(depth_t),
            tau_occ));
      },
      py::arg("warp"), py::arg("validity"), py::arg("cam_target"),
      py::arg("cam_ref"), py::arg("depth_ref"), py::arg("depth_target"),
      py::arg("tau_occ") = 0.01);

  m.def(
      "fundamental_from_cameras",
      [](const Camera& cam_r, const Camera& cam_t) {
        return fundamental_from_cameras(cam_r, cam_t).F;
      },
      py::arg("cam_ref"), py::arg("cam_target"));

  // ----- scene generation

  py::class_<DatasetSample>(m, "DatasetSample")
      .def_property_readonly("image_ref",
                             [](const DatasetSample& s) { return image_to_numpy(s.image_ref); })
      .def_property_readonly("image_target",
                             [](const DatasetSample& s) { return image_to_numpy(s.image_target); })
      .def_property_readonly("depth_ref",
                             [](const DatasetSample& s) { return depth_to_numpy(s.depth_ref); })
      .def_property_readonly("depth_target",
                             [](const DatasetSample& s) { return depth_to_numpy(s.depth_target); })
      .def_property_readonly("warp_gt",
                             [](const DatasetSample& s) { return warp_to_numpy(s.warp_gt); })
      .def_property_readonly("validity",
                             [](const DatasetSample& s) { return mask_to_numpy(s.validity); })
      .def_property_readonly("overlap",
                             [](const DatasetSample& s) { return mask_to_numpy(s.overlap); })
      .def_property_readonly("stitched_gt",
                             [](const DatasetSample& s) { return image_to_numpy(s.sample_stitched); })
      .def_readonly("cam_ref", &DatasetSample::cam_ref)
      .def_readonly("cam_target", &DatasetSample::cam_target)
      .def_readonly("overlap_ratio", &DatasetSample::overlap_ratio)
      .def_readonly("seed", &DatasetSample::seed);

  m.def(
      "generate_pair",
      [](const std::string& layout, double lo, double hi, std::uint64_t seed,
         int width, int height, double near, double far, double parallax,
         const std::string& texture, double frequency, std::uint64_t texture_seed) {
        return generate_pair(
            make_spec(layout, near, far, parallax, texture, frequency, texture_seed),
            OverlapBucket{lo, hi}, seed, width, height);
      },
      py::arg("layout"), py::arg("overlap_lo") = 0.0, py::arg("overlap_hi") = 1.0,
      py::arg("seed") = 0, py::arg("width") = 256, py::arg("height") = 256,
      py::arg("near") = 2.0, py::arg("far") = 4.0, py::arg("parallax") = 1.0,
      py::arg("texture") = "checker", py::arg("frequency") = 0.5,
      py::arg("texture_seed") = 0);

  m.def("read_sample", &read_sample, py::arg("dir"));
  m.def("write_sample", &write_sample, py::arg("dir"), py::arg("sample"));

  // ----- warp operators

  m.def(
      "importance_from_depth",
      [](const FloatArray& depth, double beta) {
        return importance_to_numpy(importance_from_depth(depth_from_numpy(depth), beta));
      },
      py::arg("depth_target"), py::arg("beta") = 10.0);

  m.def(
      "forward_warp_softmax",
      [](const FloatArray& image, const FloatArray& warp,
         const FloatArray& importance, int canvas_width, int canvas_height,
         double anchor_x, double anchor_y, const std::optional<BoolArray>& validity,
         int workers) {
        const auto v = optional_mask(validity);
        const ForwardWarpResult r = forward_warp_softmax(
            image_from_numpy(image), warp_from_numpy(warp),
            importance_from_numpy(importance),
            CanvasSpec{canvas_width, canvas_height, anchor_x, anchor_y},
            v ? &*v : nullptr, workers);
        return py::make_tuple(image_to_numpy(r.image), mask_to_numpy(r.occupancy));
      },
      py::arg("image"), py::arg("warp"), py::arg("importance"),
      py::arg("canvas_width"), py::arg("canvas_height"), py::arg("anchor_x") = 0.0,
      py::arg("anchor_y") = 0.0, py::arg("validity") = std::nullopt,
      py::arg("workers") = 1);

  m.def(
      "backward_warp",
      [](const FloatArray& image, const FloatArray& warp) {
        const BackwardWarpResult r =
            backward_warp(image_from_numpy(image), warp_from_numpy(warp));
        return py::make_tuple(image_to_numpy(r.image), mask_to_numpy(r.in_bounds));
      },
      py::arg("image"), py::arg("warp"));

  // ----- canvas and blending

  py::class_<StitchCanvas>(m, "StitchCanvas")
      .def_property_readonly("ref_padded",
                             [](const StitchCanvas& c) { return image_to_numpy(c.ref_padded); })
      .def_property_readonly("warped_target",
                             [](const StitchCanvas& c) { return image_to_numpy(c.warped_target); })
      .def_property_readonly("m_ref",
                             [](const StitchCanvas& c) { return mask_to_numpy(c.m_ref); })
      .def_property_readonly("m_wt",
                             [](const StitchCanvas& c) { return mask_to_numpy(c.m_wt); })
      .def_property_readonly("hole",
                             [](const StitchCanvas& c) { return mask_to_numpy(c.hole); })
      .def_property_readonly("width",
                             [](const StitchCanvas& c) { return c.spec.width; })
      .def_property_readonly("height",
                             [](const StitchCanvas& c) { return c.spec.height; })
      .def_property_readonly("anchor",
                             [](const StitchCanvas& c) {
                               return py::make_tuple(c.spec.anchor_x, c.spec.anchor_y);
                             });

  m.def(
      "make_canvas",
      [](const FloatArray& ref, const FloatArray& target, const FloatArray& warp,
         const FloatArray& importance, const std::optional<BoolArray>& validity,
         int workers) {
        const auto v = optional_mask(validity);
        return make_canvas(image_from_numpy(ref), image_from_numpy(target),
                           warp_from_numpy(warp), importance_from_numpy(importance),
                           v ? &*v : nullptr, workers);
      },
      py::arg("ref"), py::arg("target"), py::arg("warp"), py::arg("importance"),
      py::arg("validity") = std::nullopt, py::arg("workers") = 1);

  m.def(
      "average_blend",
      [](const StitchCanvas& c) { return image_to_numpy(average_blend(c)); },
      py::arg("canvas"));

  m.def(
      "feather_blend",
      [](const StitchCanvas& c, double feather_px) {
        return image_to_numpy(feather_blend(c, feather_px));
      },
      py::arg("canvas"), py::arg("feather_px") = 8.0);

  m.def(
      "fill_holes_diffusion",
      [](const FloatArray& image, const BoolArray& hole, int max_iters, double tol) {
        const FillResult r = fill_holes_diffusion(
            image_from_numpy(image), mask_from_numpy(hole, MaskRole::hole),
            max_iters, tol);
        return py::make_tuple(image_to_numpy(r.image), r.unfillable, r.iterations);
      },
      py::arg("image"), py::arg("hole"), py::arg("max_iters") = 2000,
      py::arg("tol") = 1e-5);

  py::class_<PipelineResult>(m, "PipelineResult")
      .def_property_readonly("stitched",
                             [](const PipelineResult& r) { return image_to_numpy(r.canvas.stitched); })
      .def_property_readonly("canvas",
                             [](const PipelineResult& r) { return r.canvas; })
      .def_property_readonly("warp_used",
                             [](const PipelineResult& r) { return warp_to_numpy(r.warp_used); })
      .def_readonly("warp_loss", &PipelineResult::warp_loss_value)
      .def_property_readonly("recon_loss",
                             [](const PipelineResult& r) { return r.recon.total; })
      .def_readonly("sampson_loss", &PipelineResult::sampson_loss)
      .def_readonly("masked_psnr_db", &PipelineResult::masked_psnr_db)
      .def_readonly("unfillable_holes", &PipelineResult::unfillable_holes);

  m.def(
      "stitch_pipeline",
      [](const DatasetSample& sample, const std::string& estimator,
         const std::string& blend, bool fill_holes, double feather_px,
         double importance_beta, int workers, std::uint64_t seed) {
        PipelineOptions opts;
        if (estimator == "oracle") opts.estimator = EstimatorChoice::oracle;
        else if (estimator == "homography") opts.estimator = EstimatorChoice::homography;
        else throw py::value_error("estimator must be 'oracle' or 'homography'");
        if (blend == "average") opts.blend = BlendChoice::average;
        else if (blend == "feather") opts.blend = BlendChoice::feather;
        else throw py::value_error("blend must be 'average' or 'feather'");
        opts.fill_holes = fill_holes;
        opts.feather_px = feather_px;
        opts.importance_beta = importance_beta;
        opts.workers = workers;
        opts.seed = seed;
        return stitch_pipeline(sample, opts);
      },
      py::arg("sample"), py::arg("estimator") = "oracle",
      py::arg("blend") = "average", py::arg("fill_holes") = true,
      py::arg("feather_px") = 8.0, py::arg("importance_beta") = 10.0,
      py::arg("workers") = 1, py::arg("seed") = 7);

  // ----- estimators

  m.def(
      "sample_correspondences",
      [](const DatasetSample& sample, std::size_t n, std::uint64_t seed) {
        const auto cs = sample_correspondences(sample, n, seed);
        py::array_t<double> out({py::ssize_t(cs.size()), py::ssize_t(4)});
        auto w = out.mutable_unchecked<2>();
        for (std::size_t i = 0; i < cs.size(); ++i) {
          w(i, 0) = cs[i].x_t.x();
          w(i, 1) = cs[i].x_t.y();
          w(i, 2) = cs[i].x_r.x();
          w(i, 3) = cs[i].x_r.y();
        }
        return out;
      },
      py::arg("sample"), py::arg("n"), py::arg("seed") = 0);

  m.def(
      "fit_homography",
      [](const FloatArray& correspondences, int iterations, double inlier_px,
         std::uint64_t seed) {
        return fit_homography(correspondences_from_numpy(correspondences),
                              RansacParams{iterations, inlier_px, seed})
            .H;
      },
      py::arg("correspondences"), py::arg("iterations") = 1000,
      py::arg("inlier_px") = 1.0, py::arg("seed") = 0);

  m.def(
      "homography_to_warp",
      [](const Eigen::Matrix3d& h, int width, int height) {
        const HomographyWarp hw = homography_to_warp(Homography{h}, width, height);
        return py::make_tuple(warp_to_numpy(hw.warp), mask_to_numpy(hw.valid));
      },
      py::arg("H"), py::arg("width"), py::arg("height"));

  // ----- losses and metrics

  m.def(
      "warp_loss",
      [](const FloatArray& w, const FloatArray& w_gt, const BoolArray& overlap,
         double alpha) {
        const WarpLossResult r = warp_loss(warp_from_numpy(w), warp_from_numpy(w_gt),
                                           mask_from_numpy(overlap), alpha);
        return py::make_tuple(r.total, r.ov_mean, r.nov_mean);
      },
      py::arg("warp"), py::arg("warp_gt"), py::arg("overlap"),
      py::arg("alpha") = 0.3);

  m.def(
      "recon_loss",
      [](const FloatArray& i_s, const FloatArray& i_r, const FloatArray& i_wt,
         const BoolArray& m_r, const BoolArray& m_wt) {
        const ReconLoss r = recon_loss(
            image_from_numpy(i_s), image_from_numpy(i_r), image_from_numpy(i_wt),
            mask_from_numpy(m_r, MaskRole::occupancy_ref),
            mask_from_numpy(m_wt, MaskRole::occupancy_warped_target));
        return py::make_tuple(r.total, r.l_ref, r.l_wt);
      },
      py::arg("stitched"), py::arg("ref_padded"), py::arg("warped_target"),
      py::arg("m_ref"), py::arg("m_wt"));

  m.def(
      "lsgan_losses",
      [](const std::vector<double>& d_real, const std::vector<double>& d_fake) {
        const LsganLosses r = lsgan_losses(d_real, d_fake);
        return py::make_tuple(r.l_d, r.l_adv);
      },
      py::arg("d_real"), py::arg("d_fake"));

  m.def(
      "sigmo_total_loss",
      [](double recon_total, double l_adv, double lambda_r, double lambda_a) {
        return sigmo_total_loss(recon_total, l_adv, LossConfig{0.3, lambda_r, lambda_a});
      },
      py::arg("recon_total"), py::arg("l_adv"), py::arg("lambda_r") = 1.0,
      py::arg("lambda_a") = 0.1);

  m.def(
      "sampson_epipolar_loss",
      [](const FloatArray& w, const Eigen::Matrix3d& f, const BoolArray& region) {
        const SampsonResult r = sampson_epipolar_loss(
            warp_from_numpy(w), FundamentalMatrix{f}, mask_from_numpy(region));
        return py::make_tuple(r.loss, r.skipped, r.counted);
      },
      py::arg("warp"), py::arg("F"), py::arg("region"));

  m.def(
      "masked_psnr",
      [](const FloatArray& i_r, const FloatArray& i_wt, const BoolArray& overlap,
         const BoolArray& hole, double peak) {
        return masked_psnr(image_from_numpy(i_r), image_from_numpy(i_wt),
                           mask_from_numpy(overlap),
                           mask_from_numpy(hole, MaskRole::hole), peak);
      },
      py::arg("ref_padded"), py::arg("warped_target"), py::arg("overlap"),
      py::arg("hole"), py::arg("peak") = 1.0);

  m.def(
      "canvas_overlap_region",
      [](const FloatArray& warp, const BoolArray& warp_valid,
         const BoolArray& overlap, const StitchCanvas& canvas) {
        return mask_to_numpy(canvas_overlap_region(
            warp_from_numpy(warp), mask_from_numpy(warp_valid, MaskRole::validity),
            mask_from_numpy(overlap), canvas));
      },
      py::arg("warp"), py::arg("warp_valid"), py::arg("overlap"), py::arg("canvas"));

  // ----- file formats

  m.def(
      "read_flo",
      [](const std::filesystem::path& p) { return warp_to_numpy(read_flo(p)); },
      py::arg("path"));
  m.def(
      "write_flo",
      [](const std::filesystem::path& p, const FloatArray& w) {
        write_flo(p, warp_from_numpy(w));
      },
      py::arg("path"), py::arg("warp"));
  m.def(
      "read_pfm",
      [](const std::filesystem::path& p) { return depth_to_numpy(read_pfm(p)); },
      py::arg("path"));
  m.def(
      "write_pfm",
      [](const std::filesystem::path& p, const FloatArray& d) {
        write_pfm(p, depth_from_numpy(d));
      },
      py::arg("path"), py::arg("depth"));
  m.def(
      "read_png_rgb",
      [](const std::filesystem::path& p) { return image_to_numpy(read_png_rgb(p)); },
      py::arg("path"));
  m.def(
      "write_png_rgb",
      [](const std::filesystem::path& p, const FloatArray& im) {
        write_png_rgb(p, image_from_numpy(im));
      },
      py::arg("path"), py::arg("image"));
  m.def(
      "read_png_mask",
      [](const std::filesystem::path& p) { return mask_to_numpy(read_png_mask(p)); },
      py::arg("path"));
  m.def(
      "write_png_mask",
      [](const std::filesystem::path& p, const BoolArray& m) {
        write_png_mask(p, mask_from_numpy(m));
      },
      py::arg("path"), py::arg("mask"));
}
