#pragma once

#include <Eigen/Dense>
#include <string>

#include "stitchkit/errors.hpp"

namespace stitchkit {

// Pinhole camera, world->camera convention: x_cam = R * x_world + t.
struct Camera {
  Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  int width = 0;
  int height = 0;

  void validate() const;

  Eigen::Vector3d center() const { return -R.transpose() * t; }
  Eigen::Matrix<double, 3, 4> projection_matrix() const;

  bool in_bounds(const Eigen::Vector2d& px) const {
    return px.x() >= 0.0 && px.x() <= width - 1 && px.y() >= 0.0 &&
           px.y() <= height - 1;
  }

  std::string to_json() const;
  static Camera from_json(const std::string& text);
};

struct Projection {
  Eigen::Vector2d pixel;
  double depth;  // z in the camera frame, signed
};

// Pinhole projection. Throws DegenerateProjection when |depth| < 1e-12;
// points behind the camera project with negative depth, caller decides.
Projection project(const Camera& camera, const Eigen::Vector3d& point);

// Inverse of project for a known depth (z in the camera frame).
Eigen::Vector3d backproject(const Camera& camera, const Eigen::Vector2d& pixel,
                            double depth);

// Camera with intrinsics and resolution rescaled by `scale` (pixel-center
// convention preserved), same pose. Used for coarse probe grids.
Camera scaled_camera(const Camera& cam, int new_width, int new_height);

// Default camera for generated datasets: ~55 degree horizontal FOV, centered
// principal point, identity pose.
Camera default_camera(int width, int height);

}  // namespace stitchkit
