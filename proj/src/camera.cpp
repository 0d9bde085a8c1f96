#include "stitchkit/camera.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace stitchkit {

void Camera::validate() const {
  if (width <= 0 || height <= 0) throw InvalidSpec("camera resolution must be positive");
  if (K(0, 0) <= 0.0 || K(1, 1) <= 0.0) throw InvalidSpec("focal entries must be positive");
  if (std::abs(K(2, 2) - 1.0) > 1e-12) throw InvalidSpec("K[2][2] must be 1");
  if (std::abs(K(1, 0)) > 1e-12 || std::abs(K(2, 0)) > 1e-12 || std::abs(K(2, 1)) > 1e-12)
    throw InvalidSpec("K must be upper triangular");
  if (std::abs(R.determinant() - 1.0) > 1e-9) throw InvalidSpec("det(R) must be 1");
}

Eigen::Matrix<double, 3, 4> Camera::projection_matrix() const {
  Eigen::Matrix<double, 3, 4> Rt;
  Rt.leftCols<3>() = R;
  Rt.col(3) = t;
  return K * Rt;
}

Projection project(const Camera& camera, const Eigen::Vector3d& point) {
  const Eigen::Vector3d pc = camera.R * point + camera.t;
  if (std::abs(pc.z()) < 1e-12)
    throw DegenerateProjection("point on the camera plane, |depth| < 1e-12");
  const Eigen::Vector3d h = camera.K * pc;
  return Projection{Eigen::Vector2d(h.x() / h.z(), h.y() / h.z()), pc.z()};
}

Eigen::Vector3d backproject(const Camera& camera, const Eigen::Vector2d& pixel,
                            double depth) {
  Eigen::Vector3d ray = camera.K.inverse() * Eigen::Vector3d(pixel.x(), pixel.y(), 1.0);
  return camera.R.transpose() * (ray * depth - camera.t);
}

Camera scaled_camera(const Camera& cam, int new_width, int new_height) {
  const double sx = double(new_width) / cam.width;
  const double sy = double(new_height) / cam.height;
  Camera out = cam;
  out.width = new_width;
  out.height = new_height;
  out.K(0, 0) *= sx;
  out.K(1, 1) *= sy;
  out.K(0, 1) *= sx;
  // pixel centers: continuous coordinate c maps to (c + 0.5) * s - 0.5
  out.K(0, 2) = (cam.K(0, 2) + 0.5) * sx - 0.5;
  out.K(1, 2) = (cam.K(1, 2) + 0.5) * sy - 0.5;
  return out;
}

Camera default_camera(int width, int height) {
  Camera cam;
  cam.width = width;
  cam.height = height;
  const double fov = 55.0 * M_PI / 180.0;
  const double f = 0.5 * width / std::tan(0.5 * fov);
  cam.K << f, 0, 0.5 * (width - 1), 0, f, 0.5 * (height - 1), 0, 0, 1;
  return cam;
}

std::string Camera::to_json() const {
  nlohmann::json j;
  std::vector<double> krm(9), rrm(9);  // row-major on the wire
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      krm[r * 3 + c] = K(r, c);
      rrm[r * 3 + c] = R(r, c);
    }
  j["K"] = krm;
  j["R"] = rrm;
  j["t"] = std::vector<double>{t.x(), t.y(), t.z()};
  j["width"] = width;
  j["height"] = height;
  return j.dump(2);
}

Camera Camera::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Camera cam;
  const auto krm = j.at("K").get<std::vector<double>>();
  const auto rrm = j.at("R").get<std::vector<double>>();
  const auto tv = j.at("t").get<std::vector<double>>();
  if (krm.size() != 9 || rrm.size() != 9 || tv.size() != 3)
    throw TruncatedFile("camera JSON: wrong array sizes");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      cam.K(r, c) = krm[r * 3 + c];
      cam.R(r, c) = rrm[r * 3 + c];
    }
  cam.t = Eigen::Vector3d(tv[0], tv[1], tv[2]);
  cam.width = j.at("width").get<int>();
  cam.height = j.at("height").get<int>();
  return cam;
}

}  // namespace stitchkit
