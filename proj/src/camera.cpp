#include "roadbeh/camera.hpp"

#include <cmath>

namespace roadbeh {

void CameraModel::validate() const {
  if (!(focal > 0.0)) throw GeometryError("camera focal length must be > 0");
  if (!(height > 0.0)) throw GeometryError("camera height must be > 0");
}

// Camera axes in the ego frame (x right, y forward, z up):
//   right   = ( 1,          0,           0)
//   down    = ( 0, -sin(pitch), -cos(pitch))
//   forward = ( 0,  cos(pitch), -sin(pitch))
Point2 ground_project(Pixel pixel, const CameraModel& cam) {
  cam.validate();
  const double a = (pixel.u - cam.cx) / cam.focal;
  const double b = (pixel.v - cam.cy) / cam.focal;
  const double s = std::sin(cam.pitch), c = std::cos(cam.pitch);
  const double descent = b * c + s;  // -z component of the ray direction
  if (!(descent > 1e-12)) throw GeometryError("no ground intersection");
  const double t = cam.height / descent;
  return {t * a, t * (c - b * s)};
}

Pixel forward_project(Point2 ground, const CameraModel& cam) {
  cam.validate();
  const double s = std::sin(cam.pitch), c = std::cos(cam.pitch);
  const double xc = ground.x;
  const double yc = -ground.y * s + cam.height * c;
  const double zc = ground.y * c + cam.height * s;
  if (!(zc > 1e-12)) throw GeometryError("point is behind the camera");
  return {cam.cx + cam.focal * xc / zc, cam.cy + cam.focal * yc / zc};
}

}  // namespace roadbeh
