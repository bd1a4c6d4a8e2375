#pragma once

#include <stdexcept>

#include "roadbeh/scene.hpp"

namespace roadbeh {

/// Flat-ground pinhole camera looking along the ego heading, pitched down by
/// `pitch` radians, mounted `height` meters above the road at the ego origin.
struct CameraModel {
  double focal = 1000.0;  // px
  double cx = 640.0;      // principal point, px
  double cy = 360.0;
  double height = 1.5;  // m
  double pitch = 0.05;  // rad, positive looks down

  void validate() const;
};

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Intersects the pixel's viewing ray with the ground plane z = 0.
/// Throws GeometryError("no ground intersection") at or above the horizon.
Point2 ground_project(Pixel pixel, const CameraModel& cam);

/// Inverse of ground_project for ground points in front of the camera.
Pixel forward_project(Point2 ground, const CameraModel& cam);

}  // namespace roadbeh
