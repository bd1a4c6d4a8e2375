#include <cmath>

#include "doctest.h"
#include "roadbeh/camera.hpp"

using roadbeh::CameraModel;
using roadbeh::Pixel;
using roadbeh::Point2;

namespace {

// Independent pinhole: rotate the ego-frame point about the x axis by pitch and
// divide by depth.
Pixel pinhole(Point2 p, const CameraModel& cam) {
  const double X = p.x, Y = p.y, Z = -cam.height;  // ground point relative to the camera
  const double cp = std::cos(cam.pitch), sp = std::sin(cam.pitch);
  const double depth = Y * cp - Z * sp;       // along the optical axis
  const double down = -(Y * sp + Z * cp);     // image v grows downward
  return {cam.cx + cam.focal * X / depth, cam.cy + cam.focal * down / depth};
}

}  // namespace

TEST_CASE("principal point hits the ground at H / tan(pitch)") {
  CameraModel cam;
  cam.pitch = 0.08;
  const Point2 p = roadbeh::ground_project({cam.cx, cam.cy}, cam);
  CHECK(p.x == doctest::Approx(0.0));
  CHECK(p.y == doctest::Approx(cam.height / std::tan(cam.pitch)).epsilon(1e-12));
}

TEST_CASE("pixels left of the principal point land left of the ego") {
  CameraModel cam;
  CHECK(roadbeh::ground_project({cam.cx - 100, cam.cy + 50}, cam).x < 0);
  CHECK(roadbeh::ground_project({cam.cx + 100, cam.cy + 50}, cam).x > 0);
}

TEST_CASE("round trip through an independent pinhole") {
  const CameraModel cam{900.0, 600.0, 350.0, 1.6, 0.03};
  for (double y = 2.0; y <= 100.0; y += 7.0)
    for (double x : {-12.0, -3.5, 0.0, 1.75, 9.0}) {
      const Pixel px = pinhole({x, y}, cam);
      const Point2 back = roadbeh::ground_project(px, cam);
      CHECK(std::abs(back.x - x) < 1e-9);
      CHECK(std::abs(back.y - y) < 1e-9);
      const Pixel lib = roadbeh::forward_project({x, y}, cam);
      CHECK(std::abs(lib.u - px.u) < 1e-9);
      CHECK(std::abs(lib.v - px.v) < 1e-9);
    }
}

TEST_CASE("no ground intersection at or above the horizon") {
  CameraModel cam;
  const double horizon_v = cam.cy - cam.focal * std::tan(cam.pitch);
  CHECK_THROWS_WITH_AS(roadbeh::ground_project({cam.cx, horizon_v - 10}, cam), "no ground intersection",
                       roadbeh::GeometryError);
  CHECK_THROWS_AS(roadbeh::ground_project({cam.cx, horizon_v}, cam), roadbeh::GeometryError);
  cam.height = 0;
  CHECK_THROWS_AS(roadbeh::ground_project({cam.cx, cam.cy}, cam), roadbeh::GeometryError);
}
