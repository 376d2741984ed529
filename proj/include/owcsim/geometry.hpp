#pragma once

#include <cmath>

namespace owcsim {

struct Vec2 {
  double x = 0, y = 0;
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
  double x = 0, y = 0, z = 0;
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Vec2 xy() const { return {x, y}; }
};

inline double distance(Vec3 a, Vec3 b) { return (a - b).norm(); }
inline double planar_distance(Vec3 a, Vec3 b) { return (a.xy() - b.xy()).norm(); }
inline double planar_distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

inline double deg2rad(double deg) { return deg * M_PI / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / M_PI; }

}  // namespace owcsim
