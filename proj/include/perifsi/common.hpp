#ifndef PERIFSI_COMMON_HPP
#define PERIFSI_COMMON_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace perifsi {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

// Background unknowns per control point: Y = (p, v1, v2, T), one column per point.
using Field = Eigen::Matrix<double, 4, Eigen::Dynamic>;

enum class ErrorKind {
  config,     // bad input file / parameter validation
  io,         // filesystem failures
  numerical,  // NaN/Inf, invalid gas state, singular systems
  domain,     // point outside patch, node escaped domain
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

  bool operator==(const Rect&) const = default;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool contains(const Vec2& p) const {
    return p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1;
  }
  Vec2 center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
};

}  // namespace perifsi

#endif
