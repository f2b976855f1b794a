#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace mi2p {

// Dense point in R^d. Kept as a plain vector so the Python bindings and the
// CSV layer stay conversion-free.
using Point = std::vector<double>;

inline double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Point& a) { return std::sqrt(dot(a, a)); }

// y += alpha * x
inline void axpy(double alpha, const Point& x, Point& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(double alpha, Point& x) {
  for (double& v : x) v *= alpha;
}

inline Point added(const Point& x, double alpha, const Point& s) {
  Point y = x;
  axpy(alpha, s, y);
  return y;
}

inline Point zeros(std::size_t d) { return Point(d, 0.0); }

}  // namespace mi2p
