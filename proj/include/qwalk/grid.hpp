#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace qwalk {

/// Uniform sampling of the torus [0,2pi)^d with a fractional cell offset.
/// Points per axis are k_m = 2*pi*(m + offset)/N.  The default offset 1/2
/// keeps (0,...,0) and (pi,...,pi) off the grid for even N.
class TorusGrid {
 public:
  TorusGrid(int dimension, int points_per_axis, double offset = 0.5)
      : d_(dimension), n_points_(points_per_axis), offset_(offset) {
    if (d_ < 1) throw std::invalid_argument("TorusGrid: dimension must be >= 1");
    if (n_points_ < 2) throw std::invalid_argument("TorusGrid: N must be >= 2");
    if (offset_ < 0.0 || offset_ >= 1.0)
      throw std::invalid_argument("TorusGrid: offset must be in [0,1)");
  }

  int dimension() const { return d_; }
  int points_per_axis() const { return n_points_; }
  double offset() const { return offset_; }

  std::size_t size() const {
    std::size_t total = 1;
    for (int i = 0; i < d_; ++i) total *= static_cast<std::size_t>(n_points_);
    return total;
  }

  /// Axis-major decoding: index = m_1*N^{d-1} + ... + m_d.
  std::vector<int> multi_index(std::size_t index) const {
    std::vector<int> m(d_);
    for (int i = d_ - 1; i >= 0; --i) {
      m[i] = static_cast<int>(index % n_points_);
      index /= n_points_;
    }
    return m;
  }

  std::vector<double> point(std::size_t index) const {
    std::vector<int> m = multi_index(index);
    std::vector<double> k(d_);
    for (int i = 0; i < d_; ++i)
      k[i] = 2.0 * std::numbers::pi * (m[i] + offset_) / n_points_;
    return k;
  }

  double cell_weight() const {
    double w = 1.0;
    for (int i = 0; i < d_; ++i) w /= n_points_;
    return w;
  }

 private:
  int d_;
  int n_points_;
  double offset_;
};

/// Euclidean distance on the torus between k and a reference point p,
/// wrapping each axis modulo 2pi.
inline double torus_distance(const std::vector<double>& k, const std::vector<double>& p) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double sq = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    double delta = std::fmod(std::fabs(k[i] - p[i]), two_pi);
    delta = std::min(delta, two_pi - delta);
    sq += delta * delta;
  }
  return std::sqrt(sq);
}

}  // namespace qwalk
