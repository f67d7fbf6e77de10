#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwalk/parallel.hpp"
#include "qwalk/symbol.hpp"

namespace qwalk {

/// Amplitudes below this are dropped when sparsifying; the lost mass is
/// accumulated in dropped_mass.
constexpr double kAmplitudeFloor = 1e-300;

/// A finitely supported vector in l2(Z^d) (x) C^n, stored densely over its
/// bounding box.  The box grows under evolution (finite propagation speed),
/// so no truncation ever occurs.
class LatticeState {
 public:
  LatticeState(int dimension, int coin_size, std::vector<int> lo, std::vector<int> hi)
      : d_(dimension), n_(coin_size), lo_(std::move(lo)), hi_(std::move(hi)) {
    if (static_cast<int>(lo_.size()) != d_ || static_cast<int>(hi_.size()) != d_)
      throw std::invalid_argument("LatticeState: box dimension mismatch");
    std::size_t sites = 1;
    for (int i = 0; i < d_; ++i) {
      if (hi_[i] < lo_[i]) throw std::invalid_argument("LatticeState: empty box");
      sites *= static_cast<std::size_t>(hi_[i] - lo_[i] + 1);
    }
    data_.assign(sites * n_, Complex(0.0, 0.0));
  }

  static LatticeState delta(int dimension, const Offset& site, const CVector& coin) {
    LatticeState state(dimension, static_cast<int>(coin.size()), site, site);
    CVector normalized = coin / coin.norm();
    for (int c = 0; c < state.n_; ++c) state.data_[c] = normalized(c);
    return state;
  }

  /// Gaussian envelope exp(-|x-center|^2 / (4 sigma^2)) (x) coin, truncated
  /// where the tail mass drops below ~1e-12 and renormalized.  The truncated
  /// mass is recorded; a total-variation change of at most twice that carries
  /// over to every distribution derived from the state.
  static LatticeState gaussian(int dimension, const Offset& center, double sigma,
                               const CVector& coin) {
    if (sigma <= 0.0) throw std::invalid_argument("gaussian: sigma must be > 0");
    int radius = static_cast<int>(std::ceil(9.0 * sigma)) + 1;
    auto box_mass = [&](int r) {
      double axis = 0.0;
      for (int x = -r; x <= r; ++x) axis += std::exp(-x * x / (2.0 * sigma * sigma));
      return std::pow(axis, dimension);
    };
    double inside = box_mass(radius);
    double wide = box_mass(radius + static_cast<int>(std::ceil(4.0 * sigma)) + 4);
    std::vector<int> lo(dimension), hi(dimension);
    for (int i = 0; i < dimension; ++i) {
      lo[i] = center[i] - radius;
      hi[i] = center[i] + radius;
    }
    LatticeState state(dimension, static_cast<int>(coin.size()), lo, hi);
    CVector unit = coin / coin.norm();
    state.for_each_site_mut([&](const Offset& site, CVector& value) {
      double sq = 0.0;
      for (int i = 0; i < dimension; ++i) {
        double dx = site[i] - center[i];
        sq += dx * dx;
      }
      value = std::exp(-sq / (4.0 * sigma * sigma)) * unit;
    });
    state.truncated_tail_mass_ = (wide - inside) / wide;
    state.normalize();
    return state;
  }

  static LatticeState from_map(int dimension, int coin_size,
                               const std::map<Offset, CVector>& amplitudes) {
    if (amplitudes.empty())
      throw std::invalid_argument("LatticeState: empty amplitude map");
    std::vector<int> lo(dimension, 0), hi(dimension, 0);
    bool first = true;
    for (const auto& [site, value] : amplitudes) {
      if (static_cast<int>(site.size()) != dimension)
        throw std::invalid_argument("LatticeState: site dimension mismatch");
      if (value.size() != coin_size)
        throw std::invalid_argument("LatticeState: coin vector size mismatch");
      for (int i = 0; i < dimension; ++i) {
        lo[i] = first ? site[i] : std::min(lo[i], site[i]);
        hi[i] = first ? site[i] : std::max(hi[i], site[i]);
      }
      first = false;
    }
    LatticeState state(dimension, coin_size, lo, hi);
    for (const auto& [site, value] : amplitudes)
      for (int c = 0; c < coin_size; ++c)
        state.data_[state.flat_index(site) * coin_size + c] = value(c);
    return state;
  }

  int dimension() const { return d_; }
  int coin_size() const { return n_; }
  const std::vector<int>& box_lo() const { return lo_; }
  const std::vector<int>& box_hi() const { return hi_; }
  double dropped_mass() const { return dropped_mass_; }
  double truncated_tail_mass() const { return truncated_tail_mass_; }

  std::size_t site_count() const { return data_.size() / n_; }

  double squared_norm() const {
    double acc = 0.0;
    for (const Complex& z : data_) acc += std::norm(z);
    return acc;
  }
  double norm() const { return std::sqrt(squared_norm()); }

  void normalize() {
    double nrm = norm();
    if (nrm == 0.0) throw std::runtime_error("LatticeState: cannot normalize zero state");
    for (Complex& z : data_) z /= nrm;
  }

  bool contains(const Offset& site) const {
    for (int i = 0; i < d_; ++i)
      if (site[i] < lo_[i] || site[i] > hi_[i]) return false;
    return true;
  }

  CVector amplitude(const Offset& site) const {
    if (!contains(site)) return CVector::Zero(n_);
    CVector out(n_);
    std::size_t base = flat_index(site) * n_;
    for (int c = 0; c < n_; ++c) out(c) = data_[base + c];
    return out;
  }

  /// Deterministic (lexicographic) traversal of all box sites.
  void for_each_site(const std::function<void(const Offset&, const CVector&)>& fn) const {
    Offset site = lo_;
    CVector value(n_);
    for (std::size_t s = 0; s < site_count(); ++s) {
      for (int c = 0; c < n_; ++c) value(c) = data_[s * n_ + c];
      fn(site, value);
      advance(site);
    }
  }

  std::map<Offset, CVector> to_map() const {
    std::map<Offset, CVector> out;
    for_each_site([&](const Offset& site, const CVector& value) {
      if (value.norm() >= kAmplitudeFloor) out.emplace(site, value);
    });
    return out;
  }

  // step() needs raw access to build the gathered output.
  const std::vector<Complex>& raw() const { return data_; }
  std::vector<Complex>& raw() { return data_; }

  std::size_t flat_index(const Offset& site) const {
    std::size_t idx = 0;
    for (int i = 0; i < d_; ++i)
      idx = idx * static_cast<std::size_t>(hi_[i] - lo_[i] + 1) +
            static_cast<std::size_t>(site[i] - lo_[i]);
    return idx;
  }

  Offset site_at(std::size_t flat) const {
    Offset site(d_);
    for (int i = d_ - 1; i >= 0; --i) {
      std::size_t extent = static_cast<std::size_t>(hi_[i] - lo_[i] + 1);
      site[i] = lo_[i] + static_cast<int>(flat % extent);
      flat /= extent;
    }
    return site;
  }

  void add_dropped_mass(double mass) { dropped_mass_ += mass; }

 private:
  void advance(Offset& site) const {
    for (int i = d_ - 1; i >= 0; --i) {
      if (site[i] < hi_[i]) {
        ++site[i];
        return;
      }
      site[i] = lo_[i];
    }
  }

  void for_each_site_mut(const std::function<void(const Offset&, CVector&)>& fn) {
    Offset site = lo_;
    CVector value(n_);
    for (std::size_t s = 0; s < site_count(); ++s) {
      for (int c = 0; c < n_; ++c) value(c) = data_[s * n_ + c];
      fn(site, value);
      for (int c = 0; c < n_; ++c) data_[s * n_ + c] = value(c);
      advance(site);
    }
  }

  int d_;
  int n_;
  std::vector<int> lo_, hi_;
  std::vector<Complex> data_;
  double dropped_mass_ = 0.0;
  double truncated_tail_mass_ = 0.0;
};

/// One application of the walk: (U xi)(x) = sum_y A_y xi(x - y).
/// Pure gather over output sites, parallel over disjoint output regions.
inline LatticeState step(const LaurentMatrixSymbol& symbol, const LatticeState& state) {
  if (symbol.dimension() != state.dimension() || symbol.coin_size() != state.coin_size())
    throw std::invalid_argument("step: symbol/state dimension or coin size mismatch");
  const int d = state.dimension();
  const int n = state.coin_size();

  std::vector<int> lo = state.box_lo(), hi = state.box_hi();
  for (const auto& [y, a] : symbol.coefficients())
    for (int i = 0; i < d; ++i) {
      lo[i] = std::min(lo[i], state.box_lo()[i] + y[i]);
      hi[i] = std::max(hi[i], state.box_hi()[i] + y[i]);
    }
  LatticeState out(d, n, lo, hi);

  // Flatten coefficients once; Eigen matrices stay shared and read-only.
  struct Term {
    Offset offset;
    const Matrix* matrix;
  };
  std::vector<Term> terms;
  terms.reserve(symbol.coefficients().size());
  for (const auto& [y, a] : symbol.coefficients()) terms.push_back({y, &a});

  std::vector<Complex>& dst = out.raw();
  const std::vector<Complex>& src = state.raw();
  parallel_for(out.site_count(), [&](std::size_t begin, std::size_t end) {
    Offset source(d);
    for (std::size_t s = begin; s < end; ++s) {
      Offset target = out.site_at(s);
      for (const Term& term : terms) {
        for (int i = 0; i < d; ++i) source[i] = target[i] - term.offset[i];
        if (!state.contains(source)) continue;
        std::size_t src_base = state.flat_index(source) * n;
        const Matrix& a = *term.matrix;
        for (int row = 0; row < n; ++row) {
          Complex acc(0.0, 0.0);
          for (int col = 0; col < n; ++col) acc += a(row, col) * src[src_base + col];
          dst[s * n + row] += acc;
        }
      }
    }
  });
  out.add_dropped_mass(state.dropped_mass());
  return out;
}

inline LatticeState evolve(const LaurentMatrixSymbol& symbol, LatticeState state, long t) {
  if (t < 0) throw std::invalid_argument("evolve: t must be >= 0");
  for (long s = 0; s < t; ++s) state = step(symbol, state);
  return state;
}

/// The rescaled position distribution p_t: mass |xi_t(x)|^2 at v = x/t.
/// Velocities are kept as exact rationals (site over t).
class ScaledDistribution {
 public:
  ScaledDistribution(const LatticeState& state, long t) : t_(t), d_(state.dimension()) {
    if (t < 1) throw std::invalid_argument("ScaledDistribution: t must be >= 1");
    state.for_each_site([&](const Offset& site, const CVector& value) {
      double mass = value.squaredNorm();
      if (mass > 0.0) atoms_.emplace_back(site, mass);
    });
  }

  long time() const { return t_; }
  int dimension() const { return d_; }
  const std::vector<std::pair<Offset, double>>& atoms() const { return atoms_; }

  double total_mass() const {
    double acc = 0.0;
    for (const auto& [site, mass] : atoms_) acc += mass;
    return acc;
  }

  std::vector<double> velocity(const Offset& site) const {
    std::vector<double> v(d_);
    for (int i = 0; i < d_; ++i) v[i] = static_cast<double>(site[i]) / t_;
    return v;
  }

  /// sum over atoms of mass * prod_i v_i^{m_i}.
  double moment(const std::vector<int>& multi_index) const {
    if (static_cast<int>(multi_index.size()) != d_)
      throw std::invalid_argument("moment: multi-index dimension mismatch");
    double acc = 0.0;
    for (const auto& [site, mass] : atoms_) {
      double term = mass;
      for (int i = 0; i < d_; ++i)
        term *= std::pow(static_cast<double>(site[i]) / t_, multi_index[i]);
      acc += term;
    }
    return acc;
  }

  /// Mass inside the centered box [-L_1,L_1] x ... x [-L_d,L_d].
  double mass_in_box(const std::vector<double>& half_widths) const {
    double acc = 0.0;
    for (const auto& [site, mass] : atoms_) {
      bool inside = true;
      for (int i = 0; i < d_; ++i)
        if (std::fabs(static_cast<double>(site[i]) / t_) > half_widths[i]) {
          inside = false;
          break;
        }
      if (inside) acc += mass;
    }
    return acc;
  }

 private:
  long t_;
  int d_;
  std::vector<std::pair<Offset, double>> atoms_;
};

struct ConcentrationSeries {
  std::vector<std::pair<long, double>> masses;  // (t, mass inside box)
  std::vector<std::string> warnings;
};

/// Mass of p_t inside a fixed centered box along increasing times.  The
/// asymptotic-concentration statement applies when every half-width exceeds
/// the matching commutator norm; a warning is attached otherwise.
inline ConcentrationSeries concentration_series(const LaurentMatrixSymbol& symbol,
                                                const LatticeState& initial,
                                                const std::vector<double>& half_widths,
                                                const std::vector<long>& t_list) {
  if (t_list.empty())
    throw std::invalid_argument("concentration_series: empty t_list");
  if (static_cast<int>(half_widths.size()) != symbol.dimension())
    throw std::invalid_argument("concentration_series: box dimension mismatch");
  ConcentrationSeries series;
  for (int axis = 1; axis <= symbol.dimension(); ++axis) {
    double bound = commutator_norm(symbol, axis);
    if (half_widths[axis - 1] <= bound)
      series.warnings.push_back("half-width " + std::to_string(half_widths[axis - 1]) +
                                " on axis " + std::to_string(axis) +
                                " does not exceed the commutator norm " +
                                std::to_string(bound) +
                                "; concentration is not guaranteed");
  }
  std::vector<long> times = t_list;
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] <= times[i - 1])
      throw std::invalid_argument("concentration_series: t_list must be increasing");
  LatticeState state = initial;
  long current = 0;
  for (long t : times) {
    if (t < 1) throw std::invalid_argument("concentration_series: t must be >= 1");
    state = evolve(symbol, std::move(state), t - current);
    current = t;
    series.masses.emplace_back(t, ScaledDistribution(state, t).mass_in_box(half_widths));
  }
  return series;
}

}  // namespace qwalk
