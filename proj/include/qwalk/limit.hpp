#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwalk/lattice.hpp"
#include "qwalk/parallel.hpp"
#include "qwalk/spectral.hpp"

namespace qwalk {

/// The initial vector sampled on the torus grid:
/// xi^(k) = sum_x xi(x) exp(i <k,x>).  (Same shift convention as the symbol.)
struct FourierState {
  TorusGrid grid;
  int coin_size = 0;
  std::vector<CVector> values;

  /// Parseval check: N^{-d} sum_k |xi^(k)|^2.
  double squared_norm() const {
    double acc = 0.0;
    for (const CVector& v : values) acc += v.squaredNorm();
    return acc * grid.cell_weight();
  }
};

/// Exact evaluation of the finite Fourier sum at every grid point.  The state
/// support must fit inside one period per axis; otherwise velocity weights
/// would alias and the error names the required N.
inline FourierState fourier_state(const LatticeState& state, const TorusGrid& grid) {
  if (grid.dimension() != state.dimension())
    throw std::invalid_argument("fourier_state: grid dimension mismatch");
  int required = 0;
  for (int i = 0; i < state.dimension(); ++i)
    required = std::max(required, state.box_hi()[i] - state.box_lo()[i] + 1);
  if (grid.points_per_axis() < required) {
    std::ostringstream msg;
    msg << "fourier_state: state support spans " << required
        << " sites per axis but the grid has N = " << grid.points_per_axis()
        << "; need N >= " << required;
    throw std::invalid_argument(msg.str());
  }
  FourierState out{grid, state.coin_size(), {}};
  const std::size_t count = grid.size();
  out.values.assign(count, CVector::Zero(state.coin_size()));
  std::map<Offset, CVector> amplitudes = state.to_map();
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      std::vector<double> k = grid.point(idx);
      CVector acc = CVector::Zero(state.coin_size());
      for (const auto& [site, value] : amplitudes) {
        double phase = 0.0;
        for (int i = 0; i < state.dimension(); ++i) phase += k[i] * site[i];
        acc += std::polar(1.0, phase) * value;
      }
      out.values[idx] = acc;
    }
  });
  return out;
}

/// Atomic approximation of the limit distribution p_inf = <E(.) xi, xi>:
/// one atom per (grid point, band) at the group velocity vector, weighted by
/// the band overlap N^{-d} |<u_j(k), xi^(k)>|^2.  Weight at flagged points is
/// carried explicitly as unresolved mass, never redistributed.
struct VelocityMeasure {
  int dimension = 0;
  std::vector<std::pair<std::vector<double>, double>> atoms;  // (v, weight)
  double unresolved_mass = 0.0;

  double total_weight() const {
    double acc = 0.0;
    for (const auto& [v, w] : atoms) acc += w;
    return acc;
  }

  Complex char_function(const std::vector<double>& w) const {
    if (static_cast<int>(w.size()) != dimension)
      throw std::invalid_argument("char_function: dimension mismatch");
    Complex acc(0.0, 0.0);
    for (const auto& [v, weight] : atoms) {
      double phase = 0.0;
      for (int i = 0; i < dimension; ++i) phase += v[i] * w[i];
      acc += weight * std::polar(1.0, phase);
    }
    return acc;
  }

  double moment(const std::vector<int>& multi_index) const {
    if (static_cast<int>(multi_index.size()) != dimension)
      throw std::invalid_argument("moment: dimension mismatch");
    double acc = 0.0;
    for (const auto& [v, weight] : atoms) {
      double term = weight;
      for (int i = 0; i < dimension; ++i) term *= std::pow(v[i], multi_index[i]);
      acc += term;
    }
    return acc;
  }

  double max_abs_velocity(int axis) const {
    double best = 0.0;
    for (const auto& [v, weight] : atoms)
      if (weight > 0.0) best = std::max(best, std::fabs(v[axis - 1]));
    return best;
  }
};

inline VelocityMeasure limit_measure(const SpectralGrid& spectral,
                                     const VelocityField& velocity,
                                     const FourierState& fstate) {
  const TorusGrid& grid = spectral.grid;
  auto same_grid = [&](const TorusGrid& other) {
    return other.dimension() == grid.dimension() &&
           other.points_per_axis() == grid.points_per_axis() &&
           other.offset() == grid.offset();
  };
  if (!same_grid(velocity.grid) || !same_grid(fstate.grid))
    throw std::invalid_argument("limit_measure: inputs disagree on the grid");
  const int n = spectral.coin_size;
  const int d = grid.dimension();
  const double cell = grid.cell_weight();

  VelocityMeasure measure;
  measure.dimension = d;
  measure.atoms.reserve(grid.size() * n);
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const CVector& xi_hat = fstate.values[idx];
    if (spectral.flagged[idx]) {
      measure.unresolved_mass += cell * xi_hat.squaredNorm();
      continue;
    }
    const Matrix& vectors = spectral.eigenvectors[idx];
    for (int j = 0; j < n; ++j) {
      double weight = cell * std::norm(Complex(vectors.col(j).adjoint() * xi_hat));
      std::vector<double> v(d);
      for (int i = 0; i < d; ++i) v[i] = velocity.velocities[idx](j, i);
      measure.atoms.emplace_back(std::move(v), weight);
    }
  }
  return measure;
}

/// Kolmogorov distance between the axis marginals of two atomic measures,
/// computed on the merged sorted support.  Support points closer than tie_tol
/// count as one event, so rounding in the atom positions cannot open a
/// spurious CDF gap.
inline double kolmogorov_distance(std::vector<std::pair<double, double>> a,
                                  std::vector<std::pair<double, double>> b,
                                  double tie_tol = 1e-9) {
  std::vector<std::pair<double, std::pair<double, double>>> events;
  events.reserve(a.size() + b.size());
  for (const auto& [v, m] : a) events.push_back({v, {m, 0.0}});
  for (const auto& [v, m] : b) events.push_back({v, {0.0, m}});
  std::sort(events.begin(), events.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  double ca = 0.0, cb = 0.0, best = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    ca += events[i].second.first;
    cb += events[i].second.second;
    // evaluate the CDF gap only after all atoms at equal v are absorbed
    if (i + 1 < events.size() && events[i + 1].first - events[i].first <= tie_tol)
      continue;
    best = std::max(best, std::fabs(ca - cb));
  }
  return best;
}

struct ProbeGap {
  std::string name;
  double gap = 0.0;
};

struct CompareReport {
  std::vector<ProbeGap> char_gaps;
  std::vector<ProbeGap> moment_gaps;
  std::vector<double> kolmogorov;  // one per axis marginal
};

/// Weak-convergence probes between an empirical rescaled distribution and a
/// limit measure: characteristic-function gaps, moment gaps, and the
/// Kolmogorov distance of each axis marginal.
inline CompareReport compare(const ScaledDistribution& empirical,
                             const VelocityMeasure& limit,
                             const std::vector<std::vector<double>>& w_list,
                             const std::vector<std::vector<int>>& m_list) {
  if (empirical.dimension() != limit.dimension)
    throw std::invalid_argument("compare: dimension mismatch");
  const int d = limit.dimension;
  CompareReport report;

  auto empirical_char = [&](const std::vector<double>& w) {
    Complex acc(0.0, 0.0);
    for (const auto& [site, mass] : empirical.atoms()) {
      double phase = 0.0;
      for (int i = 0; i < d; ++i)
        phase += w[i] * static_cast<double>(site[i]) / empirical.time();
      acc += mass * std::polar(1.0, phase);
    }
    return acc;
  };

  for (const auto& w : w_list) {
    std::ostringstream name;
    name << "char(";
    for (int i = 0; i < d; ++i) name << (i ? "," : "") << w[i];
    name << ")";
    report.char_gaps.push_back(
        {name.str(), std::abs(empirical_char(w) - limit.char_function(w))});
  }
  for (const auto& m : m_list) {
    std::ostringstream name;
    name << "moment(";
    for (int i = 0; i < d; ++i) name << (i ? "," : "") << m[i];
    name << ")";
    report.moment_gaps.push_back(
        {name.str(), std::fabs(empirical.moment(m) - limit.moment(m))});
  }
  for (int axis = 1; axis <= d; ++axis) {
    std::vector<std::pair<double, double>> ma, mb;
    for (const auto& [site, mass] : empirical.atoms())
      ma.push_back({static_cast<double>(site[axis - 1]) / empirical.time(), mass});
    for (const auto& [v, weight] : limit.atoms) mb.push_back({v[axis - 1], weight});
    report.kolmogorov.push_back(kolmogorov_distance(std::move(ma), std::move(mb)));
  }
  return report;
}

}  // namespace qwalk
