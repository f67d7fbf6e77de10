#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "qwalk/grid.hpp"
#include "qwalk/parallel.hpp"
#include "qwalk/symbol.hpp"

namespace qwalk {

constexpr double kGapTol = 1e-8;

/// Per-point unitary eigendecomposition of the symbol over a torus grid.
/// Bands are ordered by eigenvalue argument in [0,2pi); there is no global
/// band labeling (the exotic example rules one out), only a deterministic
/// per-point ordering.
struct SpectralGrid {
  TorusGrid grid;
  int coin_size = 0;
  std::vector<CVector> eigenvalues;   // per point, length n
  std::vector<Matrix> eigenvectors;   // per point, orthonormal columns
  std::vector<double> gap;            // minimal pairwise eigenvalue distance
  std::vector<char> flagged;          // gap below tolerance, or solver failure
  double gap_tolerance = kGapTol;

  std::size_t flagged_count() const {
    std::size_t c = 0;
    for (char f : flagged) c += (f != 0);
    return c;
  }
  double flagged_fraction() const {
    return flagged.empty() ? 0.0 : static_cast<double>(flagged_count()) / flagged.size();
  }
};

namespace detail {

/// Schur of a normal matrix: Q is unitary, T diagonal to rounding, so the
/// columns of Q are orthonormal eigenvectors even across near-degeneracies.
inline bool unitary_eigensystem(const Matrix& u, CVector& values, Matrix& vectors) {
  Eigen::ComplexSchur<Matrix> schur(u, /*computeU=*/true);
  if (schur.info() != Eigen::Success) return false;
  const int n = static_cast<int>(u.rows());
  values = schur.matrixT().diagonal();
  vectors = schur.matrixU();

  // Order bands by eigenvalue argument in [0, 2pi).
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  auto key = [&](int i) {
    double a = std::arg(values(i));
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    return a;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return key(a) < key(b); });
  CVector sorted_values(n);
  Matrix sorted_vectors(n, n);
  for (int i = 0; i < n; ++i) {
    sorted_values(i) = values(order[i]);
    sorted_vectors.col(i) = vectors.col(order[i]);
  }
  values.swap(sorted_values);
  vectors = sorted_vectors;

  // Phase fixing: largest-modulus component real positive, for bit-stable grids.
  for (int j = 0; j < n; ++j) {
    int argmax = 0;
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      double m = std::abs(vectors(i, j));
      if (m > best) {
        best = m;
        argmax = i;
      }
    }
    Complex pivot = vectors(argmax, j);
    if (std::abs(pivot) > 0.0) vectors.col(j) *= std::conj(pivot) / std::abs(pivot);
  }
  return true;
}

inline double min_eigenvalue_gap(const CVector& values) {
  const int n = static_cast<int>(values.size());
  if (n < 2) return 4.0;  // diameter of the unit circle's ambient disk, plus slack
  double gap = 4.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      gap = std::min(gap, std::abs(values(i) - values(j)));
  return gap;
}

}  // namespace detail

inline SpectralGrid eigendecompose(const LaurentMatrixSymbol& symbol,
                                   const TorusGrid& grid, double gap_tol = kGapTol) {
  if (grid.dimension() != symbol.dimension())
    throw std::invalid_argument("eigendecompose: grid dimension mismatch");
  const int n = symbol.coin_size();
  SpectralGrid out{grid, n, {}, {}, {}, {}, gap_tol};
  const std::size_t count = grid.size();
  out.eigenvalues.assign(count, CVector());
  out.eigenvectors.assign(count, Matrix());
  out.gap.assign(count, 0.0);
  out.flagged.assign(count, 0);
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      Matrix u = symbol.evaluate(grid.point(idx));
      CVector values;
      Matrix vectors;
      if (!detail::unitary_eigensystem(u, values, vectors)) {
        out.eigenvalues[idx] = CVector::Zero(n);
        out.eigenvectors[idx] = Matrix::Identity(n, n);
        out.gap[idx] = 0.0;
        out.flagged[idx] = 1;  // solver failure is never fatal
        continue;
      }
      out.eigenvalues[idx] = values;
      out.eigenvectors[idx] = vectors;
      out.gap[idx] = detail::min_eigenvalue_gap(values);
      out.flagged[idx] = out.gap[idx] < gap_tol ? 1 : 0;
    }
  });
  return out;
}

/// Group velocities h_{j,i}(k) = Re[-i conj(lambda_j) <u_j, (d_i U)^(k) u_j>],
/// the eigenvalue log-derivative realized through first-order perturbation at
/// simple eigenvalues.  Flagged points carry no velocities.
struct VelocityField {
  TorusGrid grid;
  int coin_size = 0;
  int dimension = 0;
  std::vector<Eigen::MatrixXd> velocities;  // per point, n x d
  double max_imag_discarded = 0.0;          // |lambda^-1 dlambda| is in iR; residual here
};

inline VelocityField group_velocity_field(const SpectralGrid& spectral,
                                          const LaurentMatrixSymbol& symbol) {
  const int n = spectral.coin_size;
  const int d = symbol.dimension();
  VelocityField field{spectral.grid, n, d, {}, 0.0};
  const std::size_t count = spectral.grid.size();
  field.velocities.assign(count, Eigen::MatrixXd::Zero(n, d));
  std::vector<LaurentMatrixSymbol> derivs;
  derivs.reserve(d);
  for (int axis = 1; axis <= d; ++axis) derivs.push_back(symbol.derive(axis));

  std::vector<double> imag_max(count, 0.0);
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      if (spectral.flagged[idx]) continue;
      std::vector<double> k = spectral.grid.point(idx);
      const Matrix& vectors = spectral.eigenvectors[idx];
      const CVector& values = spectral.eigenvalues[idx];
      for (int axis = 0; axis < d; ++axis) {
        Matrix du = derivs[axis].evaluate(k);
        for (int j = 0; j < n; ++j) {
          Complex raw = Complex(0.0, -1.0) * std::conj(values(j)) *
                        Complex(vectors.col(j).adjoint() * du * vectors.col(j));
          field.velocities[idx](j, axis) = raw.real();
          imag_max[idx] = std::max(imag_max[idx], std::fabs(raw.imag()));
        }
      }
    }
  });
  for (double v : imag_max) field.max_imag_discarded = std::max(field.max_imag_discarded, v);
  return field;
}

/// Assembles the group-velocity operator label-free from spectral projections:
/// H_axis(k) = sum_j h_{j,axis}(k) u_j u_j^*.  Flagged points yield a zero
/// matrix and are meant to be excluded by the caller.
struct OperatorField {
  TorusGrid grid;
  int axis = 0;
  std::vector<Matrix> value;       // per point, n x n
  std::vector<char> excluded;      // flagged points
};

inline OperatorField h_operator_field(const SpectralGrid& spectral,
                                      const VelocityField& velocity, int axis) {
  if (axis < 1 || axis > velocity.dimension)
    throw std::invalid_argument("h_operator_field: axis out of range");
  const int n = spectral.coin_size;
  OperatorField field{spectral.grid, axis, {}, {}};
  const std::size_t count = spectral.grid.size();
  field.value.assign(count, Matrix::Zero(n, n));
  field.excluded.assign(spectral.flagged.begin(), spectral.flagged.end());
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      if (spectral.flagged[idx]) continue;
      const Matrix& vectors = spectral.eigenvectors[idx];
      Matrix h = Matrix::Zero(n, n);
      for (int j = 0; j < n; ++j)
        h += velocity.velocities[idx](j, axis - 1) *
             (vectors.col(j) * vectors.col(j).adjoint());
      field.value[idx] = h;
    }
  });
  return field;
}

/// Closed-form group-velocity operator of the exotic 2-d walk, including the
/// hand-computed value at the two conical points (0,0) and (pi,pi).
inline Matrix closed_form_exotic_H(int axis, const std::vector<double>& k) {
  if (axis != 1 && axis != 2)
    throw std::invalid_argument("closed_form_exotic_H: axis must be 1 or 2");
  if (k.size() != 2)
    throw std::invalid_argument("closed_form_exotic_H: k must be 2-dimensional");
  const double k1 = k[0], k2 = k[1];
  Matrix singular(2, 2);
  singular << 0.5, 0.5, 0.5, -0.5;
  constexpr double tol = 1e-12;
  if (torus_distance(k, {0.0, 0.0}) < tol ||
      torus_distance(k, {std::numbers::pi, std::numbers::pi}) < tol)
    return singular;
  const double s1 = std::sin(k1), s2 = std::sin(k2);
  const double c = std::cos(k1) + std::cos(k2);
  const double prefactor = (axis == 1 ? s1 : s2) / (4.0 - c * c);
  Matrix m(2, 2);
  const Complex i(0.0, 1.0);
  m << Complex(s1 + s2, 0.0), i * (std::exp(-i * k1) - std::exp(-i * k2)),
      i * (std::exp(i * k2) - std::exp(i * k1)), Complex(-(s1 + s2), 0.0);
  return prefactor * m;
}

/// Finite-time averaged logarithmic derivative
///   C_t(k) = (1/(i t)) U^(k)^{-t} (d_axis U^t)^(k)
/// evaluated through the product rule as (1/(i t)) sum_{j=1..t} U^-j D U^{j-1}.
/// The sum is O(t) per point; grid points are independent.
struct CocycleField {
  TorusGrid grid;
  int axis = 0;
  long t = 0;
  std::vector<Matrix> value;  // per point, n x n, self-adjoint to rounding
};

namespace detail {

// O(t) accumulation, fixed-size fast path for 2x2 coins.
template <typename Mat>
Mat cocycle_sum(const Mat& u, const Mat& du, long t) {
  Mat ui = u.adjoint();
  Mat x = ui * du;
  Mat sum = x;
  for (long j = 1; j < t; ++j) {
    x = ui * x * u;
    sum += x;
  }
  return sum / Complex(0.0, static_cast<double>(t));
}

}  // namespace detail

inline CocycleField cocycle_average(const LaurentMatrixSymbol& symbol, int axis, long t,
                                    const TorusGrid& grid) {
  if (t < 1) throw std::invalid_argument("cocycle_average: t must be >= 1");
  symbol.check_axis(axis);
  LaurentMatrixSymbol deriv = symbol.derive(axis);
  const int n = symbol.coin_size();
  CocycleField field{grid, axis, t, {}};
  const std::size_t count = grid.size();
  field.value.assign(count, Matrix());
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      std::vector<double> k = grid.point(idx);
      Matrix u = symbol.evaluate(k);
      Matrix du = deriv.evaluate(k);
      if (n == 2) {
        Eigen::Matrix2cd u2 = u, du2 = du;
        field.value[idx] = detail::cocycle_sum(u2, du2, t);
      } else {
        field.value[idx] = detail::cocycle_sum(u, du, t);
      }
    }
  });
  return field;
}

/// Single-point variant of cocycle_average.
inline Matrix cocycle_average_at(const LaurentMatrixSymbol& symbol, int axis, long t,
                                 const std::vector<double>& k) {
  if (t < 1) throw std::invalid_argument("cocycle_average: t must be >= 1");
  symbol.check_axis(axis);
  Matrix u = symbol.evaluate(k);
  Matrix du = symbol.derive(axis).evaluate(k);
  return detail::cocycle_sum(u, du, t);
}

struct ConvergenceRecord {
  long t = 0;
  double pointwise_err = 0.0;   // sup excluding the near-singular band
  double sup_err = 0.0;         // sup over the full grid (norm witness)
  double excluded_fraction = 0.0;
};

/// Tracks sup_k ||C_t(k) - H(k)|| along increasing t, both over the full grid
/// and with a torus ball of the given radius removed around each singular
/// point.  The cocycle accumulators are shared across the t_list, so the cost
/// is one pass to max(t_list).
inline std::vector<ConvergenceRecord> convergence_report(
    const LaurentMatrixSymbol& symbol, int axis, const std::vector<long>& t_list,
    const TorusGrid& grid, const OperatorField& reference,
    double exclusion_radius = 0.3,
    const std::vector<std::vector<double>>& singular_points = {
        {0.0, 0.0}, {std::numbers::pi, std::numbers::pi}}) {
  if (t_list.empty()) throw std::invalid_argument("convergence_report: empty t_list");
  for (std::size_t i = 1; i < t_list.size(); ++i)
    if (t_list[i] <= t_list[i - 1])
      throw std::invalid_argument("convergence_report: t_list must be increasing");
  if (reference.value.size() != grid.size())
    throw std::invalid_argument("convergence_report: reference field grid mismatch");
  symbol.check_axis(axis);

  const std::size_t count = grid.size();
  const int n = symbol.coin_size();
  LaurentMatrixSymbol deriv = symbol.derive(axis);

  std::vector<char> excluded(count, 0);
  std::size_t excluded_count = 0;
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::vector<double> k = grid.point(idx);
    for (const auto& p : singular_points)
      if (torus_distance(k, p) < exclusion_radius) {
        excluded[idx] = 1;
        break;
      }
    if (reference.excluded[idx]) excluded[idx] = 1;  // flagged: no reference value
    excluded_count += (excluded[idx] != 0);
  }
  double excluded_fraction = static_cast<double>(excluded_count) / count;

  const long t_max = t_list.back();
  std::vector<ConvergenceRecord> records(t_list.size());
  // Per-point errors per snapshot; serial deterministic reduction afterwards.
  std::vector<std::vector<double>> errs(t_list.size(), std::vector<double>(count, 0.0));

  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      std::vector<double> k = grid.point(idx);
      Eigen::Matrix2cd u2, du2, ui2, x2, s2;
      Matrix u, du, ui, x, s;
      if (n == 2) {
        u2 = symbol.evaluate(k);
        du2 = deriv.evaluate(k);
        ui2 = u2.adjoint();
        x2 = ui2 * du2;
        s2 = x2;
      } else {
        u = symbol.evaluate(k);
        du = deriv.evaluate(k);
        ui = u.adjoint();
        x = ui * du;
        s = x;
      }
      std::size_t snap = 0;
      for (long t = 1; t <= t_max; ++t) {
        if (t > 1) {
          if (n == 2) {
            x2 = ui2 * x2 * u2;
            s2 += x2;
          } else {
            x = ui * x * u;
            s += x;
          }
        }
        if (snap < t_list.size() && t == t_list[snap]) {
          Matrix c = (n == 2) ? Matrix(s2 / Complex(0.0, static_cast<double>(t)))
                              : Matrix(s / Complex(0.0, static_cast<double>(t)));
          errs[snap][idx] = spectral_norm(c - reference.value[idx]);
          ++snap;
        }
      }
    }
  });

  for (std::size_t snap = 0; snap < t_list.size(); ++snap) {
    ConvergenceRecord rec;
    rec.t = t_list[snap];
    rec.excluded_fraction = excluded_fraction;
    for (std::size_t idx = 0; idx < count; ++idx) {
      if (reference.excluded[idx]) continue;  // no reference at flagged points
      rec.sup_err = std::max(rec.sup_err, errs[snap][idx]);
      if (!excluded[idx]) rec.pointwise_err = std::max(rec.pointwise_err, errs[snap][idx]);
    }
    records[snap] = rec;
  }
  return records;
}

/// Continuous continuation of a single eigenvalue branch along a path on the
/// torus.  Matching uses a first-order prediction (linear extrapolation of the
/// accepted branch), which is what makes the continuation C^1 through a
/// transversal crossing of branches; plain nearest-to-previous would reflect
/// off the real axis at such a crossing.  A step is accepted only when the
/// runner-up candidate is at least 3x farther from the prediction than the
/// winner; otherwise the step count doubles, up to 2^20.
struct MonodromyResult {
  Complex endpoint;
  std::vector<Complex> trace;  // accepted branch values at s_j = j/steps
  long steps_used = 0;
};

inline MonodromyResult monodromy_probe(
    const LaurentMatrixSymbol& symbol,
    const std::function<std::vector<double>(double)>& path, long steps,
    Complex start_branch) {
  if (steps < 1) throw std::invalid_argument("monodromy_probe: steps must be >= 1");
  constexpr long kMaxSteps = 1L << 20;
  const int n = symbol.coin_size();

  auto eigenvalues_at = [&](double s) {
    CVector values;
    Matrix vectors;
    if (!detail::unitary_eigensystem(symbol.evaluate(path(s)), values, vectors))
      throw std::runtime_error("monodromy_probe: eigensolver failure on path");
    return values;
  };

  for (long trial = steps; trial <= kMaxSteps; trial *= 2) {
    MonodromyResult result;
    result.steps_used = trial;
    result.trace.reserve(trial + 1);

    CVector first = eigenvalues_at(0.0);
    int pick = 0;
    for (int j = 1; j < n; ++j)
      if (std::abs(first(j) - start_branch) < std::abs(first(pick) - start_branch))
        pick = j;
    Complex current = first(pick);
    result.trace.push_back(current);

    std::optional<Complex> previous;  // branch value one step back
    bool ambiguous = false;
    double ambiguous_s = 0.0;
    for (long j = 1; j <= trial; ++j) {
      double s = static_cast<double>(j) / trial;
      Complex predicted = previous ? current + (current - *previous) : current;
      CVector values = eigenvalues_at(s);
      int best = 0;
      for (int b = 1; b < n; ++b)
        if (std::abs(values(b) - predicted) < std::abs(values(best) - predicted))
          best = b;
      if (n > 1) {
        double win = std::abs(values(best) - predicted);
        double runner_up = std::numeric_limits<double>::infinity();
        double separation = std::numeric_limits<double>::infinity();
        for (int b = 0; b < n; ++b) {
          if (b == best) continue;
          runner_up = std::min(runner_up, std::abs(values(b) - predicted));
          separation = std::min(separation, std::abs(values(b) - values(best)));
        }
        // A weak margin is ambiguous only when the candidates actually
        // differ: on a path hitting a collision point head-on the candidates
        // coincide and either choice moves the branch by less than the local
        // uncertainty, so refinement can never (and need never) separate them.
        if (runner_up < 3.0 * win && separation > win + 1e-12) {
          ambiguous = true;
          ambiguous_s = s;
          break;
        }
      }
      previous = current;
      current = values(best);
      result.trace.push_back(current);
    }
    if (!ambiguous) {
      result.endpoint = current;
      return result;
    }
    if (trial * 2 > kMaxSteps) {
      std::ostringstream msg;
      msg << "monodromy_probe: ambiguous eigenvalue matching near s = " << ambiguous_s
          << " even at " << trial << " steps";
      throw std::runtime_error(msg.str());
    }
  }
  throw std::logic_error("monodromy_probe: unreachable");
}

/// The two probe paths of the exotic example: a straight segment through the
/// singularity and a half-circle around it.  Both run from near (-eps, 0)
/// to near (eps, 0) up to the circle's rotation, and expose opposite branch
/// endpoints.
inline std::function<std::vector<double>(double)> exotic_path_segment(double eps) {
  return [eps](double s) { return std::vector<double>{2.0 * s * eps - eps, 0.0}; };
}

inline std::function<std::vector<double>(double)> exotic_path_halfcircle(double eps) {
  return [eps](double s) {
    return std::vector<double>{-eps * std::sin(std::numbers::pi * s),
                               -eps * std::cos(std::numbers::pi * s)};
  };
}

}  // namespace qwalk
