#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwalk/grid.hpp"

namespace qwalk {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Lattice offset in Z^d.  std::map's lexicographic ordering makes coefficient
/// iteration deterministic, which keeps every emitted artifact bit-stable.
using Offset = std::vector<int>;

inline double spectral_norm(const Matrix& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// A translation-invariant walk as a matrix-valued Laurent polynomial:
/// finitely many coefficients A_x (n x n), with symbol
///   U^(k) = sum_x A_x exp(i <k,x>).
/// A shift by +e_i multiplies the symbol by exp(i k_i); this convention is
/// fixed once and pinned by the exotic2d regression tests.
class LaurentMatrixSymbol {
 public:
  LaurentMatrixSymbol(int dimension, int coin_size,
                      std::map<Offset, Matrix> coefficients)
      : d_(dimension), n_(coin_size), coeffs_(std::move(coefficients)) {
    if (d_ < 1) throw std::invalid_argument("symbol: dimension must be >= 1");
    if (n_ < 1) throw std::invalid_argument("symbol: coin size must be >= 1");
    for (auto it = coeffs_.begin(); it != coeffs_.end();) {
      const auto& [x, a] = *it;
      if (static_cast<int>(x.size()) != d_)
        throw std::invalid_argument("symbol: offset dimension mismatch");
      if (a.rows() != n_ || a.cols() != n_)
        throw std::invalid_argument("symbol: coefficient matrix size mismatch");
      if (a.cwiseAbs().maxCoeff() == 0.0)
        it = coeffs_.erase(it);
      else
        ++it;
    }
    radius_ = 0;
    for (const auto& [x, a] : coeffs_)
      for (int xi : x) radius_ = std::max(radius_, std::abs(xi));
  }

  int dimension() const { return d_; }
  int coin_size() const { return n_; }
  int radius() const { return radius_; }
  const std::map<Offset, Matrix>& coefficients() const { return coeffs_; }

  Matrix evaluate(const std::vector<double>& k) const {
    if (static_cast<int>(k.size()) != d_)
      throw std::invalid_argument("evaluate: k has wrong dimension");
    Matrix acc = Matrix::Zero(n_, n_);
    for (const auto& [x, a] : coeffs_) {
      double phase = 0.0;
      for (int i = 0; i < d_; ++i) phase += k[i] * x[i];
      acc += std::polar(1.0, phase) * a;
    }
    return acc;
  }

  /// Exact partial derivative on coefficients: x -> (i * x_axis) A_x.
  /// Realizes d_i(U) = [iD_i, U] with no truncation.  axis is 1-based.
  LaurentMatrixSymbol derive(int axis) const {
    check_axis(axis);
    std::map<Offset, Matrix> out;
    for (const auto& [x, a] : coeffs_) {
      int xi = x[axis - 1];
      if (xi == 0) continue;
      out.emplace(x, Complex(0.0, static_cast<double>(xi)) * a);
    }
    return LaurentMatrixSymbol(d_, n_, std::move(out));
  }

  /// U^(k)^t through the Schur form with the eigenvalue phases scaled by t.
  /// Repeated squaring doubles the unitarity drift per squaring step; this
  /// route keeps the result unitary to rounding at any t.
  Matrix pow_at(const std::vector<double>& k, long t) const {
    if (t < 0) throw std::invalid_argument("pow_at: t must be >= 0");
    Matrix base = evaluate(k);
    if (t == 0) return Matrix::Identity(n_, n_);
    Eigen::ComplexSchur<Matrix> schur(base, /*computeU=*/true);
    if (schur.info() == Eigen::Success) {
      CVector lambda = schur.matrixT().diagonal();
      Matrix powered = Matrix::Zero(n_, n_);
      for (int j = 0; j < n_; ++j)
        powered(j, j) = std::polar(1.0, static_cast<double>(t) * std::arg(lambda(j)));
      return schur.matrixU() * powered * schur.matrixU().adjoint();
    }
    Matrix result = Matrix::Identity(n_, n_);
    while (t > 0) {
      if (t & 1) result = result * base;
      base = base * base;
      t >>= 1;
    }
    return result;
  }

  /// Symbol convolution: (X*Y)_z = sum_{x+y=z} A_x B_y, so that the product
  /// symbol evaluates to the matrix product X^(k) Y^(k).
  friend LaurentMatrixSymbol operator*(const LaurentMatrixSymbol& lhs,
                                       const LaurentMatrixSymbol& rhs) {
    if (lhs.d_ != rhs.d_ || lhs.n_ != rhs.n_)
      throw std::invalid_argument("symbol product: shape mismatch");
    std::map<Offset, Matrix> out;
    for (const auto& [x, a] : lhs.coeffs_)
      for (const auto& [y, b] : rhs.coeffs_) {
        Offset z(lhs.d_);
        for (int i = 0; i < lhs.d_; ++i) z[i] = x[i] + y[i];
        auto [it, inserted] = out.try_emplace(z, a * b);
        if (!inserted) it->second += a * b;
      }
    return LaurentMatrixSymbol(lhs.d_, lhs.n_, std::move(out));
  }

  friend LaurentMatrixSymbol operator+(const LaurentMatrixSymbol& lhs,
                                       const LaurentMatrixSymbol& rhs) {
    if (lhs.d_ != rhs.d_ || lhs.n_ != rhs.n_)
      throw std::invalid_argument("symbol sum: shape mismatch");
    std::map<Offset, Matrix> out = lhs.coeffs_;
    for (const auto& [y, b] : rhs.coeffs_) {
      auto [it, inserted] = out.try_emplace(y, b);
      if (!inserted) it->second += b;
    }
    return LaurentMatrixSymbol(lhs.d_, lhs.n_, std::move(out));
  }

  friend LaurentMatrixSymbol operator*(Complex scale, const LaurentMatrixSymbol& s) {
    std::map<Offset, Matrix> out;
    for (const auto& [x, a] : s.coeffs_) out.emplace(x, scale * a);
    return LaurentMatrixSymbol(s.d_, s.n_, std::move(out));
  }

  struct UnitarityReport {
    double max_deviation = 0.0;
    std::vector<double> worst_k;
  };

  /// Samples ||U^(k)U^(k)* - I|| on a grid.  The entries are trigonometric
  /// polynomials of degree <= 2r, so 2(2r+1) samples per axis already pin the
  /// deviation down; we use at least 32.
  UnitarityReport unitarity_report(int samples_per_axis = 0) const {
    int needed = 2 * (2 * radius_ + 1) + 1;
    int s = std::max({samples_per_axis, 32, needed});
    TorusGrid grid(d_, s, 0.0);
    UnitarityReport report;
    report.worst_k.assign(d_, 0.0);
    Matrix eye = Matrix::Identity(n_, n_);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
      std::vector<double> k = grid.point(idx);
      Matrix u = evaluate(k);
      double dev = spectral_norm(u * u.adjoint() - eye);
      if (dev > report.max_deviation) {
        report.max_deviation = dev;
        report.worst_k = k;
      }
    }
    return report;
  }

  void check_axis(int axis) const {
    if (axis < 1 || axis > d_)
      throw std::invalid_argument("axis must be in 1..d");
  }

 private:
  int d_;
  int n_;
  std::map<Offset, Matrix> coeffs_;
  int radius_;
};

constexpr double kUnitarityTol = 1e-12;

/// Builds a symbol from explicit coefficients and validates unitarity,
/// reporting the worst sampled k on failure.
inline LaurentMatrixSymbol build_custom_walk(int d, int n,
                                             std::map<Offset, Matrix> coefficients) {
  LaurentMatrixSymbol symbol(d, n, std::move(coefficients));
  auto report = symbol.unitarity_report();
  if (report.max_deviation > kUnitarityTol) {
    std::ostringstream msg;
    msg << "custom walk is not unitary: max deviation " << report.max_deviation
        << " at k = (";
    for (std::size_t i = 0; i < report.worst_k.size(); ++i)
      msg << (i ? ", " : "") << report.worst_k[i];
    msg << ")";
    throw std::invalid_argument(msg.str());
  }
  return symbol;
}

/// Builtin walks.  exotic2d is the 2-d walk with conical band degeneracies at
/// (0,0) and (pi,pi) whose velocity field has no continuous extension.
inline LaurentMatrixSymbol build_named_walk(
    const std::string& name, const std::map<std::string, double>& params = {}) {
  auto no_params = [&] {
    if (!params.empty())
      throw std::invalid_argument("walk '" + name + "' takes no parameters");
  };
  if (name == "shift1d") {
    no_params();
    std::map<Offset, Matrix> c;
    c.emplace(Offset{1}, Matrix::Identity(1, 1));
    return build_custom_walk(1, 1, std::move(c));
  }
  if (name == "hadamard1d") {
    no_params();
    const double r = 1.0 / std::numbers::sqrt2;
    Matrix up(2, 2), down(2, 2);
    up << r, r, 0, 0;
    down << 0, 0, r, -r;
    std::map<Offset, Matrix> c;
    c.emplace(Offset{1}, up);
    c.emplace(Offset{-1}, down);
    return build_custom_walk(1, 2, std::move(c));
  }
  if (name == "exotic2d") {
    no_params();
    Matrix a(2, 2), b(2, 2), c(2, 2), e(2, 2);
    a << 0.5, 0, 0.5, 0;     // offset (+1, 0)
    b << 0.5, 0, -0.5, 0;    // offset (0, +1)
    c << 0, -0.5, 0, 0.5;    // offset (-1, 0)
    e << 0, 0.5, 0, 0.5;     // offset (0, -1)
    std::map<Offset, Matrix> coeffs;
    coeffs.emplace(Offset{1, 0}, a);
    coeffs.emplace(Offset{0, 1}, b);
    coeffs.emplace(Offset{-1, 0}, c);
    coeffs.emplace(Offset{0, -1}, e);
    return build_custom_walk(2, 2, std::move(coeffs));
  }
  throw std::invalid_argument("unknown walk name '" + name +
                              "' (expected shift1d, hadamard1d, exotic2d, custom)");
}

/// Max over grid points of the spectral norm of (d_axis U)^(k).  Bounds both
/// the group velocities and the averaged cocycles.
inline double commutator_norm(const LaurentMatrixSymbol& symbol, int axis,
                              const TorusGrid& grid) {
  LaurentMatrixSymbol deriv = symbol.derive(axis);
  double best = 0.0;
  for (std::size_t idx = 0; idx < grid.size(); ++idx)
    best = std::max(best, spectral_norm(deriv.evaluate(grid.point(idx))));
  return best;
}

inline double commutator_norm(const LaurentMatrixSymbol& symbol, int axis) {
  return commutator_norm(symbol, axis, TorusGrid(symbol.dimension(), 64, 0.5));
}

}  // namespace qwalk
