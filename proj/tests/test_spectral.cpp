#include <catch2/catch_amalgamated.hpp>
#include <numbers>

#include "qwalk/spectral.hpp"

using namespace qwalk;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Exotic eigenvalues away from the singular points.
Complex exotic_lambda(double k1, double k2, int sign) {
  double c = (std::cos(k1) + std::cos(k2)) / 2.0;
  return {c, sign * std::sqrt(1.0 - c * c)};
}

}  // namespace

TEST_CASE("eigendecompose on shift1d") {
  auto walk = build_named_walk("shift1d");
  TorusGrid grid(1, 32);
  auto spectral = eigendecompose(walk, grid);
  CHECK(spectral.flagged_count() == 0);
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    double k = grid.point(idx)[0];
    CHECK(std::abs(spectral.eigenvalues[idx](0) - std::polar(1.0, k)) < 1e-12);
    CHECK(std::abs(std::abs(spectral.eigenvectors[idx](0, 0)) - 1.0) < 1e-12);
  }
}

TEST_CASE("eigendecompose on exotic2d") {
  auto walk = build_named_walk("exotic2d");

  SECTION("at (pi/2,pi/2) the eigenvalues are i and -i") {
    CVector values;
    Matrix vectors;
    REQUIRE(detail::unitary_eigensystem(walk.evaluate({pi / 2, pi / 2}), values, vectors));
    CHECK(std::abs(values(0) - Complex(0, 1)) < 1e-12);
    CHECK(std::abs(values(1) - Complex(0, -1)) < 1e-12);
    CHECK(max_abs(vectors.cwiseAbs() - Matrix::Identity(2, 2)) < 1e-12);
  }

  SECTION("generic grid matches the characteristic-polynomial roots") {
    TorusGrid grid(2, 16);
    auto spectral = eigendecompose(walk, grid);
    CHECK(spectral.flagged_count() == 0);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
      auto k = grid.point(idx);
      Complex lp = exotic_lambda(k[0], k[1], +1);
      Complex lm = exotic_lambda(k[0], k[1], -1);
      double best = 1e9;
      // ordering by argument: match each computed value against {lp, lm}
      for (int j = 0; j < 2; ++j)
        best = std::min({best, std::abs(spectral.eigenvalues[idx](j) - lp),
                         std::abs(spectral.eigenvalues[idx](j) - lm)});
      CHECK(best < 1e-12);
      // unit modulus, residual, orthonormality
      Matrix u = walk.evaluate(k);
      for (int j = 0; j < 2; ++j) {
        CHECK(std::abs(std::abs(spectral.eigenvalues[idx](j)) - 1.0) < 1e-10);
        CHECK((u * spectral.eigenvectors[idx].col(j) -
               spectral.eigenvalues[idx](j) * spectral.eigenvectors[idx].col(j))
                  .norm() < 1e-9);
      }
      CHECK(max_abs(spectral.eigenvectors[idx].adjoint() * spectral.eigenvectors[idx] -
                    Matrix::Identity(2, 2)) < 1e-10);
    }
  }

  SECTION("the exact singular point is flagged") {
    TorusGrid grid(2, 2, 0.0);  // contains (0,0) and (pi,pi)
    auto spectral = eigendecompose(walk, grid);
    CHECK(spectral.flagged_count() == 2);
  }
}

TEST_CASE("group velocities") {
  SECTION("shift1d velocity is identically 1") {
    auto walk = build_named_walk("shift1d");
    TorusGrid grid(1, 32);
    auto field = group_velocity_field(eigendecompose(walk, grid), walk);
    for (std::size_t idx = 0; idx < grid.size(); ++idx)
      CHECK(field.velocities[idx](0, 0) == Approx(1.0).margin(1e-12));
    CHECK(field.max_imag_discarded < 1e-9);
  }
  SECTION("exotic2d against the band dispersion formula") {
    auto walk = build_named_walk("exotic2d");
    TorusGrid grid(2, 24);
    auto spectral = eigendecompose(walk, grid);
    auto field = group_velocity_field(spectral, walk);
    CHECK(field.max_imag_discarded < 1e-9);
    double bound = 1.0 / std::numbers::sqrt2;
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
      auto k = grid.point(idx);
      double c = (std::cos(k[0]) + std::cos(k[1])) / 2.0;
      double denom = 2.0 * std::sqrt(1.0 - c * c);
      for (int j = 0; j < 2; ++j) {
        double sign = spectral.eigenvalues[idx](j).imag() > 0 ? 1.0 : -1.0;
        CHECK(field.velocities[idx](j, 0) ==
              Approx(sign * std::sin(k[0]) / denom).margin(1e-10));
        CHECK(std::fabs(field.velocities[idx](j, 0)) <= bound + 1e-8);
      }
    }
  }
  SECTION("exotic2d at (pi/2, 0): the two bands carry +-1/sqrt(3)") {
    auto walk = build_named_walk("exotic2d");
    CVector values;
    Matrix vectors;
    REQUIRE(detail::unitary_eigensystem(walk.evaluate({pi / 2, 0.0}), values, vectors));
    Matrix du = walk.derive(1).evaluate({pi / 2, 0.0});
    std::vector<double> h;
    for (int j = 0; j < 2; ++j)
      h.push_back((Complex(0, -1) * std::conj(values(j)) *
                   Complex(vectors.col(j).adjoint() * du * vectors.col(j)))
                      .real());
    std::sort(h.begin(), h.end());
    CHECK(h[0] == Approx(-1.0 / std::sqrt(3.0)).margin(1e-12));
    CHECK(h[1] == Approx(1.0 / std::sqrt(3.0)).margin(1e-12));
  }
}

TEST_CASE("closed-form exotic H") {
  SECTION("singular points") {
    Matrix expected(2, 2);
    expected << 0.5, 0.5, 0.5, -0.5;
    CHECK(max_abs(closed_form_exotic_H(1, {0.0, 0.0}) - expected) == 0.0);
    CHECK(max_abs(closed_form_exotic_H(2, {pi, pi}) - expected) == 0.0);
  }
  SECTION("axis 1 at (pi/2, 0)") {
    Matrix expected(2, 2);
    expected << Complex(1, 0), Complex(1, -1), Complex(1, 1), Complex(-1, 0);
    expected /= 3.0;
    CHECK(max_abs(closed_form_exotic_H(1, {pi / 2, 0.0}) - expected) < 1e-15);
  }
  SECTION("axis 2 at (pi/2, 0) vanishes") {
    CHECK(max_abs(closed_form_exotic_H(2, {pi / 2, 0.0})) < 1e-15);
  }
}

TEST_CASE("h_operator_field matches the closed form and is self-adjoint") {
  auto walk = build_named_walk("exotic2d");
  TorusGrid grid(2, 24);
  auto spectral = eigendecompose(walk, grid);
  auto velocity = group_velocity_field(spectral, walk);
  for (int axis : {1, 2}) {
    auto field = h_operator_field(spectral, velocity, axis);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
      CHECK(max_abs(field.value[idx] - field.value[idx].adjoint()) < 1e-10);
      CHECK(max_abs(field.value[idx] - closed_form_exotic_H(axis, grid.point(idx))) <
            1e-10);
    }
  }
}

TEST_CASE("shift1d operator field is the constant 1") {
  auto walk = build_named_walk("shift1d");
  TorusGrid grid(1, 16);
  auto spectral = eigendecompose(walk, grid);
  auto field = h_operator_field(spectral, group_velocity_field(spectral, walk), 1);
  for (std::size_t idx = 0; idx < grid.size(); ++idx)
    CHECK(std::abs(field.value[idx](0, 0) - Complex(1.0, 0.0)) < 1e-12);
}

TEST_CASE("cocycle average") {
  auto walk = build_named_walk("exotic2d");

  SECTION("shift1d gives the scalar 1 for every t") {
    auto shift = build_named_walk("shift1d");
    for (long t : {1L, 5L, 64L})
      CHECK(std::abs(cocycle_average_at(shift, 1, t, {0.9})(0, 0) - Complex(1.0, 0.0)) <
            1e-12);
  }

  SECTION("exact value at the singular point, any t") {
    Matrix expected(2, 2);
    expected << 0.5, 0.5, 0.5, -0.5;
    CHECK(max_abs(cocycle_average_at(walk, 1, 1, {0.0, 0.0}) - expected) < 1e-13);
    CHECK(max_abs(cocycle_average_at(walk, 1, 97, {0.0, 0.0}) - expected) < 1e-13);
  }

  SECTION("independent oracle: exact symbol power, then exact derivative") {
    const long t = 6;
    std::vector<double> k{0.73, -1.21};
    LaurentMatrixSymbol power = walk;
    for (long s = 1; s < t; ++s) power = power * walk;
    Matrix oracle = power.pow_at(k, 0);  // identity, to fix the type
    oracle = walk.pow_at(k, t).adjoint() * power.derive(1).evaluate(k) /
             Complex(0.0, static_cast<double>(t));
    CHECK(max_abs(cocycle_average_at(walk, 1, t, k) - oracle) < 1e-12);
  }

  SECTION("self-adjoint and norm-bounded on a grid") {
    TorusGrid grid(2, 12);
    double bound = commutator_norm(walk, 1, TorusGrid(2, 64));
    auto field = cocycle_average(walk, 1, 48, grid);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
      CHECK(max_abs(field.value[idx] - field.value[idx].adjoint()) < 1e-8);
      CHECK(spectral_norm(field.value[idx]) <= bound + 1e-8);
    }
  }

  SECTION("cocycle identity and subadditivity pointwise") {
    std::vector<double> k{1.1, 0.4};
    const long s = 3, t = 5;
    Matrix u_t = walk.pow_at(k, t);
    Matrix cs = cocycle_average_at(walk, 1, s, k);
    Matrix ct = cocycle_average_at(walk, 1, t, k);
    Matrix cst = cocycle_average_at(walk, 1, s + t, k);
    Matrix rhs = u_t.adjoint() * (double(s) * cs) * u_t + double(t) * ct;
    CHECK(max_abs(double(s + t) * cst - rhs) < 1e-10);

    Matrix c1 = cocycle_average_at(walk, 1, 1, k);
    CHECK(double(t) * spectral_norm(ct) <= double(t) * spectral_norm(c1) + 1e-9);
  }
}

TEST_CASE("convergence report on shift1d is exact") {
  auto walk = build_named_walk("shift1d");
  TorusGrid grid(1, 32);
  auto spectral = eigendecompose(walk, grid);
  auto field = h_operator_field(spectral, group_velocity_field(spectral, walk), 1);
  auto records = convergence_report(walk, 1, {1, 10}, grid, field, 0.3, {});
  for (const auto& rec : records) {
    CHECK(rec.pointwise_err < 1e-12);
    CHECK(rec.sup_err < 1e-12);
  }
}

TEST_CASE("convergence report rejects bad t_list") {
  auto walk = build_named_walk("shift1d");
  TorusGrid grid(1, 8);
  auto spectral = eigendecompose(walk, grid);
  auto field = h_operator_field(spectral, group_velocity_field(spectral, walk), 1);
  CHECK_THROWS(convergence_report(walk, 1, {}, grid, field));
  CHECK_THROWS(convergence_report(walk, 1, {8, 4}, grid, field));
}

TEST_CASE("monodromy probe") {
  SECTION("shift1d branch e^{ik} from 0 to pi/2") {
    auto shift = build_named_walk("shift1d");
    auto result = monodromy_probe(
        shift, [](double s) { return std::vector<double>{s * pi / 2}; }, 64,
        Complex(1.0, 0.0));
    CHECK(std::abs(result.endpoint - Complex(0.0, 1.0)) < 1e-12);
    CHECK(result.trace.size() == 65);
  }

  SECTION("the two exotic paths end on opposite branches") {
    auto walk = build_named_walk("exotic2d");
    const double eps = 0.3;
    // branch formula on the k2 = 0 axis
    auto branch = [&](double k1) {
      double c = std::cos(k1 / 2.0);
      return Complex(c * c, std::sin(k1 / 2.0) * std::sqrt(1.0 + c * c));
    };
    Complex start = std::conj(branch(-eps));  // = branch(eps): Im > 0
    auto along_segment = monodromy_probe(walk, exotic_path_segment(eps), 257, start);
    auto along_circle = monodromy_probe(walk, exotic_path_halfcircle(eps), 257, start);
    CHECK(std::abs(along_segment.endpoint - std::conj(branch(eps))) < 1e-6);
    CHECK(std::abs(along_circle.endpoint - branch(eps)) < 1e-6);
    CHECK(std::abs(along_segment.endpoint - std::conj(along_circle.endpoint)) < 1e-9);
  }
}
