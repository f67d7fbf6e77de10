#include <catch2/catch_amalgamated.hpp>
#include <numbers>

#include "qwalk/limit.hpp"

using namespace qwalk;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

CVector coin1(Complex z) {
  CVector v(1);
  v << z;
  return v;
}

CVector coin2(Complex a, Complex b) {
  CVector v(2);
  v << a, b;
  return v;
}

VelocityMeasure exotic_limit_measure(const LatticeState& state, int N) {
  auto walk = build_named_walk("exotic2d");
  TorusGrid grid(2, N);
  auto spectral = eigendecompose(walk, grid);
  auto velocity = group_velocity_field(spectral, walk);
  return limit_measure(spectral, velocity, fourier_state(state, grid));
}

}  // namespace

TEST_CASE("fourier state") {
  SECTION("delta at the origin is constant") {
    auto state = LatticeState::delta(2, {0, 0}, coin2(1.0, 0.0));
    auto fs = fourier_state(state, TorusGrid(2, 8));
    for (const auto& v : fs.values) CHECK((v - coin2(1.0, 0.0)).norm() < 1e-14);
  }
  SECTION("delta at site 1 is e^{ik}") {
    auto state = LatticeState::delta(1, {1}, coin1(1.0));
    TorusGrid grid(1, 16);
    auto fs = fourier_state(state, grid);
    for (std::size_t idx = 0; idx < grid.size(); ++idx)
      CHECK(std::abs(fs.values[idx](0) - std::polar(1.0, grid.point(idx)[0])) < 1e-14);
  }
  SECTION("two-site state vanishes at k=pi/2") {
    std::map<Offset, CVector> amps;
    amps.emplace(Offset{0}, coin1(1.0 / std::numbers::sqrt2));
    amps.emplace(Offset{2}, coin1(1.0 / std::numbers::sqrt2));
    auto state = LatticeState::from_map(1, 1, amps);
    TorusGrid grid(1, 4, 0.0);  // contains k = pi/2 at index 1
    auto fs = fourier_state(state, grid);
    CHECK(std::abs(fs.values[1](0)) < 1e-14);
  }
  SECTION("Parseval on an evolved state") {
    auto walk = build_named_walk("hadamard1d");
    auto state = evolve(walk, LatticeState::delta(1, {0}, coin2(1.0, Complex(0, 1))), 30);
    auto fs = fourier_state(state, TorusGrid(1, 128));
    CHECK(fs.squared_norm() == Approx(state.squared_norm()).margin(1e-10));
  }
  SECTION("support too large for the grid names the required N") {
    auto walk = build_named_walk("hadamard1d");
    auto state = evolve(walk, LatticeState::delta(1, {0}, coin2(1.0, 0.0)), 10);
    CHECK_THROWS_WITH(fourier_state(state, TorusGrid(1, 16)),
                      Catch::Matchers::ContainsSubstring("need N >= 21"));
  }
}

TEST_CASE("limit measure") {
  SECTION("shift1d concentrates at v=1") {
    auto walk = build_named_walk("shift1d");
    TorusGrid grid(1, 64);
    auto spectral = eigendecompose(walk, grid);
    auto velocity = group_velocity_field(spectral, walk);
    auto measure =
        limit_measure(spectral, velocity, fourier_state(LatticeState::delta(1, {0}, coin1(1.0)), grid));
    CHECK(measure.total_weight() == Approx(1.0).margin(1e-9));
    for (const auto& [v, w] : measure.atoms)
      if (w > 0.0) CHECK(v[0] == Approx(1.0).margin(1e-12));
  }
  SECTION("identity walk concentrates at v=0") {
    std::map<Offset, Matrix> c;
    c.emplace(Offset{0}, Matrix::Identity(1, 1));
    auto id = build_custom_walk(1, 1, std::move(c));
    TorusGrid grid(1, 32);
    auto spectral = eigendecompose(id, grid);
    auto velocity = group_velocity_field(spectral, id);
    auto measure =
        limit_measure(spectral, velocity, fourier_state(LatticeState::delta(1, {0}, coin1(1.0)), grid));
    for (const auto& [v, w] : measure.atoms)
      if (w > 0.0) CHECK(std::fabs(v[0]) < 1e-12);
  }
  SECTION("exotic2d: weight 1, support inside the commutator box") {
    auto state = LatticeState::delta(2, {0, 0}, coin2(1.0, 0.0));
    auto measure = exotic_limit_measure(state, 64);
    CHECK(measure.total_weight() + measure.unresolved_mass == Approx(1.0).margin(1e-9));
    CHECK(measure.total_weight() >= 0.999);
    double bound = 1.0 / std::numbers::sqrt2;
    CHECK(measure.max_abs_velocity(1) <= bound + 1e-6);
    CHECK(measure.max_abs_velocity(2) <= bound + 1e-6);
  }
}

TEST_CASE("characteristic function basics") {
  VelocityMeasure measure;
  measure.dimension = 1;
  measure.atoms.push_back({{1.0}, 1.0});
  CHECK(std::abs(measure.char_function({pi}) - Complex(-1.0, 0.0)) < 1e-14);
  CHECK(std::abs(measure.char_function({0.0}) - Complex(1.0, 0.0)) < 1e-14);
}

TEST_CASE("first-moment consistency: two routes to <H_i xi, xi>") {
  auto walk = build_named_walk("exotic2d");
  TorusGrid grid(2, 48);
  auto spectral = eigendecompose(walk, grid);
  auto velocity = group_velocity_field(spectral, walk);
  auto state = LatticeState::delta(2, {0, 0}, coin2(0.6, Complex(0.0, 0.8)));
  auto fs = fourier_state(state, grid);
  auto measure = limit_measure(spectral, velocity, fs);
  for (int axis : {1, 2}) {
    auto field = h_operator_field(spectral, velocity, axis);
    double quadrature = 0.0;
    for (std::size_t idx = 0; idx < grid.size(); ++idx)
      quadrature += Complex(fs.values[idx].adjoint() * field.value[idx] * fs.values[idx])
                        .real() *
                    grid.cell_weight();
    std::vector<int> e(2, 0);
    e[axis - 1] = 1;
    CHECK(measure.moment(e) == Approx(quadrature).margin(1e-8));
  }
}

TEST_CASE("char function is 2-eps robust in the initial vector") {
  auto walk = build_named_walk("exotic2d");
  TorusGrid grid(2, 32);
  auto spectral = eigendecompose(walk, grid);
  auto velocity = group_velocity_field(spectral, walk);
  auto base = LatticeState::delta(2, {0, 0}, coin2(1.0, 0.0));
  const double eps = 1e-3;
  // rotate toward an orthogonal unit vector: ||xi - xi~|| = eps exactly
  double theta = 2.0 * std::asin(eps / 2.0);
  auto perturbed =
      LatticeState::delta(2, {0, 0}, coin2(std::cos(theta), std::sin(theta)));
  auto m0 = limit_measure(spectral, velocity, fourier_state(base, grid));
  auto m1 = limit_measure(spectral, velocity, fourier_state(perturbed, grid));
  for (const auto& w : std::vector<std::vector<double>>{{1, 0}, {0, 1}, {1, 1}, {2, -1}})
    CHECK(std::abs(m0.char_function(w) - m1.char_function(w)) <= 2 * eps + 1e-9);
}

TEST_CASE("kolmogorov distance on sorted atom CDFs") {
  std::vector<std::pair<double, double>> a{{0.0, 0.5}, {1.0, 0.5}};
  std::vector<std::pair<double, double>> b{{0.0, 0.5}, {1.0, 0.5}};
  CHECK(kolmogorov_distance(a, b) == 0.0);
  std::vector<std::pair<double, double>> c{{0.5, 1.0}};
  CHECK(kolmogorov_distance(a, c) == Approx(0.5));
}

TEST_CASE("compare: shift1d empirical distribution against its limit") {
  auto walk = build_named_walk("shift1d");
  TorusGrid grid(1, 64);
  auto spectral = eigendecompose(walk, grid);
  auto velocity = group_velocity_field(spectral, walk);
  auto initial = LatticeState::delta(1, {0}, coin1(1.0));
  auto measure = limit_measure(spectral, velocity, fourier_state(initial, grid));
  for (long t : {3L, 25L}) {
    ScaledDistribution dist(evolve(walk, initial, t), t);
    auto report = compare(dist, measure, {{1.0}, {2.5}}, {{1}, {2}});
    for (const auto& probe : report.char_gaps) CHECK(probe.gap < 1e-12);
    for (const auto& probe : report.moment_gaps) CHECK(probe.gap < 1e-12);
    REQUIRE(report.kolmogorov.size() == 1);
    CHECK(report.kolmogorov[0] < 1e-12);
  }
}
