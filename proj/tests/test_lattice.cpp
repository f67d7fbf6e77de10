#include <catch2/catch_amalgamated.hpp>
#include <map>
#include <random>

#include "qwalk/lattice.hpp"

using namespace qwalk;
using Catch::Approx;

namespace {

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

/// Independent oracle: dense convolution on a plain nested array, no shared
/// code with LatticeState::step.
std::map<Offset, CVector> convolve_oracle(const LaurentMatrixSymbol& symbol,
                                          const std::map<Offset, CVector>& in) {
  std::map<Offset, CVector> out;
  for (const auto& [site, value] : in)
    for (const auto& [ofs, a] : symbol.coefficients()) {
      Offset target(site.size());
      for (std::size_t i = 0; i < site.size(); ++i) target[i] = site[i] + ofs[i];
      auto [it, inserted] = out.try_emplace(target, a * value);
      if (!inserted) it->second += a * value;
    }
  return out;
}

}  // namespace

TEST_CASE("step moves the delta under shift1d") {
  auto walk = build_named_walk("shift1d");
  auto state = LatticeState::delta(1, {0}, coin1(1.0));
  auto next = step(walk, state);
  CHECK(std::abs(next.amplitude({1})(0) - Complex(1.0, 0.0)) < 1e-15);
  CHECK(next.amplitude({0}).norm() == 0.0);
  CHECK(next.norm() == Approx(1.0).margin(1e-12));
}

TEST_CASE("identity walk leaves states untouched") {
  std::map<Offset, Matrix> c;
  c.emplace(Offset{0, 0}, Matrix::Identity(2, 2));
  auto id = build_custom_walk(2, 2, std::move(c));
  auto state = LatticeState::delta(2, {3, -1}, coin2({0.6, 0.0}, {0.0, 0.8}));
  auto next = step(id, state);
  CHECK((next.amplitude({3, -1}) - state.amplitude({3, -1})).norm() < 1e-15);
  CHECK(next.norm() == Approx(1.0).margin(1e-12));
}

TEST_CASE("one exotic2d step from the origin") {
  auto walk = build_named_walk("exotic2d");
  auto state = LatticeState::delta(2, {0, 0}, coin2(1.0, 0.0));
  auto next = step(walk, state);
  CHECK((next.amplitude({1, 0}) - coin2(0.5, 0.5)).norm() < 1e-15);
  CHECK((next.amplitude({0, 1}) - coin2(0.5, -0.5)).norm() < 1e-15);
  CHECK(next.amplitude({-1, 0}).norm() == 0.0);
  CHECK(next.amplitude({0, -1}).norm() == 0.0);
}

TEST_CASE("step rejects dimension mismatch") {
  auto walk = build_named_walk("exotic2d");
  auto state = LatticeState::delta(1, {0}, coin1(1.0));
  CHECK_THROWS(step(walk, state));
}

TEST_CASE("evolve against the direct convolution oracle") {
  auto walk = build_named_walk("exotic2d");
  auto state = LatticeState::delta(2, {0, 0}, coin2(1.0, 0.0));
  std::map<Offset, CVector> reference = state.to_map();
  const int t = 5;
  for (int s = 0; s < t; ++s) reference = convolve_oracle(walk, reference);
  auto evolved = evolve(walk, state, t);
  for (const auto& [site, value] : reference)
    CHECK((evolved.amplitude(site) - value).norm() < 1e-13);
  CHECK(evolved.norm() == Approx(1.0).margin(1e-12));

  // support bound: |x1| + ... <= t * radius per axis, exactly
  evolved.for_each_site([&](const Offset& site, const CVector& value) {
    if (value.norm() > 0.0) {
      CHECK(std::abs(site[0]) <= t);
      CHECK(std::abs(site[1]) <= t);
    }
  });
}

TEST_CASE("evolve t=0 returns the input state") {
  auto walk = build_named_walk("hadamard1d");
  auto state = LatticeState::delta(1, {4}, coin2(1.0, Complex(0, 1)));
  auto same = evolve(walk, state, 0);
  CHECK((same.amplitude({4}) - state.amplitude({4})).norm() == 0.0);
}

TEST_CASE("norm preservation over long evolutions") {
  auto walk = build_named_walk("hadamard1d");
  auto state = evolve(walk, LatticeState::delta(1, {0}, coin2(1.0, Complex(0, 1))), 1000);
  CHECK(state.norm() == Approx(1.0).margin(1e-10));
}

TEST_CASE("scaled distribution") {
  SECTION("delta at site 7, t=7 gives a single atom at v=1") {
    auto state = LatticeState::delta(1, {7}, coin1(1.0));
    ScaledDistribution dist(state, 7);
    REQUIRE(dist.atoms().size() == 1);
    CHECK(dist.atoms()[0].first == Offset{7});
    CHECK(dist.atoms()[0].second == Approx(1.0).margin(1e-15));
  }
  SECTION("two equal-amplitude sites at t=4") {
    std::map<Offset, CVector> amps;
    amps.emplace(Offset{0}, coin1(1.0 / std::numbers::sqrt2));
    amps.emplace(Offset{4}, coin1(1.0 / std::numbers::sqrt2));
    auto state = LatticeState::from_map(1, 1, amps);
    ScaledDistribution dist(state, 4);
    REQUIRE(dist.atoms().size() == 2);
    CHECK(dist.atoms()[0].second == Approx(0.5).margin(1e-15));
    CHECK(dist.atoms()[1].second == Approx(0.5).margin(1e-15));
    CHECK(dist.total_mass() == Approx(1.0).margin(1e-10));
  }
  SECTION("exotic2d after one step") {
    auto walk = build_named_walk("exotic2d");
    auto state = step(walk, LatticeState::delta(2, {0, 0}, coin2(1.0, 0.0)));
    ScaledDistribution dist(state, 1);
    CHECK(dist.moment({0, 0}) == Approx(1.0).margin(1e-12));
    CHECK(dist.moment({1, 0}) == Approx(0.5).margin(1e-12));
  }
  SECTION("t = 0 is rejected") {
    auto state = LatticeState::delta(1, {0}, coin1(1.0));
    CHECK_THROWS(ScaledDistribution(state, 0));
  }
}

TEST_CASE("moment basics") {
  auto state = LatticeState::delta(1, {7}, coin1(1.0));
  ScaledDistribution dist(state, 7);
  CHECK(dist.moment({0}) == Approx(1.0));
  CHECK(dist.moment({3}) == Approx(1.0));
}

TEST_CASE("moment identity against direct amplitude sums") {
  auto walk = build_named_walk("hadamard1d");
  const long t = 40;
  auto state = evolve(walk, LatticeState::delta(1, {0}, coin2(1.0, 0.0)), t);
  ScaledDistribution dist(state, t);
  double direct = 0.0;
  state.for_each_site([&](const Offset& site, const CVector& value) {
    direct += (static_cast<double>(site[0]) / t) * value.squaredNorm();
  });
  CHECK(dist.moment({1}) == Approx(direct).margin(1e-12));
}

TEST_CASE("concentration series") {
  auto walk = build_named_walk("shift1d");
  auto state = LatticeState::delta(1, {0}, coin1(1.0));
  SECTION("all mass inside a wide box") {
    auto series = concentration_series(walk, state, {1.5}, {10, 100});
    REQUIRE(series.masses.size() == 2);
    CHECK(series.masses[0].second == Approx(1.0).margin(1e-12));
    CHECK(series.masses[1].second == Approx(1.0).margin(1e-12));
    CHECK(series.warnings.empty());
  }
  SECTION("atom outside a narrow box, with warning") {
    auto series = concentration_series(walk, state, {0.5}, {10});
    CHECK(series.masses[0].second == 0.0);
    REQUIRE_FALSE(series.warnings.empty());
  }
  SECTION("empty t_list is rejected") {
    CHECK_THROWS(concentration_series(walk, state, {1.5}, {}));
  }
}

TEST_CASE("gaussian initial state") {
  auto state = LatticeState::gaussian(1, {0}, 3.0, coin2(1.0, Complex(0, 1)));
  CHECK(state.norm() == Approx(1.0).margin(1e-12));
  CHECK(state.truncated_tail_mass() <= 1e-12);
  // envelope ratio matches exp(-x^2/(4 sigma^2))
  double r = state.amplitude({6}).norm() / state.amplitude({0}).norm();
  CHECK(r == Approx(std::exp(-36.0 / 36.0)).margin(1e-12));
}
