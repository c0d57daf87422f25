#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "fixtures.hpp"
#include "svpi/channel.hpp"
#include "svpi/errors.hpp"
#include "svpi/inflow.hpp"

using svpi::ChannelConfig;
using svpi::Grid;
using svpi::Profile;

TEST_SUITE("channel") {

TEST_CASE("slope_at on constant, affine and tabulated slopes") {
  ChannelConfig c = fixtures::homogeneous();
  CHECK(svpi::slope_at(c, 0.5 * c.L) == 0.0);

  c.slope = svpi::AffineSlope{0.01, 0.0};
  for (double x : {0.0, 1.7, 10.0}) CHECK(svpi::slope_at(c, x) == 0.01);

  c.slope = svpi::AffineSlope{0.01, 0.002};
  CHECK(svpi::slope_at(c, 3.0) == doctest::Approx(0.016).epsilon(1e-15));

  std::vector<double> xs, cs;
  for (int i = 0; i < 65; ++i) {
    xs.push_back(c.L * i / 64.0);
    cs.push_back(0.01 * std::sin(std::numbers::pi * xs.back() / c.L));
  }
  c.slope = svpi::TabulatedSlope(xs, cs);
  CHECK(std::abs(svpi::slope_at(c, c.L / 2) - 0.01) < 1e-6);
  CHECK_THROWS_AS(svpi::slope_at(c, 10.5), svpi::DomainError);
}

TEST_CASE("tabulated slope from 33 samples interpolates off-node to 1e-5 relative") {
  ChannelConfig c = fixtures::homogeneous();
  c.slope = fixtures::sine_slope(c.L, 0.05, 0.01, 33);
  double worst = 0.0;
  for (int i = 0; i < 32; ++i) {
    const double x = c.L * (i + 0.5) / 32.0;
    const double exact = 0.05 + 0.01 * std::sin(2 * std::numbers::pi * x / c.L);
    worst = std::max(worst, std::abs(svpi::slope_at(c, x) - exact) / std::abs(exact));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("froude margin") {
  const ChannelConfig c = fixtures::homogeneous();
  CHECK(svpi::froude_margin(c, 2.0, 1.0) == doctest::Approx(18.62).epsilon(1e-14));
  CHECK(svpi::froude_margin(c, 9.0 / 9.81, 3.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(svpi::froude_margin(c, 0.05, 3.0) == doctest::Approx(0.4905 - 9.0));
  CHECK_THROWS_AS(svpi::froude_margin(c, 0.0, 1.0), svpi::DomainError);
}

TEST_CASE("validate_regime") {
  const ChannelConfig c = fixtures::homogeneous();
  const Grid g = Grid::uniform(c.L, 21);

  const auto ok = svpi::validate_regime(c, Profile::uniform(g, 2.0, 1.0));
  CHECK(ok.pass);
  CHECK(ok.min_fluvial_margin == doctest::Approx(17.62));

  CHECK_FALSE(svpi::validate_regime(c, Profile::uniform(g, 6.0, 1.0)).pass);
  CHECK_FALSE(svpi::validate_regime(c, Profile::uniform(g, 0.1, 3.0)).pass);
}

TEST_CASE("property: a passing regime report implies margin > alpha at every node") {
  const ChannelConfig c = fixtures::homogeneous();
  const Grid g = Grid::uniform(c.L, 41);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uh(0.3, 5.5), uv(-1.0, 4.0);
  int passed = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Profile p = Profile::uniform(g, 1.0, 0.0);
    for (int i = 0; i < g.n; ++i) {
      p.H(i) = uh(rng);
      p.V(i) = uv(rng) * 0.3;
    }
    const auto rep = svpi::validate_regime(c, p);
    if (!rep.pass) continue;
    ++passed;
    for (int i = 0; i < g.n; ++i) CHECK(svpi::froude_margin(c, p.H(i), p.V(i)) > c.alpha);
  }
  CHECK(passed > 0);
}

TEST_CASE("config validation rejects invalid parameters") {
  ChannelConfig c = fixtures::homogeneous();
  CHECK_NOTHROW(c.validate());
  c.L = -1.0;
  CHECK_THROWS_AS(c.validate(), svpi::DomainError);
  c = fixtures::homogeneous();
  c.k = -0.1;
  CHECK_THROWS_AS(c.validate(), svpi::DomainError);
}

TEST_CASE("characteristic speed helpers") {
  const ChannelConfig c = fixtures::homogeneous();
  const Profile p = Profile::uniform(Grid::uniform(c.L, 11), 2.0, 1.0);
  CHECK(svpi::min_lambda2(c, p) == doctest::Approx(std::sqrt(19.62) - 1.0));
  CHECK(svpi::max_wave_speed(c, p) == doctest::Approx(std::sqrt(19.62) + 1.0));
}

}  // TEST_SUITE

TEST_SUITE("inflow") {

TEST_CASE("sinusoid derivatives, bounds and period") {
  const svpi::InflowSignal q(svpi::SinusoidInflow{2.0, 0.1, 0.3});
  const double t = 1.7;
  CHECK(q(t) == doctest::Approx(2.0 + 0.1 * std::sin(0.3 * t)));
  CHECK(q.derivative(t, 1) == doctest::Approx(0.03 * std::cos(0.3 * t)));
  CHECK(q.derivative(t, 2) == doctest::Approx(-0.009 * std::sin(0.3 * t)));
  CHECK(q.derivative(t, 3) == doctest::Approx(-0.0027 * std::cos(0.3 * t)));
  CHECK(q.derivative_bound(2, 100.0) == doctest::Approx(0.009));
  CHECK(q.period() == doctest::Approx(2 * std::numbers::pi / 0.3));
  CHECK(q.min_value(100.0) == doctest::Approx(1.9));
  CHECK_FALSE(q.is_constant());
}

TEST_CASE("ramp is C^3 with the requested end values") {
  const svpi::InflowSignal q(svpi::RampInflow{1.0, 3.0, 2.0, 4.0});
  CHECK(q(0.0) == 1.0);
  CHECK(q(10.0) == 3.0);
  CHECK(q(4.0) == doctest::Approx(2.0));
  for (int k = 1; k <= 3; ++k) {
    CHECK(std::abs(q.derivative(2.0, k)) < 1e-12);
    CHECK(std::abs(q.derivative(6.0, k)) < 1e-12);
  }
  const double h = 1e-5;
  CHECK(q.derivative(3.0, 1) ==
        doctest::Approx((q(3.0 + h) - q(3.0 - h)) / (2 * h)).epsilon(1e-7));
}

TEST_CASE("constant inflow has zero derivatives") {
  const svpi::InflowSignal q(svpi::ConstantInflow{2.0});
  CHECK(q.is_constant());
  CHECK(q.derivative(5.0, 1) == 0.0);
  CHECK(q.derivative_bound(3, 10.0) == 0.0);
  CHECK(q.period() == 0.0);
}

}  // TEST_SUITE
