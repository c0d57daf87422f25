#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "svpi/errors.hpp"
#include "svpi/grid.hpp"
#include "svpi/numerics.hpp"

using svpi::Field;
using svpi::Grid;

namespace {

double max_err_d1(int n) {
  const Grid g = Grid::uniform(2.0, n);
  const Field f = (1.3 * g.x).sin();
  const Field exact = 1.3 * (1.3 * g.x).cos();
  return (svpi::d_dx(f, g.dx) - exact).abs().maxCoeff();
}

double max_err_d2(int n) {
  const Grid g = Grid::uniform(2.0, n);
  const Field f = (1.3 * g.x).sin();
  const Field exact = -1.69 * (1.3 * g.x).sin();
  return (svpi::d2_dx2(f, g.dx) - exact).abs().maxCoeff();
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("first and second derivatives converge at fourth order including the ends") {
  CHECK(std::log2(max_err_d1(41) / max_err_d1(81)) > 3.7);
  CHECK(std::log2(max_err_d2(41) / max_err_d2(81)) > 3.5);
}

TEST_CASE("derivative stencils are exact on quartics") {
  const Grid g = Grid::uniform(1.0, 11);
  const Field f = g.x.pow(4) - 2 * g.x.cube() + g.x;
  const Field d1 = 4 * g.x.cube() - 6 * g.x.square() + 1;
  const Field d2 = 12 * g.x.square() - 12 * g.x;
  CHECK((svpi::d_dx(f, g.dx) - d1).abs().maxCoeff() < 1e-11);
  CHECK((svpi::d2_dx2(f, g.dx) - d2).abs().maxCoeff() < 1e-9);
}

TEST_CASE("interior fourth difference: 24 dx^4 on x^4, zero near the ends") {
  const Grid g = Grid::uniform(1.0, 21);
  const Field f = g.x.pow(4);
  const Field d4 = svpi::fourth_difference_interior(f);
  for (int i = 0; i < g.n; ++i) {
    if (i < 3 || i > g.n - 4) {
      CHECK(d4(i) == 0.0);
    } else {
      CHECK(d4(i) == doctest::Approx(24 * std::pow(g.dx, 4)).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(svpi::fourth_difference_interior(Field::Zero(6)), svpi::DomainError);
}

TEST_CASE("B^T B fourth difference is positive semidefinite") {
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    Field f(33);
    for (auto& v : f) v = nd(rng);
    CHECK((f * svpi::fourth_difference(f)).sum() >= -1e-12);
  }
}

TEST_CASE("quadrature is exact on cubics for odd and even node counts") {
  for (int n : {5, 6, 9, 10, 101}) {
    const Grid g = Grid::uniform(3.0, n);
    const Field f = g.x.cube() - g.x + 2;
    const double exact = 81.0 / 4 - 4.5 + 6;
    CHECK(svpi::integrate(f, g.dx) == doctest::Approx(exact).epsilon(1e-13));
  }
}

TEST_CASE("cumulative integral is exact on cubics and fourth order on smooth data") {
  const Grid g = Grid::uniform(2.0, 17);
  const Field F = svpi::cumulative_integral(Field(g.x.cube() + 1), g.dx);
  const Field exact = g.x.pow(4) / 4 + g.x;
  CHECK((F - exact).abs().maxCoeff() < 1e-13);

  auto err = [](int n) {
    const Grid gr = Grid::uniform(2.0, n);
    const Field F2 = svpi::cumulative_integral(Field(gr.x.exp()), gr.dx);
    return (F2 - (gr.x.exp() - 1)).abs().maxCoeff();
  };
  CHECK(std::log2(err(33) / err(65)) > 3.8);
}

TEST_CASE("cubic midpoint interpolation is exact on cubics") {
  const Grid g = Grid::uniform(1.0, 9);
  const Field f = 2 * g.x.cube() - g.x.square() + 0.5;
  for (int i = 0; i <= g.n - 2; ++i) {
    const double xm = g.x(i) + g.dx / 2;
    CHECK(svpi::midpoint_cubic(f, i) ==
          doctest::Approx(2 * xm * xm * xm - xm * xm + 0.5).epsilon(1e-14));
  }
}

TEST_CASE("not-a-knot spline reproduces a cubic and its derivatives") {
  std::vector<double> x{0.0, 0.3, 0.7, 1.2, 2.0, 2.1, 3.0};
  std::vector<double> y;
  for (double v : x) y.push_back(v * v * v - 2 * v + 1);
  const svpi::CubicSpline s(x, y);
  for (double q : {0.1, 0.5, 1.9, 2.05, 2.7}) {
    CHECK(s(q) == doctest::Approx(q * q * q - 2 * q + 1).epsilon(1e-12));
    CHECK(s.eval(q, 1) == doctest::Approx(3 * q * q - 2).epsilon(1e-11));
    CHECK(s.eval(q, 2) == doctest::Approx(6 * q).epsilon(1e-10));
    CHECK(s.eval(q, 3) == doctest::Approx(6.0).epsilon(1e-9));
  }
}

TEST_CASE("grid construction") {
  const Grid g = Grid::uniform(10.0, 401);
  CHECK(g.dx == doctest::Approx(0.025));
  CHECK(g.x(g.n - 1) == 10.0);
  CHECK_THROWS_AS(Grid::uniform(-1.0, 11), svpi::DomainError);
  CHECK_THROWS_AS(Grid::uniform(1.0, 2), svpi::DomainError);
}

}  // TEST_SUITE
