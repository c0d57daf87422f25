#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "fixtures.hpp"
#include "svpi/analysis.hpp"
#include "svpi/errors.hpp"
#include "svpi/pde.hpp"
#include "svpi/steady.hpp"

using svpi::ChannelConfig;
using svpi::ControllerSpec;
using svpi::Discretization;
using svpi::Field;
using svpi::Grid;
using svpi::Profile;
using svpi::SimState;

namespace {

constexpr double pi = std::numbers::pi;

ControllerSpec branch1() {
  ControllerSpec c;
  c.k_p = 1.0;
  c.k_I = 0.1;
  c.H_c = 2.0;
  return c;
}

Discretization make(const ChannelConfig& cfg, int n) {
  const Grid g = Grid::uniform(cfg.L, n);
  const Profile base = svpi::solve_steady(cfg, 2.0, 2.0, g);
  return Discretization::make(cfg, g, svpi::default_sigma(cfg, base));
}

SimState perturbed_equilibrium(const Discretization& d, const ControllerSpec& ctrl, double amp) {
  SimState s = svpi::discrete_steady_state(d, ctrl, 2.0);
  s.profile.H += svpi::smooth_bump(d.grid, amp, 0.5 * d.grid.L, 0.6 * d.grid.L);
  s.Z = svpi::consistent_Z(d, ctrl, s.profile, 0.0);
  return s;
}

SimState advance(const Discretization& d, const ControllerSpec& ctrl, SimState s,
                 const svpi::InflowSignal& q, double dt, int steps) {
  for (int i = 0; i < steps; ++i) s = svpi::step(d, ctrl, s, q, dt);
  return s;
}

}  // namespace

TEST_SUITE("pde") {

TEST_CASE("rest state on a frictionless flat channel has an exactly zero rhs") {
  const ChannelConfig c = fixtures::homogeneous();
  const Grid g = Grid::uniform(c.L, 101);
  const Discretization d = Discretization::make(c, g, 0.1);
  const auto [rH, rV] = svpi::interior_rhs(d, Field::Constant(g.n, 2.0), Field::Zero(g.n));
  CHECK(rH.abs().maxCoeff() == 0.0);
  CHECK(rV.abs().maxCoeff() == 0.0);
}

TEST_CASE("discrete steady state zeroes the interior rhs") {
  for (const ChannelConfig& c : {fixtures::homogeneous(), fixtures::friction_slope()}) {
    const Discretization d = make(c, 201);
    const SimState s = svpi::discrete_steady_state(d, branch1(), 2.0);
    const auto [rH, rV] = svpi::interior_rhs(d, s.profile.H, s.profile.V);
    CHECK(rH.segment(1, 199).abs().maxCoeff() < 1e-12);
    CHECK(rV.segment(1, 199).abs().maxCoeff() < 1e-12);
    CHECK(s.profile.flux()(0) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(s.profile.H(200) == doctest::Approx(2.0).epsilon(1e-14));
  }
}

TEST_CASE("single-mode perturbation follows linearized transport to 2%") {
  const ChannelConfig c = fixtures::homogeneous();
  const Grid g = Grid::uniform(c.L, 201);
  const Discretization d = Discretization::make(c, g, svpi::default_sigma(c, Profile::uniform(g, 2.0, 1.0)));
  const double a = 1e-4, kx = 2 * pi / c.L, cs = std::sqrt(c.g / 2.0);
  const Field u1 = a * (kx * g.x).sin();
  const Field H = 2.0 + u1 / (2 * cs);
  const Field V = 1.0 + u1 / 2;
  const auto [rH, rV] = svpi::interior_rhs(d, H, V);
  const Field du1 = rV + cs * rH;
  const Field du2 = rV - cs * rH;
  const double lambda1 = 1.0 + std::sqrt(19.62);
  const Field expect = -lambda1 * a * kx * (kx * g.x).cos();
  const double scale = expect.abs().maxCoeff();
  CHECK((du1 - expect).segment(1, 199).abs().maxCoeff() < 0.02 * scale);
  CHECK(du2.segment(1, 199).abs().maxCoeff() < 0.02 * scale);
}

TEST_CASE("spatial order with dissipation active is at least 3") {
  const ChannelConfig c = fixtures::homogeneous();
  auto err = [&](int n) {
    const Grid g = Grid::uniform(c.L, n);
    const Field H = 2.0 + 0.1 * (0.7 * g.x).sin();
    const Field V = 1.0 + 0.05 * (0.4 * g.x).cos();
    const Field Hx = 0.07 * (0.7 * g.x).cos();
    const Field Vx = -0.02 * (0.4 * g.x).sin();
    const Discretization d = Discretization::make(c, g, 0.02 * 6.0);
    const auto [rH, rV] = svpi::interior_rhs(d, H, V);
    const Field eH = rH + (H * Vx + V * Hx);
    const Field eV = rV + (V * Vx + c.g * Hx);
    return std::max(eH.segment(1, n - 2).abs().maxCoeff(), eV.segment(1, n - 2).abs().maxCoeff());
  };
  CHECK(std::log2(err(101) / err(201)) >= 3.0);
  CHECK(std::log2(err(201) / err(401)) >= 3.0);
}

TEST_CASE("boundaries: steady fixed point and controller relation") {
  const ChannelConfig c = fixtures::friction_slope();
  const Discretization d = make(c, 201);
  const ControllerSpec ctrl = branch1();
  const SimState s = svpi::discrete_steady_state(d, ctrl, 2.0);
  const auto b = svpi::apply_boundaries(d, ctrl, s.profile.H, s.profile.V, s.Z, 0.0, 2.0);
  CHECK(b.H0 == doctest::Approx(s.profile.H(0)).epsilon(1e-13));
  CHECK(b.V0 == doctest::Approx(s.profile.V(0)).epsilon(1e-13));
  CHECK(b.HL == doctest::Approx(s.profile.H(200)).epsilon(1e-13));
  CHECK(b.VL == doctest::Approx(s.profile.V(200)).epsilon(1e-13));

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1e-3, 1e-3);
  for (int trial = 0; trial < 20; ++trial) {
    SimState p = s;
    for (int i = 1; i < 200; ++i) {
      p.profile.H(i) += u(rng);
      p.profile.V(i) += u(rng);
    }
    p.Z += u(rng);
    const auto bp = svpi::apply_boundaries(d, ctrl, p.profile.H, p.profile.V, p.Z, 0.0, 2.0);
    p.profile.H(0) = bp.H0;
    p.profile.V(0) = bp.V0;
    p.profile.H(200) = bp.HL;
    p.profile.V(200) = bp.VL;
    CHECK(std::abs(svpi::controller_residual(d, ctrl, p)) < 1e-10);
    CHECK(bp.H0 * bp.V0 == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("proportional gate with k_I = 0") {
  const ChannelConfig c = fixtures::homogeneous();
  const Discretization d = make(c, 101);
  ControllerSpec ctrl = branch1();
  ctrl.k_I = 0.0;
  // (1 + k_p) v_G H - v_G k_p H_c equals the steady flux 2 at H = H_c = 2.
  const auto gate = ctrl.gate(c.v_g, 0.0, 0.0);
  CHECK(gate.slope * 2.0 + gate.offset == doctest::Approx(2.0));
  const SimState s = svpi::discrete_steady_state(d, ctrl, 2.0);
  CHECK(s.profile.H(100) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(s.Z == 0.0);
}

TEST_CASE("steady state with consistent Z is a fixed point of step") {
  const ChannelConfig c = fixtures::friction_slope();
  const Discretization d = make(c, 201);
  const ControllerSpec ctrl = branch1();
  const SimState s = svpi::discrete_steady_state(d, ctrl, 2.0);
  const svpi::InflowSignal q(svpi::ConstantInflow{2.0});
  const double dt = 0.9 * svpi::cfl_dt(d, s.profile);
  const SimState n1 = svpi::step(d, ctrl, s, q, dt);
  CHECK((n1.profile.H - s.profile.H).abs().maxCoeff() < 1e-12);
  CHECK((n1.profile.V - s.profile.V).abs().maxCoeff() < 1e-12);
  CHECK(std::abs(n1.Z - s.Z) < 1e-12);
  CHECK_THROWS_AS(svpi::step(d, ctrl, s, q, 2.0 * svpi::cfl_dt(d, s.profile)), svpi::CflError);
}

TEST_CASE("pinned downstream height freezes Z") {
  const ChannelConfig c = fixtures::homogeneous();
  const Discretization d = make(c, 101);
  ControllerSpec ctrl = branch1();
  ctrl.variant = svpi::ControllerVariant::pinned;
  SimState s = svpi::discrete_steady_state(d, ctrl, 2.0);
  s.profile.H += svpi::smooth_bump(d.grid, 1e-3, 5.0, 6.0);
  s.Z = 0.37;
  const svpi::InflowSignal q(svpi::ConstantInflow{2.0});
  const SimState e = advance(d, ctrl, s, q, 0.5 * svpi::cfl_dt(d, s.profile), 200);
  CHECK(e.Z == 0.37);
  CHECK(e.profile.H(100) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("RK4 temporal order is at least 3.8") {
  const ChannelConfig c = fixtures::friction_slope();
  const Discretization d = make(c, 101);
  const ControllerSpec ctrl = branch1();
  const SimState s0 = perturbed_equilibrium(d, ctrl, 0.02);
  const svpi::InflowSignal q(svpi::SinusoidInflow{2.0, 0.05, 0.5});
  const double dt0 = 0.8 * svpi::cfl_dt(d, s0.profile);
  const int base_steps = 8;
  const SimState ref = advance(d, ctrl, s0, q, dt0 / 32, base_steps * 32);
  auto err = [&](int refine) {
    const SimState e = advance(d, ctrl, s0, q, dt0 / refine, base_steps * refine);
    return std::max((e.profile.H - ref.profile.H).abs().maxCoeff(),
                    (e.profile.V - ref.profile.V).abs().maxCoeff());
  };
  const double e1 = err(1), e2 = err(2), e4 = err(4);
  CHECK(std::log2(e1 / e2) >= 3.8);
  CHECK(std::log2(e2 / e4) >= 3.8);
}

TEST_CASE("run: controller relation, Z exactness and mass balance") {
  // The mass defect of the boundary extrapolation scales as dx^2; 801 nodes
  // keep it below 1e-6 on this channel.
  const ChannelConfig c = fixtures::friction_slope();
  const Discretization d = make(c, 801);
  const ControllerSpec ctrl = branch1();
  const SimState s0 = perturbed_equilibrium(d, ctrl, 1e-3 * ctrl.H_c);
  const svpi::InflowSignal q(svpi::ConstantInflow{2.0});
  svpi::RunOptions opt;
  const double dt = 0.8 * svpi::cfl_dt(d, s0.profile);
  opt.dt = dt;
  opt.sample_every = dt;
  opt.horizon = 400 * dt;
  const auto rec = svpi::run(d, ctrl, s0, q, opt);
  REQUIRE(rec.completed);
  CHECK(rec.max_controller_residual < 1e-10);
  CHECK(svpi::mass_balance_residual(rec, d.grid) < 1e-6);

  // Z(t) - Z(0) against Simpson's rule on H_c - H(t, L) at every step.
  const auto& sm = rec.samples;
  const int m = static_cast<int>(sm.size()) - 1;
  REQUIRE(m % 2 == 0);
  double integral = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    integral += w * (ctrl.H_c - sm[i].H(800));
  }
  integral *= dt / 3.0;
  CHECK(std::abs((sm[m].Z - sm[0].Z) - integral) < 1e-9 * std::max(1.0, std::abs(integral)));
}

TEST_CASE("run stops early and reports a regime failure") {
  const ChannelConfig c = fixtures::homogeneous();
  const Discretization d = make(c, 101);
  const ControllerSpec ctrl = branch1();
  SimState s = svpi::discrete_steady_state(d, ctrl, 2.0);
  s.profile.H += svpi::smooth_bump(d.grid, 3.5, 5.0, 6.0);
  s.Z = svpi::consistent_Z(d, ctrl, s.profile, 0.0);
  svpi::RunOptions opt;
  opt.horizon = 10.0;
  const auto rec = svpi::run(d, ctrl, s, svpi::InflowSignal(svpi::ConstantInflow{2.0}), opt);
  CHECK_FALSE(rec.completed);
  CHECK(rec.failure_kind == "regime");
}

TEST_CASE("sampled signal interpolates cubics exactly") {
  std::vector<double> v;
  for (int i = 0; i < 20; ++i) {
    const double t = 1.0 + 0.5 * i;
    v.push_back(t * t * t - t);
  }
  const svpi::SampledSignal s(1.0, 0.5, v);
  for (double t : {1.1, 2.3, 7.9, 10.4}) CHECK(s(t) == doctest::Approx(t * t * t - t).epsilon(1e-12));
  CHECK(s.t_end() == doctest::Approx(10.5));
}

TEST_CASE("smooth bump support and amplitude") {
  const Grid g = Grid::uniform(10.0, 401);
  const Field b = svpi::smooth_bump(g, 0.3, 5.0, 4.0);
  CHECK(b.maxCoeff() == doctest::Approx(0.3));
  for (int i = 0; i < g.n; ++i) {
    if (g.x(i) <= 3.0 || g.x(i) >= 7.0) CHECK(b(i) == 0.0);
  }
}

}  // TEST_SUITE
