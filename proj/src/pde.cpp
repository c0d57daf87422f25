#include "svpi/pde.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "svpi/errors.hpp"
#include "svpi/numerics.hpp"
#include "svpi/steady.hpp"

namespace svpi {

SampledSignal::SampledSignal(double t0, double dt, std::vector<double> values)
    : t0_(t0), dt_(dt), v_(std::move(values)) {
  if (!(dt > 0.0)) throw DomainError("SampledSignal: dt must be positive");
  if (v_.size() < 4) throw DomainError("SampledSignal: need at least 4 samples");
}

double SampledSignal::t_end() const {
  return t0_ + dt_ * static_cast<double>(v_.size() - 1);
}

double SampledSignal::operator()(double t) const {
  if (v_.empty()) throw DomainError("SampledSignal: empty signal");
  const double s = (t - t0_) / dt_;
  const double n = static_cast<double>(v_.size() - 1);
  if (s < -1e-9 || s > n + 1e-9) {
    throw DomainError("SampledSignal: t = " + std::to_string(t) + " outside table");
  }
  const auto i0 = static_cast<std::ptrdiff_t>(
      std::clamp(std::floor(s) - 1.0, 0.0, n - 3.0));
  const double r = s - static_cast<double>(i0);  // in [0, 3]
  double out = 0.0;
  for (int a = 0; a < 4; ++a) {
    double l = 1.0;
    for (int b = 0; b < 4; ++b) {
      if (b != a) l *= (r - b) / static_cast<double>(a - b);
    }
    out += l * v_[static_cast<std::size_t>(i0 + a)];
  }
  return out;
}

std::string_view to_string(ControllerVariant v) {
  switch (v) {
    case ControllerVariant::pure_pi:
      return "pure_pi";
    case ControllerVariant::feedforward:
      return "feedforward";
    default:
      return "pinned";
  }
}

void ControllerSpec::validate(double horizon) const {
  if (!(H_c > 0.0)) throw DomainError("controller: H_c must be positive");
  if (variant == ControllerVariant::feedforward) {
    if (feedforward_flux.empty()) {
      throw DomainError("controller: feedforward variant needs a flux table");
    }
    if (feedforward_flux.t_end() < horizon - 1e-9) {
      throw DomainError("controller: feedforward table shorter than the horizon");
    }
  }
}

ControllerSpec::Affine ControllerSpec::gate(double v_g, double Z, double t) const {
  const double a = v_g * (1.0 + k_p);
  switch (variant) {
    case ControllerVariant::feedforward:
      return {a, feedforward_flux(t) - a * H_c - v_g * k_I * Z};
    default:
      return {a, -v_g * k_p * H_c - v_g * k_I * Z};
  }
}

Discretization Discretization::make(const ChannelConfig& cfg, const Grid& grid,
                                    double sigma) {
  cfg.validate();
  if (grid.n < 7) throw DomainError("Discretization: need at least 7 nodes");
  if (std::abs(grid.L - cfg.L) > 1e-12 * cfg.L) {
    throw DomainError("Discretization: grid length differs from channel length");
  }
  if (sigma < 0.0) throw DomainError("Discretization: sigma must be >= 0");
  Discretization d;
  d.cfg = cfg;
  d.grid = grid;
  d.C = slope_on(cfg, grid);
  d.sigma = sigma;
  return d;
}

double default_sigma(const ChannelConfig& cfg, const Profile& p, double factor) {
  return factor * (p.V + (cfg.g * p.H).sqrt()).maxCoeff();
}

std::pair<Field, Field> interior_rhs(const Discretization& d, const Field& H,
                                     const Field& V) {
  const double dx = d.grid.dx;
  const double g = d.cfg.g;
  const double diss = d.sigma / dx;
  Field dH = -d_dx(H * V, dx);
  Field dV = -V * d_dx(V, dx) - g * d_dx(H, dx) - d.cfg.k * V.square() / H + d.C;
  if (diss > 0.0) {
    dH -= diss * fourth_difference_interior(H);
    dV -= diss * fourth_difference_interior(V);
  }
  return {std::move(dH), std::move(dV)};
}

namespace {

// Newton on [lo, hi] with bisection fallback; F(lo) and F(hi) must bracket.
template <class F, class DF>
double safeguarded_root(F f, DF df, double lo, double hi, double x0,
                        double ftol) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw BoundarySolveError("boundary solve: root not bracketed");
  }
  double x = (x0 > lo && x0 < hi) ? x0 : 0.5 * (lo + hi);
  for (int it = 0; it < 50; ++it) {
    const double fx = f(x);
    if (std::abs(fx) <= ftol) return x;
    if ((fx > 0.0) == (flo > 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    const double dfx = df(x);
    double xn = dfx != 0.0 ? x - fx / dfx : lo;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) <= 4e-16 * std::abs(x) || hi - lo <= 4e-16 * std::abs(x)) {
      return xn;
    }
    x = xn;
  }
  throw BoundarySolveError("boundary solve: no convergence in 50 iterations");
}

}  // namespace

BoundaryValues apply_boundaries(const Discretization& d,
                                const ControllerSpec& ctrl, const Field& H,
                                const Field& V, double Z, double t,
                                double Q0_now) {
  const double g = d.cfg.g;
  const int n = d.grid.n;
  const int e = n - 1;
  BoundaryValues bv{};

  // x = 0: outgoing R- = V - 2 sqrt(gH), imposed H V = Q0.
  {
    auto rm = [&](int i) { return V(i) - 2.0 * std::sqrt(g * H(i)); };
    const double w = 2.0 * rm(1) - rm(2);
    if (!(w < 0.0)) {
      throw RegimeError("upstream boundary: outgoing invariant is non-negative", 0.0, t);
    }
    const double lo = -w / 3.0;
    const double hi = -w;
    auto F = [&](double c) { return c * c / g * (w + 2.0 * c) - Q0_now; };
    auto dF = [&](double c) { return (2.0 * c * w + 6.0 * c * c) / g; };
    if (F(hi) < 0.0) {
      throw RegimeError("upstream boundary: inflow exceeds the critical discharge", 0.0, t);
    }
    const double c = safeguarded_root(F, dF, lo, hi, std::sqrt(g * H(0)),
                                      1e-14 * std::max(std::abs(Q0_now), 1e-300));
    bv.H0 = c * c / g;
    bv.V0 = w + 2.0 * c;
  }

  // x = L: outgoing R+ = V + 2 sqrt(gH), gate relation.
  {
    auto rp = [&](int i) { return V(i) + 2.0 * std::sqrt(g * H(i)); };
    const double w = 2.0 * rp(e - 1) - rp(e - 2);
    if (!(w > 0.0)) {
      throw RegimeError("downstream boundary: outgoing invariant is non-positive", d.grid.L, t);
    }
    const double c_lo = w / 3.0;  // critical flow
    if (ctrl.variant == ControllerVariant::pinned) {
      const double c = std::sqrt(g * ctrl.H_c);
      if (!(c > c_lo)) {
        throw RegimeError("downstream boundary: pinned height is not subcritical", d.grid.L, t);
      }
      bv.HL = ctrl.H_c;
      bv.VL = w - 2.0 * c;
    } else {
      const auto [a, b] = ctrl.gate(d.cfg.v_g, Z, t);
      auto F = [&](double c) { return c * c / g * (w - 2.0 * c - a) - b; };
      auto dF = [&](double c) { return c / g * (2.0 * (w - a) - 6.0 * c); };
      const double c_s = (w - a) / 3.0;
      const double lam2_ref = std::sqrt(g * H(e)) - V(e);
      const bool increasing = -lam2_ref - a > 0.0;
      double lo, hi;
      if (!increasing) {
        lo = std::max(c_lo, c_s);
        hi = std::max(2.0 * lo, std::sqrt(g * d.cfg.h_max));
        for (int k = 0; k < 60 && F(hi) > 0.0; ++k) hi *= 2.0;
      } else {
        if (!(c_s > c_lo)) {
          throw BoundarySolveError("downstream boundary: no subcritical root on the gate branch");
        }
        lo = c_lo;
        hi = c_s;
      }
      const double scale = std::max({std::abs(b), std::abs(a) * H(e), 1e-300});
      const double c = safeguarded_root(F, dF, lo, hi, std::sqrt(g * H(e)), 1e-14 * scale);
      bv.HL = c * c / g;
      bv.VL = w - 2.0 * c;
    }
  }
  return bv;
}

double controller_residual(const Discretization& d, const ControllerSpec& ctrl,
                           const SimState& s) {
  const int e = d.grid.n - 1;
  const double H = s.profile.H(e);
  const double V = s.profile.V(e);
  if (ctrl.variant == ControllerVariant::pinned) return std::abs(H - ctrl.H_c);
  const auto [a, b] = ctrl.gate(d.cfg.v_g, s.Z, s.t);
  return std::abs(H * V - (a * H + b));
}

double cfl_dt(const Discretization& d, const Profile& p) {
  return d.cfl * d.grid.dx / max_wave_speed(d.cfg, p);
}

namespace {

void set_boundaries(Field& H, Field& V, const BoundaryValues& bv) {
  const Eigen::Index e = H.size() - 1;
  H(0) = bv.H0;
  V(0) = bv.V0;
  H(e) = bv.HL;
  V(e) = bv.VL;
}

void check_regime(const Discretization& d, const Profile& p, double t) {
  const RegimeReport rep = validate_regime(d.cfg, p);
  if (!rep.pass) {
    std::string what = "regime violated at t = " + std::to_string(t);
    if (rep.min_height <= 0.0) {
      what += " (non-positive height)";
    } else if (rep.max_height_excess >= 0.0) {
      what += " (height cap exceeded)";
    } else {
      what += " (fluvial margin lost)";
    }
    Eigen::Index worst = 0;
    if (rep.max_height_excess >= 0.0) {
      p.H.maxCoeff(&worst);
    } else {
      worst = std::max(rep.worst_node, 0);
    }
    throw RegimeError(what, d.grid.x(worst), t);
  }
}

}  // namespace

SimState step(const Discretization& d, const ControllerSpec& ctrl,
              const SimState& s, const InflowSignal& inflow, double dt) {
  const double dt_max = cfl_dt(d, s.profile);
  if (dt > dt_max * (1.0 + 1e-12)) {
    throw CflError("step: dt = " + std::to_string(dt) + " exceeds CFL bound " +
                   std::to_string(dt_max));
  }
  const int n = d.grid.n;
  const int e = n - 1;
  const bool integrate_z = ctrl.variant != ControllerVariant::pinned;

  struct Stage {
    Field kH, kV;
    double kZ;
  };
  auto eval = [&](Field& H, Field& V, double Z, double t) {
    set_boundaries(H, V, apply_boundaries(d, ctrl, H, V, Z, t, inflow(t)));
    auto [kH, kV] = interior_rhs(d, H, V);
    kH(0) = kH(e) = 0.0;
    kV(0) = kV(e) = 0.0;
    return Stage{std::move(kH), std::move(kV), integrate_z ? ctrl.H_c - H(e) : 0.0};
  };

  const Field& H = s.profile.H;
  const Field& V = s.profile.V;
  Field H1 = H, V1 = V;
  const Stage k1 = eval(H1, V1, s.Z, s.t);
  Field H2 = H1 + 0.5 * dt * k1.kH, V2 = V1 + 0.5 * dt * k1.kV;
  const Stage k2 = eval(H2, V2, s.Z + 0.5 * dt * k1.kZ, s.t + 0.5 * dt);
  Field H3 = H1 + 0.5 * dt * k2.kH, V3 = V1 + 0.5 * dt * k2.kV;
  H3(0) = H2(0);
  V3(0) = V2(0);
  H3(e) = H2(e);
  V3(e) = V2(e);
  const Stage k3 = eval(H3, V3, s.Z + 0.5 * dt * k2.kZ, s.t + 0.5 * dt);
  Field H4 = H1 + dt * k3.kH, V4 = V1 + dt * k3.kV;
  H4(0) = H3(0);
  V4(0) = V3(0);
  H4(e) = H3(e);
  V4(e) = V3(e);
  const Stage k4 = eval(H4, V4, s.Z + dt * k3.kZ, s.t + dt);

  SimState out;
  out.t = s.t + dt;
  out.Z = s.Z + dt / 6.0 * (k1.kZ + 2.0 * k2.kZ + 2.0 * k3.kZ + k4.kZ);
  Field Hn = H1 + dt / 6.0 * (k1.kH + 2.0 * k2.kH + 2.0 * k3.kH + k4.kH);
  Field Vn = V1 + dt / 6.0 * (k1.kV + 2.0 * k2.kV + 2.0 * k3.kV + k4.kV);
  Hn(0) = H4(0);
  Vn(0) = V4(0);
  Hn(e) = H4(e);
  Vn(e) = V4(e);
  set_boundaries(Hn, Vn,
                 apply_boundaries(d, ctrl, Hn, Vn, out.Z, out.t, inflow(out.t)));
  out.profile = Profile(d.grid, std::move(Hn), std::move(Vn), ProfileRole::state);
  check_regime(d, out.profile, out.t);
  return out;
}

double consistent_Z(const Discretization& d, const ControllerSpec& ctrl,
                    const Profile& p, double t) {
  if (ctrl.variant == ControllerVariant::pinned || ctrl.k_I == 0.0) return 0.0;
  const int e = d.grid.n - 1;
  const double H = p.H(e);
  const double flux = H * p.V(e);
  const double a = d.cfg.v_g * (1.0 + ctrl.k_p);
  double base = a * H - d.cfg.v_g * ctrl.k_p * ctrl.H_c;
  if (ctrl.variant == ControllerVariant::feedforward) {
    base = ctrl.feedforward_flux(t) + a * (H - ctrl.H_c);
  }
  return (base - flux) / (d.cfg.v_g * ctrl.k_I);
}

SimState discrete_steady_state(const Discretization& d,
                               const ControllerSpec& ctrl, double Q, double t) {
  const int n = d.grid.n;
  const int e = n - 1;
  const double g = d.cfg.g;
  const bool gate_eq = ctrl.variant != ControllerVariant::pinned && ctrl.k_I == 0.0;
  const Profile seed = solve_steady(d.cfg, Q, ctrl.H_c, d.grid);

  Eigen::VectorXd x(2 * n);
  x.head(n) = seed.H.matrix();
  x.tail(n) = seed.V.matrix();

  auto residual = [&](const Eigen::VectorXd& xv) {
    const Field H = xv.head(n).array();
    const Field V = xv.tail(n).array();
    Eigen::VectorXd r(2 * n);
    if (!(H.minCoeff() > 0.0)) {
      throw RegimeError("discrete steady state: non-positive height in Newton iterate");
    }
    auto [rH, rV] = interior_rhs(d, H, V);
    auto rm = [&](int i) { return V(i) - 2.0 * std::sqrt(g * H(i)); };
    auto rp = [&](int i) { return V(i) + 2.0 * std::sqrt(g * H(i)); };
    r(0) = H(0) * V(0) - Q;
    r(1) = rm(0) - (2.0 * rm(1) - rm(2));
    for (int i = 1; i < e; ++i) {
      r(1 + i) = rH(i);
      r(n - 1 + i) = rV(i);
    }
    if (gate_eq) {
      const auto [a, b] = ctrl.gate(d.cfg.v_g, 0.0, t);
      r(2 * n - 2) = H(e) * V(e) - (a * H(e) + b);
    } else {
      r(2 * n - 2) = H(e) - ctrl.H_c;
    }
    r(2 * n - 1) = rp(e) - (2.0 * rp(e - 1) - rp(e - 2));
    return r;
  };
  auto row_node = [&](int row) {
    if (row <= 1) return 0;
    if (row <= n - 1) return row - 1;
    if (row <= 2 * n - 3) return row - n + 1;
    return e;
  };
  constexpr int reach = 3;
  constexpr int colors = 2 * reach + 1;

  Eigen::VectorXd r = residual(x);
  double rnorm = r.lpNorm<Eigen::Infinity>();
  const double tol = 1e-14 * std::max(1.0, std::max(Q, g * ctrl.H_c));
  for (int it = 0; it < 40 && rnorm > tol; ++it) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(2 * n * 2 * colors * 2));
    for (int field = 0; field < 2; ++field) {
      for (int c = 0; c < colors; ++c) {
        Eigen::VectorXd xp = x;
        std::vector<double> h(static_cast<std::size_t>(n), 0.0);
        for (int j = c; j < n; j += colors) {
          const int col = field * n + j;
          h[static_cast<std::size_t>(j)] = 1e-7 * std::max(1.0, std::abs(x(col)));
          xp(col) += h[static_cast<std::size_t>(j)];
        }
        const Eigen::VectorXd rp = residual(xp);
        for (int row = 0; row < 2 * n; ++row) {
          const int i = row_node(row);
          // the unique perturbed node within reach of this row
          int j = i - ((i - c) % colors + colors) % colors;
          if (i - j > reach) j += colors;
          if (j < 0 || j >= n || std::abs(i - j) > reach) continue;
          const double dv = (rp(row) - r(row)) / h[static_cast<std::size_t>(j)];
          if (dv != 0.0) trip.emplace_back(row, field * n + j, dv);
        }
      }
    }
    Eigen::SparseMatrix<double> J(2 * n, 2 * n);
    J.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) {
      throw BoundarySolveError("discrete steady state: singular Jacobian");
    }
    const Eigen::VectorXd dxv = lu.solve(-r);
    Eigen::VectorXd xn = x + dxv;
    Eigen::VectorXd rn = residual(xn);
    double nn = rn.lpNorm<Eigen::Infinity>();
    if (!(nn < rnorm)) break;
    x = std::move(xn);
    r = std::move(rn);
    rnorm = nn;
  }
  if (!(rnorm <= 1e-10)) {
    throw BoundarySolveError("discrete steady state: Newton residual " +
                             std::to_string(rnorm));
  }
  SimState s;
  s.t = t;
  s.profile = Profile(d.grid, x.head(n).array(), x.tail(n).array(), ProfileRole::steady);
  s.Z = consistent_Z(d, ctrl, s.profile, t);
  return s;
}

Field smooth_bump(const Grid& grid, double amplitude, double center,
                  double width) {
  Field b = Field::Zero(grid.n);
  if (!(width > 0.0)) throw DomainError("smooth_bump: width must be positive");
  const double lo = center - 0.5 * width;
  for (int i = 0; i < grid.n; ++i) {
    const double s = (grid.x(i) - lo) / width;
    if (s > 0.0 && s < 1.0) {
      const double v = std::sin(M_PI * s);
      b(i) = amplitude * v * v * v * v;
    }
  }
  return b;
}

TrajectoryRecord run(const Discretization& d, const ControllerSpec& ctrl,
                     const SimState& initial, const InflowSignal& inflow,
                     const RunOptions& opt) {
  if (!(opt.horizon > 0.0)) throw DomainError("run: horizon must be positive");
  if (!(opt.sample_every > 0.0)) throw DomainError("run: sample_every must be positive");
  const int extra = opt.keep_stencils ? 2 : 0;
  ctrl.validate(opt.horizon);

  TrajectoryRecord rec;
  rec.sample_every = opt.sample_every;
  int nsub = 0;
  if (opt.dt) {
    rec.dt = *opt.dt;
    nsub = static_cast<int>(std::lround(opt.sample_every / rec.dt));
    if (nsub < 1 || std::abs(nsub * rec.dt - opt.sample_every) > 1e-9 * opt.sample_every) {
      throw DomainError("run: sample_every must be a multiple of the fixed dt");
    }
  } else {
    const double dt_max = d.dt_safety * cfl_dt(d, initial.profile);
    nsub = static_cast<int>(std::ceil(opt.sample_every / dt_max));
    rec.dt = opt.sample_every / nsub;
  }
  const long nsamples = std::lround(opt.horizon / opt.sample_every);
  const long nsteps = nsamples * nsub;
  const double t0 = initial.t;

  SimState s = initial;
  s.profile.role = ProfileRole::state;
  {
    const RegimeReport rep = validate_regime(d.cfg, s.profile);
    if (!rep.pass) {
      rec.failure = "initial state violates the fluvial regime";
      rec.failure_kind = "regime";
      rec.failure_time = t0;
      rec.failure_x = d.grid.x(std::max(rep.worst_node, 0));
      return rec;
    }
  }

  struct Lite {
    Field H, V;
    double Z;
  };
  std::deque<Lite> hist;
  std::deque<std::pair<std::size_t, long>> pending;  // sample index, center step

  for (long j = 0;; ++j) {
    if (j == 0) {
      try {
        Field H = s.profile.H, V = s.profile.V;
        set_boundaries(H, V, apply_boundaries(d, ctrl, H, V, s.Z, s.t, inflow(s.t)));
        s.profile.H = std::move(H);
        s.profile.V = std::move(V);
      } catch (const Error& err) {
        rec.failure = err.what();
        rec.failure_kind = "boundary";
        rec.failure_time = s.t;
        return rec;
      }
    }
    hist.push_back({s.profile.H, s.profile.V, s.Z});
    if (hist.size() > 5) hist.pop_front();
    rec.max_controller_residual =
        std::max(rec.max_controller_residual, controller_residual(d, ctrl, s));
    if (opt.record_step_flux) {
      rec.step_flux_L.push_back(s.profile.H(d.grid.n - 1) * s.profile.V(d.grid.n - 1));
    }
    if (j <= nsteps && j % nsub == 0) {
      Sample smp;
      smp.t = s.t;
      smp.H = s.profile.H;
      smp.V = s.profile.V;
      smp.Z = s.Z;
      smp.Q0 = inflow(s.t);
      smp.flux_L = s.profile.H(d.grid.n - 1) * s.profile.V(d.grid.n - 1);
      rec.samples.push_back(std::move(smp));
      if (opt.keep_stencils && j >= 2) pending.emplace_back(rec.samples.size() - 1, j);
    }
    while (!pending.empty() && pending.front().second + 2 == j) {
      Sample& smp = rec.samples[pending.front().first];
      for (int k = 0; k < 5; ++k) {
        smp.sH[static_cast<std::size_t>(k)] = hist[static_cast<std::size_t>(k)].H;
        smp.sV[static_cast<std::size_t>(k)] = hist[static_cast<std::size_t>(k)].V;
        smp.sZ[static_cast<std::size_t>(k)] = hist[static_cast<std::size_t>(k)].Z;
      }
      smp.has_stencil = true;
      pending.pop_front();
    }
    if (j == nsteps + extra) break;
    try {
      s = step(d, ctrl, s, inflow, rec.dt);
      s.t = t0 + static_cast<double>(j + 1) * rec.dt;
    } catch (const RegimeError& err) {
      rec.failure = err.what();
      rec.failure_kind = "regime";
      rec.failure_time = err.time().value_or(s.t + rec.dt);
      rec.failure_x = err.position();
      break;
    } catch (const CflError& err) {
      rec.failure = err.what();
      rec.failure_kind = "cfl";
      rec.failure_time = s.t;
      break;
    } catch (const Error& err) {
      rec.failure = err.what();
      rec.failure_kind = "boundary";
      rec.failure_time = s.t;
      break;
    }
  }
  rec.completed = rec.failure.empty();
  return rec;
}

}  // namespace svpi
