#include "svpi/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svpi/errors.hpp"
#include "svpi/numerics.hpp"
#include "svpi/riemann.hpp"

namespace svpi {

namespace {

double weighted_sum(const Field& w, const Field& f) { return (w * f).sum(); }

}  // namespace

double h2_norm(const Field& dH, const Field& dV, const Grid& grid) {
  if (grid.n < 7) throw DomainError("h2_norm: need at least 7 nodes");
  if (dH.size() != grid.n || dV.size() != grid.n) {
    throw DomainError("h2_norm: size mismatch");
  }
  const Field w = integration_weights(grid.n, grid.dx);
  double s = 0.0;
  for (const Field* f : {&dH, &dV}) {
    const Field d1 = d_dx(*f, grid.dx);
    const Field d2 = d2_dx2(*f, grid.dx);
    s += weighted_sum(w, f->square() + d1.square() + d2.square());
  }
  return std::sqrt(std::max(s, 0.0));
}

double l2_norm(const Field& dH, const Field& dV, const Grid& grid) {
  if (dH.size() != grid.n || dV.size() != grid.n) {
    throw DomainError("l2_norm: size mismatch");
  }
  const Field w = integration_weights(grid.n, grid.dx);
  return std::sqrt(std::max(weighted_sum(w, dH.square() + dV.square()), 0.0));
}

double lyapunov_form(const Certificate& cert, const Field& u1, const Field& u2,
                     double z) {
  const Grid& g = cert.fields.grid;
  const Field w = integration_weights(g.n, g.dx);
  const Field e1 = cert.w.f1 * (-cert.mu * g.x).exp();
  const Field e2 = cert.w.f2 * (cert.mu * g.x).exp();
  return weighted_sum(w, e1 * u1.square() + e2 * u2.square()) + cert.q * z * z;
}

LyapunovValue lyapunov_value(const Certificate& cert, const Discretization& d,
                             const ControllerSpec& ctrl, const Sample& s,
                             double dt, const Profile& target, double Z_ref) {
  if (!cert.valid) throw DomainError("lyapunov_value: certificate is not valid");
  if (!target.grid.same_as(cert.fields.grid) || s.H.size() != target.grid.n) {
    throw DomainError("lyapunov_value: grid mismatch");
  }
  const double g = d.cfg.g;
  const int e = d.grid.n - 1;
  LyapunovValue out;
  {
    auto [u1, u2] = to_riemann(s.H - target.H, s.V - target.V, target.H, g);
    out.Va = lyapunov_form(cert, u1, u2, s.Z - Z_ref);
  }
  out.V = out.Va;
  if (!s.has_stencil) return out;

  // dt (H, V) at stencil positions 1, 2, 3.
  auto time_derivative = [&](int k) {
    const auto ku = static_cast<std::size_t>(k);
    auto [dH, dV] = interior_rhs(d, s.sH[ku], s.sV[ku]);
    for (int node : {0, e}) {
      dH(node) = (s.sH[ku + 1](node) - s.sH[ku - 1](node)) / (2.0 * dt);
      dV(node) = (s.sV[ku + 1](node) - s.sV[ku - 1](node)) / (2.0 * dt);
    }
    return std::pair<Field, Field>{std::move(dH), std::move(dV)};
  };
  const auto [dH2, dV2] = time_derivative(2);
  const auto [dH1, dV1] = time_derivative(1);
  const auto [dH3, dV3] = time_derivative(3);

  const double zdot = ctrl.variant == ControllerVariant::pinned ? 0.0 : ctrl.H_c - s.H(e);
  {
    auto [u1, u2] = to_riemann(dH2, dV2, target.H, g);
    out.Vb = lyapunov_form(cert, u1, u2, zdot);
  }
  {
    const Field ddH = (dH3 - dH1) / (2.0 * dt);
    const Field ddV = (dV3 - dV1) / (2.0 * dt);
    const double zddot = ctrl.variant == ControllerVariant::pinned ? 0.0 : -dH2(e);
    auto [u1, u2] = to_riemann(ddH, ddV, target.H, g);
    out.Vc = lyapunov_form(cert, u1, u2, zddot);
  }
  out.V = out.Va + *out.Vb + *out.Vc;
  return out;
}

NormSeries norm_series(const TrajectoryRecord& rec, const Discretization& d,
                       const ControllerSpec& ctrl, const Profile& reference,
                       double Z_ref, const Certificate* cert) {
  NormSeries ns;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const Sample& s : rec.samples) {
    const Field dH = s.H - reference.H;
    const Field dV = s.V - reference.V;
    ns.t.push_back(s.t);
    ns.h2.push_back(h2_norm(dH, dV, d.grid));
    ns.l2.push_back(l2_norm(dH, dV, d.grid));
    ns.z_abs.push_back(std::abs(s.Z - Z_ref));
    if (cert != nullptr && cert->valid) {
      const LyapunovValue lv = lyapunov_value(*cert, d, ctrl, s, rec.dt, reference, Z_ref);
      ns.lyap_a.push_back(lv.Va);
      ns.lyap_b.push_back(lv.Vb.value_or(nan));
      ns.lyap_c.push_back(lv.Vc.value_or(nan));
      ns.lyap.push_back(lv.Vb && lv.Vc ? lv.V : nan);
    }
  }
  return ns;
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value,
                   double t_start) {
  if (t.size() != value.size()) throw DomainError("fit_decay: size mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_start) continue;
    if (!(value[i] > 0.0)) {
      throw DomainError("fit_decay: non-positive value in the fit window");
    }
    xs.push_back(t[i]);
    ys.push_back(std::log(value[i]));
  }
  if (xs.size() < 20) throw DomainError("fit_decay: fewer than 20 samples in the window");
  const Eigen::Index m = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = xs[static_cast<std::size_t>(i)] - xs.front();
    y(i) = ys[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd res = y - A * c;
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).square().sum();
  const double ss_res = res.squaredNorm();
  DecayFit f;
  f.gamma = -c(1);
  f.log_c = c(0) + c(1) * xs.front();
  f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  f.samples = static_cast<int>(m);
  return f;
}

IssReport iss_check(const std::vector<double>& t,
                    const std::vector<double>& deviation,
                    const std::vector<double>& Z, const InflowSignal& inflow,
                    double horizon, const IssOptions& opt) {
  if (t.size() != deviation.size()) throw DomainError("iss_check: size mismatch");
  IssReport r;
  r.forcing_sup = inflow.derivative_bound(1, horizon) +
                  inflow.derivative_bound(2, horizon) +
                  inflow.derivative_bound(3, horizon);
  if (inflow.is_constant() || r.forcing_sup == 0.0) {
    r.exponential_regime = true;
    r.gain = std::numeric_limits<double>::quiet_NaN();
    r.window_end = horizon;
    r.deviation_sup = deviation.empty() ? 0.0 : deviation.back();
    r.bounded = true;
    return r;
  }
  const double T = inflow.period();
  if (!(T > 0.0)) {
    throw DomainError("iss_check: bounded-deviation window needs a periodic inflow");
  }
  r.window_end = horizon;
  r.window_start = horizon - opt.window_periods * T;
  if (r.window_start < opt.transient - 1e-9) {
    throw DomainError("iss_check: window shorter than the required forcing periods");
  }
  r.period_sup.assign(static_cast<std::size_t>(opt.window_periods), 0.0);
  std::vector<double> zsum(r.period_sup.size(), 0.0);
  std::vector<int> zcnt(r.period_sup.size(), 0);
  double zmin = std::numeric_limits<double>::infinity();
  double zmax = -zmin;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < r.window_start - 1e-9 || t[i] > r.window_end + 1e-9) continue;
    auto p = static_cast<std::size_t>(std::floor((t[i] - r.window_start) / T + 1e-9));
    p = std::min(p, r.period_sup.size() - 1);
    r.period_sup[p] = std::max(r.period_sup[p], deviation[i]);
    r.deviation_sup = std::max(r.deviation_sup, deviation[i]);
    if (!Z.empty()) {
      zsum[p] += Z[i];
      zcnt[p] += 1;
      zmin = std::min(zmin, Z[i]);
      zmax = std::max(zmax, Z[i]);
    }
  }
  const auto [mn, mx] = std::minmax_element(r.period_sup.begin(), r.period_sup.end());
  r.trend_ratio = *mn > 0.0 ? *mx / *mn : std::numeric_limits<double>::infinity();
  r.bounded = std::isfinite(r.deviation_sup) && r.trend_ratio <= opt.trend_tolerance;
  r.gain = r.deviation_sup / r.forcing_sup;
  if (!Z.empty()) {
    std::vector<double> means;
    for (std::size_t p = 0; p < zsum.size(); ++p) {
      if (zcnt[p] > 0) means.push_back(zsum[p] / zcnt[p]);
    }
    const auto [a, b] = std::minmax_element(means.begin(), means.end());
    const double amp = 0.5 * (zmax - zmin);
    r.z_drift = amp > 0.0 ? (*b - *a) / amp : 0.0;
    r.z_stationary = r.z_drift <= opt.z_drift_tolerance;
  }
  return r;
}

double mass_balance_residual(const TrajectoryRecord& rec, const Grid& grid) {
  const Field w = integration_weights(grid.n, grid.dx);
  const double dt = rec.dt;
  double worst = 0.0;
  for (const Sample& s : rec.samples) {
    if (!s.has_stencil) continue;
    std::array<double, 5> m{};
    for (std::size_t k = 0; k < 5; ++k) m[k] = (w * s.sH[k]).sum();
    const double dmdt = (m[0] - 8.0 * m[1] + 8.0 * m[3] - m[4]) / (12.0 * dt);
    const double r = std::abs(dmdt - (s.Q0 - s.flux_L)) / s.Q0;
    worst = std::max(worst, r);
  }
  return worst;
}

}  // namespace svpi
