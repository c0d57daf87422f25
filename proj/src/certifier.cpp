#include "svpi/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svpi/errors.hpp"
#include "svpi/numerics.hpp"

namespace svpi {

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::branch1:
      return "branch1";
    case Branch::branch2:
      return "branch2";
    default:
      return "rejected";
  }
}

GainCheck check_gains(const ChannelConfig& cfg, const Profile& base, double k_p,
                      double k_I) {
  const double HL = base.H(base.grid.n - 1);
  const double VL = base.V(base.grid.n - 1);
  if (!(VL > 0.0)) {
    throw DomainError("check_gains: V1(L) must be positive for the branch-2 threshold");
  }
  GainCheck gc;
  gc.threshold2 = -1.0 - (cfg.g * HL - VL * VL) / (cfg.v_g * VL);
  gc.margin_kp1 = k_p + 1.0;
  gc.margin_ki = k_I;
  gc.margin2 = gc.threshold2 - k_p;
  if (k_p > -1.0 && k_I > 0.0) {
    gc.branch = Branch::branch1;
  } else if (k_p < gc.threshold2 && k_I < 0.0) {
    gc.branch = Branch::branch2;
  } else {
    gc.branch = Branch::rejected;
  }
  return gc;
}

BoundaryCoefficients boundary_coefficients(const ChannelConfig& cfg,
                                           const Profile& base, double k_p,
                                           double k_I) {
  const int e = base.grid.n - 1;
  const auto [l1_0, l2_0] = eigenvalues(cfg.g, base.H(0), base.V(0));
  const auto [l1_L, l2_L] = eigenvalues(cfg.g, base.H(e), base.V(e));
  const double a = cfg.v_g * (1.0 + k_p);
  const double den = l2_L + a;
  if (std::abs(den) <= 1e-12 * (l2_L + std::abs(a))) {
    throw DomainError("boundary_coefficients: v_G (1 + k_p) + lambda2(L) vanishes");
  }
  BoundaryCoefficients bc;
  bc.k1 = -(l1_L - a) / den;
  bc.k2 = -l2_0 / l1_0;
  bc.k3 = 2.0 * cfg.v_g * k_I * std::sqrt(cfg.g / base.H(e)) / den;
  return bc;
}

namespace {

struct ChiCoefficients {
  Field a;  // forcing
  Field b;  // quadratic coefficient
};

ChiCoefficients chi_coefficients(const RiemannFields& f, const Field& dtH1) {
  ChiCoefficients c;
  c.a = f.phi * f.gamma2 / f.lambda1;
  if (dtH1.size() > 0) {
    if (dtH1.size() != f.grid.n) throw DomainError("chi: dtH1 size mismatch");
    c.a += f.phi / f.lambda1.square() * (f.g / f.H1).sqrt() * dtH1;
  }
  c.b = f.delta1 / (f.phi * f.lambda2);
  return c;
}

}  // namespace

Field chi_rhs(const RiemannFields& f, const Field& dtH1, const Field& chi) {
  const ChiCoefficients c = chi_coefficients(f, dtH1);
  return c.a + c.b * chi.square();
}

Field chi_solve(const RiemannFields& f, const Field& dtH1, double eps) {
  if (eps < 0.0) throw DomainError("chi_solve: eps must be >= 0");
  if (f.phi.size() != f.grid.n) throw DomainError("chi_solve: phi weights missing");
  const ChiCoefficients c = chi_coefficients(f, dtH1);
  const int n = f.grid.n;
  const double h = f.grid.dx;
  Field chi(n);
  chi(0) = f.lambda2(0) / f.lambda1(0) + eps;
  for (int i = 0; i + 1 < n; ++i) {
    const double am = midpoint_cubic(c.a, i);
    const double bm = midpoint_cubic(c.b, i);
    const double y = chi(i);
    const double s1 = c.a(i) + c.b(i) * y * y + eps;
    const double y2 = y + 0.5 * h * s1;
    const double s2 = am + bm * y2 * y2 + eps;
    const double y3 = y + 0.5 * h * s2;
    const double s3 = am + bm * y3 * y3 + eps;
    const double y4 = y + h * s3;
    const double s4 = c.a(i + 1) + c.b(i + 1) * y4 * y4 + eps;
    chi(i + 1) = y + h / 6.0 * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
    if (!std::isfinite(chi(i + 1)) || std::abs(chi(i + 1)) > 1e6) {
      throw CertificateInfeasible("chi_solve: chi blows up before x = L (x = " +
                                  std::to_string(f.grid.x(i + 1)) + ")");
    }
  }
  if (!(chi.minCoeff() > 0.0)) {
    throw CertificateInfeasible("chi_solve: chi is not positive on [0, L]");
  }
  return chi;
}

Lemma2Report verify_lemma2(const RiemannFields& f, const Field& dtH1) {
  const Field chi0 = f.lambda2 * f.phi / f.lambda1;
  const Field rhs = chi_rhs(f, dtH1, chi0);
  Lemma2Report r;
  r.residual = (d_dx(chi0, f.grid.dx) - rhs).abs().maxCoeff();
  r.min_bracket = rhs.minCoeff();
  r.positive = r.min_bracket > 0.0;
  return r;
}

Weights build_weights(const RiemannFields& f, const Field& chi) {
  if (chi.size() != f.grid.n) throw DomainError("build_weights: size mismatch");
  if (!(chi.minCoeff() > 0.0)) {
    throw CertificateInfeasible("build_weights: chi must be positive");
  }
  return {f.phi1.square() / (f.lambda1 * chi), f.phi2.square() * chi / f.lambda2};
}

InteriorMargins check_interior(const RiemannFields& f, const Weights& w,
                               const Field& dtf1, const Field& dtf2,
                               const Field& chi, const Field& chi_prime) {
  const double dx = f.grid.dx;
  const int n = f.grid.n;
  const Field z = Field::Zero(n);
  const Field& t1 = dtf1.size() ? dtf1 : z;
  const Field& t2 = dtf2.size() ? dtf2 : z;
  InteriorMargins m;
  const Field s1 = d_dx(-f.lambda1 * w.f1, dx) + 2.0 * f.gamma1 * w.f1;
  const Field s2 = d_dx(f.lambda2 * w.f2, dx) + 2.0 * f.delta2 * w.f2;
  m.c3a = s1 - t1;
  m.c3c = s2 - t2;
  m.cross = f.gamma2 * w.f1 + f.delta1 * w.f2;
  m.c3b = m.c3a * m.c3c - m.cross.square();
  m.min_c3a = m.c3a.minCoeff();
  m.min_c3b = m.c3b.minCoeff();
  const Field id1 = f.phi1.square() * chi_prime / chi.square();
  const Field id2 = f.phi2.square() * chi_prime;
  m.identity_residual =
      std::max((s1 - id1).abs().maxCoeff(), (s2 - id2).abs().maxCoeff());
  return m;
}

double boundary_polynomial(double q, double A, double B, double s,
                           const BoundaryCoefficients& bc) {
  const double d = bc.k1 - 1.0;
  return -0.25 * q * q * s * s * d * d + q * s * bc.k3 * (A - B * bc.k1) -
         A * B * bc.k3 * bc.k3;
}

BoundaryMargins check_boundary_and_select_q(const RiemannFields& f,
                                            const Weights& w,
                                            const BoundaryCoefficients& bc) {
  const int e = f.grid.n - 1;
  BoundaryMargins m;
  m.c1 = f.lambda2(0) * w.f2(0) / (f.lambda1(0) * w.f1(0)) - bc.k2 * bc.k2;
  const double A = f.lambda1(e) * w.f1(e);
  const double B = f.lambda2(e) * w.f2(e);
  const double s = std::sqrt(f.H1(e) / f.g);
  m.c2a = A / B - bc.k1 * bc.k1;
  const double d = bc.k1 - 1.0;
  if (std::abs(d) < 1e-12) {
    m.linear_in_q = true;
    m.discriminant = std::numeric_limits<double>::quiet_NaN();
    const double slope = s * bc.k3 * (A - B);
    if (slope > 0.0) {
      m.q = 2.0 * A * B * bc.k3 * bc.k3 / slope;
    } else {
      m.q = 0.0;
      m.diagnostic = "k1 = 1 and P(q) has non-positive slope";
    }
  } else {
    const double X = A / B;
    m.discriminant = s * s * bc.k3 * bc.k3 * B * B * (X - 1.0) * (X - bc.k1 * bc.k1);
    m.q = 2.0 * bc.k3 * (A - B * bc.k1) / (s * d * d);
    if (!(m.q > 0.0)) {
      m.q = 0.0;
      m.diagnostic = "vertex of P(q) is not at positive q";
    } else if (!(m.discriminant > 0.0)) {
      m.diagnostic = "discriminant of P(q) is not positive";
    }
  }
  m.c2b = boundary_polynomial(m.q, A, B, s, bc);
  return m;
}

const NamedCheck* Certificate::check(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

bool mu_admissible(const Certificate& c, double mu) {
  const RiemannFields& f = c.fields;
  const int e = f.grid.n - 1;
  const double L = f.grid.L;
  const double A = f.lambda1(e) * c.w.f1(e);
  const double B = f.lambda2(e) * c.w.f2(e);
  const double s = std::sqrt(f.H1(e) / f.g);
  const double lmin = std::min(f.lambda1.minCoeff(), f.lambda2.minCoeff());
  const double k1 = c.bc.k1;
  const double k3 = c.bc.k3;
  const double em = std::exp(-mu * L);
  const double ep = std::exp(mu * L);
  const double a = A * em - B * ep * k1 * k1;
  const double cc = c.q * s * k3 - B * ep * k3 * k3 - mu * lmin * c.q;
  const double b = 2.0 * B * ep * k3 * k1 - c.q * s * (k1 - 1.0);
  if (!(a > 0.0 && cc > 0.0 && 4.0 * a * cc - b * b > 0.0)) return false;
  if (!(c.boundary.c1 > 0.0)) return false;

  const Field wm = (-mu * f.grid.x).exp();
  const Field wp = (mu * f.grid.x).exp();
  const Field p = c.interior.c3a * wm;
  const Field r = c.interior.c3c * wp;
  const Field m = f.gamma2 * c.w.f1 * wm + f.delta1 * c.w.f2 * wp;
  return p.minCoeff() > 0.0 && r.minCoeff() > 0.0 &&
         (p * r - m.square()).minCoeff() > 0.0;
}

namespace {

void attempt(Certificate& c, const CertifyOptions& opt, double eps) {
  const Field& dtH1 = opt.dtH1;
  c.chi = chi_solve(c.fields, dtH1, eps);
  c.epsilon = eps;
  c.chi_prime = chi_rhs(c.fields, dtH1, c.chi) + eps;
  c.w = build_weights(c.fields, c.chi);
  c.interior = check_interior(c.fields, c.w, opt.dtf1, opt.dtf2, c.chi, c.chi_prime);
  c.boundary = check_boundary_and_select_q(c.fields, c.w, c.bc);
  c.q = c.boundary.q;
}

bool margins_positive(const Certificate& c) {
  return c.boundary.c1 > 0.0 && c.boundary.c2a > 0.0 && c.boundary.c2b > 0.0 &&
         c.interior.min_c3a > 0.0 && c.interior.min_c3b > 0.0;
}

void fill_checks(Certificate& c) {
  c.checks = {
      {"c1", c.boundary.c1, c.boundary.c1 > 0.0},
      {"c2a", c.boundary.c2a, c.boundary.c2a > 0.0},
      {"c2b", c.boundary.c2b, c.boundary.c2b > 0.0},
      {"c3a", c.interior.min_c3a, c.interior.min_c3a > 0.0},
      {"c3b", c.interior.min_c3b, c.interior.min_c3b > 0.0},
  };
}

}  // namespace

Certificate certify(const ChannelConfig& cfg, const Profile& base, double k_p,
                    double k_I, const CertifyOptions& opt) {
  Certificate c;
  c.k_p = k_p;
  c.k_I = k_I;
  try {
    c.fields = riemann_fields(cfg, base);
    c.gains = check_gains(cfg, base, k_p, k_I);
    if (c.gains.branch == Branch::rejected) {
      c.diagnostic = "gains rejected: neither stability branch holds";
      return c;
    }
    c.bc = boundary_coefficients(cfg, base, k_p, k_I);
    const double eps0 =
        opt.epsilon.value_or(1e-2 * c.fields.lambda2(0) / c.fields.lambda1(0));
    std::string last_error;
    bool built = false;
    for (int i = 0; i <= opt.epsilon_halvings; ++i) {
      const double eps = eps0 * std::ldexp(1.0, -i);
      try {
        attempt(c, opt, eps);
        built = true;
        last_error.clear();
        if (margins_positive(c)) break;
      } catch (const CertificateInfeasible& e) {
        last_error = e.what();
      }
    }
    if (!built) {
      c.diagnostic = last_error;
      return c;
    }
    fill_checks(c);
    if (!margins_positive(c)) {
      c.diagnostic = c.boundary.diagnostic.empty()
                         ? "a certificate condition has non-positive margin"
                         : c.boundary.diagnostic;
      return c;
    }
    const double mu0 = opt.mu0.value_or(0.5 / cfg.L);
    for (int i = 0; i <= opt.mu_halvings; ++i) {
      const double mu = mu0 * std::ldexp(1.0, -i);
      if (mu_admissible(c, mu)) {
        c.mu = mu;
        break;
      }
    }
    c.checks.push_back({"mu", c.mu, c.mu > 0.0});
    if (!(c.mu > 0.0)) {
      c.diagnostic = "no admissible mu found by halving";
      return c;
    }
    c.valid = true;
  } catch (const Error& e) {
    c.valid = false;
    c.diagnostic = e.what();
  }
  return c;
}

std::vector<Certificate> certify_along(const ChannelConfig& cfg,
                                       const std::vector<Profile>& targets,
                                       double dt, double k_p, double k_I,
                                       const CertifyOptions& opt) {
  if (targets.empty()) return {};
  if (!(dt > 0.0)) throw DomainError("certify_along: dt must be positive");
  const double dx = targets.front().grid.dx;
  std::vector<Field> dtH1(targets.size());
  for (std::size_t j = 0; j < targets.size(); ++j) {
    dtH1[j] = -d_dx(targets[j].H * targets[j].V, dx);
  }

  double eps = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < targets.size(); ++j) {
    CertifyOptions o = opt;
    o.dtH1 = dtH1[j];
    const Certificate c = certify(cfg, targets[j], k_p, k_I, o);
    if (c.epsilon > 0.0) eps = std::min(eps, c.epsilon);
  }
  if (!std::isfinite(eps)) eps = opt.epsilon.value_or(0.0);

  std::vector<Certificate> pass;
  pass.reserve(targets.size());
  for (std::size_t j = 0; j < targets.size(); ++j) {
    CertifyOptions o = opt;
    o.epsilon = eps;
    o.epsilon_halvings = 0;
    o.dtH1 = dtH1[j];
    pass.push_back(certify(cfg, targets[j], k_p, k_I, o));
  }
  if (targets.size() < 2) return pass;

  std::vector<Certificate> out;
  out.reserve(targets.size());
  const std::size_t m = targets.size();
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t lo = j == 0 ? 0 : j - 1;
    const std::size_t hi = j + 1 == m ? j : j + 1;
    const double span = dt * static_cast<double>(hi - lo);
    CertifyOptions o = opt;
    o.epsilon = eps;
    o.epsilon_halvings = 0;
    o.dtH1 = dtH1[j];
    if (pass[lo].w.f1.size() && pass[hi].w.f1.size()) {
      o.dtf1 = (pass[hi].w.f1 - pass[lo].w.f1) / span;
      o.dtf2 = (pass[hi].w.f2 - pass[lo].w.f2) / span;
    }
    out.push_back(certify(cfg, targets[j], k_p, k_I, o));
  }
  return out;
}

}  // namespace svpi
