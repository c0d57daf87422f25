#pragma once

// Lyapunov certificate for PI boundary control: gain gate, boundary
// reflection coefficients, the chi_eps Riccati construction, weights f1, f2,
// the interior and boundary definiteness conditions, and the choice of q, mu.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "svpi/channel.hpp"
#include "svpi/riemann.hpp"

namespace svpi {

enum class Branch { branch1, branch2, rejected };

std::string_view to_string(Branch b);

struct GainCheck {
  Branch branch = Branch::rejected;
  double threshold2 = 0.0;   // -1 - (g H1(L) - V1(L)^2) / (v_G V1(L))
  double margin_kp1 = 0.0;   // k_p + 1
  double margin_ki = 0.0;    // k_I
  double margin2 = 0.0;      // threshold2 - k_p
};

/// Classifies (k_p, k_I) against both stability branches using base values
/// at x = L. Throws DomainError if V1(L) <= 0.
GainCheck check_gains(const ChannelConfig& cfg, const Profile& base, double k_p,
                      double k_I);

struct BoundaryCoefficients {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
};

/// Throws DomainError when v_G (1 + k_p) + lambda2(L) vanishes.
BoundaryCoefficients boundary_coefficients(const ChannelConfig& cfg,
                                           const Profile& base, double k_p,
                                           double k_I);

/// chi' = phi gamma2/lambda1 + delta1 chi^2/(phi lambda2)
///        + (phi/lambda1^2) sqrt(g/H1) dtH1 + eps,
/// chi(0) = lambda2(0)/lambda1(0) + eps; RK4 with cubic midpoint values.
/// Throws CertificateInfeasible if |chi| exceeds 1e6 or chi <= 0.
Field chi_solve(const RiemannFields& f, const Field& dtH1, double eps);

/// Right-hand side of the chi equation without eps, evaluated at given chi.
Field chi_rhs(const RiemannFields& f, const Field& dtH1, const Field& chi);

struct Lemma2Report {
  double residual = 0.0;     // max |d/dx chi0 - rhs(chi0)|, chi0 = lambda2 phi/lambda1
  double min_bracket = 0.0;  // min over nodes of rhs(chi0)
  bool positive = false;
};

Lemma2Report verify_lemma2(const RiemannFields& f, const Field& dtH1);

struct Weights {
  Field f1;
  Field f2;
};

/// f1 = phi1^2/(lambda1 chi), f2 = phi2^2 chi/lambda2. Throws
/// CertificateInfeasible if chi is not positive.
Weights build_weights(const RiemannFields& f, const Field& chi);

struct InteriorMargins {
  Field c3a;    // (-lambda1 f1)_x + 2 gamma1 f1 - dt f1
  Field c3c;    // (lambda2 f2)_x + 2 delta2 f2 - dt f2
  Field cross;  // gamma2 f1 + delta1 f2
  Field c3b;    // c3a c3c - cross^2
  double min_c3a = 0.0;
  double min_c3b = 0.0;
  double identity_residual = 0.0;  // max deviation from the phi^2 chi' identities
};

/// dtf1/dtf2 may be empty (steady target). chi_prime is the exact chi' used
/// for the identity cross-check.
InteriorMargins check_interior(const RiemannFields& f, const Weights& w,
                               const Field& dtf1, const Field& dtf2,
                               const Field& chi, const Field& chi_prime);

struct BoundaryMargins {
  double c1 = 0.0;
  double c2a = 0.0;
  double c2b = 0.0;            // P(q) at the returned q
  double q = 0.0;
  double discriminant = 0.0;   // (H1/g) k3^2 B^2 h(A/B), NaN when k1 = 1
  bool linear_in_q = false;
  std::string diagnostic;
};

/// P(q) for the downstream boundary form.
double boundary_polynomial(double q, double A, double B, double s,
                           const BoundaryCoefficients& bc);

BoundaryMargins check_boundary_and_select_q(const RiemannFields& f,
                                            const Weights& w,
                                            const BoundaryCoefficients& bc);

struct NamedCheck {
  std::string name;
  double margin = 0.0;
  bool pass = false;
};

struct Certificate {
  double k_p = 0.0;
  double k_I = 0.0;
  GainCheck gains;
  BoundaryCoefficients bc;
  RiemannFields fields;
  Field chi;
  Field chi_prime;
  double epsilon = 0.0;
  Weights w;
  InteriorMargins interior;
  BoundaryMargins boundary;
  double q = 0.0;
  double mu = 0.0;
  std::vector<NamedCheck> checks;
  bool valid = false;
  std::string diagnostic;

  const NamedCheck* check(std::string_view name) const;
};

struct CertifyOptions {
  std::optional<double> epsilon;  // default 1e-2 lambda2(0)/lambda1(0)
  int epsilon_halvings = 30;
  std::optional<double> mu0;      // default 0.5/L
  int mu_halvings = 20;
  Field dtH1;                     // empty for steady targets
  Field dtf1, dtf2;
};

/// Full pipeline. Never throws for certificate-level failures; those give an
/// invalid certificate with a diagnostic. Regime errors in the base do throw.
Certificate certify(const ChannelConfig& cfg, const Profile& base, double k_p,
                    double k_I, const CertifyOptions& opt = {});

/// mu-perturbed definiteness of both quadratic forms for a built certificate.
bool mu_admissible(const Certificate& c, double mu);

/// Certificates along a time-varying target sampled every dt. dtH1 comes from
/// -d/dx(H1 V1); dt f1, dt f2 from centered differences between snapshots. A
/// common eps (the smallest needed by any snapshot) is used for all.
std::vector<Certificate> certify_along(const ChannelConfig& cfg,
                                       const std::vector<Profile>& targets,
                                       double dt, double k_p, double k_I,
                                       const CertifyOptions& opt = {});

}  // namespace svpi
