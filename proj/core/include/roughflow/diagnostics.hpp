#pragma once
#include <functional>
#include <string>
#include <vector>

#include "roughflow/fields.hpp"
#include "roughflow/geometry.hpp"
#include "roughflow/taylor_jet.hpp"

namespace roughflow {

/// Data of the near-wall weight: rescaled viscosity and the gradient bound m.
struct WeightSpec {
  double nu_tilde;
  double m = 1.0;
};

/// Wall-vanishing weight with phi'(0) = sqrt(m), saturating at
/// sqrt(nu_tilde * pi / 2):
///   phi(z) = sqrt(nu_tilde) * int_0^{sqrt(m/nu_tilde) z} e^{-s^2/2} ds.
double weight_phi(const WeightSpec& spec, double zt2);
double weight_phi_deriv(const WeightSpec& spec, double zt2);
double weight_phi_limit(const WeightSpec& spec);

/// Norm selector.
struct NormKind {
  enum Tag { L2, Linf, L2_phi, Hs_eps_gamma, weighted_exp } tag = L2;
  WeightSpec weight{1.0, 1.0};  // for L2_phi
  int s = 0;                    // for Hs_eps_gamma
  double gamma = 0.5;           // for Hs_eps_gamma / weighted_exp

  static NormKind l2() { return {L2, {1, 1}, 0, 0}; }
  static NormKind linf() { return {Linf, {1, 1}, 0, 0}; }
  static NormKind l2_phi(WeightSpec w) { return {L2_phi, w, 0, 0}; }
  static NormKind hs(int s, double gamma) {
    return {Hs_eps_gamma, {1, 1}, s, gamma};
  }
  static NormKind wexp(double gamma) {
    return {weighted_exp, {1, 1}, 0, gamma};
  }
};

/// Quadrature-consistent norm of a field sampled on a flattened strip grid
/// of the given scale. Exponential weights use the physical height
/// x2 = xt2 + W(x1) and samples below the field's round-off floor are
/// treated as exact zeros.
double norm(const Field& f, const NormKind& kind, const DomainParams& dom,
            DomainScale scale);

/// Analytic scalar test field: (x1, x2) jets in, value + derivatives out.
using ScalarJetField = std::function<Jet2(const Jet2&, const Jet2&)>;

struct RatioCheck {
  double ratio = 0.0;      // refined-quadrature value
  double error_est = 0.0;  // |coarse - fine| refinement estimate
  bool degenerate = false;
  bool pass(double slack = 3.0) const {
    return degenerate || ratio <= 1.0 + slack * error_est + 1e-12;
  }
};

/// ||f||_{L2(boundary)} / (C ||f||^{1/2} ||d_x2 f||^{1/2}) on the physical
/// rough domain, with the explicit constant C = sqrt(2)(1+||eta'||^2)^{1/4}.
RatioCheck trace_inequality_check(const ScalarJetField& f,
                                  const DomainParams& dom, int n1, int n2,
                                  double height);

/// Same trace ratio for divergence-free tangent fields v = perp-grad(phi) on
/// the rescaled domain, with only the curl on the right-hand side and
/// C = sqrt(2)(1+eps^{2a}||eta'||^2)^{1/4}. phi must vanish on the wall.
RatioCheck curl_trace_check(const ScalarJetField& stream, const DomainParams& dom,
                            int n1, int n2, double height);

/// ||grad v|| <= ||curl v|| + C eps^a ||v|| with
/// C = ||eta''|| sqrt(1+eps^{2a}||eta'||^2), same admissible class.
RatioCheck grad_curl_check(const ScalarJetField& stream, const DomainParams& dom,
                           int n1, int n2, double height);

/// Sampled-field variant that validates the admissibility preconditions
/// (discrete divergence, wall tangency) and throws InputError on violation.
RatioCheck curl_trace_check_field(const VectorField& v, const DomainParams& dom,
                                  double precondition_tol = 1e-8);

/// |int v.(v.grad u) - int v.u^perp curl v| normalized by ||v||^2 ||grad u||.
/// Both fields enter as stream potentials (hence div-free and tangent).
struct IdentityCheck {
  double discrepancy = 0.0;
  double normalization = 1.0;
  double normalized() const { return discrepancy / normalization; }
};
IdentityCheck stretch_identity_check(const ScalarJetField& stream_v,
                                     const ScalarJetField& stream_u,
                                     const DomainParams& dom, int n1, int n2,
                                     double height);

/// ||e^{gamma x2/eps} f(x1, x/eps)||_{L2(physical domain)} for a cell-variable
/// profile f(x1, z1, z2) with certified decay rate; throws InputError when
/// gamma reaches the decay rate.
double rescaled_l2_norm(
    const std::function<double(double, double, double)>& profile,
    double decay_rate, double gamma, const DomainParams& dom, int n1,
    double quad_tol = 1e-11);

/// Least-squares log-log fit of (eps, value) pairs; requires >= 3 points with
/// positive values.
struct RateFit {
  double slope = 0.0;
  double r2 = 0.0;
};
RateFit rate_fit(const std::vector<std::pair<double, double>>& points);

/// Structured record emitted by the property suites.
struct CheckRecord {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

}  // namespace roughflow
