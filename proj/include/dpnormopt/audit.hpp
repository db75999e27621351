// Copyright 2026 The dpnormopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPNORMOPT_AUDIT_HPP_
#define DPNORMOPT_AUDIT_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dpnormopt/geometry.hpp"
#include "dpnormopt/target.hpp"

namespace dpnormopt {

// Privacy curve of a unit-variance Gaussian pair at distance t:
// Phi(t/2 - eps/t) - e^eps Phi(-t/2 - eps/t), zero at t = 0. Symmetric in
// the sign of t; the deep-tail branch is evaluated in log space so large
// eps cannot overflow. Result clamped to [0, 1].
double gaussian_curve(double t, double epsilon);

// log of the standard normal CDF, accurate into the deep lower tail.
double log_std_normal_cdf(double x);

struct PrivacyCurveOptions {
  double quad_tol = 1e-10;      // relative tolerance of the normalizations
  int grid_points = 4096;       // bracketing grid for boundary roots
  int max_sign_changes = 64;    // beyond this the input is rejected
  std::vector<double> breakpoints;  // known kinks, seeds the quadrature
};

// delta(P||Q)(eps) = sup_S Q(S) - e^eps P(S) for P ~ exp(-p_neg_log) and
// Q ~ exp(-q_neg_log) on [a, b]. The supremum is attained on the
// likelihood-ratio superlevel set {q > e^eps p}, whose boundary roots are
// bracketed on a grid and bisected to 1e-12.
double privacy_curve_1d(const std::function<double(double)>& p_neg_log,
                        const std::function<double(double)>& q_neg_log,
                        double a, double b, double epsilon,
                        const PrivacyCurveOptions& options = {});

// A randomized pair (F, F + alpha) on [a, b]:
//   F(x)     = mu_sc/2 (x - center)^2
//            + sum_j quad_w[j] max(0, x - knot[j])^2
//            + sum_j lin_v[j]  max(0, x - knot[j])
//   alpha(x) = offset + slope[0] (x - a) + sum_j (slope[j+1] - slope[j]) max(0, x - knot[j])
// Construction keeps every lin_v[j] >= max(0, -(slope[j+1] - slope[j])), so
// both F and F + alpha are mu_sc-strongly convex, and g_lip = max |slope|.
struct AuditInstance1D {
  double a = -1.0, b = 1.0;
  double mu_sc = 1.0;
  double g_lip = 1.0;
  double center = 0.0;
  std::vector<double> knots;
  std::vector<double> quad_w;
  std::vector<double> lin_v;
  std::vector<double> alpha_slopes;  // one more entry than knots
  double alpha_offset = 0.0;

  double F(double x) const;
  double alpha(double x) const;
  const std::vector<double>& breakpoints() const { return knots; }
  void validate() const;  // input error when any invariant fails
};

struct AuditGenConfig {
  std::pair<double, double> mu_range = {0.3, 4.0};
  std::pair<double, double> g_range = {0.2, 2.0};
  std::pair<double, double> half_width_range = {2.0, 6.0};
  int min_knots = 3;
  int max_knots = 8;
};

std::vector<AuditInstance1D> generate_audit_instances(
    int count, std::uint64_t seed, const AuditGenConfig& config = {});

struct TheoremAuditRow {
  double epsilon = 0.0;
  double lhs_delta = 0.0;  // privacy curve of the instance pair
  double rhs_delta = 0.0;  // gaussian_curve(g_lip / sqrt(mu_sc), epsilon)
  bool swapped = false;    // true for the (F + alpha, F) ordering
  double margin = 0.0;     // rhs - lhs
  bool pass = false;
};

struct TheoremAuditReport {
  int instance_id = 0;
  std::vector<TheoremAuditRow> rows;
  bool pass = false;
};

// Checks delta(P||Q)(eps) <= gaussian_curve(g_lip/sqrt(mu_sc), eps) for
// P ~ exp(-F), Q ~ exp(-(F + alpha)), in both orderings, on each epsilon.
TheoremAuditReport audit_theorem_gdp(const AuditInstance1D& instance,
                                     const std::vector<double>& epsilons,
                                     double tol = 1e-8);

enum class RiskCheckMethod { kQuadrature, kMonteCarlo };

struct GibbsRiskReport {
  double gap = 0.0;    // E_nu[F] - min F for nu ~ exp(-k F)
  double bound = 0.0;  // dim / k
  double std_error = 0.0;  // zero for quadrature
  bool pass = false;
  std::string notes;
};

// Verifies E_nu[F] <= min F + dim/k. Quadrature supports dim <= 2 (boxes
// and vector-norm balls); Monte Carlo uses hit-and-run at any desk dim.
GibbsRiskReport gibbs_risk_check(const std::function<double(const Vec&)>& F,
                                 const Domain& domain, double k,
                                 RiskCheckMethod method, std::uint64_t seed = 1,
                                 int n_samples = 4000);

struct ConcentrationRow {
  double t = 0.0;
  double empirical_tail = 0.0;
  double bound = 0.0;  // exp(-t^2 mu / (2 G_ell^2))
  double slack = 0.0;
  bool pass = false;
};

struct ConcentrationReport {
  std::vector<ConcentrationRow> rows;
  bool pass = false;
  double mean_ell = 0.0;
  double ess = 0.0;
};

// Tail check Pr[ell(X) - E ell(X) >= t] <= exp(-t^2 mu/(2 G_ell^2)) with
// binomial 3 sigma slack, X drawn from the target by hit-and-run.
ConcentrationReport concentration_check(const GibbsTarget& target,
                                        const std::function<double(const Vec&)>& ell,
                                        double G_ell,
                                        const std::vector<double>& t_grid,
                                        int n_samples, std::uint64_t seed);

}  // namespace dpnormopt

#endif  // DPNORMOPT_AUDIT_HPP_
