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

#ifndef DPNORMOPT_MECHANISM_HPP_
#define DPNORMOPT_MECHANISM_HPP_

#include <string>

#include "dpnormopt/losses.hpp"
#include "dpnormopt/optimize.hpp"
#include "dpnormopt/regularizers.hpp"
#include "dpnormopt/samplers.hpp"
#include "dpnormopt/target.hpp"

namespace dpnormopt {

enum class Variant { kErm, kSco, kScErm, kScSco };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);

// Parameters of the mechanism that releases one sample from the density
// proportional to exp(-k (F_D + mu r)). For the sc-* variants mu is zero
// (the sample losses carry their own strong convexity mu_loss) and the
// target is exp(-k F_D).
struct MechanismParams {
  double k = 0.0;
  double mu = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  Variant variant = Variant::kErm;
  double c = 2.0;        // sensitivity factor: 2 worst-case, 1 paper constants
  double mu_loss = 0.0;  // per-sample strong convexity (sc-* variants)
};

// log(1/(2 delta)), the log factor appearing in every selector and bound.
double privacy_log_factor(double delta);

// The weight mu implied by k so that c G sqrt(k) / (n sqrt(mu)) equals
// epsilon / sqrt(2 log(1/(2 delta))). Selectors derive mu from k through
// this function, so the identity holds to rounding.
double mu_from_k(double G, double c, double k, int n, double epsilon, double delta);

// k = sqrt(d) n eps / (c G sqrt(2 Theta log(1/(2 delta)))).
MechanismParams erm_params(double G, double Theta, int d, int n, double epsilon,
                           double delta, double c = 2.0);

// k = sqrt((d + C2)/C1) with C1 = 2 (cG)^2 Theta log(1/(2 delta)) / (n eps)^2
// and C2 = n eps^2 / (2 log(1/(2 delta))).
MechanismParams sco_params(double G, double Theta, int d, int n, double epsilon,
                           double delta, double c = 2.0);

// k = n^2 eps^2 mu_loss / (2 (cG)^2 log(1/(2 delta))), no added regularizer.
MechanismParams sc_erm_params(double G, double mu_loss, int n, double epsilon,
                              double delta, double c = 2.0);
MechanismParams sc_sco_params(double G, double mu_loss, int n, double epsilon,
                              double delta, double c = 2.0);

// Published expected-gap guarantees (stated for sensitivity factor 1; with
// factor c the guaranteed gap for the erm/sco selectors is c times larger).
double erm_utility_bound(double G, double Theta, int d, int n, double epsilon,
                         double delta);
double sco_utility_bound(double G, double Theta, int d, int n, double epsilon,
                         double delta);
double sc_erm_utility_bound(double G, double mu_loss, int d, int n, double epsilon,
                            double delta);
double sc_sco_utility_bound(double G, double mu_loss, int d, int n, double epsilon,
                            double delta);

// Gibbs target k (F_D + mu r) over the regularizer's domain (sc-*: k F_D).
// The target borrows model and reg; both must outlive it.
GibbsTarget build_target(const LossModel& model, const Regularizer& reg,
                         const MechanismParams& params);
// sc-* variants only: no regularizer, explicit domain.
GibbsTarget build_target(const LossModel& model, const Domain& domain,
                         const MechanismParams& params);

struct SolveReport {
  SamplerReport sampler;
  double utility_bound = 0.0;  // published bound for the variant
  double epsilon = 0.0;
  double delta_mech = 0.0;  // privacy delta of the exact mechanism
  double delta_tv = 0.0;    // sampling total-variation budget
  double delta_total = 0.0;
};

// One draw from the mechanism. delta_tv defaults (NaN) to params.delta, so
// the reported total is delta_mech + delta_tv per the equal-split budget.
std::pair<Vec, SolveReport> solve_private(
    const LossModel& model, const Regularizer& reg, const MechanismParams& params,
    const SamplerConfig& config, std::uint64_t seed,
    double delta_tv = std::numeric_limits<double>::quiet_NaN());
std::pair<Vec, SolveReport> solve_private(
    const LossModel& model, const Domain& domain, const MechanismParams& params,
    const SamplerConfig& config, std::uint64_t seed,
    double delta_tv = std::numeric_limits<double>::quiet_NaN());

// Non-private reference optimum of the empirical risk (diagnostics only).
MinimizeResult minimize_empirical_risk(const LossModel& model, const Domain& domain,
                                       double tol = 1e-6);

}  // namespace dpnormopt

#endif  // DPNORMOPT_MECHANISM_HPP_
