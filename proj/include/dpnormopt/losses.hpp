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

#ifndef DPNORMOPT_LOSSES_HPP_
#define DPNORMOPT_LOSSES_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dpnormopt/geometry.hpp"

namespace dpnormopt {

// Convex, Lipschitz per-sample losses of the margin <a, x>:
//   linear      f(x; a)    = <a, x>
//   abs-linear  f(x; a, b) = |<a, x> - b|
//   hinge       f(x; a, b) = max(0, 1 - b <a, x>),  b in {-1, +1}
enum class LossFamily { kLinear, kAbsLinear, kHinge };

struct Sample {
  Vec a;
  double b = 0.0;
};

// A dataset bound to a loss family and an ambient norm. The Lipschitz
// constant G of every per-sample loss in ||.||_norm is the dual norm of its
// feature vector; lipschitz_bound() is the maximum over the dataset.
class LossModel {
 public:
  LossModel(LossFamily family, const NormSpec& norm, std::vector<Sample> data);

  LossFamily family() const { return family_; }
  const NormSpec& norm() const { return norm_; }
  int n() const { return static_cast<int>(data_.size()); }
  int dim() const { return norm_.dim(); }
  const std::vector<Sample>& data() const { return data_; }
  double lipschitz_bound() const { return lipschitz_; }

  double sample_loss(const Vec& x, int index) const;
  Vec sample_subgradient(const Vec& x, int index) const;

  double empirical_risk(const Vec& x) const;
  Vec risk_subgradient(const Vec& x) const;

  // Margins <a_i, x> for all samples at once (one matrix-vector product) and
  // the mean loss as a function of the margins. Together they let callers
  // evaluate the risk along a line in O(n) per point.
  Vec margins(const Vec& x) const;
  double risk_from_margins(const Vec& margins) const;
  // Mean loss at margins m0 + t * mu without forming the shifted vector.
  double risk_along(const Vec& m0, const Vec& mu, double t) const;
  // t -> empirical_risk(x0 + t*u) in O(log n) per evaluation after an
  // O(n (d + log n)) precomputation, with the restriction's kink locations.
  // The per-sample losses are piecewise linear in t, so sorted kinks plus
  // prefix sums evaluate the sum exactly.
  LineFunction risk_line(const Vec& x0, const Vec& u) const;

  LossModel with_replaced(int index, Sample s) const;

 private:
  LossFamily family_;
  NormSpec norm_;
  std::vector<Sample> data_;
  Mat features_;  // n x dim
  double lipschitz_ = 0.0;
};

double empirical_risk(const LossModel& model, const Vec& x);

// Swap-one-sample neighboring dataset.
LossModel neighboring_perturbation(const LossModel& model, int index, const Sample& s);

// Worst observed ratio |F(x) - F(y)| / ||x - y|| over random pairs in dom,
// measured in the model norm. Never exceeds lipschitz_bound().
double lipschitz_audit(const LossModel& model, const Domain& dom, int trials,
                       std::uint64_t seed);
double lipschitz_audit(const std::function<double(const Vec&)>& f,
                       const NormSpec& norm, const Domain& dom, int trials,
                       std::uint64_t seed);

// CSV with mandatory header a_1,...,a_d[,b]; one sample per row. The label
// column is required for abs-linear and hinge, optional (ignored) for linear.
LossModel load_dataset_csv(const std::string& path, LossFamily family,
                           const NormSpec& norm);

// A sampleable data distribution with an optional known population minimizer.
struct PopulationSpec {
  LossFamily family = LossFamily::kAbsLinear;
  NormSpec norm = NormSpec::vector_lp(2.0, 1);
  std::function<Sample(Rng&)> generator;
  Vec reference_minimizer;  // empty when unknown
};

struct PopulationEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int m = 0;
};

// Monte Carlo estimate of the population risk at x from m fresh samples.
// Deterministic for a fixed seed.
PopulationEstimate population_risk_estimate(const PopulationSpec& pop, const Vec& x,
                                            int m, std::uint64_t seed);

// abs-linear losses with features uniform on the dual-norm unit sphere and
// labels b = <a, minimizer>; the population risk is minimized at minimizer
// with value 0.
PopulationSpec abs_linear_population(const NormSpec& norm, const Vec& minimizer);

}  // namespace dpnormopt

#endif  // DPNORMOPT_LOSSES_HPP_
