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

#ifndef DPNORMOPT_SAMPLERS_HPP_
#define DPNORMOPT_SAMPLERS_HPP_

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpnormopt/rng.hpp"
#include "dpnormopt/target.hpp"

namespace dpnormopt {

enum class SamplerMethod { kExact1D, kHitAndRun, kMala };

struct SamplerConfig {
  SamplerMethod method = SamplerMethod::kHitAndRun;
  int burn_in = -1;    // < 0 selects the default 50 * dim
  int thinning = -1;   // < 0 selects the default dim
  int n_samples = 1;
  double step_size = 0.0;  // <= 0 selects an automatic initial MALA step
  double quadrature_tol = 1e-10;  // must lie in (0, 1e-6]
  std::int64_t max_queries = 50'000'000;
};

struct SamplerReport {
  std::int64_t value_queries = 0;
  double acceptance_rate = std::numeric_limits<double>::quiet_NaN();
  double ess_estimate = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  std::string diagnostics;
};

// Thrown when a sampler cannot complete (query budget exhausted, acceptance
// collapse, quadrature breakdown). Carries the partial report.
class SamplerFailure : public std::runtime_error {
 public:
  SamplerFailure(const std::string& what, SamplerReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const SamplerReport& report() const { return report_; }

 private:
  SamplerReport report_;
};

// Exact sampler for a one-dimensional density exp(-f) on [a, b], f convex.
// Construction locates the mode, subtracts it for stability, and builds an
// adaptively refined Gauss-Kronrod panel table; draws invert the CDF with a
// bracketed Newton iteration. Every evaluation of f is counted into
// *eval_counter when provided. Known breakpoints of f seed the panel
// boundaries, so piecewise-smooth f converges at smooth rates per panel.
class Exact1DSampler {
 public:
  Exact1DSampler(std::function<double(double)> f, double a, double b, double tol,
                 std::int64_t* eval_counter = nullptr,
                 const std::vector<double>* breakpoints = nullptr);

  double draw(Rng& rng) const;
  double cdf(double t) const;
  double mode() const { return mode_; }
  double total_mass() const { return total_; }  // of exp(-(f - f(mode)))

 private:
  struct Panel {
    double a, b, mass, cum;  // cum excludes this panel's own mass
  };
  double g(double t) const;  // exp(-(f(t) - fmin))
  double partial_mass(double from, double to) const;

  std::function<double(double)> f_;
  std::int64_t* counter_;
  double a_, b_, mode_, fmin_, total_;
  std::vector<Panel> panels_;
};

// Draw n values from the density exp(-neg_log) on [a, b] by exact inversion.
std::pair<std::vector<double>, SamplerReport> sample_exact_1d(
    const std::function<double(double)>& neg_log, double a, double b, int n,
    double tol, std::uint64_t seed);

// Hit-and-run: uniform random direction, exact draw from the 1D conditional
// on the chord. Chains start at the domain's interior point.
std::pair<std::vector<Vec>, SamplerReport> sample_hit_and_run(
    const GibbsTarget& target, const SamplerConfig& config, std::uint64_t seed);

// Metropolis-adjusted Langevin with step-size adaptation during burn-in
// (target acceptance 0.55 +- 0.1) and proposals outside the domain rejected.
std::pair<std::vector<Vec>, SamplerReport> sample_mala(
    const GibbsTarget& target, const SamplerConfig& config, std::uint64_t seed);

// Histogram total-variation distance between samples and a reference density
// (unnormalized; normalized over the binned range internally).
double tv_distance_estimate(const std::vector<double>& samples,
                            const std::function<double(double)>& density,
                            double lo, double hi, int bins);
double tv_distance_estimate_2d(const std::vector<Vec>& samples,
                               const std::function<double(const Vec&)>& density,
                               const Vec& lo, const Vec& hi, int bins_per_axis);

// Effective sample size of a scalar series under an initial-positive-sequence
// autocorrelation estimate.
double effective_sample_size(const std::vector<double>& series);

}  // namespace dpnormopt

#endif  // DPNORMOPT_SAMPLERS_HPP_
