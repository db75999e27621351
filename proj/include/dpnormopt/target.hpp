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

#ifndef DPNORMOPT_TARGET_HPP_
#define DPNORMOPT_TARGET_HPP_

#include <functional>

#include "dpnormopt/geometry.hpp"

namespace dpnormopt {

// An unnormalized log-concave target: density proportional to
// exp(-neg_log_density(x)) restricted to domain. Immutable once built;
// samplers never mutate it and may share one instance across chains.
struct GibbsTarget {
  explicit GibbsTarget(Domain dom) : domain(std::move(dom)) {}

  Domain domain;
  std::function<double(const Vec&)> neg_log_density;
  // Any subgradient of neg_log_density (used by gradient-based samplers).
  std::function<Vec(const Vec&)> gradient;
  // Strong convexity of neg_log_density in the domain's context norm.
  double strong_convexity = 0.0;
  // Bound on the Lipschitz constant (same norm) of the difference between
  // this negative log density and a neighboring dataset's.
  double lipschitz_of_difference_bound = 0.0;
  // Optional fast evaluator for t -> neg_log_density(x0 + t * u), carrying
  // the restriction's breakpoints. When unset, samplers fall back to
  // evaluating neg_log_density directly.
  std::function<LineFunction(const Vec& x0, const Vec& u)> line_restriction;
};

}  // namespace dpnormopt

#endif  // DPNORMOPT_TARGET_HPP_
