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

#ifndef DPNORMOPT_OPTIMIZE_HPP_
#define DPNORMOPT_OPTIMIZE_HPP_

#include <functional>

#include "dpnormopt/geometry.hpp"

namespace dpnormopt {

struct MinimizeResult {
  Vec x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Argmin of a unimodal function on [a, b] by golden-section search, to
// absolute x tolerance x_tol.
double golden_section_min(const std::function<double(double)>& f, double a,
                          double b, double x_tol);

// Minimizes a convex function over a compact convex domain. Dimension one is
// solved by golden section; higher dimensions by the ellipsoid method with
// subgradient cuts (separation cuts outside the domain), stopping when the
// certified objective gap falls below tol.
MinimizeResult minimize_convex(const std::function<double(const Vec&)>& f,
                               const std::function<Vec(const Vec&)>& subgradient,
                               const Domain& dom, double tol = 1e-6,
                               int max_iter = 0);

// Subgradient of the norm at v (any nonzero choice from the subdifferential
// at kinks; zero vector at v = 0).
Vec norm_subgradient(const NormSpec& spec, const Vec& v);

}  // namespace dpnormopt

#endif  // DPNORMOPT_OPTIMIZE_HPP_
