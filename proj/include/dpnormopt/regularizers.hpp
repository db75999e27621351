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

#ifndef DPNORMOPT_REGULARIZERS_HPP_
#define DPNORMOPT_REGULARIZERS_HPP_

#include <functional>

#include "dpnormopt/geometry.hpp"

namespace dpnormopt {

// A regularizer r that is sc_constant-strongly convex with respect to
// ||.||_norm and whose range over its domain is at most theta. All shipped
// constructions have sc_constant = 1.
struct Regularizer {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  // Optional cheap evaluator of t -> value(x0 + t*u) with the restriction's
  // curvature breakpoints; unset when the value has no line structure (the
  // Schatten constructions). Samplers fall back to value when unset.
  std::function<LineFunction(const Vec&, const Vec&)> line_value;
  NormSpec norm;
  Domain domain;
  double sc_constant = 1.0;
  double theta = 0.0;
  Vec x0;
};

// Regularizer for lp geometry with p in [1, 2], centered at x0 in dom.
//
// For p in (1, 2] this is ||x - x0||_p^2 / (2(p-1)) with
// theta = D^2 / (2(p-1)), D the lp diameter of dom. For p = 1 the squared
// norm degenerates, so the construction switches to q = 1 + 1/log(d) and
// r(x) = e^2 ||x - x0||_q^2 / (2(q-1)), which is still 1-strongly convex in
// l1 and has theta = e^2 D^2 / (2(q-1)) (plain ||x - x0||_2^2 / 2 when d=1).
Regularizer regularizer_for_lp(double p, const Domain& dom, const Vec& x0);

// Regularizer for lp geometry with p in [2, inf]: ||x - x0||_2^2 / 2, which
// is 1-strongly convex in lp, with theta = d^(1 - 2/p) D^2 / 2.
Regularizer regularizer_for_lp_high(double p, const Domain& dom, const Vec& x0);

// Schatten-p analog of the vector constructions; the singular-value count
// (cols) plays the role of d in the exponent arithmetic while the ambient
// dimension is rows*cols.
Regularizer regularizer_for_schatten(double p, const Domain& dom, const Mat& x0);

}  // namespace dpnormopt

#endif  // DPNORMOPT_REGULARIZERS_HPP_
