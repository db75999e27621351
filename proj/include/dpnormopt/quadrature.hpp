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

#ifndef DPNORMOPT_QUADRATURE_HPP_
#define DPNORMOPT_QUADRATURE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpnormopt {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::int64_t evaluations = 0;
  bool converged = false;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, QuadratureResult partial)
      : std::runtime_error(what), partial_(partial) {}
  const QuadratureResult& partial() const { return partial_; }

 private:
  QuadratureResult partial_;
};

namespace gk {

// Gauss-Kronrod 7-15 pair on [-1, 1]; nodes are symmetric about zero.
inline constexpr double kNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kKronrodW[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGaussW[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

}  // namespace gk

// One Gauss-Kronrod 15-point panel; err is the standard QUADPACK estimate.
template <class F>
double gk15_panel(F&& f, double a, double b, double* err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  double kronrod = 0.0, gauss = 0.0, resabs = 0.0;
  for (int j = 0; j < 8; ++j) {
    const double x = gk::kNodes[j] * h;
    const double f1 = f(c - x);
    const double f2 = (j == 7) ? f1 : f(c + x);
    fv[j] = f1;
    fv[14 - j] = f2;
    const double sum = (j == 7) ? f1 : f1 + f2;
    kronrod += gk::kKronrodW[j] * sum;
    resabs += gk::kKronrodW[j] * (std::abs(f1) + ((j == 7) ? 0.0 : std::abs(f2)));
    if (j % 2 == 1) gauss += gk::kGaussW[j / 2] * sum;
  }
  const double mean = 0.5 * kronrod;
  double resasc = gk::kKronrodW[7] * std::abs(fv[7] - mean);
  for (int j = 0; j < 7; ++j) {
    resasc += gk::kKronrodW[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
  }
  kronrod *= h;
  gauss *= h;
  resabs *= std::abs(h);
  resasc *= std::abs(h);
  double e = std::abs(kronrod - gauss);
  if (resasc != 0.0 && e != 0.0) {
    e = resasc * std::min(1.0, std::pow(200.0 * e / resasc, 1.5));
  }
  if (err != nullptr) *err = e;
  return kronrod;
}

// Globally adaptive integration of f over [a, b]. Optional breakpoints seed
// the initial subdivision (useful when the integrand has known kinks).
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double rel_tol,
                                    double abs_tol, int max_panels = 4000,
                                    const std::vector<double>* breakpoints = nullptr) {
  struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  QuadratureResult result;
  if (!(b > a)) throw std::invalid_argument("integrate_adaptive: requires a < b");

  std::vector<double> edges;
  edges.push_back(a);
  if (breakpoints != nullptr) {
    for (double t : *breakpoints) {
      if (t > a && t < b) edges.push_back(t);
    }
    std::sort(edges.begin(), edges.end());
  }
  edges.push_back(b);

  std::priority_queue<Panel> heap;
  double total = 0.0, total_err = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i + 1] > edges[i])) continue;
    double e = 0.0;
    const double v = gk15_panel(f, edges[i], edges[i + 1], &e);
    result.evaluations += 15;
    heap.push({edges[i], edges[i + 1], v, e});
    total += v;
    total_err += e;
  }

  const auto tolerance = [&] { return std::max(abs_tol, rel_tol * std::abs(total)); };
  while (total_err > tolerance() && static_cast<int>(heap.size()) < max_panels) {
    Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) break;  // interval at double resolution
    heap.pop();
    double e1 = 0.0, e2 = 0.0;
    const double v1 = gk15_panel(f, worst.a, mid, &e1);
    const double v2 = gk15_panel(f, mid, worst.b, &e2);
    result.evaluations += 30;
    total += v1 + v2 - worst.value;
    total_err += e1 + e2 - worst.error;
    heap.push({worst.a, mid, v1, e1});
    heap.push({mid, worst.b, v2, e2});
  }

  result.value = total;
  result.error_estimate = total_err;
  result.converged = total_err <= tolerance();
  return result;
}

// As integrate_adaptive, but a missed tolerance is a failure.
template <class F>
QuadratureResult integrate_strict(F&& f, double a, double b, double rel_tol,
                                  double abs_tol, int max_panels = 4000,
                                  const std::vector<double>* breakpoints = nullptr) {
  QuadratureResult r = integrate_adaptive(f, a, b, rel_tol, abs_tol, max_panels, breakpoints);
  if (!r.converged) {
    throw QuadratureError(
        "quadrature did not reach tolerance within the subdivision budget (value=" +
            std::to_string(r.value) + ", error=" + std::to_string(r.error_estimate) + ")",
        r);
  }
  return r;
}

}  // namespace dpnormopt

#endif  // DPNORMOPT_QUADRATURE_HPP_
