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

#include "dpnormopt/optimize.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace dpnormopt {

double golden_section_min(const std::function<double(double)>& f, double a,
                          double b, double x_tol) {
  if (!(b >= a)) throw std::invalid_argument("golden_section_min: requires a <= b");
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > x_tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

Vec norm_subgradient(const NormSpec& spec, const Vec& v) {
  if (v.size() != spec.dim()) throw std::invalid_argument("norm_subgradient: dimension mismatch");
  const double p = spec.p();
  if (spec.kind() == NormKind::kVectorLp) {
    Vec g = Vec::Zero(v.size());
    const double n = lp_norm(v, p);
    if (n == 0.0) return g;
    if (p == kInfinity) {
      Eigen::Index j = 0;
      v.cwiseAbs().maxCoeff(&j);
      g[j] = v[j] >= 0.0 ? 1.0 : -1.0;
      return g;
    }
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (v[i] == 0.0) continue;
      const double s = v[i] > 0.0 ? 1.0 : -1.0;
      g[i] = s * std::pow(std::abs(v[i]) / n, p - 1.0);
    }
    return g;
  }
  // Schatten: d||M||_p = U diag((sigma/||sigma||_p)^(p-1)) V^T on the
  // singular triplets (top pair only for p = inf).
  Eigen::Map<const Mat> m(v.data(), spec.rows(), spec.cols());
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec sigma = svd.singularValues();
  const double n = lp_norm(sigma, p);
  if (n == 0.0) return Vec::Zero(v.size());
  Vec w(sigma.size());
  if (p == kInfinity) {
    w.setZero();
    w[0] = 1.0;
  } else {
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
      w[i] = sigma[i] == 0.0 ? 0.0 : std::pow(sigma[i] / n, p - 1.0);
    }
  }
  Mat grad = svd.matrixU() * w.asDiagonal() * svd.matrixV().transpose();
  return Eigen::Map<const Vec>(grad.data(), grad.size());
}

namespace {

// Separating subgradient for a point outside the domain.
Vec separation_cut(const Domain& dom, const Vec& x) {
  if (dom.is_box()) {
    Vec g = Vec::Zero(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] > dom.hi()[i]) {
        g[i] = 1.0;
        return g;
      }
      if (x[i] < dom.lo()[i]) {
        g[i] = -1.0;
        return g;
      }
    }
    return g;
  }
  return norm_subgradient(dom.shape_norm(), Vec(x - dom.center()));
}

}  // namespace

MinimizeResult minimize_convex(const std::function<double(const Vec&)>& f,
                               const std::function<Vec(const Vec&)>& subgradient,
                               const Domain& dom, double tol, int max_iter) {
  const int d = dom.dim();
  MinimizeResult result;

  if (d == 1) {
    double lo, hi;
    if (dom.is_box()) {
      lo = dom.lo()[0];
      hi = dom.hi()[0];
    } else {
      lo = dom.center()[0] - dom.radius();
      hi = dom.center()[0] + dom.radius();
    }
    const auto f1 = [&](double t) { return f(Vec::Constant(1, t)); };
    const double xs = golden_section_min(f1, lo, hi, std::max(1e-13, 1e-12 * (hi - lo)));
    result.x = Vec::Constant(1, xs);
    result.value = f1(xs);
    result.converged = true;
    return result;
  }

  // Ellipsoid method. E_t = {x_t + P^(1/2) u : ||u|| <= 1} always contains
  // the minimizer set, so at a feasible center sqrt(g'Pg) bounds the gap.
  const double r0 = euclidean_circumradius(dom);
  Vec x = dom.interior_point();
  Mat P = (r0 * r0) * Mat::Identity(d, d);
  if (max_iter <= 0) max_iter = std::max(4000, 2 * d * (d + 1) * 64);

  bool have_best = false;
  Vec best_x;
  double best_val = kInfinity;
  const double dd = static_cast<double>(d);

  for (int it = 0; it < max_iter; ++it) {
    result.iterations = it + 1;
    Vec g;
    if (domain_membership(dom, x)) {
      const double val = f(x);
      if (!have_best || val < best_val) {
        best_val = val;
        best_x = x;
        have_best = true;
      }
      g = subgradient(x);
      const double gamma = std::sqrt(std::max(0.0, g.dot(P * g)));
      if (gamma <= tol) {
        result.converged = true;
        break;
      }
    } else {
      g = separation_cut(dom, x);
    }
    Vec Pg = P * g;
    const double gamma = std::sqrt(std::max(0.0, g.dot(Pg)));
    if (gamma <= 0.0) {
      result.converged = have_best;
      break;
    }
    Pg /= gamma;
    x -= Pg / (dd + 1.0);
    P = (dd * dd / (dd * dd - 1.0)) * (P - (2.0 / (dd + 1.0)) * (Pg * Pg.transpose()));
    P = 0.5 * (P + P.transpose());
  }

  if (!have_best) {
    result.x = dom.interior_point();
    result.value = f(result.x);
    result.converged = false;
    return result;
  }
  result.x = best_x;
  result.value = best_val;
  return result;
}

}  // namespace dpnormopt
