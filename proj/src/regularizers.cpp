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

#include "dpnormopt/regularizers.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace dpnormopt {
namespace {

constexpr double kE2 = 7.38905609893065;  // e^2

// Diameter of dom measured in the lp (or Schatten-p) norm with exponent
// p_measure, regardless of the domain's own context exponent.
double diameter_in(const Domain& dom, double p_measure) {
  const NormSpec& ctx = dom.norm();
  NormSpec measured = ctx.kind() == NormKind::kVectorLp
                          ? NormSpec::vector_lp(p_measure, ctx.dim())
                          : NormSpec::schatten(p_measure, ctx.rows(), ctx.cols());
  if (dom.is_box()) {
    return domain_diameter(Domain::box(measured, dom.lo(), dom.hi()));
  }
  return domain_diameter(Domain::ball(measured, dom.shape_norm(), dom.center(), dom.radius()));
}

void check_center(const Domain& dom, const Vec& x0) {
  if (x0.size() != dom.dim()) throw std::invalid_argument("regularizer center dimension mismatch");
  if (!domain_membership(dom, x0)) throw std::invalid_argument("regularizer center must lie in the domain");
}

// r(x) = coeff * ||x - x0||_q^2 for a vector lq norm, with its gradient
// 2 * coeff * ||v||_q^(2-q) * sign(v) .* |v|^(q-1).
Regularizer squared_lq(const NormSpec& geometry, const Domain& dom, double q,
                       double coeff, double theta, const Vec& x0) {
  Regularizer reg{{}, {}, {}, geometry, dom, 1.0, theta, x0};
  reg.value = [q, coeff, x0](const Vec& x) {
    const double n = lp_norm(Vec(x - x0), q);
    return coeff * n * n;
  };
  reg.line_value = [q, coeff, x0](const Vec& xs, const Vec& u) {
    LineFunction line;
    const Vec w = xs - x0;
    if (q == 2.0) {
      const double qa = u.squaredNorm();
      const double qb = 2.0 * w.dot(u);
      const double qc = w.squaredNorm();
      line.value = [coeff, qa, qb, qc](double t) { return coeff * ((qa * t + qb) * t + qc); };
      return line;
    }
    // The curvature of |w_i + t u_i|^q is unbounded at the coordinate
    // crossings when q < 2; expose them so quadrature can split there.
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      if (std::abs(u[i]) > 1e-300) line.breakpoints.push_back(-w[i] / u[i]);
    }
    std::sort(line.breakpoints.begin(), line.breakpoints.end());
    auto wv = std::make_shared<Vec>(w);
    auto uv = std::make_shared<Vec>(u);
    line.value = [q, coeff, wv, uv](double t) {
      double s = 0.0;
      const bool three_halves = q == 1.5;
      for (Eigen::Index i = 0; i < wv->size(); ++i) {
        const double a = std::abs((*wv)[i] + t * (*uv)[i]);
        s += three_halves ? a * std::sqrt(a) : std::pow(a, q);
      }
      return s > 0.0 ? coeff * std::pow(s, 2.0 / q) : 0.0;
    };
    return line;
  };
  reg.gradient = [q, coeff, x0](const Vec& x) {
    const Vec v = x - x0;
    Vec g = Vec::Zero(v.size());
    if (q == 2.0) return Vec(2.0 * coeff * v);
    const double n = lp_norm(v, q);
    if (n == 0.0) return g;
    const double scale = 2.0 * coeff * std::pow(n, 2.0 - q);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (v[i] == 0.0) continue;
      const double s = v[i] > 0.0 ? 1.0 : -1.0;
      g[i] = scale * s * std::pow(std::abs(v[i]), q - 1.0);
    }
    return g;
  };
  return reg;
}

Regularizer squared_schatten_q(const NormSpec& geometry, const Domain& dom,
                               double q, double coeff, double theta,
                               const Vec& x0_flat) {
  Regularizer reg{{}, {}, {}, geometry, dom, 1.0, theta, x0_flat};
  const int rows = geometry.rows(), cols = geometry.cols();
  const NormSpec sq = NormSpec::schatten(q, rows, cols);
  reg.value = [sq, coeff, x0_flat](const Vec& x) {
    const double n = norm_value(sq, Vec(x - x0_flat));
    return coeff * n * n;
  };
  if (q == 2.0) {
    // Schatten-2 is Frobenius, so the restriction is an explicit quadratic.
    reg.line_value = [coeff, x0_flat](const Vec& xs, const Vec& u) {
      LineFunction line;
      const Vec w = xs - x0_flat;
      const double qa = u.squaredNorm();
      const double qb = 2.0 * w.dot(u);
      const double qc = w.squaredNorm();
      line.value = [coeff, qa, qb, qc](double t) { return coeff * ((qa * t + qb) * t + qc); };
      return line;
    };
  }
  reg.gradient = [q, coeff, x0_flat, rows, cols](const Vec& x) {
    const Vec v = x - x0_flat;
    if (q == 2.0) return Vec(2.0 * coeff * v);  // Frobenius case, no SVD needed
    Eigen::Map<const Mat> m(v.data(), rows, cols);
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec sigma = svd.singularValues();
    const double n = lp_norm(sigma, q);
    if (n == 0.0) return Vec(Vec::Zero(v.size()));
    Vec w(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
      w[i] = sigma[i] == 0.0 ? 0.0 : std::pow(sigma[i], q - 1.0);
    }
    Mat grad = (2.0 * coeff * std::pow(n, 2.0 - q)) *
               (svd.matrixU() * w.asDiagonal() * svd.matrixV().transpose());
    return Vec(Eigen::Map<const Vec>(grad.data(), grad.size()));
  };
  return reg;
}

}  // namespace

Regularizer regularizer_for_lp(double p, const Domain& dom, const Vec& x0) {
  if (dom.norm().kind() != NormKind::kVectorLp) throw std::invalid_argument("regularizer_for_lp: vector geometry required");
  if (!(p >= 1.0 && p <= 2.0)) throw std::invalid_argument("regularizer_for_lp: requires p in [1, 2]");
  check_center(dom, x0);
  const int d = dom.dim();
  const NormSpec geometry = NormSpec::vector_lp(p, d);
  const double diam = diameter_in(dom, p);

  if (p > 1.0) {
    const double coeff = 1.0 / (2.0 * (p - 1.0));
    return squared_lq(geometry, dom, p, coeff, coeff * diam * diam, x0);
  }
  if (d == 1) {
    return squared_lq(geometry, dom, 2.0, 0.5, 0.5 * diam * diam, x0);
  }
  const double q = 1.0 + 1.0 / std::log(static_cast<double>(d));
  const double coeff = kE2 / (2.0 * (q - 1.0));
  return squared_lq(geometry, dom, q, coeff, coeff * diam * diam, x0);
}

Regularizer regularizer_for_lp_high(double p, const Domain& dom, const Vec& x0) {
  if (dom.norm().kind() != NormKind::kVectorLp) throw std::invalid_argument("regularizer_for_lp_high: vector geometry required");
  if (!(p >= 2.0)) throw std::invalid_argument("regularizer_for_lp_high: requires p >= 2");
  check_center(dom, x0);
  const int d = dom.dim();
  const NormSpec geometry = NormSpec::vector_lp(p, d);
  const double diam = diameter_in(dom, p);
  const double exponent = (p == kInfinity) ? 1.0 : 1.0 - 2.0 / p;
  const double theta = 0.5 * std::pow(static_cast<double>(d), exponent) * diam * diam;
  return squared_lq(geometry, dom, 2.0, 0.5, theta, x0);
}

Regularizer regularizer_for_schatten(double p, const Domain& dom, const Mat& x0) {
  if (dom.norm().kind() != NormKind::kSchattenP) throw std::invalid_argument("regularizer_for_schatten: Schatten geometry required");
  const int rows = dom.norm().rows(), cols = dom.norm().cols();
  if (x0.rows() != rows || x0.cols() != cols) throw std::invalid_argument("regularizer_for_schatten: center shape mismatch");
  if (!(p >= 1.0)) throw std::invalid_argument("regularizer_for_schatten: requires p >= 1");
  const Vec x0_flat = Eigen::Map<const Vec>(x0.data(), x0.size());
  check_center(dom, x0_flat);
  const NormSpec geometry = NormSpec::schatten(p, rows, cols);
  const double diam = diameter_in(dom, p);

  if (p >= 2.0) {
    const double exponent = (p == kInfinity) ? 1.0 : 1.0 - 2.0 / p;
    const double theta = 0.5 * std::pow(static_cast<double>(cols), exponent) * diam * diam;
    return squared_schatten_q(geometry, dom, 2.0, 0.5, theta, x0_flat);
  }
  if (p > 1.0) {
    const double coeff = 1.0 / (2.0 * (p - 1.0));
    return squared_schatten_q(geometry, dom, p, coeff, coeff * diam * diam, x0_flat);
  }
  if (cols == 1) {
    return squared_schatten_q(geometry, dom, 2.0, 0.5, 0.5 * diam * diam, x0_flat);
  }
  const double q = 1.0 + 1.0 / std::log(static_cast<double>(cols));
  const double coeff = kE2 / (2.0 * (q - 1.0));
  return squared_schatten_q(geometry, dom, q, coeff, coeff * diam * diam, x0_flat);
}

}  // namespace dpnormopt
