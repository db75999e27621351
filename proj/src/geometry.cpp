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

#include "dpnormopt/geometry.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace dpnormopt {
namespace {

bool valid_exponent(double p) { return p >= 1.0 && !(p != p); }

void check_dim(const NormSpec& spec, Eigen::Index size) {
  if (size != spec.dim()) throw std::invalid_argument("point dimension does not match norm");
}

}  // namespace

NormSpec NormSpec::vector_lp(double p, int d) {
  if (!valid_exponent(p)) throw std::invalid_argument("lp norm requires p >= 1");
  if (d < 1) throw std::invalid_argument("lp norm requires d >= 1");
  return NormSpec(NormKind::kVectorLp, p, d, d, 1);
}

NormSpec NormSpec::schatten(double p, int rows, int cols) {
  if (!valid_exponent(p)) throw std::invalid_argument("Schatten norm requires p >= 1");
  if (cols < 1 || rows < cols) throw std::invalid_argument("Schatten norm requires rows >= cols >= 1");
  return NormSpec(NormKind::kSchattenP, p, rows * cols, rows, cols);
}

NormSpec NormSpec::dual() const {
  double q;
  if (p_ == 1.0) {
    q = kInfinity;
  } else if (p_ == kInfinity) {
    q = 1.0;
  } else {
    q = p_ / (p_ - 1.0);
  }
  return NormSpec(kind_, q, dim_, rows_, cols_);
}

double lp_norm(const Eigen::Ref<const Vec>& v, double p) {
  if (!valid_exponent(p)) throw std::invalid_argument("lp norm requires p >= 1");
  if (v.size() == 0) return 0.0;
  const double m = v.cwiseAbs().maxCoeff();
  if (m == 0.0 || p == kInfinity) return m;
  // Factoring out the max keeps every power in [0, 1]; safe for p up to ~1e6.
  double s = 0.0;
  if (p == 1.0) {
    for (Eigen::Index i = 0; i < v.size(); ++i) s += std::abs(v[i]) / m;
  } else if (p == 2.0) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      double t = v[i] / m;
      s += t * t;
    }
    return m * std::sqrt(s);
  } else if (p == 1.5) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      double t = std::abs(v[i]) / m;
      s += t * std::sqrt(t);
    }
  } else {
    for (Eigen::Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v[i]) / m, p);
  }
  return m * std::pow(s, 1.0 / p);
}

Vec singular_values(const NormSpec& spec, const Vec& v) {
  if (spec.kind() != NormKind::kSchattenP) throw std::invalid_argument("singular_values: Schatten spec required");
  check_dim(spec, v.size());
  Eigen::Map<const Mat> m(v.data(), spec.rows(), spec.cols());
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues();
}

double norm_value(const NormSpec& spec, const Vec& v) {
  check_dim(spec, v.size());
  if (spec.kind() == NormKind::kVectorLp) return lp_norm(v, spec.p());
  return lp_norm(singular_values(spec, v), spec.p());
}

double norm_value(const NormSpec& spec, const Mat& m) {
  if (spec.kind() == NormKind::kSchattenP &&
      (m.rows() != spec.rows() || m.cols() != spec.cols())) {
    throw std::invalid_argument("matrix shape does not match norm");
  }
  Eigen::Map<const Vec> flat(m.data(), m.size());
  return norm_value(spec, Vec(flat));
}

double norm_equivalence_factor(double p, double q, int d) {
  if (!valid_exponent(p) || !valid_exponent(q)) throw std::invalid_argument("exponents must satisfy p, q >= 1");
  if (q > p) throw std::invalid_argument("norm_equivalence_factor requires q <= p");
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  const double inv_p = (p == kInfinity) ? 0.0 : 1.0 / p;
  const double inv_q = (q == kInfinity) ? 0.0 : 1.0 / q;
  return std::pow(static_cast<double>(d), inv_q - inv_p);
}

Domain Domain::ball(const NormSpec& norm, const Vec& center, double radius) {
  return ball(norm, norm, center, radius);
}

Domain Domain::ball(const NormSpec& norm, const NormSpec& shape_norm,
                    const Vec& center, double radius) {
  if (shape_norm.kind() != norm.kind() || shape_norm.dim() != norm.dim() ||
      shape_norm.rows() != norm.rows() || shape_norm.cols() != norm.cols()) {
    throw std::invalid_argument("ball shape norm must match the context norm's kind and dimensions");
  }
  if (center.size() != norm.dim()) throw std::invalid_argument("ball center dimension mismatch");
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  Domain dom(norm, shape_norm, Shape::kBall);
  dom.center_ = center;
  dom.radius_ = radius;
  return dom;
}

Domain Domain::box(const NormSpec& norm, const Vec& lo, const Vec& hi) {
  if (lo.size() != norm.dim() || hi.size() != norm.dim()) throw std::invalid_argument("box bounds dimension mismatch");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i])) throw std::invalid_argument("box requires lo < hi componentwise");
  }
  Domain dom(norm, norm, Shape::kBox);
  dom.lo_ = lo;
  dom.hi_ = hi;
  return dom;
}

Vec Domain::interior_point() const {
  if (is_ball()) return center_;
  return 0.5 * (lo_ + hi_);
}

bool domain_membership(const Domain& dom, const Vec& x) {
  if (x.size() != dom.dim()) throw std::invalid_argument("membership: dimension mismatch");
  if (dom.is_box()) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] < dom.lo()[i] || x[i] > dom.hi()[i]) return false;
    }
    return true;
  }
  return norm_value(dom.shape_norm(), Vec(x - dom.center())) <= dom.radius() + kMembershipTol;
}

Chord chord_intersect(const Domain& dom, const Vec& x, const Vec& u) {
  if (x.size() != dom.dim() || u.size() != dom.dim()) throw std::invalid_argument("chord: dimension mismatch");
  const double un = u.norm();
  if (std::abs(un - 1.0) > 1e-12) throw std::invalid_argument("chord: direction must be unit length in l2");

  if (dom.is_box()) {
    double tmin = -kInfinity, tmax = kInfinity;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (!(dom.lo()[i] < x[i] && x[i] < dom.hi()[i])) {
        throw std::invalid_argument("chord: point must be strictly interior");
      }
      if (u[i] == 0.0) continue;
      const double t1 = (dom.lo()[i] - x[i]) / u[i];
      const double t2 = (dom.hi()[i] - x[i]) / u[i];
      tmin = std::max(tmin, std::min(t1, t2));
      tmax = std::min(tmax, std::max(t1, t2));
    }
    if (!(tmin < 0.0 && tmax > 0.0)) throw std::invalid_argument("chord: direction is degenerate for this box");
    return {tmin, tmax};
  }

  const NormSpec& ns = dom.shape_norm();
  const Vec delta = x - dom.center();
  const double dist = norm_value(ns, delta);
  const double radius = dom.radius();
  if (!(dist < radius)) throw std::invalid_argument("chord: point must be strictly interior");

  const double u_shape = norm_value(ns, u);
  // g(t) = ||x + t u - c|| - R is convex with g(0) < 0; by the triangle
  // inequality g >= 0 once |t| >= (R + dist) / ||u||.
  const auto g = [&](double t) { return norm_value(ns, Vec(delta + t * u)) - radius; };
  const double reach = (radius + dist) / u_shape;
  const auto bisect = [&](double inner, double outer) {
    // Invariant: g(inner) < 0 <= g(outer).
    while (std::abs(outer - inner) > 1e-12) {
      const double mid = 0.5 * (inner + outer);
      if (g(mid) < 0.0) {
        inner = mid;
      } else {
        outer = mid;
      }
    }
    return 0.5 * (inner + outer);
  };
  return {bisect(0.0, -reach), bisect(0.0, reach)};
}

double domain_diameter(const Domain& dom) {
  const NormSpec& ctx = dom.norm();
  if (dom.is_box()) {
    const Vec side = dom.hi() - dom.lo();
    if (ctx.kind() == NormKind::kVectorLp) return lp_norm(side, ctx.p());
    // Schatten context over a box: |v_ij| <= side_ij entrywise bounds the
    // Frobenius norm, then switch norms on the d2 singular values.
    const double frob = side.norm();
    if (ctx.p() >= 2.0) return frob;
    return norm_equivalence_factor(2.0, ctx.p(), ctx.cols()) * frob;
  }
  const double d2r = 2.0 * dom.radius();
  const double ps = dom.shape_norm().p();
  const double pc = ctx.p();
  if (ps == pc) return d2r;
  if (pc > ps) return d2r;  // ||v||_pc <= ||v||_ps when pc >= ps
  return d2r * norm_equivalence_factor(ps, pc, ctx.penalty_dim());
}

double euclidean_circumradius(const Domain& dom) {
  if (dom.is_box()) return 0.5 * (dom.hi() - dom.lo()).norm();
  const double p = dom.shape_norm().p();
  const double r = dom.radius();
  if (p <= 2.0) return r;  // ||v||_2 <= ||v||_p for p <= 2
  return r * norm_equivalence_factor(p, 2.0, dom.shape_norm().penalty_dim());
}

namespace {

// Uniform point in the unit lp ball: coordinates with density exp(-|t|^p),
// normalized to the sphere, then a radial factor U^(1/d).
Vec unit_lp_ball_point(double p, int d, Rng& rng) {
  Vec g(d);
  for (int i = 0; i < d; ++i) {
    const double mag = std::pow(rng.gamma(1.0 / p), 1.0 / p);
    g[i] = rng.uniform() < 0.5 ? -mag : mag;
  }
  const double norm = lp_norm(g, p);
  if (norm == 0.0) return Vec::Zero(d);
  const double radial = std::pow(rng.uniform(), 1.0 / d);
  return (radial / norm) * g;
}

Vec unit_l2_ball_point(int d, Rng& rng) {
  Vec g(d);
  for (int i = 0; i < d; ++i) g[i] = rng.normal();
  const double n = g.norm();
  if (n == 0.0) return Vec::Zero(d);
  return (std::pow(rng.uniform(), 1.0 / d) / n) * g;
}

}  // namespace

Vec sample_uniform(const Domain& dom, Rng& rng) {
  if (dom.is_box()) {
    Vec x(dom.dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(dom.lo()[i], dom.hi()[i]);
    return x;
  }
  const NormSpec& ns = dom.shape_norm();
  const double p = ns.p();
  if (ns.kind() == NormKind::kVectorLp) {
    if (p == kInfinity) {
      Vec x(dom.dim());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        x[i] = dom.center()[i] + rng.uniform(-dom.radius(), dom.radius());
      }
      return x;
    }
    return dom.center() + dom.radius() * unit_lp_ball_point(p, dom.dim(), rng);
  }
  // Schatten ball: rejection from the smallest enclosing Frobenius ball.
  const double frob_radius =
      dom.radius() * (p <= 2.0 ? 1.0 : norm_equivalence_factor(p, 2.0, ns.cols()));
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    Vec x = dom.center() + frob_radius * unit_l2_ball_point(dom.dim(), rng);
    if (domain_membership(dom, x)) return x;
  }
  throw std::runtime_error("sample_uniform: rejection sampling failed to hit the Schatten ball");
}

}  // namespace dpnormopt
