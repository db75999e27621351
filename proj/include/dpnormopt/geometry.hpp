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

#ifndef DPNORMOPT_GEOMETRY_HPP_
#define DPNORMOPT_GEOMETRY_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "dpnormopt/rng.hpp"

namespace dpnormopt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Boundary tolerance used by membership tests on norm balls.
inline constexpr double kMembershipTol = 1e-12;

enum class NormKind { kVectorLp, kSchattenP };

// A norm on R^d or on d1 x d2 matrices (Schatten-p of the singular values).
// Matrix arguments are carried as column-major flattened vectors of length
// d1*d2 so that all modules can treat points uniformly.
class NormSpec {
 public:
  static NormSpec vector_lp(double p, int d);
  static NormSpec schatten(double p, int rows, int cols);  // rows >= cols >= 1

  NormKind kind() const { return kind_; }
  double p() const { return p_; }
  int dim() const { return dim_; }  // ambient dimension: d, or rows*cols
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool is_vector() const { return kind_ == NormKind::kVectorLp; }

  // Dimension that governs regularizer exponents: d for vectors, cols for
  // Schatten norms (the number of singular values).
  int penalty_dim() const { return is_vector() ? dim_ : cols_; }

  // The dual norm: exponent p/(p-1) with the same kind and shape.
  NormSpec dual() const;

 private:
  NormSpec(NormKind kind, double p, int dim, int rows, int cols)
      : kind_(kind), p_(p), dim_(dim), rows_(rows), cols_(cols) {}
  NormKind kind_;
  double p_;
  int dim_, rows_, cols_;
};

// ||v||_p, evaluated in max-factored form so that large exponents neither
// overflow nor underflow. Schatten norms apply the same formula to the
// singular values of the reshaped argument.
double norm_value(const NormSpec& spec, const Vec& v);
double norm_value(const NormSpec& spec, const Mat& m);

// Euclidean norm of an lp vector: ||v||_p for plain doubles, p in [1, inf].
double lp_norm(const Eigen::Ref<const Vec>& v, double p);

// Singular values of the flattened matrix v under a Schatten spec,
// descending order.
Vec singular_values(const NormSpec& spec, const Vec& v);

// Tight constant d^(1/q - 1/p) in ||v||_p <= ||v||_q <= factor * ||v||_p,
// for 1 <= q <= p <= inf.
double norm_equivalence_factor(double p, double q, int d);

// A compact convex domain: a norm ball (whose shape norm may differ from the
// ambient norm used for Lipschitz/strong-convexity bookkeeping) or an
// axis-aligned box.
class Domain {
 public:
  enum class Shape { kBall, kBox };

  // Ball in the context norm itself.
  static Domain ball(const NormSpec& norm, const Vec& center, double radius);
  // Ball whose shape is measured in shape_norm (same kind and dimensions).
  static Domain ball(const NormSpec& norm, const NormSpec& shape_norm,
                     const Vec& center, double radius);
  static Domain box(const NormSpec& norm, const Vec& lo, const Vec& hi);

  const NormSpec& norm() const { return norm_; }
  int dim() const { return norm_.dim(); }
  Shape shape() const { return shape_; }
  bool is_ball() const { return shape_ == Shape::kBall; }
  bool is_box() const { return shape_ == Shape::kBox; }

  const NormSpec& shape_norm() const { return shape_norm_; }
  const Vec& center() const { return center_; }
  double radius() const { return radius_; }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }

  // Canonical interior point: ball center, or box midpoint.
  Vec interior_point() const;

 private:
  Domain(const NormSpec& norm, const NormSpec& shape_norm, Shape shape)
      : norm_(norm), shape_norm_(shape_norm), shape_(shape) {}
  NormSpec norm_;
  NormSpec shape_norm_;
  Shape shape_;
  Vec center_, lo_, hi_;
  double radius_ = 0.0;
};

// Membership with boundary tolerance kMembershipTol on balls; boxes exact.
bool domain_membership(const Domain& dom, const Vec& x);

struct Chord {
  double tmin;
  double tmax;
};

// A function restricted to a line t -> f(x0 + t*u), together with the points
// where it is not twice differentiable (kinks or curvature singularities).
// Quadrature aligned with the breakpoints converges at smooth-integrand
// rates between them.
struct LineFunction {
  std::function<double(double)> value;
  std::vector<double> breakpoints;  // ascending
};

// Intersection {t : x + t*u in dom} of a line with the domain. Requires x
// strictly interior and ||u||_2 = 1 up to 1e-12. Boxes are solved in closed
// form; balls by bisection to absolute tolerance 1e-12 in t.
Chord chord_intersect(const Domain& dom, const Vec& x, const Vec& u);

// Upper bound on the diameter of dom measured in dom.norm() (exact for boxes
// and for balls whose shape norm matches the context norm).
double domain_diameter(const Domain& dom);

// Uniform draw from the domain. Boxes and vector lp balls are sampled
// exactly; Schatten balls by rejection from the enclosing Frobenius ball.
Vec sample_uniform(const Domain& dom, Rng& rng);

// Radius of a Euclidean ball centered at interior_point() that contains dom.
double euclidean_circumradius(const Domain& dom);

}  // namespace dpnormopt

#endif  // DPNORMOPT_GEOMETRY_HPP_
