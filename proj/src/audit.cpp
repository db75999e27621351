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

#include "dpnormopt/audit.hpp"

#include <algorithm>
#include <cmath>

#include "dpnormopt/optimize.hpp"
#include "dpnormopt/quadrature.hpp"
#include "dpnormopt/rng.hpp"
#include "dpnormopt/samplers.hpp"

namespace dpnormopt {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kLogTwoPi = 1.8378770664093453;

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

}  // namespace

double log_std_normal_cdf(double x) {
  if (x > -20.0) return std::log(std_normal_cdf(x));
  // Lower tail: Phi(x) = phi(x)/(-x) (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...)
  const double x2 = x * x;
  const double series = -1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - 0.5 * kLogTwoPi - std::log(-x) + std::log1p(series);
}

double gaussian_curve(double t, double epsilon) {
  if (!(epsilon >= 0.0)) {
    throw std::invalid_argument("gaussian_curve: epsilon must be nonnegative");
  }
  t = std::abs(t);
  if (t == 0.0) return 0.0;
  const double upper = t / 2.0 - epsilon / t;
  const double lower = -t / 2.0 - epsilon / t;
  const double term1 = std_normal_cdf(upper);
  const double log_term2 = epsilon + log_std_normal_cdf(lower);
  const double term2 = log_term2 > -745.0 ? std::exp(log_term2) : 0.0;
  return std::min(std::max(term1 - term2, 0.0), 1.0);
}

namespace {

// Minimum of a convex function on [a, b]: coarse grid argmin, golden-section
// refinement in the bracketing cell.
double refined_min(const std::function<double(double)>& f, double a, double b,
                   int grid_points) {
  double best = std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i < grid_points; ++i) {
    const double x = a + (b - a) * i / (grid_points - 1);
    const double v = f(x);
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
  const double lo = a + (b - a) * std::max(0, best_i - 1) / (grid_points - 1);
  const double hi = a + (b - a) * std::min(grid_points - 1, best_i + 1) / (grid_points - 1);
  const double xm = golden_section_min(f, lo, hi, (b - a) * 1e-10);
  return std::min(best, f(xm));
}

}  // namespace

double privacy_curve_1d(const std::function<double(double)>& p_neg_log,
                        const std::function<double(double)>& q_neg_log,
                        double a, double b, double epsilon,
                        const PrivacyCurveOptions& options) {
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("privacy_curve_1d: requires finite a < b");
  }
  if (!(epsilon >= 0.0) || epsilon > 700.0) {
    throw std::invalid_argument("privacy_curve_1d: epsilon must lie in [0, 700]");
  }
  if (options.grid_points < 16) {
    throw std::invalid_argument("privacy_curve_1d: grid_points must be at least 16");
  }
  if (!(options.quad_tol > 0.0) || options.quad_tol > 1e-4) {
    throw std::invalid_argument("privacy_curve_1d: quad_tol must lie in (0, 1e-4]");
  }

  const double mP = refined_min(p_neg_log, a, b, options.grid_points);
  const double mQ = refined_min(q_neg_log, a, b, options.grid_points);
  const auto ps = [&](double x) {
    const double v = p_neg_log(x) - mP;
    return v < 700.0 ? std::exp(-v) : 0.0;
  };
  const auto qs = [&](double x) {
    const double v = q_neg_log(x) - mQ;
    return v < 700.0 ? std::exp(-v) : 0.0;
  };

  std::vector<double> brk;
  for (double t : options.breakpoints) {
    if (t > a && t < b) brk.push_back(t);
  }
  const double Zp = integrate_strict(ps, a, b, options.quad_tol, 0.0, 4000, &brk).value;
  const double Zq = integrate_strict(qs, a, b, options.quad_tol, 0.0, 4000, &brk).value;
  if (!(Zp > 0.0) || !(Zq > 0.0)) {
    throw std::invalid_argument("privacy_curve_1d: a density has no mass on [a, b]");
  }
  const double log_zp = std::log(Zp), log_zq = std::log(Zq);

  // h > 0 exactly where the normalized q exceeds e^eps times the normalized p.
  const auto h = [&](double x) {
    return (p_neg_log(x) - mP) - (q_neg_log(x) - mQ) + log_zp - log_zq - epsilon;
  };

  std::vector<double> roots;
  const int n = options.grid_points;
  double x_prev = a;
  bool pos_prev = h(a) > 0.0;
  for (int i = 1; i < n; ++i) {
    const double x = a + (b - a) * i / (n - 1);
    const bool pos = h(x) > 0.0;
    if (pos != pos_prev) {
      if (static_cast<int>(roots.size()) >= options.max_sign_changes) {
        throw std::invalid_argument(
            "privacy_curve_1d: log-ratio has too many sign changes");
      }
      double lo = x_prev, hi = x;
      bool pos_lo = pos_prev;
      while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const bool pos_mid = h(mid) > 0.0;
        if (pos_mid == pos_lo) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x_prev = x;
    pos_prev = pos;
  }

  std::vector<double> pts;
  pts.push_back(a);
  pts.insert(pts.end(), roots.begin(), roots.end());
  pts.push_back(b);

  const double e_eps = std::exp(epsilon);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double u = pts[i], v = pts[i + 1];
    if (!(v > u)) continue;
    if (!(h(0.5 * (u + v)) > 0.0)) continue;
    std::vector<double> sub_brk;
    for (double tbrk : brk) {
      if (tbrk > u && tbrk < v) sub_brk.push_back(tbrk);
    }
    const double q_mass =
        integrate_strict(qs, u, v, options.quad_tol, 1e-15 * Zq, 4000, &sub_brk).value / Zq;
    const double p_mass =
        integrate_strict(ps, u, v, options.quad_tol, 1e-15 * Zp, 4000, &sub_brk).value / Zp;
    total += q_mass - e_eps * p_mass;
  }
  return std::min(std::max(total, 0.0), 1.0);
}

double AuditInstance1D::F(double x) const {
  const double d0 = x - center;
  double v = 0.5 * mu_sc * d0 * d0;
  for (std::size_t j = 0; j < knots.size(); ++j) {
    const double r = x - knots[j];
    if (r > 0.0) v += quad_w[j] * r * r + lin_v[j] * r;
  }
  return v;
}

double AuditInstance1D::alpha(double x) const {
  double v = alpha_offset + alpha_slopes[0] * (x - a);
  for (std::size_t j = 0; j < knots.size(); ++j) {
    const double r = x - knots[j];
    if (r > 0.0) v += (alpha_slopes[j + 1] - alpha_slopes[j]) * r;
  }
  return v;
}

void AuditInstance1D::validate() const {
  if (!(b > a)) throw std::invalid_argument("AuditInstance1D: requires a < b");
  if (!(mu_sc > 0.0)) throw std::invalid_argument("AuditInstance1D: mu_sc must be positive");
  if (!(g_lip >= 0.0)) throw std::invalid_argument("AuditInstance1D: g_lip must be nonnegative");
  const std::size_t m = knots.size();
  if (quad_w.size() != m || lin_v.size() != m || alpha_slopes.size() != m + 1) {
    throw std::invalid_argument("AuditInstance1D: atom array sizes do not line up");
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (!(knots[j] > a && knots[j] < b)) {
      throw std::invalid_argument("AuditInstance1D: knots must lie strictly inside [a, b]");
    }
    if (j + 1 < m && knots[j] > knots[j + 1]) {
      throw std::invalid_argument("AuditInstance1D: knots must be sorted");
    }
    if (quad_w[j] < 0.0) {
      throw std::invalid_argument("AuditInstance1D: quadratic weights must be nonnegative");
    }
    if (lin_v[j] < 0.0) {
      throw std::invalid_argument("AuditInstance1D: linear weights must be nonnegative");
    }
    // Slope jump of alpha at this knot must not undo F's convex kink.
    if (lin_v[j] + (alpha_slopes[j + 1] - alpha_slopes[j]) < 0.0) {
      throw std::invalid_argument(
          "AuditInstance1D: alpha's concave kink exceeds the linear atom");
    }
  }
  for (double s : alpha_slopes) {
    if (std::abs(s) > g_lip * (1.0 + 1e-12) + 1e-300) {
      throw std::invalid_argument("AuditInstance1D: slope exceeds the stated g_lip");
    }
  }
}

std::vector<AuditInstance1D> generate_audit_instances(int count, std::uint64_t seed,
                                                      const AuditGenConfig& config) {
  if (count < 0) throw std::invalid_argument("generate_audit_instances: count < 0");
  const auto check_range = [](std::pair<double, double> r, const char* what) {
    if (!(r.first > 0.0) || !(r.second >= r.first)) {
      throw std::invalid_argument(std::string("generate_audit_instances: bad ") + what);
    }
  };
  check_range(config.mu_range, "mu_range");
  check_range(config.g_range, "g_range");
  check_range(config.half_width_range, "half_width_range");
  if (config.min_knots < 1 || config.max_knots < config.min_knots) {
    throw std::invalid_argument("generate_audit_instances: bad knot counts");
  }

  Rng rng(seed);
  std::vector<AuditInstance1D> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    AuditInstance1D inst;
    const double w = rng.uniform(config.half_width_range.first, config.half_width_range.second);
    inst.a = -w;
    inst.b = w;
    inst.mu_sc = rng.uniform(config.mu_range.first, config.mu_range.second);
    const double g_max = rng.uniform(config.g_range.first, config.g_range.second);
    inst.center = rng.uniform(-0.5 * w, 0.5 * w);

    const int span = config.max_knots - config.min_knots + 1;
    int m = config.min_knots + static_cast<int>(rng.uniform() * span);
    m = std::min(m, config.max_knots);
    inst.knots.resize(static_cast<std::size_t>(m));
    for (double& kn : inst.knots) kn = rng.uniform(-0.9 * w, 0.9 * w);
    std::sort(inst.knots.begin(), inst.knots.end());

    inst.quad_w.resize(inst.knots.size());
    for (double& qw : inst.quad_w) qw = rng.uniform(0.0, 1.5);

    inst.alpha_slopes.resize(inst.knots.size() + 1);
    for (double& s : inst.alpha_slopes) s = rng.uniform(-g_max, g_max);

    inst.lin_v.resize(inst.knots.size());
    for (std::size_t j = 0; j < inst.lin_v.size(); ++j) {
      const double jump = inst.alpha_slopes[j + 1] - inst.alpha_slopes[j];
      inst.lin_v[j] = std::max(0.0, -jump) + rng.uniform(0.0, 0.5);
    }
    inst.alpha_offset = rng.uniform(-1.0, 1.0);

    double g = 0.0;
    for (double s : inst.alpha_slopes) g = std::max(g, std::abs(s));
    inst.g_lip = g;

    inst.validate();
    out.push_back(std::move(inst));
  }
  return out;
}

TheoremAuditReport audit_theorem_gdp(const AuditInstance1D& instance,
                                     const std::vector<double>& epsilons,
                                     double tol) {
  instance.validate();
  if (!(tol >= 0.0)) throw std::invalid_argument("audit_theorem_gdp: tol must be nonnegative");

  PrivacyCurveOptions opts;
  opts.breakpoints = instance.knots;
  const double t = instance.g_lip / std::sqrt(instance.mu_sc);
  const auto f_p = [&instance](double x) { return instance.F(x); };
  const auto f_q = [&instance](double x) { return instance.F(x) + instance.alpha(x); };

  TheoremAuditReport report;
  report.pass = true;
  for (double eps : epsilons) {
    const double rhs = gaussian_curve(t, eps);
    const double lhs_fwd = privacy_curve_1d(f_p, f_q, instance.a, instance.b, eps, opts);
    const double lhs_rev = privacy_curve_1d(f_q, f_p, instance.a, instance.b, eps, opts);
    for (int ordering = 0; ordering < 2; ++ordering) {
      TheoremAuditRow row;
      row.epsilon = eps;
      row.lhs_delta = ordering == 0 ? lhs_fwd : lhs_rev;
      row.rhs_delta = rhs;
      row.swapped = ordering == 1;
      row.margin = rhs - row.lhs_delta;
      row.pass = row.lhs_delta <= rhs + tol;
      report.pass = report.pass && row.pass;
      report.rows.push_back(row);
    }
  }
  return report;
}

namespace {

// Coordinatewise central-difference gradient; targets handed to the risk
// check are differentiable on the domain interior.
std::function<Vec(const Vec&)> fd_gradient(const std::function<double(const Vec&)>& F,
                                           double scale) {
  const double h = std::max(1e-7 * scale, 1e-9);
  return [F, h](const Vec& x) {
    Vec g(x.size());
    Vec xp = x;
    for (int i = 0; i < x.size(); ++i) {
      const double xi = x[i];
      xp[i] = xi + h;
      const double fp = F(xp);
      xp[i] = xi - h;
      const double fm = F(xp);
      xp[i] = xi;
      g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
  };
}

// Half-width of the second-coordinate slice of a two-dimensional domain at
// first coordinate x; zero outside.
std::pair<double, double> slice_range(const Domain& dom, double x) {
  if (dom.is_box()) return {dom.lo()[1], dom.hi()[1]};
  const double r = dom.radius();
  const double cx = dom.center()[0], cy = dom.center()[1];
  const double p = dom.shape_norm().is_vector() ? dom.shape_norm().p() : 2.0;
  const double dx = std::abs(x - cx);
  if (dx >= r) return {cy, cy};
  double w;
  if (p == kInfinity) {
    w = r;
  } else {
    w = r * std::pow(1.0 - std::pow(dx / r, p), 1.0 / p);
  }
  return {cy - w, cy + w};
}

}  // namespace

GibbsRiskReport gibbs_risk_check(const std::function<double(const Vec&)>& F,
                                 const Domain& domain, double k,
                                 RiskCheckMethod method, std::uint64_t seed,
                                 int n_samples) {
  if (!(k > 0.0)) throw std::invalid_argument("gibbs_risk_check: k must be positive");
  const int dim = domain.dim();
  GibbsRiskReport report;
  report.bound = static_cast<double>(dim) / k;

  if (method == RiskCheckMethod::kQuadrature) {
    if (dim > 2) {
      throw std::invalid_argument("gibbs_risk_check: quadrature supports dim <= 2");
    }
    if (dim == 1) {
      const Vec origin = domain.interior_point();
      Vec e(1);
      e[0] = 1.0;
      const Chord chord = chord_intersect(domain, origin, e);
      const double lo = origin[0] + chord.tmin, hi = origin[0] + chord.tmax;
      Vec point(1);
      const auto f1 = [&](double x) {
        point[0] = x;
        return F(point);
      };
      const double m = refined_min(f1, lo, hi, 2048);
      const auto weight = [&](double x) {
        const double v = k * (f1(x) - m);
        return v < 700.0 ? std::exp(-v) : 0.0;
      };
      const auto excess = [&](double x) {
        const double fv = f1(x) - m;
        const double v = k * fv;
        return v < 700.0 ? fv * std::exp(-v) : 0.0;
      };
      const double den = integrate_strict(weight, lo, hi, 1e-10, 0.0, 4000).value;
      const double num = integrate_strict(excess, lo, hi, 1e-9, 1e-18, 4000).value;
      if (!(den > 0.0)) throw std::invalid_argument("gibbs_risk_check: zero mass");
      report.gap = num / den;
      report.notes = "quadrature, dim 1";
    } else {
      const double scale = euclidean_circumradius(domain);
      MinimizeResult min_res =
          minimize_convex(F, fd_gradient(F, scale), domain, 1e-8);
      const double m = min_res.value;
      double x_lo, x_hi;
      if (domain.is_box()) {
        x_lo = domain.lo()[0];
        x_hi = domain.hi()[0];
      } else {
        x_lo = domain.center()[0] - domain.radius();
        x_hi = domain.center()[0] + domain.radius();
      }
      Vec point(2);
      const auto inner = [&](double x, bool with_excess) {
        const auto [y_lo, y_hi] = slice_range(domain, x);
        if (!(y_hi > y_lo)) return 0.0;
        const auto f_inner = [&](double y) {
          point[0] = x;
          point[1] = y;
          const double fv = F(point) - m;
          const double v = k * fv;
          if (v >= 700.0) return 0.0;
          return with_excess ? fv * std::exp(-v) : std::exp(-v);
        };
        return integrate_adaptive(f_inner, y_lo, y_hi, 1e-9, 1e-18, 600).value;
      };
      const double den = integrate_strict([&](double x) { return inner(x, false); },
                                          x_lo, x_hi, 1e-8, 0.0, 1500)
                             .value;
      const double num = integrate_strict([&](double x) { return inner(x, true); },
                                          x_lo, x_hi, 1e-7, 1e-16, 1500)
                             .value;
      if (!(den > 0.0)) throw std::invalid_argument("gibbs_risk_check: zero mass");
      report.gap = num / den;
      report.notes = "nested quadrature, dim 2";
    }
    report.pass = report.gap <= report.bound + 1e-8;
    return report;
  }

  // Monte Carlo: hit-and-run over exp(-k F), gap from the sample mean.
  const double scale = euclidean_circumradius(domain);
  MinimizeResult min_res = minimize_convex(F, fd_gradient(F, scale), domain, 1e-8);
  GibbsTarget target(domain);
  target.neg_log_density = [&F, k](const Vec& x) { return k * F(x); };
  SamplerConfig config;
  config.n_samples = n_samples;
  auto [samples, sampler_report] = sample_hit_and_run(target, config, seed);
  double mean = 0.0;
  for (const Vec& s : samples) mean += F(s);
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (const Vec& s : samples) {
    const double d = F(s) - mean;
    var += d * d;
  }
  var /= std::max<std::size_t>(1, samples.size() - 1);
  const double ess = std::isfinite(sampler_report.ess_estimate)
                         ? std::max(1.0, sampler_report.ess_estimate)
                         : static_cast<double>(samples.size());
  report.gap = mean - min_res.value;
  report.std_error = std::sqrt(var / ess);
  report.pass = report.gap <= report.bound + std::max(1e-8, 3.0 * report.std_error);
  report.notes = "hit-and-run, " + std::to_string(samples.size()) + " samples";
  return report;
}

ConcentrationReport concentration_check(const GibbsTarget& target,
                                        const std::function<double(const Vec&)>& ell,
                                        double G_ell,
                                        const std::vector<double>& t_grid,
                                        int n_samples, std::uint64_t seed) {
  if (!(target.strong_convexity > 0.0)) {
    throw std::invalid_argument("concentration_check: target must be strongly convex");
  }
  if (!(G_ell > 0.0)) {
    throw std::invalid_argument("concentration_check: G_ell must be positive");
  }
  if (n_samples < 100) {
    throw std::invalid_argument("concentration_check: need at least 100 samples");
  }

  SamplerConfig config;
  config.n_samples = n_samples;
  auto [samples, sampler_report] = sample_hit_and_run(target, config, seed);
  std::vector<double> vals(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) vals[i] = ell(samples[i]);
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= static_cast<double>(vals.size());

  const double mu = target.strong_convexity;
  const double ess = std::isfinite(sampler_report.ess_estimate)
                         ? std::max(1.0, sampler_report.ess_estimate)
                         : static_cast<double>(vals.size());

  ConcentrationReport report;
  report.pass = true;
  report.mean_ell = mean;
  report.ess = ess;
  for (double t : t_grid) {
    if (!(t >= 0.0)) throw std::invalid_argument("concentration_check: t must be nonnegative");
    ConcentrationRow row;
    row.t = t;
    row.bound = std::exp(-t * t * mu / (2.0 * G_ell * G_ell));
    std::size_t count = 0;
    for (double v : vals) {
      if (v - mean >= t) ++count;
    }
    row.empirical_tail = static_cast<double>(count) / vals.size();
    row.slack = 3.0 * std::sqrt(row.bound * (1.0 - row.bound) / ess) + 3.0 / ess;
    row.pass = row.empirical_tail <= row.bound + row.slack;
    report.pass = report.pass && row.pass;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace dpnormopt
