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

#include "dpnormopt/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dpnormopt/optimize.hpp"
#include "dpnormopt/quadrature.hpp"

namespace dpnormopt {

namespace {

// Internal control-flow signal for the query budget; converted to
// SamplerFailure at the sampler boundary.
struct BudgetExhausted {};

void validate_config(const SamplerConfig& config) {
  if (!(config.quadrature_tol > 0.0) || config.quadrature_tol > 1e-6) {
    throw std::invalid_argument("sampler: quadrature_tol must lie in (0, 1e-6]");
  }
  if (config.n_samples < 1) {
    throw std::invalid_argument("sampler: n_samples must be at least 1");
  }
  if (config.max_queries < 1) {
    throw std::invalid_argument("sampler: max_queries must be positive");
  }
}

int resolved_burn_in(const SamplerConfig& config, int dim) {
  return config.burn_in >= 0 ? config.burn_in : 50 * dim;
}

int resolved_thinning(const SamplerConfig& config, int dim) {
  const int t = config.thinning >= 0 ? config.thinning : dim;
  return std::max(1, t);
}

}  // namespace

Exact1DSampler::Exact1DSampler(std::function<double(double)> f, double a,
                               double b, double tol, std::int64_t* eval_counter,
                               const std::vector<double>* breakpoints)
    : f_(std::move(f)), counter_(eval_counter), a_(a), b_(b) {
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("Exact1DSampler: requires finite a < b");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("Exact1DSampler: tol must be positive");
  const double width = b - a;

  const auto eval = [this](double t) {
    if (counter_ != nullptr) ++*counter_;
    return f_(t);
  };

  // Anchor at the minimum so the integrand exp(-(f - fmin)) peaks at 1.
  mode_ = golden_section_min(eval, a, b, width * 1e-9);
  fmin_ = eval(mode_);
  if (!std::isfinite(fmin_)) {
    throw QuadratureError("Exact1DSampler: non-finite value at the mode", {});
  }

  // Per-side scale: halve from the full side width until f - fmin <= 1.
  // Convexity then gives f(mode + m*s) - fmin >= m for m >= 1, so panel
  // masses beyond the scale decay at least exponentially.
  const auto side_scale = [&](double sign, double side_width) {
    if (side_width <= width * 1e-12) return 0.0;
    double s = side_width;
    for (int i = 0; i < 120 && eval(mode_ + sign * s) - fmin_ > 1.0; ++i) s *= 0.5;
    return s;
  };
  const double scale_left = side_scale(-1.0, mode_ - a);
  const double scale_right = side_scale(1.0, b - mode_);

  // Geometrically spaced edges out to where f - fmin exceeds 46; beyond
  // that the remaining tail mass is below 1e-19 of the total (convexity
  // gives f(t) - fmin >= 46 (t - mode)/(T - mode) past such a point T),
  // so the support is truncated there.
  std::vector<double> edges = {mode_};
  const auto push_side = [&](double sign, double scale, double endpoint) {
    const double limit = sign * (endpoint - mode_);
    if (scale <= 0.0 || limit <= 0.0) {
      edges.push_back(endpoint);
      return;
    }
    double m = 1.0;
    for (;;) {
      const double t = mode_ + sign * m * scale;
      if (m * scale >= limit) {
        edges.push_back(endpoint);
        return;
      }
      edges.push_back(t);
      if (eval(t) - fmin_ > 46.0) return;
      m *= 2.0;
    }
  };
  push_side(-1.0, scale_left, a);
  push_side(1.0, scale_right, b);
  std::sort(edges.begin(), edges.end());
  // Seed the breakpoints that fall inside the retained support; panels then
  // meet f's kinks at their boundaries instead of straddling them.
  if (breakpoints != nullptr && edges.size() >= 2) {
    const double lo_edge = edges.front(), hi_edge = edges.back();
    for (double t : *breakpoints) {
      if (t > lo_edge && t < hi_edge) edges.push_back(t);
    }
    std::sort(edges.begin(), edges.end());
  }
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [&](double x, double y) { return y - x < width * 1e-14; }),
              edges.end());

  struct Work {
    double a, b, mass, err;
  };
  std::vector<Work> work;
  const auto integrand = [&](double t) {
    const double v = eval(t) - fmin_;
    return v < 700.0 ? std::exp(-v) : 0.0;
  };
  double total = 0.0, total_err = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    double e = 0.0;
    const double v = gk15_panel(integrand, edges[i], edges[i + 1], &e);
    work.push_back({edges[i], edges[i + 1], v, e});
    total += v;
    total_err += e;
  }

  // Adaptive headroom on top of the seeded subdivision.
  const int max_panels = 4000 + 2 * static_cast<int>(edges.size());
  while (total_err > tol * std::max(total, 1e-300) &&
         static_cast<int>(work.size()) < max_panels) {
    std::size_t worst = 0;
    for (std::size_t i = 1; i < work.size(); ++i) {
      if (work[i].err > work[worst].err) worst = i;
    }
    Work w = work[worst];
    const double mid = 0.5 * (w.a + w.b);
    if (mid <= w.a || mid >= w.b) break;
    double e1 = 0.0, e2 = 0.0;
    const double v1 = gk15_panel(integrand, w.a, mid, &e1);
    const double v2 = gk15_panel(integrand, mid, w.b, &e2);
    total += v1 + v2 - w.mass;
    total_err += e1 + e2 - w.err;
    work[worst] = {w.a, mid, v1, e1};
    work.push_back({mid, w.b, v2, e2});
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw QuadratureError("Exact1DSampler: density mass is zero or non-finite",
                          {total, total_err, 0, false});
  }
  if (total_err > tol * total) {
    throw QuadratureError("Exact1DSampler: mass tolerance not reached",
                          {total, total_err, 0, false});
  }

  std::sort(work.begin(), work.end(), [](const Work& x, const Work& y) { return x.a < y.a; });
  panels_.reserve(work.size());
  double cum = 0.0;
  for (const Work& w : work) {
    panels_.push_back({w.a, w.b, w.mass, cum});
    cum += w.mass;
  }
  total_ = cum;
}

double Exact1DSampler::g(double t) const {
  if (counter_ != nullptr) ++*counter_;
  const double v = f_(t) - fmin_;
  return v < 700.0 ? std::exp(-v) : 0.0;
}

double Exact1DSampler::partial_mass(double from, double to) const {
  if (!(to > from)) return 0.0;
  return gk15_panel([this](double t) { return g(t); }, from, to, nullptr);
}

double Exact1DSampler::cdf(double t) const {
  if (t <= a_) return 0.0;
  if (t >= b_) return 1.0;
  std::size_t lo = 0, hi = panels_.size();
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (panels_[mid].a <= t) lo = mid; else hi = mid;
  }
  const Panel& p = panels_[lo];
  return (p.cum + partial_mass(p.a, std::min(t, p.b))) / total_;
}

double Exact1DSampler::draw(Rng& rng) const {
  double u = rng.uniform();
  if (u <= 0.0) u = 0x1.0p-53;
  const double want = u * total_;

  // Panel holding the target cumulative mass.
  std::size_t lo_i = 0, hi_i = panels_.size();
  while (hi_i - lo_i > 1) {
    const std::size_t mid = lo_i + (hi_i - lo_i) / 2;
    if (panels_[mid].cum <= want) lo_i = mid; else hi_i = mid;
  }
  const Panel& p = panels_[lo_i];
  const double want_local = std::min(std::max(want - p.cum, 0.0), p.mass);
  if (p.mass <= 0.0) return 0.5 * (p.a + p.b);

  double lo = p.a, hi = p.b;
  double t = p.a + (p.b - p.a) * (want_local / p.mass);
  const double res_tol = 1e-13 * total_;
  for (int it = 0; it < 100; ++it) {
    const double resid = partial_mass(p.a, t) - want_local;
    if (std::abs(resid) <= res_tol || hi - lo <= (b_ - a_) * 1e-14) break;
    if (resid > 0.0) hi = t; else lo = t;
    const double dens = g(t);
    double next = dens > 0.0 ? t - resid / dens : t;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  return std::min(std::max(t, a_), b_);
}

std::pair<std::vector<double>, SamplerReport> sample_exact_1d(
    const std::function<double(double)>& neg_log, double a, double b, int n,
    double tol, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_exact_1d: n must be at least 1");
  SamplerReport report;
  std::int64_t evals = 0;
  try {
    Exact1DSampler sampler(neg_log, a, b, tol, &evals);
    Rng rng(seed);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(sampler.draw(rng));
    report.value_queries = evals;
    report.acceptance_rate = 1.0;
    report.ess_estimate = static_cast<double>(n);
    report.converged = true;
    report.diagnostics = "exact inversion";
    return {std::move(out), report};
  } catch (const QuadratureError& e) {
    report.value_queries = evals;
    report.diagnostics = e.what();
    throw SamplerFailure(std::string("sample_exact_1d: ") + e.what(), report);
  }
}

namespace {

Vec random_unit_direction(int dim, Rng& rng) {
  Vec u(dim);
  for (;;) {
    for (int i = 0; i < dim; ++i) u[i] = rng.normal();
    const double n = u.norm();
    if (n > 1e-12) return u / n;
  }
}

LineFunction restrict_to_line(const GibbsTarget& target, const Vec& x, const Vec& u) {
  if (target.line_restriction) return target.line_restriction(x, u);
  LineFunction line;
  line.value = [&target, x, u](double t) { return target.neg_log_density(x + t * u); };
  return line;
}

}  // namespace

std::pair<std::vector<Vec>, SamplerReport> sample_hit_and_run(
    const GibbsTarget& target, const SamplerConfig& config, std::uint64_t seed) {
  validate_config(config);
  if (!target.neg_log_density) {
    throw std::invalid_argument("sample_hit_and_run: target has no neg_log_density");
  }
  const int dim = target.domain.dim();
  const int burn_in = resolved_burn_in(config, dim);
  const int thinning = resolved_thinning(config, dim);
  const long total_steps =
      static_cast<long>(burn_in) + static_cast<long>(thinning) * config.n_samples;

  SamplerReport report;
  std::int64_t queries = 0;
  Rng rng(seed);
  Vec x = target.domain.interior_point();
  std::vector<Vec> samples;
  samples.reserve(static_cast<std::size_t>(config.n_samples));

  try {
    for (long step = 0; step < total_steps; ++step) {
      Chord chord{0.0, 0.0};
      Vec u;
      bool have_chord = false;
      for (int attempt = 0; attempt < 64 && !have_chord; ++attempt) {
        u = random_unit_direction(dim, rng);
        try {
          chord = chord_intersect(target.domain, x, u);
          have_chord = chord.tmax - chord.tmin > 0.0 && std::isfinite(chord.tmin) &&
                       std::isfinite(chord.tmax);
        } catch (const std::exception&) {
          have_chord = false;
        }
      }
      if (!have_chord) {
        report.value_queries = queries;
        report.diagnostics = "no usable chord through the current point";
        throw SamplerFailure("sample_hit_and_run: degenerate chord", report);
      }

      const auto line = restrict_to_line(target, x, u);
      const auto counted = [&](double t) {
        if (queries >= config.max_queries) throw BudgetExhausted{};
        ++queries;
        return line.value(t);
      };
      Exact1DSampler conditional(counted, chord.tmin, chord.tmax,
                                 config.quadrature_tol, nullptr,
                                 &line.breakpoints);
      double t = conditional.draw(rng);
      // Keep the next point strictly interior so the following chord exists.
      const double margin = (chord.tmax - chord.tmin) * 1e-9;
      t = std::min(std::max(t, chord.tmin + margin), chord.tmax - margin);
      x += t * u;

      const long after_burn = step - burn_in + 1;
      if (after_burn > 0 && after_burn % thinning == 0 &&
          static_cast<int>(samples.size()) < config.n_samples) {
        samples.push_back(x);
      }
    }
  } catch (const BudgetExhausted&) {
    report.value_queries = queries;
    report.converged = false;
    report.diagnostics = "value query budget exhausted";
    throw SamplerFailure("sample_hit_and_run: query budget exhausted", report);
  } catch (const QuadratureError& e) {
    report.value_queries = queries;
    report.converged = false;
    report.diagnostics = e.what();
    throw SamplerFailure(std::string("sample_hit_and_run: ") + e.what(), report);
  }

  report.value_queries = queries;
  report.acceptance_rate = 1.0;
  if (samples.size() >= 8) {
    std::vector<double> series(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) series[i] = samples[i][0];
    report.ess_estimate = effective_sample_size(series);
  } else {
    report.ess_estimate = static_cast<double>(samples.size());
  }
  report.converged = true;
  report.diagnostics = "hit-and-run with exact chord draws";
  return {std::move(samples), report};
}

std::pair<std::vector<Vec>, SamplerReport> sample_mala(
    const GibbsTarget& target, const SamplerConfig& config, std::uint64_t seed) {
  validate_config(config);
  if (!target.neg_log_density || !target.gradient) {
    throw std::invalid_argument("sample_mala: target needs neg_log_density and gradient");
  }
  const int dim = target.domain.dim();
  const int burn_in = resolved_burn_in(config, dim);
  const int thinning = resolved_thinning(config, dim);
  const long total_steps =
      static_cast<long>(burn_in) + static_cast<long>(thinning) * config.n_samples;

  SamplerReport report;
  std::int64_t queries = 0;
  Rng rng(seed);
  const auto value_at = [&](const Vec& v) {
    if (queries >= config.max_queries) throw BudgetExhausted{};
    ++queries;
    return target.neg_log_density(v);
  };
  const auto grad_at = [&](const Vec& v) {
    if (queries >= config.max_queries) throw BudgetExhausted{};
    ++queries;
    return target.gradient(v);
  };

  const double circum = euclidean_circumradius(target.domain);
  double h = config.step_size;
  if (!(h > 0.0)) {
    h = target.strong_convexity > 0.0
            ? std::pow(static_cast<double>(dim), -1.0 / 3.0) / target.strong_convexity
            : 0.1 * circum * circum / dim;
    h = std::min(h, circum * circum);
  }

  Vec x = target.domain.interior_point();
  std::vector<Vec> samples;
  samples.reserve(static_cast<std::size_t>(config.n_samples));

  try {
    double fx = value_at(x);
    Vec gx = grad_at(x);
    long post_accepted = 0, post_steps = 0;
    int window_accepted = 0, window_steps = 0;
    for (long step = 0; step < total_steps; ++step) {
      Vec noise(dim);
      for (int i = 0; i < dim; ++i) noise[i] = rng.normal();
      const Vec mean_fwd = x - 0.5 * h * gx;
      const Vec y = mean_fwd + std::sqrt(h) * noise;
      const double accept_u = rng.uniform();

      bool accepted = false;
      if (domain_membership(target.domain, y)) {
        const double fy = value_at(y);
        const Vec gy = grad_at(y);
        const Vec mean_rev = y - 0.5 * h * gy;
        const double log_fwd = -(y - mean_fwd).squaredNorm() / (2.0 * h);
        const double log_rev = -(x - mean_rev).squaredNorm() / (2.0 * h);
        const double log_alpha = fx - fy + log_rev - log_fwd;
        if (std::log(std::max(accept_u, 0x1.0p-60)) < log_alpha) {
          x = y;
          fx = fy;
          gx = gy;
          accepted = true;
        }
      }

      if (step < burn_in) {
        ++window_steps;
        if (accepted) ++window_accepted;
        if (window_steps == 50) {
          const double rate = static_cast<double>(window_accepted) / window_steps;
          h *= rate < 0.02 ? 0.1 : std::exp(0.6 * (rate - 0.55));
          h = std::min(std::max(h, 1e-18 * circum * circum), 4.0 * circum * circum);
          window_steps = 0;
          window_accepted = 0;
        }
      } else {
        ++post_steps;
        if (accepted) ++post_accepted;
        const long after_burn = step - burn_in + 1;
        if (after_burn % thinning == 0 &&
            static_cast<int>(samples.size()) < config.n_samples) {
          samples.push_back(x);
        }
      }
    }
    report.acceptance_rate =
        post_steps > 0 ? static_cast<double>(post_accepted) / post_steps : 0.0;
    report.value_queries = queries;
    if (post_steps > 0 && report.acceptance_rate < 0.05) {
      report.converged = false;
      report.diagnostics = "acceptance rate collapsed after burn-in";
      throw SamplerFailure("sample_mala: acceptance rate below 0.05", report);
    }
  } catch (const BudgetExhausted&) {
    report.value_queries = queries;
    report.converged = false;
    report.diagnostics = "value query budget exhausted";
    throw SamplerFailure("sample_mala: query budget exhausted", report);
  }

  report.value_queries = queries;
  if (samples.size() >= 8) {
    std::vector<double> series(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) series[i] = samples[i][0];
    report.ess_estimate = effective_sample_size(series);
  } else {
    report.ess_estimate = static_cast<double>(samples.size());
  }
  report.converged = true;
  report.diagnostics = "mala, step size " + std::to_string(h);
  return {std::move(samples), report};
}

double tv_distance_estimate(const std::vector<double>& samples,
                            const std::function<double(double)>& density,
                            double lo, double hi, int bins) {
  if (samples.empty()) throw std::invalid_argument("tv_distance_estimate: no samples");
  if (!(hi > lo)) throw std::invalid_argument("tv_distance_estimate: requires lo < hi");
  if (bins < 1) throw std::invalid_argument("tv_distance_estimate: bins must be positive");

  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  double outside = 0.0;
  const double inv_width = bins / (hi - lo);
  for (double s : samples) {
    if (s < lo || s >= hi) {
      outside += 1.0;
      continue;
    }
    int idx = static_cast<int>((s - lo) * inv_width);
    idx = std::min(idx, bins - 1);
    counts[static_cast<std::size_t>(idx)] += 1.0;
  }

  std::vector<double> ref(static_cast<std::size_t>(bins), 0.0);
  double ref_total = 0.0;
  for (int i = 0; i < bins; ++i) {
    const double a = lo + (hi - lo) * i / bins;
    const double b = lo + (hi - lo) * (i + 1) / bins;
    const QuadratureResult r = integrate_adaptive(density, a, b, 1e-9, 0.0, 200);
    ref[static_cast<std::size_t>(i)] = r.value;
    ref_total += r.value;
  }
  if (!(ref_total > 0.0)) {
    throw std::invalid_argument("tv_distance_estimate: reference density has no mass");
  }

  const double n = static_cast<double>(samples.size());
  double tv = outside / n;  // reference assigns no mass outside [lo, hi)
  for (int i = 0; i < bins; ++i) {
    tv += std::abs(counts[static_cast<std::size_t>(i)] / n -
                   ref[static_cast<std::size_t>(i)] / ref_total);
  }
  return 0.5 * tv;
}

double tv_distance_estimate_2d(const std::vector<Vec>& samples,
                               const std::function<double(const Vec&)>& density,
                               const Vec& lo, const Vec& hi, int bins_per_axis) {
  if (samples.empty()) throw std::invalid_argument("tv_distance_estimate_2d: no samples");
  if (lo.size() != 2 || hi.size() != 2) {
    throw std::invalid_argument("tv_distance_estimate_2d: lo and hi must be 2-vectors");
  }
  if (!(hi[0] > lo[0]) || !(hi[1] > lo[1])) {
    throw std::invalid_argument("tv_distance_estimate_2d: requires lo < hi");
  }
  if (bins_per_axis < 1) {
    throw std::invalid_argument("tv_distance_estimate_2d: bins must be positive");
  }

  const int m = bins_per_axis;
  std::vector<double> counts(static_cast<std::size_t>(m) * m, 0.0);
  double outside = 0.0;
  for (const Vec& s : samples) {
    if (s[0] < lo[0] || s[0] >= hi[0] || s[1] < lo[1] || s[1] >= hi[1]) {
      outside += 1.0;
      continue;
    }
    int i = std::min(static_cast<int>((s[0] - lo[0]) / (hi[0] - lo[0]) * m), m - 1);
    int j = std::min(static_cast<int>((s[1] - lo[1]) / (hi[1] - lo[1]) * m), m - 1);
    counts[static_cast<std::size_t>(i) * m + j] += 1.0;
  }

  std::vector<double> ref(static_cast<std::size_t>(m) * m, 0.0);
  double ref_total = 0.0;
  Vec point(2);
  for (int i = 0; i < m; ++i) {
    const double ax = lo[0] + (hi[0] - lo[0]) * i / m;
    const double bx = lo[0] + (hi[0] - lo[0]) * (i + 1) / m;
    for (int j = 0; j < m; ++j) {
      const double ay = lo[1] + (hi[1] - lo[1]) * j / m;
      const double by = lo[1] + (hi[1] - lo[1]) * (j + 1) / m;
      const double cell = gk15_panel(
          [&](double x) {
            return gk15_panel(
                [&](double y) {
                  point[0] = x;
                  point[1] = y;
                  return density(point);
                },
                ay, by, nullptr);
          },
          ax, bx, nullptr);
      ref[static_cast<std::size_t>(i) * m + j] = cell;
      ref_total += cell;
    }
  }
  if (!(ref_total > 0.0)) {
    throw std::invalid_argument("tv_distance_estimate_2d: reference density has no mass");
  }

  const double n = static_cast<double>(samples.size());
  double tv = outside / n;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    tv += std::abs(counts[c] / n - ref[c] / ref_total);
  }
  return 0.5 * tv;
}

double effective_sample_size(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 2) return static_cast<double>(n);
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  const std::size_t max_lag = std::min<std::size_t>(n - 1, 2048);
  std::vector<double> gamma(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) {
      s += (series[i] - mean) * (series[i + k] - mean);
    }
    gamma[k] = s / n;
  }
  if (!(gamma[0] > 0.0)) return static_cast<double>(n);

  // Geyer initial positive sequence: sum paired autocovariances while the
  // pair sums stay positive.
  double acc = 0.0;
  for (std::size_t k = 1; k + 1 <= max_lag; k += 2) {
    const double pair = gamma[k] + gamma[k + 1];
    if (pair <= 0.0) break;
    acc += pair;
  }
  const double ess = n * gamma[0] / (gamma[0] + 2.0 * acc);
  return std::min(std::max(ess, 1.0), static_cast<double>(n));
}

}  // namespace dpnormopt
