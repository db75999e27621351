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

#include "dpnormopt/mechanism.hpp"

#include <cmath>

namespace dpnormopt {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kErm: return "erm";
    case Variant::kSco: return "sco";
    case Variant::kScErm: return "sc-erm";
    case Variant::kScSco: return "sc-sco";
  }
  throw std::invalid_argument("variant_name: unknown variant");
}

Variant parse_variant(const std::string& name) {
  if (name == "erm") return Variant::kErm;
  if (name == "sco") return Variant::kSco;
  if (name == "sc-erm") return Variant::kScErm;
  if (name == "sc-sco") return Variant::kScSco;
  throw std::invalid_argument("parse_variant: unknown variant '" + name + "'");
}

namespace {

void check_common(double G, int d, int n, double epsilon, double delta, double c) {
  if (!(G > 0.0)) throw std::invalid_argument("params: G must be positive");
  if (d < 1) throw std::invalid_argument("params: d must be at least 1");
  if (n < 1) throw std::invalid_argument("params: n must be at least 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("params: epsilon must be positive");
  if (!(delta > 0.0 && delta < 0.5)) {
    throw std::invalid_argument("params: delta must lie in (0, 1/2)");
  }
  if (c != 1.0 && c != 2.0) {
    throw std::invalid_argument("params: sensitivity factor c must be 1 or 2");
  }
}

}  // namespace

double privacy_log_factor(double delta) {
  if (!(delta > 0.0 && delta < 0.5)) {
    throw std::invalid_argument("privacy_log_factor: delta must lie in (0, 1/2)");
  }
  return std::log(1.0 / (2.0 * delta));
}

double mu_from_k(double G, double c, double k, int n, double epsilon, double delta) {
  // Extended precision with a single final rounding keeps the defining
  // identity c G sqrt(k) / (n sqrt(mu)) = eps / sqrt(2 log(1/(2 delta)))
  // within one ulp.
  const long double cg = static_cast<long double>(c) * G;
  const long double ne = static_cast<long double>(n) * epsilon;
  const long double L = static_cast<long double>(privacy_log_factor(delta));
  return static_cast<double>(2.0L * cg * cg * k * L / (ne * ne));
}

MechanismParams erm_params(double G, double Theta, int d, int n, double epsilon,
                           double delta, double c) {
  check_common(G, d, n, epsilon, delta, c);
  if (!(Theta > 0.0)) throw std::invalid_argument("erm_params: Theta must be positive");
  const double L = privacy_log_factor(delta);
  MechanismParams params;
  params.k = std::sqrt(static_cast<double>(d)) * n * epsilon /
             (c * G * std::sqrt(2.0 * Theta * L));
  params.mu = mu_from_k(G, c, params.k, n, epsilon, delta);
  params.epsilon = epsilon;
  params.delta = delta;
  params.variant = Variant::kErm;
  params.c = c;
  return params;
}

MechanismParams sco_params(double G, double Theta, int d, int n, double epsilon,
                           double delta, double c) {
  check_common(G, d, n, epsilon, delta, c);
  if (!(Theta > 0.0)) throw std::invalid_argument("sco_params: Theta must be positive");
  const double L = privacy_log_factor(delta);
  const double cg = c * G;
  const double ne = n * epsilon;
  const double C1 = 2.0 * cg * cg * Theta * L / (ne * ne);
  const double C2 = n * epsilon * epsilon / (2.0 * L);
  MechanismParams params;
  params.k = std::sqrt((d + C2) / C1);
  params.mu = mu_from_k(G, c, params.k, n, epsilon, delta);
  params.epsilon = epsilon;
  params.delta = delta;
  params.variant = Variant::kSco;
  params.c = c;
  return params;
}

namespace {

MechanismParams sc_params(double G, double mu_loss, int n, double epsilon,
                          double delta, double c, Variant variant) {
  check_common(G, 1, n, epsilon, delta, c);
  if (!(mu_loss > 0.0)) throw std::invalid_argument("params: mu_loss must be positive");
  const double L = privacy_log_factor(delta);
  const double cg = c * G;
  const double ne = n * epsilon;
  MechanismParams params;
  params.k = ne * ne * mu_loss / (2.0 * cg * cg * L);
  params.mu = 0.0;
  params.epsilon = epsilon;
  params.delta = delta;
  params.variant = variant;
  params.c = c;
  params.mu_loss = mu_loss;
  return params;
}

}  // namespace

MechanismParams sc_erm_params(double G, double mu_loss, int n, double epsilon,
                              double delta, double c) {
  return sc_params(G, mu_loss, n, epsilon, delta, c, Variant::kScErm);
}

MechanismParams sc_sco_params(double G, double mu_loss, int n, double epsilon,
                              double delta, double c) {
  return sc_params(G, mu_loss, n, epsilon, delta, c, Variant::kScSco);
}

double erm_utility_bound(double G, double Theta, int d, int n, double epsilon,
                         double delta) {
  check_common(G, d, n, epsilon, delta, 1.0);
  if (!(Theta > 0.0)) throw std::invalid_argument("erm_utility_bound: Theta must be positive");
  const double L = privacy_log_factor(delta);
  return G * std::sqrt(Theta) * std::sqrt(8.0 * d * L) / (n * epsilon);
}

double sco_utility_bound(double G, double Theta, int d, int n, double epsilon,
                         double delta) {
  check_common(G, d, n, epsilon, delta, 1.0);
  if (!(Theta > 0.0)) throw std::invalid_argument("sco_utility_bound: Theta must be positive");
  const double L = privacy_log_factor(delta);
  return G * std::sqrt(Theta) *
         (std::sqrt(8.0 * d * L) / (n * epsilon) + std::sqrt(8.0 / n));
}

double sc_erm_utility_bound(double G, double mu_loss, int d, int n, double epsilon,
                            double delta) {
  check_common(G, d, n, epsilon, delta, 1.0);
  if (!(mu_loss > 0.0)) {
    throw std::invalid_argument("sc_erm_utility_bound: mu_loss must be positive");
  }
  const double L = privacy_log_factor(delta);
  const double ne = n * epsilon;
  return 2.0 * d * G * G * L / (ne * ne * mu_loss);
}

double sc_sco_utility_bound(double G, double mu_loss, int d, int n, double epsilon,
                            double delta) {
  check_common(G, d, n, epsilon, delta, 1.0);
  if (!(mu_loss > 0.0)) {
    throw std::invalid_argument("sc_sco_utility_bound: mu_loss must be positive");
  }
  const double L = privacy_log_factor(delta);
  return G * G / (n * mu_loss) * (1.0 + 2.0 * d * L / (n * epsilon * epsilon));
}

namespace {

bool is_sc_variant(Variant v) {
  return v == Variant::kScErm || v == Variant::kScSco;
}

void check_params(const MechanismParams& params) {
  if (!(params.k > 0.0)) throw std::invalid_argument("build_target: k must be positive");
  if (params.mu < 0.0) throw std::invalid_argument("build_target: mu must be nonnegative");
  if (!(params.delta > 0.0 && params.delta < 0.5)) {
    throw std::invalid_argument("build_target: delta must lie in (0, 1/2)");
  }
  if (is_sc_variant(params.variant) && !(params.mu_loss > 0.0)) {
    throw std::invalid_argument("build_target: sc variant needs positive mu_loss");
  }
}

void check_norms_match(const NormSpec& a, const NormSpec& b, const char* what) {
  const bool same = a.kind() == b.kind() && a.p() == b.p() && a.dim() == b.dim() &&
                    a.rows() == b.rows() && a.cols() == b.cols();
  if (!same) throw std::invalid_argument(std::string(what) + ": norms do not match");
}

// Shared assembly. reg may be null for the sc-* variants.
GibbsTarget assemble_target(const LossModel& model, const Regularizer* reg,
                            const Domain& domain, const MechanismParams& params) {
  check_params(params);
  if (model.dim() != domain.dim()) {
    throw std::invalid_argument("build_target: model and domain dimensions differ");
  }
  check_norms_match(model.norm(), domain.norm(), "build_target");
  if (reg != nullptr) {
    check_norms_match(model.norm(), reg->norm, "build_target");
    if (reg->x0.size() != model.dim()) {
      throw std::invalid_argument("build_target: regularizer center dimension differs");
    }
  }

  const double k = params.k;
  const double mu = params.mu;
  const bool use_reg = reg != nullptr && mu > 0.0;

  GibbsTarget target(domain);
  if (use_reg) {
    const Regularizer* r = reg;
    target.neg_log_density = [&model, r, k, mu](const Vec& x) {
      return k * (model.empirical_risk(x) + mu * r->value(x));
    };
    target.gradient = [&model, r, k, mu](const Vec& x) {
      return Vec(k * (model.risk_subgradient(x) + mu * r->gradient(x)));
    };
    target.line_restriction = [&model, r, k, mu](const Vec& x0, const Vec& u) {
      LineFunction loss_line = model.risk_line(x0, u);
      LineFunction reg_line;
      if (r->line_value) {
        reg_line = r->line_value(x0, u);
      } else {
        Vec buf = x0;
        reg_line.value = [r, buf = std::move(buf), x0, u](double t) mutable {
          buf = x0;
          buf += t * u;
          return r->value(buf);
        };
      }
      LineFunction line;
      line.breakpoints = std::move(loss_line.breakpoints);
      line.breakpoints.insert(line.breakpoints.end(), reg_line.breakpoints.begin(),
                              reg_line.breakpoints.end());
      std::sort(line.breakpoints.begin(), line.breakpoints.end());
      line.value = [k, mu, fl = std::move(loss_line.value),
                    fr = std::move(reg_line.value)](double t) {
        return k * (fl(t) + mu * fr(t));
      };
      return line;
    };
  } else {
    target.neg_log_density = [&model, k](const Vec& x) {
      return k * model.empirical_risk(x);
    };
    target.gradient = [&model, k](const Vec& x) {
      return Vec(k * model.risk_subgradient(x));
    };
    target.line_restriction = [&model, k](const Vec& x0, const Vec& u) {
      LineFunction line = model.risk_line(x0, u);
      line.value = [k, f = std::move(line.value)](double t) { return k * f(t); };
      return line;
    };
  }
  target.strong_convexity =
      is_sc_variant(params.variant) ? k * params.mu_loss : k * mu;
  target.lipschitz_of_difference_bound =
      params.c * k * model.lipschitz_bound() / model.n();
  return target;
}

}  // namespace

GibbsTarget build_target(const LossModel& model, const Regularizer& reg,
                         const MechanismParams& params) {
  return assemble_target(model, &reg, reg.domain, params);
}

GibbsTarget build_target(const LossModel& model, const Domain& domain,
                         const MechanismParams& params) {
  if (!is_sc_variant(params.variant)) {
    throw std::invalid_argument(
        "build_target: the regularizer-free form is for the sc-* variants");
  }
  return assemble_target(model, nullptr, domain, params);
}

namespace {

std::pair<Vec, SolveReport> solve_from_target(const GibbsTarget& target,
                                              const LossModel& model,
                                              const Regularizer* reg,
                                              const MechanismParams& params,
                                              const SamplerConfig& config,
                                              std::uint64_t seed, double delta_tv) {
  SamplerConfig one = config;
  one.n_samples = 1;

  std::vector<Vec> samples;
  SamplerReport sampler_report;
  if (one.method == SamplerMethod::kExact1D) {
    if (target.domain.dim() != 1) {
      throw std::invalid_argument("solve_private: exact-1d needs a 1-dimensional domain");
    }
    const Vec origin = target.domain.interior_point();
    Vec dir(1);
    dir[0] = 1.0;
    const Chord chord = chord_intersect(target.domain, origin, dir);
    std::function<double(double)> line;
    if (target.line_restriction) {
      line = target.line_restriction(origin, dir).value;
    } else {
      line = [&target, origin, dir](double t) {
        return target.neg_log_density(origin + t * dir);
      };
    }
    auto drawn = sample_exact_1d(line, chord.tmin, chord.tmax, 1,
                                 one.quadrature_tol, seed);
    Vec x(1);
    x[0] = origin[0] + drawn.first[0];
    samples.push_back(x);
    sampler_report = drawn.second;
  } else if (one.method == SamplerMethod::kHitAndRun) {
    auto drawn = sample_hit_and_run(target, one, seed);
    samples = std::move(drawn.first);
    sampler_report = drawn.second;
  } else {
    auto drawn = sample_mala(target, one, seed);
    samples = std::move(drawn.first);
    sampler_report = drawn.second;
  }
  if (samples.empty()) {
    throw SamplerFailure("solve_private: sampler produced no sample", sampler_report);
  }

  SolveReport report;
  report.sampler = sampler_report;
  report.epsilon = params.epsilon;
  report.delta_mech = params.delta;
  report.delta_tv = std::isnan(delta_tv) ? params.delta : delta_tv;
  report.delta_total = report.delta_mech + report.delta_tv;

  const double G = model.lipschitz_bound();
  const double G_eff = G > 0.0 ? G : 1.0;  // constant losses: bound still defined
  const int d = target.domain.dim();
  const int n = model.n();
  switch (params.variant) {
    case Variant::kErm:
      report.utility_bound = erm_utility_bound(G_eff, reg->theta, d, n,
                                               params.epsilon, params.delta);
      break;
    case Variant::kSco:
      report.utility_bound = sco_utility_bound(G_eff, reg->theta, d, n,
                                               params.epsilon, params.delta);
      break;
    case Variant::kScErm:
      report.utility_bound = sc_erm_utility_bound(G_eff, params.mu_loss, d, n,
                                                  params.epsilon, params.delta);
      break;
    case Variant::kScSco:
      report.utility_bound = sc_sco_utility_bound(G_eff, params.mu_loss, d, n,
                                                  params.epsilon, params.delta);
      break;
  }
  return {samples.front(), report};
}

}  // namespace

std::pair<Vec, SolveReport> solve_private(const LossModel& model,
                                          const Regularizer& reg,
                                          const MechanismParams& params,
                                          const SamplerConfig& config,
                                          std::uint64_t seed, double delta_tv) {
  const GibbsTarget target = build_target(model, reg, params);
  return solve_from_target(target, model, &reg, params, config, seed, delta_tv);
}

std::pair<Vec, SolveReport> solve_private(const LossModel& model, const Domain& domain,
                                          const MechanismParams& params,
                                          const SamplerConfig& config,
                                          std::uint64_t seed, double delta_tv) {
  const GibbsTarget target = build_target(model, domain, params);
  return solve_from_target(target, model, nullptr, params, config, seed, delta_tv);
}

MinimizeResult minimize_empirical_risk(const LossModel& model, const Domain& domain,
                                       double tol) {
  if (model.dim() != domain.dim()) {
    throw std::invalid_argument("minimize_empirical_risk: dimensions differ");
  }
  return minimize_convex([&model](const Vec& x) { return model.empirical_risk(x); },
                         [&model](const Vec& x) { return model.risk_subgradient(x); },
                         domain, tol);
}

}  // namespace dpnormopt
