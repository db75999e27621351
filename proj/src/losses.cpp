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

#include "dpnormopt/losses.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace dpnormopt {
namespace {

double loss_of_margin(LossFamily family, double margin, double b) {
  switch (family) {
    case LossFamily::kLinear:
      return margin;
    case LossFamily::kAbsLinear:
      return std::abs(margin - b);
    case LossFamily::kHinge:
      return std::max(0.0, 1.0 - b * margin);
  }
  throw std::logic_error("unknown loss family");
}

// d(loss)/d(margin); any subgradient choice at kinks.
double loss_slope(LossFamily family, double margin, double b) {
  switch (family) {
    case LossFamily::kLinear:
      return 1.0;
    case LossFamily::kAbsLinear:
      return margin >= b ? 1.0 : -1.0;
    case LossFamily::kHinge:
      return (1.0 - b * margin) > 0.0 ? -b : 0.0;
  }
  throw std::logic_error("unknown loss family");
}

}  // namespace

LossModel::LossModel(LossFamily family, const NormSpec& norm, std::vector<Sample> data)
    : family_(family), norm_(norm), data_(std::move(data)) {
  if (data_.empty()) throw std::invalid_argument("loss model requires a non-empty dataset");
  const NormSpec dual = norm_.dual();
  features_.resize(static_cast<Eigen::Index>(data_.size()), norm_.dim());
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const Sample& s = data_[i];
    if (s.a.size() != norm_.dim()) throw std::invalid_argument("sample feature dimension mismatch");
    if (family_ == LossFamily::kHinge && std::abs(s.b) != 1.0) {
      throw std::invalid_argument("hinge labels must be -1 or +1");
    }
    features_.row(static_cast<Eigen::Index>(i)) = s.a.transpose();
    lipschitz_ = std::max(lipschitz_, norm_value(dual, s.a));
  }
}

double LossModel::sample_loss(const Vec& x, int index) const {
  if (index < 0 || index >= n()) throw std::invalid_argument("sample index out of range");
  const Sample& s = data_[static_cast<std::size_t>(index)];
  return loss_of_margin(family_, s.a.dot(x), s.b);
}

Vec LossModel::sample_subgradient(const Vec& x, int index) const {
  if (index < 0 || index >= n()) throw std::invalid_argument("sample index out of range");
  const Sample& s = data_[static_cast<std::size_t>(index)];
  return loss_slope(family_, s.a.dot(x), s.b) * s.a;
}

Vec LossModel::margins(const Vec& x) const {
  if (x.size() != dim()) throw std::invalid_argument("point dimension mismatch");
  return features_ * x;
}

double LossModel::risk_from_margins(const Vec& m) const {
  double total = 0.0;
  for (int i = 0; i < n(); ++i) {
    total += loss_of_margin(family_, m[i], data_[static_cast<std::size_t>(i)].b);
  }
  return total / static_cast<double>(n());
}

double LossModel::risk_along(const Vec& m0, const Vec& mu, double t) const {
  double total = 0.0;
  for (int i = 0; i < n(); ++i) {
    total += loss_of_margin(family_, m0[i] + t * mu[i], data_[static_cast<std::size_t>(i)].b);
  }
  return total / static_cast<double>(n());
}

double LossModel::empirical_risk(const Vec& x) const { return risk_from_margins(margins(x)); }

LineFunction LossModel::risk_line(const Vec& x0, const Vec& u) const {
  const Vec m0 = margins(x0);
  const Vec mu = margins(u);
  const double inv_n = 1.0 / static_cast<double>(n());
  LineFunction line;

  if (family_ == LossFamily::kLinear) {
    const double base = m0.mean();
    const double slope = mu.mean();
    line.value = [base, slope](double t) { return base + t * slope; };
    return line;
  }

  // Each remaining per-sample loss is w * max(0, s*(t - tau)) or w * |t - tau|,
  // so the sum is piecewise linear with kinks at the tau. Sorted kinks with
  // prefix sums of the weights give an O(log n) point evaluation.
  struct Hinge {
    double tau, w;  // contributes w * (t - tau) once active
  };
  // Slopes below this bound cannot move the loss by more than ~1e-300 over
  // any representable chord; folding them into the constant avoids inf taus.
  constexpr double kFlat = 1e-300;
  double constant = 0.0;
  std::vector<Hinge> up;    // active for t > tau
  std::vector<Hinge> down;  // active for t < tau, slope -w

  for (int i = 0; i < n(); ++i) {
    const double b = data_[static_cast<std::size_t>(i)].b;
    if (family_ == LossFamily::kAbsLinear) {
      const double r = m0[i] - b;
      const double s = mu[i];
      if (std::abs(s) < kFlat) {
        constant += std::abs(r);
      } else {
        const double tau = -r / s;
        up.push_back({tau, std::abs(s)});
        down.push_back({tau, std::abs(s)});
      }
    } else {  // kHinge: max(0, c - s*t) with c = 1 - b*m0, s = b*mu
      const double c = 1.0 - b * m0[i];
      const double s = b * mu[i];
      if (std::abs(s) < kFlat) {
        constant += std::max(0.0, c);
      } else if (s > 0.0) {
        down.push_back({c / s, s});  // positive while t < c/s
      } else {
        up.push_back({c / s, -s});  // positive while t > c/s
      }
    }
  }

  const auto by_tau = [](const Hinge& a, const Hinge& b) { return a.tau < b.tau; };
  std::sort(up.begin(), up.end(), by_tau);
  std::sort(down.begin(), down.end(), by_tau);

  // Prefix sums over the sorted kinks; entry j covers the first j hinges.
  const auto prefixes = [](const std::vector<Hinge>& h, std::vector<double>* w,
                           std::vector<double>* wt, std::vector<double>* taus) {
    w->assign(h.size() + 1, 0.0);
    wt->assign(h.size() + 1, 0.0);
    taus->resize(h.size());
    for (std::size_t j = 0; j < h.size(); ++j) {
      (*w)[j + 1] = (*w)[j] + h[j].w;
      (*wt)[j + 1] = (*wt)[j] + h[j].w * h[j].tau;
      (*taus)[j] = h[j].tau;
    }
  };
  auto up_w = std::make_shared<std::vector<double>>();
  auto up_wt = std::make_shared<std::vector<double>>();
  auto up_tau = std::make_shared<std::vector<double>>();
  auto dn_w = std::make_shared<std::vector<double>>();
  auto dn_wt = std::make_shared<std::vector<double>>();
  auto dn_tau = std::make_shared<std::vector<double>>();
  prefixes(up, up_w.get(), up_wt.get(), up_tau.get());
  prefixes(down, dn_w.get(), dn_wt.get(), dn_tau.get());

  line.breakpoints.reserve(up.size() + down.size());
  for (const Hinge& h : up) line.breakpoints.push_back(h.tau);
  for (const Hinge& h : down) line.breakpoints.push_back(h.tau);
  std::sort(line.breakpoints.begin(), line.breakpoints.end());

  line.value = [constant, inv_n, up_w, up_wt, up_tau, dn_w, dn_wt, dn_tau](double t) {
    // up hinges with tau <= t contribute w*(t - tau).
    const std::size_t cu = static_cast<std::size_t>(
        std::upper_bound(up_tau->begin(), up_tau->end(), t) - up_tau->begin());
    double total = constant + t * (*up_w)[cu] - (*up_wt)[cu];
    // down hinges with tau >= t contribute w*(tau - t).
    const std::size_t cd = static_cast<std::size_t>(
        std::lower_bound(dn_tau->begin(), dn_tau->end(), t) - dn_tau->begin());
    total += ((*dn_wt).back() - (*dn_wt)[cd]) - t * ((*dn_w).back() - (*dn_w)[cd]);
    return total * inv_n;
  };
  return line;
}

Vec LossModel::risk_subgradient(const Vec& x) const {
  const Vec m = margins(x);
  Vec slopes(n());
  for (int i = 0; i < n(); ++i) {
    slopes[i] = loss_slope(family_, m[i], data_[static_cast<std::size_t>(i)].b);
  }
  return features_.transpose() * slopes / static_cast<double>(n());
}

LossModel LossModel::with_replaced(int index, Sample s) const {
  if (index < 0 || index >= n()) throw std::invalid_argument("sample index out of range");
  std::vector<Sample> d = data_;
  d[static_cast<std::size_t>(index)] = std::move(s);
  return LossModel(family_, norm_, std::move(d));
}

double empirical_risk(const LossModel& model, const Vec& x) { return model.empirical_risk(x); }

LossModel neighboring_perturbation(const LossModel& model, int index, const Sample& s) {
  return model.with_replaced(index, s);
}

double lipschitz_audit(const std::function<double(const Vec&)>& f,
                       const NormSpec& norm, const Domain& dom, int trials,
                       std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("lipschitz_audit: trials must be >= 1");
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Vec x = sample_uniform(dom, rng);
    const Vec y = sample_uniform(dom, rng);
    const double dist = norm_value(norm, Vec(x - y));
    if (dist <= 0.0) continue;
    worst = std::max(worst, std::abs(f(x) - f(y)) / dist);
  }
  return worst;
}

double lipschitz_audit(const LossModel& model, const Domain& dom, int trials,
                       std::uint64_t seed) {
  if (dom.dim() != model.dim()) throw std::invalid_argument("lipschitz_audit: domain dimension mismatch");
  return lipschitz_audit([&model](const Vec& x) { return model.empirical_risk(x); },
                         model.norm(), dom, trials, seed);
}

LossModel load_dataset_csv(const std::string& path, LossFamily family,
                           const NormSpec& norm) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("dataset is empty: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(field);
  }
  const int d = norm.dim();
  bool has_label = false;
  if (static_cast<int>(header.size()) == d + 1 && header.back() == "b") {
    has_label = true;
  } else if (static_cast<int>(header.size()) != d) {
    throw std::invalid_argument("dataset header must be a_1,...,a_" + std::to_string(d) + "[,b]");
  }
  for (int i = 0; i < d; ++i) {
    if (header[static_cast<std::size_t>(i)] != "a_" + std::to_string(i + 1)) {
      throw std::invalid_argument("dataset header must be a_1,...,a_" + std::to_string(d) + "[,b]");
    }
  }
  if (!has_label && family != LossFamily::kLinear) {
    throw std::invalid_argument("this loss family requires a label column b");
  }

  std::vector<Sample> samples;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    Sample s;
    s.a.resize(d);
    const int expected = d + (has_label ? 1 : 0);
    int col = 0;
    while (std::getline(ss, field, ',')) {
      if (col >= expected) break;
      double v;
      try {
        std::size_t pos = 0;
        v = std::stod(field, &pos);
        if (pos != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw std::invalid_argument("dataset line " + std::to_string(line_no) +
                                    ": cannot parse value '" + field + "'");
      }
      if (col < d) {
        s.a[col] = v;
      } else {
        s.b = v;
      }
      ++col;
    }
    if (col != expected) {
      throw std::invalid_argument("dataset line " + std::to_string(line_no) +
                                  ": expected " + std::to_string(expected) + " fields");
    }
    samples.push_back(std::move(s));
  }
  return LossModel(family, norm, std::move(samples));
}

PopulationEstimate population_risk_estimate(const PopulationSpec& pop, const Vec& x,
                                            int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("population_risk_estimate: m must be >= 1");
  if (!pop.generator) throw std::invalid_argument("population_risk_estimate: generator not set");
  Rng rng(seed);
  double sum = 0.0, sumsq = 0.0;
  for (int j = 0; j < m; ++j) {
    const Sample s = pop.generator(rng);
    const double v = loss_of_margin(pop.family, s.a.dot(x), s.b);
    sum += v;
    sumsq += v * v;
  }
  PopulationEstimate est;
  est.m = m;
  est.mean = sum / m;
  if (m > 1) {
    const double var = std::max(0.0, (sumsq - m * est.mean * est.mean) / (m - 1));
    est.std_error = std::sqrt(var / m);
  }
  return est;
}

PopulationSpec abs_linear_population(const NormSpec& norm, const Vec& minimizer) {
  if (minimizer.size() != norm.dim()) throw std::invalid_argument("abs_linear_population: minimizer dimension mismatch");
  PopulationSpec pop;
  pop.family = LossFamily::kAbsLinear;
  pop.norm = norm;
  pop.reference_minimizer = minimizer;
  const NormSpec dual = norm.dual();
  pop.generator = [dual, minimizer](Rng& rng) {
    Vec g(dual.dim());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.normal();
    const double n = norm_value(dual, g);
    Sample s;
    s.a = n > 0.0 ? Vec(g / n) : Vec(Vec::Unit(dual.dim(), 0));
    s.b = s.a.dot(minimizer);
    return s;
  };
  return pop;
}

}  // namespace dpnormopt
