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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dpnormopt/samplers.hpp"

using namespace dpnormopt;

namespace {

double ks_vs_uniform(std::vector<double> xs, double lo, double hi) {
  std::sort(xs.begin(), xs.end());
  const int n = static_cast<int>(xs.size());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = (xs[i] - lo) / (hi - lo);
    ks = std::max(ks, std::abs(u - (i + 1.0) / n));
    ks = std::max(ks, std::abs(u - static_cast<double>(i) / n));
  }
  return ks;
}

GibbsTarget gaussian_on_ball(int d, double radius) {
  const NormSpec norm = NormSpec::vector_lp(2.0, d);
  GibbsTarget target(Domain::ball(norm, Vec::Zero(d), radius));
  target.neg_log_density = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  target.gradient = [](const Vec& x) { return Vec(x); };
  target.strong_convexity = 1.0;
  return target;
}

GibbsTarget uniform_on_unit_box(int d) {
  const NormSpec norm = NormSpec::vector_lp(2.0, d);
  GibbsTarget target(Domain::box(norm, Vec::Zero(d), Vec::Ones(d)));
  target.neg_log_density = [](const Vec&) { return 0.0; };
  target.gradient = [d](const Vec&) { return Vec(Vec::Zero(d)); };
  return target;
}

}  // namespace

TEST_CASE("exact 1d sampling: truncated standard normal") {
  const int n = 100000;
  auto [xs, rep] = sample_exact_1d(
      [](double x) { return 0.5 * x * x; }, -8.0, 8.0, n, 1e-10, 42);
  REQUIRE(static_cast<int>(xs.size()) == n);
  double mean = 0.0, m2 = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  for (double x : xs) m2 += (x - mean) * (x - mean);
  const double var = m2 / (n - 1);
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 0.1);
  CHECK(rep.converged);
  CHECK(rep.value_queries > 0);
}

TEST_CASE("exact 1d sampling: uniform and laplace oracles") {
  const int n = 100000;
  auto [us, urep] = sample_exact_1d([](double) { return 0.0; }, 0.0, 1.0, n,
                                    1e-10, 7);
  CHECK(ks_vs_uniform(us, 0.0, 1.0) < 1.63 / std::sqrt(static_cast<double>(n)));

  auto [ls, lrep] = sample_exact_1d([](double x) { return std::abs(x); },
                                    -10.0, 10.0, n, 1e-10, 8);
  double mean_abs = 0.0;
  for (double x : ls) mean_abs += std::abs(x);
  mean_abs /= n;
  // E|x| = 1 for Laplace(1); truncation at 10 shifts it by < 5e-4.
  CHECK(std::abs(mean_abs - 1.0) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("exact 1d sampler internals") {
  std::int64_t count = 0;
  Exact1DSampler s([](double x) { return 0.5 * x * x; }, -8.0, 8.0, 1e-10,
                   &count);
  CHECK(std::abs(s.mode()) < 1e-6);
  CHECK(count > 0);
  // CDF is a proper monotone distribution function.
  CHECK(s.cdf(-8.0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(s.cdf(8.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-6));
  double prev = 0.0;
  for (double t = -8.0; t <= 8.0; t += 0.5) {
    const double c = s.cdf(t);
    CHECK(c >= prev - 1e-12);
    prev = c;
  }
  // Total mass of exp(-x^2/2) is sqrt(2 pi) up to truncation.
  CHECK(s.total_mass() ==
        doctest::Approx(std::sqrt(2.0 * 3.14159265358979323846)).epsilon(1e-8));

  // Draws are deterministic given the seed.
  Rng r1(5), r2(5);
  for (int i = 0; i < 10; ++i) CHECK(s.draw(r1) == s.draw(r2));
}

TEST_CASE("breakpoint seeding reproduces kinked densities exactly") {
  const auto f = [](double x) { return std::abs(x); };
  const std::vector<double> kinks{0.0};
  Exact1DSampler seeded(f, -10.0, 10.0, 1e-10, nullptr, &kinks);
  Exact1DSampler plain(f, -10.0, 10.0, 1e-10);
  // Both agree with the analytic truncated-Laplace CDF.
  const double z = 2.0 * (1.0 - std::exp(-10.0));
  const auto analytic = [&](double t) {
    if (t <= 0.0) return (std::exp(t) - std::exp(-10.0)) / z;
    return ((1.0 - std::exp(-10.0)) + (1.0 - std::exp(-t))) / z;
  };
  for (double t : {-6.0, -2.0, -0.5, 0.0, 0.5, 1.0, 4.0}) {
    CHECK(seeded.cdf(t) == doctest::Approx(analytic(t)).epsilon(1e-9));
    CHECK(plain.cdf(t) == doctest::Approx(analytic(t)).epsilon(1e-7));
  }
}

TEST_CASE("hit-and-run matches a gaussian on a large ball") {
  GibbsTarget target = gaussian_on_ball(2, 6.0);
  SamplerConfig config;
  config.method = SamplerMethod::kHitAndRun;
  config.n_samples = 10000;
  auto [samples, rep] = sample_hit_and_run(target, config, 99);
  REQUIRE(static_cast<int>(samples.size()) == config.n_samples);
  CHECK(rep.converged);

  Vec mean = Vec::Zero(2);
  for (const Vec& x : samples) mean += x;
  mean /= config.n_samples;
  Mat cov = Mat::Zero(2, 2);
  for (const Vec& x : samples) cov += (x - mean) * (x - mean).transpose();
  cov /= config.n_samples - 1;

  CHECK(std::abs(mean[0]) < 0.05);
  CHECK(std::abs(mean[1]) < 0.05);
  CHECK(std::abs(cov(0, 0) - 1.0) < 0.1);
  CHECK(std::abs(cov(1, 1) - 1.0) < 0.1);
  CHECK(std::abs(cov(0, 1)) < 0.05);
  CHECK(rep.ess_estimate > 100.0);
}

TEST_CASE("hit-and-run on a uniform box") {
  GibbsTarget target = uniform_on_unit_box(2);
  SamplerConfig config;
  config.n_samples = 10000;
  auto [samples, rep] = sample_hit_and_run(target, config, 3);
  for (int j = 0; j < 2; ++j) {
    std::vector<double> coord;
    coord.reserve(samples.size());
    for (const Vec& x : samples) coord.push_back(x[j]);
    CHECK(ks_vs_uniform(coord, 0.0, 1.0) < 0.03);
  }
  CHECK(rep.converged);
}

TEST_CASE("hit-and-run value queries are counted exactly") {
  const NormSpec norm = NormSpec::vector_lp(2.0, 2);
  GibbsTarget target(Domain::ball(norm, Vec::Zero(2), 2.0));
  std::int64_t my_count = 0;
  target.neg_log_density = [&my_count](const Vec& x) {
    ++my_count;
    return x.squaredNorm();
  };
  SamplerConfig config;
  config.n_samples = 50;
  auto [samples, rep] = sample_hit_and_run(target, config, 17);
  CHECK(rep.value_queries == my_count);
  CHECK(static_cast<int>(samples.size()) == 50);
}

TEST_CASE("hit-and-run is deterministic and shift invariant") {
  GibbsTarget target = gaussian_on_ball(2, 3.0);
  SamplerConfig config;
  config.n_samples = 40;
  auto [s1, r1] = sample_hit_and_run(target, config, 21);
  auto [s2, r2] = sample_hit_and_run(target, config, 21);
  REQUIRE(s1.size() == s2.size());
  for (size_t i = 0; i < s1.size(); ++i) CHECK((s1[i] - s2[i]).norm() == 0.0);

  // Adding a constant to the exponent changes the draws only through the
  // absorption error of f - f(mode) at magnitude 1000, about 1e-13.
  GibbsTarget shifted = gaussian_on_ball(2, 3.0);
  shifted.neg_log_density = [](const Vec& x) {
    return 0.5 * x.squaredNorm() + 1000.0;
  };
  auto [s3, r3] = sample_hit_and_run(shifted, config, 21);
  for (size_t i = 0; i < s1.size(); ++i) CHECK((s1[i] - s3[i]).norm() <= 1e-12);
}

TEST_CASE("one dimensional chains agree with the quadrature density") {
  // Strongly convex target with a kink; stationary law checked against the
  // same density integrated by quadrature.
  const auto f = [](double x) {
    return 0.7 * (x - 0.3) * (x - 0.3) + 0.5 * std::abs(x);
  };
  const NormSpec norm = NormSpec::vector_lp(2.0, 1);
  GibbsTarget target(Domain::box(norm, -3.0 * Vec::Ones(1), 4.0 * Vec::Ones(1)));
  target.neg_log_density = [&f](const Vec& x) { return f(x[0]); };
  target.strong_convexity = 1.4;

  SamplerConfig config;
  config.n_samples = 100000;
  auto [samples, rep] = sample_hit_and_run(target, config, 31);
  std::vector<double> xs;
  xs.reserve(samples.size());
  for (const Vec& x : samples) xs.push_back(x[0]);
  const double tv = tv_distance_estimate(
      xs, [&f](double x) { return std::exp(-f(x)); }, -3.0, 4.0, 30);
  CHECK(tv < 0.02);
}

TEST_CASE("mala matches the gaussian oracle and adapts its step") {
  GibbsTarget target = gaussian_on_ball(2, 6.0);
  SamplerConfig config;
  config.method = SamplerMethod::kMala;
  config.n_samples = 10000;
  auto [samples, rep] = sample_mala(target, config, 5);
  REQUIRE(static_cast<int>(samples.size()) == config.n_samples);
  CHECK(rep.acceptance_rate > 0.3);
  CHECK(rep.acceptance_rate < 0.9);

  Vec mean = Vec::Zero(2);
  for (const Vec& x : samples) mean += x;
  mean /= config.n_samples;
  Mat cov = Mat::Zero(2, 2);
  for (const Vec& x : samples) cov += (x - mean) * (x - mean).transpose();
  cov /= config.n_samples - 1;
  CHECK(std::abs(mean[0]) < 0.05);
  CHECK(std::abs(mean[1]) < 0.05);
  CHECK(std::abs(cov(0, 0) - 1.0) < 0.1);
  CHECK(std::abs(cov(1, 1) - 1.0) < 0.1);

  // Uniform target: zero gradient degenerates to a metropolized random walk.
  GibbsTarget boxt = uniform_on_unit_box(2);
  auto [us, urep] = sample_mala(boxt, config, 6);
  std::vector<double> coord;
  for (const Vec& x : us) coord.push_back(x[0]);
  CHECK(ks_vs_uniform(coord, 0.0, 1.0) < 0.03);

  // Determinism.
  config.n_samples = 30;
  auto [a, ra] = sample_mala(target, config, 77);
  auto [b, rb] = sample_mala(target, config, 77);
  for (size_t i = 0; i < a.size(); ++i) CHECK((a[i] - b[i]).norm() == 0.0);
}

TEST_CASE("tv estimates: self, disjoint, and shifted normal") {
  auto [xs, rep] = sample_exact_1d(
      [](double x) { return 0.5 * x * x; }, -8.0, 8.0, 1000000, 1e-10, 12);

  const double self_tv = tv_distance_estimate(
      xs, [](double x) { return std::exp(-0.5 * x * x); }, -8.0, 8.0, 200);
  CHECK(self_tv < 0.02);

  // Reference mass far from the samples: distance saturates near 1.
  const double disjoint = tv_distance_estimate(
      xs, [](double x) { return std::exp(-50.0 * (x - 6.0) * (x - 6.0)); },
      -8.0, 8.0, 200);
  CHECK(disjoint > 0.98);

  // Analytic TV between N(0,1) and N(0.1,1) is 2 Phi(0.05) - 1.
  const double shifted = tv_distance_estimate(
      xs, [](double x) { return std::exp(-0.5 * (x - 0.1) * (x - 0.1)); },
      -8.0, 8.0, 200);
  CHECK(std::abs(shifted - 0.03987761167674497) < 0.01);
}

TEST_CASE("effective sample size separates iid from sticky chains") {
  Rng rng(1);
  std::vector<double> iid(20000);
  for (double& x : iid) x = rng.normal();
  const double ess_iid = effective_sample_size(iid);
  CHECK(ess_iid > 0.5 * iid.size());
  CHECK(ess_iid <= 1.2 * iid.size());

  // AR(1) with rho = 0.9 has ESS about n/19.
  std::vector<double> ar(20000);
  double prev = 0.0;
  for (double& x : ar) {
    prev = 0.9 * prev + std::sqrt(1.0 - 0.81) * rng.normal();
    x = prev;
  }
  const double ess_ar = effective_sample_size(ar);
  CHECK(ess_ar < 0.15 * ar.size());
  CHECK(ess_ar > 0.005 * ar.size());
}

TEST_CASE("budget exhaustion raises a typed failure") {
  GibbsTarget target = gaussian_on_ball(2, 6.0);
  SamplerConfig config;
  config.n_samples = 1000;
  config.max_queries = 2000;  // far below what the run needs
  CHECK_THROWS_AS(sample_hit_and_run(target, config, 1), SamplerFailure);
  try {
    sample_hit_and_run(target, config, 1);
  } catch (const SamplerFailure& e) {
    CHECK(e.report().value_queries <= config.max_queries);
    CHECK(!e.report().converged);
  }
}
