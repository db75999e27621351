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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "dpnormopt/geometry.hpp"
#include "dpnormopt/losses.hpp"

using namespace dpnormopt;

namespace {

Sample make_sample(std::initializer_list<double> a, double b) {
  Sample s;
  s.a = Vec(static_cast<int>(a.size()));
  int i = 0;
  for (double x : a) s.a[i++] = x;
  s.b = b;
  return s;
}

LossModel tiny_abs_model() {
  const NormSpec norm = NormSpec::vector_lp(2.0, 2);
  std::vector<Sample> data;
  data.push_back(make_sample({1.0, 0.0}, 0.5));
  data.push_back(make_sample({0.0, 1.0}, -0.5));
  data.push_back(make_sample({0.6, 0.8}, 0.0));
  return LossModel(LossFamily::kAbsLinear, norm, data);
}

}  // namespace

TEST_CASE("per-sample losses and subgradients") {
  const NormSpec norm = NormSpec::vector_lp(2.0, 2);
  Vec x(2);
  x << 1.0, -1.0;

  std::vector<Sample> lin{make_sample({2.0, 1.0}, 0.0)};
  const LossModel ml(LossFamily::kLinear, norm, lin);
  CHECK(ml.sample_loss(x, 0) == doctest::Approx(1.0));
  CHECK((ml.sample_subgradient(x, 0) - lin[0].a).norm() == 0.0);

  std::vector<Sample> abs{make_sample({2.0, 1.0}, 3.0)};
  const LossModel ma(LossFamily::kAbsLinear, norm, abs);
  CHECK(ma.sample_loss(x, 0) == doctest::Approx(2.0));  // |1 - 3|
  CHECK(ma.sample_subgradient(x, 0)[0] == doctest::Approx(-2.0));

  std::vector<Sample> hin{make_sample({0.5, 0.0}, 1.0),
                          make_sample({4.0, 0.0}, 1.0)};
  const LossModel mh(LossFamily::kHinge, norm, hin);
  CHECK(mh.sample_loss(x, 0) == doctest::Approx(0.5));  // max(0, 1 - 0.5)
  CHECK(mh.sample_loss(x, 1) == doctest::Approx(0.0));  // margin 4 > 1
  CHECK(mh.sample_subgradient(x, 1).norm() == 0.0);
  CHECK(mh.sample_subgradient(x, 0)[0] == doctest::Approx(-0.5));
}

TEST_CASE("lipschitz bound is the max dual norm of the features") {
  // Ambient l1.5 geometry: dual exponent 3.
  const NormSpec norm = NormSpec::vector_lp(1.5, 2);
  std::vector<Sample> data{make_sample({1.0, 1.0}, 0.0),
                           make_sample({0.5, 0.0}, 0.0)};
  const LossModel m(LossFamily::kAbsLinear, norm, data);
  CHECK(m.lipschitz_bound() ==
        doctest::Approx(std::pow(2.0, 1.0 / 3.0)).epsilon(1e-12));

  // l1 ambient: dual is l-infinity.
  const NormSpec n1 = NormSpec::vector_lp(1.0, 2);
  const LossModel m1(LossFamily::kAbsLinear, n1, data);
  CHECK(m1.lipschitz_bound() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("empirical risk averages the per-sample losses") {
  const LossModel m = tiny_abs_model();
  Vec x(2);
  x << 1.0, 1.0;
  // |1 - 0.5| + |1 + 0.5| + |1.4 - 0| over 3.
  CHECK(empirical_risk(m, x) == doctest::Approx(3.4 / 3.0).epsilon(1e-14));
  CHECK(m.empirical_risk(x) == doctest::Approx(3.4 / 3.0).epsilon(1e-14));

  // Subgradient matches a finite difference away from kinks.
  const Vec g = m.risk_subgradient(x);
  for (int j = 0; j < 2; ++j) {
    Vec e = Vec::Zero(2);
    e[j] = 1e-7;
    const double fd =
        (m.empirical_risk(x + e) - m.empirical_risk(x - e)) / 2e-7;
    CHECK(g[j] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("margins path evaluates the risk along a line") {
  const LossModel m = tiny_abs_model();
  Vec x0(2), u(2);
  x0 << 0.3, -0.2;
  u << 0.6, 0.8;
  const Vec m0 = m.margins(x0);
  const Vec mu = m.margins(u);
  for (double t : {-2.0, -0.31, 0.0, 0.5, 1.7}) {
    const Vec xt = x0 + t * u;
    CHECK(m.risk_along(m0, mu, t) ==
          doctest::Approx(m.empirical_risk(xt)).epsilon(1e-13));
  }
  CHECK(m.risk_from_margins(m0) ==
        doctest::Approx(m.empirical_risk(x0)).epsilon(1e-13));
}

TEST_CASE("line restriction matches dense evaluation with true kinks") {
  Rng rng(21);
  const int d = 6, n = 40;
  const NormSpec norm = NormSpec::vector_lp(2.0, d);
  for (LossFamily fam :
       {LossFamily::kLinear, LossFamily::kAbsLinear, LossFamily::kHinge}) {
    std::vector<Sample> data;
    for (int i = 0; i < n; ++i) {
      Sample s;
      s.a = Vec(d);
      for (int j = 0; j < d; ++j) s.a[j] = rng.normal();
      s.b = fam == LossFamily::kHinge ? (rng.uniform() < 0.5 ? -1.0 : 1.0)
                                      : rng.normal();
      data.push_back(s);
    }
    const LossModel m(fam, norm, data);
    Vec x0(d), u(d);
    for (int j = 0; j < d; ++j) {
      x0[j] = 0.3 * rng.normal();
      u[j] = rng.normal();
    }
    u /= u.norm();
    const LineFunction line = m.risk_line(x0, u);
    for (int k = 0; k <= 60; ++k) {
      const double t = -3.0 + 0.1 * k;
      CHECK(line.value(t) ==
            doctest::Approx(m.empirical_risk(x0 + t * u)).epsilon(1e-11));
    }
    if (fam == LossFamily::kLinear) {
      CHECK(line.breakpoints.empty());
    } else {
      // Every breakpoint is a genuine kink of some per-sample loss.
      for (double t : line.breakpoints) {
        bool found = false;
        for (int i = 0; i < n && !found; ++i) {
          const double margin = data[i].a.dot(x0 + t * u);
          const double kink =
              fam == LossFamily::kAbsLinear ? data[i].b : 1.0 / data[i].b;
          found = std::abs(margin - kink) < 1e-8;
        }
        CHECK(found);
      }
    }
  }
}

TEST_CASE("neighboring perturbation changes one sample") {
  const LossModel m = tiny_abs_model();
  const LossModel m2 = neighboring_perturbation(m, 1, make_sample({0.0, -1.0}, 0.0));
  CHECK(m2.n() == m.n());
  CHECK(m2.data()[0].a[0] == m.data()[0].a[0]);
  CHECK(m2.data()[1].a[1] == doctest::Approx(-1.0));

  // The difference F - F' is (2G/n)-Lipschitz: only one sample changed and
  // each per-sample loss is G-Lipschitz.
  const Domain dom = Domain::ball(m.norm(), Vec::Zero(2), 2.0);
  const auto diff = [&](const Vec& x) {
    return m.empirical_risk(x) - m2.empirical_risk(x);
  };
  const double audited = lipschitz_audit(diff, m.norm(), dom, 3000, 23);
  CHECK(audited <=
        2.0 * m.lipschitz_bound() / m.n() * (1.0 + 1e-9));
}

TEST_CASE("lipschitz audit stays under the certified constant") {
  const LossModel m = tiny_abs_model();
  const Domain dom =
      Domain::ball(m.norm(), Vec::Zero(2), 2.0);
  const double audited = lipschitz_audit(m, dom, 3000, 17);
  CHECK(audited <= m.lipschitz_bound() * (1.0 + 1e-9));
  CHECK(audited > 0.5 * m.lipschitz_bound());

  // Aligned pairs on an abs-linear instance approach the constant.
  const NormSpec norm = NormSpec::vector_lp(2.0, 2);
  std::vector<Sample> data{make_sample({2.0, 0.0}, 0.0)};
  const LossModel sharp(LossFamily::kAbsLinear, norm, data);
  const double got = lipschitz_audit(sharp, dom, 5000, 19);
  CHECK(got <= 2.0 * (1.0 + 1e-9));
  CHECK(got >= 2.0 - 1e-3);
}

TEST_CASE("csv loader round trip") {
  const std::string path = "losses_test_tmp.csv";
  {
    std::ofstream out(path);
    out << "a_1,a_2,b\n";
    out << "1.0,0.0,0.5\n";
    out << "0.0,1.0,-0.5\n";
  }
  const NormSpec norm = NormSpec::vector_lp(2.0, 2);
  const LossModel m = load_dataset_csv(path, LossFamily::kAbsLinear, norm);
  CHECK(m.n() == 2);
  CHECK(m.data()[0].a[0] == doctest::Approx(1.0));
  CHECK(m.data()[1].b == doctest::Approx(-0.5));
  std::remove(path.c_str());

  CHECK_THROWS(load_dataset_csv("nonexistent_file.csv",
                                LossFamily::kAbsLinear, norm));
}

TEST_CASE("population estimates recover a known minimum") {
  const NormSpec norm = NormSpec::vector_lp(2.0, 3);
  Vec star(3);
  star << 0.2, -0.1, 0.3;
  const PopulationSpec pop = abs_linear_population(norm, star);
  REQUIRE(pop.reference_minimizer.size() == 3);

  // At the minimizer the population risk is exactly zero.
  const PopulationEstimate at_star = population_risk_estimate(pop, star, 4000, 5);
  CHECK(at_star.mean == doctest::Approx(0.0).epsilon(1e-12));

  // Away from it the risk is positive and the estimate is reproducible.
  Vec x = star;
  x[0] += 1.0;
  const PopulationEstimate e1 = population_risk_estimate(pop, x, 4000, 5);
  const PopulationEstimate e2 = population_risk_estimate(pop, x, 4000, 5);
  CHECK(e1.mean == e2.mean);
  CHECK(e1.mean > 0.1);
  CHECK(e1.std_error > 0.0);
  CHECK(e1.std_error < 0.05);
  CHECK(e1.m == 4000);

  // Features live on the dual unit sphere, so G = 1.
  Rng rng(31);
  for (int i = 0; i < 50; ++i) {
    const Sample s = pop.generator(rng);
    CHECK(lp_norm(s.a, 2.0) == doctest::Approx(1.0).epsilon(1e-9));
  }
}
