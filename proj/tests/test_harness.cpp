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

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "dpnormopt/harness.hpp"

using namespace dpnormopt;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

ExperimentConfig tiny_experiment() {
  ExperimentConfig cfg = parse_experiment_config(R"({
    "geometry": {"p": 2.0, "radius": 1.0},
    "variant": "erm",
    "loss": {"family": "abs-linear", "source": "synthetic", "label_noise": 0.25},
    "epsilons": [1.0],
    "delta": 1e-6,
    "n": [60, 120],
    "d": [2],
    "repetitions": 3,
    "c": 1,
    "seed": 7
  })");
  return cfg;
}

}  // namespace

TEST_CASE("experiment config parsing accepts both spelling conventions") {
  const ExperimentConfig cfg = tiny_experiment();
  CHECK(cfg.p == 2.0);
  CHECK(cfg.variant == Variant::kErm);
  CHECK(cfg.family == LossFamily::kAbsLinear);
  CHECK(cfg.data.kind == "synthetic");
  CHECK(cfg.data.label_noise == 0.25);
  CHECK(cfg.c == 1.0);
  CHECK(cfg.repetitions == 3);
  cfg.validate();

  // Same config with underscore family and a method name in each spelling.
  const ExperimentConfig alt = parse_experiment_config(R"({
    "geometry": {"p": 1.5},
    "variant": "sc-erm",
    "mu_loss": 0.5,
    "loss": {"family": "abs_linear", "source": "synthetic"},
    "sampler": {"method": "hit_and_run"},
    "epsilons": [0.5],
    "n": [50],
    "d": [2]
  })");
  CHECK(alt.variant == Variant::kScErm);
  CHECK(alt.family == LossFamily::kAbsLinear);
  CHECK(alt.sampler.method == SamplerMethod::kHitAndRun);
  const ExperimentConfig alt2 = parse_experiment_config(R"({
    "geometry": {"p": 2.0},
    "variant": "erm",
    "loss": {"family": "hinge", "source": "synthetic"},
    "sampler": {"method": "exact-1d"},
    "epsilons": [1.0],
    "n": [50],
    "d": [1]
  })");
  CHECK(alt2.sampler.method == SamplerMethod::kExact1D);
  CHECK(alt2.family == LossFamily::kHinge);

  CHECK_THROWS(parse_experiment_config(R"({"geometry": {"p": 0.5}})"));
  CHECK_THROWS(parse_experiment_config(R"({"loss": {"family": "cubic"}})"));
}

TEST_CASE("corollary bounds route by exponent regime") {
  // p in (1, 2): 2 G D sqrt(d L) / (n eps sqrt(p-1)).
  CHECK(corollary_bound(Variant::kErm, 1.5, 1.0, 2.0, 16, 2000, 0.5, 1e-6) ==
        doctest::Approx(0.081967371857532528).epsilon(1e-13));
  CHECK(corollary_bound(Variant::kErm, 2.0, 1.0, 2.0, 16, 2000, 0.5, 1e-6) ==
        doctest::Approx(0.057959684476500628).epsilon(1e-13));
  // p = 1: the lq surrogate costs a sqrt(log d) factor.
  CHECK(corollary_bound(Variant::kErm, 1.0, 1.0, 2.0, 8, 500, 1.0, 1e-6) ==
        doctest::Approx(0.35459746212772342).epsilon(1e-13));
  // p > 2: d^(1 - 1/p) replaces sqrt(d).
  CHECK(corollary_bound(Variant::kErm, 4.0, 1.0, 2.0, 8, 500, 1.0, 1e-6) ==
        doctest::Approx(0.13785213832553461).epsilon(1e-13));
  // sco adds the generalization term 2 G D / sqrt(n (p-1)) (low p) or
  // 2 G D d^(1/2 - 1/p) / sqrt(n) (high p).
  CHECK(corollary_bound(Variant::kSco, 1.5, 1.0, 2.0, 8, 500, 1.0, 1e-6) ==
        doctest::Approx(0.36890158176647159).epsilon(1e-13));
  CHECK(corollary_bound(Variant::kSco, 4.0, 1.0, 2.0, 8, 500, 1.0, 1e-6) ==
        doctest::Approx(0.43870038577244608).epsilon(1e-13));

  CHECK_THROWS(corollary_bound(Variant::kScErm, 2.0, 1.0, 2.0, 4, 100, 1.0, 1e-6));
  CHECK_THROWS(corollary_bound(Variant::kErm, 1.0, 1.0, 2.0, 1, 100, 1.0, 1e-6));
}

TEST_CASE("synthetic cell datasets are deterministic with unit features") {
  const ExperimentConfig cfg = tiny_experiment();
  const CellDataset ds1 = synthetic_cell_dataset(cfg, 2, 60, 1);
  const CellDataset ds2 = synthetic_cell_dataset(cfg, 2, 60, 1);
  const CellDataset other = synthetic_cell_dataset(cfg, 2, 60, 2);
  REQUIRE(ds1.model.n() == 60);
  CHECK(ds1.model.lipschitz_bound() == doctest::Approx(1.0).epsilon(1e-9));
  bool identical = true, differs = false;
  for (int i = 0; i < 60; ++i) {
    identical = identical &&
                (ds1.model.data()[i].a - ds2.model.data()[i].a).norm() == 0.0 &&
                ds1.model.data()[i].b == ds2.model.data()[i].b;
    differs = differs ||
              (ds1.model.data()[i].a - other.model.data()[i].a).norm() > 0.0;
  }
  CHECK(identical);
  CHECK(differs);

  // Population variants plant an interior minimizer with exact labels.
  ExperimentConfig sco_cfg = tiny_experiment();
  sco_cfg.variant = Variant::kSco;
  const CellDataset pop = synthetic_cell_dataset(sco_cfg, 2, 60, 0);
  CHECK(pop.has_population);
  REQUIRE(pop.x_star.size() == 2);
  CHECK(lp_norm(pop.x_star, 2.0) < 1.0);
  for (int i = 0; i < 10; ++i) {
    CHECK(pop.model.data()[i].b ==
          doctest::Approx(pop.model.data()[i].a.dot(pop.x_star)).epsilon(1e-12));
  }
}

TEST_CASE("experiment runner sweeps the grid and emits csv") {
  const ExperimentConfig cfg = tiny_experiment();
  const ExperimentReport report = run_experiment(cfg);
  REQUIRE(static_cast<int>(report.records.size()) == 6);
  REQUIRE(static_cast<int>(report.aggregates.size()) == 2);
  for (const CellRecord& rec : report.records) {
    CHECK(!rec.failed);
    CHECK(rec.empirical_gap >= -1e-6);
    CHECK(rec.analytic_bound > 0.0);
    CHECK(rec.value_queries > 0);
  }
  for (const CellAggregate& agg : report.aggregates) {
    CHECK(agg.reps == 3);
    CHECK(agg.mean_gap <= agg.bound + 3.0 * agg.stderr_gap);
  }

  // Rerunning the same config reproduces every field except runtime.
  const ExperimentReport again = run_experiment(cfg);
  REQUIRE(again.records.size() == report.records.size());
  for (size_t i = 0; i < report.records.size(); ++i) {
    CHECK(report.records[i].empirical_gap == again.records[i].empirical_gap);
    CHECK(report.records[i].value_queries == again.records[i].value_queries);
    CHECK(report.records[i].seed == again.records[i].seed);
  }

  const std::string path = "harness_test_tmp.csv";
  emit_csv(report, path);
  const std::string csv = slurp(path);
  CHECK(csv.rfind("d,n,epsilon,delta,rep,variant,p,empirical_gap,"
                  "analytic_bound,value_queries,runtime_ms,seed",
                  0) == 0);
  int lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == 7);  // header + 6 records
  std::remove(path.c_str());

  const double slope = gap_scaling_slope(report, 2, 1.0);
  CHECK(std::isfinite(slope));
  CHECK_THROWS(gap_scaling_slope(report, 5, 1.0));
}

TEST_CASE("audit suite passes and the inversion hook fails") {
  AuditSuiteConfig cfg = parse_audit_config(R"({
    "theorem_instances": 2,
    "tight_instances": 1,
    "theorem_epsilons": [0.0, 1.0, 2.0],
    "fact_pairs": 6,
    "risk_targets": 2,
    "kmu_tuples": 20,
    "endtoend_instances": 2,
    "concentration_targets": 0,
    "concentration_samples": 1500,
    "seed": 3
  })");
  cfg.validate();
  const AuditSuiteReport report = run_audit_suite(cfg);
  CHECK(report.pass);
  CHECK(report.failures == 0);
  CHECK(report.rows.size() > 20);
  for (const AuditSuiteRow& row : report.rows) CHECK(row.pass);

  const std::string path = "audit_test_tmp.csv";
  emit_audit_csv(report, path);
  CHECK(slurp(path).rfind("instance_id,epsilon,lhs_delta,rhs_delta,margin,pass",
                          0) == 0);
  std::remove(path.c_str());

  // Self-test: inverting every inequality must produce failures.
  cfg.invert_inequalities = true;
  const AuditSuiteReport inverted = run_audit_suite(cfg);
  CHECK(!inverted.pass);
  CHECK(inverted.failures > 0);
}

TEST_CASE("thread resolution") {
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) >= 1);
  CHECK(resolve_threads(-2) >= 1);
}
