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

#ifndef DPNORMOPT_HARNESS_HPP_
#define DPNORMOPT_HARNESS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "dpnormopt/geometry.hpp"
#include "dpnormopt/losses.hpp"
#include "dpnormopt/mechanism.hpp"
#include "dpnormopt/samplers.hpp"

namespace dpnormopt {

struct DataSourceSpec {
  std::string kind = "synthetic";  // "synthetic" | "csv"
  std::string path;                // dataset file when kind == "csv"
  double label_noise = 0.25;       // synthetic: half-width of the uniform label noise
};

// One experiment grid: lp geometry, loss family and data source, mechanism
// variant, and the (d, n, epsilon, rep) sweep.
struct ExperimentConfig {
  double p = 2.0;       // lp exponent of the ambient geometry
  double radius = 1.0;  // lp-ball domain radius (centered at the origin)
  Variant variant = Variant::kErm;
  LossFamily family = LossFamily::kAbsLinear;
  DataSourceSpec data;
  std::vector<double> epsilons;
  double delta = 1e-6;
  std::vector<int> n_list;
  std::vector<int> d_list;
  int repetitions = 1;
  SamplerConfig sampler;
  double c = 2.0;
  double mu_loss = 0.0;           // sc-* variants only
  int population_samples = 20000;  // SCO population-gap estimate size
  std::uint64_t seed = 1;
  int threads = 0;  // 0: DPNORMOPT_THREADS, else 1

  void validate() const;
};

struct CellRecord {
  int d = 0;
  int n = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  int rep = 0;
  Variant variant = Variant::kErm;
  double p = 2.0;
  double empirical_gap = 0.0;
  double analytic_bound = 0.0;
  std::uint64_t value_queries = 0;
  double runtime_ms = 0.0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
};

struct CellAggregate {
  int d = 0;
  int n = 0;
  double epsilon = 0.0;
  double mean_gap = 0.0;
  double stderr_gap = 0.0;
  double bound = 0.0;
  int reps = 0;
};

struct ExperimentReport {
  std::vector<CellRecord> records;
  std::vector<CellAggregate> aggregates;
  std::string notes;
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

// Published excess-risk guarantee for lp geometry at the given variant. The
// routing over p matches the regularizer selection: p in (1, 2] uses the
// lp^2 penalty, p = 1 the lq^2 penalty with q = 1 + 1/log d, p >= 2 the
// Euclidean penalty. diameter is measured in ||.||_p.
double corollary_bound(Variant variant, double p, double G, double diameter,
                       int d, int n, double epsilon, double delta);

// The synthetic dataset of grid cell (d, n, rep): dual-norm unit features,
// and for population-gap variants (sco, sc-sco) exact labels from a known
// minimizer x_star; otherwise labels carry uniform noise. Matches the
// datasets run_experiment draws.
struct CellDataset {
  LossModel model;
  Vec x_star;
  bool has_population = false;
};
CellDataset synthetic_cell_dataset(const ExperimentConfig& config, int d, int n,
                                   int rep);

ExperimentReport run_experiment(const ExperimentConfig& config);

// Fixed header d,n,epsilon,delta,rep,variant,p,empirical_gap,analytic_bound,
// value_queries,runtime_ms,seed; 12 significant digits; rows sorted by grid
// key then rep.
void emit_csv(const ExperimentReport& report, const std::string& path);

// Least-squares slope of log(mean gap) against log(n) for the (d, epsilon)
// slice of the aggregates. Requires at least two n values with positive mean.
double gap_scaling_slope(const ExperimentReport& report, int d, double epsilon);

struct AuditSuiteConfig {
  int theorem_instances = 500;
  int tight_instances = 5;
  std::vector<double> theorem_epsilons = {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5,
                                          1.75, 2.0, 2.25, 2.5, 2.75, 3.0};
  int fact_pairs = 100;
  int risk_targets = 50;
  int kmu_tuples = 1000;
  int endtoend_instances = 50;
  int concentration_targets = 2;  // random ones, in addition to the Gaussian
  int concentration_samples = 4000;
  std::uint64_t seed = 1;
  int threads = 0;
  // Self-test hook: flips every row's verdict so a healthy run must FAIL.
  bool invert_inequalities = false;

  void validate() const;
};

struct AuditSuiteRow {
  std::string instance_id;
  double epsilon = 0.0;
  double lhs_delta = 0.0;
  double rhs_delta = 0.0;
  double margin = 0.0;
  bool pass = true;
};

struct AuditSuiteReport {
  std::vector<AuditSuiteRow> rows;
  std::vector<std::string> warnings;
  int failures = 0;
  bool pass = true;
};

AuditSuiteConfig parse_audit_config(const std::string& json_text);
AuditSuiteConfig load_audit_config(const std::string& path);

AuditSuiteReport run_audit_suite(const AuditSuiteConfig& config);

// Header instance_id,epsilon,lhs_delta,rhs_delta,margin,pass.
void emit_audit_csv(const AuditSuiteReport& report, const std::string& path);

// --threads resolution: explicit value, else DPNORMOPT_THREADS, else 1.
int resolve_threads(int requested);

}  // namespace dpnormopt

#endif  // DPNORMOPT_HARNESS_HPP_
