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

#include "dpnormopt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "dpnormopt/audit.hpp"
#include "dpnormopt/optimize.hpp"
#include "dpnormopt/regularizers.hpp"
#include "dpnormopt/rng.hpp"

namespace dpnormopt {

namespace {

using nlohmann::json;

std::string num12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string numg(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void run_jobs(int threads, int n_jobs, const std::function<void(int)>& job) {
  if (n_jobs <= 0) return;
  if (threads <= 1 || n_jobs == 1) {
    for (int i = 0; i < n_jobs; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_jobs) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_workers = std::min(threads, n_jobs);
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
  if (!j.is_object()) {
    throw std::invalid_argument("config: " + context + " must be a JSON object");
  }
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument("config: unknown key '" + item.key() + "' in " + context);
    }
  }
}

LossFamily parse_family(const std::string& name) {
  if (name == "linear") return LossFamily::kLinear;
  if (name == "abs_linear" || name == "abs-linear") return LossFamily::kAbsLinear;
  if (name == "hinge") return LossFamily::kHinge;
  throw std::invalid_argument("config: unknown loss family '" + name + "'");
}

SamplerMethod parse_method(const std::string& name) {
  if (name == "exact_1d" || name == "exact-1d") return SamplerMethod::kExact1D;
  if (name == "hit_and_run" || name == "hit-and-run") return SamplerMethod::kHitAndRun;
  if (name == "mala") return SamplerMethod::kMala;
  throw std::invalid_argument("config: unknown sampler method '" + name + "'");
}

SamplerConfig parse_sampler(const json& j) {
  check_keys(j, {"method", "burn_in", "thinning", "n_samples", "step_size",
                 "quadrature_tol", "max_queries"},
             "sampler");
  SamplerConfig cfg;
  cfg.method = parse_method(j.value("method", std::string("hit_and_run")));
  cfg.burn_in = j.value("burn_in", -1);
  cfg.thinning = j.value("thinning", -1);
  cfg.n_samples = j.value("n_samples", 1);
  cfg.step_size = j.value("step_size", 0.0);
  cfg.quadrature_tol = j.value("quadrature_tol", 1e-10);
  cfg.max_queries = j.value("max_queries", std::uint64_t{50'000'000});
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool within_one_ulp(double a, double b) {
  return a == b || std::nextafter(a, b) == b;
}

}  // namespace

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DPNORMOPT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return 1;
}

void ExperimentConfig::validate() const {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("config: geometry p must be finite and >= 1");
  }
  if (!(radius > 0.0)) throw std::invalid_argument("config: radius must be positive");
  if (epsilons.empty()) throw std::invalid_argument("config: epsilons must be nonempty");
  for (double e : epsilons) {
    if (!(e > 0.0)) throw std::invalid_argument("config: epsilons must be positive");
  }
  if (!(delta > 0.0 && delta < 0.5)) {
    throw std::invalid_argument("config: delta must lie in (0, 1/2)");
  }
  if (n_list.empty()) throw std::invalid_argument("config: n must be nonempty");
  for (int n : n_list) {
    if (n < 1) throw std::invalid_argument("config: n entries must be at least 1");
  }
  if (d_list.empty()) throw std::invalid_argument("config: d must be nonempty");
  for (int d : d_list) {
    if (d < 1) throw std::invalid_argument("config: d entries must be at least 1");
    if (p == 1.0 && d < 2) {
      throw std::invalid_argument("config: p = 1 geometry requires d >= 2");
    }
  }
  if (repetitions < 1) throw std::invalid_argument("config: repetitions must be at least 1");
  if (c != 1.0 && c != 2.0) throw std::invalid_argument("config: c must be 1 or 2");
  if (data.kind != "synthetic" && data.kind != "csv") {
    throw std::invalid_argument("config: data source must be 'synthetic' or 'csv'");
  }
  if (data.kind == "csv" && data.path.empty()) {
    throw std::invalid_argument("config: csv data source requires a path");
  }
  if (data.label_noise < 0.0) {
    throw std::invalid_argument("config: label_noise must be nonnegative");
  }
  if ((variant == Variant::kScErm || variant == Variant::kScSco) && !(mu_loss > 0.0)) {
    throw std::invalid_argument("config: sc variants require mu_loss > 0");
  }
  if (population_samples < 1) {
    throw std::invalid_argument("config: population_samples must be at least 1");
  }
  if (threads < 0) throw std::invalid_argument("config: threads must be nonnegative");
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  try {
    const json j = json::parse(json_text);
    check_keys(j,
               {"geometry", "variant", "loss", "epsilons", "delta", "n", "d",
                "repetitions", "c", "mu_loss", "population_samples", "sampler",
                "seed", "threads"},
               "top level");
    ExperimentConfig cfg;
    if (j.contains("geometry")) {
      const json& g = j.at("geometry");
      check_keys(g, {"p", "radius"}, "geometry");
      cfg.p = g.value("p", 2.0);
      cfg.radius = g.value("radius", 1.0);
    }
    cfg.variant = parse_variant(j.value("variant", std::string("erm")));
    if (j.contains("loss")) {
      const json& l = j.at("loss");
      check_keys(l, {"family", "source", "path", "label_noise"}, "loss");
      cfg.family = parse_family(l.value("family", std::string("abs_linear")));
      cfg.data.kind = l.value("source", std::string("synthetic"));
      cfg.data.path = l.value("path", std::string());
      cfg.data.label_noise = l.value("label_noise", 0.25);
    }
    cfg.epsilons = j.at("epsilons").get<std::vector<double>>();
    cfg.delta = j.value("delta", 1e-6);
    cfg.n_list = j.at("n").get<std::vector<int>>();
    cfg.d_list = j.at("d").get<std::vector<int>>();
    cfg.repetitions = j.value("repetitions", 1);
    cfg.c = j.value("c", 2.0);
    cfg.mu_loss = j.value("mu_loss", 0.0);
    cfg.population_samples = j.value("population_samples", 20000);
    if (j.contains("sampler")) cfg.sampler = parse_sampler(j.at("sampler"));
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.threads = j.value("threads", 0);
    cfg.validate();
    return cfg;
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_file(path));
}

double corollary_bound(Variant variant, double p, double G, double diameter,
                       int d, int n, double epsilon, double delta) {
  if (variant != Variant::kErm && variant != Variant::kSco) {
    throw std::invalid_argument("corollary_bound: only erm and sco are covered");
  }
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("corollary_bound: p must be finite and >= 1");
  }
  if (!(G > 0.0) || !(diameter > 0.0)) {
    throw std::invalid_argument("corollary_bound: G and diameter must be positive");
  }
  if (d < 1 || n < 1) throw std::invalid_argument("corollary_bound: d, n must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("corollary_bound: epsilon must be positive");
  const double L = privacy_log_factor(delta);
  double priv, nonpriv;
  if (p == 1.0) {
    if (d < 2) throw std::invalid_argument("corollary_bound: p = 1 requires d >= 2");
    const double root_logd = std::sqrt(std::log(static_cast<double>(d)));
    priv = 6.0 * G * diameter * root_logd * std::sqrt(d * L) / (n * epsilon);
    nonpriv = 6.0 * G * diameter * root_logd / std::sqrt(static_cast<double>(n));
  } else if (p <= 2.0) {
    priv = 2.0 * G * diameter * std::sqrt(d * L) / (n * epsilon * std::sqrt(p - 1.0));
    nonpriv = 2.0 * G * diameter / std::sqrt(n * (p - 1.0));
  } else {
    priv = 2.0 * G * diameter * std::pow(d, 1.0 - 1.0 / p) * std::sqrt(L) / (n * epsilon);
    nonpriv = 2.0 * G * diameter * std::pow(d, 0.5 - 1.0 / p) /
              std::sqrt(static_cast<double>(n));
  }
  return variant == Variant::kErm ? priv : priv + nonpriv;
}

namespace {

LossModel make_synthetic_model(LossFamily family, const NormSpec& norm, int n,
                               double radius, double label_noise, Rng& rng,
                               Vec* x_star_out) {
  const int d = norm.dim();
  Vec g(d);
  for (int i = 0; i < d; ++i) g[i] = rng.normal();
  const double gn = norm_value(norm, g);
  const Vec x_star = gn > 0.0 ? Vec(0.5 * radius * g / gn) : Vec(Vec::Zero(d));
  const NormSpec dual = norm.dual();
  std::vector<Sample> samples(static_cast<std::size_t>(n));
  for (auto& s : samples) {
    Vec a(d);
    for (int i = 0; i < d; ++i) a[i] = rng.normal();
    const double an = norm_value(dual, a);
    s.a = an > 0.0 ? Vec(a / an) : Vec(Vec::Unit(d, 0));
    const double margin = s.a.dot(x_star);
    const double noisy = margin + rng.uniform(-label_noise, label_noise);
    switch (family) {
      case LossFamily::kLinear:
        s.b = 0.0;
        break;
      case LossFamily::kAbsLinear:
        s.b = noisy;
        break;
      case LossFamily::kHinge:
        s.b = noisy >= 0.0 ? 1.0 : -1.0;
        break;
    }
  }
  if (x_star_out) *x_star_out = x_star;
  return LossModel(family, norm, std::move(samples));
}

}  // namespace

CellDataset synthetic_cell_dataset(const ExperimentConfig& config, int d, int n,
                                   int rep) {
  config.validate();
  if (config.data.kind != "synthetic") {
    throw std::invalid_argument("synthetic_cell_dataset: config uses a csv source");
  }
  const NormSpec norm = NormSpec::vector_lp(config.p, d);
  const std::string data_key = "data/p" + numg(config.p) + "/d" + std::to_string(d) +
                               "/n" + std::to_string(n);
  Rng data_rng(derive_seed(config.seed, data_key, static_cast<std::uint64_t>(rep)));
  const bool population_gap =
      config.variant == Variant::kSco || config.variant == Variant::kScSco;
  if (population_gap) {
    Vec g(d);
    for (int i = 0; i < d; ++i) g[i] = data_rng.normal();
    const double gn = norm_value(norm, g);
    Vec x_star = gn > 0.0 ? Vec(0.5 * config.radius * g / gn) : Vec(Vec::Zero(d));
    const PopulationSpec pop = abs_linear_population(norm, x_star);
    std::vector<Sample> samples(static_cast<std::size_t>(n));
    for (auto& s : samples) s = pop.generator(data_rng);
    return CellDataset{LossModel(config.family, norm, std::move(samples)),
                       std::move(x_star), true};
  }
  Vec x_star;
  LossModel model = make_synthetic_model(config.family, norm, n, config.radius,
                                         config.data.label_noise, data_rng, &x_star);
  return CellDataset{std::move(model), std::move(x_star), false};
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const int threads = resolve_threads(config.threads);

  std::optional<LossModel> csv_model;
  if (config.data.kind == "csv") {
    if (config.d_list.size() != 1) {
      throw std::invalid_argument("config: csv data fixes a single d");
    }
    const NormSpec norm = NormSpec::vector_lp(config.p, config.d_list[0]);
    csv_model.emplace(load_dataset_csv(config.data.path, config.family, norm));
    for (int n : config.n_list) {
      if (n > csv_model->n()) {
        throw std::invalid_argument("config: n exceeds the csv dataset size");
      }
    }
  }

  const bool population_gap =
      config.data.kind == "synthetic" &&
      (config.variant == Variant::kSco || config.variant == Variant::kScSco);

  struct Job {
    int d, n, rep;
    std::size_t base;  // index of this job's first record (one per epsilon)
  };
  std::vector<Job> jobs;
  const std::size_t n_eps = config.epsilons.size();
  for (int d : config.d_list) {
    for (int n : config.n_list) {
      for (int rep = 0; rep < config.repetitions; ++rep) {
        jobs.push_back(Job{d, n, rep, jobs.size() * n_eps});
      }
    }
  }

  ExperimentReport report;
  report.records.resize(jobs.size() * n_eps);
  if (config.variant == Variant::kSco && config.data.kind == "csv") {
    report.notes = "sco on csv data: empirical gaps (no population reference)";
  }

  run_jobs(threads, static_cast<int>(jobs.size()), [&](int ji) {
    const Job& job = jobs[static_cast<std::size_t>(ji)];
    for (std::size_t e = 0; e < n_eps; ++e) {
      CellRecord& rec = report.records[job.base + e];
      rec.d = job.d;
      rec.n = job.n;
      rec.epsilon = config.epsilons[e];
      rec.delta = config.delta;
      rec.rep = job.rep;
      rec.variant = config.variant;
      rec.p = config.p;
      const std::string cell_key = "cell/p" + numg(config.p) + "/d" +
                                   std::to_string(job.d) + "/n" + std::to_string(job.n) +
                                   "/e" + numg(config.epsilons[e]);
      rec.seed = derive_seed(config.seed, cell_key,
                                     static_cast<std::uint64_t>(job.rep));
    }

    const auto fail_all = [&](const std::string& what) {
      for (std::size_t e = 0; e < n_eps; ++e) {
        CellRecord& rec = report.records[job.base + e];
        rec.failed = true;
        rec.error = what;
      }
    };

    try {
      const NormSpec norm = NormSpec::vector_lp(config.p, job.d);
      const Domain dom = Domain::ball(norm, Vec::Zero(job.d), config.radius);
      const Vec x0 = dom.center();
      std::optional<Regularizer> reg;
      if (config.variant == Variant::kErm || config.variant == Variant::kSco) {
        reg = config.p > 2.0 ? regularizer_for_lp_high(config.p, dom, x0)
                             : regularizer_for_lp(config.p, dom, x0);
      }

      std::optional<PopulationSpec> pop;
      std::optional<LossModel> local_model;
      if (config.data.kind == "csv") {
        local_model = *csv_model;
        if (job.n < local_model->n()) {
          std::vector<Sample> head(local_model->data().begin(),
                                   local_model->data().begin() + job.n);
          local_model = LossModel(config.family, norm, std::move(head));
        }
      } else {
        CellDataset cell = synthetic_cell_dataset(config, job.d, job.n, job.rep);
        if (population_gap) pop = abs_linear_population(norm, cell.x_star);
        local_model = std::move(cell.model);
      }
      const LossModel& model = *local_model;
      const double G = model.lipschitz_bound() > 0.0 ? model.lipschitz_bound() : 1.0;

      double ref_value = 0.0;
      if (!population_gap) {
        ref_value = minimize_empirical_risk(model, dom).value;
      }

      const double diameter = 2.0 * config.radius;
      for (std::size_t e = 0; e < n_eps; ++e) {
        CellRecord& rec = report.records[job.base + e];
        try {
          const double eps = config.epsilons[e];
          MechanismParams params;
          double bound = 0.0;
          switch (config.variant) {
            case Variant::kErm:
              params = erm_params(G, reg->theta, job.d, job.n, eps, config.delta / 2.0,
                                  config.c);
              bound = corollary_bound(Variant::kErm, config.p, G, diameter, job.d,
                                      job.n, eps, config.delta);
              break;
            case Variant::kSco:
              params = sco_params(G, reg->theta, job.d, job.n, eps, config.delta / 2.0,
                                  config.c);
              bound = corollary_bound(Variant::kSco, config.p, G, diameter, job.d,
                                      job.n, eps, config.delta);
              break;
            case Variant::kScErm:
              params = sc_erm_params(G, config.mu_loss, job.n, eps, config.delta / 2.0,
                                     config.c);
              bound = sc_erm_utility_bound(G, config.mu_loss, job.d, job.n, eps,
                                           config.delta);
              break;
            case Variant::kScSco:
              params = sc_sco_params(G, config.mu_loss, job.n, eps, config.delta / 2.0,
                                     config.c);
              bound = sc_sco_utility_bound(G, config.mu_loss, job.d, job.n, eps,
                                           config.delta);
              break;
          }

          const auto t_start = std::chrono::steady_clock::now();
          std::pair<Vec, SolveReport> solved =
              (config.variant == Variant::kScErm || config.variant == Variant::kScSco)
                  ? solve_private(model, dom, params, config.sampler, rec.seed,
                                  config.delta / 2.0)
                  : solve_private(model, *reg, params, config.sampler, rec.seed,
                                  config.delta / 2.0);
          const auto t_end = std::chrono::steady_clock::now();

          double gap;
          if (population_gap) {
            const std::uint64_t eval_seed = derive_seed(
                config.seed, "popeval/" + std::to_string(job.d) + "/" +
                                 std::to_string(job.n) + "/e" + numg(config.epsilons[e]),
                static_cast<std::uint64_t>(job.rep));
            gap = population_risk_estimate(*pop, solved.first, config.population_samples,
                                           eval_seed)
                      .mean;
          } else {
            gap = model.empirical_risk(solved.first) - ref_value;
          }

          rec.empirical_gap = gap;
          rec.analytic_bound = bound;
          rec.value_queries = solved.second.sampler.value_queries;
          rec.runtime_ms =
              std::chrono::duration<double, std::milli>(t_end - t_start).count();
        } catch (const std::exception& ex) {
          rec.failed = true;
          rec.error = ex.what();
        }
      }
    } catch (const std::exception& ex) {
      fail_all(ex.what());
    }
  });

  // Aggregate over reps for each (d, n, epsilon) cell.
  for (int d : config.d_list) {
    for (int n : config.n_list) {
      for (double eps : config.epsilons) {
        CellAggregate agg;
        agg.d = d;
        agg.n = n;
        agg.epsilon = eps;
        double sum = 0.0, sum_sq = 0.0;
        int m = 0;
        for (const CellRecord& rec : report.records) {
          if (rec.d != d || rec.n != n || rec.epsilon != eps || rec.failed) continue;
          sum += rec.empirical_gap;
          sum_sq += rec.empirical_gap * rec.empirical_gap;
          agg.bound = rec.analytic_bound;
          ++m;
        }
        agg.reps = m;
        if (m > 0) {
          agg.mean_gap = sum / m;
          if (m > 1) {
            const double var =
                std::max(0.0, (sum_sq - sum * sum / m) / (m - 1));
            agg.stderr_gap = std::sqrt(var / m);
          }
        } else {
          agg.mean_gap = std::numeric_limits<double>::quiet_NaN();
          agg.stderr_gap = std::numeric_limits<double>::quiet_NaN();
        }
        report.aggregates.push_back(agg);
      }
    }
  }
  return report;
}

void emit_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_csv: cannot open '" + path + "'");
  out << "d,n,epsilon,delta,rep,variant,p,empirical_gap,analytic_bound,"
         "value_queries,runtime_ms,seed\n";
  std::vector<const CellRecord*> rows;
  rows.reserve(report.records.size());
  for (const CellRecord& rec : report.records) rows.push_back(&rec);
  std::stable_sort(rows.begin(), rows.end(),
                   [](const CellRecord* a, const CellRecord* b) {
                     if (a->d != b->d) return a->d < b->d;
                     if (a->n != b->n) return a->n < b->n;
                     if (a->epsilon != b->epsilon) return a->epsilon < b->epsilon;
                     return a->rep < b->rep;
                   });
  for (const CellRecord* rec : rows) {
    out << rec->d << ',' << rec->n << ',' << num12(rec->epsilon) << ','
        << num12(rec->delta) << ',' << rec->rep << ',' << variant_name(rec->variant)
        << ',' << num12(rec->p) << ',' << num12(rec->empirical_gap) << ','
        << num12(rec->analytic_bound) << ',' << rec->value_queries << ','
        << num12(rec->runtime_ms) << ',' << rec->seed << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("emit_csv: write failed for '" + path + "'");
}

double gap_scaling_slope(const ExperimentReport& report, int d, double epsilon) {
  std::vector<double> xs, ys;
  for (const CellAggregate& agg : report.aggregates) {
    if (agg.d != d || agg.epsilon != epsilon || agg.reps == 0) continue;
    if (!(agg.mean_gap > 0.0)) continue;
    xs.push_back(std::log(static_cast<double>(agg.n)));
    ys.push_back(std::log(agg.mean_gap));
  }
  if (xs.size() < 2) {
    throw std::invalid_argument("gap_scaling_slope: need at least two usable n values");
  }
  double x_bar = 0.0, y_bar = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x_bar += xs[i];
    y_bar += ys[i];
  }
  x_bar /= xs.size();
  y_bar /= ys.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - x_bar) * (ys[i] - y_bar);
    sxx += (xs[i] - x_bar) * (xs[i] - x_bar);
  }
  return sxy / sxx;
}

void AuditSuiteConfig::validate() const {
  if (theorem_instances < 0 || tight_instances < 0 || fact_pairs < 0 ||
      risk_targets < 0 || kmu_tuples < 0 || endtoend_instances < 0 ||
      concentration_targets < 0) {
    throw std::invalid_argument("audit config: counts must be nonnegative");
  }
  if (theorem_epsilons.empty()) {
    throw std::invalid_argument("audit config: theorem_epsilons must be nonempty");
  }
  for (double e : theorem_epsilons) {
    if (!(e >= 0.0)) {
      throw std::invalid_argument("audit config: theorem_epsilons must be nonnegative");
    }
  }
  if (concentration_samples < 100) {
    throw std::invalid_argument("audit config: concentration_samples must be >= 100");
  }
  if (threads < 0) throw std::invalid_argument("audit config: threads must be nonnegative");
}

AuditSuiteConfig parse_audit_config(const std::string& json_text) {
  try {
    const json j = json::parse(json_text);
    check_keys(j,
               {"theorem_instances", "tight_instances", "theorem_epsilons",
                "fact_pairs", "risk_targets", "kmu_tuples", "endtoend_instances",
                "concentration_targets", "concentration_samples", "seed", "threads",
                "invert_inequalities"},
               "top level");
    AuditSuiteConfig cfg;
    cfg.theorem_instances = j.value("theorem_instances", 500);
    cfg.tight_instances = j.value("tight_instances", 5);
    if (j.contains("theorem_epsilons")) {
      cfg.theorem_epsilons = j.at("theorem_epsilons").get<std::vector<double>>();
    }
    cfg.fact_pairs = j.value("fact_pairs", 100);
    cfg.risk_targets = j.value("risk_targets", 50);
    cfg.kmu_tuples = j.value("kmu_tuples", 1000);
    cfg.endtoend_instances = j.value("endtoend_instances", 50);
    cfg.concentration_targets = j.value("concentration_targets", 2);
    cfg.concentration_samples = j.value("concentration_samples", 4000);
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.threads = j.value("threads", 0);
    cfg.invert_inequalities = j.value("invert_inequalities", false);
    cfg.validate();
    return cfg;
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

AuditSuiteConfig load_audit_config(const std::string& path) {
  return parse_audit_config(read_file(path));
}

namespace {

std::string padded(const char* prefix, int i, int width) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, i);
  return buf;
}

// Smallest eigenvalue of a symmetric 2x2 matrix.
double lambda_min_2x2(const Mat& A) {
  const double a = A(0, 0), b = A(0, 1), c = A(1, 1);
  return 0.5 * (a + c) - std::sqrt(0.25 * (a - c) * (a - c) + b * b);
}

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }

}  // namespace

AuditSuiteReport run_audit_suite(const AuditSuiteConfig& config) {
  config.validate();
  const int threads = resolve_threads(config.threads);
  AuditSuiteReport report;

  // Analytic curve against quadrature on shifted normal pairs (12 sigma
  // truncation; the residue is far below the 1e-8 comparison).
  for (double t : {0.25, 0.5, 1.0, 2.0}) {
    for (double eps : {0.0, 0.5, 1.0, 2.0}) {
      const double analytic = gaussian_curve(t, eps);
      const double quad = privacy_curve_1d(
          [](double x) { return 0.5 * x * x; },
          [t](double x) { return 0.5 * (x - t) * (x - t); }, -12.0, 12.0 + t, eps,
          PrivacyCurveOptions{});
      AuditSuiteRow row;
      row.instance_id = "gauss-sym/t" + numg(t);
      row.epsilon = eps;
      row.lhs_delta = quad;
      row.rhs_delta = analytic;
      row.margin = analytic - quad;
      row.pass = std::abs(quad - analytic) <= 1e-8;
      report.rows.push_back(row);
    }
  }

  {
    Rng rng(derive_seed(config.seed, "audit/fact21", 0));
    for (int i = 0; i < config.fact_pairs; ++i) {
      const double delta = std::exp(rng.uniform(std::log(1e-8), std::log(0.49)));
      const double eps = std::exp(rng.uniform(std::log(0.01), std::log(5.0)));
      const double L = privacy_log_factor(delta);
      const double t = std::sqrt(2.0 * L + 2.0 * eps) - std::sqrt(2.0 * L);
      AuditSuiteRow row;
      row.instance_id = padded("fact21/", i, 3);
      row.epsilon = eps;
      row.lhs_delta = gaussian_curve(t, eps);
      row.rhs_delta = delta;
      row.margin = delta - row.lhs_delta;
      row.pass = row.lhs_delta <= delta + 1e-10;
      report.rows.push_back(row);
    }
  }

  {
    const auto instances = generate_audit_instances(
        config.theorem_instances, derive_seed(config.seed, "audit/thm32", 0));
    std::vector<std::vector<AuditSuiteRow>> blocks(instances.size());
    run_jobs(threads, static_cast<int>(instances.size()), [&](int i) {
      const TheoremAuditReport rep =
          audit_theorem_gdp(instances[static_cast<std::size_t>(i)],
                            config.theorem_epsilons, 1e-8);
      auto& block = blocks[static_cast<std::size_t>(i)];
      block.reserve(rep.rows.size());
      for (const TheoremAuditRow& tr : rep.rows) {
        AuditSuiteRow row;
        row.instance_id = padded("thm32/", i, 4) + (tr.swapped ? "/rev" : "/fwd");
        row.epsilon = tr.epsilon;
        row.lhs_delta = tr.lhs_delta;
        row.rhs_delta = tr.rhs_delta;
        row.margin = tr.margin;
        row.pass = tr.pass;
        block.push_back(row);
      }
    });
    for (const auto& block : blocks) {
      report.rows.insert(report.rows.end(), block.begin(), block.end());
    }
  }

  // Quadratic-plus-linear instances where the curve meets the bound exactly:
  // the truncated Gibbs pair is a shifted normal pair.
  for (int i = 0; i < config.tight_instances; ++i) {
    Rng rng(derive_seed(config.seed, "audit/tight",
                                static_cast<std::uint64_t>(i)));
    AuditInstance1D inst;
    inst.mu_sc = rng.uniform(0.5, 2.0);
    const double g = rng.uniform(0.3, 1.2);
    const double t = g / std::sqrt(inst.mu_sc);
    const double w = (12.0 + t) / std::sqrt(inst.mu_sc);
    inst.a = -w;
    inst.b = w;
    inst.center = 0.0;
    inst.alpha_slopes = {g};
    inst.alpha_offset = 0.0;
    inst.g_lip = g;
    const TheoremAuditReport rep =
        audit_theorem_gdp(inst, config.theorem_epsilons, 1e-8);
    for (const TheoremAuditRow& tr : rep.rows) {
      AuditSuiteRow row;
      row.instance_id = padded("tight/", i, 2) + (tr.swapped ? "/rev" : "/fwd");
      row.epsilon = tr.epsilon;
      row.lhs_delta = tr.lhs_delta;
      row.rhs_delta = tr.rhs_delta;
      row.margin = tr.margin;
      row.pass = tr.pass && std::abs(tr.rhs_delta - tr.lhs_delta) <= 1e-6;
      report.rows.push_back(row);
    }
  }

  {
    const int n1 = config.risk_targets - config.risk_targets / 2;
    const int n2 = config.risk_targets / 2;
    const auto f_insts = generate_audit_instances(
        n1, derive_seed(config.seed, "audit/prop41-1d", 0));
    Rng kr(derive_seed(config.seed, "audit/prop41-k", 0));
    for (int i = 0; i < n1; ++i) {
      const AuditInstance1D& inst = f_insts[static_cast<std::size_t>(i)];
      const double k = kr.uniform(2.0, 50.0);
      const NormSpec norm = NormSpec::vector_lp(2.0, 1);
      Vec center(1);
      center[0] = 0.5 * (inst.a + inst.b);
      const Domain dom = Domain::ball(norm, center, 0.5 * (inst.b - inst.a));
      const auto F = [&inst](const Vec& x) { return inst.F(x[0]); };
      const GibbsRiskReport rep =
          gibbs_risk_check(F, dom, k, RiskCheckMethod::kQuadrature);
      AuditSuiteRow row;
      row.instance_id = padded("prop41/1d/", i, 2);
      row.lhs_delta = rep.gap;
      row.rhs_delta = rep.bound;
      row.margin = rep.bound - rep.gap;
      row.pass = rep.pass;
      report.rows.push_back(row);
    }
    for (int i = 0; i < n2; ++i) {
      Rng rng(derive_seed(config.seed, "audit/prop41-2d",
                                  static_cast<std::uint64_t>(i)));
      Mat B(2, 2);
      for (int r = 0; r < 2; ++r) {
        for (int col = 0; col < 2; ++col) B(r, col) = rng.normal();
      }
      const Mat A = B.transpose() * B + 0.3 * Mat::Identity(2, 2);
      Vec z(2);
      z[0] = rng.uniform(-0.4, 0.4);
      z[1] = rng.uniform(-0.4, 0.4);
      Vec v(2);
      v[0] = rng.normal();
      v[1] = rng.normal();
      v.normalize();
      const double sp_w = rng.uniform(0.0, 1.0);
      const double sp_b = rng.uniform(-0.5, 0.5);
      const double k = rng.uniform(2.0, 40.0);
      const NormSpec norm = NormSpec::vector_lp(2.0, 2);
      Domain dom = Domain::ball(norm, Vec::Zero(2), rng.uniform(0.8, 1.6));
      if (i % 2 == 1) {
        Vec lo(2), hi(2);
        lo[0] = -1.0;
        lo[1] = -0.8;
        hi[0] = 1.0;
        hi[1] = 1.2;
        dom = Domain::box(norm, lo, hi);
      }
      const auto F = [A, z, v, sp_w, sp_b](const Vec& x) {
        const Vec dxz = x - z;
        return 0.5 * dxz.dot(A * dxz) + sp_w * softplus(v.dot(x) - sp_b);
      };
      const GibbsRiskReport rep =
          gibbs_risk_check(F, dom, k, RiskCheckMethod::kQuadrature);
      AuditSuiteRow row;
      row.instance_id = padded("prop41/2d/", i, 2);
      row.lhs_delta = rep.gap;
      row.rhs_delta = rep.bound;
      row.margin = rep.bound - rep.gap;
      row.pass = rep.pass;
      report.rows.push_back(row);
    }
    if (config.risk_targets > 0) {
      const NormSpec norm = NormSpec::vector_lp(2.0, 1);
      const Domain dom = Domain::ball(norm, Vec::Zero(1), 1.0);
      const double k = 10.0;
      const GibbsRiskReport rep = gibbs_risk_check(
          [](const Vec& x) { return std::abs(x[0]); }, dom, k,
          RiskCheckMethod::kQuadrature);
      const double closed_form =
          (1.0 / k) * (1.0 - (1.0 + k) * std::exp(-k)) / (1.0 - std::exp(-k));
      AuditSuiteRow row;
      row.instance_id = "prop41/laplace";
      row.lhs_delta = rep.gap;
      row.rhs_delta = closed_form;
      row.margin = closed_form - rep.gap;
      row.pass = rep.pass && std::abs(rep.gap - closed_form) <= 1e-6;
      report.rows.push_back(row);
    }
  }

  {
    Rng rng(derive_seed(config.seed, "audit/kmudef", 0));
    for (int i = 0; i < config.kmu_tuples; ++i) {
      const double G = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
      const double Theta = std::exp(rng.uniform(std::log(0.05), std::log(20.0)));
      const int d = 1 + static_cast<int>(rng.uniform() * 64.0);
      const int n = 1 + static_cast<int>(rng.uniform() * 100000.0);
      const double eps = std::exp(rng.uniform(std::log(0.01), std::log(10.0)));
      const double delta = std::exp(rng.uniform(std::log(1e-12), std::log(0.4)));
      const double c = rng.uniform() < 0.5 ? 1.0 : 2.0;
      const bool use_erm = i % 2 == 0;
      const MechanismParams params =
          use_erm ? erm_params(G, Theta, d, n, eps, delta, c)
                  : sco_params(G, Theta, d, n, eps, delta, c);
      const double ref = mu_from_k(G, c, params.k, n, eps, delta);
      AuditSuiteRow row;
      row.instance_id =
          std::string("kmudef/") + (use_erm ? "erm/" : "sco/") + padded("", i, 4);
      row.epsilon = eps;
      row.lhs_delta = params.mu;
      row.rhs_delta = ref;
      row.margin = ref - params.mu;
      row.pass = within_one_ulp(params.mu, ref);
      report.rows.push_back(row);
    }
  }

  for (int i = 0; i < config.endtoend_instances; ++i) {
    Rng rng(derive_seed(config.seed, "audit/endtoend",
                                static_cast<std::uint64_t>(i)));
    const int n = 1 + static_cast<int>(rng.uniform() * 5.0);
    const double radius = rng.uniform(0.5, 2.0);
    const double center = rng.uniform(-0.5, 0.5);
    const double x_star = center + rng.uniform(-0.5, 0.5) * radius;
    const NormSpec norm = NormSpec::vector_lp(2.0, 1);
    Vec c0(1);
    c0[0] = center;
    const Domain dom = Domain::ball(norm, c0, radius);

    const auto draw_sample = [&](Rng& r) {
      Sample s;
      Vec a(1);
      a[0] = (r.uniform() < 0.5 ? -1.0 : 1.0) * r.uniform(0.3, 1.0);
      s.a = a;
      s.b = a[0] * x_star + r.uniform(-0.25, 0.25);
      return s;
    };
    std::vector<Sample> samples(static_cast<std::size_t>(n));
    for (auto& s : samples) s = draw_sample(rng);
    const LossModel model(LossFamily::kAbsLinear, norm, samples);
    const int swap_index = std::min(n - 1, static_cast<int>(rng.uniform() * n));
    const LossModel swapped =
        neighboring_perturbation(model, swap_index, draw_sample(rng));

    const Regularizer reg = regularizer_for_lp(2.0, dom, dom.center());
    const double eps = rng.uniform(0.25, 2.0);
    const double delta = std::exp(rng.uniform(std::log(1e-4), std::log(0.05)));
    // G = 1 dominates every per-sample Lipschitz constant in this family.
    const MechanismParams params =
        erm_params(1.0, reg.theta, 1, n, eps, delta, 2.0);
    const GibbsTarget tp = build_target(model, reg, params);
    const GibbsTarget tq = build_target(swapped, reg, params);
    const auto f_p = [&tp](double x) {
      Vec v(1);
      v[0] = x;
      return tp.neg_log_density(v);
    };
    const auto f_q = [&tq](double x) {
      Vec v(1);
      v[0] = x;
      return tq.neg_log_density(v);
    };
    const double lo = center - radius, hi = center + radius;
    const double fwd = privacy_curve_1d(f_p, f_q, lo, hi, eps, PrivacyCurveOptions{});
    const double rev = privacy_curve_1d(f_q, f_p, lo, hi, eps, PrivacyCurveOptions{});
    for (int ordering = 0; ordering < 2; ++ordering) {
      AuditSuiteRow row;
      row.instance_id = padded("endtoend/", i, 2) + (ordering == 0 ? "/fwd" : "/rev");
      row.epsilon = eps;
      row.lhs_delta = ordering == 0 ? fwd : rev;
      row.rhs_delta = delta;
      row.margin = delta - row.lhs_delta;
      row.pass = row.lhs_delta <= delta + 1e-10;
      report.rows.push_back(row);
    }
  }

  {
    const auto add_concentration = [&](const std::string& id, const GibbsTarget& tg,
                                       const std::function<double(const Vec&)>& ell,
                                       double g_ell, std::uint64_t s) {
      const double mu = tg.strong_convexity;
      const std::vector<double> t_grid = {0.5 / std::sqrt(mu), 1.0 / std::sqrt(mu),
                                          2.0 / std::sqrt(mu)};
      const ConcentrationReport rep =
          concentration_check(tg, ell, g_ell, t_grid, config.concentration_samples, s);
      for (std::size_t ti = 0; ti < rep.rows.size(); ++ti) {
        const ConcentrationRow& cr = rep.rows[ti];
        AuditSuiteRow row;
        row.instance_id = id + "/t" + std::to_string(ti);
        row.lhs_delta = cr.empirical_tail;
        row.rhs_delta = cr.bound;
        row.margin = cr.bound + cr.slack - cr.empirical_tail;
        row.pass = cr.pass;
        report.rows.push_back(row);
      }
    };

    const NormSpec norm2 = NormSpec::vector_lp(2.0, 2);
    {
      GibbsTarget tg(Domain::ball(norm2, Vec::Zero(2), 6.0));
      tg.neg_log_density = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
      tg.strong_convexity = 1.0;
      Vec v(2);
      v[0] = 0.6;
      v[1] = -0.8;
      add_concentration("lemma54/gauss", tg,
                        [v](const Vec& x) { return v.dot(x); }, 1.0,
                        derive_seed(config.seed, "audit/lemma54", 0));
    }
    for (int i = 0; i < config.concentration_targets; ++i) {
      Rng rng(derive_seed(config.seed, "audit/lemma54-rand",
                                  static_cast<std::uint64_t>(i)));
      Mat B(2, 2);
      for (int r = 0; r < 2; ++r) {
        for (int col = 0; col < 2; ++col) B(r, col) = rng.normal();
      }
      const Mat A = B.transpose() * B + (0.3 + rng.uniform(0.0, 2.0)) * Mat::Identity(2, 2);
      Vec z(2);
      z[0] = rng.uniform(-0.4, 0.4);
      z[1] = rng.uniform(-0.4, 0.4);
      GibbsTarget tg(Domain::ball(norm2, Vec::Zero(2), rng.uniform(1.5, 3.0)));
      tg.neg_log_density = [A, z](const Vec& x) {
        const Vec dxz = x - z;
        return 0.5 * dxz.dot(A * dxz);
      };
      tg.strong_convexity = lambda_min_2x2(A);
      Vec v(2);
      v[0] = rng.normal();
      v[1] = rng.normal();
      v.normalize();
      add_concentration(padded("lemma54/rand", i, 1), tg,
                        [v](const Vec& x) { return v.dot(x); }, 1.0,
                        derive_seed(config.seed, "audit/lemma54-rand-draw",
                                            static_cast<std::uint64_t>(i)));
    }
  }

  if (config.theorem_instances == 0) {
    report.warnings.push_back("theorem audit ran with count 0: vacuous pass");
  }
  if (config.fact_pairs == 0) {
    report.warnings.push_back("curve-bound audit ran with count 0: vacuous pass");
  }
  if (config.risk_targets == 0) {
    report.warnings.push_back("risk audit ran with count 0: vacuous pass");
  }
  if (config.kmu_tuples == 0) {
    report.warnings.push_back("parameter-identity audit ran with count 0: vacuous pass");
  }
  if (config.endtoend_instances == 0) {
    report.warnings.push_back("end-to-end audit ran with count 0: vacuous pass");
  }

  if (config.invert_inequalities) {
    for (AuditSuiteRow& row : report.rows) row.pass = !row.pass;
  }
  for (const AuditSuiteRow& row : report.rows) {
    if (!row.pass) ++report.failures;
  }
  report.pass = report.failures == 0;
  return report;
}

void emit_audit_csv(const AuditSuiteReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_audit_csv: cannot open '" + path + "'");
  out << "instance_id,epsilon,lhs_delta,rhs_delta,margin,pass\n";
  for (const AuditSuiteRow& row : report.rows) {
    out << row.instance_id << ',' << num12(row.epsilon) << ',' << num12(row.lhs_delta)
        << ',' << num12(row.rhs_delta) << ',' << num12(row.margin) << ','
        << (row.pass ? 1 : 0) << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("emit_audit_csv: write failed for '" + path + "'");
}

}  // namespace dpnormopt
