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

#include <cstdio>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "dpnormopt/harness.hpp"
#include "dpnormopt/regularizers.hpp"

namespace {

using namespace dpnormopt;

constexpr int kExitOk = 0;
constexpr int kExitAuditFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

struct GlobalFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_path;
  int threads = 0;
};

int cmd_run(const GlobalFlags& flags) {
  if (flags.config_path.empty()) {
    throw std::invalid_argument("run: --config is required");
  }
  ExperimentConfig config = load_experiment_config(flags.config_path);
  if (flags.seed_set) config.seed = flags.seed;
  if (flags.threads > 0) config.threads = flags.threads;

  const ExperimentReport report = run_experiment(config);
  const std::string out = flags.out_path.empty() ? "results.csv" : flags.out_path;
  emit_csv(report, out);

  int failed = 0;
  for (const CellRecord& rec : report.records) {
    if (rec.failed) ++failed;
  }
  int cells_over = 0;
  for (const CellAggregate& agg : report.aggregates) {
    if (agg.reps > 0 && agg.mean_gap > agg.bound + 3.0 * agg.stderr_gap) ++cells_over;
  }
  std::printf("records: %zu  failed: %d  cells over bound: %d\n",
              report.records.size(), failed, cells_over);
  if (!report.notes.empty()) std::printf("note: %s\n", report.notes.c_str());
  std::printf("wrote %s\n", out.c_str());
  return failed == 0 ? kExitOk : kExitRuntimeError;
}

int cmd_audit(const GlobalFlags& flags) {
  AuditSuiteConfig config;
  if (!flags.config_path.empty()) config = load_audit_config(flags.config_path);
  if (flags.seed_set) config.seed = flags.seed;
  if (flags.threads > 0) config.threads = flags.threads;

  const AuditSuiteReport report = run_audit_suite(config);
  if (!flags.out_path.empty()) emit_audit_csv(report, flags.out_path);

  std::map<std::string, std::pair<int, int>> families;  // family -> {pass, total}
  for (const AuditSuiteRow& row : report.rows) {
    const std::string family = row.instance_id.substr(0, row.instance_id.find('/'));
    auto& entry = families[family];
    entry.first += row.pass ? 1 : 0;
    entry.second += 1;
  }
  for (const auto& [family, counts] : families) {
    std::printf("%-10s %d/%d\n", family.c_str(), counts.first, counts.second);
  }
  for (const std::string& warning : report.warnings) {
    std::printf("warning: %s\n", warning.c_str());
  }
  std::printf("AUDIT %s (%d failures over %zu checks)\n",
              report.pass ? "PASS" : "FAIL", report.failures, report.rows.size());
  if (!flags.out_path.empty()) std::printf("wrote %s\n", flags.out_path.c_str());
  return report.pass ? kExitOk : kExitAuditFailure;
}

struct ParamsArgs {
  std::string variant = "erm";
  double G = 1.0;
  double theta = 0.5;
  int d = 1;
  int n = 1;
  double epsilon = 1.0;
  double delta = 1e-6;
  double c = 2.0;
  double mu_loss = 0.0;
};

int cmd_params(const ParamsArgs& args) {
  const Variant variant = parse_variant(args.variant);
  MechanismParams params;
  double bound = 0.0;
  switch (variant) {
    case Variant::kErm:
      params = erm_params(args.G, args.theta, args.d, args.n, args.epsilon,
                          args.delta, args.c);
      bound = erm_utility_bound(args.G, args.theta, args.d, args.n, args.epsilon,
                                args.delta);
      break;
    case Variant::kSco:
      params = sco_params(args.G, args.theta, args.d, args.n, args.epsilon,
                          args.delta, args.c);
      bound = sco_utility_bound(args.G, args.theta, args.d, args.n, args.epsilon,
                                args.delta);
      break;
    case Variant::kScErm:
      params = sc_erm_params(args.G, args.mu_loss, args.n, args.epsilon, args.delta,
                             args.c);
      bound = sc_erm_utility_bound(args.G, args.mu_loss, args.d, args.n,
                                   args.epsilon, args.delta);
      break;
    case Variant::kScSco:
      params = sc_sco_params(args.G, args.mu_loss, args.n, args.epsilon, args.delta,
                             args.c);
      bound = sc_sco_utility_bound(args.G, args.mu_loss, args.d, args.n,
                                   args.epsilon, args.delta);
      break;
  }
  std::printf("variant: %s\n", variant_name(variant).c_str());
  std::printf("k: %.12g\n", params.k);
  std::printf("mu: %.12g\n", params.mu);
  std::printf("epsilon: %.12g\n", params.epsilon);
  std::printf("delta: %.12g\n", params.delta);
  std::printf("c: %.12g\n", params.c);
  if (params.mu_loss > 0.0) std::printf("mu_loss: %.12g\n", params.mu_loss);
  std::printf("utility_bound: %.12g\n", bound);
  return kExitOk;
}

int cmd_sample(const GlobalFlags& flags) {
  if (flags.config_path.empty()) {
    throw std::invalid_argument("sample: --config is required");
  }
  ExperimentConfig config = load_experiment_config(flags.config_path);
  if (flags.seed_set) config.seed = flags.seed;

  const int d = config.d_list.front();
  const int n = config.n_list.front();
  const double epsilon = config.epsilons.front();
  const NormSpec norm = NormSpec::vector_lp(config.p, d);
  const Domain dom = Domain::ball(norm, Vec::Zero(d), config.radius);

  std::optional<LossModel> model;
  if (config.data.kind == "csv") {
    model.emplace(load_dataset_csv(config.data.path, config.family, norm));
    if (n < model->n()) {
      std::vector<Sample> head(model->data().begin(), model->data().begin() + n);
      model = LossModel(config.family, norm, std::move(head));
    }
  } else {
    model = synthetic_cell_dataset(config, d, n, 0).model;
  }
  const double G = model->lipschitz_bound() > 0.0 ? model->lipschitz_bound() : 1.0;

  MechanismParams params;
  std::optional<Regularizer> reg;
  if (config.variant == Variant::kErm || config.variant == Variant::kSco) {
    reg = config.p > 2.0 ? regularizer_for_lp_high(config.p, dom, dom.center())
                         : regularizer_for_lp(config.p, dom, dom.center());
    params = config.variant == Variant::kErm
                 ? erm_params(G, reg->theta, d, n, epsilon, config.delta / 2.0, config.c)
                 : sco_params(G, reg->theta, d, n, epsilon, config.delta / 2.0, config.c);
  } else {
    params = config.variant == Variant::kScErm
                 ? sc_erm_params(G, config.mu_loss, n, epsilon, config.delta / 2.0,
                                 config.c)
                 : sc_sco_params(G, config.mu_loss, n, epsilon, config.delta / 2.0,
                                 config.c);
  }

  const auto [x, report] =
      reg ? solve_private(*model, *reg, params, config.sampler, config.seed,
                          config.delta / 2.0)
          : solve_private(*model, dom, params, config.sampler, config.seed,
                          config.delta / 2.0);

  std::printf("x:");
  for (int i = 0; i < x.size(); ++i) std::printf(" %.12g", x[i]);
  std::printf("\n");
  std::printf("empirical_risk: %.12g\n", model->empirical_risk(x));
  std::printf("epsilon: %.12g  delta_total: %.12g  (mechanism %.12g + sampling %.12g)\n",
              report.epsilon, report.delta_total, report.delta_mech, report.delta_tv);
  std::printf("value_queries: %llu\n",
              static_cast<unsigned long long>(report.sampler.value_queries));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized exponential mechanism for private convex optimization"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "JSON configuration file");
  auto* seed_opt = app.add_option("--seed", flags.seed, "Master seed override");
  app.add_option("--out", flags.out_path, "Output CSV path");
  app.add_option("--threads", flags.threads,
                 "Worker threads (default: DPNORMOPT_THREADS or 1)");

  CLI::App* run_cmd = app.add_subcommand("run", "Run an experiment grid");
  CLI::App* audit_cmd = app.add_subcommand("audit", "Run the numerical audit suite");
  CLI::App* params_cmd =
      app.add_subcommand("params", "Print mechanism parameters and bounds");
  CLI::App* sample_cmd =
      app.add_subcommand("sample", "One mechanism draw from a config");

  ParamsArgs pargs;
  params_cmd->add_option("--variant", pargs.variant, "erm | sco | sc-erm | sc-sco");
  params_cmd->add_option("--G", pargs.G, "Lipschitz constant");
  params_cmd->add_option("--theta", pargs.theta, "Regularizer range");
  params_cmd->add_option("--d", pargs.d, "Dimension");
  params_cmd->add_option("--n", pargs.n, "Sample count");
  params_cmd->add_option("--epsilon", pargs.epsilon, "Privacy epsilon");
  params_cmd->add_option("--delta", pargs.delta, "Privacy delta");
  params_cmd->add_option("--c", pargs.c, "Sensitivity factor (1 or 2)");
  params_cmd->add_option("--mu-loss", pargs.mu_loss,
                         "Loss strong convexity (sc variants)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  flags.seed_set = seed_opt->count() > 0;
  try {
    if (run_cmd->parsed()) return cmd_run(flags);
    if (audit_cmd->parsed()) return cmd_audit(flags);
    if (params_cmd->parsed()) return cmd_params(pargs);
    if (sample_cmd->parsed()) return cmd_sample(flags);
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntimeError;
  }
}
