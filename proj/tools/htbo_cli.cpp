// Command-line front end: run experiments, audit invariants, test residual normality.
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "htbo/csv.hpp"
#include "htbo/errors.hpp"
#include "htbo/harness.hpp"
#include "htbo/stats.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kBadInput = 1;
constexpr int kNumericFailure = 2;

int run_command(const std::string& config_path, const std::optional<std::string>& policy,
                const std::optional<long>& horizon, const std::optional<long>& trials,
                const std::optional<std::uint64_t>& seed, const std::optional<std::string>& out,
                const std::optional<unsigned>& workers) {
  htbo::ExperimentConfig config = htbo::load_config(config_path);
  if (policy) config.policy.kind = htbo::parse_policy_kind(*policy);
  if (horizon) config.T = *horizon;
  if (trials) config.trials = *trials;
  if (seed) config.seed = *seed;
  if (out) config.output = *out;
  if (workers) config.workers = *workers;

  const htbo::ExperimentResult result = htbo::run_experiment(config);
  htbo::write_outputs(config.output, config, result);
  const auto& s = result.summary;
  std::printf("%s: %ld/%ld trials completed, final mean R_T/T = %.6g\n",
              htbo::to_string(config.policy.kind).c_str(), s.completed, config.trials,
              s.mean_time_avg_regret.empty() ? 0.0 : s.mean_time_avg_regret.back());
  for (const auto& tr : result.trials) {
    if (tr.error) std::fprintf(stderr, "trial %ld aborted: %s\n", tr.trial, tr.error->c_str());
  }
  return s.failed ? kNumericFailure : kOk;
}

int audit_command(const std::string& config_path) {
  const htbo::ExperimentConfig config = htbo::load_config(config_path);
  const htbo::AuditReport report = htbo::run_audit(config);
  std::cout << htbo::audit_json(report).dump(2) << '\n';
  return report.all_passed() ? kOk : kNumericFailure;
}

int ks_command(const std::string& input, const std::string& column) {
  const htbo::NumericTable table = htbo::read_numeric_csv(input);
  const Eigen::Index c = table.column_index(column);
  const Eigen::VectorXd x = table.values.col(c);
  const htbo::KsResult r = htbo::ks_normality({x.data(), static_cast<std::size_t>(x.size())});
  nlohmann::json j = {{"n", r.n}, {"statistic", r.statistic}, {"p_value", r.p_value}};
  std::cout << j.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-tailed GP bandit experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> policy;
  std::optional<long> horizon;
  std::optional<long> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
  auto* run = app.add_subcommand("run", "Run an experiment and write trials.csv / summary.json");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--policy", policy, "gp_ucb | tgp_ucb | ata_qff | ata_nystrom");
  run->add_option("--T", horizon, "Horizon");
  run->add_option("--trials", trials, "Number of independent trials");
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--out", out, "Output directory");
  run->add_option("--workers", workers, "Worker threads");

  std::string audit_config;
  auto* audit = app.add_subcommand("audit", "Check the theoretical invariants");
  audit->add_option("--config", audit_config, "JSON config file")->required();

  std::string ks_input;
  std::string ks_column;
  auto* ks = app.add_subcommand("ks", "KS normality test of one CSV column");
  ks->add_option("--input", ks_input, "CSV file")->required();
  ks->add_option("--column", ks_column, "Column name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*run) return run_command(config_path, policy, horizon, trials, seed, out, workers);
    if (*audit) return audit_command(audit_config);
    if (*ks) return ks_command(ks_input, ks_column);
  } catch (const htbo::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kNumericFailure;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  }
  return kBadInput;
}
