#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "htbo/environments.hpp"
#include "htbo/kernels.hpp"
#include "htbo/policies.hpp"

namespace htbo {

struct KernelSpec {
  std::string type = "se";  // se | matern | linear
  double lengthscale = 0.2;
  double nu = 2.5;          // matern only: 0.5, 1.5 or 2.5

  Kernel build() const;
};

struct ChannelSpec {
  std::string type = "student_t";  // gaussian | student_t | pareto | binary | spike | empirical
  double sigma = 1.0;              // gaussian
  int degrees = 3;                 // student_t
  double shape = 2.0;              // pareto
  double magnitude = 10.0;         // spike
  std::optional<double> gap;       // binary; defaults to the largest admissible gap
};

struct DatasetSpec {
  std::string path;
  /// Half-open row ranges [begin, end) of the sample block; empty = all rows.
  std::vector<long> objective_rows;
  std::vector<long> kernel_rows;
};

struct EnvironmentSpec {
  std::string source = "synthetic";  // synthetic | dataset
  KernelSpec kernel;
  long grid_points = 100;  // per dimension
  long grid_dim = 1;
  long support_size = 100;
  double coeff_lo = -1.0;
  double coeff_hi = 1.0;
  /// Rescale f affinely onto [0, 1].
  bool normalize = false;
  ChannelSpec channel;
  double alpha = 1.0;
  std::optional<double> v;  // defaults to the channel's bound for max |f|
  DatasetSpec dataset;
};

struct AuditSpec {
  long runs = 20;
  long horizon = 200;
  long moment_samples = 100000;
  long nystrom_runs = 100;
  long nystrom_rounds = 100;
  double nystrom_delta = 0.05;
  double qff_lengthscale = 1.0;
  std::vector<int> qff_nodes = {4, 6, 8};
  long qff_grid = 200;
};

/// Defaults mirror the experimental setup: lambda = 1, epsilon = 0.1,
/// delta = 0.1, unit multipliers.
struct ExperimentConfig {
  PolicyConfig policy;  // B, v, alpha and horizon are filled per trial
  EnvironmentSpec environment;
  long T = 100;
  long trials = 1;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string output = "out";
  AuditSpec audit;

  /// Throws ConfigError for T < 1, trials < 1 and invalid sub-specs.
  void validate() const;
};

/// Parses the JSON config schema (see README). Unknown keys are rejected.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Shared, immutable pieces of an experiment (the parsed dataset).
struct PreparedData {
  std::optional<ArmSet> arms;
  std::optional<Kernel> kernel;
  Eigen::VectorXd f;
  std::shared_ptr<const Eigen::MatrixXd> objective_block;
  std::vector<std::string> arm_names;
};

PreparedData prepare_data(const ExperimentConfig& config);

/// Everything one trial needs: its environment, the kernel the policy
/// models, and the policy config with B, v, alpha and T filled in.
struct TrialSetup {
  std::optional<Environment> environment;
  std::optional<Kernel> kernel;
  PolicyConfig policy;
};

/// Fresh f for synthetic sources (drawn from `rng`), fixed for datasets.
TrialSetup make_trial_setup(const ExperimentConfig& config, const PreparedData& data, Rng& rng);

/// Seeds of the environment, noise and policy streams of one trial.
struct TrialSeeds {
  std::uint64_t environment;
  std::uint64_t noise;
  std::uint64_t policy;
};
TrialSeeds trial_seeds(std::uint64_t master, long trial);

struct RoundRecord {
  long t = 0;
  Eigen::Index arm = 0;
  double reward = 0.0;
  bool truncated = false;
  double inst_regret = 0.0;
  double cum_regret = 0.0;
  double beta = 0.0;
  TruncationLevel b = TruncationLevel::unlimited();
  long m_t = 0;
  double seconds = 0.0;  // wall clock; not written to the CSV
};

struct TrialRecord {
  long trial = 0;
  std::vector<RoundRecord> rounds;
  std::optional<std::string> error;  // set when the trial aborted
};

struct ExperimentSummary {
  std::vector<double> mean_time_avg_regret;  // per t, over completed trials
  std::vector<double> std_time_avg_regret;
  long completed = 0;
  long aborted = 0;
  /// More than 10% of trials aborted.
  bool failed = false;
};

struct ExperimentResult {
  std::vector<TrialRecord> trials;
  ExperimentSummary summary;
};

TrialRecord run_trial(const ExperimentConfig& config, const PreparedData& data, long trial);

/// Runs config.trials independent trials on a pool of `workers` threads
/// (config.workers when 0). Output does not depend on the pool size.
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned workers = 0);

/// trial,t,arm,reward,truncated,inst_regret,cum_regret,beta,b,m_t
void write_trials_csv(std::ostream& out, const ExperimentResult& result);
nlohmann::json summary_json(const ExperimentConfig& config, const ExperimentResult& result);
/// Writes trials.csv and summary.json into `dir` (created if missing).
void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& config,
                   const ExperimentResult& result);

// Invariant checks shared by the audit command and the test suites.

/// sup over a grid x grid of [0,1]^2 of |k_SE(x,y) - phi(x).phi(y)| for d = 1.
double qff_sup_error(int nodes, double lengthscale, long grid_points);

struct CoverageResult {
  bool covered = true;
  long first_violation = 0;  // round of the first violation, 0 if none
};
/// One TGP-UCB run of `horizon` rounds on a fresh environment; checks
/// |f(x) - mu_{t-1}(x)| <= beta_t sigma_{t-1}(x) at every arm and round.
CoverageResult coverage_run(const ExperimentConfig& config, const PreparedData& data,
                            std::uint64_t seed, long horizon);

struct VarianceSumCheck {
  double variance_sum = 0.0;     // sum_s sigma^2_{s-1}(x_s)
  double information_gain = 0.0; // 1/2 ln |I + K_T / lambda| on the played points
  double bound = 0.0;            // 2 (1 + lambda) information_gain
};
VarianceSumCheck variance_sum_run(const ExperimentConfig& config, const PreparedData& data,
                                  std::uint64_t seed, long horizon);

struct SandwichCheck {
  bool sandwich = false;  // ((1-e)/(1+e)) s2 <= s2~ <= ((1+e)/(1-e)) s2 at every arm
  bool size = false;      // m_t <= 6 rho (1 + 1/lambda) q gamma
  long m_t = 0;
  double size_bound = 0.0;
};
SandwichCheck nystrom_sandwich_run(const ExperimentConfig& config, const PreparedData& data,
                                   std::uint64_t seed, long rounds, double delta);

struct AuditEntry {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditEntry> entries;
  bool all_passed() const;
};

AuditReport run_audit(const ExperimentConfig& config);
nlohmann::json audit_json(const AuditReport& report);

}  // namespace htbo
