#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "htbo/features.hpp"
#include "htbo/kernels.hpp"
#include "htbo/posterior.hpp"
#include "htbo/rng.hpp"
#include "htbo/truncation.hpp"

namespace htbo {

enum class PolicyKind { kGpUcb, kTgpUcb, kAtaQff, kAtaNystrom };

/// kTheory uses the confidence widths from the regret analysis of each
/// policy; kLogT uses beta_t = ln t (the GP-UCB baseline always does).
enum class BetaRule { kTheory, kLogT };

std::string to_string(PolicyKind kind);
/// Accepts gp_ucb, tgp_ucb, ata_qff, ata_nystrom. Throws ConfigError.
PolicyKind parse_policy_kind(const std::string& name);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::kTgpUcb;
  double B = 1.0;        // bound on |f| (RKHS norm proxy)
  double v = 1.0;        // (1+alpha)-moment bound
  double alpha = 1.0;
  double delta = 0.1;
  double lambda = 1.0;
  long horizon = 1;
  double epsilon = 0.1;          // Nystrom accuracy
  std::optional<double> q;       // Nystrom oversampling; derived from epsilon when unset
  int qff_nodes = 32;            // nbar
  double beta_multiplier = 1.0;
  double b_multiplier = 1.0;
  BetaRule beta_rule = BetaRule::kTheory;
  bool disable_truncation = false;  // b = unlimited for every round

  /// Throws ConfigError on B <= 0, lambda <= 0, alpha outside (0, 1],
  /// epsilon outside (0, 1), delta outside (0, 1], horizon < 1, and
  /// non-positive multipliers.
  void validate() const;

  /// q, or 6 rho ln(4T/delta) / epsilon^2 with rho = (1+eps)/(1-eps).
  double nystrom_q() const;
  /// m = nbar^d for QFF.
  long qff_base_size(long input_dim) const;
  TruncationSchedule schedule() const;
};

/// What the confidence width depends on after t observations.
struct StateSummary {
  double log_det_ratio = 0.0;  // ln |I_t + K_t / lambda| (TGP-UCB)
  long dimension = 0;          // m (QFF) or m_t (Nystrom)
};

/// Confidence width beta_{t+1} used to select the arm of round t+1, after t
/// observations. At t = 0 only the B-dependent term remains.
double beta_next(const PolicyConfig& config, long t, const StateSummary& summary);

/// Result of observing one reward.
struct StepOutcome {
  Eigen::Index arm = 0;
  double reward = 0.0;
  bool truncated = false;
  TruncationLevel level = TruncationLevel::unlimited();
  long dimension = 0;
};

/// UCB index argmax with lowest-index tie-breaking. Throws NumericError if
/// any score is NaN.
Eigen::Index argmax_ucb(const Eigen::VectorXd& means, const Eigen::VectorXd& variances, double beta);

/// One arm-selection policy over a finite arm grid.
class Policy {
 public:
  Policy(PolicyConfig config, const Kernel& kernel, const ArmSet& arms, std::uint64_t seed);

  /// Chooses x_t for the next round t = rounds() + 1.
  Eigen::Index select_arm();
  /// Observes the reward of the arm chosen by the last select_arm().
  StepOutcome step(double reward);

  long rounds() const { return static_cast<long>(played_.size()); }
  /// Width used by the last select_arm().
  double current_beta() const { return beta_; }
  /// Mean and variance after rounds() observations, as scored by the policy.
  Eigen::VectorXd means() const;
  Eigen::VectorXd variances() const;
  StateSummary summary() const;

  const PolicyConfig& config() const { return config_; }
  const Eigen::MatrixXd& arm_gram() const { return gram_; }
  const std::vector<Eigen::Index>& played() const { return played_; }
  /// Exact posterior for GP-UCB / TGP-UCB; null for the ATA variants.
  const PosteriorState* exact_posterior() const { return exact_ ? &*exact_ : nullptr; }
  const ApproxPosteriorState* approx_posterior() const { return approx_ ? &*approx_ : nullptr; }
  const NystromDictionary* dictionary() const { return dict_ ? &*dict_ : nullptr; }

 private:
  PolicyConfig config_;
  Eigen::MatrixXd gram_;
  Rng rng_;
  std::optional<PosteriorState> exact_;
  std::optional<ApproxPosteriorState> approx_;
  std::optional<QffEmbedding> qff_;
  Eigen::MatrixXd qff_features_;
  std::optional<NystromDictionary> dict_;
  std::vector<Eigen::Index> played_;
  std::vector<double> rewards_;
  std::optional<Eigen::Index> pending_;
  double beta_ = 0.0;
};

/// Regret of a play sequence against the best arm of f.
struct RegretSeries {
  Eigen::Index best_arm = 0;
  std::vector<double> instantaneous;
  std::vector<double> cumulative;
  /// R_T / T (0 for an empty sequence).
  double time_average() const;
};

RegretSeries regret_accounting(const Eigen::VectorXd& f, std::span<const Eigen::Index> played);

}  // namespace htbo
