#include "htbo/policies.hpp"

#include <cmath>

#include "htbo/errors.hpp"

namespace htbo {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kGpUcb:
      return "gp_ucb";
    case PolicyKind::kTgpUcb:
      return "tgp_ucb";
    case PolicyKind::kAtaQff:
      return "ata_qff";
    case PolicyKind::kAtaNystrom:
      return "ata_nystrom";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(const std::string& name) {
  if (name == "gp_ucb") return PolicyKind::kGpUcb;
  if (name == "tgp_ucb") return PolicyKind::kTgpUcb;
  if (name == "ata_qff") return PolicyKind::kAtaQff;
  if (name == "ata_nystrom") return PolicyKind::kAtaNystrom;
  throw ConfigError("unknown policy kind '" + name + "'");
}

void PolicyConfig::validate() const {
  if (!(B > 0.0)) throw ConfigError("policy: B must be positive");
  if (!(lambda > 0.0)) throw ConfigError("policy: lambda must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("policy: alpha must be in (0, 1]");
  if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("policy: delta must be in (0, 1]");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("policy: epsilon must be in (0, 1)");
  if (!(v > 0.0)) throw ConfigError("policy: v must be positive");
  if (horizon < 1) throw ConfigError("policy: horizon must be >= 1");
  if (!(beta_multiplier > 0.0) || !(b_multiplier > 0.0)) {
    throw ConfigError("policy: multipliers must be positive");
  }
  if (q && !(*q > 0.0)) throw ConfigError("policy: q must be positive");
  if (qff_nodes < 1 || qff_nodes > 64) throw ConfigError("policy: qff_nodes must be in [1, 64]");
}

double PolicyConfig::nystrom_q() const {
  if (q) return *q;
  const double rho = (1.0 + epsilon) / (1.0 - epsilon);
  return 6.0 * rho * std::log(4.0 * static_cast<double>(horizon) / delta) / (epsilon * epsilon);
}

long PolicyConfig::qff_base_size(long input_dim) const {
  return static_cast<long>(std::lround(std::pow(static_cast<double>(qff_nodes), input_dim)));
}

TruncationSchedule PolicyConfig::schedule() const {
  TruncationSchedule s;
  s.kind = kind == PolicyKind::kAtaQff       ? ScheduleKind::kAtaQff
           : kind == PolicyKind::kAtaNystrom ? ScheduleKind::kAtaNystrom
                                             : ScheduleKind::kTgp;
  s.v = v;
  s.alpha = alpha;
  s.delta = delta;
  s.horizon = horizon;
  s.multiplier = b_multiplier;
  return s;
}

double beta_next(const PolicyConfig& config, long t, const StateSummary& summary) {
  if (t < 0) throw ConfigError("beta: round must be non-negative");
  const double mult = config.beta_multiplier;
  if (config.kind == PolicyKind::kGpUcb || config.beta_rule == BetaRule::kLogT) {
    return mult * std::log(static_cast<double>(t + 1));
  }
  const double alpha = config.alpha;
  const double inv = 1.0 / (1.0 + alpha);
  const double T = static_cast<double>(config.horizon);
  const double growth = std::pow(static_cast<double>(t), (1.0 - alpha) * 0.5 * inv);

  switch (config.kind) {
    case PolicyKind::kTgpUcb: {
      if (t == 0) return mult * config.B;
      const double b = config.schedule().level(t).value();
      return mult * (config.B + 3.0 / std::sqrt(config.lambda) * b *
                                    std::sqrt(summary.log_det_ratio +
                                              2.0 * std::log(1.0 / config.delta)));
    }
    case PolicyKind::kAtaQff: {
      if (t == 0) return mult * config.B;
      const double m = static_cast<double>(summary.dimension);
      return mult * (config.B + 4.0 * std::sqrt(m / config.lambda) * std::pow(config.v, inv) *
                                    std::pow(std::log(2.0 * m * T / config.delta), alpha * inv) *
                                    growth);
    }
    case PolicyKind::kAtaNystrom: {
      const double base = config.B * (1.0 + 1.0 / std::sqrt(1.0 - config.epsilon));
      if (summary.dimension <= 0 || t == 0) return mult * base;
      const double m = static_cast<double>(summary.dimension);
      return mult * (base + 4.0 * std::sqrt(m / config.lambda) * std::pow(config.v, inv) *
                                std::pow(std::log(4.0 * m * T / config.delta), alpha * inv) *
                                growth);
    }
    case PolicyKind::kGpUcb:
      break;
  }
  return 0.0;
}

Eigen::Index argmax_ucb(const Eigen::VectorXd& means, const Eigen::VectorXd& variances, double beta) {
  if (means.size() == 0 || means.size() != variances.size()) {
    throw DomainError("argmax_ucb: need matching non-empty mean and variance vectors");
  }
  Eigen::Index best = 0;
  double best_score = 0.0;
  for (Eigen::Index a = 0; a < means.size(); ++a) {
    const double score = means(a) + beta * std::sqrt(std::max(variances(a), 0.0));
    if (std::isnan(score)) throw NumericError("UCB score is NaN at arm " + std::to_string(a));
    if (a == 0 || score > best_score) {
      best = a;
      best_score = score;
    }
  }
  return best;
}

Policy::Policy(PolicyConfig config, const Kernel& kernel, const ArmSet& arms, std::uint64_t seed)
    : config_(std::move(config)), gram_(gram(kernel, arms)), rng_(seed) {
  config_.validate();
  switch (config_.kind) {
    case PolicyKind::kGpUcb:
    case PolicyKind::kTgpUcb:
      exact_.emplace(gram_, config_.lambda);
      break;
    case PolicyKind::kAtaQff: {
      const auto* se = std::get_if<SquaredExponential>(&kernel.variant());
      if (se == nullptr) throw ConfigError("ata_qff requires a squared-exponential kernel");
      qff_.emplace(config_.qff_nodes, static_cast<int>(arms.dim()), se->lengthscale);
      qff_features_ = qff_->embed_arms(arms);
      approx_.emplace(gram_.diagonal(), config_.lambda, VarianceVariant::kScaled);
      break;
    }
    case PolicyKind::kAtaNystrom:
      approx_.emplace(gram_.diagonal(), config_.lambda, VarianceVariant::kDeterministicTraining);
      break;
  }
}

StateSummary Policy::summary() const {
  StateSummary s;
  if (exact_) {
    s.log_det_ratio = exact_->log_det_ratio();
    s.dimension = rounds();
  } else if (qff_) {
    s.dimension = qff_->base_size();
  } else {
    s.dimension = dict_ ? static_cast<long>(dict_->size()) : 0;
  }
  return s;
}

Eigen::VectorXd Policy::means() const {
  if (exact_) return exact_->means(config_.kind == PolicyKind::kTgpUcb);
  return approx_->means();
}

Eigen::VectorXd Policy::variances() const {
  if (exact_) {
    Eigen::VectorXd v(gram_.rows());
    for (Eigen::Index a = 0; a < v.size(); ++a) v(a) = exact_->variance(a);
    return v;
  }
  return approx_->variances();
}

Eigen::Index Policy::select_arm() {
  beta_ = beta_next(config_, rounds(), summary());
  const Eigen::Index arm = argmax_ucb(means(), variances(), beta_);
  pending_ = arm;
  return arm;
}

StepOutcome Policy::step(double reward) {
  if (!pending_) throw DomainError("policy: step() called without a pending selection");
  const Eigen::Index arm = *pending_;
  pending_.reset();
  played_.push_back(arm);
  rewards_.push_back(reward);
  const long t = rounds();

  StepOutcome out;
  out.arm = arm;
  out.reward = reward;
  const TruncationSchedule sched = config_.schedule();

  switch (config_.kind) {
    case PolicyKind::kGpUcb:
      exact_->update(arm, reward, reward);
      out.dimension = t;
      break;
    case PolicyKind::kTgpUcb: {
      out.level = config_.disable_truncation ? TruncationLevel::unlimited() : sched.level(t);
      const double kept = truncate_reward(reward, out.level);
      out.truncated = !out.level.admits(reward);
      exact_->update(arm, reward, kept);
      out.dimension = t;
      break;
    }
    case PolicyKind::kAtaQff: {
      out.dimension = qff_->base_size();
      out.level = config_.disable_truncation ? TruncationLevel::unlimited()
                                             : sched.level(t, out.dimension);
      approx_->rebuild(qff_features_, played_, rewards_, out.level);
      out.truncated = approx_->newest_truncated();
      break;
    }
    case PolicyKind::kAtaNystrom: {
      // Previous round's variance function, evaluated at every played point
      // including the newest.
      std::vector<double> prev_var(played_.size());
      for (std::size_t i = 0; i < played_.size(); ++i) prev_var[i] = approx_->variance(played_[i]);
      dict_ = nystrom_sample(played_, prev_var, config_.nystrom_q(), gram_, rng_);
      const Eigen::MatrixXd features = nystrom_embed_arms(*dict_, gram_);
      out.dimension = dict_->size();
      out.level = config_.disable_truncation ? TruncationLevel::unlimited()
                                             : sched.level(t, out.dimension);
      approx_->rebuild(features, played_, rewards_, out.level);
      out.truncated = approx_->newest_truncated();
      break;
    }
  }
  return out;
}

double RegretSeries::time_average() const {
  if (cumulative.empty()) return 0.0;
  return cumulative.back() / static_cast<double>(cumulative.size());
}

RegretSeries regret_accounting(const Eigen::VectorXd& f, std::span<const Eigen::Index> played) {
  if (f.size() == 0) throw DomainError("regret: empty value vector");
  if (!f.allFinite()) throw DomainError("regret: f must be finite");
  RegretSeries out;
  f.maxCoeff(&out.best_arm);
  const double best = f(out.best_arm);
  double running = 0.0;
  out.instantaneous.reserve(played.size());
  out.cumulative.reserve(played.size());
  for (Eigen::Index arm : played) {
    if (arm < 0 || arm >= f.size()) throw DomainError("regret: played arm out of range");
    const double r = best - f(arm);
    running += r;
    out.instantaneous.push_back(r);
    out.cumulative.push_back(running);
  }
  return out;
}

}  // namespace htbo
