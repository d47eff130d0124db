#include "htbo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "htbo/csv.hpp"
#include "htbo/errors.hpp"
#include "htbo/features.hpp"
#include "htbo/posterior.hpp"
#include "htbo/truncation.hpp"

namespace htbo {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  T value{};
  read(j, key, value);
  out = value;
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<long> checked_range(const std::vector<long>& range, long rows, const char* what) {
  if (range.empty()) return {0, rows};
  if (range.size() != 2 || range[0] < 0 || range[1] > rows || range[0] + 2 > range[1]) {
    throw ConfigError(std::string("dataset: invalid ") + what + " row range");
  }
  return range;
}

}  // namespace

Kernel KernelSpec::build() const {
  if (type == "se") return Kernel::squared_exponential(lengthscale);
  if (type == "matern") {
    if (nu == 0.5) return Kernel::matern(lengthscale, MaternSmoothness::kHalf);
    if (nu == 1.5) return Kernel::matern(lengthscale, MaternSmoothness::kThreeHalves);
    if (nu == 2.5) return Kernel::matern(lengthscale, MaternSmoothness::kFiveHalves);
    throw ConfigError("matern kernel: nu must be 0.5, 1.5 or 2.5");
  }
  if (type == "linear") return Kernel::linear();
  throw ConfigError("unknown kernel type '" + type + "'");
}

void ExperimentConfig::validate() const {
  if (T < 1) throw ConfigError("T must be >= 1");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  const auto& env = environment;
  if (env.source != "synthetic" && env.source != "dataset") {
    throw ConfigError("environment source must be 'synthetic' or 'dataset'");
  }
  if (env.source == "synthetic") {
    env.kernel.build();
    if (env.grid_points < 1 || env.grid_dim < 1) throw ConfigError("grid must be non-empty");
    if (env.support_size < 1) throw ConfigError("support_size must be >= 1");
  } else if (env.dataset.path.empty()) {
    throw ConfigError("dataset source requires dataset.path");
  }
  if (!(env.alpha > 0.0 && env.alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
  static const std::set<std::string> channels = {"gaussian", "student_t", "pareto",
                                                 "binary",   "spike",     "empirical"};
  if (!channels.contains(env.channel.type)) {
    throw ConfigError("unknown channel type '" + env.channel.type + "'");
  }
  if (env.channel.type == "empirical" && env.source != "dataset") {
    throw ConfigError("the empirical channel needs a dataset source");
  }
  if (policy.kind == PolicyKind::kAtaQff &&
      (env.source != "synthetic" || env.kernel.type != "se")) {
    throw ConfigError("ata_qff needs a synthetic environment with an SE kernel");
  }
  PolicyConfig probe = policy;
  probe.horizon = T;
  probe.B = 1.0;
  probe.v = 1.0;
  probe.alpha = env.alpha;
  probe.validate();
}

ExperimentConfig parse_config(const json& j) {
  reject_unknown(j, {"policy", "environment", "T", "trials", "seed", "workers", "output", "audit"},
                 "config");
  ExperimentConfig c;
  read(j, "T", c.T);
  read(j, "trials", c.trials);
  read(j, "seed", c.seed);
  read(j, "workers", c.workers);
  read(j, "output", c.output);

  if (j.contains("policy")) {
    const json& p = j.at("policy");
    reject_unknown(p,
                   {"kind", "lambda", "delta", "epsilon", "q", "qff_nodes", "beta_multiplier",
                    "b_multiplier", "beta_rule", "disable_truncation"},
                   "policy");
    std::string kind = to_string(c.policy.kind);
    read(p, "kind", kind);
    c.policy.kind = parse_policy_kind(kind);
    read(p, "lambda", c.policy.lambda);
    read(p, "delta", c.policy.delta);
    read(p, "epsilon", c.policy.epsilon);
    read_optional(p, "q", c.policy.q);
    read(p, "qff_nodes", c.policy.qff_nodes);
    read(p, "beta_multiplier", c.policy.beta_multiplier);
    read(p, "b_multiplier", c.policy.b_multiplier);
    read(p, "disable_truncation", c.policy.disable_truncation);
    std::string rule = "theory";
    read(p, "beta_rule", rule);
    if (rule == "theory") {
      c.policy.beta_rule = BetaRule::kTheory;
    } else if (rule == "log_t") {
      c.policy.beta_rule = BetaRule::kLogT;
    } else {
      throw ConfigError("policy.beta_rule must be 'theory' or 'log_t'");
    }
  }

  if (j.contains("environment")) {
    const json& e = j.at("environment");
    reject_unknown(e,
                   {"source", "kernel", "grid_points", "grid_dim", "support_size", "coeff_range",
                    "normalize", "channel", "alpha", "v", "dataset"},
                   "environment");
    auto& env = c.environment;
    read(e, "source", env.source);
    read(e, "grid_points", env.grid_points);
    read(e, "grid_dim", env.grid_dim);
    read(e, "support_size", env.support_size);
    read(e, "normalize", env.normalize);
    read(e, "alpha", env.alpha);
    read_optional(e, "v", env.v);
    if (e.contains("coeff_range")) {
      std::vector<double> range;
      read(e, "coeff_range", range);
      if (range.size() != 2) throw ConfigError("coeff_range must be [lo, hi]");
      env.coeff_lo = range[0];
      env.coeff_hi = range[1];
    }
    if (e.contains("kernel")) {
      const json& k = e.at("kernel");
      reject_unknown(k, {"type", "lengthscale", "nu"}, "environment.kernel");
      read(k, "type", env.kernel.type);
      read(k, "lengthscale", env.kernel.lengthscale);
      read(k, "nu", env.kernel.nu);
    }
    if (e.contains("channel")) {
      const json& ch = e.at("channel");
      reject_unknown(ch, {"type", "sigma", "degrees", "shape", "magnitude", "gap"},
                     "environment.channel");
      read(ch, "type", env.channel.type);
      read(ch, "sigma", env.channel.sigma);
      read(ch, "degrees", env.channel.degrees);
      read(ch, "shape", env.channel.shape);
      read(ch, "magnitude", env.channel.magnitude);
      read_optional(ch, "gap", env.channel.gap);
    }
    if (e.contains("dataset")) {
      const json& d = e.at("dataset");
      reject_unknown(d, {"path", "objective_rows", "kernel_rows"}, "environment.dataset");
      read(d, "path", env.dataset.path);
      read(d, "objective_rows", env.dataset.objective_rows);
      read(d, "kernel_rows", env.dataset.kernel_rows);
    }
  }

  if (j.contains("audit")) {
    const json& a = j.at("audit");
    reject_unknown(a,
                   {"runs", "horizon", "moment_samples", "nystrom_runs", "nystrom_rounds",
                    "nystrom_delta", "qff_lengthscale", "qff_nodes", "qff_grid"},
                   "audit");
    read(a, "runs", c.audit.runs);
    read(a, "horizon", c.audit.horizon);
    read(a, "moment_samples", c.audit.moment_samples);
    read(a, "nystrom_runs", c.audit.nystrom_runs);
    read(a, "nystrom_rounds", c.audit.nystrom_rounds);
    read(a, "nystrom_delta", c.audit.nystrom_delta);
    read(a, "qff_lengthscale", c.audit.qff_lengthscale);
    read(a, "qff_nodes", c.audit.qff_nodes);
    read(a, "qff_grid", c.audit.qff_grid);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  ExperimentConfig c = parse_config(j);
  // Dataset paths are relative to the config file.
  auto& ds = c.environment.dataset.path;
  if (!ds.empty() && std::filesystem::path(ds).is_relative()) {
    ds = (path.parent_path() / ds).string();
  }
  return c;
}

PreparedData prepare_data(const ExperimentConfig& config) {
  PreparedData data;
  const auto& env = config.environment;
  if (env.source == "synthetic") {
    data.arms = ArmSet::unit_grid(env.grid_points, env.grid_dim);
    data.kernel = env.kernel.build();
    return data;
  }
  const NumericTable table = read_numeric_csv(env.dataset.path);
  const long rows = table.values.rows();
  const auto obj = checked_range(env.dataset.objective_rows, rows, "objective");
  const auto ker = checked_range(env.dataset.kernel_rows, rows, "kernel");
  auto block = std::make_shared<Eigen::MatrixXd>(table.values.middleRows(obj[0], obj[1] - obj[0]));
  data.kernel = empirical_kernel_from_samples(table.values.middleRows(ker[0], ker[1] - ker[0]));
  data.arms = ArmSet::indexed(table.values.cols());
  data.f = block->colwise().mean().transpose();
  data.objective_block = std::move(block);
  data.arm_names = table.columns;
  return data;
}

TrialSeeds trial_seeds(std::uint64_t master, long trial) {
  const std::uint64_t base = derive_seed(master, static_cast<std::uint64_t>(trial));
  return {derive_seed(base, 0), derive_seed(base, 1), derive_seed(base, 2)};
}

TrialSetup make_trial_setup(const ExperimentConfig& config, const PreparedData& data, Rng& rng) {
  const auto& env = config.environment;
  const auto& ch = env.channel;
  const ArmSet& arms = *data.arms;

  Eigen::VectorXd f;
  if (env.source == "synthetic") {
    const bool positive = ch.type == "pareto";
    f = sample_rkhs_function(*data.kernel, arms, env.support_size, env.coeff_lo, env.coeff_hi,
                             positive, rng)
            .values;
    if (env.normalize) {
      const double lo = f.minCoeff();
      const double hi = f.maxCoeff();
      if (!(hi > lo)) throw DegenerateDataError("cannot normalize a constant function");
      f = ((f.array() - lo) / (hi - lo)).matrix();
    }
  } else {
    f = data.f;
  }
  const double B = f.cwiseAbs().maxCoeff();
  if (!(B > 0.0)) throw DegenerateDataError("environment: f is identically zero");

  RewardChannel channel;
  if (ch.type == "gaussian") {
    channel = GaussianAdditive{ch.sigma};
  } else if (ch.type == "student_t") {
    channel = StudentTAdditive{ch.degrees};
  } else if (ch.type == "pareto") {
    channel = ParetoReward{ch.shape};
  } else if (ch.type == "binary") {
    // Without an explicit v, choose the smallest v whose largest gap covers |f|.
    double v = env.v.value_or(0.0);
    if (!env.v) {
      // 2 * max_gap(v) = (1/2)^{a/(1+a)} v^{1/(1+a)} = B.
      v = std::pow(B / std::pow(0.5, env.alpha / (1.0 + env.alpha)), 1.0 + env.alpha);
    }
    channel = ch.gap ? BinaryHeavyTail{*ch.gap, v, env.alpha}
                     : BinaryHeavyTail::with_max_gap(v, env.alpha);
  } else if (ch.type == "spike") {
    std::uniform_int_distribution<Eigen::Index> pick(0, arms.size() - 1);
    channel = SparseSpike{ch.magnitude, pick(rng)};
  } else {
    channel = EmpiricalResample{data.objective_block};
  }
  const double v = env.v.value_or(default_moment_bound(channel, env.alpha, B));

  TrialSetup setup;
  setup.environment.emplace(arms, f, channel, env.alpha, v);
  setup.kernel = *data.kernel;
  setup.policy = config.policy;
  setup.policy.B = B;
  setup.policy.v = v;
  setup.policy.alpha = env.alpha;
  setup.policy.horizon = config.T;
  return setup;
}

TrialRecord run_trial(const ExperimentConfig& config, const PreparedData& data, long trial) {
  TrialRecord record;
  record.trial = trial;
  try {
    const TrialSeeds seeds = trial_seeds(config.seed, trial);
    Rng env_rng(seeds.environment);
    Rng noise_rng(seeds.noise);
    const TrialSetup setup = make_trial_setup(config, data, env_rng);
    const Environment& env = *setup.environment;
    Policy policy(setup.policy, *setup.kernel, env.arms(), seeds.policy);

    const double best = env.f()(env.best_arm());
    double cumulative = 0.0;
    record.rounds.reserve(static_cast<std::size_t>(config.T));
    for (long t = 1; t <= config.T; ++t) {
      const auto start = std::chrono::steady_clock::now();
      const Eigen::Index arm = policy.select_arm();
      const double beta = policy.current_beta();
      const double y = env.draw_reward(arm, noise_rng);
      const StepOutcome out = policy.step(y);
      const double inst = best - env.f()(arm);
      cumulative += inst;
      RoundRecord r;
      r.t = t;
      r.arm = arm;
      r.reward = y;
      r.truncated = out.truncated;
      r.inst_regret = inst;
      r.cum_regret = cumulative;
      r.beta = beta;
      r.b = out.level;
      r.m_t = out.dimension;
      r.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      record.rounds.push_back(r);
    }
  } catch (const NumericError& e) {
    record.error = e.what();
  }
  return record;
}

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned workers) {
  config.validate();
  const PreparedData data = prepare_data(config);
  if (workers == 0) workers = std::max(1u, config.workers);
  workers = std::min<unsigned>(workers, static_cast<unsigned>(config.trials));

  ExperimentResult result;
  result.trials.resize(static_cast<std::size_t>(config.trials));
  std::atomic<long> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&] {
    while (true) {
      const long i = next.fetch_add(1);
      if (i >= config.trials) return;
      try {
        result.trials[static_cast<std::size_t>(i)] = run_trial(config, data, i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next = config.trials;
        return;
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  auto& s = result.summary;
  s.mean_time_avg_regret.assign(static_cast<std::size_t>(config.T), 0.0);
  s.std_time_avg_regret.assign(static_cast<std::size_t>(config.T), 0.0);
  std::vector<const TrialRecord*> done;
  for (const auto& tr : result.trials) {
    if (tr.error) {
      ++s.aborted;
    } else {
      done.push_back(&tr);
    }
  }
  s.completed = static_cast<long>(done.size());
  s.failed = static_cast<double>(s.aborted) > 0.1 * static_cast<double>(config.trials);
  if (!done.empty()) {
    const double n = static_cast<double>(done.size());
    for (std::size_t t = 0; t < static_cast<std::size_t>(config.T); ++t) {
      double sum = 0.0;
      for (const auto* tr : done) sum += tr->rounds[t].cum_regret / static_cast<double>(t + 1);
      const double mean = sum / n;
      double ss = 0.0;
      for (const auto* tr : done) {
        const double d = tr->rounds[t].cum_regret / static_cast<double>(t + 1) - mean;
        ss += d * d;
      }
      s.mean_time_avg_regret[t] = mean;
      s.std_time_avg_regret[t] = done.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    }
  }
  return result;
}

void write_trials_csv(std::ostream& out, const ExperimentResult& result) {
  out << "trial,t,arm,reward,truncated,inst_regret,cum_regret,beta,b,m_t\n";
  for (const auto& tr : result.trials) {
    for (const auto& r : tr.rounds) {
      out << tr.trial << ',' << r.t << ',' << r.arm << ',' << format_real(r.reward) << ','
          << (r.truncated ? 1 : 0) << ',' << format_real(r.inst_regret) << ','
          << format_real(r.cum_regret) << ',' << format_real(r.beta) << ','
          << (r.b.is_unlimited() ? std::string("inf") : format_real(r.b.value())) << ','
          << r.m_t << '\n';
    }
  }
}

json summary_json(const ExperimentConfig& config, const ExperimentResult& result) {
  const auto& s = result.summary;
  json errors = json::array();
  for (const auto& tr : result.trials) {
    if (tr.error) errors.push_back({{"trial", tr.trial}, {"error", *tr.error}});
  }
  json j;
  j["policy"] = to_string(config.policy.kind);
  j["T"] = config.T;
  j["trials"] = config.trials;
  j["seed"] = config.seed;
  j["completed"] = s.completed;
  j["aborted"] = s.aborted;
  j["failed"] = s.failed;
  j["errors"] = errors;
  j["mean_time_avg_regret"] = s.mean_time_avg_regret;
  j["std_time_avg_regret"] = s.std_time_avg_regret;
  j["final_mean_time_avg_regret"] =
      s.mean_time_avg_regret.empty() ? 0.0 : s.mean_time_avg_regret.back();
  j["final_std_time_avg_regret"] =
      s.std_time_avg_regret.empty() ? 0.0 : s.std_time_avg_regret.back();
  return j;
}

void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& config,
                   const ExperimentResult& result) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "trials.csv");
    if (!csv) throw InputError("cannot write " + (dir / "trials.csv").string());
    write_trials_csv(csv, result);
  }
  std::ofstream js(dir / "summary.json");
  if (!js) throw InputError("cannot write " + (dir / "summary.json").string());
  js << summary_json(config, result).dump(2) << '\n';
}

double qff_sup_error(int nodes, double lengthscale, long grid_points) {
  const QffEmbedding qff(nodes, 1, lengthscale);
  const ArmSet grid = ArmSet::unit_grid(grid_points);
  const Eigen::MatrixXd phi = qff.embed_arms(grid);
  const Eigen::MatrixXd approx = phi.transpose() * phi;
  const Eigen::MatrixXd exact = gram(Kernel::squared_exponential(lengthscale), grid);
  return (approx - exact).cwiseAbs().maxCoeff();
}

CoverageResult coverage_run(const ExperimentConfig& config, const PreparedData& data,
                            std::uint64_t seed, long horizon) {
  ExperimentConfig c = config;
  c.T = horizon;
  c.policy.kind = PolicyKind::kTgpUcb;
  const TrialSeeds seeds = trial_seeds(seed, 0);
  Rng env_rng(seeds.environment);
  Rng noise_rng(seeds.noise);
  const TrialSetup setup = make_trial_setup(c, data, env_rng);
  const Environment& env = *setup.environment;
  Policy policy(setup.policy, *setup.kernel, env.arms(), seeds.policy);

  CoverageResult out;
  for (long t = 1; t <= horizon; ++t) {
    const Eigen::Index arm = policy.select_arm();
    if (out.covered) {
      const Eigen::VectorXd mu = policy.means();
      const Eigen::VectorXd var = policy.variances();
      const double beta = policy.current_beta();
      for (Eigen::Index a = 0; a < mu.size(); ++a) {
        if (std::abs(env.f()(a) - mu(a)) > beta * std::sqrt(var(a))) {
          out.covered = false;
          out.first_violation = t;
          break;
        }
      }
    }
    policy.step(env.draw_reward(arm, noise_rng));
  }
  return out;
}

VarianceSumCheck variance_sum_run(const ExperimentConfig& config, const PreparedData& data,
                                  std::uint64_t seed, long horizon) {
  ExperimentConfig c = config;
  c.T = horizon;
  c.policy.kind = PolicyKind::kTgpUcb;
  const TrialSeeds seeds = trial_seeds(seed, 0);
  Rng env_rng(seeds.environment);
  Rng noise_rng(seeds.noise);
  const TrialSetup setup = make_trial_setup(c, data, env_rng);
  const Environment& env = *setup.environment;
  Policy policy(setup.policy, *setup.kernel, env.arms(), seeds.policy);

  VarianceSumCheck out;
  for (long t = 1; t <= horizon; ++t) {
    const Eigen::Index arm = policy.select_arm();
    out.variance_sum += policy.exact_posterior()->variance(arm);
    policy.step(env.draw_reward(arm, noise_rng));
  }
  out.information_gain =
      information_gain(policy.arm_gram(), policy.played(), setup.policy.lambda);
  out.bound = 2.0 * (1.0 + setup.policy.lambda) * out.information_gain;
  return out;
}

SandwichCheck nystrom_sandwich_run(const ExperimentConfig& config, const PreparedData& data,
                                   std::uint64_t seed, long rounds, double delta) {
  ExperimentConfig c = config;
  c.T = rounds;
  c.policy.kind = PolicyKind::kAtaNystrom;
  c.policy.delta = delta;
  c.policy.q.reset();
  const TrialSeeds seeds = trial_seeds(seed, 0);
  Rng env_rng(seeds.environment);
  Rng noise_rng(seeds.noise);
  const TrialSetup setup = make_trial_setup(c, data, env_rng);
  const Environment& env = *setup.environment;
  Policy policy(setup.policy, *setup.kernel, env.arms(), seeds.policy);
  for (long t = 1; t <= rounds; ++t) {
    const Eigen::Index arm = policy.select_arm();
    policy.step(env.draw_reward(arm, noise_rng));
  }

  PosteriorState exact(policy.arm_gram(), setup.policy.lambda);
  for (Eigen::Index a : policy.played()) exact.update(a, 0.0, 0.0);

  const double eps = setup.policy.epsilon;
  const double rho = (1.0 + eps) / (1.0 - eps);
  const ApproxPosteriorState& approx = *policy.approx_posterior();
  SandwichCheck out;
  out.sandwich = true;
  for (Eigen::Index a = 0; a < policy.arm_gram().rows(); ++a) {
    const double s2 = exact.variance(a);
    const double s2_approx = approx.variance(a);
    if (s2_approx < s2 / rho - 1e-10 || s2_approx > rho * s2 + 1e-10) out.sandwich = false;
  }
  const double gamma = information_gain(policy.arm_gram(), policy.played(), setup.policy.lambda);
  out.m_t = policy.dictionary()->size();
  out.size_bound =
      6.0 * rho * (1.0 + 1.0 / setup.policy.lambda) * setup.policy.nystrom_q() * gamma;
  out.size = static_cast<double>(out.m_t) <= out.size_bound;
  return out;
}

bool AuditReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

AuditReport run_audit(const ExperimentConfig& config) {
  config.validate();
  const PreparedData data = prepare_data(config);
  const AuditSpec& spec = config.audit;
  AuditReport report;
  char buf[160];

  for (int nodes : spec.qff_nodes) {
    if (config.environment.source != "synthetic") break;
    const double err = qff_sup_error(nodes, spec.qff_lengthscale, spec.qff_grid);
    const double bound = QffEmbedding::error_bound(nodes, 1, spec.qff_lengthscale);
    std::snprintf(buf, sizeof buf, "nbar=%d l=%g grid=%ld", nodes, spec.qff_lengthscale,
                  spec.qff_grid);
    report.entries.push_back({"qff_error_bound", err <= bound, err, bound, buf});
  }

  {
    Rng rng(derive_seed(config.seed, 101));
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> rows(1, 50);
    std::uniform_int_distribution<int> cols(1, 10);
    double worst_l2 = 0.0;
    double worst_lp_excess = -1e300;
    const double alpha = config.environment.alpha;
    for (int inst = 0; inst < 100; ++inst) {
      const int t = rows(rng);
      const int q = cols(rng);
      Eigen::MatrixXd a(t, q);
      for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
      const Eigen::MatrixXd w = whitened_columns(a, config.policy.lambda);
      worst_l2 = std::max(worst_l2, w.colwise().norm().maxCoeff());
      const double cap = std::pow(static_cast<double>(t), (1.0 - alpha) / (2.0 * (1.0 + alpha)));
      for (Eigen::Index k = 0; k < w.cols(); ++k) {
        const double lp = std::pow(w.col(k).cwiseAbs().array().pow(1.0 + alpha).sum(),
                                   1.0 / (1.0 + alpha));
        worst_lp_excess = std::max(worst_lp_excess, lp - cap);
      }
    }
    report.entries.push_back({"column_norm_l2", worst_l2 <= 1.0 + 1e-10, worst_l2, 1.0 + 1e-10,
                              "100 random instances"});
    report.entries.push_back({"column_norm_l1p", worst_lp_excess <= 1e-8, worst_lp_excess, 1e-8,
                              "max (l_{1+a} norm - t^{(1-a)/(2(1+a))})"});
  }

  {
    double worst = -1e300;
    bool ok = true;
    for (long r = 0; r < spec.runs; ++r) {
      const auto chk = variance_sum_run(config, data, derive_seed(config.seed, 200 + r),
                                        spec.horizon);
      worst = std::max(worst, chk.variance_sum - chk.bound);
      if (chk.variance_sum > chk.bound + 1e-6) ok = false;
    }
    std::snprintf(buf, sizeof buf, "%ld runs, T=%ld, max(sum - bound)", spec.runs, spec.horizon);
    report.entries.push_back({"sum_of_variances", ok, worst, 1e-6, buf});
  }

  {
    long covered = 0;
    for (long r = 0; r < spec.runs; ++r) {
      if (coverage_run(config, data, derive_seed(config.seed, 300 + r), spec.horizon).covered) {
        ++covered;
      }
    }
    const double frac = static_cast<double>(covered) / static_cast<double>(spec.runs);
    const double need = 1.0 - config.policy.delta - 0.05;
    std::snprintf(buf, sizeof buf, "%ld/%ld runs covered, T=%ld", covered, spec.runs,
                  spec.horizon);
    report.entries.push_back({"confidence_coverage", frac >= need, frac, need, buf});
  }

  {
    Rng env_rng(derive_seed(config.seed, 400));
    const TrialSetup setup = make_trial_setup(config, data, env_rng);
    const Environment& env = *setup.environment;
    Rng rng(derive_seed(config.seed, 401));
    double worst = -1e300;
    long failures = 0;
    for (Eigen::Index a = 0; a < env.arms().size(); ++a) {
      const auto est = certify_moment(env, a, env.alpha(), spec.moment_samples, rng);
      const double excess = est.mean - (env.v() + 3.0 * est.standard_error);
      worst = std::max(worst, excess);
      if (excess > 0.0) ++failures;
    }
    const bool dataset = config.environment.source == "dataset";
    std::snprintf(buf, sizeof buf, "%ld/%ld arms above v + 3 SE%s", failures,
                  static_cast<long>(env.arms().size()),
                  dataset && failures > 0 ? " (warning: v is an estimate for datasets)" : "");
    report.entries.push_back({"moment_certification", failures == 0 || dataset, worst, 0.0, buf});
  }

  if (config.policy.kind == PolicyKind::kAtaNystrom) {
    long sandwich = 0;
    long size = 0;
    for (long r = 0; r < spec.nystrom_runs; ++r) {
      const auto chk = nystrom_sandwich_run(config, data, derive_seed(config.seed, 500 + r),
                                            spec.nystrom_rounds, spec.nystrom_delta);
      sandwich += chk.sandwich ? 1 : 0;
      size += chk.size ? 1 : 0;
    }
    const double n = static_cast<double>(spec.nystrom_runs);
    std::snprintf(buf, sizeof buf, "%ld runs of t=%ld, delta=%g", spec.nystrom_runs,
                  spec.nystrom_rounds, spec.nystrom_delta);
    report.entries.push_back({"nystrom_sandwich", sandwich / n >= 0.9, sandwich / n, 0.9, buf});
    report.entries.push_back({"nystrom_dictionary_size", size / n >= 0.9, size / n, 0.9, buf});
  }
  return report;
}

json audit_json(const AuditReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"name", e.name},
                       {"passed", e.passed},
                       {"measured", e.measured},
                       {"threshold", e.threshold},
                       {"detail", e.detail}});
  }
  return {{"passed", report.all_passed()}, {"entries", entries}};
}

}  // namespace htbo
