#include "abslab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>

#include <fmt/format.h>

#include "abslab/checkpoint.hpp"
#include "abslab/error.hpp"
#include "abslab/gns.hpp"
#include "abslab/metrics.hpp"
#include "abslab/ppo.hpp"
#include "abslab/pqn.hpp"
#include "abslab/replay.hpp"
#include "abslab/returns.hpp"
#include "abslab/rng.hpp"
#include "abslab/schedule.hpp"

namespace abslab {

namespace fs = std::filesystem;

namespace {

constexpr const char* kScheduleHeader =
    "iteration,global_step,divergence_raw,divergence_smoothed,burn_in,alpha,target,current";
constexpr const char* kGnsHeader = "iteration,global_step,noise,signal,b_simple,target_batch,rollout_len";

// State shared by the three training loops.
class Run {
 public:
  explicit Run(const ExperimentConfig& cfg)
      : cfg_(cfg),
        id_(run_id(cfg)),
        env_(env::make_env(cfg.env, cfg.num_envs, derive_seed(cfg.seed, stream::kEnv), cfg.env_params)),
        init_rng_(make_stream(cfg.seed, stream::kInit)),
        shuffle_rng_(make_stream(cfg.seed, stream::kShuffle)),
        scheduler_rng_(make_stream(cfg.seed, stream::kScheduler)),
        policy_rng_(make_stream(cfg.seed, stream::kPolicySample)),
        metrics_(fs::path(cfg.out_dir) / "metrics.csv", kMetricsHeader),
        start_(std::chrono::steady_clock::now()) {
    env_.set_threads(cfg.threads);
    if (cfg.mode == Mode::kPqnGns) {
      schedule_ = std::make_unique<CsvLog>(fs::path(cfg.out_dir) / "schedule.csv", kGnsHeader);
    } else if (is_adaptive(cfg.mode)) {
      schedule_ = std::make_unique<CsvLog>(fs::path(cfg.out_dir) / "schedule.csv", kScheduleHeader);
    }
  }

  MetricsRow begin_row() {
    MetricsRow row;
    row.run_id = id_;
    row.seed = cfg_.seed;
    row.iteration = ++iteration_;
    return row;
  }

  void add_returns(MetricsRow& row, const std::vector<double>& finished) {
    for (double r : finished) returns_.add(r);
    row.episodic_return_count = static_cast<int>(finished.size());
    row.episodic_return_mean = returns_.mean();
  }

  void record_adaptation(MetricsRow& row, const sched::ScaleTick& tick) {
    row.divergence_raw = tick.divergence_raw;
    row.divergence_smoothed = tick.divergence_smoothed;
    schedule_->write_line(fmt::format("{},{},{},{},{},{},{},{}", row.iteration, row.global_step,
                                      format_double(tick.divergence_raw),
                                      format_double(tick.divergence_smoothed), tick.burn_in ? 1 : 0,
                                      tick.burn_in ? "" : format_double(tick.alpha),
                                      tick.burn_in ? "" : format_double(tick.target),
                                      format_double(tick.current)));
  }

  void write_gns(const MetricsRow& row, const sched::GnsEstimate& est, long target, int next_len) {
    schedule_->write_line(fmt::format("{},{},{},{},{},{},{}", row.iteration, row.global_step,
                                      format_double(est.noise), format_double(est.signal),
                                      est.b_simple ? format_double(*est.b_simple) : "", target, next_len));
  }

  void finish_row(MetricsRow& row) {
    if (cfg_.wall_clock) {
      const auto elapsed = std::chrono::steady_clock::now() - start_;
      row.wall_ms = std::chrono::duration<double, std::milli>(elapsed).count();
    }
    metrics_.write_line(format_row(row));
  }

  double annealed_lr(std::int64_t t) const {
    if (!cfg_.anneal_lr) return cfg_.lr;
    const double frac = 1.0 - static_cast<double>(t) / static_cast<double>(cfg_.total_steps);
    return cfg_.lr * std::max(frac, 0.0);
  }

  agents::EpsilonSchedule epsilon_schedule() const {
    return {cfg_.eps_start, cfg_.eps_end, cfg_.eps_fraction};
  }

  const ExperimentConfig& cfg_;
  std::string id_;
  env::EnvBatch env_;
  Rng init_rng_;
  Rng shuffle_rng_;
  Rng scheduler_rng_;
  Rng policy_rng_;
  CsvLog metrics_;
  std::unique_ptr<CsvLog> schedule_;
  ReturnTracker returns_;
  std::chrono::steady_clock::time_point start_;
  std::int64_t iteration_ = 0;
  std::int64_t t_ = 0;
};

sched::ScalerSettings scaler_settings(const ExperimentConfig& cfg, int granularity) {
  return {cfg.l_min, cfg.l_max, cfg.delta_min, cfg.delta_max, cfg.window, cfg.ema_beta, granularity};
}

void train_pqn(Run& run) {
  const ExperimentConfig& cfg = run.cfg_;
  const env::EnvSpec& spec = run.env_.spec();
  const int n_envs = cfg.num_envs;
  net::MlpParams params =
      net::MlpParams::initialize(spec.obs_dim, cfg.hidden_sizes, spec.num_actions(), run.init_rng_);
  net::AdamState opt(static_cast<Eigen::Index>(params.size()));

  std::optional<sched::AbsScheduler> abs;
  if (cfg.mode == Mode::kPqnAbs) {
    sched::AbsSettings s;
    s.scale = scaler_settings(cfg, 1);
    s.adapt_every = cfg.adapt_every;
    s.ref_batch = cfg.ref_batch;
    s.base_epochs = cfg.update_epochs;
    s.base_length = cfg.compensation_base == "l_min" ? cfg.l_min : cfg.l_base;
    s.compensate_epochs = cfg.epoch_compensation;
    abs.emplace(s, params, run.scheduler_rng_);
  }

  int length = cfg.mode == Mode::kPqnFixed ? cfg.l_base : cfg.l_min;
  int epochs = cfg.update_epochs;
  while (run.t_ < cfg.total_steps) {
    if (abs) {
      length = abs->length();
      epochs = abs->epochs();
    }
    const std::int64_t t0 = run.t_;
    const double eps = agents::epsilon_at(t0, cfg.total_steps, run.epsilon_schedule());
    agents::RolloutBuffer buf = agents::collect_q_rollout(params, run.env_, length, eps, run.policy_rng_);
    run.t_ += static_cast<std::int64_t>(n_envs) * length;
    buf.targets = agents::q_lambda_returns(buf, cfg.gamma, cfg.q_lambda);

    const bool gns_due = cfg.mode == Mode::kPqnGns && (run.iteration_ + 1) % cfg.adapt_every == 0;
    agents::PqnUpdateSettings settings;
    settings.minibatches = cfg.num_minibatches;
    settings.epochs = epochs;
    settings.lr = run.annealed_lr(t0);
    settings.max_grad_norm = cfg.max_grad_norm;
    settings.keep_first_epoch_grads = gns_due;
    const agents::PqnUpdateStats stats = agents::pqn_update(params, opt, buf, settings, run.shuffle_rng_);

    MetricsRow row = run.begin_row();
    row.global_step = run.t_;
    row.rollout_len = length;
    row.batch_size = n_envs * length;
    row.epochs_used = epochs;
    row.epsilon = eps;
    row.loss_mean = stats.mean_loss;
    run.add_returns(row, buf.finished_returns);

    if (abs) {
      const sched::AbsTick tick = abs->tick(params, buf.transition_obs());
      if (tick.adaptation) run.record_adaptation(row, *tick.adaptation);
    }
    if (gns_due) {
      const double batch = static_cast<double>(n_envs) * length;
      const sched::GnsEstimate est =
          sched::gns_estimate(stats.first_epoch_grads, batch / cfg.num_minibatches, batch);
      const long target = sched::gns_target_batch(est, static_cast<long>(n_envs) * cfg.l_min,
                                                  static_cast<long>(n_envs) * cfg.l_max,
                                                  static_cast<long>(batch));
      if (est.b_simple) row.gns_value = *est.b_simple;
      length = std::clamp(static_cast<int>(target / n_envs), cfg.l_min, cfg.l_max);
      run.write_gns(row, est, target, length);
    }
    run.finish_row(row);
  }
  net::save_checkpoint(fs::path(cfg.out_dir) / "checkpoint.bin", params);
}

void train_ppo(Run& run) {
  const ExperimentConfig& cfg = run.cfg_;
  const env::EnvSpec& spec = run.env_.spec();
  const int n_envs = cfg.num_envs;
  agents::PpoAgent agent =
      agents::PpoAgent::initialize(spec.obs_dim, cfg.hidden_sizes, spec.action_dim(), run.init_rng_);
  net::AdamState opt(agent.packed_size());

  std::optional<sched::ArsScheduler> ars;
  if (cfg.mode == Mode::kPpoArs) {
    sched::ArsSettings s;
    s.scale = scaler_settings(cfg, rollout_granularity(cfg));
    s.adapt_every = cfg.adapt_every;
    s.ref_batch = cfg.ref_batch;
    ars.emplace(s, agent.policy, run.scheduler_rng_);
  }

  int length = cfg.mode == Mode::kPpoFixed ? cfg.l_base : cfg.l_min;
  while (run.t_ < cfg.total_steps) {
    if (ars) length = ars->length();
    const std::int64_t t0 = run.t_;
    const agents::RolloutBuffer buf = agents::collect_gaussian_rollout(agent, run.env_, length, run.policy_rng_);
    run.t_ += static_cast<std::int64_t>(n_envs) * length;

    agents::PpoSettings settings;
    settings.clip = cfg.clip_coef;
    settings.vf_coef = cfg.vf_coef;
    settings.ent_coef = cfg.ent_coef;
    settings.clip_value_loss = cfg.clip_vloss;
    settings.normalize_advantages = cfg.norm_adv;
    settings.minibatches = cfg.num_minibatches;
    settings.epochs = cfg.update_epochs;
    settings.lr = run.annealed_lr(t0);
    settings.max_grad_norm = cfg.max_grad_norm;
    settings.gamma = cfg.gamma;
    settings.gae_lambda = cfg.gae_lambda;
    const agents::PpoStats stats = agents::ppo_update(agent, opt, buf, settings, run.shuffle_rng_);

    MetricsRow row = run.begin_row();
    row.global_step = run.t_;
    row.rollout_len = length;
    row.batch_size = n_envs * length;
    row.epochs_used = cfg.update_epochs;
    row.loss_mean = stats.policy_loss + cfg.vf_coef * stats.value_loss - cfg.ent_coef * stats.entropy;
    run.add_returns(row, buf.finished_returns);
    if (ars) {
      const sched::ArsTick tick = ars->tick(agent.policy, buf.transition_obs());
      if (tick.adaptation) run.record_adaptation(row, *tick.adaptation);
    }
    run.finish_row(row);
  }

  const fs::path dir(cfg.out_dir);
  net::save_checkpoint(dir / "checkpoint.bin", agent.policy.mean);
  net::save_checkpoint(dir / "value.bin", agent.value);
  std::ofstream log_std(dir / "log_std.txt", std::ios::binary | std::ios::trunc);
  for (Eigen::Index d = 0; d < agent.policy.log_std.size(); ++d) {
    log_std << format_double(agent.policy.log_std[d]) << '\n';
  }
  if (!log_std) throw IoError(fmt::format("cannot write '{}'", (dir / "log_std.txt").string()));
}

void train_replay(Run& run) {
  const ExperimentConfig& cfg = run.cfg_;
  const env::EnvSpec& spec = run.env_.spec();
  agents::DqnLearner learner =
      agents::DqnLearner::initialize(spec.obs_dim, cfg.hidden_sizes, spec.num_actions(), run.init_rng_);
  learner.target_update = cfg.target_update;
  agents::ReplayBuffer rb(cfg.replay_capacity, spec.obs_dim);

  std::optional<sched::ReplayBatchScheduler> scaler;
  if (cfg.mode == Mode::kDqnReplayAbs) {
    sched::ReplayBatchSettings s;
    s.scale = {cfg.b_min, cfg.b_max, cfg.delta_min, cfg.delta_max, cfg.window, cfg.ema_beta, 1};
    s.adapt_every = cfg.adapt_every;
    s.ref_batch = cfg.ref_batch;
    scaler.emplace(s, learner.online, run.scheduler_rng_);
  }

  const agents::ReplayUpdateSettings settings{cfg.gamma, cfg.lr, cfg.max_grad_norm};
  int batch = scaler ? scaler->batch() : cfg.batch_size;
  while (run.t_ < cfg.total_steps) {
    const std::int64_t t0 = run.t_;
    const double eps = agents::epsilon_at(t0, cfg.total_steps, run.epsilon_schedule());
    const std::vector<double> finished =
        agents::step_into_replay(learner.online, run.env_, eps, rb, run.policy_rng_);
    run.t_ += cfg.num_envs;
    agents::ReplayUpdateSettings step_settings = settings;
    step_settings.lr = run.annealed_lr(t0);
    const std::optional<double> loss = agents::replay_dqn_update(learner, rb, batch, step_settings, run.shuffle_rng_);

    MetricsRow row = run.begin_row();
    row.global_step = run.t_;
    row.rollout_len = 1;
    row.batch_size = batch;
    if (loss) row.epochs_used = 1;
    row.epsilon = eps;
    row.loss_mean = loss;
    run.add_returns(row, finished);
    if (scaler) {
      const sched::ReplayBatchTick tick = scaler->tick(learner.online, rb);
      if (tick.adaptation) run.record_adaptation(row, *tick.adaptation);
      batch = tick.batch;
    }
    run.finish_row(row);
  }
  net::save_checkpoint(fs::path(cfg.out_dir) / "checkpoint.bin", learner.online);
}

}  // namespace

std::string run_id(const ExperimentConfig& cfg) {
  return fmt::format("{}-{}-s{}", mode_name(cfg.mode), cfg.env, cfg.seed);
}

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  RunOutcome outcome;
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    outcome.status = kExitConfig;
    outcome.message = e.what();
    return outcome;
  }

  std::unique_ptr<Run> run;
  try {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError(fmt::format("cannot create '{}': {}", cfg.out_dir, ec.message()));
    {
      const fs::path path = fs::path(cfg.out_dir) / "config.resolved";
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out << resolved_text(cfg);
      if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    }
    run = std::make_unique<Run>(cfg);
    if (is_pqn(cfg.mode)) {
      train_pqn(*run);
    } else if (is_ppo(cfg.mode)) {
      train_ppo(*run);
    } else {
      train_replay(*run);
    }
  } catch (const TrainingDivergence& e) {
    outcome.status = kExitDivergence;
    outcome.message = e.what();
  } catch (const IoError& e) {
    outcome.status = kExitIo;
    outcome.message = e.what();
  }
  if (run) {
    outcome.iterations = run->iteration_;
    outcome.global_step = run->t_;
  }
  return outcome;
}

}  // namespace abslab
