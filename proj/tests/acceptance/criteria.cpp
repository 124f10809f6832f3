#include "criteria.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "abslab/compare.hpp"
#include "abslab/config.hpp"
#include "abslab/divergence.hpp"
#include "abslab/experiment.hpp"
#include "abslab/gns.hpp"
#include "abslab/mlp.hpp"
#include "abslab/pqn.hpp"
#include "abslab/schedule.hpp"

namespace abslab::checks {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Index of the first maximal entry, scanning left to right.
int oracle_argmax(const Matrix& q, Eigen::Index row) {
  int best = 0;
  for (Eigen::Index a = 1; a < q.cols(); ++a) {
    if (q(row, a) > q(row, best)) best = static_cast<int>(a);
  }
  return best;
}

double oracle_mismatch(const Matrix& q_new, const Matrix& q_old) {
  int differ = 0;
  for (Eigen::Index r = 0; r < q_new.rows(); ++r) differ += oracle_argmax(q_new, r) != oracle_argmax(q_old, r);
  return static_cast<double>(differ) / static_cast<double>(q_new.rows());
}

// Alg. 2 evaluated coordinate by coordinate.
struct OracleGns {
  double noise;
  double signal;
};

OracleGns oracle_gns(const std::vector<Vector>& g, double b, double big_b) {
  const std::size_t m = g.size();
  const Eigen::Index d = g[0].size();
  std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
  for (const auto& gi : g) {
    for (Eigen::Index k = 0; k < d; ++k) mean[k] += gi[k] / static_cast<double>(m);
  }
  double spread = 0.0;
  for (const auto& gi : g) {
    for (Eigen::Index k = 0; k < d; ++k) spread += (gi[k] - mean[k]) * (gi[k] - mean[k]);
  }
  const double noise = b * spread / static_cast<double>(m - 1);
  double mean_sq = 0.0;
  for (double v : mean) mean_sq += v * v;
  return {noise, mean_sq - noise / big_b};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// `budget` seconds, when positive, is part of the criterion.
CriterionResult timed(int id, std::string name, const std::function<CriterionResult()>& body,
                      double budget = 0.0) {
  const auto start = Clock::now();
  CriterionResult r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = fmt::format("exception: {}", e.what());
  }
  r.id = id;
  r.name = std::move(name);
  r.seconds = seconds_since(start);
  if (budget > 0.0 && r.seconds >= budget) {
    r.passed = false;
    r.detail += fmt::format("; took {:.1f} s, budget {:.0f} s", r.seconds, budget);
  }
  return r;
}

// Trains `cfg` into `dir`; returns the metrics table or throws.
MetricsTable train(ExperimentConfig cfg, const fs::path& dir) {
  cfg.out_dir = dir.string();
  const RunOutcome out = run_experiment(cfg);
  if (out.status != kExitOk) {
    throw std::runtime_error(fmt::format("run {} failed with status {}: {}", dir.string(), out.status, out.message));
  }
  return read_metrics(dir / "metrics.csv");
}

ExperimentConfig small_config(Mode mode) {
  ExperimentConfig c = defaults_for(mode);
  c.hidden_sizes = {16, 16};
  c.window = 2;
  c.ref_batch = 64;
  switch (mode) {
    case Mode::kPqnFixed:
      c.num_envs = 8; c.num_minibatches = 2; c.l_base = 8; c.total_steps = 2000;
      break;
    case Mode::kPqnAbs:
      c.num_envs = 8; c.num_minibatches = 2; c.l_min = 4; c.l_max = 16; c.adapt_every = 1;
      c.total_steps = 3000;
      break;
    case Mode::kPqnGns:
      c.env = "cartpole_lite"; c.num_envs = 8; c.num_minibatches = 4; c.l_min = 4; c.l_max = 16;
      c.adapt_every = 2; c.total_steps = 3000;
      break;
    case Mode::kPpoFixed:
      c.num_envs = 2; c.num_minibatches = 4; c.update_epochs = 2; c.l_base = 64; c.total_steps = 1024;
      break;
    case Mode::kPpoArs:
      c.num_envs = 2; c.num_minibatches = 4; c.update_epochs = 2; c.l_min = 32; c.l_max = 128;
      c.adapt_every = 1; c.total_steps = 1500;
      break;
    case Mode::kDqnReplayFixed:
      c.num_envs = 8; c.batch_size = 32; c.replay_capacity = 2000; c.total_steps = 2000;
      break;
    case Mode::kDqnReplayAbs:
      c.num_envs = 8; c.b_min = 16; c.b_max = 64; c.replay_capacity = 2000; c.adapt_every = 5;
      c.total_steps = 3000;
      break;
  }
  return c;
}

}  // namespace

CriterionResult divergence_oracle() {
  Rng rng(20240601);
  std::uniform_int_distribution<int> rows_dist(1, 64), cols_dist(2, 8), level(0, 3);
  int mismatches = 0;
  for (int c = 0; c < 1000; ++c) {
    const int rows = rows_dist(rng), cols = cols_dist(rng);
    Matrix q_new(rows, cols), q_old(rows, cols);
    // Few distinct levels so ties are common.
    for (Eigen::Index i = 0; i < q_new.size(); ++i) {
      q_new.data()[i] = level(rng);
      q_old.data()[i] = level(rng);
    }
    if (sched::action_mismatch(q_new, q_old) != oracle_mismatch(q_new, q_old)) ++mismatches;
  }
  for (int c = 0; c < 1000; ++c) {
    Matrix ref = Matrix::Random(32, 3);
    const auto a = net::MlpParams::initialize(3, {8}, 4, rng);
    const auto b = net::MlpParams::initialize(3, {8}, 4, rng);
    const double got = sched::behavioral_divergence(a, b, ref);
    if (got != oracle_mismatch(net::forward(a, ref), net::forward(b, ref))) ++mismatches;
  }
  CriterionResult r;
  r.passed = mismatches == 0;
  r.detail = fmt::format("{} of 2000 cases (1000 tables, 1000 networks) disagree with the oracle", mismatches);
  return r;
}

CriterionResult schedule_shape() {
  struct Case {
    double lmin, lmax, dmin, dmax, mid;
  };
  const Case cases[] = {{16, 64, 0.05, 0.95, 40}, {1024, 8192, 0.01, 0.1, 4608}, {64, 1024, 0.05, 0.95, 544}};
  std::vector<std::string> failures;
  for (const auto& c : cases) {
    auto len = [&](double delta) {
      return sched::target_length(sched::interp_factor(delta, c.dmin, c.dmax), c.lmin, c.lmax);
    };
    for (double d : {c.dmax, 1.0, c.dmax * 1.5}) {
      if (len(d) != c.lmin) failures.push_back(fmt::format("[{},{}] delta {} -> {}", c.lmin, c.lmax, d, len(d)));
    }
    for (double d : {c.dmin, 0.0, c.dmin / 2}) {
      if (len(d) != c.lmax) failures.push_back(fmt::format("[{},{}] delta {} -> {}", c.lmin, c.lmax, d, len(d)));
    }
    double prev = len(c.dmin);
    for (int k = 1; k <= 1000; ++k) {
      const double d = c.dmin + (c.dmax - c.dmin) * k / 1001.0;
      const double cur = len(d);
      if (!(cur < prev)) {
        failures.push_back(fmt::format("[{},{}] not strictly decreasing at {}", c.lmin, c.lmax, d));
        break;
      }
      prev = cur;
    }
    const double geo = std::sqrt(c.dmin * c.dmax);
    const sched::ScalerSettings s{static_cast<int>(c.lmin), static_cast<int>(c.lmax), c.dmin, c.dmax, 10, 0.5, 1};
    if (std::lround(len(geo)) != std::lround(c.mid) || std::abs(len(geo) - c.mid) > 1e-9 ||
        sched::replay_batch_for(geo, s) != std::lround(c.mid)) {
      failures.push_back(fmt::format("[{},{}] geometric mean -> {}, expected {}", c.lmin, c.lmax, len(geo), c.mid));
    }
  }
  CriterionResult r;
  r.passed = failures.empty();
  r.detail = failures.empty() ? "endpoints, strict decrease and geometric-mean midpoint hold for all three ranges"
                              : fmt::format("{}", fmt::join(failures, "; "));
  return r;
}

CriterionResult epoch_compensation() {
  const int got = sched::compensated_epochs(2, 64, 32);
  const int same = sched::compensated_epochs(2, 32, 32);
  const int mid = sched::compensated_epochs(2, 48, 32);
  CriterionResult r;
  r.passed = got == 4 && same == 2 && mid == 3;
  r.detail = fmt::format("(2, 32->64) -> {}, (2, 32->32) -> {}, (2, 32->48) -> {}", got, same, mid);
  return r;
}

CriterionResult gns_formulas() {
  std::vector<std::string> failures;
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
  {
    Vector g(2);
    g << 3.0, -1.0;
    const std::vector<Vector> grads{g, g};
    const auto est = sched::gns_estimate(grads, 2.0, 4.0);
    if (!close(est.noise, 0.0) || !close(est.signal, 10.0) || !est.b_simple || !close(*est.b_simple, 0.0)) {
      failures.push_back("equal gradients");
    }
  }
  {
    Vector g1(2), g2(2);
    g1 << 1.0, 0.0;
    g2 << 0.0, 1.0;
    const std::vector<Vector> grads{g1, g2};
    const auto est = sched::gns_estimate(grads, 1.0, 2.0);
    if (!close(est.noise, 1.0) || !close(est.signal, 0.0) || !est.degenerate() ||
        sched::gns_target_batch(est, 2, 8, 5) != 5) {
      failures.push_back("degenerate S = 0");
    }
  }
  {
    Vector g1(2), g2(2);
    g1 << 2.0, 0.0;
    g2 << 1.0, 0.0;
    const std::vector<Vector> grads{g1, g2};
    const auto est = sched::gns_estimate(grads, 4.0, 8.0);
    if (!close(est.noise, 2.0) || !close(est.signal, 2.0) || !est.b_simple || !close(*est.b_simple, 1.0)) {
      failures.push_back("b = 4, B = 8");
    }
  }

  // Synthetic micro-gradients G + eps_i, eps_i ~ N(0, sigma^2 I).
  const int m = 8, d = 50;
  const double b = 16.0, sigma = 1.0;
  Rng rng(77);
  std::normal_distribution<double> normal(0.0, sigma);
  Vector big_g(d);
  for (int k = 0; k < d; ++k) big_g[k] = normal(rng);
  big_g *= 5.0 / big_g.norm();  // |G|^2 = 25
  const double expected = b * d * sigma * sigma / big_g.squaredNorm();
  std::vector<double> estimates;
  int formula_mismatch = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Vector> grads(m, big_g);
    for (auto& g : grads) {
      for (int k = 0; k < d; ++k) g[k] += normal(rng);
    }
    const auto est = sched::gns_estimate(grads, b, m * b);
    const OracleGns oracle = oracle_gns(grads, b, m * b);
    if (std::abs(est.noise - oracle.noise) > 1e-9 * oracle.noise ||
        std::abs(est.signal - oracle.signal) > 1e-9 * std::abs(oracle.signal)) {
      ++formula_mismatch;
    }
    estimates.push_back(est.b_simple ? *est.b_simple : std::numeric_limits<double>::infinity());
  }
  std::nth_element(estimates.begin(), estimates.begin() + 250, estimates.end());
  const double median = estimates[250];
  const double rel = std::abs(median - expected) / expected;
  if (formula_mismatch > 0) failures.push_back(fmt::format("{} trials differ from the oracle", formula_mismatch));
  if (rel > 0.20) failures.push_back(fmt::format("median {} vs {} ({:.1f}% off)", median, expected, 100 * rel));

  CriterionResult r;
  r.passed = failures.empty();
  r.detail = failures.empty()
                 ? fmt::format("3 fixed examples exact; median b_simple {:.3f} vs {:.3f} ({:.1f}% off)", median,
                               expected, 100 * rel)
                 : fmt::format("{}", fmt::join(failures, "; "));
  return r;
}

CriterionResult gradient_check() {
  Rng rng(5150);
  std::uniform_int_distribution<int> dim(1, 4), width(2, 6), depth(1, 2), rows(2, 6);
  double worst = 0.0;
  const double h = 1e-5;
  for (int net_id = 0; net_id < 50; ++net_id) {
    std::vector<int> hidden(static_cast<std::size_t>(depth(rng)));
    for (auto& w : hidden) w = width(rng);
    const int in = dim(rng), out = dim(rng), n = rows(rng);
    net::MlpParams params = net::MlpParams::initialize(in, hidden, out, rng);
    // Move gains and shifts off their initial values so every term matters.
    std::normal_distribution<double> jitter(0.0, 0.3);
    for (auto& v : params.values()) v += jitter(rng);
    Matrix x = Matrix::Random(n, in);
    Matrix up = Matrix::Random(n, out);
    const Vector grad = net::backward(params, x, up);
    auto objective = [&](const net::MlpParams& p) { return (net::forward(p, x).array() * up.array()).sum(); };
    for (std::size_t k = 0; k < params.size(); ++k) {
      net::MlpParams plus = params, minus = params;
      plus.values()[k] += h;
      minus.values()[k] -= h;
      const double numeric = (objective(plus) - objective(minus)) / (2 * h);
      const double rel = std::abs(numeric - grad[k]) / std::max({std::abs(numeric), std::abs(grad[k]), 1e-6});
      worst = std::max(worst, rel);
    }
  }
  CriterionResult r;
  r.passed = worst < 1e-4;
  r.detail = fmt::format("max relative error {:.3e} over 50 random networks", worst);
  return r;
}

CriterionResult variance_law() {
  Rng rng(31337);
  const int n = 4096, in = 3, actions = 4;
  const net::MlpParams params = net::MlpParams::initialize(in, {16, 16}, actions, rng);
  const Matrix obs = Matrix::Random(n, in);
  std::vector<int> acts(n);
  std::uniform_int_distribution<int> pick(0, actions - 1);
  for (auto& a : acts) a = pick(rng);
  Vector targets = Vector::Random(n);

  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  auto trace_variance = [&](int batch) {
    std::vector<Vector> grads;
    for (int s = 0; s < 1000; ++s) {
      std::vector<int> idx;
      std::sample(all.begin(), all.end(), std::back_inserter(idx), batch, rng);
      Matrix mb_obs(batch, in);
      std::vector<int> mb_act(batch);
      Vector mb_y(batch);
      for (int k = 0; k < batch; ++k) {
        mb_obs.row(k) = obs.row(idx[k]);
        mb_act[k] = acts[idx[k]];
        mb_y[k] = targets[idx[k]];
      }
      grads.push_back(agents::q_regression_loss(params, mb_obs, mb_act, mb_y).gradient);
    }
    Vector mean = Vector::Zero(grads[0].size());
    for (const auto& g : grads) mean += g;
    mean /= static_cast<double>(grads.size());
    double total = 0.0;
    for (const auto& g : grads) total += (g - mean).squaredNorm();
    return total / static_cast<double>(grads.size() - 1);
  };
  const double small = trace_variance(32);
  const double large = trace_variance(64);
  const double ratio = small / large;
  CriterionResult r;
  r.passed = ratio >= 1.6 && ratio <= 2.4;
  r.detail = fmt::format("Var(B=32) / Var(B=64) = {:.3f}", ratio);
  return r;
}

CriterionResult gaussian_kl_monte_carlo() {
  Rng rng(4242);
  std::uniform_int_distribution<int> dims(1, 3);
  std::uniform_real_distribution<double> shift(1.5, 3.0), log_std(-0.3, 0.3), sign(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    const int d = dims(rng);
    std::vector<double> mu_new(d), ls_new(d), mu_old(d), ls_old(d);
    for (int k = 0; k < d; ++k) {
      mu_old[k] = sign(rng);
      mu_new[k] = mu_old[k] + (sign(rng) < 0 ? -1.0 : 1.0) * shift(rng);
      ls_new[k] = log_std(rng);
      ls_old[k] = log_std(rng);
    }
    const double closed = sched::gaussian_kl(mu_new, ls_new, mu_old, ls_old);
    double sum = 0.0;
    const int samples = 1000000;
    for (int s = 0; s < samples; ++s) {
      double log_ratio = 0.0;
      for (int k = 0; k < d; ++k) {
        const double x = mu_new[k] + std::exp(ls_new[k]) * normal(rng);
        const double zn = (x - mu_new[k]) / std::exp(ls_new[k]);
        const double zo = (x - mu_old[k]) / std::exp(ls_old[k]);
        log_ratio += (-0.5 * zn * zn - ls_new[k]) - (-0.5 * zo * zo - ls_old[k]);
      }
      sum += log_ratio;
    }
    const double mc = sum / samples;
    worst = std::max(worst, std::abs(closed - mc) / std::abs(mc));
  }
  CriterionResult r;
  r.passed = worst < 0.01;
  r.detail = fmt::format("worst relative gap {:.3f}% over 20 pairs", 100 * worst);
  return r;
}

CriterionResult divergence_trend(const fs::path& work_dir, const fs::path& config_dir) {
  int falls = 0, grows = 0;
  std::vector<std::string> parts;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    ConfigOverrides o;
    o.seed = seed;
    const ExperimentConfig cfg = parse_config(config_dir / "gridroom_abs.cfg", o);
    const MetricsTable t = train(cfg, work_dir / fmt::format("trend-s{}", seed));
    const auto d_early = window_mean(t, "divergence_smoothed", 0.1, false);
    const auto d_late = window_mean(t, "divergence_smoothed", 0.1, true);
    const auto l_early = window_mean(t, "rollout_len", 0.1, false);
    const auto l_late = window_mean(t, "rollout_len", 0.1, true);
    if (!d_early || !d_late || !l_early || !l_late) throw std::runtime_error("missing window data");
    falls += *d_late < *d_early;
    grows += *l_late > *l_early;
    parts.push_back(fmt::format("s{}: div {:.3f}->{:.3f}, len {:.1f}->{:.1f}", seed, *d_early, *d_late, *l_early,
                                *l_late));
  }
  CriterionResult r;
  r.passed = falls >= 2 && grows >= 2;
  r.detail = fmt::format("divergence fell in {}/3, rollout grew in {}/3 ({})", falls, grows, fmt::join(parts, "; "));
  return r;
}

CriterionResult early_window(const fs::path& work_dir, const fs::path& config_dir) {
  int wins = 0;
  std::vector<std::string> parts;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    ConfigOverrides o;
    o.seed = seed;
    const MetricsTable adaptive =
        train(parse_config(config_dir / "chain_abs.cfg", o), work_dir / fmt::format("chain-abs-s{}", seed));
    const MetricsTable fixed =
        train(parse_config(config_dir / "chain_fixed64.cfg", o), work_dir / fmt::format("chain-fixed-s{}", seed));
    const double a = window_mean(adaptive, "episodic_return_mean", 0.1, false).value_or(0.0);
    const double f = window_mean(fixed, "episodic_return_mean", 0.1, false).value_or(0.0);
    wins += a >= f;
    parts.push_back(fmt::format("s{}: {:.3f} vs {:.3f}", seed, a, f));
  }
  CriterionResult r;
  r.passed = wins >= 2;
  r.detail = fmt::format("adaptive early mean >= fixed L=64 in {}/3 seeds ({})", wins, fmt::join(parts, "; "));
  return r;
}

CriterionResult determinism(const fs::path& work_dir) {
  const Mode modes[] = {Mode::kPqnFixed,  Mode::kPqnAbs,         Mode::kPqnGns,      Mode::kPpoFixed,
                        Mode::kPpoArs,    Mode::kDqnReplayFixed, Mode::kDqnReplayAbs};
  std::vector<std::string> failures;
  for (Mode mode : modes) {
    ExperimentConfig cfg = small_config(mode);
    cfg.seed = 11;
    const std::string name(mode_name(mode));
    train(cfg, work_dir / (name + "-a"));
    train(cfg, work_dir / (name + "-b"));
    cfg.threads = 3;
    train(cfg, work_dir / (name + "-threads"));
    const std::string a = read_file(work_dir / (name + "-a") / "metrics.csv");
    const std::string b = read_file(work_dir / (name + "-b") / "metrics.csv");
    const std::string c = read_file(work_dir / (name + "-threads") / "metrics.csv");
    if (a.empty() || a != b || a != c) failures.push_back(name);
  }
  CriterionResult r;
  r.passed = failures.empty();
  r.detail = failures.empty() ? "metrics.csv byte-identical across repeats and thread counts for all 7 modes"
                              : fmt::format("differs for {}", fmt::join(failures, ", "));
  return r;
}

CriterionResult replay_variant(const fs::path& work_dir, const fs::path& config_dir, bool long_run) {
  const sched::ScalerSettings s{64, 1024, 0.05, 0.95, 10, 0.5, 1};
  std::vector<std::string> failures;
  for (double d : {0.95, 1.0}) {
    if (sched::replay_batch_for(d, s) != 64) failures.push_back(fmt::format("delta {} -> {}", d, sched::replay_batch_for(d, s)));
  }
  for (double d : {0.05, 0.0}) {
    if (sched::replay_batch_for(d, s) != 1024) failures.push_back(fmt::format("delta {} -> {}", d, sched::replay_batch_for(d, s)));
  }
  // The smoothed scaler settles on the same endpoints under constant input.
  for (auto [d, want] : {std::pair{0.95, 64}, std::pair{0.05, 1024}}) {
    sched::AdaptiveScaler scaler(s);
    for (int k = 0; k < 60; ++k) scaler.observe(d);
    if (scaler.current() != want) failures.push_back(fmt::format("scaler at delta {} -> {}", d, scaler.current()));
  }
  std::string run_note = "long run skipped";
  if (long_run) {
    const ExperimentConfig cfg = parse_config(config_dir / "dqn_gridroom_abs.cfg");
    const MetricsTable t = train(cfg, work_dir / "replay-abs");
    const double final_step = *t.column("global_step").back();
    const auto& loss = t.column("loss_mean");
    const bool finite = std::all_of(loss.begin(), loss.end(), [](const auto& v) { return !v || std::isfinite(*v); });
    if (final_step < 100000 || !finite) failures.push_back("100k-step run incomplete or non-finite");
    run_note = fmt::format("100k run finished at step {}, batch {} at the end", final_step,
                           t.column("batch_size").back().value_or(0));
  }
  CriterionResult r;
  r.passed = failures.empty();
  r.detail = failures.empty() ? fmt::format("endpoints 64/1024 exact; {}", run_note)
                              : fmt::format("{}", fmt::join(failures, "; "));
  return r;
}

std::vector<CriterionResult> run_criteria(Scope scope, const fs::path& work_dir, const fs::path& config_dir) {
  fs::create_directories(work_dir);
  const bool full = scope == Scope::kFull;
  std::vector<CriterionResult> out;
  out.push_back(timed(1, "divergence oracle", divergence_oracle, 5.0));
  out.push_back(timed(2, "schedule endpoints and shape", schedule_shape));
  out.push_back(timed(3, "epoch compensation", epoch_compensation));
  out.push_back(timed(4, "gradient noise scale formulas", gns_formulas));
  out.push_back(timed(5, "backprop vs finite differences", gradient_check, 30.0));
  out.push_back(timed(6, "minibatch variance law", variance_law));
  out.push_back(timed(7, "Gaussian KL vs Monte Carlo", gaussian_kl_monte_carlo));
  if (full) {
    out.push_back(timed(8, "divergence falls, rollout grows", [&] { return divergence_trend(work_dir, config_dir); }));
    out.push_back(timed(9, "early window favors small rollouts", [&] { return early_window(work_dir, config_dir); }));
  }
  out.push_back(timed(10, "determinism", [&] { return determinism(work_dir); }));
  out.push_back(timed(11, "replay batch variant", [&] { return replay_variant(work_dir, config_dir, full); }));
  return out;
}

std::string format_result(const CriterionResult& r) {
  return fmt::format("{} {:>2} {} ({:.2f} s): {}", r.passed ? "PASS" : "FAIL", r.id, r.name, r.seconds, r.detail);
}

}  // namespace abslab::checks
