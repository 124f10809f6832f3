#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "abslab/rng.hpp"
#include "abslab/types.hpp"

namespace abslab::env {

struct DiscreteSpace {
  int n = 2;
};

struct ContinuousSpace {
  int dim = 1;
  std::vector<double> low;
  std::vector<double> high;
};

using ActionSpace = std::variant<DiscreteSpace, ContinuousSpace>;

struct EnvSpec {
  std::string name;
  int obs_dim = 1;
  ActionSpace action_space = DiscreteSpace{};
  int max_episode_len = 1;

  bool discrete() const { return std::holds_alternative<DiscreteSpace>(action_space); }
  // Number of discrete actions; throws ContractViolation for continuous specs.
  int num_actions() const;
  // Continuous action dimension; throws ContractViolation for discrete specs.
  int action_dim() const;
};

// Throws ContractViolation when the spec breaks its invariants.
void validate(const EnvSpec& spec);

// Tunable parameters of the toy roster. Only the fields relevant to the
// chosen environment are read.
struct EnvParams {
  int chain_length = 20;
  int grid_size = 9;
  double slip_prob = 0.1;
};

struct Outcome {
  double reward = 0.0;
  bool terminated = false;
};

// A single environment instance. Randomness comes only from the stream the
// batch hands in, which is owned by this instance's slot.
class ToyEnv {
 public:
  virtual ~ToyEnv() = default;

  virtual void reset(Rng& rng) = 0;
  virtual Outcome step_discrete(int action, Rng& rng);
  virtual Outcome step_continuous(std::span<const double> action, Rng& rng);
  virtual void observe(std::span<double> out) const = 0;
};

// Deterministic chain of N states; RIGHT moves toward the rewarding end,
// LEFT moves back (floored at 0). Observed as a one-hot state vector.
class Chain final : public ToyEnv {
 public:
  static constexpr int kLeft = 0;
  static constexpr int kRight = 1;

  explicit Chain(int length) : length_(length) {}

  void reset(Rng& rng) override;
  Outcome step_discrete(int action, Rng& rng) override;
  void observe(std::span<double> out) const override;

  int state() const { return state_; }
  int length() const { return length_; }

 private:
  int length_;
  int state_ = 0;
};

// Open square room. Start in the (0, 0) corner, goal in the opposite corner.
// With probability slip_prob the agent moves in one of the two directions
// orthogonal to the chosen one.
class GridRoom final : public ToyEnv {
 public:
  static constexpr int kUp = 0;
  static constexpr int kDown = 1;
  static constexpr int kLeft = 2;
  static constexpr int kRight = 3;
  static constexpr double kGoalReward = 1.0;
  static constexpr double kStepReward = -0.01;

  GridRoom(int size, double slip_prob) : size_(size), slip_prob_(slip_prob) {}

  void reset(Rng& rng) override;
  Outcome step_discrete(int action, Rng& rng) override;
  void observe(std::span<double> out) const override;

  int x() const { return x_; }
  int y() const { return y_; }
  void place(int x, int y) { x_ = x; y_ = y; }
  bool last_move_slipped() const { return slipped_; }

 private:
  int size_;
  double slip_prob_;
  int x_ = 0;
  int y_ = 0;
  bool slipped_ = false;
};

struct CartPoleState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
};

// One explicit Euler step of the classic cart-pole equations.
CartPoleState cartpole_euler_step(const CartPoleState& s, double force);

class CartPoleLite final : public ToyEnv {
 public:
  static constexpr double kForce = 10.0;
  static constexpr double kDt = 0.02;
  static constexpr double kThetaLimit = 12.0 * 3.14159265358979323846 / 180.0;
  static constexpr double kXLimit = 2.4;

  void reset(Rng& rng) override;
  Outcome step_discrete(int action, Rng& rng) override;
  void observe(std::span<double> out) const override;

  const CartPoleState& state() const { return state_; }

 private:
  CartPoleState state_;
};

// 2-D double integrator driven toward the origin.
class PointMass final : public ToyEnv {
 public:
  static constexpr double kDt = 0.05;

  void reset(Rng& rng) override;
  Outcome step_continuous(std::span<const double> action, Rng& rng) override;
  void observe(std::span<double> out) const override;

  void place(double px, double py, double vx, double vy);

 private:
  double pos_[2] = {0.0, 0.0};
  double vel_[2] = {0.0, 0.0};
};

struct StepResult {
  Matrix obs;                  // E x obs_dim, post-reset rows where done
  Vector reward;               // E
  std::vector<std::uint8_t> done;       // terminated or truncated
  std::vector<std::uint8_t> truncated;  // time limit reached, not terminal
  Matrix final_obs;            // E x obs_dim, pre-reset observation (valid where done)
  Vector episode_return;       // E, undiscounted return of the finished episode (valid where done)
};

// E environments stepped in lockstep with auto-reset.
class EnvBatch {
 public:
  EnvBatch(EnvSpec spec, std::vector<std::unique_ptr<ToyEnv>> envs, std::uint64_t seed);

  const EnvSpec& spec() const { return spec_; }
  int size() const { return static_cast<int>(envs_.size()); }
  const Matrix& observations() const { return obs_; }
  int step_count(int i) const { return step_counts_[i]; }
  const ToyEnv& env(int i) const { return *envs_[i]; }
  ToyEnv& env(int i) { return *envs_[i]; }

  // Worker threads used to step the batch; results do not depend on it.
  void set_threads(int threads) { threads_ = threads < 1 ? 1 : threads; }

  StepResult step(std::span<const int> actions);
  StepResult step(const Matrix& actions);

  // Re-reads every env's observation into the cached matrix (after `place`).
  void refresh_observations();

 private:
  template <typename StepFn>
  StepResult step_impl(StepFn&& fn);

  EnvSpec spec_;
  std::vector<std::unique_ptr<ToyEnv>> envs_;
  std::vector<Rng> rngs_;
  std::vector<int> step_counts_;
  std::vector<double> running_return_;
  Matrix obs_;
  int threads_ = 1;
};

// Known names: chain, gridroom, cartpole_lite, pointmass. Unknown names raise
// ConfigError. Environment i draws from the stream derive_seed(seed, i).
EnvBatch make_env(std::string_view name, int num_envs, std::uint64_t seed,
                  const EnvParams& params = {});

EnvSpec spec_for(std::string_view name, const EnvParams& params = {});

}  // namespace abslab::env
