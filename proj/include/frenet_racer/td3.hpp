#pragma once

#include <optional>

#include "frenet_racer/mlp.hpp"
#include "frenet_racer/replay.hpp"
#include "frenet_racer/rng.hpp"

namespace frenet_racer {

struct Td3Config {
  double gamma = 0.99;               // discount
  double tau = 0.005;                // Polyak averaging rate
  double exploration_noise_std = 0.1;
  double target_noise_std = 0.2;     // target policy smoothing
  double target_noise_clip = 0.5;
  int policy_delay = 2;
  int batch_size = 100;
  double learning_rate = 1e-3;
  long buffer_capacity = 1000000;
  long warmup_steps = 1000;          // uniform random actions before learning
  int hidden1 = 400;
  int hidden2 = 300;

  void validate() const;
};

struct Td3Losses {
  double critic1 = 0.0;
  double critic2 = 0.0;
  std::optional<double> actor;  // present on delayed policy-update calls
};

// Actor forward pass plus clamped Gaussian exploration noise.
Eigen::VectorXd select_action(const Mlp& actor, const Eigen::VectorXd& obs,
                              double noise_std, Rng& rng);

// The six networks and optimizer states that make up a TD3 learner.
class Td3Agent {
 public:
  Td3Agent(int obs_dim, int action_dim, const Td3Config& cfg,
           std::uint64_t init_seed);

  int obs_dim() const { return obs_dim_; }
  int action_dim() const { return action_dim_; }
  const Td3Config& config() const { return cfg_; }

  // Deterministic policy action (no noise).
  Eigen::VectorXd act(const Eigen::VectorXd& obs) const;

  // One learner call; internally numbered so that every policy_delay-th call
  // also updates the actor and target networks.  Returns std::nullopt when
  // the buffer does not yet hold a full batch.
  std::optional<Td3Losses> update(const ReplayBuffer& buffer, Rng& rng);

  long update_count() const { return update_count_; }
  void set_update_count(long n) { update_count_ = n; }

  Mlp& actor() { return actor_; }
  const Mlp& actor() const { return actor_; }
  Mlp& critic1() { return critic1_; }
  Mlp& critic2() { return critic2_; }
  Mlp& target_actor() { return target_actor_; }
  Mlp& target_critic1() { return target_critic1_; }
  Mlp& target_critic2() { return target_critic2_; }
  const Mlp& critic1() const { return critic1_; }
  const Mlp& critic2() const { return critic2_; }
  const Mlp& target_actor() const { return target_actor_; }
  const Mlp& target_critic1() const { return target_critic1_; }
  const Mlp& target_critic2() const { return target_critic2_; }
  AdamState& actor_opt() { return actor_opt_; }
  AdamState& critic1_opt() { return critic1_opt_; }
  AdamState& critic2_opt() { return critic2_opt_; }
  const AdamState& actor_opt() const { return actor_opt_; }
  const AdamState& critic1_opt() const { return critic1_opt_; }
  const AdamState& critic2_opt() const { return critic2_opt_; }

  friend std::optional<Td3Losses> td3_update(Td3Agent& agent,
                                             const ReplayBuffer& buffer,
                                             Rng& rng, long call_index);

 private:
  int obs_dim_;
  int action_dim_;
  Td3Config cfg_;
  Mlp actor_, critic1_, critic2_;
  Mlp target_actor_, target_critic1_, target_critic2_;
  AdamState actor_opt_, critic1_opt_, critic2_opt_;
  long update_count_ = 0;
};

// One TD3 learner call with an explicit 1-based call index: critics update on
// every call; calls with call_index % policy_delay == 0 also update the actor
// and Polyak-average all target networks.
std::optional<Td3Losses> td3_update(Td3Agent& agent, const ReplayBuffer& buffer,
                                    Rng& rng, long call_index);

struct RewardConstants {
  double r_collision = -1.0;
  double r_dist = 1.0;    // per metre of centerline progress
  double r_time = -0.01;  // per agent step
};

double compute_reward(double progress_delta, bool collided,
                      const RewardConstants& constants);

}  // namespace frenet_racer
