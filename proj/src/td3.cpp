#include "frenet_racer/td3.hpp"

#include <cmath>

#include "frenet_racer/errors.hpp"
#include "frenet_racer/geometry.hpp"

namespace frenet_racer {

void Td3Config::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ValidationError("gamma must be in (0, 1)");
  }
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw ValidationError("tau must be in (0, 1]");
  }
  if (policy_delay < 1) throw ValidationError("policy_delay must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) {
    throw ValidationError("learning_rate must be > 0");
  }
  if (buffer_capacity < batch_size) {
    throw ValidationError("buffer_capacity must be >= batch_size");
  }
  if (warmup_steps < 0) throw ValidationError("warmup_steps must be >= 0");
  if (hidden1 < 1 || hidden2 < 1) {
    throw ValidationError("hidden layer sizes must be >= 1");
  }
  if (exploration_noise_std < 0.0 || target_noise_std < 0.0 ||
      target_noise_clip < 0.0) {
    throw ValidationError("noise parameters must be >= 0");
  }
}

Eigen::VectorXd select_action(const Mlp& actor, const Eigen::VectorXd& obs,
                              double noise_std, Rng& rng) {
  Eigen::VectorXd a = actor.forward(obs);
  if (noise_std > 0.0) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a(i) += noise_std * rng.normal();
    }
  }
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = clamp(a(i), -1.0, 1.0);
  return a;
}

Td3Agent::Td3Agent(int obs_dim, int action_dim, const Td3Config& cfg,
                   std::uint64_t init_seed)
    : obs_dim_(obs_dim), action_dim_(action_dim), cfg_(cfg) {
  cfg_.validate();
  if (obs_dim < 1 || action_dim < 1) {
    throw ValidationError("observation and action dimensions must be >= 1");
  }
  const std::vector<int> actor_sizes{obs_dim, cfg.hidden1, cfg.hidden2,
                                     action_dim};
  const std::vector<int> critic_sizes{obs_dim + action_dim, cfg.hidden1,
                                      cfg.hidden2, 1};
  Rng rng(init_seed);
  actor_ = Mlp::create(actor_sizes, Activation::Tanh, rng, 0.01);
  critic1_ = Mlp::create(critic_sizes, Activation::Linear, rng);
  critic2_ = Mlp::create(critic_sizes, Activation::Linear, rng);
  target_actor_ = actor_;
  target_critic1_ = critic1_;
  target_critic2_ = critic2_;
  actor_opt_ = AdamState::zeros_like(actor_);
  critic1_opt_ = AdamState::zeros_like(critic1_);
  critic2_opt_ = AdamState::zeros_like(critic2_);
}

Eigen::VectorXd Td3Agent::act(const Eigen::VectorXd& obs) const {
  return actor_.forward(obs);
}

std::optional<Td3Losses> Td3Agent::update(const ReplayBuffer& buffer,
                                          Rng& rng) {
  const auto out = td3_update(*this, buffer, rng, update_count_ + 1);
  if (out.has_value()) ++update_count_;
  return out;
}

namespace {

void polyak(const Mlp& main, Mlp& target, double tau) {
  for (std::size_t l = 0; l < main.W.size(); ++l) {
    target.W[l] = tau * main.W[l] + (1.0 - tau) * target.W[l];
    target.b[l] = tau * main.b[l] + (1.0 - tau) * target.b[l];
  }
}

}  // namespace

std::optional<Td3Losses> td3_update(Td3Agent& agent, const ReplayBuffer& buffer,
                                    Rng& rng, long call_index) {
  const Td3Config& cfg = agent.cfg_;
  const int b = cfg.batch_size;
  if (buffer.size() < static_cast<std::size_t>(b)) return std::nullopt;

  const int od = agent.obs_dim_;
  const int ad = agent.action_dim_;

  // Sample the batch, then draw target smoothing noise; two rng stages in a
  // fixed order keep the call reproducible.
  Eigen::MatrixXd obs(od, b), next_obs(od, b), actions(ad, b);
  Eigen::VectorXd rewards(b), not_done(b);
  for (int j = 0; j < b; ++j) {
    const Transition& t = buffer[rng.uniform_index(buffer.size())];
    obs.col(j) = t.obs;
    next_obs.col(j) = t.next_obs;
    actions.col(j) = t.action;
    rewards(j) = t.reward;
    not_done(j) = t.done ? 0.0 : 1.0;
  }
  Eigen::MatrixXd noise(ad, b);
  for (int j = 0; j < b; ++j) {
    for (int i = 0; i < ad; ++i) {
      noise(i, j) = clamp(cfg.target_noise_std * rng.normal(),
                          -cfg.target_noise_clip, cfg.target_noise_clip);
    }
  }

  // TD target from the smoothed target policy and the pessimistic critic.
  Eigen::MatrixXd target_actions =
      (agent.target_actor_.forward_batch(next_obs) + noise)
          .cwiseMax(-1.0)
          .cwiseMin(1.0);
  Eigen::MatrixXd next_in(od + ad, b);
  next_in.topRows(od) = next_obs;
  next_in.bottomRows(ad) = target_actions;
  const Eigen::MatrixXd q1p = agent.target_critic1_.forward_batch(next_in);
  const Eigen::MatrixXd q2p = agent.target_critic2_.forward_batch(next_in);
  Eigen::VectorXd y(b);
  for (int j = 0; j < b; ++j) {
    y(j) = rewards(j) +
           cfg.gamma * not_done(j) * std::min(q1p(0, j), q2p(0, j));
  }

  Eigen::MatrixXd critic_in(od + ad, b);
  critic_in.topRows(od) = obs;
  critic_in.bottomRows(ad) = actions;

  Td3Losses losses;
  const auto critic_step = [&](Mlp& critic, AdamState& opt) {
    MlpCache cache;
    const Eigen::MatrixXd q = forward_cached(critic, critic_in, cache);
    const Eigen::MatrixXd diff = q.row(0).transpose() - y;
    const double loss = diff.squaredNorm() / b;
    MlpGrads grads = MlpGrads::zeros_like(critic);
    const Eigen::MatrixXd upstream = (2.0 / b) * diff.transpose();
    mlp_backward(critic, cache, upstream, grads);
    adam_step(critic, opt, grads, cfg.learning_rate);
    return loss;
  };
  losses.critic1 = critic_step(agent.critic1_, agent.critic1_opt_);
  losses.critic2 = critic_step(agent.critic2_, agent.critic2_opt_);

  if (call_index % cfg.policy_delay == 0) {
    // Deterministic policy gradient through critic1.
    MlpCache actor_cache;
    const Eigen::MatrixXd policy_actions =
        forward_cached(agent.actor_, obs, actor_cache);
    Eigen::MatrixXd policy_in(od + ad, b);
    policy_in.topRows(od) = obs;
    policy_in.bottomRows(ad) = policy_actions;
    MlpCache critic_cache;
    const Eigen::MatrixXd q = forward_cached(agent.critic1_, policy_in,
                                             critic_cache);
    losses.actor = -q.mean();

    MlpGrads scratch = MlpGrads::zeros_like(agent.critic1_);
    const Eigen::MatrixXd upstream =
        Eigen::MatrixXd::Constant(1, b, -1.0 / b);
    const Eigen::MatrixXd input_grad =
        mlp_backward(agent.critic1_, critic_cache, upstream, scratch);
    MlpGrads actor_grads = MlpGrads::zeros_like(agent.actor_);
    mlp_backward(agent.actor_, actor_cache, input_grad.bottomRows(ad),
                 actor_grads);
    adam_step(agent.actor_, agent.actor_opt_, actor_grads, cfg.learning_rate);

    polyak(agent.actor_, agent.target_actor_, cfg.tau);
    polyak(agent.critic1_, agent.target_critic1_, cfg.tau);
    polyak(agent.critic2_, agent.target_critic2_, cfg.tau);
  }
  return losses;
}

double compute_reward(double progress_delta, bool collided,
                      const RewardConstants& c) {
  if (collided) return c.r_collision;
  return c.r_dist * progress_delta + c.r_time;
}

}  // namespace frenet_racer
