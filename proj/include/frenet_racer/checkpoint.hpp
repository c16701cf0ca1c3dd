#pragma once

#include <memory>
#include <string>

#include "frenet_racer/config.hpp"
#include "frenet_racer/td3.hpp"

namespace frenet_racer {

// Versioned binary container for a TD3 learner: run config, step counter,
// all six networks, and the optimizer moments.  Byte layout documented in
// docs/checkpoint_format.md.
void save_checkpoint(const std::string& path, const Td3Agent& agent,
                     const RunConfig& config, long train_step);

struct LoadedCheckpoint {
  RunConfig config;
  long train_step = 0;
  std::unique_ptr<Td3Agent> agent;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace frenet_racer
