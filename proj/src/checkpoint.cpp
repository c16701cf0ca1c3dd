#include "frenet_racer/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "frenet_racer/errors.hpp"

namespace frenet_racer {

namespace {

// Little-endian fixed-width scalar I/O.  All doubles are IEEE-754 binary64.
template <typename T>
void write_scalar(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T read_scalar(std::istream& in) {
  static_assert(std::is_trivially_copyable_v<T>);
  char buf[sizeof(T)];
  in.read(buf, sizeof(T));
  if (!in) throw CheckpointError("checkpoint truncated");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

void write_matrix_row_major(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      write_scalar<double>(out, m(i, j));
    }
  }
}

void read_matrix_row_major(std::istream& in, Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = read_scalar<double>(in);
    }
  }
}

void write_net(std::ostream& out, const Mlp& net) {
  write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(net.sizes.size()));
  for (int s : net.sizes) write_scalar<std::uint32_t>(out, s);
  write_scalar<std::uint8_t>(out,
                             net.output == Activation::Tanh ? 1 : 0);
  for (int l = 0; l < net.layer_count(); ++l) {
    write_matrix_row_major(out, net.W[l]);
    write_matrix_row_major(out, net.b[l]);
  }
}

void read_net_into(std::istream& in, Mlp& net) {
  const auto n_sizes = read_scalar<std::uint32_t>(in);
  std::vector<int> sizes(n_sizes);
  for (auto& s : sizes) s = static_cast<int>(read_scalar<std::uint32_t>(in));
  const auto act = read_scalar<std::uint8_t>(in);
  if (sizes != net.sizes) {
    throw CheckpointError("checkpoint network shape does not match config");
  }
  if ((act == 1) != (net.output == Activation::Tanh)) {
    throw CheckpointError("checkpoint activation tag mismatch");
  }
  for (int l = 0; l < net.layer_count(); ++l) {
    read_matrix_row_major(in, net.W[l]);
    Eigen::MatrixXd b(net.b[l].size(), 1);
    read_matrix_row_major(in, b);
    net.b[l] = b.col(0);
  }
}

void write_adam(std::ostream& out, const AdamState& st) {
  write_scalar<std::uint64_t>(out, static_cast<std::uint64_t>(st.t));
  for (std::size_t l = 0; l < st.m.W.size(); ++l) {
    write_matrix_row_major(out, st.m.W[l]);
    write_matrix_row_major(out, st.m.b[l]);
    write_matrix_row_major(out, st.v.W[l]);
    write_matrix_row_major(out, st.v.b[l]);
  }
}

void read_adam_into(std::istream& in, AdamState& st) {
  st.t = static_cast<long>(read_scalar<std::uint64_t>(in));
  for (std::size_t l = 0; l < st.m.W.size(); ++l) {
    read_matrix_row_major(in, st.m.W[l]);
    Eigen::MatrixXd mb(st.m.b[l].size(), 1);
    read_matrix_row_major(in, mb);
    st.m.b[l] = mb.col(0);
    read_matrix_row_major(in, st.v.W[l]);
    Eigen::MatrixXd vb(st.v.b[l].size(), 1);
    read_matrix_row_major(in, vb);
    st.v.b[l] = vb.col(0);
  }
}

constexpr char kMagic[8] = {'F', 'R', 'C', 'K', 'P', 'T', '0', '1'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_checkpoint(const std::string& path, const Td3Agent& agent,
                     const RunConfig& config, long train_step) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint: " + path);

  out.write(kMagic, sizeof(kMagic));
  write_scalar<std::uint32_t>(out, kVersion);
  write_scalar<std::uint32_t>(out, 0);  // reserved

  const std::string cfg = config.to_json().dump();
  write_scalar<std::uint64_t>(out, cfg.size());
  out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));

  write_scalar<std::uint64_t>(out, static_cast<std::uint64_t>(train_step));
  write_scalar<std::uint32_t>(out, agent.obs_dim());
  write_scalar<std::uint32_t>(out, agent.action_dim());
  write_scalar<std::uint64_t>(out,
                              static_cast<std::uint64_t>(agent.update_count()));

  write_net(out, agent.actor());
  write_net(out, agent.critic1());
  write_net(out, agent.critic2());
  write_net(out, agent.target_actor());
  write_net(out, agent.target_critic1());
  write_net(out, agent.target_critic2());
  write_adam(out, agent.actor_opt());
  write_adam(out, agent.critic1_opt());
  write_adam(out, agent.critic2_opt());

  if (!out) throw CheckpointError("write failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError(path + ": not a checkpoint file (bad magic)");
  }
  const auto version = read_scalar<std::uint32_t>(in);
  if (version != kVersion) {
    throw CheckpointError(path + ": unsupported checkpoint version " +
                          std::to_string(version));
  }
  read_scalar<std::uint32_t>(in);  // reserved

  const auto cfg_len = read_scalar<std::uint64_t>(in);
  std::string cfg_text(cfg_len, '\0');
  in.read(cfg_text.data(), static_cast<std::streamsize>(cfg_len));
  if (!in) throw CheckpointError(path + ": truncated config block");

  LoadedCheckpoint out;
  try {
    out.config = RunConfig::from_json(nlohmann::json::parse(cfg_text));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path + ": embedded config unreadable: " + e.what());
  }

  out.train_step = static_cast<long>(read_scalar<std::uint64_t>(in));
  const auto obs_dim = static_cast<int>(read_scalar<std::uint32_t>(in));
  const auto action_dim = static_cast<int>(read_scalar<std::uint32_t>(in));
  const auto update_count = static_cast<long>(read_scalar<std::uint64_t>(in));

  out.agent = std::make_unique<Td3Agent>(obs_dim, action_dim, out.config.td3,
                                         /*init_seed=*/0);
  out.agent->set_update_count(update_count);
  read_net_into(in, out.agent->actor());
  read_net_into(in, out.agent->critic1());
  read_net_into(in, out.agent->critic2());
  read_net_into(in, out.agent->target_actor());
  read_net_into(in, out.agent->target_critic1());
  read_net_into(in, out.agent->target_critic2());
  read_adam_into(in, out.agent->actor_opt());
  read_adam_into(in, out.agent->critic1_opt());
  read_adam_into(in, out.agent->critic2_opt());

  // Must land exactly at end-of-file.
  in.peek();
  if (!in.eof()) {
    throw CheckpointError(path + ": trailing bytes after checkpoint payload");
  }
  return out;
}

}  // namespace frenet_racer
