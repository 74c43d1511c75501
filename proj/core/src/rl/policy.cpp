#include "vecoff/rl/policy.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace vecoff::rl {

namespace {

std::size_t masked_argmax(const Eigen::VectorXd& values, const std::vector<bool>& mask) {
  std::size_t best = mask.size();
  for (std::size_t a = 0; a < mask.size(); ++a) {
    if (!mask[a]) continue;
    if (best == mask.size() || values(static_cast<Eigen::Index>(a)) > values(static_cast<Eigen::Index>(best))) {
      best = a;
    }
  }
  if (best == mask.size()) throw std::invalid_argument("action mask has no valid entry");
  return best;
}

}  // namespace

const char* to_string(Algorithm algo) { return algo == Algorithm::Dqn ? "dqn" : "ppo"; }

Algorithm algorithm_from_string(const std::string& text) {
  if (text == "dqn") return Algorithm::Dqn;
  if (text == "ppo") return Algorithm::Ppo;
  throw std::invalid_argument("unknown RL algorithm '" + text + "'");
}

Decision select(const Policy& policy, std::span<const double> state, const std::vector<bool>& mask) {
  if (state.size() != state_size(policy.contract) || mask.size() != policy.contract.window_cap) {
    throw ContractError("observation does not match the policy's encoder contract");
  }
  const Eigen::Map<const Eigen::VectorXd> x(state.data(), static_cast<Eigen::Index>(state.size()));
  Decision d;
  if (policy.algorithm == Algorithm::Dqn) {
    const Eigen::VectorXd q = policy.q_network.forward(x);
    d.action = masked_argmax(q, mask);
    d.estimate = q(static_cast<Eigen::Index>(d.action));
    d.scores.assign(q.data(), q.data() + q.size());
    for (std::size_t a = 0; a < mask.size(); ++a) {
      if (!mask[a]) d.scores[a] = -std::numeric_limits<double>::infinity();
    }
    return d;
  }
  const Eigen::VectorXd logits = policy.actor.forward(x);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < mask.size(); ++a) {
    if (mask[a]) peak = std::max(peak, logits(static_cast<Eigen::Index>(a)));
  }
  d.scores.assign(mask.size(), 0.0);
  double total = 0.0;
  for (std::size_t a = 0; a < mask.size(); ++a) {
    if (!mask[a]) continue;
    d.scores[a] = std::exp(logits(static_cast<Eigen::Index>(a)) - peak);
    total += d.scores[a];
  }
  for (auto& p : d.scores) p /= total;
  const Eigen::Map<const Eigen::VectorXd> probs(d.scores.data(), static_cast<Eigen::Index>(d.scores.size()));
  d.action = masked_argmax(probs, mask);
  d.estimate = policy.critic.forward(x)(0);
  return d;
}

void check_contract(const Policy& policy, const SimConfig& cfg) {
  if (policy.contract.num_mecs != cfg.num_mecs) {
    throw ContractError("policy was trained for " + std::to_string(policy.contract.num_mecs) +
                        " MEC servers but the simulation has " + std::to_string(cfg.num_mecs));
  }
  if (policy.contract.window_cap != cfg.window_cap) {
    throw ContractError("policy expects window_cap " + std::to_string(policy.contract.window_cap) +
                        " but the simulation uses " + std::to_string(cfg.window_cap));
  }
}

nlohmann::json policy_to_json(const Policy& policy) {
  nlohmann::json networks = nlohmann::json::object();
  if (policy.algorithm == Algorithm::Dqn) {
    networks["q"] = policy.q_network;
  } else {
    networks["actor"] = policy.actor;
    networks["critic"] = policy.critic;
  }
  return nlohmann::json{{"format_version", kPolicyFormatVersion},
                        {"algorithm", to_string(policy.algorithm)},
                        {"M", policy.contract.num_mecs},
                        {"W_max", policy.contract.window_cap},
                        {"normalization",
                         {{"time_scale", policy.contract.time_scale},
                          {"proc_scale", policy.contract.proc_scale}}},
                        {"networks", networks},
                        {"training", {{"episodes", policy.training.episodes}, {"seed", policy.training.seed}}}};
}

Policy policy_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kPolicyFormatVersion) {
      throw PolicyFormatError("unsupported policy format_version " + std::to_string(version) +
                              " (expected " + std::to_string(kPolicyFormatVersion) + ")");
    }
    Policy p;
    p.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
    p.contract.num_mecs = j.at("M").get<std::size_t>();
    p.contract.window_cap = j.at("W_max").get<std::size_t>();
    p.contract.time_scale = j.at("normalization").at("time_scale").get<double>();
    p.contract.proc_scale = j.at("normalization").at("proc_scale").get<double>();
    const auto& nets = j.at("networks");
    const auto in = state_size(p.contract);
    auto check = [&](const Mlp& net, std::size_t out, const char* what) {
      if (net.input_size() != in || net.output_size() != out) {
        throw PolicyFormatError(std::string(what) + " network shape does not match the contract");
      }
    };
    if (p.algorithm == Algorithm::Dqn) {
      p.q_network = nets.at("q").get<Mlp>();
      check(p.q_network, p.contract.window_cap, "q");
    } else {
      p.actor = nets.at("actor").get<Mlp>();
      p.critic = nets.at("critic").get<Mlp>();
      check(p.actor, p.contract.window_cap, "actor");
      check(p.critic, 1, "critic");
    }
    p.training.episodes = j.at("training").at("episodes").get<std::size_t>();
    p.training.seed = j.at("training").at("seed").get<std::uint64_t>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw PolicyFormatError(std::string("corrupt policy file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw PolicyFormatError(std::string("corrupt policy file: ") + e.what());
  }
}

void save_policy(const Policy& policy, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << policy_to_json(policy).dump() << '\n';
}

Policy load_policy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PolicyFormatError("cannot open policy file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw PolicyFormatError("corrupt policy file " + path.string() + ": " + e.what());
  }
  return policy_from_json(j);
}

PolicyScheduler::PolicyScheduler(Policy policy, const SimConfig& cfg) : policy_(std::move(policy)) {
  check_contract(policy_, cfg);
}

std::size_t PolicyScheduler::select(const DecisionContext& ctx) {
  const auto enc = encode_state(ctx.mecs, ctx.window, ctx.now, policy_.contract);
  return rl::select(policy_, enc.state.values, enc.mask.valid).action;
}

}  // namespace vecoff::rl
