#include "vecoff/rl/encoding.hpp"

#include <algorithm>
#include <stdexcept>

namespace vecoff::rl {

std::size_t state_size(const EncoderContract& contract) {
  return contract.num_mecs + kSlotFeatures * contract.window_cap;
}

std::size_t ActionMask::count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), true));
}

EncodedState encode_state(std::span<const MecState> mecs, const DecisionWindow& window, double now,
                          const EncoderContract& contract) {
  if (window.feasible.empty()) throw std::invalid_argument("cannot encode an empty window");
  if (mecs.size() != contract.num_mecs) {
    throw std::invalid_argument("encoder expects " + std::to_string(contract.num_mecs) +
                                " servers, got " + std::to_string(mecs.size()));
  }
  EncodedState out;
  out.state.values.assign(state_size(contract), 0.0);
  out.mask.valid.assign(contract.window_cap, false);
  auto& v = out.state.values;
  for (std::size_t j = 0; j < mecs.size(); ++j) {
    v[j] = (mecs[j].available_at - now) / contract.time_scale;
  }
  out.visible = std::min(window.feasible.size(), contract.window_cap);
  for (std::size_t l = 0; l < out.visible; ++l) {
    const auto& t = window.feasible[l];
    const std::size_t base = contract.num_mecs + kSlotFeatures * l;
    v[base + 0] = (t.arrival - now) / contract.time_scale;
    v[base + 1] = (t.deadline - now) / contract.time_scale;
    v[base + 2] = t.proc_time / contract.proc_scale;
    v[base + 3] = 1.0;
    out.mask.valid[l] = true;
  }
  return out;
}

void to_json(nlohmann::json& j, const EncoderContract& c) {
  j = nlohmann::json{{"num_mecs", c.num_mecs},
                     {"window_cap", c.window_cap},
                     {"time_scale", c.time_scale},
                     {"proc_scale", c.proc_scale}};
}

void from_json(const nlohmann::json& j, EncoderContract& c) {
  c.num_mecs = j.at("num_mecs").get<std::size_t>();
  c.window_cap = j.at("window_cap").get<std::size_t>();
  c.time_scale = j.at("time_scale").get<double>();
  c.proc_scale = j.at("proc_scale").get<double>();
}

}  // namespace vecoff::rl
