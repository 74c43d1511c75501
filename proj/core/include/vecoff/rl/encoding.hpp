#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "vecoff/engine.hpp"

namespace vecoff::rl {

/// Shape and scaling a trained network expects from the simulator.
struct EncoderContract {
  std::size_t num_mecs = 2;
  std::size_t window_cap = 16;  // W_max slots
  double time_scale = 20.0;     // seconds mapped to 1.0 for time features
  double proc_scale = 1.0;      // seconds mapped to 1.0 for processing time
  bool operator==(const EncoderContract&) const = default;
};

inline constexpr std::size_t kSlotFeatures = 4;  // arrival offset, remaining range, proc time, valid

[[nodiscard]] std::size_t state_size(const EncoderContract& contract);

struct StateVector {
  std::vector<double> values;
};

struct ActionMask {
  std::vector<bool> valid;
  [[nodiscard]] std::size_t count() const;
};

struct EncodedState {
  StateVector state;
  ActionMask mask;
  std::size_t visible = 0;  // min(W_y, W_max); the rest wait for a later window
};

/// Layout: M server features (availability - now), then W_max slots of
/// (arrival - now, deadline - now, proc_time, 1) filled in window order.
EncodedState encode_state(std::span<const MecState> mecs, const DecisionWindow& window, double now,
                          const EncoderContract& contract);

void to_json(nlohmann::json& j, const EncoderContract& c);
void from_json(const nlohmann::json& j, EncoderContract& c);

}  // namespace vecoff::rl
