#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "vecoff/engine.hpp"

namespace vecoff {

/// Earliest arrival; ties to the lowest task id.
std::size_t fcfs_select(const DecisionWindow& window);

/// Earliest deadline; ties to the lowest task id.
std::size_t sdf_select(const DecisionWindow& window);

class FcfsScheduler final : public Scheduler {
 public:
  [[nodiscard]] std::string name() const override { return "fcfs"; }
  std::size_t select(const DecisionContext& ctx) override { return fcfs_select(ctx.window); }
};

class SdfScheduler final : public Scheduler {
 public:
  [[nodiscard]] std::string name() const override { return "sdf"; }
  std::size_t select(const DecisionContext& ctx) override { return sdf_select(ctx.window); }
};

/// Uniformly random pick; used for fuzzing and as an exploration baseline.
class RandomScheduler final : public Scheduler {
 public:
  explicit RandomScheduler(std::uint64_t seed) : rng_(seed) {}
  [[nodiscard]] std::string name() const override { return "random"; }
  std::size_t select(const DecisionContext& ctx) override;

 private:
  std::mt19937_64 rng_;
};

}  // namespace vecoff
