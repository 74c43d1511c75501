#include "vecoff/heuristics.hpp"

#include <stdexcept>

namespace vecoff {

namespace {

template <class Key>
std::size_t argmin_by(const DecisionWindow& window, Key key) {
  if (window.feasible.empty()) throw std::invalid_argument("cannot select from an empty window");
  std::size_t best = 0;
  for (std::size_t i = 1; i < window.feasible.size(); ++i) {
    const auto& a = window.feasible[i];
    const auto& b = window.feasible[best];
    if (key(a) < key(b) || (key(a) == key(b) && a.id < b.id)) best = i;
  }
  return best;
}

}  // namespace

std::size_t fcfs_select(const DecisionWindow& window) {
  return argmin_by(window, [](const Task& t) { return t.arrival; });
}

std::size_t sdf_select(const DecisionWindow& window) {
  return argmin_by(window, [](const Task& t) { return t.deadline; });
}

std::size_t RandomScheduler::select(const DecisionContext& ctx) {
  if (ctx.window.feasible.empty()) throw std::invalid_argument("cannot select from an empty window");
  std::uniform_int_distribution<std::size_t> pick(0, ctx.window.feasible.size() - 1);
  return pick(rng_);
}

}  // namespace vecoff
