#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "vecoff/channel.hpp"

using namespace vecoff;

TEST_CASE("concurrent_set collects tasks ready at the query instant") {
  std::vector<ReadyTask> ready{{1, 1e6, 5.0}, {2, 2e6, 5.0}, {3, 3e6, 5.0}, {4, 1e6, 6.0}};
  const auto s = concurrent_set(ready, 5.0);
  CHECK(s.count() == 3);
  CHECK(s.offload_time == 5.0);
  CHECK(concurrent_set(ready, 6.0).count() == 1);

  std::vector<ReadyTask> close{{1, 1e6, 2.0}, {2, 1e6, 2.0 + 0.5e-6}};
  CHECK(concurrent_set(close, 2.0).count() == 2);
  CHECK(group_concurrent(close).size() == 1);
  std::vector<ReadyTask> apart{{1, 1e6, 2.0}, {2, 1e6, 2.0 + 1e-3}};
  CHECK(group_concurrent(apart).size() == 2);
}

TEST_CASE("allocate_bandwidth splits in proportion to size") {
  ConcurrentSet s{0.0, {1, 2}, {1e6, 3e6}};
  const auto b = allocate_bandwidth(s, 20e6);
  CHECK(b[0] == doctest::Approx(5e6));
  CHECK(b[1] == doctest::Approx(15e6));

  ConcurrentSet one{0.0, {1}, {4e6}};
  CHECK(allocate_bandwidth(one, 20e6)[0] == 20e6);

  ConcurrentSet four{0.0, {1, 2, 3, 4}, {2e6, 2e6, 2e6, 2e6}};
  for (double v : allocate_bandwidth(four, 20e6)) CHECK(v == doctest::Approx(5e6));

  CHECK_THROWS(allocate_bandwidth(ConcurrentSet{}, 20e6));
}

TEST_CASE("bandwidth is conserved and scale invariant") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> size(1e4, 5e7);
  std::uniform_int_distribution<int> count(1, 12);
  for (int k = 0; k < 500; ++k) {
    ConcurrentSet s;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      s.task_ids.push_back(i);
      s.sizes.push_back(size(rng));
    }
    const auto b = allocate_bandwidth(s, 20e6);
    double sum = 0.0;
    for (double v : b) sum += v;
    CHECK(oracle::rel_close(sum, 20e6, 1e-9));
    auto scaled = s;
    for (auto& v : scaled.sizes) v *= 3.7;
    const auto b2 = allocate_bandwidth(scaled, 20e6);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(oracle::rel_close(b[i], b2[i], 1e-12));
  }
}

TEST_CASE("Shannon rate") {
  ChannelParams ch;  // p g / n0 = 1
  CHECK(rate(20e6, ch) == doctest::Approx(20e6));
  ch.tx_power = 3.0;
  CHECK(rate(20e6, ch) == doctest::Approx(40e6));
  CHECK_THROWS(rate(0.0, ch));
  CHECK_THROWS(rate(-1.0, ch));
  CHECK(rate(10e6, ch) < rate(11e6, ch));
  ChannelParams hotter = ch;
  hotter.tx_power = 4.0;
  CHECK(rate(10e6, ch) < rate(10e6, hotter));
}

TEST_CASE("comm_time") {
  CHECK(comm_time(7'372'800.0, 40e6) == doctest::Approx(0.18432));
  CHECK(comm_time(7'372'800.0, 80e6) == doctest::Approx(0.18432 / 2));
  CHECK(comm_time(0.0, 40e6) == 0.0);
}

TEST_CASE("assign_comm_times shares bandwidth among simultaneous arrivals") {
  auto mk = [](std::int64_t id, double arrival, double size) {
    Task t;
    t.id = id;
    t.arrival = arrival;
    t.size = size;
    t.proc_time = 0.1;
    t.remaining_in_range = 10.0;
    t.deadline = arrival + 10.0;
    return t;
  };
  std::vector<Task> tasks{mk(0, 1.0, 1e6), mk(1, 1.0, 3e6), mk(2, 2.0, 4e6)};
  const auto plan = assign_comm_times(tasks, ChannelParams{});
  REQUIRE(plan.sets.size() == 2);
  CHECK(*tasks[0].comm_time == doctest::Approx(1e6 / 5e6));
  CHECK(*tasks[1].comm_time == doctest::Approx(3e6 / 15e6));
  CHECK(*tasks[2].comm_time == doctest::Approx(4e6 / 20e6));
}
