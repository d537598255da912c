#include <catch2/catch_amalgamated.hpp>
#include <algorithm>

#include "owlsim/common.hpp"
#include "owlsim/grouping.hpp"
#include "owlsim/scenario.hpp"

using namespace owlsim;
using namespace owlsim::ratesplit;
using geometry::Vec3;

TEST_CASE("well-separated pairs group together") {
  const std::vector<Vec3> pos = {Vec3(0.1, 0.1, 0.85), Vec3(0.2, 0.1, 0.85),
                                 Vec3(4.8, 4.9, 0.85), Vec3(4.9, 4.8, 0.85)};
  const auto g = group_users(pos, 2, 7);
  g.validate(4);
  CHECK(g.assignments[0] == g.assignments[1]);
  CHECK(g.assignments[2] == g.assignments[3]);
  CHECK(g.assignments[0] != g.assignments[2]);
  CHECK(g.sizes == std::vector<int>{2, 2});
}

TEST_CASE("group sizes stay balanced for the reference splits") {
  scenario::PlacementModel uniform;
  uniform.variant = scenario::PlacementKind::UniformFloor;
  geometry::Room room;
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    const auto pos = scenario::place_users(room, 20, uniform, seed);

    const auto g5 = group_users(pos, 5, seed);
    g5.validate(20);
    for (int s : g5.sizes) CHECK(s == 4);

    const auto g10 = group_users(pos, 10, seed);
    g10.validate(20);
    for (int s : g10.sizes) CHECK(s == 2);
  }
}

TEST_CASE("uneven division balances within one user") {
  scenario::PlacementModel uniform;
  uniform.variant = scenario::PlacementKind::UniformFloor;
  geometry::Room room;
  const auto pos = scenario::place_users(room, 11, uniform, 42);
  const auto g = group_users(pos, 3, 42);
  g.validate(11);
  const auto [lo, hi] = std::minmax_element(g.sizes.begin(), g.sizes.end());
  CHECK(*hi - *lo <= 1);
  CHECK(*hi == 4);
}

TEST_CASE("G equal to K yields identity singletons") {
  const std::vector<Vec3> pos = {Vec3(1, 1, 0.85), Vec3(2, 2, 0.85),
                                 Vec3(3, 3, 0.85)};
  const auto g = group_users(pos, 3, 99);
  CHECK(g.assignments == std::vector<int>{0, 1, 2});
  for (int s : g.sizes) CHECK(s == 1);
  CHECK(g.members[1] == std::vector<int>{1});
}

TEST_CASE("more groups than users is rejected") {
  const std::vector<Vec3> pos = {Vec3(1, 1, 0.85)};
  CHECK_THROWS_AS(group_users(pos, 2, 1), ValidationError);
  CHECK_THROWS_AS(group_users(pos, 0, 1), ValidationError);
}

TEST_CASE("grouping is deterministic in positions and seed") {
  scenario::PlacementModel clustered;  // default clustered placement
  geometry::Room room;
  const auto pos = scenario::place_users(room, 12, clustered, 5);
  const auto a = group_users(pos, 4, 123);
  const auto b = group_users(pos, 4, 123);
  CHECK(a.assignments == b.assignments);
}

TEST_CASE("members lists are consistent with assignments") {
  scenario::PlacementModel uniform;
  uniform.variant = scenario::PlacementKind::UniformFloor;
  geometry::Room room;
  const auto pos = scenario::place_users(room, 9, uniform, 8);
  const auto g = group_users(pos, 3, 8);
  for (int grp = 0; grp < g.group_count; ++grp)
    for (int k : g.members[grp]) CHECK(g.assignments[k] == grp);
  int total = 0;
  for (const auto& m : g.members) total += static_cast<int>(m.size());
  CHECK(total == 9);
}
