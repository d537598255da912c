#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "owlsim/common.hpp"
#include "owlsim/geometry.hpp"
#include "owlsim/rng.hpp"

namespace owlsim::ratesplit {

struct Grouping {
  std::vector<int> assignments;          // per-user group index
  int group_count = 0;
  std::vector<int> sizes;                // K_g
  std::vector<std::vector<int>> members; // user indices per group, ascending

  void validate(int num_users) const {
    if (group_count <= 0) throw ValidationError("grouping: no groups");
    int total = 0;
    for (int s : sizes) {
      if (s <= 0) throw ValidationError("grouping: empty group");
      total += s;
    }
    if (total != num_users)
      throw ValidationError("grouping: sizes do not cover all users");
  }
};

inline Grouping finish_grouping(std::vector<int> assignments, int G) {
  Grouping g;
  g.assignments = std::move(assignments);
  g.group_count = G;
  g.sizes.assign(G, 0);
  g.members.assign(G, {});
  for (int k = 0; k < static_cast<int>(g.assignments.size()); ++k) {
    g.sizes[g.assignments[k]]++;
    g.members[g.assignments[k]].push_back(k);
  }
  return g;
}

/// Distance-based balanced grouping of users on the floor plane.
///
/// Capacity-constrained k-means: centroids start from k-means++ seeding,
/// then each round assigns (user, group) pairs globally by ascending
/// distance under per-group capacities of floor(K/G) or ceil(K/G), which
/// pins group sizes to within one of each other. All ties break on the
/// lower user index, then the lower group index, so the result depends
/// only on the positions and the seed. G == K short-circuits to singleton
/// groups in user order.
inline Grouping group_users(const std::vector<geometry::Vec3>& positions,
                            int G, std::uint64_t seed) {
  const int K = static_cast<int>(positions.size());
  if (G <= 0) throw ValidationError("group_users: group count must be positive");
  if (G > K) throw ValidationError("group_users: more groups than users");
  if (G == K) {
    std::vector<int> ident(K);
    for (int k = 0; k < K; ++k) ident[k] = k;
    return finish_grouping(std::move(ident), G);
  }

  auto dist2 = [&](int k, double cx, double cy) {
    const double dx = positions[k].x() - cx;
    const double dy = positions[k].y() - cy;
    return dx * dx + dy * dy;
  };

  // k-means++ seeding on (x, y).
  Rng rng(seed);
  std::vector<double> cx(G), cy(G);
  {
    const int first = static_cast<int>(rng.uniform_index(K));
    cx[0] = positions[first].x();
    cy[0] = positions[first].y();
    std::vector<double> best(K);
    for (int g = 1; g < G; ++g) {
      double total = 0.0;
      for (int k = 0; k < K; ++k) {
        best[k] = dist2(k, cx[0], cy[0]);
        for (int j = 1; j < g; ++j)
          best[k] = std::min(best[k], dist2(k, cx[j], cy[j]));
        total += best[k];
      }
      int pick = K - 1;
      if (total > 0.0) {
        const double target = rng.uniform() * total;
        double acc = 0.0;
        for (int k = 0; k < K; ++k) {
          acc += best[k];
          if (acc >= target) {
            pick = k;
            break;
          }
        }
      } else {
        pick = static_cast<int>(rng.uniform_index(K));
      }
      cx[g] = positions[pick].x();
      cy[g] = positions[pick].y();
    }
  }

  // Capacities: the first K mod G groups take one extra user.
  std::vector<int> cap(G, K / G);
  for (int g = 0; g < K % G; ++g) cap[g]++;

  std::vector<int> assign(K, -1), prev;
  struct Cand {
    double d2;
    int user, group;
  };
  std::vector<Cand> cands;
  cands.reserve(static_cast<std::size_t>(K) * G);

  for (int iter = 0; iter < 100; ++iter) {
    cands.clear();
    for (int k = 0; k < K; ++k)
      for (int g = 0; g < G; ++g) cands.push_back({dist2(k, cx[g], cy[g]), k, g});
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.d2 != b.d2) return a.d2 < b.d2;
      if (a.user != b.user) return a.user < b.user;
      return a.group < b.group;
    });
    std::fill(assign.begin(), assign.end(), -1);
    std::vector<int> load(G, 0);
    int placed = 0;
    for (const auto& c : cands) {
      if (placed == K) break;
      if (assign[c.user] != -1 || load[c.group] == cap[c.group]) continue;
      assign[c.user] = c.group;
      load[c.group]++;
      placed++;
    }
    if (assign == prev) break;
    prev = assign;
    for (int g = 0; g < G; ++g) cx[g] = cy[g] = 0.0;
    std::vector<int> n(G, 0);
    for (int k = 0; k < K; ++k) {
      cx[assign[k]] += positions[k].x();
      cy[assign[k]] += positions[k].y();
      n[assign[k]]++;
    }
    for (int g = 0; g < G; ++g) {
      cx[g] /= n[g];
      cy[g] /= n[g];
    }
  }
  return finish_grouping(std::move(assign), G);
}

}  // namespace owlsim::ratesplit
