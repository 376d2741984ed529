#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "owcsim/geometry.hpp"
#include "owcsim/scenario.hpp"

// Location-assisted user grouping: candidate footprints by planar distance,
// a two-class split on the location-error bound, access-distance sorting,
// near-far pairing across the classes, and assignment of each formed group
// to its best candidate AP. All tie-breaks are lowest AP index, then lowest
// user id, so the assignment is deterministic.

namespace owcsim::grouping {

struct CandidateSet {
  std::size_t user = 0;
  std::vector<std::size_t> aps;      // sorted by ascending planar distance
  std::vector<double> distances_m;   // planar distances, same order
};

struct UserRecord {
  std::size_t id = 0;
  Vec2 position;
  double error_bound_m = 0;  // scalar location-error bound
};

struct Member {
  std::size_t user = 0;
  int cls = 0;      // 1 or 2
  int pair_id = -1; // -1 for singletons until assignment
  std::size_t order = 0;  // intra-group SIC order (ascending access distance)
  double access_distance_m = 0;
};

struct GroupAssignment {
  // groups[ap] -> list of groups, each a list of members ordered by access distance.
  std::vector<std::vector<std::vector<Member>>> groups;
  std::vector<std::size_t> user_ap;   // per user id
  std::vector<int> user_class;
  std::vector<int> user_pair;
  std::vector<std::size_t> user_order;
};

// Footprints whose projection lies within the footprint radius; the nearest
// AP is always a candidate so no position is left unserved.
inline CandidateSet candidate_aps(const Scenario& scn, Vec2 position) {
  CandidateSet set;
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t k = 0; k < scn.ap_count(); ++k)
    order.emplace_back(planar_distance(scn.aps[k].xy(), position), k);
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (std::abs(a.first - b.first) > 1e-12) return a.first < b.first;
    return a.second < b.second;
  });
  for (const auto& [d, k] : order)
    if (d <= scn.footprint_radius()) {
      set.aps.push_back(k);
      set.distances_m.push_back(d);
    }
  if (set.aps.empty()) {
    set.aps.push_back(order.front().second);
    set.distances_m.push_back(order.front().first);
  }
  return set;
}

// Median split on the error bound: class I holds the lower half (ties and
// odd remainders resolved by user id order).
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_classes(
    const std::vector<UserRecord>& users) {
  std::vector<std::size_t> idx(users.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (users[a].error_bound_m != users[b].error_bound_m)
      return users[a].error_bound_m < users[b].error_bound_m;
    return users[a].id < users[b].id;
  });
  const std::size_t half = (idx.size() + 1) / 2;
  return {std::vector<std::size_t>(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(half)),
          std::vector<std::size_t>(idx.begin() + static_cast<std::ptrdiff_t>(half), idx.end())};
}

// Near-far pairing: both classes ascend in access distance; the nearest of
// class I joins the farthest of class II and so on inward, which maximizes
// the intra-pair access-distance gap. Unpaired users stay singletons.
inline std::vector<std::pair<std::size_t, std::size_t>> pair_users(
    const std::vector<std::size_t>& class1, const std::vector<std::size_t>& class2,
    std::vector<std::size_t>& singletons) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const std::size_t n = std::min(class1.size(), class2.size());
  for (std::size_t i = 0; i < n; ++i)
    pairs.emplace_back(class1[i], class2[class2.size() - 1 - i]);
  for (std::size_t i = n; i < class1.size(); ++i) singletons.push_back(class1[i]);
  for (std::size_t i = n; i < class2.size(); ++i) singletons.push_back(class2[i]);
  return pairs;
}

namespace detail {

inline double access_distance(const Scenario& scn, Vec2 p, std::size_t ap) {
  return distance(scn.aps[ap], scn.user_point(p));
}

struct ProtoGroup {
  std::vector<std::size_t> users;  // ids
  std::vector<int> classes;
  double mean_access = 0;
};

}  // namespace detail

// Full pipeline over a user population. group_size 2 keeps the near-far
// pairs; group_size 4 merges pairs recursively by the same near-far rule.
inline GroupAssignment assign_groups(const Scenario& scn, const std::vector<UserRecord>& users,
                                     int group_size = 2) {
  if (group_size != 2 && group_size != 4)
    throw std::invalid_argument("grouping: group size must be 2 or 4");
  const std::size_t n = users.size();
  GroupAssignment out;
  out.groups.assign(scn.ap_count(), {});
  out.user_ap.assign(n, 0);
  out.user_class.assign(n, 0);
  out.user_pair.assign(n, -1);
  out.user_order.assign(n, 0);

  std::vector<CandidateSet> candidates(n);
  for (std::size_t i = 0; i < n; ++i) {
    candidates[i] = candidate_aps(scn, users[i].position);
    candidates[i].user = users[i].id;
  }

  std::vector<bool> assigned(n, false);
  int next_pair = 0;

  for (std::size_t k = 0; k < scn.ap_count(); ++k) {
    // Potential users of footprint k, first-assignment-wins over overlaps.
    std::vector<UserRecord> pool;
    std::vector<std::size_t> pool_ids;
    for (std::size_t i = 0; i < n; ++i) {
      if (assigned[i]) continue;
      const auto& c = candidates[i];
      if (std::find(c.aps.begin(), c.aps.end(), k) != c.aps.end()) {
        pool.push_back(users[i]);
        pool_ids.push_back(i);
      }
    }
    if (pool.empty()) continue;

    auto [class1, class2] = split_classes(pool);
    auto by_access = [&](std::vector<std::size_t>& cls) {
      std::stable_sort(cls.begin(), cls.end(), [&](std::size_t a, std::size_t b) {
        const double da = detail::access_distance(scn, pool[a].position, k);
        const double db = detail::access_distance(scn, pool[b].position, k);
        if (std::abs(da - db) > 1e-12) return da < db;
        return pool[a].id < pool[b].id;
      });
    };
    by_access(class1);
    by_access(class2);

    std::vector<std::size_t> singles;
    auto pairs = pair_users(class1, class2, singles);

    std::vector<detail::ProtoGroup> protos;
    auto class_of = [&](std::size_t pool_idx) {
      return std::find(class1.begin(), class1.end(), pool_idx) != class1.end() ? 1 : 2;
    };
    for (const auto& [a, b] : pairs) {
      detail::ProtoGroup g;
      g.users = {pool_ids[a], pool_ids[b]};
      g.classes = {class_of(a), class_of(b)};
      protos.push_back(std::move(g));
    }
    for (std::size_t s : singles)
      protos.push_back({{pool_ids[s]}, {class_of(s)}, 0});

    if (group_size == 4 && protos.size() > 1) {
      for (auto& g : protos) {
        double sum = 0;
        for (std::size_t u : g.users)
          sum += detail::access_distance(scn, users[u].position, k);
        g.mean_access = sum / static_cast<double>(g.users.size());
      }
      std::stable_sort(protos.begin(), protos.end(),
                       [](const auto& a, const auto& b) { return a.mean_access < b.mean_access; });
      std::vector<detail::ProtoGroup> merged;
      std::size_t lo = 0, hi = protos.size();
      while (hi - lo >= 2) {
        detail::ProtoGroup g = protos[lo++];
        const detail::ProtoGroup& far = protos[--hi];
        g.users.insert(g.users.end(), far.users.begin(), far.users.end());
        g.classes.insert(g.classes.end(), far.classes.begin(), far.classes.end());
        merged.push_back(std::move(g));
      }
      if (hi > lo) merged.push_back(protos[lo]);
      protos = std::move(merged);
    }

    for (auto& g : protos) {
      const int pair_id = next_pair++;
      // Order members by access distance to the serving AP.
      std::vector<std::size_t> order(g.users.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double da = detail::access_distance(scn, users[g.users[a]].position, k);
        const double db = detail::access_distance(scn, users[g.users[b]].position, k);
        if (std::abs(da - db) > 1e-12) return da < db;
        return users[g.users[a]].id < users[g.users[b]].id;
      });
      std::vector<Member> members;
      for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const std::size_t u = g.users[order[rank]];
        Member m;
        m.user = u;
        m.cls = g.classes[order[rank]];
        m.pair_id = pair_id;
        m.order = rank;
        m.access_distance_m = detail::access_distance(scn, users[u].position, k);
        members.push_back(m);
        assigned[u] = true;
        out.user_ap[u] = k;
        out.user_class[u] = m.cls;
        out.user_pair[u] = pair_id;
        out.user_order[u] = rank;
      }
      out.groups[k].push_back(std::move(members));
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    if (!assigned[i]) throw std::logic_error("grouping: user left unassigned");
  return out;
}

}  // namespace owcsim::grouping
