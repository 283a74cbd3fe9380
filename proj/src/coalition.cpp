#include "d2dlab/coalition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace d2dlab {

const UserChannel& CoalitionContext::user_by_id(int id) const {
  for (const UserChannel& u : users)
    if (u.id == id) return u;
  throw std::invalid_argument("coalition: unknown user id " + std::to_string(id));
}

const std::array<double, 2>& CoalitionContext::position_by_id(int id) const {
  for (std::size_t i = 0; i < users.size(); ++i)
    if (users[i].id == id) return positions.at(i);
  throw std::invalid_argument("coalition: unknown user id " + std::to_string(id));
}

namespace {

double member_metric(const CoalitionContext& ctx, const UserPowerBreakdown& m) {
  return ctx.metric == CoalitionContext::Metric::Efficiency ? m.bits_per_joule : m.throughput;
}

}  // namespace

double coalition_value(const CoalitionContext& ctx, const std::vector<int>& members) {
  if (members.empty()) return 0.0;
  const std::size_t n_total = ctx.users.size();

  if (!ctx.positions.empty()) {
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const auto& pa = ctx.position_by_id(members[a]);
        const auto& pb = ctx.position_by_id(members[b]);
        if (std::hypot(pa[0] - pb[0], pa[1] - pb[1]) > ctx.max_diameter) return 0.0;
      }
  }

  // Reference: each member alone under proportional-fair scheduling.
  std::vector<double> baseline;
  baseline.reserve(members.size());
  for (int id : members)
    baseline.push_back(
        member_metric(ctx, pf_baseline(ctx.table, ctx.user_by_id(id), n_total, ctx.budget, ctx.power)));

  if (members.size() == 1) return baseline[0];

  Cluster c;
  for (int id : members) c.push_back(ctx.user_by_id(id));

  ClusterPowerReport rep;
  if (ctx.scheduler == CoalitionContext::Scheduler::WeightedRoundRobin) {
    const double weight = static_cast<double>(members.size()) / n_total;
    rep = clwrr_power_report(ctx.table, c, weight, ctx.budget, ctx.power);
  } else {
    // the coalition competes against everyone else for each frame
    ClusterPartition p;
    p.clusters.push_back(c);
    Cluster rest;
    for (const UserChannel& u : ctx.users)
      if (std::find(members.begin(), members.end(), u.id) == members.end()) rest.push_back(u);
    if (!rest.empty()) p.clusters.push_back(rest);
    rep = clmr_power_report(ctx.table, p, 0, ctx.budget, ctx.power);
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < rep.members.size(); ++i) {
    const double v = member_metric(ctx, rep.members[i]);
    if (v < baseline[i]) return 0.0;  // someone is better off alone
    sum += v;
  }
  return sum;
}

namespace {

struct ValueCache {
  const ValueFn& fn;
  std::map<std::vector<int>, double> memo;

  double operator()(const std::vector<int>& s) {
    auto it = memo.find(s);
    if (it != memo.end()) return it->second;
    const double v = fn(s);
    memo.emplace(s, v);
    return v;
  }
};

std::vector<int> merged(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

void sort_partition(std::vector<std::vector<int>>& parts) {
  for (auto& p : parts) std::sort(p.begin(), p.end());
  std::sort(parts.begin(), parts.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

double partition_value(ValueCache& value, const std::vector<std::vector<int>>& parts) {
  double sum = 0.0;
  for (const auto& p : parts) sum += value(p);
  return sum;
}

}  // namespace

MergeSplitResult merge_split(const std::vector<int>& users, const ValueFn& value_fn,
                             std::vector<std::vector<int>> initial) {
  ValueCache value{value_fn, {}};

  std::vector<std::vector<int>> parts;
  if (initial.empty()) {
    for (int id : users) parts.push_back({id});
  } else {
    parts = std::move(initial);
    std::size_t covered = 0;
    for (const auto& p : parts) covered += p.size();
    if (covered != users.size())
      throw std::invalid_argument("merge_split: initial partition does not cover the users");
  }
  sort_partition(parts);

  MergeSplitResult result;
  bool changed = true;
  while (changed) {
    changed = false;

    // merge pass: first strictly improving pair in (id, id) order
    for (std::size_t a = 0; a < parts.size() && !changed; ++a) {
      for (std::size_t b = a + 1; b < parts.size() && !changed; ++b) {
        const std::vector<int> u = merged(parts[a], parts[b]);
        if (value(u) > value(parts[a]) + value(parts[b])) {
          parts[a] = u;
          parts.erase(parts.begin() + b);
          sort_partition(parts);
          result.history.push_back({"merge", partition_value(value, parts)});
          changed = true;
        }
      }
    }
    if (changed) continue;

    // split pass: first bipartition worth at least the whole coalition
    for (std::size_t a = 0; a < parts.size() && !changed; ++a) {
      const std::vector<int>& s = parts[a];
      if (s.size() < 2) continue;
      const std::size_t m = s.size();
      // subsets that contain s[0], proper; each bipartition visited once
      for (std::size_t mask = 1; mask < (std::size_t{1} << (m - 1)) && !changed; ++mask) {
        std::vector<int> left{s[0]}, right;
        for (std::size_t j = 1; j < m; ++j)
          ((mask >> (j - 1)) & 1 ? right : left).push_back(s[j]);
        if (right.empty()) continue;
        if (value(left) + value(right) >= value(s)) {
          parts[a] = left;
          parts.push_back(right);
          sort_partition(parts);
          result.history.push_back({"split", partition_value(value, parts)});
          changed = true;
        }
      }
    }
  }

  result.partition = parts;
  result.total_value = partition_value(value, parts);
  return result;
}

std::vector<double> payoff_equal_share(const std::vector<int>& members, const ValueFn& value) {
  const double total = value(members);
  double solo_sum = 0.0;
  std::vector<double> solo;
  for (int id : members) {
    solo.push_back(value({id}));
    solo_sum += solo.back();
  }
  const double surplus = (total - solo_sum) / static_cast<double>(members.size());
  std::vector<double> pay(members.size());
  for (std::size_t i = 0; i < pay.size(); ++i) pay[i] = solo[i] + surplus;
  return pay;
}

std::vector<double> payoff_weighted_share(const std::vector<int>& members, const ValueFn& value,
                                          const std::vector<double>& weights) {
  if (weights.size() != members.size())
    throw std::invalid_argument("payoff_weighted_share: weight count mismatch");
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (wsum <= 0.0) throw std::invalid_argument("payoff_weighted_share: weights must sum > 0");
  const double total = value(members);
  double solo_sum = 0.0;
  std::vector<double> solo;
  for (int id : members) {
    solo.push_back(value({id}));
    solo_sum += solo.back();
  }
  std::vector<double> pay(members.size());
  for (std::size_t i = 0; i < pay.size(); ++i)
    pay[i] = solo[i] + weights[i] / wsum * (total - solo_sum);
  return pay;
}

std::vector<double> payoff_shapley(const std::vector<int>& members, const ValueFn& value,
                                   std::size_t cap) {
  const std::size_t n = members.size();
  if (n > cap)
    throw std::invalid_argument("payoff_shapley: coalition of " + std::to_string(n) +
                                " exceeds the cap of " + std::to_string(cap));
  std::vector<double> fact(n + 1, 1.0);
  for (std::size_t i = 1; i <= n; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);

  // cache subset values by mask
  std::vector<double> worth(std::size_t{1} << n, 0.0);
  std::vector<int> scratch;
  for (std::size_t mask = 1; mask < worth.size(); ++mask) {
    scratch.clear();
    for (std::size_t j = 0; j < n; ++j)
      if ((mask >> j) & 1) scratch.push_back(members[j]);
    worth[mask] = value(scratch);
  }

  std::vector<double> pay(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t mask = 0; mask < worth.size(); ++mask) {
      if (mask & bit) continue;
      const std::size_t s = static_cast<std::size_t>(__builtin_popcountll(mask));
      const double coeff = fact[s] * fact[n - s - 1] / fact[n];
      pay[i] += coeff * (worth[mask | bit] - worth[mask]);
    }
  }
  return pay;
}

}  // namespace d2dlab
