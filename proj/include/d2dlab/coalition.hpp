#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "d2dlab/power.hpp"

namespace d2dlab {

// Characteristic function over sorted sets of user ids.
using ValueFn = std::function<double(const std::vector<int>&)>;

// Scenario data a physically-grounded value function needs: channels,
// geometry, the power model, and which cluster scheduler carries traffic
// inside a coalition.
struct CoalitionContext {
  McsTable table = McsTable::lte_default();
  FrameBudget budget;
  PowerParams power;
  std::vector<UserChannel> users;
  std::vector<std::array<double, 2>> positions;  // meters; empty disables the gate
  double max_diameter = 100.0;                   // largest allowed member spacing
  enum class Scheduler { WeightedRoundRobin, MaxRate } scheduler = Scheduler::WeightedRoundRobin;
  enum class Metric { Efficiency, Throughput } metric = Metric::Efficiency;

  const UserChannel& user_by_id(int id) const;
  const std::array<double, 2>& position_by_id(int id) const;
};

// Worth of a coalition: the summed per-member metric, but only when the
// members sit within the diameter gate and each of them does at least as
// well inside the coalition as it would alone under proportional-fair
// scheduling. Otherwise the coalition is worthless.
double coalition_value(const CoalitionContext& ctx, const std::vector<int>& members);

struct MergeSplitStep {
  std::string action;  // "merge" or "split"
  double total_value;  // value of the partition after the step
};

struct MergeSplitResult {
  std::vector<std::vector<int>> partition;
  double total_value = 0.0;
  std::vector<MergeSplitStep> history;
};

// Iterated merge-and-split over a coalition value function.
//
// Merges scan coalition pairs in ascending (id, id) order, where a
// coalition's id is its smallest member; the first strictly improving merge
// is applied and the scan restarts. When no merge applies, coalitions are
// split at the first bipartition whose parts are worth at least the whole.
// Starts from singletons unless an initial partition is given.
MergeSplitResult merge_split(const std::vector<int>& users, const ValueFn& value,
                             std::vector<std::vector<int>> initial = {});

// Payoff divisions of a coalition's worth among its members. Each returns
// one payoff per member, ordered like `members`.

// Singleton worth plus an equal cut of the surplus.
std::vector<double> payoff_equal_share(const std::vector<int>& members, const ValueFn& value);

// Singleton worth plus a weight-proportional cut of the surplus.
std::vector<double> payoff_weighted_share(const std::vector<int>& members, const ValueFn& value,
                                          const std::vector<double>& weights);

// Shapley value: the average marginal contribution over all join orders,
// computed by exact subset enumeration. Coalitions above `cap` members are
// rejected because the enumeration is exponential.
std::vector<double> payoff_shapley(const std::vector<int>& members, const ValueFn& value,
                                   std::size_t cap = 12);

}  // namespace d2dlab
