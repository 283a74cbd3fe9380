#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "d2dlab/channel.hpp"
#include "d2dlab/mcs.hpp"

namespace d2dlab {

// Discrete MCS distribution of one scheduling connection (a lone user, or a
// cluster riding its best member) plus the prefix sums the tie calculus runs
// on. Level 0 is outage and carries zero rate.
struct ConnectionProfile {
  std::vector<double> p;  // p[k] = P(connection is at level k); sums to one
  std::vector<double> q;  // q[k] = P(level < k); size p.size()+1, q[0] = 0, q.back() = 1

  // Validates probabilities (nonnegative, summing to one within 1e-9).
  static ConnectionProfile from_probabilities(std::vector<double> probs);
  static ConnectionProfile for_user(const McsTable& table, const UserChannel& u);
  static ConnectionProfile for_cluster(const McsTable& table, const Cluster& c);
};

// Per-level rates in bits/s aligned with profile levels; index 0 is outage.
std::vector<double> level_rates(const McsTable& table, double symbol_rate);

// Rate mass of a two-connection max-rate system split by who holds the
// strictly better level and who is tied. win1 + win2 + tied is the aggregate
// throughput, independent of how ties are broken.
struct PairRates {
  double win1 = 0.0;
  double win2 = 0.0;
  double tied = 0.0;
};
PairRates pair_rates(const ConnectionProfile& a, const ConnectionProfile& b,
                     const std::vector<double>& rates);

// Tie-break probability for connection 1 that equalizes the two expected
// throughputs. `achievable` reports whether the unclamped value was a proper
// probability, i.e. whether the tie mass can absorb the win imbalance.
struct MaxFairAlpha {
  double alpha = 0.5;
  bool achievable = false;
};
MaxFairAlpha maxfair_alpha(double win1, double win2, double tied);

// Expected system rate earned in frames where exactly the connections in
// `members` (bitmask over profile indices) share the best level and everyone
// else sits strictly below. Summing over all nonzero masks gives the
// aggregate max-rate throughput.
double tie_throughput(std::uint32_t members, const std::vector<ConnectionProfile>& profiles,
                      const std::vector<double>& rates);

// Exact equal-share split of all tie masses, if one exists.
struct TieShareResult {
  bool feasible = false;
  double fair_share = 0.0;         // aggregate throughput / N
  double relaxed_objective = 0.0;  // fully placed tie fractions; N-connection target is 2^N-N-1
  std::vector<double> throughput;  // per-connection rate under the returned split
  // share[mask][n]: fraction of that tie mass handed to connection n.
  std::vector<std::vector<double>> share;
};

// Decides whether per-tie splitting fractions can equalize every connection
// at the fair share, via the relaxation that maximizes the total placed
// fraction under per-connection caps. The instance is feasible exactly when
// no connection's strict wins already exceed the fair share and the relaxed
// optimum places every tie fully. Throws when profiles.size() exceeds `cap`.
TieShareResult solve_tie_lp(const std::vector<ConnectionProfile>& profiles,
                            const std::vector<double>& rates, std::size_t cap = 10);

// Expected per-connection throughput when every tie is broken by weighted
// random selection among the tied connections. A tie whose members all have
// zero weight is split uniformly. Exhaustive over 2^N tie sets; throws when
// profiles.size() exceeds `cap`.
std::vector<double> wrr_expected_throughput(const std::vector<double>& weights,
                                            const std::vector<ConnectionProfile>& profiles,
                                            const std::vector<double>& rates,
                                            std::size_t cap = 15);

// Monte-Carlo estimate of the same quantity, for connection counts past the
// exhaustive cap. Draws one level per connection per frame.
std::vector<double> wrr_sampled_throughput(const std::vector<double>& weights,
                                           const std::vector<ConnectionProfile>& profiles,
                                           const std::vector<double>& rates, std::size_t frames,
                                           Rng& rng);

// One connection against the field of all others collapsed into a single
// virtual rival riding its best level.
struct AggregateRates {
  double own = 0.0;   // n strictly best
  double rest = 0.0;  // someone else strictly best
  double tied = 0.0;  // n ties the best of the rest
};
AggregateRates aggregate_rates(std::size_t n, const std::vector<ConnectionProfile>& profiles,
                               const std::vector<double>& rates);

enum class WeightRule { ExactPair, TieLp, Belf, Wolf, Fish, Pike, Uniform };

struct TieBreakWeights {
  std::vector<double> alpha;
  WeightRule rule = WeightRule::Uniform;
  // Connections whose fair-share equation has no tie mass at positive rate;
  // their weight is pinned to zero and they are skipped by the shifts below.
  std::vector<bool> no_tie_mass;
};

// Per-connection weight that would lift each connection to the fair share of
// the aggregate against the rest of the field, shifted so the minimum lands
// at zero. If the shift would zero the whole vector (all raw weights equal,
// or every connection degenerate) the weights fall back to uniform.
TieBreakWeights fish_weights(const std::vector<ConnectionProfile>& profiles,
                             const std::vector<double>& rates);

// Same raw weights, but shifted only when a negative entry forces it, so
// connections already above the fair share keep a nonzero weight when the
// raw vector is already admissible.
TieBreakWeights pike_weights(const std::vector<ConnectionProfile>& profiles,
                             const std::vector<double>& rates);

enum class TreeShape { LeftSpine, Balanced };

// Pairwise equal-share splits arranged in a binary tree over the leaf order:
// each node splits its group, the two sides get alpha and 1-alpha from the
// pair rule applied to the group profiles, and a leaf's weight is the product
// of the splits on its path. Weights sum to one. The left-spine shape peels
// one leaf per level; Balanced halves each segment.
//
// belf composes a group as the union of its users (the group transmits at
// its best member's level); wolf represents a group by its single worst
// member, lowest mean SNR, ties by user id ascending.
TieBreakWeights belf_weights(const McsTable& table, const std::vector<Cluster>& connections,
                             const std::vector<double>& rates, const std::vector<int>& leaf_order,
                             TreeShape shape = TreeShape::LeftSpine);
TieBreakWeights wolf_weights(const McsTable& table, const std::vector<Cluster>& connections,
                             const std::vector<double>& rates, const std::vector<int>& leaf_order,
                             TreeShape shape = TreeShape::LeftSpine);

// Class census of one connection, compared lexicographically: more good
// members first, then average, then poor.
struct GoodnessTriple {
  int good = 0;
  int average = 0;
  int poor = 0;
};

// The two leaf orders worth trying by default: best-to-worst, and
// best, worst, second best, second worst, ... Ties break by index ascending.
struct LeafMappings {
  std::vector<int> lexicographic;
  std::vector<int> alternating;
};
LeafMappings leaf_mappings(const std::vector<GoodnessTriple>& goodness);

// Every permutation of n leaves, for exhaustive mapping searches. n <= 8.
std::vector<std::vector<int>> all_leaf_orders(std::size_t n);

// (sum x)^2 / (n sum x^2), in [1/n, 1]. The all-zero allocation counts as
// perfectly even and returns 1. Throws on negative entries.
double jain_index(const std::vector<double>& x);

}  // namespace d2dlab
