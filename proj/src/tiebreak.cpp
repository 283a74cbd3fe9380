#include "d2dlab/tiebreak.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "d2dlab/simplex.hpp"

namespace d2dlab {

namespace {

// Hard ceiling for exhaustive tie-set enumeration; 2^20 masks keep the mass
// table in tens of megabytes at worst.
constexpr std::size_t kMaskLimit = 20;

void check_aligned(const std::vector<ConnectionProfile>& profiles,
                   const std::vector<double>& rates) {
  if (profiles.empty()) throw std::invalid_argument("tiebreak: no connections");
  for (const ConnectionProfile& c : profiles)
    if (c.p.size() != rates.size())
      throw std::invalid_argument("tiebreak: profile levels do not match the rate ladder");
}

double mask_mass(std::uint32_t members, const std::vector<ConnectionProfile>& profiles,
                 const std::vector<double>& rates) {
  const std::size_t n = profiles.size();
  double total = 0.0;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    if (rates[k] == 0.0) continue;
    double term = rates[k];
    for (std::size_t i = 0; i < n; ++i)
      term *= (members >> i) & 1u ? profiles[i].p[k] : profiles[i].q[k];
    total += term;
  }
  return total;
}

// P(level == k) and P(level < k) for the best level among all connections
// except `skip` (the whole field when skip is out of range).
std::vector<double> field_below(const std::vector<ConnectionProfile>& profiles,
                                std::size_t skip) {
  const std::size_t levels = profiles.front().p.size();
  std::vector<double> q(levels + 1, 1.0);
  for (std::size_t k = 0; k <= levels; ++k)
    for (std::size_t m = 0; m < profiles.size(); ++m)
      if (m != skip) q[k] *= profiles[m].q[k];
  return q;
}

}  // namespace

ConnectionProfile ConnectionProfile::from_probabilities(std::vector<double> probs) {
  if (probs.empty()) throw std::invalid_argument("profile: no levels");
  double sum = 0.0;
  for (double v : probs) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("profile: probabilities must be finite and nonnegative");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("profile: probabilities must sum to one");
  ConnectionProfile c;
  c.p = std::move(probs);
  c.q.resize(c.p.size() + 1);
  c.q[0] = 0.0;
  for (std::size_t k = 0; k < c.p.size(); ++k) c.q[k + 1] = c.q[k] + c.p[k];
  return c;
}

ConnectionProfile ConnectionProfile::for_user(const McsTable& table, const UserChannel& u) {
  return from_probabilities(mcs_probabilities(table, u));
}

ConnectionProfile ConnectionProfile::for_cluster(const McsTable& table, const Cluster& c) {
  return from_probabilities(cluster_mcs_probabilities(table, c));
}

std::vector<double> level_rates(const McsTable& table, double symbol_rate) {
  std::vector<double> r(table.size());
  for (std::size_t k = 0; k < table.size(); ++k) r[k] = table[k].rate * symbol_rate;
  return r;
}

PairRates pair_rates(const ConnectionProfile& a, const ConnectionProfile& b,
                     const std::vector<double>& rates) {
  check_aligned({a, b}, rates);
  PairRates out;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    out.win1 += rates[k] * a.p[k] * b.q[k];
    out.win2 += rates[k] * b.p[k] * a.q[k];
    out.tied += rates[k] * a.p[k] * b.p[k];
  }
  return out;
}

MaxFairAlpha maxfair_alpha(double win1, double win2, double tied) {
  MaxFairAlpha out;
  if (tied <= 0.0) {
    // No tie mass: nothing to steer. Equal wins are already fair; otherwise
    // lean fully toward the starved side and report failure.
    out.alpha = win1 == win2 ? 0.5 : (win2 > win1 ? 1.0 : 0.0);
    out.achievable = win1 == win2;
    return out;
  }
  out.achievable = std::fabs(win1 - win2) <= tied;
  out.alpha = std::clamp(0.5 + (win2 - win1) / (2.0 * tied), 0.0, 1.0);
  return out;
}

double tie_throughput(std::uint32_t members, const std::vector<ConnectionProfile>& profiles,
                      const std::vector<double>& rates) {
  check_aligned(profiles, rates);
  if (profiles.size() > 31) throw std::invalid_argument("tiebreak: too many connections");
  if (members == 0 || members >= (1u << profiles.size()))
    throw std::invalid_argument("tiebreak: tie set must be a nonempty subset");
  return mask_mass(members, profiles, rates);
}

TieShareResult solve_tie_lp(const std::vector<ConnectionProfile>& profiles,
                            const std::vector<double>& rates, std::size_t cap) {
  check_aligned(profiles, rates);
  const std::size_t n = profiles.size();
  if (n > cap || n > kMaskLimit)
    throw std::invalid_argument("tie lp: connection count exceeds the cap");

  const std::uint32_t full = 1u << n;
  std::vector<double> mass(full, 0.0);
  for (std::uint32_t mk = 1; mk < full; ++mk) mass[mk] = mask_mass(mk, profiles, rates);

  TieShareResult res;
  res.fair_share = std::accumulate(mass.begin(), mass.end(), 0.0) / static_cast<double>(n);
  res.share.assign(full, {});
  res.throughput.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) res.throughput[i] = mass[1u << i];

  double scale = res.fair_share;
  for (std::uint32_t mk = 1; mk < full; ++mk) scale = std::max(scale, mass[mk]);
  if (scale <= 0.0) scale = 1.0;

  // A connection whose exclusive wins already exceed the fair share cannot
  // be pulled back down; splitting can only add throughput.
  std::vector<double> need(n);
  for (std::size_t i = 0; i < n; ++i) {
    need[i] = res.fair_share - mass[1u << i];
    if (need[i] < -1e-9 * scale) return res;
    need[i] = std::max(need[i], 0.0);
  }

  struct Var {
    std::uint32_t mask;
    std::size_t conn;
  };
  std::vector<Var> vars;
  std::vector<std::uint32_t> multi;
  for (std::uint32_t mk = 1; mk < full; ++mk) {
    if (std::popcount(mk) < 2) continue;
    multi.push_back(mk);
    for (std::size_t i = 0; i < n; ++i)
      if ((mk >> i) & 1u) vars.push_back({mk, i});
  }

  LpProblem lp;
  lp.c.assign(vars.size(), 1.0);
  lp.rows.assign(n + multi.size(), std::vector<double>(vars.size(), 0.0));
  lp.rhs.assign(n + multi.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) lp.rhs[i] = need[i] / scale;
  for (std::size_t h = 0; h < multi.size(); ++h) lp.rhs[n + h] = 1.0;
  std::vector<std::size_t> row_of_mask(full, 0);
  for (std::size_t h = 0; h < multi.size(); ++h) row_of_mask[multi[h]] = n + h;
  for (std::size_t v = 0; v < vars.size(); ++v) {
    lp.rows[vars[v].conn][v] = mass[vars[v].mask] / scale;
    lp.rows[row_of_mask[vars[v].mask]][v] = 1.0;
  }

  const LpSolution sol = solve_lp(lp);
  res.relaxed_objective = sol.objective;
  res.feasible = std::fabs(sol.objective - static_cast<double>(multi.size())) <= 1e-6;
  for (std::uint32_t mk : multi) res.share[mk].assign(n, 0.0);
  for (std::size_t v = 0; v < vars.size(); ++v) {
    res.share[vars[v].mask][vars[v].conn] = sol.x[v];
    res.throughput[vars[v].conn] += sol.x[v] * mass[vars[v].mask];
  }
  return res;
}

std::vector<double> wrr_expected_throughput(const std::vector<double>& weights,
                                            const std::vector<ConnectionProfile>& profiles,
                                            const std::vector<double>& rates, std::size_t cap) {
  check_aligned(profiles, rates);
  const std::size_t n = profiles.size();
  if (n > cap || n > kMaskLimit)
    throw std::invalid_argument("wrr: connection count exceeds the cap");
  if (weights.size() != n) throw std::invalid_argument("wrr: one weight per connection");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("wrr: weights must be finite and nonnegative");

  std::vector<double> out(n, 0.0);
  const std::uint32_t full = 1u << n;
  for (std::uint32_t mk = 1; mk < full; ++mk) {
    const double m = mask_mass(mk, profiles, rates);
    if (m == 0.0) continue;
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if ((mk >> i) & 1u) wsum += weights[i];
    const double count = static_cast<double>(std::popcount(mk));
    for (std::size_t i = 0; i < n; ++i)
      if ((mk >> i) & 1u) out[i] += m * (wsum > 0.0 ? weights[i] / wsum : 1.0 / count);
  }
  return out;
}

std::vector<double> wrr_sampled_throughput(const std::vector<double>& weights,
                                           const std::vector<ConnectionProfile>& profiles,
                                           const std::vector<double>& rates, std::size_t frames,
                                           Rng& rng) {
  check_aligned(profiles, rates);
  const std::size_t n = profiles.size();
  if (weights.size() != n) throw std::invalid_argument("wrr: one weight per connection");
  if (frames == 0) throw std::invalid_argument("wrr: need at least one frame");

  std::vector<double> bits(n, 0.0);
  std::vector<std::size_t> tiedconn(n);
  for (std::size_t f = 0; f < frames; ++f) {
    std::size_t best = 0, tied = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.uniform();
      const ConnectionProfile& c = profiles[i];
      // level k with q[k] <= u < q[k+1]; the min guards against q.back()
      // rounding a hair below one
      const std::size_t lvl =
          std::min(static_cast<std::size_t>(std::upper_bound(c.q.begin() + 1, c.q.end(), u) -
                                            c.q.begin()) -
                       1,
                   c.p.size() - 1);
      if (lvl > best) {
        best = lvl;
        tied = 0;
      }
      if (lvl == best) tiedconn[tied++] = i;
    }
    std::size_t winner = tiedconn[0];
    if (tied > 1) {
      double wsum = 0.0;
      for (std::size_t t = 0; t < tied; ++t) wsum += weights[tiedconn[t]];
      if (wsum > 0.0) {
        double draw = rng.uniform() * wsum;
        for (std::size_t t = 0; t < tied; ++t) {
          draw -= weights[tiedconn[t]];
          if (draw <= 0.0 || t + 1 == tied) {
            winner = tiedconn[t];
            break;
          }
        }
      } else {
        winner = tiedconn[rng.below(tied)];
      }
    }
    bits[winner] += rates[best];
  }
  for (double& b : bits) b /= static_cast<double>(frames);
  return bits;
}

AggregateRates aggregate_rates(std::size_t n, const std::vector<ConnectionProfile>& profiles,
                               const std::vector<double>& rates) {
  check_aligned(profiles, rates);
  if (n >= profiles.size()) throw std::invalid_argument("aggregate: connection out of range");
  const std::vector<double> qrest = field_below(profiles, n);
  const ConnectionProfile& c = profiles[n];
  AggregateRates out;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    const double prest = qrest[k + 1] - qrest[k];
    out.own += rates[k] * c.p[k] * qrest[k];
    out.rest += rates[k] * prest * c.q[k];
    out.tied += rates[k] * c.p[k] * prest;
  }
  return out;
}

namespace {

TieBreakWeights fair_share_weights(const std::vector<ConnectionProfile>& profiles,
                                   const std::vector<double>& rates, bool always_shift) {
  check_aligned(profiles, rates);
  const std::size_t n = profiles.size();
  TieBreakWeights w;
  w.rule = always_shift ? WeightRule::Fish : WeightRule::Pike;
  w.alpha.assign(n, 0.0);
  w.no_tie_mass.assign(n, false);

  const double nn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> qrest = field_below(profiles, i);
    const ConnectionProfile& c = profiles[i];
    double numer = 0.0, denom = 0.0;
    for (std::size_t k = 0; k < rates.size(); ++k) {
      const double prest = qrest[k + 1] - qrest[k];
      numer += rates[k] * (prest * c.q[k] - (nn - 1.0) * c.p[k] * qrest[k]);
      denom += rates[k] * c.p[k] * prest;
    }
    if (denom <= 0.0) {
      w.no_tie_mass[i] = true;
      continue;
    }
    w.alpha[i] = 1.0 / nn + numer / (nn * denom);
  }

  double mn = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (!w.no_tie_mass[i]) mn = std::min(mn, w.alpha[i]);
  const bool any = std::isfinite(mn);
  if (any && (always_shift || mn < 0.0))
    for (std::size_t i = 0; i < n; ++i)
      if (!w.no_tie_mass[i]) w.alpha[i] -= mn;

  // The shift (or a fully degenerate instance) can leave nothing to weight;
  // ties are then broken uniformly.
  double top = 0.0;
  for (double a : w.alpha) top = std::max(top, a);
  if (top <= 0.0) w.alpha.assign(n, 1.0 / nn);
  return w;
}

const UserChannel& worst_user(const Cluster& c) {
  const UserChannel* out = &c.front();
  for (const UserChannel& u : c)
    if (u.mean_snr < out->mean_snr || (u.mean_snr == out->mean_snr && u.id < out->id)) out = &u;
  return *out;
}

struct TreeContext {
  const McsTable& table;
  const std::vector<Cluster>& connections;
  const std::vector<double>& rates;
  const std::vector<int>& order;
  bool worst_member;
  std::vector<double>& alpha;
};

ConnectionProfile group_profile(const TreeContext& ctx, std::size_t lo, std::size_t hi) {
  Cluster all;
  for (std::size_t i = lo; i < hi; ++i) {
    const Cluster& c = ctx.connections[static_cast<std::size_t>(ctx.order[i])];
    all.insert(all.end(), c.begin(), c.end());
  }
  if (ctx.worst_member) return ConnectionProfile::for_user(ctx.table, worst_user(all));
  return ConnectionProfile::for_cluster(ctx.table, all);
}

void split_group(const TreeContext& ctx, std::size_t lo, std::size_t hi, double weight,
                 TreeShape shape) {
  if (hi - lo == 1) {
    ctx.alpha[static_cast<std::size_t>(ctx.order[lo])] = weight;
    return;
  }
  const std::size_t mid = shape == TreeShape::LeftSpine ? lo + 1 : lo + (hi - lo + 1) / 2;
  const PairRates pr =
      pair_rates(group_profile(ctx, lo, mid), group_profile(ctx, mid, hi), ctx.rates);
  const double beta = maxfair_alpha(pr.win1, pr.win2, pr.tied).alpha;
  split_group(ctx, lo, mid, weight * beta, shape);
  split_group(ctx, mid, hi, weight * (1.0 - beta), shape);
}

TieBreakWeights tree_weights(const McsTable& table, const std::vector<Cluster>& connections,
                             const std::vector<double>& rates, const std::vector<int>& leaf_order,
                             TreeShape shape, bool worst_member) {
  const std::size_t n = connections.size();
  if (n == 0) throw std::invalid_argument("tree weights: no connections");
  if (rates.size() != table.size())
    throw std::invalid_argument("tree weights: rates do not match the table");
  for (const Cluster& c : connections)
    if (c.empty()) throw std::invalid_argument("tree weights: empty connection");
  if (leaf_order.size() != n) throw std::invalid_argument("tree weights: bad leaf order size");
  std::vector<bool> seen(n, false);
  for (int i : leaf_order) {
    if (i < 0 || static_cast<std::size_t>(i) >= n || seen[static_cast<std::size_t>(i)])
      throw std::invalid_argument("tree weights: leaf order is not a permutation");
    seen[static_cast<std::size_t>(i)] = true;
  }

  TieBreakWeights w;
  w.rule = worst_member ? WeightRule::Wolf : WeightRule::Belf;
  w.alpha.assign(n, 0.0);
  w.no_tie_mass.assign(n, false);
  TreeContext ctx{table, connections, rates, leaf_order, worst_member, w.alpha};
  split_group(ctx, 0, n, 1.0, shape);
  return w;
}

}  // namespace

TieBreakWeights fish_weights(const std::vector<ConnectionProfile>& profiles,
                             const std::vector<double>& rates) {
  return fair_share_weights(profiles, rates, true);
}

TieBreakWeights pike_weights(const std::vector<ConnectionProfile>& profiles,
                             const std::vector<double>& rates) {
  return fair_share_weights(profiles, rates, false);
}

TieBreakWeights belf_weights(const McsTable& table, const std::vector<Cluster>& connections,
                             const std::vector<double>& rates, const std::vector<int>& leaf_order,
                             TreeShape shape) {
  return tree_weights(table, connections, rates, leaf_order, shape, false);
}

TieBreakWeights wolf_weights(const McsTable& table, const std::vector<Cluster>& connections,
                             const std::vector<double>& rates, const std::vector<int>& leaf_order,
                             TreeShape shape) {
  return tree_weights(table, connections, rates, leaf_order, shape, true);
}

LeafMappings leaf_mappings(const std::vector<GoodnessTriple>& goodness) {
  const std::size_t n = goodness.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const GoodnessTriple& ga = goodness[static_cast<std::size_t>(a)];
    const GoodnessTriple& gb = goodness[static_cast<std::size_t>(b)];
    if (ga.good != gb.good) return ga.good > gb.good;
    if (ga.average != gb.average) return ga.average > gb.average;
    if (ga.poor != gb.poor) return ga.poor > gb.poor;
    return a < b;
  });

  LeafMappings out;
  out.lexicographic = order;
  out.alternating.reserve(n);
  std::size_t lo = 0, hi = n;
  while (lo < hi) {
    out.alternating.push_back(order[lo++]);
    if (lo < hi) out.alternating.push_back(order[--hi]);
  }
  return out;
}

std::vector<std::vector<int>> all_leaf_orders(std::size_t n) {
  if (n > 8) throw std::invalid_argument("leaf orders: exhaustive search capped at 8");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(order);
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

double jain_index(const std::vector<double>& x) {
  if (x.empty()) return 1.0;
  double sum = 0.0, sq = 0.0;
  for (double v : x) {
    if (v < 0.0 || !std::isfinite(v)) throw std::invalid_argument("jain: negative allocation");
    sum += v;
    sq += v * v;
  }
  if (sq == 0.0) return 1.0;
  return sum * sum / (static_cast<double>(x.size()) * sq);
}

}  // namespace d2dlab
