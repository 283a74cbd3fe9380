#include "d2dlab/modeselect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace d2dlab {

namespace {

double distance(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

double mean_gain(const PathLossModel& model, double d) {
  return std::pow(10.0, -pathloss_db(model, d) / 10.0);
}

struct BandPlan {
  double cellular_rbs = 0.0;  // per subframe, shared by mode 0, reused by mode 1
  double overlay_rbs = 0.0;   // per subframe, split among mode-2 pairs
  std::size_t overlay_users = 0;
};

// The overlay slice exists only while someone uses it; otherwise the whole
// band serves modes 0 and 1.
BandPlan band_plan(const ModeSelectContext& ctx, const ModeAssignment& assignment) {
  BandPlan plan;
  for (int m : assignment.mode)
    if (m == kModeOverlay) ++plan.overlay_users;
  const double total = static_cast<double>(ctx.params.rb_per_subframe);
  plan.overlay_rbs =
      plan.overlay_users > 0 ? std::round(ctx.params.overlay_fraction * total) : 0.0;
  plan.cellular_rbs = total - plan.overlay_rbs;
  return plan;
}

void check_assignment(const ModeSelectContext& ctx, const ModeAssignment& assignment) {
  if (assignment.mode.size() != ctx.pairs.size())
    throw std::invalid_argument("mode assignment size does not match the pair list");
  for (int m : assignment.mode)
    if (m < kModeUnderlay || m > kModeOutband)
      throw std::invalid_argument("direct pairs take modes 1..3");
}

double bits_per_rb(const ModeSelectContext& ctx, double sinr) {
  const std::size_t level = ctx.table.level_for(sinr);
  return ctx.table[level].rate * static_cast<double>(ctx.params.symbols_per_rb);
}

double subframes(const UtilityParams& p) { return p.mode_interval / p.subframe; }

// Sum of received interference powers at `listener` from mode-1 transmitters,
// skipping pair `skip` (pass npos to keep all).
double underlay_sum_at(const ModeSelectContext& ctx, const ModeAssignment& assignment,
                       std::size_t listener, std::size_t skip) {
  double sum = 0.0;
  for (std::size_t q = 0; q < ctx.pairs.size(); ++q)
    if (q != skip && assignment.mode[q] == kModeUnderlay)
      sum += ctx.interference.at(ctx.pairs[q].tx, listener);
  return sum;
}

double cellular_sum_at(const ModeSelectContext& ctx, std::size_t listener) {
  double sum = 0.0;
  for (int c : ctx.cellular) sum += ctx.interference.at(c, listener);
  return sum;
}

double overlay_sum_at(const ModeSelectContext& ctx, const ModeAssignment& assignment,
                      std::size_t listener, std::size_t skip) {
  double sum = 0.0;
  for (std::size_t q = 0; q < ctx.pairs.size(); ++q)
    if (q != skip && assignment.mode[q] == kModeOverlay)
      sum += ctx.interference.at(ctx.pairs[q].tx, listener);
  return sum;
}

std::size_t pair_index_of(const ModeSelectContext& ctx, const D2dPair& link) {
  for (std::size_t q = 0; q < ctx.pairs.size(); ++q)
    if (ctx.pairs[q].tx == link.tx && ctx.pairs[q].rx == link.rx) return q;
  return ctx.pairs.size();
}

// Radio-on time for one connection over the interval, from its share of the
// resource grid. The outband mode is billed per bit instead.
double airtime(const ModeSelectContext& ctx, int mode, const ModeAssignment& assignment) {
  const BandPlan plan = band_plan(ctx, assignment);
  const double total = static_cast<double>(ctx.params.rb_per_subframe);
  switch (mode) {
    case kModeCellular: {
      const double share = ctx.cellular.empty()
                               ? 0.0
                               : plan.cellular_rbs / static_cast<double>(ctx.cellular.size());
      return share / total * ctx.params.mode_interval;
    }
    case kModeUnderlay:
      return plan.cellular_rbs / total * ctx.params.mode_interval;
    case kModeOverlay: {
      const double share =
          plan.overlay_rbs / static_cast<double>(std::max<std::size_t>(plan.overlay_users, 1));
      return share / total * ctx.params.mode_interval;
    }
    default:
      return 0.0;
  }
}

struct SweepOptions {
  bool social = false;  // aggregate objective instead of the pair's own
};

// One pass over the pairs in the given order. Each pair adopts the first
// strictly improving feasible mode. Returns whether anything changed.
bool sweep(const ModeSelectContext& ctx, const std::vector<std::size_t>& order,
           ModeAssignment& assignment, const SweepOptions& opt) {
  bool changed = false;
  for (std::size_t n : order) {
    const int original = assignment.mode[n];
    int best_mode = original;
    double best = opt.social ? system_utility(ctx, assignment)
                             : pair_utility(ctx, n, original, assignment);
    for (int j = kModeUnderlay; j <= kModeOutband; ++j) {
      if (j == original) continue;
      assignment.mode[n] = j;
      if (!check_feasible(ctx, assignment).ok) continue;
      const double u = opt.social ? system_utility(ctx, assignment)
                                  : pair_utility(ctx, n, j, assignment);
      if (u > best) {
        best = u;
        best_mode = j;
      }
    }
    assignment.mode[n] = best_mode;
    if (best_mode != original) changed = true;
  }
  return changed;
}

std::uint64_t encode(const ModeAssignment& assignment) {
  std::uint64_t key = 0;
  for (int m : assignment.mode) key = key * 4 + static_cast<std::uint64_t>(m);
  return key;
}

ModeAssignment all_outband(const ModeSelectContext& ctx) {
  ModeAssignment assignment;
  assignment.mode.assign(ctx.pairs.size(), kModeOutband);
  if (!check_feasible(ctx, assignment).ok)
    throw std::runtime_error("no feasible assignment");
  return assignment;
}

// Self-interested sweeps in a fixed order; a repeated assignment after a
// sweep ends the loop (the dynamics may cycle).
SearchResult run_greedy(const ModeSelectContext& ctx, const std::vector<std::size_t>& order) {
  if (ctx.pairs.size() > 30) throw std::invalid_argument("too many pairs for cycle tracking");
  SearchResult result;
  result.assignment = all_outband(ctx);
  std::unordered_set<std::uint64_t> seen;
  std::size_t changed_sweeps = 0;
  for (;;) {
    const bool changed = sweep(ctx, order, result.assignment, SweepOptions{false});
    if (changed) ++changed_sweeps;
    result.trace.push_back(system_utility(ctx, result.assignment));
    const std::uint64_t key = encode(result.assignment);
    if (!changed || !seen.insert(key).second) break;
  }
  result.iterations = std::max<std::size_t>(changed_sweeps, 1);
  result.u_sum = system_utility(ctx, result.assignment);
  return result;
}

std::vector<std::size_t> shuffled_order(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i)
    std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

}  // namespace

double pathloss_db(const PathLossModel& model, double distance) {
  const double d = std::max(distance, model.ref_distance);
  return model.pl0_db + 10.0 * model.exponent * std::log10(d / model.ref_distance);
}

InterferenceMatrix build_interference(const std::vector<std::array<double, 2>>& positions,
                                      const std::vector<double>& tx_power,
                                      const PathLossModel& model, Rng& rng) {
  if (positions.size() != tx_power.size())
    throw std::invalid_argument("one transmit power per node is required");
  const std::size_t n = positions.size();
  InterferenceMatrix out;
  out.watts.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t from = 0; from < n; ++from) {
    for (std::size_t to = 0; to < n; ++to) {
      if (from == to) continue;
      const double shadow_db = model.shadowing_sigma_db * rng.normal();
      const double loss = pathloss_db(model, distance(positions[from], positions[to]));
      out.watts[from][to] = tx_power[from] * std::pow(10.0, (-loss + shadow_db) / 10.0);
    }
  }
  return out;
}

double inband_throughput(const ModeSelectContext& ctx, const D2dPair& link, int mode,
                         const ModeAssignment& assignment) {
  check_assignment(ctx, assignment);
  const BandPlan plan = band_plan(ctx, assignment);
  const std::size_t bs = ctx.n_users();
  double signal = 0.0, interference = 0.0, rbs = 0.0;
  switch (mode) {
    case kModeCellular: {
      signal = ctx.params.cell_tx *
               mean_gain(ctx.pathloss, distance(ctx.positions[link.tx], ctx.base_station));
      interference = underlay_sum_at(ctx, assignment, bs, ctx.pairs.size());
      rbs = ctx.cellular.empty()
                ? 0.0
                : plan.cellular_rbs / static_cast<double>(ctx.cellular.size());
      break;
    }
    case kModeUnderlay: {
      const std::size_t self = pair_index_of(ctx, link);
      signal = ctx.params.d2d_tx *
               mean_gain(ctx.pathloss, distance(ctx.positions[link.tx], ctx.positions[link.rx]));
      interference = cellular_sum_at(ctx, link.rx) +
                     underlay_sum_at(ctx, assignment, link.rx, self);
      rbs = plan.cellular_rbs;
      break;
    }
    case kModeOverlay: {
      const std::size_t self = pair_index_of(ctx, link);
      signal = ctx.params.d2d_tx *
               mean_gain(ctx.pathloss, distance(ctx.positions[link.tx], ctx.positions[link.rx]));
      interference = overlay_sum_at(ctx, assignment, link.rx, self);
      rbs = plan.overlay_rbs / static_cast<double>(std::max<std::size_t>(plan.overlay_users, 1));
      break;
    }
    default:
      throw std::invalid_argument("inband modes are 0, 1, 2");
  }
  const double sinr = signal / (ctx.params.noise_power + interference);
  return rbs * subframes(ctx.params) * bits_per_rb(ctx, sinr);
}

double outband_throughput(const ModeSelectContext& ctx, std::size_t p,
                          const ModeAssignment& assignment) {
  check_assignment(ctx, assignment);
  const std::array<double, 2>& own = ctx.positions[ctx.pairs[p].tx];
  std::size_t contenders = 1;
  for (std::size_t q = 0; q < ctx.pairs.size(); ++q) {
    if (q == p || assignment.mode[q] != kModeOutband) continue;
    if (distance(own, ctx.positions[ctx.pairs[q].tx]) <= ctx.params.wifi_range) ++contenders;
  }
  return ctx.params.mode_interval * ctx.params.wifi_rate / static_cast<double>(contenders);
}

double connection_energy(const UtilityParams& params, int mode, double bits, double airtime) {
  const double t = params.mode_interval;
  switch (mode) {
    case kModeCellular:
      return params.beta_lte * t + params.p0_tx * airtime;
    case kModeUnderlay:
    case kModeOverlay:
      return 2.0 * (params.beta_lte + params.beta_wifi_idle) * t +
             (params.pi_tx + params.pi_rx) * airtime;
    case kModeOutband:
      return 2.0 * (params.beta_lte + params.beta_wifi_active) * t +
             (params.e3_tx + params.e3_rx) * bits;
    default:
      throw std::invalid_argument("unknown mode");
  }
}

double pair_bits(const ModeSelectContext& ctx, std::size_t p, int mode,
                 const ModeAssignment& assignment) {
  ModeAssignment candidate = assignment;
  candidate.mode.at(p) = mode;
  return mode == kModeOutband ? outband_throughput(ctx, p, candidate)
                              : inband_throughput(ctx, ctx.pairs[p], mode, candidate);
}

double pair_utility(const ModeSelectContext& ctx, std::size_t p, int mode,
                    const ModeAssignment& assignment) {
  ModeAssignment candidate = assignment;
  candidate.mode.at(p) = mode;
  const double bits = mode == kModeOutband
                          ? outband_throughput(ctx, p, candidate)
                          : inband_throughput(ctx, ctx.pairs[p], mode, candidate);
  const double energy =
      connection_energy(ctx.params, mode, bits, airtime(ctx, mode, candidate));
  return bits - ctx.params.alpha * energy;
}

double cellular_utility(const ModeSelectContext& ctx, int user,
                        const ModeAssignment& assignment) {
  const double bits = inband_throughput(ctx, {user, -1}, kModeCellular, assignment);
  const double energy =
      connection_energy(ctx.params, kModeCellular, bits, airtime(ctx, kModeCellular, assignment));
  return bits - ctx.params.alpha * energy;
}

double system_utility(const ModeSelectContext& ctx, const ModeAssignment& assignment) {
  double sum = 0.0;
  for (int c : ctx.cellular) sum += cellular_utility(ctx, c, assignment);
  for (std::size_t p = 0; p < ctx.pairs.size(); ++p)
    sum += pair_utility(ctx, p, assignment.mode[p], assignment);
  return sum;
}

Feasibility check_feasible(const ModeSelectContext& ctx, const ModeAssignment& assignment) {
  check_assignment(ctx, assignment);
  Feasibility out;
  const std::size_t users = ctx.n_users();
  const std::size_t bs = users;

  std::vector<int> as_rx(users, 0), as_tx(users, 0);
  for (const D2dPair& p : ctx.pairs) {
    ++as_tx[p.tx];
    ++as_rx[p.rx];
  }
  for (int c : ctx.cellular) ++as_tx[c];
  for (std::size_t u = 0; u < users; ++u) {
    if (as_rx[u] > 1) out.violations.push_back({1, static_cast<int>(u)});
    if (as_tx[u] > 1) out.violations.push_back({2, static_cast<int>(u)});
  }

  // underlay transmitters must stay tolerable at every uplink receiver
  for (int c : ctx.cellular)
    if (underlay_sum_at(ctx, assignment, c, ctx.pairs.size()) > ctx.params.gamma)
      out.violations.push_back({3, c});
  if (underlay_sum_at(ctx, assignment, bs, ctx.pairs.size()) > ctx.params.gamma)
    out.violations.push_back({3, static_cast<int>(bs)});

  for (std::size_t p = 0; p < ctx.pairs.size(); ++p) {
    const int rx = ctx.pairs[p].rx;
    if (assignment.mode[p] == kModeUnderlay &&
        cellular_sum_at(ctx, rx) + underlay_sum_at(ctx, assignment, rx, p) > ctx.params.gamma)
      out.violations.push_back({4, rx});
    if (assignment.mode[p] == kModeOverlay &&
        overlay_sum_at(ctx, assignment, rx, p) > ctx.params.gamma)
      out.violations.push_back({5, rx});
  }

  out.ok = out.violations.empty();
  return out;
}

SearchResult brute_force_optimal(const ModeSelectContext& ctx) {
  if (ctx.pairs.size() > 8)
    throw std::invalid_argument("exhaustive search is capped at 8 pairs");
  SearchResult best;
  bool found = false;
  ModeAssignment assignment;
  assignment.mode.assign(ctx.pairs.size(), kModeUnderlay);
  std::size_t examined = 0;
  for (;;) {
    ++examined;
    if (check_feasible(ctx, assignment).ok) {
      const double u = system_utility(ctx, assignment);
      if (!found || u > best.u_sum) {
        found = true;
        best.u_sum = u;
        best.assignment = assignment;
      }
    }
    // odometer over modes, lexicographic, so ties keep the first maximizer
    std::size_t i = assignment.mode.size();
    while (i > 0 && assignment.mode[i - 1] == kModeOutband)
      assignment.mode[--i] = kModeUnderlay;
    if (i == 0) break;
    ++assignment.mode[i - 1];
  }
  if (!found) throw std::runtime_error("no feasible assignment");
  best.iterations = examined;
  best.trace.push_back(best.u_sum);
  return best;
}

SearchResult heuristic_social(const ModeSelectContext& ctx, Rng& rng) {
  const std::vector<std::size_t> order = shuffled_order(ctx.pairs.size(), rng);
  SearchResult result;
  result.assignment = all_outband(ctx);
  std::size_t changed_sweeps = 0;
  for (;;) {
    const bool changed = sweep(ctx, order, result.assignment, SweepOptions{true});
    if (changed) ++changed_sweeps;
    result.trace.push_back(system_utility(ctx, result.assignment));
    if (!changed) break;
  }
  result.iterations = std::max<std::size_t>(changed_sweeps, 1);
  result.u_sum = system_utility(ctx, result.assignment);
  return result;
}

SearchResult heuristic_greedy(const ModeSelectContext& ctx, Rng& rng) {
  return run_greedy(ctx, shuffled_order(ctx.pairs.size(), rng));
}

SearchResult heuristic_ranked(const ModeSelectContext& ctx) {
  // score each pair alone in the system, holding everyone else out
  std::vector<double> score(ctx.pairs.size(), 0.0);
  for (std::size_t p = 0; p < ctx.pairs.size(); ++p) {
    ModeSelectContext solo = ctx;
    solo.pairs = {ctx.pairs[p]};
    ModeAssignment one;
    one.mode.assign(1, kModeUnderlay);
    double best = -std::numeric_limits<double>::infinity();
    for (int j = kModeUnderlay; j <= kModeOutband; ++j) {
      one.mode[0] = j;
      if (!check_feasible(solo, one).ok) continue;
      best = std::max(best, pair_utility(solo, 0, j, one));
    }
    score[p] = best;
  }
  std::vector<std::size_t> order(ctx.pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  return run_greedy(ctx, order);
}

}  // namespace d2dlab
