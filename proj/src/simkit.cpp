#include "d2dlab/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "d2dlab/tiebreak.hpp"

namespace d2dlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Packet {
  double arrival = 0.0;
  std::int64_t remaining = 0;
};

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

void ScenarioConfig::validate() const {
  if (users.empty()) throw std::invalid_argument("users: empty");
  if (frames < 1) throw std::invalid_argument("frames: must be at least 1");
  if (!(budget.symbols_per_frame > 0.0) || !(budget.frame_seconds > 0.0))
    throw std::invalid_argument("budget: symbols and frame duration must be positive");
  const std::size_t nu = users.size();
  if (!positions.empty() && positions.size() != nu)
    throw std::invalid_argument("positions: size must match users");
  if (!partition.empty()) {
    std::vector<int> seen(nu, 0);
    for (const std::vector<int>& cell : partition) {
      if (cell.empty()) throw std::invalid_argument("partition: empty cluster");
      for (int u : cell) {
        if (u < 0 || static_cast<std::size_t>(u) >= nu)
          throw std::invalid_argument("partition: user index out of range");
        ++seen[u];
      }
    }
    for (std::size_t u = 0; u < nu; ++u)
      if (seen[u] != 1) throw std::invalid_argument("partition: users must be covered exactly once");
  }
  const std::size_t nc = partition.empty() ? nu : partition.size();
  if (!tie_weights.empty()) {
    if (tie_weights.size() != nc)
      throw std::invalid_argument("tie_weights: size must match connections");
    for (double w : tie_weights)
      if (!finite_nonneg(w)) throw std::invalid_argument("tie_weights: entries must be >= 0");
  }
  if (!poisson_bps.empty()) {
    if (poisson_bps.size() != nu)
      throw std::invalid_argument("poisson_bps: size must match users");
    for (double r : poisson_bps)
      if (!finite_nonneg(r)) throw std::invalid_argument("poisson_bps: rates must be >= 0");
  }
  if (!(pf_time_constant >= 1.0))
    throw std::invalid_argument("pf_time_constant: must be at least 1 frame");
  if (buffer_packets < 1) throw std::invalid_argument("buffer_packets: must be at least 1");
  if (packet_bits < 1) throw std::invalid_argument("packet_bits: must be at least 1");
  if (!delay_threshold_s.empty()) {
    if (delay_threshold_s.size() != nu)
      throw std::invalid_argument("delay_threshold_s: size must match users");
    for (double t : delay_threshold_s)
      if (std::isnan(t) || t <= 0.0)
        throw std::invalid_argument("delay_threshold_s: thresholds must be positive");
  }
  if (!(dore_smoothing > 0.0) || dore_smoothing > 1.0)
    throw std::invalid_argument("dore_smoothing: must lie in (0, 1]");
  if (!finite_nonneg(d2d_hop_delay_s))
    throw std::invalid_argument("d2d_hop_delay_s: must be >= 0");
  power.validate();
}

void DelayHistogram::add(double delay_s) {
  if (delay_s < 0.0) delay_s = 0.0;
  const std::size_t idx = static_cast<std::size_t>(delay_s / bin_width);
  if (idx < bins.size())
    ++bins[idx];
  else
    ++overflow;
  ++count;
  sum += delay_s;
  if (delay_s > max) max = delay_s;
}

double DelayHistogram::mean() const { return count == 0 ? 0.0 : sum / count; }

double DelayHistogram::cdf_at(double delay_s) const {
  if (count == 0) return 1.0;
  std::size_t limit = static_cast<std::size_t>(delay_s / bin_width + 1e-9);
  limit = std::min(limit, bins.size());
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < limit; ++i) acc += bins[i];
  return static_cast<double>(acc) / static_cast<double>(count);
}

double DelayHistogram::quantile(double q) const {
  if (count == 0) return 0.0;
  const double target = q * static_cast<double>(count);
  double acc = 0.0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    acc += static_cast<double>(bins[i]);
    if (acc >= target) return (i + 1) * bin_width;
  }
  return max;
}

int pick_equal_time(std::uint64_t frame, std::size_t n_connections) {
  if (n_connections == 0) throw std::invalid_argument("no connections");
  return static_cast<int>(frame % n_connections);
}

int pick_proportional_fair(const std::vector<double>& inst_rate,
                           const std::vector<double>& average, double tie_draw) {
  if (inst_rate.empty() || inst_rate.size() != average.size())
    throw std::invalid_argument("metric vectors must be nonempty and aligned");
  double best = -kInf;
  for (std::size_t i = 0; i < inst_rate.size(); ++i)
    best = std::max(best, inst_rate[i] / average[i]);
  std::size_t tied = 0;
  for (std::size_t i = 0; i < inst_rate.size(); ++i)
    if (inst_rate[i] / average[i] == best) ++tied;
  std::size_t want = std::min(static_cast<std::size_t>(tie_draw * tied), tied - 1);
  for (std::size_t i = 0; i < inst_rate.size(); ++i) {
    if (inst_rate[i] / average[i] != best) continue;
    if (want == 0) return static_cast<int>(i);
    --want;
  }
  return static_cast<int>(inst_rate.size()) - 1;
}

int pick_max_rate(const std::vector<std::size_t>& level, const std::vector<double>& weights,
                  double tie_draw) {
  if (level.empty()) throw std::invalid_argument("no connections");
  if (!weights.empty() && weights.size() != level.size())
    throw std::invalid_argument("weights must be empty or aligned with levels");
  const std::size_t best = *std::max_element(level.begin(), level.end());
  double total = 0.0;
  std::size_t tied = 0;
  for (std::size_t i = 0; i < level.size(); ++i) {
    if (level[i] != best) continue;
    ++tied;
    if (!weights.empty()) total += weights[i];
  }
  if (weights.empty() || total <= 0.0) {
    std::size_t want = std::min(static_cast<std::size_t>(tie_draw * tied), tied - 1);
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (level[i] != best) continue;
      if (want == 0) return static_cast<int>(i);
      --want;
    }
  } else {
    const double target = tie_draw * total;
    double acc = 0.0;
    int last = -1;
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (level[i] != best || weights[i] <= 0.0) continue;
      acc += weights[i];
      last = static_cast<int>(i);
      if (target < acc) return last;
    }
    return last;
  }
  return static_cast<int>(level.size()) - 1;
}

int pick_cluster_wrr(std::vector<double>& credit, const std::vector<double>& weights) {
  if (credit.empty() || credit.size() != weights.size())
    throw std::invalid_argument("credit and weights must be nonempty and aligned");
  std::size_t arg = 0;
  for (std::size_t i = 0; i < credit.size(); ++i) {
    credit[i] += weights[i];
    if (credit[i] > credit[arg]) arg = i;
  }
  credit[arg] -= 1.0;
  return static_cast<int>(arg);
}

int pick_cluster_max_rate(const std::vector<double>& user_snr,
                          const std::vector<int>& connection_of_user) {
  if (user_snr.empty() || user_snr.size() != connection_of_user.size())
    throw std::invalid_argument("snr and connection maps must be nonempty and aligned");
  std::size_t arg = 0;
  for (std::size_t i = 1; i < user_snr.size(); ++i)
    if (user_snr[i] > user_snr[arg]) arg = i;
  return connection_of_user[arg];
}

bool dore_link_select(double delay_estimate_s, double threshold_s) {
  return delay_estimate_s <= threshold_s;
}

namespace {

// Mutable frame-loop state shared by the backlogged and queued paths.
struct Engine {
  const ScenarioConfig& cfg;
  std::vector<std::vector<int>> conn;
  std::vector<int> conn_of_user;
  std::vector<double> wrr_weights;   // cluster size share
  std::vector<double> level_bps;     // bits/s at each MCS level
  std::vector<double> conn_mean_bps; // seed of the PF average

  Rng rng;

  // per-frame channel snapshot
  std::vector<double> snr;
  std::vector<std::size_t> level_u;
  std::vector<int> head;
  std::vector<std::size_t> head_level;
  std::vector<double> head_snr;

  // scheduler state
  std::vector<double> pf_avg;
  std::vector<double> credit;

  // tallies
  std::vector<std::int64_t> bits_user;       // delivered per receiving user
  std::vector<std::int64_t> bits_conn;       // delivered per connection
  std::vector<std::int64_t> lte_bits;        // moved over each user's own radio
  std::vector<std::int64_t> wifi_tx_bits;    // forwarded by the user as head
  std::vector<std::int64_t> wifi_rx_bits;    // received over the local link
  std::vector<std::uint64_t> head_frames;
  std::vector<std::uint64_t> served_frames;

  explicit Engine(const ScenarioConfig& c) : cfg(c), rng(c.seed) {
    const std::size_t nu = cfg.users.size();
    if (cfg.partition.empty()) {
      conn.resize(nu);
      for (std::size_t u = 0; u < nu; ++u) conn[u] = {static_cast<int>(u)};
    } else {
      conn = cfg.partition;
    }
    const std::size_t nc = conn.size();
    conn_of_user.assign(nu, 0);
    for (std::size_t c2 = 0; c2 < nc; ++c2)
      for (int u : conn[c2]) conn_of_user[u] = static_cast<int>(c2);
    wrr_weights.resize(nc);
    for (std::size_t c2 = 0; c2 < nc; ++c2)
      wrr_weights[c2] = static_cast<double>(conn[c2].size()) / static_cast<double>(nu);
    level_bps = level_rates(cfg.table, cfg.budget.symbol_rate());
    conn_mean_bps.resize(nc);
    for (std::size_t c2 = 0; c2 < nc; ++c2) {
      Cluster members;
      for (int u : conn[c2]) members.push_back(cfg.users[u]);
      const std::vector<double> probs = cluster_mcs_probabilities(cfg.table, members);
      double mean = 0.0;
      for (std::size_t k = 0; k < probs.size(); ++k) mean += probs[k] * level_bps[k];
      conn_mean_bps[c2] = mean;
    }
    snr.resize(nu);
    level_u.resize(nu);
    head.resize(nc);
    head_level.resize(nc);
    head_snr.resize(nc);
    pf_avg = conn_mean_bps;
    credit.assign(nc, 0.0);
    bits_user.assign(nu, 0);
    bits_conn.assign(nc, 0);
    lte_bits.assign(nu, 0);
    wifi_tx_bits.assign(nu, 0);
    wifi_rx_bits.assign(nu, 0);
    head_frames.assign(nu, 0);
    served_frames.assign(nc, 0);
  }

  void draw_channels() {
    for (std::size_t u = 0; u < cfg.users.size(); ++u) {
      snr[u] = sample_snr(cfg.users[u], rng);
      level_u[u] = cfg.table.level_for(snr[u]);
    }
    for (std::size_t c2 = 0; c2 < conn.size(); ++c2) {
      int h = conn[c2][0];
      for (int u : conn[c2])
        if (snr[u] > snr[h]) h = u;
      head[c2] = h;
      head_level[c2] = level_u[h];
      head_snr[c2] = snr[h];
    }
  }

  int pick(std::uint64_t frame, double tie_draw, std::vector<double>& inst_scratch) {
    switch (cfg.scheduler) {
      case SchedulerId::EqualTime:
        return pick_equal_time(frame, conn.size());
      case SchedulerId::ProportionalFair: {
        inst_scratch.resize(conn.size());
        for (std::size_t c2 = 0; c2 < conn.size(); ++c2)
          inst_scratch[c2] = level_bps[head_level[c2]];
        return pick_proportional_fair(inst_scratch, pf_avg, tie_draw);
      }
      case SchedulerId::MaxRate:
        return pick_max_rate(head_level, {}, tie_draw);
      case SchedulerId::MaxRateWrr:
        return pick_max_rate(head_level, cfg.tie_weights, tie_draw);
      case SchedulerId::ClusterWrr:
        return pick_cluster_wrr(credit, wrr_weights);
      case SchedulerId::ClusterMaxRate:
        return pick_cluster_max_rate(snr, conn_of_user);
    }
    throw std::logic_error("unknown scheduler");
  }

  // Preference order for leftover frame capacity, mirroring each policy's
  // own ranking. The primary connection is listed first.
  void spill_order(int primary, std::vector<int>& order, const std::vector<double>& inst) {
    const std::size_t nc = conn.size();
    order.clear();
    order.push_back(primary);
    switch (cfg.scheduler) {
      case SchedulerId::EqualTime:
        for (std::size_t k = 1; k < nc; ++k)
          order.push_back(static_cast<int>((primary + k) % nc));
        return;
      case SchedulerId::ProportionalFair: {
        for (std::size_t c2 = 0; c2 < nc; ++c2)
          if (static_cast<int>(c2) != primary) order.push_back(static_cast<int>(c2));
        std::stable_sort(order.begin() + 1, order.end(), [&](int a, int b) {
          return inst[a] / pf_avg[a] > inst[b] / pf_avg[b];
        });
        return;
      }
      case SchedulerId::MaxRate:
      case SchedulerId::MaxRateWrr: {
        for (std::size_t c2 = 0; c2 < nc; ++c2)
          if (static_cast<int>(c2) != primary) order.push_back(static_cast<int>(c2));
        std::stable_sort(order.begin() + 1, order.end(),
                         [&](int a, int b) { return head_level[a] > head_level[b]; });
        return;
      }
      case SchedulerId::ClusterWrr: {
        for (std::size_t c2 = 0; c2 < nc; ++c2)
          if (static_cast<int>(c2) != primary) order.push_back(static_cast<int>(c2));
        std::stable_sort(order.begin() + 1, order.end(),
                         [&](int a, int b) { return credit[a] > credit[b]; });
        return;
      }
      case SchedulerId::ClusterMaxRate: {
        for (std::size_t c2 = 0; c2 < nc; ++c2)
          if (static_cast<int>(c2) != primary) order.push_back(static_cast<int>(c2));
        std::stable_sort(order.begin() + 1, order.end(),
                         [&](int a, int b) { return head_snr[a] > head_snr[b]; });
        return;
      }
    }
  }

  void update_pf(const std::vector<std::int64_t>& frame_bits) {
    if (cfg.scheduler != SchedulerId::ProportionalFair) return;
    const double tc = cfg.pf_time_constant;
    for (std::size_t c2 = 0; c2 < conn.size(); ++c2) {
      const double served = static_cast<double>(frame_bits[c2]) / cfg.budget.frame_seconds;
      pf_avg[c2] += (served - pf_avg[c2]) / tc;
    }
  }
};

SimReport assemble(const Engine& eng, const ScenarioConfig& cfg, bool backlogged,
                   DelayHistogram&& hist, const std::vector<double>& delay_sum,
                   const std::vector<std::uint64_t>& offered_pk,
                   const std::vector<std::uint64_t>& delivered_pk,
                   const std::vector<std::uint64_t>& dropped_pk, std::int64_t queued_bits,
                   std::vector<FrameRecord>&& trace) {
  const std::size_t nu = cfg.users.size();
  const std::size_t nc = eng.conn.size();
  const double duration = static_cast<double>(cfg.frames) * cfg.budget.frame_seconds;

  SimReport rep;
  rep.duration_s = duration;
  rep.users.resize(nu);
  rep.clusters.resize(nc);
  rep.delay = std::move(hist);
  rep.trace = std::move(trace);

  std::vector<double> user_tp(nu, 0.0);
  std::vector<double> conn_tp(nc, 0.0);
  for (std::size_t c2 = 0; c2 < nc; ++c2)
    conn_tp[c2] = static_cast<double>(eng.bits_conn[c2]) / duration;
  if (backlogged) {
    // the clustering gain is split evenly inside each connection
    for (std::size_t c2 = 0; c2 < nc; ++c2)
      for (int u : eng.conn[c2])
        user_tp[u] = conn_tp[c2] / static_cast<double>(eng.conn[c2].size());
  } else {
    for (std::size_t u = 0; u < nu; ++u)
      user_tp[u] = static_cast<double>(eng.bits_user[u]) / duration;
  }

  std::uint64_t offered_total = 0, delivered_total = 0, dropped_total = 0;
  for (std::size_t u = 0; u < nu; ++u) {
    UserStats& s = rep.users[u];
    s.throughput = user_tp[u];
    s.head_frames = eng.head_frames[u];
    s.head_probability =
        static_cast<double>(eng.head_frames[u]) / static_cast<double>(cfg.frames);
    s.relay_rate = static_cast<double>(eng.lte_bits[u]) / duration;
    const std::size_t c2 = eng.conn_of_user[u];
    if (backlogged) {
      const double delta = 1.0 / static_cast<double>(eng.conn[c2].size());
      s.wifi = wifi_rates(delta, s.relay_rate, conn_tp[c2]);
    } else {
      s.wifi.tx = static_cast<double>(eng.wifi_tx_bits[u]) / duration;
      s.wifi.rx = static_cast<double>(eng.wifi_rx_bits[u]) / duration;
    }
    s.wifi_active = wifi_active_probability(cfg.power, s.wifi);
    s.lte_watts = lte_power(cfg.power, s.head_probability, s.relay_rate);
    s.wifi_watts = wifi_power(cfg.power, s.wifi, s.wifi_active);
    s.total_watts = s.lte_watts + s.wifi_watts;
    s.bits_per_joule = energy_efficiency(s.throughput, s.total_watts);
    s.offered_packets = offered_pk[u];
    s.delivered_packets = delivered_pk[u];
    s.dropped_packets = dropped_pk[u];
    s.mean_delay_s = delivered_pk[u] == 0 ? 0.0 : delay_sum[u] / delivered_pk[u];
    offered_total += offered_pk[u];
    delivered_total += delivered_pk[u];
    dropped_total += dropped_pk[u];
  }
  for (std::size_t c2 = 0; c2 < nc; ++c2) {
    ClusterStats& s = rep.clusters[c2];
    s.throughput = conn_tp[c2];
    s.served_frames = eng.served_frames[c2];
    for (int u : eng.conn[c2]) s.wifi_load += rep.users[u].wifi.tx;
  }

  rep.delivery_ratio = offered_total == 0
                           ? 1.0
                           : static_cast<double>(delivered_total) / static_cast<double>(offered_total);
  rep.user_jain = jain_index(user_tp);
  rep.cluster_jain = jain_index(conn_tp);

  if (backlogged) {
    for (std::size_t c2 = 0; c2 < nc; ++c2) rep.delivered_bits += eng.bits_conn[c2];
    rep.offered_bits = rep.delivered_bits;
  } else {
    rep.offered_bits = static_cast<std::int64_t>(offered_total) * cfg.packet_bits;
    for (std::size_t u = 0; u < nu; ++u) rep.delivered_bits += eng.bits_user[u];
    rep.dropped_bits = static_cast<std::int64_t>(dropped_total) * cfg.packet_bits;
    rep.queued_bits = queued_bits;
  }
  return rep;
}

SimReport run_backlogged(const ScenarioConfig& cfg) {
  Engine eng(cfg);
  const std::size_t nu = cfg.users.size();
  const std::size_t nc = eng.conn.size();
  std::vector<std::int64_t> frame_bits(nc, 0);
  std::vector<double> inst_scratch;
  std::vector<FrameRecord> trace;
  if (cfg.record_trace) trace.reserve(cfg.frames);

  for (std::uint64_t f = 0; f < cfg.frames; ++f) {
    eng.draw_channels();
    const double tie = eng.rng.uniform();
    const int primary = eng.pick(f, tie, inst_scratch);
    ++eng.served_frames[primary];
    ++eng.head_frames[eng.head[primary]];

    const double rate = cfg.table[eng.head_level[primary]].rate;
    const std::int64_t bits =
        static_cast<std::int64_t>(cfg.budget.symbols_per_frame * rate);
    eng.bits_conn[primary] += bits;
    eng.lte_bits[eng.head[primary]] += bits;

    if (cfg.scheduler == SchedulerId::ProportionalFair) {
      std::fill(frame_bits.begin(), frame_bits.end(), 0);
      frame_bits[primary] = bits;
      eng.update_pf(frame_bits);
    }
    if (cfg.record_trace)
      trace.push_back({f, primary, static_cast<int>(eng.head_level[primary]), 0});
  }

  DelayHistogram hist;
  return assemble(eng, cfg, true, std::move(hist), std::vector<double>(nu, 0.0),
                  std::vector<std::uint64_t>(nu, 0), std::vector<std::uint64_t>(nu, 0),
                  std::vector<std::uint64_t>(nu, 0), 0, std::move(trace));
}

SimReport run_queued(const ScenarioConfig& cfg) {
  Engine eng(cfg);
  const std::size_t nu = cfg.users.size();
  const std::size_t nc = eng.conn.size();
  const double frame_s = cfg.budget.frame_seconds;

  std::vector<std::deque<Packet>> queue(nu);
  std::vector<double> dore_estimate(nu, 0.0);
  std::vector<double> threshold(nu, kInf);
  if (!cfg.delay_threshold_s.empty()) threshold = cfg.delay_threshold_s;

  std::vector<std::uint64_t> offered_pk(nu, 0), delivered_pk(nu, 0), dropped_pk(nu, 0);
  std::vector<double> delay_sum(nu, 0.0);
  DelayHistogram hist;

  std::vector<double> arrivals_scratch;
  std::vector<double> inst_scratch;
  std::vector<int> order_scratch;
  std::vector<char> blocked(nu, 0);
  std::vector<std::int64_t> frame_bits(nc, 0);
  std::vector<FrameRecord> trace;
  if (cfg.record_trace) trace.reserve(cfg.frames);

  // drains one connection's merged queue, oldest packet first
  auto serve = [&](int c2, double& symbols, double frame_end) {
    const int h = eng.head[c2];
    const double head_rate = cfg.table[eng.head_level[c2]].rate;
    for (int u : eng.conn[c2]) blocked[u] = 0;
    for (;;) {
      int who = -1;
      double best_ts = kInf;
      for (int u : eng.conn[c2]) {
        if (blocked[u] || queue[u].empty()) continue;
        if (queue[u].front().arrival < best_ts) {
          best_ts = queue[u].front().arrival;
          who = u;
        }
      }
      if (who < 0) return;
      bool direct = who == h;
      if (!direct && !dore_link_select(dore_estimate[who], threshold[who])) direct = true;
      const double rate = direct ? cfg.table[eng.level_u[who]].rate : head_rate;
      if (rate <= 0.0) {
        blocked[who] = 1;  // nothing can move on this member's path this frame
        continue;
      }
      Packet& pk = queue[who].front();
      const std::int64_t capacity = static_cast<std::int64_t>(symbols * rate);
      const std::int64_t moved = std::min(pk.remaining, capacity);
      if (moved <= 0) return;  // frame exhausted
      symbols = std::max(0.0, symbols - static_cast<double>(moved) / rate);
      pk.remaining -= moved;
      eng.bits_user[who] += moved;
      eng.bits_conn[c2] += moved;
      frame_bits[c2] += moved;
      if (direct) {
        eng.lte_bits[who] += moved;
      } else {
        eng.lte_bits[h] += moved;
        eng.wifi_tx_bits[h] += moved;
        eng.wifi_rx_bits[who] += moved;
      }
      if (pk.remaining == 0) {
        // Delivery lands where the packet's last symbol sits inside the frame,
        // and never earlier than the packet's own airtime after arrival.
        const double symbol_s = frame_s / cfg.budget.symbols_per_frame;
        const double completion = frame_end - symbols * symbol_s;
        const double airtime = static_cast<double>(moved) / rate * symbol_s;
        const double delay =
            std::max(completion - pk.arrival, airtime) + (direct ? 0.0 : cfg.d2d_hop_delay_s);
        hist.add(delay);
        delay_sum[who] += delay;
        ++delivered_pk[who];
        if (!direct)
          dore_estimate[who] += cfg.dore_smoothing * (delay - dore_estimate[who]);
        queue[who].pop_front();
      }
    }
  };

  for (std::uint64_t f = 0; f < cfg.frames; ++f) {
    const double t0 = static_cast<double>(f) * frame_s;
    const double frame_end = t0 + frame_s;

    for (std::size_t u = 0; u < nu; ++u) {
      const double mean_pk = cfg.poisson_bps[u] * frame_s / static_cast<double>(cfg.packet_bits);
      const unsigned k = eng.rng.poisson(mean_pk);
      arrivals_scratch.clear();
      for (unsigned i = 0; i < k; ++i) arrivals_scratch.push_back(t0 + eng.rng.uniform() * frame_s);
      std::sort(arrivals_scratch.begin(), arrivals_scratch.end());
      for (double ts : arrivals_scratch) {
        ++offered_pk[u];
        if (queue[u].size() >= cfg.buffer_packets)
          ++dropped_pk[u];
        else
          queue[u].push_back({ts, cfg.packet_bits});
      }
    }

    eng.draw_channels();
    const double tie = eng.rng.uniform();
    const int primary = eng.pick(f, tie, inst_scratch);
    ++eng.served_frames[primary];
    ++eng.head_frames[eng.head[primary]];

    std::fill(frame_bits.begin(), frame_bits.end(), 0);
    double symbols = cfg.budget.symbols_per_frame;
    eng.spill_order(primary, order_scratch, inst_scratch);
    for (int c2 : order_scratch) {
      if (symbols <= 0.0) break;
      serve(c2, symbols, frame_end);
    }
    eng.update_pf(frame_bits);

    if (cfg.record_trace) {
      std::int64_t queued = 0;
      for (const std::deque<Packet>& q : queue)
        for (const Packet& pk : q) queued += pk.remaining;
      trace.push_back({f, primary, static_cast<int>(eng.head_level[primary]), queued});
    }
  }

  std::int64_t queued_bits = 0;
  for (const std::deque<Packet>& q : queue)
    for (const Packet& pk : q) queued_bits += pk.remaining;

  return assemble(eng, cfg, false, std::move(hist), delay_sum, offered_pk, delivered_pk,
                  dropped_pk, queued_bits, std::move(trace));
}

}  // namespace

SimReport run(const ScenarioConfig& config) {
  config.validate();
  if (config.poisson_bps.empty()) return run_backlogged(config);
  return run_queued(config);
}

Summary summarize(const std::vector<double>& samples) {
  Summary s;
  if (samples.empty()) return s;
  const double n = static_cast<double>(samples.size());
  s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  if (samples.size() < 2) return s;
  double ss = 0.0;
  for (double x : samples) ss += (x - s.mean) * (x - s.mean);
  const double var = ss / (n - 1.0);
  s.half_width = 1.96 * std::sqrt(var / n);
  s.has_interval = true;
  return s;
}

}  // namespace d2dlab
