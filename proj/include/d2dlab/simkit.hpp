#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "d2dlab/analytics.hpp"
#include "d2dlab/channel.hpp"
#include "d2dlab/mcs.hpp"
#include "d2dlab/power.hpp"
#include "d2dlab/rng.hpp"

namespace d2dlab {

enum class SchedulerId {
  EqualTime,         // deterministic rotation over connections
  ProportionalFair,  // argmax instantaneous rate / EWMA-average rate
  MaxRate,           // argmax MCS level, ties uniform
  MaxRateWrr,        // argmax MCS level, ties by weighted random selection
  ClusterWrr,        // deterministic weighted rotation, weight = cluster size share
  ClusterMaxRate,    // the connection holding the system-best instantaneous SNR
};

// Complete description of one simulation run. Users are scheduled as
// connections: each partition cell is one connection riding its best
// member's channel, and an empty partition puts every user in its own
// connection. An empty poisson_bps means fully backlogged queues.
struct ScenarioConfig {
  McsTable table = McsTable::lte_default();
  FrameBudget budget;
  std::vector<UserChannel> users;
  std::vector<std::array<double, 2>> positions;  // optional; the frame loop ignores it
  std::vector<std::vector<int>> partition;       // user indexes, disjoint exact cover
  SchedulerId scheduler = SchedulerId::EqualTime;
  double pf_time_constant = 1000.0;  // frames
  std::vector<double> tie_weights;   // MaxRateWrr only; empty = uniform
  std::vector<double> poisson_bps;   // per-user offered load; empty = backlogged
  std::uint64_t frames = 1000;
  std::uint64_t seed = 1;
  std::size_t buffer_packets = 500;  // per-user queue cap
  std::int64_t packet_bits = 12000;
  std::vector<double> delay_threshold_s;  // relay QoS budget per user; empty = unlimited
  double dore_smoothing = 0.1;            // EWMA step of the relayed-delay estimate
  double d2d_hop_delay_s = 0.0;           // added to every relayed delivery
  bool record_trace = false;
  PowerParams power;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Fixed-bin tally of packet delays. Bin i covers [i*bin_width, (i+1)*bin_width);
// anything past the last bin lands in overflow and only bounds quantiles.
struct DelayHistogram {
  double bin_width = 1e-4;
  std::vector<std::uint64_t> bins = std::vector<std::uint64_t>(4000, 0);
  std::uint64_t overflow = 0;
  std::uint64_t count = 0;
  double sum = 0.0;
  double max = 0.0;

  void add(double delay_s);
  double mean() const;  // 0 with no samples
  // Fraction of samples below the bin edge at or under delay_s; 1 with no
  // samples. Exact when delay_s is a multiple of bin_width.
  double cdf_at(double delay_s) const;
  double quantile(double q) const;  // upper edge of the covering bin
};

struct UserStats {
  double throughput = 0.0;        // delivered bits/s
  double head_probability = 0.0;  // share of frames granted with this user as head
  double relay_rate = 0.0;        // bits/s moved over this user's own cellular radio
  WifiRates wifi;                 // relayed traffic forwarded to / received from mates
  double wifi_active = 0.0;
  double lte_watts = 0.0;
  double wifi_watts = 0.0;
  double total_watts = 0.0;
  double bits_per_joule = 0.0;
  std::uint64_t head_frames = 0;
  std::uint64_t offered_packets = 0;
  std::uint64_t delivered_packets = 0;
  std::uint64_t dropped_packets = 0;
  double mean_delay_s = 0.0;  // delivered packets only
};

struct ClusterStats {
  double throughput = 0.0;          // delivered bits/s, all members
  std::uint64_t served_frames = 0;  // frames granted as the primary connection
  double wifi_load = 0.0;           // bits/s forwarded over the local link by its heads
};

struct FrameRecord {
  std::uint64_t frame = 0;
  int primary = -1;
  int level = 0;  // the serving head's MCS level
  std::int64_t queued_bits = 0;
};

// All bit counters are integral, so offered == delivered + queued + dropped
// holds exactly. Backlogged runs book every served bit as offered.
struct SimReport {
  double duration_s = 0.0;
  std::vector<UserStats> users;
  std::vector<ClusterStats> clusters;
  DelayHistogram delay;
  double delivery_ratio = 1.0;  // delivered / offered packets; 1 when nothing offered
  double user_jain = 1.0;
  double cluster_jain = 1.0;
  std::int64_t offered_bits = 0;
  std::int64_t delivered_bits = 0;
  std::int64_t queued_bits = 0;
  std::int64_t dropped_bits = 0;
  std::vector<FrameRecord> trace;
};

// Frame grants. Each returns the index of the connection to serve. tie_draw
// is the frame's single uniform [0,1) value; every scheduler consumes the
// same random stream, so runs differing only in tie policy see identical
// channels.
int pick_equal_time(std::uint64_t frame, std::size_t n_connections);

// Ties on the metric are broken uniformly via tie_draw. Averages must be
// positive (run() seeds them with one frame of the connection's mean rate).
int pick_proportional_fair(const std::vector<double>& inst_rate,
                           const std::vector<double>& average, double tie_draw);

// Empty weights break level ties uniformly; a tied set whose weights sum to
// zero falls back to uniform as well.
int pick_max_rate(const std::vector<std::size_t>& level, const std::vector<double>& weights,
                  double tie_draw);

// Deterministic credit rotation: every connection banks its weight, the
// largest credit is served and charged one frame. Service counts stay within
// one frame of frames * weight when weights sum to one.
int pick_cluster_wrr(std::vector<double>& credit, const std::vector<double>& weights);

int pick_cluster_max_rate(const std::vector<double>& user_snr,
                          const std::vector<int>& connection_of_user);

// Relay QoS gate: keep the local link while the delay estimate respects the
// receiver's budget.
bool dore_link_select(double delay_estimate_s, double threshold_s);

SimReport run(const ScenarioConfig& config);

// 95% normal-approximation interval over replication samples. A single
// sample carries no interval; a constant series has zero width.
struct Summary {
  double mean = 0.0;
  double half_width = 0.0;
  bool has_interval = false;
};
Summary summarize(const std::vector<double>& samples);

}  // namespace d2dlab
