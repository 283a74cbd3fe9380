#pragma once

#include <cstddef>
#include <vector>

#include "d2dlab/channel.hpp"
#include "d2dlab/mcs.hpp"

namespace d2dlab {

// Physical-layer resource budget of one cell. The defaults give the symbol
// rate of a 20 MHz FDD carrier whose peak spectral efficiency of
// 4.8 bit/symbol reaches 80.64 Mb/s.
struct FrameBudget {
  double symbols_per_frame = 16800.0;
  double frame_seconds = 1e-3;

  double symbol_rate() const { return symbols_per_frame / frame_seconds; }
};

// CDF of a user's SNR restricted to one MCS level's bucket.
// Throws std::domain_error if the bucket has zero probability.
double conditional_snr_cdf(const McsTable& table, const UserChannel& u,
                           std::size_t level, double z);

// P(best SNR of `x` falls in `level`'s bucket AND tops every rival's SNR).
// With no rivals this is just the bucket probability. Everything downstream
// (head probabilities, relay rates, cluster throughputs) reduces to sums of
// these joint probabilities.
double level_win_probability(const McsTable& table, const Cluster& x,
                             std::size_t level, const Cluster& rivals);

// Mean achievable rate of a lone user (bits/s).
double mean_user_rate(const McsTable& table, const UserChannel& u, const FrameBudget& fb);

// ---- weighted-round-robin cluster scheduler ----
// The cluster holds the channel `weight` share of airtime; within a scheduled
// frame the member with the best instantaneous SNR acts as head and the
// cluster is served at that member's MCS.

double clwrr_cluster_throughput(const McsTable& table, const Cluster& c, double weight,
                                const FrameBudget& fb);

// Equal split of the cluster throughput across members (bits/s each).
std::vector<double> clwrr_user_throughput(const McsTable& table, const Cluster& c,
                                          double weight, const FrameBudget& fb);

// Probability that a member is the serving head of a given frame.
// Sums to `weight` over the cluster.
std::vector<double> clwrr_head_probability(const McsTable& table, const Cluster& c,
                                           double weight);

// Rate each member handles as head (bits/s); sums to the cluster throughput.
std::vector<double> clwrr_relay_rate(const McsTable& table, const Cluster& c,
                                     double weight, const FrameBudget& fb);

// ---- max-rate cluster scheduler ----
// Every frame goes to the cluster containing the instantaneously best user.

double clmr_cluster_throughput(const McsTable& table, const ClusterPartition& p,
                               std::size_t cluster_index, const FrameBudget& fb);

std::vector<double> clmr_user_throughput(const McsTable& table, const ClusterPartition& p,
                                         std::size_t cluster_index, const FrameBudget& fb);

// Probability that a member of the given cluster is the system-wide best
// user of a frame. Sums to one over all users of the partition.
std::vector<double> clmr_head_probability(const McsTable& table, const ClusterPartition& p,
                                          std::size_t cluster_index);

std::vector<double> clmr_relay_rate(const McsTable& table, const ClusterPartition& p,
                                    std::size_t cluster_index, const FrameBudget& fb);

// Aggregate throughput of a plain max-rate scheduler over all users pooled
// together (bits/s). Equals the sum of clmr_cluster_throughput over any
// partition of the same users.
double maxrate_system_throughput(const McsTable& table, const std::vector<UserChannel>& users,
                                 const FrameBudget& fb);

// Fluid model of proportional-fair scheduling among n statistically
// identical-in-shape Rayleigh users: each user is served when its own fading
// quantile is the best of n, i.e. with probability 1/n and with its SNR drawn
// from the best of n of its own fading realizations. Exact for n = 1.
double pf_user_throughput(const McsTable& table, const UserChannel& u, std::size_t n_users,
                          const FrameBudget& fb);

}  // namespace d2dlab
