#pragma once

#include <vector>

#include "d2dlab/mcs.hpp"
#include "d2dlab/rng.hpp"

namespace d2dlab {

// Rayleigh-faded link: the instantaneous SNR is exponentially distributed
// around the user's mean. All SNR values here are linear.
struct UserChannel {
  int id = 0;
  double mean_snr = 1.0;
};

using Cluster = std::vector<UserChannel>;

// P(instantaneous SNR <= z)
double snr_cdf(const UserChannel& u, double z);

// Inverse-CDF draw of one instantaneous SNR value.
double sample_snr(const UserChannel& u, Rng& rng);

// Probability of each MCS level for one user. Sums to one.
std::vector<double> mcs_probabilities(const McsTable& table, const UserChannel& u);

// CDF of the best SNR among cluster members (they fade independently, so the
// CDF is the product of the members' CDFs).
double cluster_snr_cdf(const Cluster& c, double z);

// Probability of each MCS level for the cluster (best member counts).
std::vector<double> cluster_mcs_probabilities(const McsTable& table, const Cluster& c);

// Disjoint grouping of the cell's users into relay clusters.
struct ClusterPartition {
  std::vector<Cluster> clusters;

  std::size_t user_count() const;
  // Throws std::invalid_argument on empty clusters or duplicate user ids.
  void validate() const;
};

}  // namespace d2dlab
