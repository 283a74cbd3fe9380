#include "d2dlab/channel.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace d2dlab {

double snr_cdf(const UserChannel& u, double z) {
  if (z <= 0.0) return 0.0;
  return -std::expm1(-z / u.mean_snr);
}

double sample_snr(const UserChannel& u, Rng& rng) { return rng.exponential(u.mean_snr); }

namespace {

// Bucket probabilities for any entity whose SNR CDF we can evaluate.
template <typename Cdf>
std::vector<double> bucket_probs(const McsTable& table, Cdf&& cdf) {
  std::vector<double> p(table.size());
  double lo = 0.0;  // cdf at threshold of level 0 (= 0)
  for (std::size_t k = 0; k < table.size(); ++k) {
    const double hi = k + 1 < table.size() ? cdf(table[k + 1].threshold) : 1.0;
    p[k] = hi - lo;
    lo = hi;
  }
  return p;
}

}  // namespace

std::vector<double> mcs_probabilities(const McsTable& table, const UserChannel& u) {
  return bucket_probs(table, [&](double z) { return snr_cdf(u, z); });
}

double cluster_snr_cdf(const Cluster& c, double z) {
  double f = 1.0;
  for (const UserChannel& u : c) f *= snr_cdf(u, z);
  return f;
}

std::vector<double> cluster_mcs_probabilities(const McsTable& table, const Cluster& c) {
  return bucket_probs(table, [&](double z) { return cluster_snr_cdf(c, z); });
}

std::size_t ClusterPartition::user_count() const {
  std::size_t n = 0;
  for (const Cluster& c : clusters) n += c.size();
  return n;
}

void ClusterPartition::validate() const {
  std::set<int> seen;
  for (const Cluster& c : clusters) {
    if (c.empty()) throw std::invalid_argument("partition: empty cluster");
    for (const UserChannel& u : c) {
      if (u.mean_snr <= 0.0)
        throw std::invalid_argument("partition: user " + std::to_string(u.id) +
                                    " has non-positive mean SNR");
      if (!seen.insert(u.id).second)
        throw std::invalid_argument("partition: user " + std::to_string(u.id) +
                                    " appears more than once");
    }
  }
}

}  // namespace d2dlab
