#include "d2dlab/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "d2dlab/quadrature.hpp"

namespace d2dlab {

namespace {

double entity_cdf(const Cluster& members, double z) { return cluster_snr_cdf(members, z); }

// Density of the best SNR among independent exponentials.
double entity_pdf(const Cluster& members, double z) {
  if (z <= 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t j = 0; j < members.size(); ++j) {
    double term = std::exp(-z / members[j].mean_snr) / members[j].mean_snr;
    for (std::size_t l = 0; l < members.size(); ++l)
      if (l != j) term *= snr_cdf(members[l], z);
    sum += term;
  }
  return sum;
}

double entity_level_prob(const McsTable& table, const Cluster& members, std::size_t k) {
  const double lo = entity_cdf(members, table[k].threshold);
  const double hi = k + 1 < table.size() ? entity_cdf(members, table.upper(k)) : 1.0;
  return hi - lo;
}

// Point beyond which the rivals' maximum has CDF above 1 - 1e-12.
double rival_saturation_point(const Cluster& rivals) {
  double gmax = 0.0;
  for (const UserChannel& u : rivals) gmax = std::max(gmax, u.mean_snr);
  // sum of tails <= m * exp(-z/gmax) <= 1e-12
  return gmax * (std::log(static_cast<double>(rivals.size())) + 12.0 * std::log(10.0));
}

Cluster other_members(const Cluster& c, std::size_t skip) {
  Cluster rest;
  rest.reserve(c.size() - 1);
  for (std::size_t j = 0; j < c.size(); ++j)
    if (j != skip) rest.push_back(c[j]);
  return rest;
}

Cluster users_outside(const ClusterPartition& p, std::size_t cluster_index) {
  Cluster rest;
  for (std::size_t n = 0; n < p.clusters.size(); ++n)
    if (n != cluster_index)
      rest.insert(rest.end(), p.clusters[n].begin(), p.clusters[n].end());
  return rest;
}

Cluster everyone_except(const ClusterPartition& p, std::size_t cluster_index, std::size_t member) {
  Cluster rest = users_outside(p, cluster_index);
  const Cluster& own = p.clusters[cluster_index];
  for (std::size_t j = 0; j < own.size(); ++j)
    if (j != member) rest.push_back(own[j]);
  return rest;
}

}  // namespace

double conditional_snr_cdf(const McsTable& table, const UserChannel& u, std::size_t level,
                           double z) {
  if (level >= table.size()) throw std::out_of_range("conditional_snr_cdf: bad level");
  const double lo = table[level].threshold;
  const double hi = table.upper(level);
  const double p = (std::isinf(hi) ? 1.0 : snr_cdf(u, hi)) - snr_cdf(u, lo);
  if (p <= 0.0)
    throw std::domain_error("conditional_snr_cdf: level " + std::to_string(level) +
                            " has zero probability for this user");
  if (z < lo) return 0.0;
  if (z >= hi) return 1.0;
  return (snr_cdf(u, z) - snr_cdf(u, lo)) / p;
}

double level_win_probability(const McsTable& table, const Cluster& x, std::size_t level,
                             const Cluster& rivals) {
  if (level >= table.size()) throw std::out_of_range("level_win_probability: bad level");
  if (rivals.empty()) return entity_level_prob(table, x, level);

  const double lo = table[level].threshold;
  double hi = table.upper(level);

  // Where the rivals' CDF is saturated the integrand collapses to the plain
  // density, so that part of the bucket contributes its exact probability.
  const double sat = rival_saturation_point(rivals);
  if (sat <= lo) return entity_level_prob(table, x, level);

  double tail = 0.0;
  if (std::isinf(hi) || hi > sat) {
    tail = (std::isinf(hi) ? 1.0 : entity_cdf(x, hi)) - entity_cdf(x, sat);
    hi = sat;
  }

  const auto integrand = [&](double z) { return entity_pdf(x, z) * entity_cdf(rivals, z); };
  const QuadResult q = integrate(integrand, lo, hi, 1e-8, 1e-15);
  return q.value + tail;
}

double mean_user_rate(const McsTable& table, const UserChannel& u, const FrameBudget& fb) {
  const std::vector<double> p = mcs_probabilities(table, u);
  double bits = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) bits += p[k] * table[k].rate;
  return bits * fb.symbol_rate();
}

double clwrr_cluster_throughput(const McsTable& table, const Cluster& c, double weight,
                                const FrameBudget& fb) {
  const std::vector<double> pi = cluster_mcs_probabilities(table, c);
  double bits = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) bits += pi[k] * table[k].rate;
  return weight * bits * fb.symbol_rate();
}

std::vector<double> clwrr_user_throughput(const McsTable& table, const Cluster& c, double weight,
                                          const FrameBudget& fb) {
  // Relayed traffic is split evenly inside the cluster.
  const double each = clwrr_cluster_throughput(table, c, weight, fb) / c.size();
  return std::vector<double>(c.size(), each);
}

std::vector<double> clwrr_head_probability(const McsTable& table, const Cluster& c,
                                           double weight) {
  std::vector<double> ph(c.size(), 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Cluster rest = other_members(c, i);
    Cluster self{c[i]};
    double win = 0.0;
    for (std::size_t k = 0; k < table.size(); ++k)
      win += level_win_probability(table, self, k, rest);
    ph[i] = weight * win;
  }
  return ph;
}

std::vector<double> clwrr_relay_rate(const McsTable& table, const Cluster& c, double weight,
                                     const FrameBudget& fb) {
  std::vector<double> r(c.size(), 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Cluster rest = other_members(c, i);
    Cluster self{c[i]};
    double bits = 0.0;
    for (std::size_t k = 0; k < table.size(); ++k)
      bits += table[k].rate * level_win_probability(table, self, k, rest);
    r[i] = weight * bits * fb.symbol_rate();
  }
  return r;
}

double clmr_cluster_throughput(const McsTable& table, const ClusterPartition& p,
                               std::size_t cluster_index, const FrameBudget& fb) {
  const Cluster& c = p.clusters.at(cluster_index);
  const Cluster rivals = users_outside(p, cluster_index);
  double bits = 0.0;
  for (std::size_t k = 0; k < table.size(); ++k)
    bits += table[k].rate * level_win_probability(table, c, k, rivals);
  return bits * fb.symbol_rate();
}

std::vector<double> clmr_user_throughput(const McsTable& table, const ClusterPartition& p,
                                         std::size_t cluster_index, const FrameBudget& fb) {
  const Cluster& c = p.clusters.at(cluster_index);
  const double each = clmr_cluster_throughput(table, p, cluster_index, fb) / c.size();
  return std::vector<double>(c.size(), each);
}

std::vector<double> clmr_head_probability(const McsTable& table, const ClusterPartition& p,
                                          std::size_t cluster_index) {
  const Cluster& c = p.clusters.at(cluster_index);
  std::vector<double> ph(c.size(), 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Cluster rivals = everyone_except(p, cluster_index, i);
    Cluster self{c[i]};
    double win = 0.0;
    for (std::size_t k = 0; k < table.size(); ++k)
      win += level_win_probability(table, self, k, rivals);
    ph[i] = win;
  }
  return ph;
}

std::vector<double> clmr_relay_rate(const McsTable& table, const ClusterPartition& p,
                                    std::size_t cluster_index, const FrameBudget& fb) {
  const Cluster& c = p.clusters.at(cluster_index);
  std::vector<double> r(c.size(), 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Cluster rivals = everyone_except(p, cluster_index, i);
    Cluster self{c[i]};
    double bits = 0.0;
    for (std::size_t k = 0; k < table.size(); ++k)
      bits += table[k].rate * level_win_probability(table, self, k, rivals);
    r[i] = bits * fb.symbol_rate();
  }
  return r;
}

double maxrate_system_throughput(const McsTable& table, const std::vector<UserChannel>& users,
                                 const FrameBudget& fb) {
  const std::vector<double> pi = cluster_mcs_probabilities(table, users);
  double bits = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) bits += pi[k] * table[k].rate;
  return bits * fb.symbol_rate();
}

double pf_user_throughput(const McsTable& table, const UserChannel& u, std::size_t n_users,
                          const FrameBudget& fb) {
  if (n_users == 0) throw std::invalid_argument("pf_user_throughput: no users");
  // CDF of the user's SNR on the frames it wins: best of n of its own draws.
  double bits = 0.0;
  double lo = 0.0;
  for (std::size_t k = 0; k < table.size(); ++k) {
    const double hi = k + 1 < table.size()
                          ? std::pow(snr_cdf(u, table.upper(k)), static_cast<double>(n_users))
                          : 1.0;
    bits += (hi - lo) * table[k].rate;
    lo = hi;
  }
  return bits * fb.symbol_rate() / static_cast<double>(n_users);
}

}  // namespace d2dlab
