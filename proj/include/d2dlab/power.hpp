#pragma once

#include <cstddef>
#include <vector>

#include "d2dlab/analytics.hpp"
#include "d2dlab/channel.hpp"

namespace d2dlab {

// Dual-radio consumption model of a clustered handset: the LTE interface
// carries traffic only while the user serves as cluster head, everything
// else moves over the local WiFi link. All values are SI (watts, joules,
// bits per second); the config layer converts from mW / Mb/s.
//
// The interface baselines follow published handset measurements; the
// airtime and per-packet coefficients are representative figures of the
// same studies. All of them are plain configuration.
struct PowerParams {
  double beta_lte = 1.28804;        // W while the LTE radio is active
  double beta_lte_idle = 0.5943;    // W while it idles
  double alpha_rx = 5.0e-9;         // W per bit/s handled on the LTE link
  double beta_wifi = 0.13286;       // W while the WiFi radio is active
  double beta_wifi_idle = 0.0772;   // W while it idles
  double zeta_tx = 1.28;            // W per unit of WiFi transmit airtime
  double zeta_rx = 0.94;            // W per unit of WiFi receive airtime
  double kappa_tx = 2.0e-5;         // J per transmitted packet
  double kappa_rx = 2.0e-5;         // J per received packet
  double packet_bits = 12000.0;     // payload size used for the per-packet terms
  double wifi_rate = 433e6;         // nominal WiFi link rate, bits/s

  void validate() const;  // throws std::invalid_argument
};

struct WifiRates {
  double tx = 0.0;  // bits/s forwarded to cluster mates
  double rx = 0.0;  // bits/s received from other heads
};

struct UserPowerBreakdown {
  double throughput = 0.0;        // bits/s delivered to this user
  double head_probability = 0.0;  // share of frames with the LTE radio active
  double relay_rate = 0.0;        // bits/s handled on the LTE link as head
  double delta = 0.0;             // own share of the cluster traffic
  WifiRates wifi;
  double wifi_active = 0.0;  // probability the WiFi radio is busy
  bool wifi_clamped = false; // true if the busy probability had to be cut at 1
  double lte_watts = 0.0;
  double wifi_watts = 0.0;
  double total_watts = 0.0;
  double bits_per_joule = 0.0;
};

struct ClusterPowerReport {
  std::vector<UserPowerBreakdown> members;
  bool degenerate = false;  // cluster throughput was zero; shares fell back to equal
};

// Own-traffic shares delta_i = T_i / sum_j T_j. A zero total marks the
// report degenerate and falls back to an equal split.
std::vector<double> traffic_shares(const std::vector<double>& user_throughput,
                                   bool* degenerate = nullptr);

double lte_power(const PowerParams& pp, double head_probability, double relay_rate);

// tx: the head forwards everything it relays except its own share.
// rx: the member's share of what the other heads relay.
WifiRates wifi_rates(double delta, double relay_rate, double cluster_throughput);

// Busy share of the WiFi radio; clamped into [0,1] with a flag because a
// slow WiFi link can be offered more traffic than it can carry.
double wifi_active_probability(const PowerParams& pp, const WifiRates& wr,
                               bool* clamped = nullptr);

double wifi_power(const PowerParams& pp, const WifiRates& wr, double active_probability);

// Direct evaluation of the full per-user draw. Identical (to rounding) to
// lte_power + wifi_power; both forms are kept so the decomposition can be
// asserted.
double total_power(const PowerParams& pp, double head_probability, double relay_rate,
                   const WifiRates& wr, double active_probability);

double energy_efficiency(double throughput, double total_watts);

// Full per-member reports for a cluster under either cluster scheduler.
ClusterPowerReport clwrr_power_report(const McsTable& table, const Cluster& c, double weight,
                                      const FrameBudget& fb, const PowerParams& pp);
ClusterPowerReport clmr_power_report(const McsTable& table, const ClusterPartition& p,
                                     std::size_t cluster_index, const FrameBudget& fb,
                                     const PowerParams& pp);

// Unclustered reference: the user rides proportional-fair scheduling alone
// among n_users, with the WiFi radio idle and the cellular radio always
// connected (grants are opportunistic, so it cannot plan sleep windows).
UserPowerBreakdown pf_baseline(const McsTable& table, const UserChannel& u, std::size_t n_users,
                               const FrameBudget& fb, const PowerParams& pp);

}  // namespace d2dlab
