#include "d2dlab/power.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace d2dlab {

void PowerParams::validate() const {
  const auto positive = [](double v) { return v > 0.0; };
  if (!positive(beta_lte) || !positive(beta_lte_idle) || !positive(beta_wifi) ||
      !positive(beta_wifi_idle))
    throw std::invalid_argument("power: interface baselines must be positive");
  if (beta_lte < beta_lte_idle) throw std::invalid_argument("power: beta_lte below its idle level");
  if (beta_wifi < beta_wifi_idle)
    throw std::invalid_argument("power: beta_wifi below its idle level");
  if (alpha_rx < 0.0 || zeta_tx < 0.0 || zeta_rx < 0.0 || kappa_tx < 0.0 || kappa_rx < 0.0)
    throw std::invalid_argument("power: rate coefficients must be nonnegative");
  if (!positive(packet_bits)) throw std::invalid_argument("power: packet_bits must be positive");
  if (!positive(wifi_rate)) throw std::invalid_argument("power: wifi_rate must be positive");
}

std::vector<double> traffic_shares(const std::vector<double>& user_throughput, bool* degenerate) {
  const double total = std::accumulate(user_throughput.begin(), user_throughput.end(), 0.0);
  if (degenerate) *degenerate = (total <= 0.0);
  if (total <= 0.0)
    return std::vector<double>(user_throughput.size(), 1.0 / user_throughput.size());
  std::vector<double> d(user_throughput.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = user_throughput[i] / total;
  return d;
}

double lte_power(const PowerParams& pp, double head_probability, double relay_rate) {
  return pp.beta_lte_idle + (pp.beta_lte - pp.beta_lte_idle) * head_probability +
         pp.alpha_rx * relay_rate;
}

WifiRates wifi_rates(double delta, double relay_rate, double cluster_throughput) {
  WifiRates wr;
  wr.tx = (1.0 - delta) * relay_rate;
  wr.rx = delta * (cluster_throughput - relay_rate);
  return wr;
}

double wifi_active_probability(const PowerParams& pp, const WifiRates& wr, bool* clamped) {
  const double p = (wr.tx + wr.rx) / pp.wifi_rate;
  if (clamped) *clamped = (p < 0.0 || p > 1.0);
  return std::clamp(p, 0.0, 1.0);
}

double wifi_power(const PowerParams& pp, const WifiRates& wr, double active_probability) {
  const double tau_tx = wr.tx / pp.wifi_rate;
  const double tau_rx = wr.rx / pp.wifi_rate;
  return pp.beta_wifi_idle + (pp.beta_wifi - pp.beta_wifi_idle) * active_probability +
         pp.zeta_tx * tau_tx + pp.zeta_rx * tau_rx + pp.kappa_tx * wr.tx / pp.packet_bits +
         pp.kappa_rx * wr.rx / pp.packet_bits;
}

double total_power(const PowerParams& pp, double head_probability, double relay_rate,
                   const WifiRates& wr, double active_probability) {
  return pp.beta_lte_idle + pp.beta_wifi_idle +
         (pp.beta_lte - pp.beta_lte_idle) * head_probability +
         (pp.beta_wifi - pp.beta_wifi_idle) * active_probability + pp.alpha_rx * relay_rate +
         (pp.zeta_tx + pp.kappa_tx * pp.wifi_rate / pp.packet_bits) * wr.tx / pp.wifi_rate +
         (pp.zeta_rx + pp.kappa_rx * pp.wifi_rate / pp.packet_bits) * wr.rx / pp.wifi_rate;
}

double energy_efficiency(double throughput, double total_watts) {
  if (total_watts <= 0.0) throw std::domain_error("energy_efficiency: non-positive power");
  return throughput / total_watts;
}

namespace {

ClusterPowerReport build_report(const std::vector<double>& throughput,
                                const std::vector<double>& head_prob,
                                const std::vector<double>& relay, const PowerParams& pp) {
  ClusterPowerReport rep;
  const double cluster_total = std::accumulate(throughput.begin(), throughput.end(), 0.0);
  const std::vector<double> delta = traffic_shares(throughput, &rep.degenerate);
  rep.members.resize(throughput.size());
  for (std::size_t i = 0; i < throughput.size(); ++i) {
    UserPowerBreakdown& m = rep.members[i];
    m.throughput = throughput[i];
    m.head_probability = head_prob[i];
    m.relay_rate = relay[i];
    m.delta = delta[i];
    m.wifi = wifi_rates(m.delta, m.relay_rate, cluster_total);
    m.wifi_active = wifi_active_probability(pp, m.wifi, &m.wifi_clamped);
    m.lte_watts = lte_power(pp, m.head_probability, m.relay_rate);
    m.wifi_watts = wifi_power(pp, m.wifi, m.wifi_active);
    m.total_watts = m.lte_watts + m.wifi_watts;
    m.bits_per_joule = energy_efficiency(m.throughput, m.total_watts);
  }
  return rep;
}

}  // namespace

ClusterPowerReport clwrr_power_report(const McsTable& table, const Cluster& c, double weight,
                                      const FrameBudget& fb, const PowerParams& pp) {
  pp.validate();
  return build_report(clwrr_user_throughput(table, c, weight, fb),
                      clwrr_head_probability(table, c, weight),
                      clwrr_relay_rate(table, c, weight, fb), pp);
}

ClusterPowerReport clmr_power_report(const McsTable& table, const ClusterPartition& p,
                                     std::size_t cluster_index, const FrameBudget& fb,
                                     const PowerParams& pp) {
  pp.validate();
  return build_report(clmr_user_throughput(table, p, cluster_index, fb),
                      clmr_head_probability(table, p, cluster_index),
                      clmr_relay_rate(table, p, cluster_index, fb), pp);
}

UserPowerBreakdown pf_baseline(const McsTable& table, const UserChannel& u, std::size_t n_users,
                               const FrameBudget& fb, const PowerParams& pp) {
  pp.validate();
  UserPowerBreakdown m;
  m.throughput = pf_user_throughput(table, u, n_users, fb);
  // The scheduler decision is opportunistic, so the radio cannot sleep between
  // grants the way a cluster member can between its cluster's deterministic turns.
  m.head_probability = 1.0;
  m.relay_rate = m.throughput;  // the user handles exactly its own traffic
  m.delta = 1.0;
  m.wifi = WifiRates{};  // both WiFi flows are zero for a lone user
  m.wifi_active = 0.0;
  m.lte_watts = lte_power(pp, m.head_probability, m.relay_rate);
  m.wifi_watts = wifi_power(pp, m.wifi, m.wifi_active);
  m.total_watts = m.lte_watts + m.wifi_watts;
  m.bits_per_joule = energy_efficiency(m.throughput, m.total_watts);
  return m;
}

}  // namespace d2dlab
