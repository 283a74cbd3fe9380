#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "d2dlab/mcs.hpp"
#include "d2dlab/rng.hpp"

namespace d2dlab {

// Link modes: 0 = cellular uplink, 1 = underlay direct (shares the cellular
// band), 2 = overlay direct (dedicated band slice), 3 = outband direct
// (unlicensed spectrum, contention-based).
inline constexpr int kModeCellular = 0;
inline constexpr int kModeUnderlay = 1;
inline constexpr int kModeOverlay = 2;
inline constexpr int kModeOutband = 3;

// Log-distance pathloss with lognormal shadowing.
struct PathLossModel {
  double pl0_db = 34.0;       // loss at the reference distance
  double ref_distance = 1.0;  // m; shorter distances are clamped to it
  double exponent = 3.5;
  double shadowing_sigma_db = 6.0;
};

// Mean loss in dB at the given distance, shadowing excluded.
double pathloss_db(const PathLossModel& model, double distance);

// Received power (W) at every receiver from every transmitter. Row = sender,
// column = listener, the last index is the base station. Diagonal is zero.
struct InterferenceMatrix {
  std::vector<std::vector<double>> watts;

  std::size_t size() const { return watts.size(); }
  double at(std::size_t from, std::size_t to) const { return watts[from][to]; }
};

// One independent lognormal shadowing draw per ordered node pair. Entries
// with zero transmit power stay zero.
InterferenceMatrix build_interference(const std::vector<std::array<double, 2>>& positions,
                                      const std::vector<double>& tx_power,
                                      const PathLossModel& model, Rng& rng);

// Constants of the per-interval throughput/energy/utility model. Baseline
// beta values and the tx/rx draws are powers (W); outband per-bit costs are
// J/bit. Utility is bits minus alpha times Joules.
struct UtilityParams {
  double alpha = 1.0;            // relative cost of energy, bit/J
  double mode_interval = 2.0;    // s between mode decisions
  double overlay_fraction = 0.3; // band share carved out for overlay links

  double beta_lte = 1.28804;        // active cellular radio
  double beta_wifi_idle = 0.0772;   // second radio kept warm in inband modes
  double beta_wifi_active = 0.13286;

  double p0_tx = 1.28;  // cellular transmit draw, W
  double pi_tx = 1.28;  // direct-link transmit draw, W
  double pi_rx = 0.94;  // direct-link receive draw, W
  double e3_tx = 2.0e-8;  // outband energy per transmitted bit, J
  double e3_rx = 2.0e-8;  // outband energy per received bit, J

  double wifi_rate = 54.0e6;  // nominal outband link rate, b/s
  double wifi_range = 150.0;  // contention radius, m

  double noise_power = 7.94e-14;  // thermal noise over the uplink band, W
  double gamma = 1.0e-12;         // tolerable co-channel interference, W

  double cell_tx = 0.251;  // radiated uplink power, W
  double d2d_tx = 0.010;   // radiated direct-link power, W

  std::uint32_t rb_per_subframe = 100;
  double subframe = 1.0e-3;          // s
  std::uint32_t symbols_per_rb = 168;
};

struct D2dPair {
  int tx = 0;
  int rx = 0;
};

// Everything a mode decision can see: geometry, the fixed uplink users, the
// candidate direct pairs, and the measured interference table. The base
// station sits at index n_users() of the interference matrix.
struct ModeSelectContext {
  McsTable table = McsTable::lte_default();
  UtilityParams params;
  PathLossModel pathloss;
  std::vector<std::array<double, 2>> positions;
  std::array<double, 2> base_station = {0.0, 0.0};
  std::vector<int> cellular;    // users with a fixed uplink connection
  std::vector<D2dPair> pairs;   // direct-link candidates, modes 1..3
  InterferenceMatrix interference;

  std::size_t n_users() const { return positions.size(); }
};

// One mode per pair, each in {1, 2, 3}; uplink users are implicitly mode 0.
struct ModeAssignment {
  std::vector<int> mode;
};

// Bits moved in one mode interval over the licensed band. Mode 0 carries
// tx's uplink (rx is ignored); modes 1 and 2 carry the direct link tx->rx.
// The receiver sees the worst-case co-channel sum implied by the assignment.
// A signal below the lowest decodable threshold yields zero bits.
double inband_throughput(const ModeSelectContext& ctx, const D2dPair& link, int mode,
                         const ModeAssignment& assignment);

// Bits moved in one interval by pair p over the unlicensed band: the nominal
// rate split among the outband pairs within contention range of it.
double outband_throughput(const ModeSelectContext& ctx, std::size_t p,
                          const ModeAssignment& assignment);

// Joules drawn by one connection over a mode interval. Inband modes pay a
// per-interval radio baseline plus draw proportional to airtime; the outband
// mode pays both active radios plus a per-bit cost.
double connection_energy(const UtilityParams& params, int mode, double bits, double airtime);

// Bits and utility of one connection under a candidate mode, others fixed.
double pair_bits(const ModeSelectContext& ctx, std::size_t p, int mode,
                 const ModeAssignment& assignment);
double pair_utility(const ModeSelectContext& ctx, std::size_t p, int mode,
                    const ModeAssignment& assignment);
double cellular_utility(const ModeSelectContext& ctx, int user, const ModeAssignment& assignment);

// Aggregate utility of the uplink users plus every pair under the assignment.
double system_utility(const ModeSelectContext& ctx, const ModeAssignment& assignment);

// Constraint families: 1 destination uniqueness, 2 source uniqueness,
// 3 underlay interference at uplink receivers and the base station,
// 4 cellular+underlay interference at underlay receivers,
// 5 overlay-on-overlay interference. `entity` is the offended user index
// (n_users() for the base station).
struct ConstraintViolation {
  int family = 0;
  int entity = 0;
};

struct Feasibility {
  bool ok = true;
  std::vector<ConstraintViolation> violations;
};

Feasibility check_feasible(const ModeSelectContext& ctx, const ModeAssignment& assignment);

struct SearchResult {
  ModeAssignment assignment;
  double u_sum = 0.0;
  std::size_t iterations = 0;       // sweeps that changed something (min 1)
  std::vector<double> trace;        // aggregate utility after each sweep
};

// Exhaustive search over all mode combinations (pairs capped at 8), keeping
// the lexicographically first maximizer. Throws when no combination passes
// the feasibility check.
SearchResult brute_force_optimal(const ModeSelectContext& ctx);

// Sweep pairs in a randomized order; adopt the mode that most improves the
// aggregate utility, repeat until a full sweep changes nothing. Monotone in
// the aggregate, so it always terminates.
SearchResult heuristic_social(const ModeSelectContext& ctx, Rng& rng);

// Like the above but each pair maximizes its own utility. Self-interested
// sweeps can cycle, so the visited assignments are recorded and a repeat
// stops the loop.
SearchResult heuristic_greedy(const ModeSelectContext& ctx, Rng& rng);

// Ranks pairs by their isolated best-mode utility (descending), then runs
// the self-interested sweep in that fixed order.
SearchResult heuristic_ranked(const ModeSelectContext& ctx);

}  // namespace d2dlab
