#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "d2dlab/mcs.hpp"
#include "d2dlab/modeselect.hpp"
#include "d2dlab/rng.hpp"
#include "doctest.h"

using namespace d2dlab;

namespace {

double dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

double gain(const PathLossModel& m, double d) {
  return std::pow(10.0, -pathloss_db(m, d) / 10.0);
}

// Scenario with `n_cell` uplink users on the cell edge and `n_pairs` direct
// pairs scattered near the center, far enough from the edge that underlay
// stays an option. Interference uses seeded shadowing.
ModeSelectContext make_scenario(std::size_t n_cell, std::size_t n_pairs, std::uint64_t seed) {
  ModeSelectContext ctx;
  Rng rng(seed);
  for (std::size_t c = 0; c < n_cell; ++c) {
    const double angle = 2.0 * 3.14159265358979 * rng.uniform();
    const double radius = 280.0 + 80.0 * rng.uniform();
    ctx.positions.push_back({radius * std::cos(angle), radius * std::sin(angle)});
    ctx.cellular.push_back(static_cast<int>(ctx.positions.size()) - 1);
  }
  for (std::size_t p = 0; p < n_pairs; ++p) {
    const double x = -50.0 + 100.0 * rng.uniform();
    const double y = -50.0 + 100.0 * rng.uniform();
    const double sep = 5.0 + 15.0 * rng.uniform();
    ctx.positions.push_back({x, y});
    ctx.positions.push_back({x + sep, y});
    const int tx = static_cast<int>(ctx.positions.size()) - 2;
    ctx.pairs.push_back({tx, tx + 1});
  }
  std::vector<std::array<double, 2>> nodes = ctx.positions;
  nodes.push_back(ctx.base_station);
  std::vector<double> power(nodes.size(), 0.0);
  for (int c : ctx.cellular) power[c] = ctx.params.cell_tx;
  for (const D2dPair& p : ctx.pairs) power[p.tx] = ctx.params.d2d_tx;
  ctx.interference = build_interference(nodes, power, ctx.pathloss, rng);
  return ctx;
}

// Constraint evaluator written straight off the five families, independent
// of the library's bookkeeping.
std::multiset<std::pair<int, int>> violations_oracle(const ModeSelectContext& ctx,
                                                     const ModeAssignment& asg) {
  std::multiset<std::pair<int, int>> out;
  const int bs = static_cast<int>(ctx.n_users());
  std::vector<int> rx_count(ctx.n_users(), 0), tx_count(ctx.n_users(), 0);
  for (const D2dPair& p : ctx.pairs) {
    ++tx_count[p.tx];
    ++rx_count[p.rx];
  }
  for (int c : ctx.cellular) ++tx_count[c];
  for (std::size_t u = 0; u < ctx.n_users(); ++u) {
    if (rx_count[u] > 1) out.insert({1, static_cast<int>(u)});
    if (tx_count[u] > 1) out.insert({2, static_cast<int>(u)});
  }
  std::vector<int> listeners = ctx.cellular;
  listeners.push_back(bs);
  for (int x : listeners) {
    double sum = 0.0;
    for (std::size_t q = 0; q < ctx.pairs.size(); ++q)
      if (asg.mode[q] == 1) sum += ctx.interference.at(ctx.pairs[q].tx, x);
    if (sum > ctx.params.gamma) out.insert({3, x});
  }
  for (std::size_t p = 0; p < ctx.pairs.size(); ++p) {
    const int rx = ctx.pairs[p].rx;
    if (asg.mode[p] == 1) {
      double sum = 0.0;
      for (int c : ctx.cellular) sum += ctx.interference.at(c, rx);
      for (std::size_t q = 0; q < ctx.pairs.size(); ++q)
        if (q != p && asg.mode[q] == 1) sum += ctx.interference.at(ctx.pairs[q].tx, rx);
      if (sum > ctx.params.gamma) out.insert({4, rx});
    }
    if (asg.mode[p] == 2) {
      double sum = 0.0;
      for (std::size_t q = 0; q < ctx.pairs.size(); ++q)
        if (q != p && asg.mode[q] == 2) sum += ctx.interference.at(ctx.pairs[q].tx, rx);
      if (sum > ctx.params.gamma) out.insert({5, rx});
    }
  }
  return out;
}

// Three mutually far pairs whose interference forms a directed cycle: each
// pair's receiver is jammed by exactly one other pair's transmitter. Chasing
// individual utility never settles.
ModeSelectContext make_oscillator() {
  ModeSelectContext ctx;
  ctx.positions = {{0.0, 0.0},    {0.0, 10.0},    {1000.0, 0.0},
                   {1000.0, 10.0}, {2000.0, 0.0}, {2000.0, 10.0}};
  ctx.base_station = {0.0, 1.0e6};
  ctx.pairs = {{0, 1}, {2, 3}, {4, 5}};
  ctx.params.gamma = 10.0;      // interference constraints never bind
  ctx.params.wifi_rate = 1.0;   // the unlicensed escape hatch is worthless
  ctx.interference.watts.assign(7, std::vector<double>(7, 0.0));
  ctx.interference.watts[0][3] = 1.0e-8;  // pair 0 jams pair 1
  ctx.interference.watts[2][5] = 1.0e-8;  // pair 1 jams pair 2
  ctx.interference.watts[4][1] = 1.0e-8;  // pair 2 jams pair 0
  return ctx;
}

double total_energy(const ModeSelectContext& ctx, const ModeAssignment& asg) {
  double sum = 0.0;
  for (int c : ctx.cellular) {
    const double bits = inband_throughput(ctx, {c, -1}, 0, asg);
    const double up = ctx.cellular.empty() ? 0.0 : 1.0;
    (void)up;
    // cellular airtime: equal share of the cellular band
    double overlay = 0.0;
    for (int m : asg.mode)
      if (m == 2) overlay = std::round(ctx.params.overlay_fraction * ctx.params.rb_per_subframe);
    const double cell_rbs = ctx.params.rb_per_subframe - overlay;
    const double share = cell_rbs / static_cast<double>(ctx.cellular.size());
    const double airtime = share / ctx.params.rb_per_subframe * ctx.params.mode_interval;
    sum += connection_energy(ctx.params, 0, bits, airtime);
  }
  for (std::size_t p = 0; p < ctx.pairs.size(); ++p) {
    const int mode = asg.mode[p];
    const double bits = pair_bits(ctx, p, mode, asg);
    double overlay = 0.0;
    std::size_t overlay_users = 0;
    for (int m : asg.mode)
      if (m == 2) ++overlay_users;
    if (overlay_users > 0)
      overlay = std::round(ctx.params.overlay_fraction * ctx.params.rb_per_subframe);
    const double cell_rbs = ctx.params.rb_per_subframe - overlay;
    double airtime = 0.0;
    if (mode == 1) airtime = cell_rbs / ctx.params.rb_per_subframe * ctx.params.mode_interval;
    if (mode == 2)
      airtime = overlay / static_cast<double>(overlay_users) / ctx.params.rb_per_subframe *
                ctx.params.mode_interval;
    sum += connection_energy(ctx.params, mode, bits, airtime);
  }
  return sum;
}

}  // namespace

TEST_CASE("pathloss model and interference table") {
  const PathLossModel model;
  CHECK(pathloss_db(model, 1.0) == doctest::Approx(34.0));
  CHECK(pathloss_db(model, 10.0) == doctest::Approx(34.0 + 35.0));
  CHECK(pathloss_db(model, 0.01) == doctest::Approx(34.0));  // clamped to reference

  const std::vector<std::array<double, 2>> nodes = {{0, 0}, {10, 0}, {30, 0}};
  const std::vector<double> power = {0.1, 0.2, 0.0};

  PathLossModel flat = model;
  flat.shadowing_sigma_db = 0.0;
  Rng rng(derive_seed(0x30de, 1));
  const InterferenceMatrix m = build_interference(nodes, power, flat, rng);
  REQUIRE(m.size() == 3);
  CHECK(m.at(0, 1) == doctest::Approx(0.1 * gain(flat, 10.0)).epsilon(1e-12));
  CHECK(m.at(1, 0) == doctest::Approx(0.2 * gain(flat, 10.0)).epsilon(1e-12));
  CHECK(m.at(0, 2) < m.at(0, 1));  // farther listener hears less
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(m.at(i, i) == 0.0);
    CHECK(m.at(2, i) == 0.0);  // silent node
  }

  Rng r1(derive_seed(0x30de, 2)), r2(derive_seed(0x30de, 2)), r3(derive_seed(0x30de, 3));
  const InterferenceMatrix a = build_interference(nodes, power, model, r1);
  const InterferenceMatrix b = build_interference(nodes, power, model, r2);
  const InterferenceMatrix c = build_interference(nodes, power, model, r3);
  CHECK(a.watts == b.watts);
  CHECK(a.watts != c.watts);

  Rng r4(1);
  CHECK_THROWS_AS(build_interference(nodes, {0.1}, model, r4), std::invalid_argument);
}

TEST_CASE("connection energy by mode") {
  const UtilityParams p;
  const double t = p.mode_interval;
  CHECK(connection_energy(p, 0, 0.0, 0.0) == doctest::Approx(p.beta_lte * t).epsilon(1e-12));
  CHECK(connection_energy(p, 1, 0.0, 0.0) ==
        doctest::Approx(2.0 * (p.beta_lte + p.beta_wifi_idle) * t).epsilon(1e-12));
  CHECK(connection_energy(p, 2, 0.0, 0.0) == connection_energy(p, 1, 0.0, 0.0));

  const double bits = 1.0e7;
  CHECK(connection_energy(p, 3, bits, 0.0) ==
        doctest::Approx(2.0 * (p.beta_lte + p.beta_wifi_active) * t +
                        (p.e3_tx + p.e3_rx) * bits)
            .epsilon(1e-12));
  CHECK(connection_energy(p, 3, 2.0 * bits, 0.0) > connection_energy(p, 3, bits, 0.0));
  CHECK(connection_energy(p, 0, 0.0, 1.0) ==
        doctest::Approx(p.beta_lte * t + p.p0_tx).epsilon(1e-12));
  CHECK_THROWS_AS(connection_energy(p, 7, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("clean channel fills the band at the top rate") {
  ModeSelectContext ctx;
  ctx.positions = {{0.0, 0.0}, {5.0, 0.0}};
  ctx.pairs = {{0, 1}};
  ctx.interference.watts.assign(3, std::vector<double>(3, 0.0));
  ModeAssignment asg{{1}};

  // close pair, no interferers, no overlay carve-out: the whole grid at the
  // highest level
  const double per_rb = ctx.table.max_rate() * ctx.params.symbols_per_rb;
  const double grid = ctx.params.rb_per_subframe * (ctx.params.mode_interval / ctx.params.subframe);
  CHECK(inband_throughput(ctx, ctx.pairs[0], 1, asg) ==
        doctest::Approx(grid * per_rb).epsilon(1e-12));

  // the same link stretched beyond decodability moves nothing
  ModeSelectContext far = ctx;
  far.positions[1] = {20000.0, 0.0};
  CHECK(inband_throughput(far, far.pairs[0], 1, asg) == 0.0);

  // an outband pair alone owns the nominal rate for the whole interval
  CHECK(outband_throughput(ctx, 0, ModeAssignment{{3}}) ==
        doctest::Approx(ctx.params.mode_interval * ctx.params.wifi_rate).epsilon(1e-12));
}

TEST_CASE("inband throughput follows the interference arithmetic") {
  ModeSelectContext ctx;
  ctx.positions = {{100.0, 0.0}, {50.0, 0.0}, {50.0, 10.0}, {60.0, 0.0}, {60.0, 10.0}};
  ctx.cellular = {0};
  ctx.pairs = {{1, 2}, {3, 4}};
  PathLossModel flat = ctx.pathloss;
  flat.shadowing_sigma_db = 0.0;
  ctx.pathloss = flat;
  std::vector<std::array<double, 2>> nodes = ctx.positions;
  nodes.push_back(ctx.base_station);
  std::vector<double> power(nodes.size(), 0.0);
  power[0] = ctx.params.cell_tx;
  power[1] = power[3] = ctx.params.d2d_tx;
  Rng rng(derive_seed(0x30de, 4));
  ctx.interference = build_interference(nodes, power, flat, rng);

  const ModeAssignment asg{{1, 1}};
  // receiver of the first pair hears the uplink user and the second pair
  const double signal = ctx.params.d2d_tx * gain(flat, 10.0);
  const double interf = ctx.params.cell_tx * gain(flat, dist(nodes[0], nodes[2])) +
                        ctx.params.d2d_tx * gain(flat, dist(nodes[3], nodes[2]));
  const double sinr = signal / (ctx.params.noise_power + interf);
  const double per_rb = ctx.table[ctx.table.level_for(sinr)].rate * ctx.params.symbols_per_rb;
  const double grid = ctx.params.rb_per_subframe * (ctx.params.mode_interval / ctx.params.subframe);
  CHECK(inband_throughput(ctx, ctx.pairs[0], 1, asg) ==
        doctest::Approx(grid * per_rb).epsilon(1e-9));

  // the uplink is slowed by underlay interference at the base station
  const double up_signal = ctx.params.cell_tx * gain(flat, 100.0);
  const double up_interf =
      ctx.params.d2d_tx * (gain(flat, dist(nodes[1], nodes[5])) + gain(flat, dist(nodes[3], nodes[5])));
  const double up_sinr = up_signal / (ctx.params.noise_power + up_interf);
  const double up_rb = ctx.table[ctx.table.level_for(up_sinr)].rate * ctx.params.symbols_per_rb;
  CHECK(inband_throughput(ctx, {0, -1}, 0, asg) ==
        doctest::Approx(grid * up_rb).epsilon(1e-9));

  // moving the second pair to the overlay removes its co-channel term and
  // shrinks the shared grid
  const ModeAssignment split{{1, 2}};
  const double lone_sinr =
      signal / (ctx.params.noise_power + ctx.params.cell_tx * gain(flat, dist(nodes[0], nodes[2])));
  const double lone_rb = ctx.table[ctx.table.level_for(lone_sinr)].rate * ctx.params.symbols_per_rb;
  const double cell_share = (ctx.params.rb_per_subframe -
                             std::round(ctx.params.overlay_fraction * ctx.params.rb_per_subframe)) *
                            (ctx.params.mode_interval / ctx.params.subframe);
  CHECK(inband_throughput(ctx, ctx.pairs[0], 1, split) ==
        doctest::Approx(cell_share * lone_rb).epsilon(1e-9));

  CHECK_THROWS_AS(inband_throughput(ctx, ctx.pairs[0], 3, asg), std::invalid_argument);
  CHECK_THROWS_AS(inband_throughput(ctx, ctx.pairs[0], 1, ModeAssignment{{1}}),
                  std::invalid_argument);
}

TEST_CASE("utility separates throughput and energy") {
  ModeSelectContext ctx = make_scenario(2, 2, derive_seed(0x30de, 5));
  const ModeAssignment asg{{3, 3}};

  ModeSelectContext free_energy = ctx;
  free_energy.params.alpha = 0.0;
  for (std::size_t p = 0; p < ctx.pairs.size(); ++p)
    CHECK(pair_utility(free_energy, p, 3, asg) ==
          doctest::Approx(pair_bits(free_energy, p, 3, asg)).epsilon(1e-12));

  ModeSelectContext dead_air = ctx;
  dead_air.params.wifi_rate = 0.0;
  const double bits = pair_bits(dead_air, 0, 3, asg);
  CHECK(bits == 0.0);
  CHECK(pair_utility(dead_air, 0, 3, asg) ==
        doctest::Approx(-dead_air.params.alpha * connection_energy(dead_air.params, 3, 0.0, 0.0))
            .epsilon(1e-12));
  CHECK(pair_utility(dead_air, 0, 3, asg) < 0.0);
}

TEST_CASE("feasibility check matches an independent evaluator") {
  // no direct pairs: nothing to violate
  ModeSelectContext empty = make_scenario(3, 0, derive_seed(0x30de, 6));
  CHECK(check_feasible(empty, ModeAssignment{}).ok);

  // a lone underlay transmitter shouting at the base station
  ModeSelectContext loud;
  loud.positions = {{0.0, 0.0}, {5.0, 0.0}};
  loud.pairs = {{0, 1}};
  loud.interference.watts.assign(3, std::vector<double>(3, 0.0));
  loud.interference.watts[0][2] = 1.0;  // way over tolerance at the base station
  const Feasibility f = check_feasible(loud, ModeAssignment{{1}});
  CHECK_FALSE(f.ok);
  REQUIRE(f.violations.size() == 1);
  CHECK(f.violations[0].family == 3);
  CHECK(f.violations[0].entity == 2);
  CHECK(check_feasible(loud, ModeAssignment{{2}}).ok);  // overlay dodges it

  // duplicated roles are structural violations
  ModeSelectContext dup;
  dup.positions = {{0.0, 0.0}, {5.0, 0.0}, {10.0, 0.0}};
  dup.pairs = {{0, 1}, {0, 2}};
  dup.interference.watts.assign(4, std::vector<double>(4, 0.0));
  const Feasibility fd = check_feasible(dup, ModeAssignment{{3, 3}});
  CHECK_FALSE(fd.ok);
  REQUIRE(fd.violations.size() == 1);
  CHECK(fd.violations[0].family == 2);
  CHECK(fd.violations[0].entity == 0);

  // randomized instances against the oracle, byte for byte
  Rng rng(derive_seed(0x30de, 7));
  for (int inst = 0; inst < 100; ++inst) {
    ModeSelectContext ctx = make_scenario(2 + rng.below(3), 3 + rng.below(3), rng.next_u64());
    ModeAssignment asg;
    for (std::size_t p = 0; p < ctx.pairs.size(); ++p)
      asg.mode.push_back(1 + static_cast<int>(rng.below(3)));
    const Feasibility got = check_feasible(ctx, asg);
    std::multiset<std::pair<int, int>> listed;
    for (const ConstraintViolation& v : got.violations) listed.insert({v.family, v.entity});
    CHECK(listed == violations_oracle(ctx, asg));
    CHECK(got.ok == listed.empty());
  }
}

TEST_CASE("exhaustive search dominates and is deterministic") {
  // one pair: the optimum is the best of its three modes
  ModeSelectContext one = make_scenario(2, 1, derive_seed(0x30de, 8));
  const SearchResult best = brute_force_optimal(one);
  double by_hand = -1.0e300;
  for (int j = 1; j <= 3; ++j) {
    const ModeAssignment asg{{j}};
    if (!check_feasible(one, asg).ok) continue;
    by_hand = std::max(by_hand, system_utility(one, asg));
  }
  CHECK(best.u_sum == doctest::Approx(by_hand).epsilon(1e-12));
  CHECK(check_feasible(one, best.assignment).ok);

  // rerun equality: the search is a pure function of the context
  const SearchResult again = brute_force_optimal(one);
  CHECK(again.assignment.mode == best.assignment.mode);

  // structurally broken instances have no feasible assignment at all
  ModeSelectContext broken;
  broken.positions = {{0.0, 0.0}, {5.0, 0.0}, {10.0, 0.0}};
  broken.pairs = {{0, 1}, {0, 2}};
  broken.interference.watts.assign(4, std::vector<double>(4, 0.0));
  CHECK_THROWS_AS(brute_force_optimal(broken), std::runtime_error);

  ModeSelectContext big = make_scenario(1, 9, derive_seed(0x30de, 9));
  CHECK_THROWS_AS(brute_force_optimal(big), std::invalid_argument);
}

TEST_CASE("heuristics stay feasible and below the optimum") {
  Rng seeds(derive_seed(0x30de, 10));
  for (int inst = 0; inst < 30; ++inst) {
    ModeSelectContext ctx = make_scenario(3, 4, seeds.next_u64());
    const SearchResult optimal = brute_force_optimal(ctx);
    Rng r1(seeds.next_u64()), r2(seeds.next_u64());
    const SearchResult social = heuristic_social(ctx, r1);
    const SearchResult greedy = heuristic_greedy(ctx, r2);
    const SearchResult ranked = heuristic_ranked(ctx);
    const double slack = 1.0e-9 * std::fabs(optimal.u_sum);
    for (const SearchResult* h : {&social, &greedy, &ranked}) {
      CHECK(h->u_sum <= optimal.u_sum + slack);
      CHECK(check_feasible(ctx, h->assignment).ok);
      CHECK(h->iterations >= 1);
      REQUIRE(!h->trace.empty());
    }
    // the aggregate objective never worsens across the social sweeps
    for (std::size_t i = 1; i < social.trace.size(); ++i)
      CHECK(social.trace[i] >= social.trace[i - 1] - slack);
  }
}

TEST_CASE("huge energy cost turns the search into energy minimization") {
  ModeSelectContext ctx = make_scenario(2, 3, derive_seed(0x30de, 11));
  ctx.params.alpha = 1.0e12;
  const SearchResult thrifty = brute_force_optimal(ctx);

  double min_energy = 1.0e300;
  ModeAssignment asg;
  asg.mode.assign(ctx.pairs.size(), 1);
  for (;;) {
    if (check_feasible(ctx, asg).ok) min_energy = std::min(min_energy, total_energy(ctx, asg));
    std::size_t i = asg.mode.size();
    while (i > 0 && asg.mode[i - 1] == 3) asg.mode[--i] = 1;
    if (i == 0) break;
    ++asg.mode[i - 1];
  }
  CHECK(total_energy(ctx, thrifty.assignment) == doctest::Approx(min_energy).epsilon(1e-9));
}

TEST_CASE("scaling every utility preserves the chosen assignments") {
  ModeSelectContext ctx = make_scenario(3, 4, derive_seed(0x30de, 12));
  ModeSelectContext scaled = ctx;
  scaled.params.symbols_per_rb *= 2;  // doubles every inband bit count
  scaled.params.wifi_rate *= 2.0;     // and the outband one
  scaled.params.beta_lte *= 2.0;      // doubles every energy term in step
  scaled.params.beta_wifi_idle *= 2.0;
  scaled.params.beta_wifi_active *= 2.0;
  scaled.params.p0_tx *= 2.0;
  scaled.params.pi_tx *= 2.0;
  scaled.params.pi_rx *= 2.0;
  // the per-bit outband cost rides on already-doubled bits, so it stays

  const std::uint64_t seed = derive_seed(0x30de, 13);
  Rng a1(seed), a2(seed);
  CHECK(heuristic_social(ctx, a1).assignment.mode ==
        heuristic_social(scaled, a2).assignment.mode);
  Rng b1(seed), b2(seed);
  CHECK(heuristic_greedy(ctx, b1).assignment.mode ==
        heuristic_greedy(scaled, b2).assignment.mode);
  CHECK(heuristic_ranked(ctx).assignment.mode == heuristic_ranked(scaled).assignment.mode);
  CHECK(brute_force_optimal(ctx).assignment.mode ==
        brute_force_optimal(scaled).assignment.mode);
  CHECK(brute_force_optimal(scaled).u_sum ==
        doctest::Approx(2.0 * brute_force_optimal(ctx).u_sum).epsilon(1e-9));
}

TEST_CASE("self-interested sweeps terminate on a cyclic instance") {
  const ModeSelectContext ctx = make_oscillator();

  // identical isolated scores keep the ranked order at 0,1,2; chasing the
  // jam-free band then flips every pair each sweep until a state repeats
  const SearchResult ranked = heuristic_ranked(ctx);
  CHECK(ranked.iterations == 3);
  CHECK(ranked.assignment.mode == std::vector<int>{1, 2, 1});
  CHECK(check_feasible(ctx, ranked.assignment).ok);

  // any sweep order cycles the same way by symmetry; the visited-state set
  // bounds the loop regardless
  for (std::uint64_t s = 1; s <= 5; ++s) {
    Rng rng(derive_seed(0x30de, 14 + s));
    const SearchResult greedy = heuristic_greedy(ctx, rng);
    CHECK(greedy.trace.size() <= 28);
    CHECK(check_feasible(ctx, greedy.assignment).ok);
  }

  // the aggregate objective has no cycle to chase
  Rng rng(derive_seed(0x30de, 20));
  const SearchResult social = heuristic_social(ctx, rng);
  CHECK(check_feasible(ctx, social.assignment).ok);
  for (std::size_t i = 1; i < social.trace.size(); ++i)
    CHECK(social.trace[i] >= social.trace[i - 1]);
}

TEST_CASE("ranked converges in fewer sweeps on average") {
  Rng seeds(derive_seed(0x30de, 21));
  double social_sum = 0.0, greedy_sum = 0.0, ranked_sum = 0.0;
  const int instances = 40;
  for (int inst = 0; inst < instances; ++inst) {
    ModeSelectContext ctx = make_scenario(3, 5, seeds.next_u64());
    Rng r1(seeds.next_u64()), r2(seeds.next_u64());
    social_sum += static_cast<double>(heuristic_social(ctx, r1).iterations);
    greedy_sum += static_cast<double>(heuristic_greedy(ctx, r2).iterations);
    ranked_sum += static_cast<double>(heuristic_ranked(ctx).iterations);
  }
  CHECK(ranked_sum <= social_sum);
  CHECK(ranked_sum <= greedy_sum);
  CHECK(social_sum / instances >= 1.0);
  CHECK(social_sum / instances <= 5.0);
}

TEST_CASE("empty pair lists degrade to the cellular-only system") {
  ModeSelectContext ctx = make_scenario(3, 0, derive_seed(0x30de, 22));
  const SearchResult best = brute_force_optimal(ctx);
  CHECK(best.assignment.mode.empty());
  double cellular_only = 0.0;
  for (int c : ctx.cellular) cellular_only += cellular_utility(ctx, c, ModeAssignment{});
  CHECK(best.u_sum == doctest::Approx(cellular_only).epsilon(1e-12));
  Rng rng(derive_seed(0x30de, 23));
  CHECK(heuristic_social(ctx, rng).u_sum == doctest::Approx(cellular_only).epsilon(1e-12));
}
