#include "d2dlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "d2dlab/analytics.hpp"
#include "d2dlab/csv.hpp"
#include "d2dlab/power.hpp"
#include "d2dlab/rng.hpp"
#include "d2dlab/simkit.hpp"
#include "d2dlab/tiebreak.hpp"

namespace d2dlab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Sink {
  const ExperimentConfig& cfg;
  fs::path dir;
  std::string hash;
  std::vector<std::string> written;

  CsvFile open(const std::string& name, const std::string& family,
               const std::vector<std::string>& columns) {
    const fs::path p = dir / name;
    written.push_back(p.string());
    return CsvFile(p.string(), "d2dlab." + family + " " + kSchemaVersion, columns, hash,
                   cfg.scenario.seed);
  }
};

std::vector<Cluster> connections_of(const ScenarioConfig& sc) {
  std::vector<Cluster> conns;
  if (sc.partition.empty()) {
    for (const UserChannel& u : sc.users) conns.push_back({u});
  } else {
    for (const std::vector<int>& cell : sc.partition) {
      Cluster c;
      for (int u : cell) c.push_back(sc.users[u]);
      conns.push_back(std::move(c));
    }
  }
  return conns;
}

std::vector<ConnectionProfile> profiles_of(const ScenarioConfig& sc,
                                           const std::vector<Cluster>& conns) {
  std::vector<ConnectionProfile> profiles;
  for (const Cluster& c : conns) profiles.push_back(ConnectionProfile::for_cluster(sc.table, c));
  return profiles;
}

// The maxrate_wrr tie weights named by rule in the config are materialized
// here, from the same connection profiles the scheduler rides on.
std::vector<double> resolve_tie_weights(const ExperimentConfig& cfg) {
  const ScenarioConfig& sc = cfg.scenario;
  if (sc.scheduler != SchedulerId::MaxRateWrr) return sc.tie_weights;
  if (cfg.tie_rule == "uniform" || cfg.tie_rule == "explicit") return sc.tie_weights;
  const std::vector<Cluster> conns = connections_of(sc);
  const std::vector<ConnectionProfile> profiles = profiles_of(sc, conns);
  const std::vector<double> rates = level_rates(sc.table, sc.budget.symbol_rate());
  return cfg.tie_rule == "fish" ? fish_weights(profiles, rates).alpha
                                : pike_weights(profiles, rates).alpha;
}

// Replication r runs under derive_seed(seed, r); replications execute in
// parallel and are collected in order, keeping the CSV bodies byte-stable.
std::vector<SimReport> run_replicated(const ExperimentConfig& cfg) {
  ScenarioConfig base = cfg.scenario;
  base.tie_weights = resolve_tie_weights(cfg);
  std::vector<std::future<SimReport>> futures;
  for (std::size_t r = 0; r < cfg.replications; ++r) {
    ScenarioConfig scr = base;
    scr.seed = derive_seed(base.seed, r);
    futures.push_back(std::async(std::launch::async, [scr] { return run(scr); }));
  }
  std::vector<SimReport> reports;
  for (auto& f : futures) reports.push_back(f.get());
  return reports;
}

void run_analytics(Sink& s) {
  const ScenarioConfig& sc = s.cfg.scenario;
  const std::vector<Cluster> conns = connections_of(sc);
  const ClusterPartition part{conns};
  const double total_users = static_cast<double>(sc.users.size());

  CsvFile users =
      s.open("users.csv", "analytics.users",
             {"cluster", "user", "mean_snr_db", "throughput_bps", "head_probability",
              "relay_rate_bps", "lte_watts", "wifi_watts", "total_watts", "bits_per_joule"});
  CsvFile clusters = s.open("clusters.csv", "analytics.clusters",
                            {"cluster", "size", "served_share", "throughput_bps"});
  CsvFile system =
      s.open("system.csv", "analytics.system", {"aggregate_bps", "user_jain", "cluster_jain"});

  std::vector<double> per_user, per_cluster;
  for (std::size_t ci = 0; ci < conns.size(); ++ci) {
    const Cluster& c = conns[ci];
    const ClusterPowerReport rep =
        sc.scheduler == SchedulerId::ClusterWrr
            ? clwrr_power_report(sc.table, c, static_cast<double>(c.size()) / total_users,
                                 sc.budget, sc.power)
            : clmr_power_report(sc.table, part, ci, sc.budget, sc.power);
    double cluster_tput = 0.0;
    double served_share = 0.0;
    for (std::size_t mi = 0; mi < rep.members.size(); ++mi) {
      const UserPowerBreakdown& m = rep.members[mi];
      users.row({format_uint(ci), format_int(c[mi].id),
                 format_double(linear_to_db(c[mi].mean_snr)), format_double(m.throughput),
                 format_double(m.head_probability), format_double(m.relay_rate),
                 format_double(m.lte_watts), format_double(m.wifi_watts),
                 format_double(m.total_watts), format_double(m.bits_per_joule)});
      per_user.push_back(m.throughput);
      cluster_tput += m.throughput;
      served_share += m.head_probability;
    }
    clusters.row({format_uint(ci), format_uint(c.size()), format_double(served_share),
                  format_double(cluster_tput)});
    per_cluster.push_back(cluster_tput);
  }
  const double aggregate = std::accumulate(per_user.begin(), per_user.end(), 0.0);
  system.row({format_double(aggregate), format_double(jain_index(per_user)),
              format_double(jain_index(per_cluster))});
}

void run_simulate(Sink& s) {
  const ScenarioConfig& sc = s.cfg.scenario;
  const std::vector<SimReport> reports = run_replicated(s.cfg);
  std::vector<std::size_t> cluster_size;
  if (sc.partition.empty()) {
    cluster_size.assign(sc.users.size(), 1);
  } else {
    for (const std::vector<int>& cell : sc.partition) cluster_size.push_back(cell.size());
  }

  CsvFile users = s.open(
      "users.csv", "simulate.users",
      {"rep",           "user",           "mean_snr_db",       "throughput_bps",
       "head_probability", "relay_rate_bps", "wifi_tx_bps",    "wifi_rx_bps",
       "lte_watts",     "wifi_watts",     "total_watts",       "bits_per_joule",
       "offered_packets", "delivered_packets", "dropped_packets", "mean_delay_s"});
  CsvFile clusters =
      s.open("clusters.csv", "simulate.clusters",
             {"rep", "cluster", "size", "throughput_bps", "served_frames", "wifi_load_bps"});
  CsvFile system = s.open(
      "system.csv", "simulate.system",
      {"rep",          "aggregate_bps", "delivery_ratio", "user_jain",    "cluster_jain",
       "mean_delay_s", "delay_cdf_1ms", "delay_cdf_10ms", "delay_p99_s",  "offered_bits",
       "delivered_bits", "queued_bits", "dropped_bits",   "duration_s"});

  for (std::size_t r = 0; r < reports.size(); ++r) {
    const SimReport& rep = reports[r];
    double aggregate = 0.0;
    for (std::size_t u = 0; u < rep.users.size(); ++u) {
      const UserStats& us = rep.users[u];
      users.row({format_uint(r), format_int(sc.users[u].id),
                 format_double(linear_to_db(sc.users[u].mean_snr)), format_double(us.throughput),
                 format_double(us.head_probability), format_double(us.relay_rate),
                 format_double(us.wifi.tx), format_double(us.wifi.rx),
                 format_double(us.lte_watts), format_double(us.wifi_watts),
                 format_double(us.total_watts), format_double(us.bits_per_joule),
                 format_uint(us.offered_packets), format_uint(us.delivered_packets),
                 format_uint(us.dropped_packets), format_double(us.mean_delay_s)});
      aggregate += us.throughput;
    }
    for (std::size_t ci = 0; ci < rep.clusters.size(); ++ci) {
      const ClusterStats& cs = rep.clusters[ci];
      clusters.row({format_uint(r), format_uint(ci), format_uint(cluster_size[ci]),
                    format_double(cs.throughput), format_uint(cs.served_frames),
                    format_double(cs.wifi_load)});
    }
    system.row({format_uint(r), format_double(aggregate), format_double(rep.delivery_ratio),
                format_double(rep.user_jain), format_double(rep.cluster_jain),
                format_double(rep.delay.mean()), format_double(rep.delay.cdf_at(1e-3)),
                format_double(rep.delay.cdf_at(1e-2)), format_double(rep.delay.quantile(0.99)),
                format_int(rep.offered_bits), format_int(rep.delivered_bits),
                format_int(rep.queued_bits), format_int(rep.dropped_bits),
                format_double(rep.duration_s)});
  }

  if (sc.record_trace && !reports.empty()) {
    CsvFile trace =
        s.open("trace.csv", "simulate.trace", {"frame", "primary", "level", "queued_bits"});
    for (const FrameRecord& fr : reports[0].trace)
      trace.row({format_uint(fr.frame), format_int(fr.primary), format_int(fr.level),
                 format_int(fr.queued_bits)});
  }
}

void run_tiebreak(Sink& s) {
  const ScenarioConfig& sc = s.cfg.scenario;
  const TieBreakSetup& tb = s.cfg.tiebreak;
  const std::vector<Cluster> conns = connections_of(sc);
  const std::vector<ConnectionProfile> profiles = profiles_of(sc, conns);
  const std::vector<double> rates = level_rates(sc.table, sc.budget.symbol_rate());
  const std::size_t n = conns.size();

  CsvFile weights = s.open("weights.csv", "tiebreak.weights",
                           {"rule", "connection", "weight", "no_tie_mass"});
  CsvFile throughput =
      s.open("throughput.csv", "tiebreak.throughput", {"rule", "connection", "expected_bps"});
  CsvFile system =
      s.open("system.csv", "tiebreak.system", {"rule", "aggregate_bps", "jain", "feasible"});

  const auto expected = [&](const std::vector<double>& w, std::size_t rule_idx) {
    if (n <= 15) return wrr_expected_throughput(w, profiles, rates);
    Rng rng(derive_seed(sc.seed, 7700 + rule_idx));
    return wrr_sampled_throughput(w, profiles, rates, 2000000, rng);
  };

  const auto leaf_order = [&]() {
    if (!tb.leaf_order.empty()) return tb.leaf_order;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (tb.mapping == "identity") return order;
    std::vector<GoodnessTriple> census;
    for (const Cluster& c : conns) {
      GoodnessTriple g;
      for (const UserChannel& u : c) {
        const double db = linear_to_db(u.mean_snr);
        if (std::abs(db - 23.0) <= 1e-9)
          ++g.good;
        else if (std::abs(db - 16.0) <= 1e-9)
          ++g.average;
        else
          ++g.poor;
      }
      census.push_back(g);
    }
    const LeafMappings lm = leaf_mappings(census);
    return tb.mapping == "lexicographic" ? lm.lexicographic : lm.alternating;
  };
  const TreeShape shape = tb.tree == "balanced" ? TreeShape::Balanced : TreeShape::LeftSpine;

  for (std::size_t ri = 0; ri < tb.rules.size(); ++ri) {
    const std::string& rule = tb.rules[ri];
    std::vector<double> w;
    std::vector<bool> no_mass(n, false);
    std::vector<double> tput;
    bool feasible = true;
    bool have_weights = true;

    if (rule == "uniform") {
      w.assign(n, 1.0 / static_cast<double>(n));
    } else if (rule == "fish" || rule == "pike") {
      const TieBreakWeights tw =
          rule == "fish" ? fish_weights(profiles, rates) : pike_weights(profiles, rates);
      w = tw.alpha;
      no_mass = tw.no_tie_mass;
    } else if (rule == "belf" || rule == "wolf") {
      const std::vector<int> order = leaf_order();
      const TieBreakWeights tw = rule == "belf"
                                     ? belf_weights(sc.table, conns, rates, order, shape)
                                     : wolf_weights(sc.table, conns, rates, order, shape);
      w = tw.alpha;
      no_mass = tw.no_tie_mass;
    } else if (rule == "lp") {
      const TieShareResult res = solve_tie_lp(profiles, rates);
      tput = res.throughput;
      feasible = res.feasible;
      have_weights = false;
    } else {  // maxfair, two connections enforced at parse
      const PairRates pr = pair_rates(profiles[0], profiles[1], rates);
      const MaxFairAlpha mf = maxfair_alpha(pr.win1, pr.win2, pr.tied);
      w = {mf.alpha, 1.0 - mf.alpha};
      feasible = mf.achievable;
    }

    if (have_weights) {
      tput = expected(w, ri);
      for (std::size_t i = 0; i < n; ++i)
        weights.row({rule, format_uint(i), format_double(w[i]),
                     format_uint(no_mass[i] ? 1 : 0)});
    }
    for (std::size_t i = 0; i < n; ++i)
      throughput.row({rule, format_uint(i), format_double(tput[i])});
    const double aggregate = std::accumulate(tput.begin(), tput.end(), 0.0);
    system.row({rule, format_double(aggregate), format_double(jain_index(tput)),
                format_uint(feasible ? 1 : 0)});
  }
}

// Context factory shared by the plain experiment and the sweep: geometry is
// fixed, the shadowing draw varies with `rep`.
ModeSelectContext modeselect_context(const ExperimentConfig& cfg, std::size_t rep) {
  const ModeSelectSetup& ms = cfg.modeselect;
  ModeSelectContext ctx;
  ctx.params = ms.params;
  ctx.pathloss = ms.pathloss;
  ctx.positions = ms.positions;
  ctx.base_station = ms.base_station;
  ctx.cellular = ms.cellular;
  ctx.pairs = ms.pairs;
  std::vector<std::array<double, 2>> nodes = ctx.positions;
  nodes.push_back(ctx.base_station);
  std::vector<double> tx(nodes.size(), 0.0);
  for (int u : ctx.cellular) tx[u] = ctx.params.cell_tx;
  for (const D2dPair& p : ctx.pairs) tx[p.tx] = ctx.params.d2d_tx;
  Rng geo(derive_seed(cfg.scenario.seed, 8800 + 131 * rep));
  ctx.interference = build_interference(nodes, tx, ctx.pathloss, geo);
  return ctx;
}

SearchResult run_method(const ModeSelectContext& ctx, const std::string& method,
                        std::uint64_t seed, std::size_t rep, std::size_t mi) {
  try {
    if (method == "brute") return brute_force_optimal(ctx);
    if (method == "ranked") return heuristic_ranked(ctx);
    Rng rng(derive_seed(seed, 8801 + 131 * rep + mi));
    return method == "social" ? heuristic_social(ctx, rng) : heuristic_greedy(ctx, rng);
  } catch (const std::exception& e) {
    throw std::runtime_error("modeselect " + method + ": " + e.what());
  }
}

void run_modeselect(Sink& s) {
  const ModeSelectSetup& ms = s.cfg.modeselect;
  const ModeSelectContext ctx = modeselect_context(s.cfg, 0);

  CsvFile assignments =
      s.open("assignments.csv", "modeselect.assignments", {"method", "pair", "tx", "rx", "mode"});
  CsvFile system = s.open("system.csv", "modeselect.system",
                          {"method", "utility", "iterations", "feasible"});

  for (std::size_t mi = 0; mi < ms.methods.size(); ++mi) {
    const std::string& method = ms.methods[mi];
    const SearchResult res = run_method(ctx, method, s.cfg.scenario.seed, 0, mi);
    for (std::size_t p = 0; p < ctx.pairs.size(); ++p)
      assignments.row({method, format_uint(p), format_int(ctx.pairs[p].tx),
                       format_int(ctx.pairs[p].rx), format_int(res.assignment.mode[p])});
    system.row({method, format_double(res.u_sum), format_uint(res.iterations),
                format_uint(check_feasible(ctx, res.assignment).ok ? 1 : 0)});
  }
}

void run_sweep(Sink& s) {
  const SweepSetup& sw = s.cfg.sweep;
  std::vector<std::string> cols;
  if (sw.target == "simulate")
    cols = {"value", "rep", "aggregate_bps", "delivery_ratio", "user_jain", "mean_delay_s"};
  else if (sw.target == "analytics")
    cols = {"value", "rep", "aggregate_bps", "user_jain"};
  else
    cols = {"value", "rep", "method", "utility", "iterations"};
  CsvFile out = s.open("sweep.csv", "sweep." + sw.target, cols);

  for (const std::string& literal : sw.values) {
    const ExperimentConfig sub = patch_config(
        s.cfg.source, {{sw.pointer, literal}, {"/experiment/id", json(sw.target).dump()}});

    if (sw.target == "simulate") {
      const std::vector<SimReport> reports = run_replicated(sub);
      for (std::size_t r = 0; r < reports.size(); ++r) {
        double aggregate = 0.0;
        for (const UserStats& us : reports[r].users) aggregate += us.throughput;
        out.row({literal, format_uint(r), format_double(aggregate),
                 format_double(reports[r].delivery_ratio), format_double(reports[r].user_jain),
                 format_double(reports[r].delay.mean())});
      }
    } else if (sw.target == "analytics") {
      const ScenarioConfig& sc = sub.scenario;
      const std::vector<Cluster> conns = connections_of(sc);
      const ClusterPartition part{conns};
      std::vector<double> per_user;
      for (std::size_t ci = 0; ci < conns.size(); ++ci) {
        const std::vector<double> ut =
            sc.scheduler == SchedulerId::ClusterWrr
                ? clwrr_user_throughput(
                      sc.table, conns[ci],
                      static_cast<double>(conns[ci].size()) / static_cast<double>(sc.users.size()),
                      sc.budget)
                : clmr_user_throughput(sc.table, part, ci, sc.budget);
        per_user.insert(per_user.end(), ut.begin(), ut.end());
      }
      const double aggregate = std::accumulate(per_user.begin(), per_user.end(), 0.0);
      out.row({literal, format_uint(0), format_double(aggregate),
               format_double(jain_index(per_user))});
    } else {
      for (std::size_t r = 0; r < sub.replications; ++r) {
        const ModeSelectContext ctx = modeselect_context(sub, r);
        for (std::size_t mi = 0; mi < sub.modeselect.methods.size(); ++mi) {
          const std::string& method = sub.modeselect.methods[mi];
          const SearchResult res = run_method(ctx, method, sub.scenario.seed, r, mi);
          out.row({literal, format_uint(r), method, format_double(res.u_sum),
                   format_uint(res.iterations)});
        }
      }
    }
  }
}

void write_manifest(Sink& s) {
  json m;
  m["config"] = json::parse(s.cfg.canonical);
  m["config_hash"] = s.hash;
  m["seed"] = s.cfg.scenario.seed;
  m["versions"] = {{"d2dlab", kToolVersion}, {"schema", kSchemaVersion}};
  const fs::path p = s.dir / "manifest.json";
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << m.dump(2) << "\n";
  s.written.push_back(p.string());
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

std::vector<std::string> run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  Sink s{cfg, fs::path(cfg.out_dir), hash_hex(cfg.hash), {}};
  std::error_code ec;
  fs::create_directories(s.dir, ec);
  if (cfg.id == "analytics")
    run_analytics(s);
  else if (cfg.id == "simulate")
    run_simulate(s);
  else if (cfg.id == "tiebreak")
    run_tiebreak(s);
  else if (cfg.id == "modeselect")
    run_modeselect(s);
  else
    run_sweep(s);
  write_manifest(s);
  for (const std::string& p : s.written) log << "wrote " << p << "\n";
  return s.written;
}

bool report_summary(const std::string& dir, std::ostream& out) {
  std::vector<fs::path> files;
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    for (fs::recursive_directory_iterator it(dir, ec), end; it != end; it.increment(ec)) {
      if (ec) break;
      if (it->is_regular_file() && it->path().extension() == ".csv") files.push_back(it->path());
    }
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.string() < b.string(); });

  std::size_t total_rows = 0;
  std::ostringstream digest;
  for (const fs::path& p : files) {
    std::ifstream in(p, std::ios::binary);
    if (!in) continue;
    std::string line;
    std::string schema;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.rfind("# schema: ", 0) == 0) {
        schema = line.substr(10);
        continue;
      }
      if (line.rfind("#", 0) == 0) continue;
      if (line.empty()) continue;
      if (header.empty())
        header = split_csv(line);
      else
        rows.push_back(split_csv(line));
    }
    fs::path rel = p.lexically_relative(dir);
    const std::string name = rel.empty() ? p.string() : rel.string();
    digest << name << ": " << rows.size() << (rows.size() == 1 ? " row" : " rows");
    if (!schema.empty()) digest << " (" << schema << ")";
    digest << "\n";
    total_rows += rows.size();
    if (rows.empty()) continue;

    for (std::size_t col = 0; col < header.size(); ++col) {
      std::vector<double> values;
      bool numeric = true;
      for (const std::vector<std::string>& r : rows) {
        double v = 0.0;
        if (col >= r.size() || !parse_number(r[col], v)) {
          numeric = false;
          break;
        }
        values.push_back(v);
      }
      if (!numeric) continue;
      const Summary su = summarize(values);
      digest << "  " << header[col] << ": mean " << format_double(su.mean);
      if (su.has_interval) digest << " +- " << format_double(su.half_width);
      digest << "\n";
    }
  }
  if (total_rows == 0) {
    out << "no data\n";
    return false;
  }
  out << digest.str();
  return true;
}

}  // namespace d2dlab
