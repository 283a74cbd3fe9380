#include "d2dlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace d2dlab {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw ConfigError(key + ": " + what);
}

std::string joined(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

void check_keys(const json& obj, const std::string& section,
                std::initializer_list<std::string_view> allowed) {
  for (const auto& el : obj.items()) {
    bool known = false;
    for (std::string_view k : allowed) known = known || el.key() == k;
    if (!known) bad(joined(section, el.key()), "unknown key");
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

json section_of(const json& root, const char* name) {
  const json* j = find(root, name);
  if (!j) return json::object();
  if (!j->is_object()) bad(name, "expected an object");
  return *j;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) bad(path, "expected a number");
  return v.get<double>();
}

std::uint64_t as_u64(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  bad(path, "expected a nonnegative integer");
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) bad(path, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) bad(path, "expected a string");
  return v.get<std::string>();
}

std::vector<int> as_int_array(const json& v, const std::string& path) {
  if (!v.is_array()) bad(path, "expected an array of integers");
  std::vector<int> out;
  for (const json& e : v) {
    if (!e.is_number_integer() && !e.is_number_unsigned())
      bad(path, "expected an array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

std::array<double, 2> as_point(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) bad(path, "expected [x, y]");
  return {as_number(v[0], path), as_number(v[1], path)};
}

// Scalar readers that also stamp the resolved value into the canonical form.
double num_field(const json& sec, const char* key, const std::string& section, double dflt,
                 json& canon) {
  double v = dflt;
  if (const json* j = find(sec, key)) v = as_number(*j, joined(section, key));
  canon[key] = v;
  return v;
}

std::uint64_t u64_field(const json& sec, const char* key, const std::string& section,
                        std::uint64_t dflt, json& canon) {
  std::uint64_t v = dflt;
  if (const json* j = find(sec, key)) v = as_u64(*j, joined(section, key));
  canon[key] = v;
  return v;
}

bool bool_field(const json& sec, const char* key, const std::string& section, bool dflt,
                json& canon) {
  bool v = dflt;
  if (const json* j = find(sec, key)) v = as_bool(*j, joined(section, key));
  canon[key] = v;
  return v;
}

std::string str_field(const json& sec, const char* key, const std::string& section,
                      const std::string& dflt, json& canon) {
  std::string v = dflt;
  if (const json* j = find(sec, key)) v = as_string(*j, joined(section, key));
  canon[key] = v;
  return v;
}

double class_snr_db(const std::string& name, const std::string& path) {
  if (name == "poor") return 7.0;
  if (name == "average") return 16.0;
  if (name == "good") return 23.0;
  bad(path, "unknown class '" + name + "' (poor|average|good)");
}

SchedulerId scheduler_from(const std::string& name, const std::string& path,
                           std::string& canonical_name) {
  if (name == "et" || name == "rr") {
    canonical_name = "et";
    return SchedulerId::EqualTime;
  }
  canonical_name = name;
  if (name == "pf") return SchedulerId::ProportionalFair;
  if (name == "mr") return SchedulerId::MaxRate;
  if (name == "maxrate_wrr") return SchedulerId::MaxRateWrr;
  if (name == "clwrr") return SchedulerId::ClusterWrr;
  if (name == "clmr") return SchedulerId::ClusterMaxRate;
  bad(path, "unknown scheduler '" + name + "' (et|rr|pf|mr|maxrate_wrr|clwrr|clmr)");
}

void parse_experiment(const json& root, ExperimentConfig& cfg, json& canon) {
  const json sec = section_of(root, "experiment");
  check_keys(sec, "experiment", {"id", "seed", "frames", "replications", "out"});
  json c = json::object();
  cfg.id = str_field(sec, "id", "experiment", "simulate", c);
  static const std::initializer_list<std::string_view> ids = {"analytics", "simulate", "tiebreak",
                                                              "modeselect", "sweep"};
  if (std::find(ids.begin(), ids.end(), cfg.id) == ids.end())
    bad("experiment.id", "unknown experiment '" + cfg.id +
                             "' (analytics|simulate|tiebreak|modeselect|sweep)");
  cfg.scenario.seed = u64_field(sec, "seed", "experiment", 1, c);
  cfg.scenario.frames = u64_field(sec, "frames", "experiment", 1000, c);
  if (cfg.scenario.frames < 1) bad("experiment.frames", "must be at least 1");
  cfg.replications = static_cast<std::size_t>(u64_field(sec, "replications", "experiment", 1, c));
  if (cfg.replications < 1) bad("experiment.replications", "must be at least 1");
  cfg.out_dir = str_field(sec, "out", "experiment", "results", c);
  canon["experiment"] = std::move(c);
}

void parse_channel(const json& root, ExperimentConfig& cfg, json& canon) {
  const json sec = section_of(root, "channel");
  check_keys(sec, "channel",
             {"users", "count", "classes", "cluster_sizes", "partition", "positions"});
  json c = json::object();

  std::vector<double> snr_db;
  if (const json* users = find(sec, "users")) {
    if (find(sec, "count")) bad("channel.count", "conflicts with users");
    if (find(sec, "classes")) bad("channel.classes", "conflicts with users");
    if (!users->is_array() || users->empty()) bad("channel.users", "expected a nonempty array");
    for (std::size_t i = 0; i < users->size(); ++i) {
      const std::string path = "channel.users[" + std::to_string(i) + "]";
      const json& entry = (*users)[i];
      if (!entry.is_object()) bad(path, "expected an object");
      check_keys(entry, path, {"snr_db", "class"});
      const json* s = find(entry, "snr_db");
      const json* k = find(entry, "class");
      if ((s != nullptr) == (k != nullptr)) bad(path, "give exactly one of snr_db or class");
      snr_db.push_back(s ? as_number(*s, path + ".snr_db")
                         : class_snr_db(as_string(*k, path + ".class"), path + ".class"));
    }
  } else {
    std::vector<std::string> classes = {"poor", "average", "good"};
    if (const json* cl = find(sec, "classes")) {
      if (!cl->is_array() || cl->empty()) bad("channel.classes", "expected a nonempty array");
      classes.clear();
      for (const json& e : *cl) classes.push_back(as_string(e, "channel.classes"));
    }
    std::uint64_t count = classes.size();
    if (const json* ct = find(sec, "count")) count = as_u64(*ct, "channel.count");
    if (count < 1) bad("channel.count", "must be at least 1");
    for (std::uint64_t i = 0; i < count; ++i)
      snr_db.push_back(class_snr_db(classes[i % classes.size()], "channel.classes"));
  }
  const std::size_t n = snr_db.size();
  json cu = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    cfg.scenario.users.push_back({static_cast<int>(i), db_to_linear(snr_db[i])});
    cu.push_back(json{{"snr_db", snr_db[i]}});
  }
  c["users"] = std::move(cu);

  if (const json* part = find(sec, "partition")) {
    if (find(sec, "cluster_sizes")) bad("channel.cluster_sizes", "conflicts with partition");
    if (!part->is_array()) bad("channel.partition", "expected an array of user-index arrays");
    for (const json& cell : *part)
      cfg.scenario.partition.push_back(as_int_array(cell, "channel.partition"));
  } else if (const json* sizes = find(sec, "cluster_sizes")) {
    const std::vector<int> sz = as_int_array(*sizes, "channel.cluster_sizes");
    if (sz.empty()) bad("channel.cluster_sizes", "expected a nonempty array");
    for (int s : sz)
      if (s < 1) bad("channel.cluster_sizes", "sizes must be at least 1");
    std::size_t next = 0;
    for (std::size_t k = 0; next < n; ++k) {
      const std::size_t take = std::min<std::size_t>(sz[k % sz.size()], n - next);
      std::vector<int> cell;
      for (std::size_t j = 0; j < take; ++j) cell.push_back(static_cast<int>(next++));
      cfg.scenario.partition.push_back(std::move(cell));
    }
  }
  if (!cfg.scenario.partition.empty()) {
    json cp = json::array();
    for (const std::vector<int>& cell : cfg.scenario.partition) cp.push_back(cell);
    c["partition"] = std::move(cp);
  }

  if (const json* pos = find(sec, "positions")) {
    if (!pos->is_array() || pos->size() != n)
      bad("channel.positions", "expected one [x, y] per user");
    json cpos = json::array();
    for (const json& e : *pos) {
      const std::array<double, 2> p = as_point(e, "channel.positions");
      cfg.scenario.positions.push_back(p);
      cpos.push_back(json{p[0], p[1]});
    }
    c["positions"] = std::move(cpos);
  }
  canon["channel"] = std::move(c);
}

void parse_simkit(const json& root, ExperimentConfig& cfg, json& canon) {
  const json sec = section_of(root, "simkit");
  check_keys(sec, "simkit",
             {"scheduler", "load_mbps", "buffer_packets", "packet_bits", "pf_time_constant",
              "tie_rule", "tie_weights", "delay_threshold_ms", "dore_smoothing",
              "d2d_hop_delay_ms", "trace", "symbols_per_frame", "frame_ms"});
  json c = json::object();
  ScenarioConfig& sc = cfg.scenario;
  const std::size_t n = sc.users.size();
  const std::size_t n_conn = sc.partition.empty() ? n : sc.partition.size();

  std::string sched = "et";
  if (const json* j = find(sec, "scheduler")) sched = as_string(*j, "simkit.scheduler");
  std::string canonical_name;
  sc.scheduler = scheduler_from(sched, "simkit.scheduler", canonical_name);
  c["scheduler"] = canonical_name;

  sc.budget.symbols_per_frame = num_field(sec, "symbols_per_frame", "simkit", 16800.0, c);
  if (!(sc.budget.symbols_per_frame > 0.0)) bad("simkit.symbols_per_frame", "must be positive");
  const double frame_ms = num_field(sec, "frame_ms", "simkit", 1.0, c);
  if (!(frame_ms > 0.0)) bad("simkit.frame_ms", "must be positive");
  sc.budget.frame_seconds = frame_ms * 1e-3;

  sc.buffer_packets = static_cast<std::size_t>(u64_field(sec, "buffer_packets", "simkit", 500, c));
  if (sc.buffer_packets < 1) bad("simkit.buffer_packets", "must be at least 1");
  sc.packet_bits = static_cast<std::int64_t>(u64_field(sec, "packet_bits", "simkit", 12000, c));
  if (sc.packet_bits < 1) bad("simkit.packet_bits", "must be at least 1");
  sc.pf_time_constant = num_field(sec, "pf_time_constant", "simkit", 1000.0, c);
  if (!(sc.pf_time_constant >= 1.0)) bad("simkit.pf_time_constant", "must be at least 1 frame");
  sc.dore_smoothing = num_field(sec, "dore_smoothing", "simkit", 0.1, c);
  if (!(sc.dore_smoothing > 0.0) || sc.dore_smoothing > 1.0)
    bad("simkit.dore_smoothing", "must lie in (0, 1]");
  const double hop_ms = num_field(sec, "d2d_hop_delay_ms", "simkit", 0.0, c);
  if (!(hop_ms >= 0.0)) bad("simkit.d2d_hop_delay_ms", "must be >= 0");
  sc.d2d_hop_delay_s = hop_ms * 1e-3;
  sc.record_trace = bool_field(sec, "trace", "simkit", false, c);

  cfg.tie_rule = str_field(sec, "tie_rule", "simkit", "uniform", c);
  if (cfg.tie_rule != "uniform" && cfg.tie_rule != "fish" && cfg.tie_rule != "pike" &&
      cfg.tie_rule != "explicit")
    bad("simkit.tie_rule", "unknown rule '" + cfg.tie_rule + "' (uniform|fish|pike|explicit)");
  if (cfg.tie_rule != "uniform" && sc.scheduler != SchedulerId::MaxRateWrr)
    bad("simkit.tie_rule", "only meaningful for scheduler 'maxrate_wrr'");
  if (const json* w = find(sec, "tie_weights")) {
    if (cfg.tie_rule != "explicit") bad("simkit.tie_weights", "requires tie_rule 'explicit'");
    if (!w->is_array() || w->size() != n_conn)
      bad("simkit.tie_weights", "expected one weight per connection");
    json cw = json::array();
    for (const json& e : *w) {
      const double v = as_number(e, "simkit.tie_weights");
      if (!(v >= 0.0)) bad("simkit.tie_weights", "weights must be >= 0");
      sc.tie_weights.push_back(v);
      cw.push_back(v);
    }
    c["tie_weights"] = std::move(cw);
  } else if (cfg.tie_rule == "explicit") {
    bad("simkit.tie_rule", "explicit needs tie_weights");
  }

  if (const json* load = find(sec, "load_mbps")) {
    std::vector<double> mbps;
    if (load->is_number()) {
      const double total = as_number(*load, "simkit.load_mbps");
      if (!(total >= 0.0)) bad("simkit.load_mbps", "must be >= 0");
      mbps.assign(n, total / static_cast<double>(n));
    } else if (load->is_array()) {
      if (load->size() != n) bad("simkit.load_mbps", "expected one rate per user");
      for (const json& e : *load) {
        const double v = as_number(e, "simkit.load_mbps");
        if (!(v >= 0.0)) bad("simkit.load_mbps", "rates must be >= 0");
        mbps.push_back(v);
      }
    } else {
      bad("simkit.load_mbps", "expected a total or a per-user array, in Mb/s");
    }
    json cl = json::array();
    for (double v : mbps) {
      sc.poisson_bps.push_back(v * 1e6);
      cl.push_back(v);
    }
    c["load_mbps"] = std::move(cl);
  }

  if (const json* th = find(sec, "delay_threshold_ms")) {
    std::vector<double> ms;
    if (th->is_number()) {
      ms.assign(n, as_number(*th, "simkit.delay_threshold_ms"));
    } else if (th->is_array()) {
      if (th->size() != n) bad("simkit.delay_threshold_ms", "expected one budget per user");
      for (const json& e : *th) ms.push_back(as_number(e, "simkit.delay_threshold_ms"));
    } else {
      bad("simkit.delay_threshold_ms", "expected a budget or a per-user array, in ms");
    }
    json ct = json::array();
    for (double v : ms) {
      if (!(v > 0.0)) bad("simkit.delay_threshold_ms", "budgets must be positive");
      sc.delay_threshold_s.push_back(v * 1e-3);
      ct.push_back(v);
    }
    c["delay_threshold_ms"] = std::move(ct);
  }
  canon["simkit"] = std::move(c);
}

void parse_power(const json& root, ExperimentConfig& cfg, json& canon) {
  const json sec = section_of(root, "power");
  check_keys(sec, "power",
             {"beta_lte_mw", "beta_lte_idle_mw", "alpha_rx_w_per_bps", "beta_wifi_mw",
              "beta_wifi_idle_mw", "zeta_tx_mw", "zeta_rx_mw", "kappa_tx_uj", "kappa_rx_uj",
              "packet_bits", "wifi_rate_mbps"});
  json c = json::object();
  const PowerParams d;
  PowerParams& pp = cfg.scenario.power;
  pp.beta_lte = num_field(sec, "beta_lte_mw", "power", d.beta_lte * 1e3, c) * 1e-3;
  pp.beta_lte_idle = num_field(sec, "beta_lte_idle_mw", "power", d.beta_lte_idle * 1e3, c) * 1e-3;
  pp.alpha_rx = num_field(sec, "alpha_rx_w_per_bps", "power", d.alpha_rx, c);
  pp.beta_wifi = num_field(sec, "beta_wifi_mw", "power", d.beta_wifi * 1e3, c) * 1e-3;
  pp.beta_wifi_idle =
      num_field(sec, "beta_wifi_idle_mw", "power", d.beta_wifi_idle * 1e3, c) * 1e-3;
  pp.zeta_tx = num_field(sec, "zeta_tx_mw", "power", d.zeta_tx * 1e3, c) * 1e-3;
  pp.zeta_rx = num_field(sec, "zeta_rx_mw", "power", d.zeta_rx * 1e3, c) * 1e-3;
  pp.kappa_tx = num_field(sec, "kappa_tx_uj", "power", d.kappa_tx * 1e6, c) * 1e-6;
  pp.kappa_rx = num_field(sec, "kappa_rx_uj", "power", d.kappa_rx * 1e6, c) * 1e-6;
  pp.packet_bits = num_field(sec, "packet_bits", "power", d.packet_bits, c);
  pp.wifi_rate = num_field(sec, "wifi_rate_mbps", "power", d.wifi_rate * 1e-6, c) * 1e6;
  canon["power"] = std::move(c);
}

void parse_tiebreak(const json& root, ExperimentConfig& cfg, json& canon) {
  const json sec = section_of(root, "tiebreak");
  check_keys(sec, "tiebreak", {"rules", "mapping", "leaf_order", "tree"});
  json c = json::object();
  TieBreakSetup& tb = cfg.tiebreak;

  if (const json* r = find(sec, "rules")) {
    if (!r->is_array() || r->empty()) bad("tiebreak.rules", "expected a nonempty array");
    tb.rules.clear();
    for (const json& e : *r) {
      const std::string name = as_string(e, "tiebreak.rules");
      static const std::initializer_list<std::string_view> known = {
          "uniform", "fish", "pike", "belf", "wolf", "lp", "maxfair"};
      if (std::find(known.begin(), known.end(), name) == known.end())
        bad("tiebreak.rules",
            "unknown rule '" + name + "' (uniform|fish|pike|belf|wolf|lp|maxfair)");
      if (std::find(tb.rules.begin(), tb.rules.end(), name) != tb.rules.end())
        bad("tiebreak.rules", "duplicate rule '" + name + "'");
      tb.rules.push_back(name);
    }
  }
  c["rules"] = tb.rules;

  tb.mapping = str_field(sec, "mapping", "tiebreak", "identity", c);
  if (tb.mapping != "identity" && tb.mapping != "lexicographic" && tb.mapping != "alternating")
    bad("tiebreak.mapping",
        "unknown mapping '" + tb.mapping + "' (identity|lexicographic|alternating)");
  tb.tree = str_field(sec, "tree", "tiebreak", "left_spine", c);
  if (tb.tree != "left_spine" && tb.tree != "balanced")
    bad("tiebreak.tree", "unknown shape '" + tb.tree + "' (left_spine|balanced)");

  if (const json* lo = find(sec, "leaf_order")) {
    if (tb.mapping != "identity") bad("tiebreak.leaf_order", "conflicts with mapping");
    tb.leaf_order = as_int_array(*lo, "tiebreak.leaf_order");
    const std::size_t n_conn =
        cfg.scenario.partition.empty() ? cfg.scenario.users.size() : cfg.scenario.partition.size();
    std::vector<bool> seen(n_conn, false);
    if (tb.leaf_order.size() != n_conn)
      bad("tiebreak.leaf_order", "expected one leaf per connection");
    for (int v : tb.leaf_order) {
      if (v < 0 || static_cast<std::size_t>(v) >= n_conn || seen[v])
        bad("tiebreak.leaf_order", "must be a permutation of the connection indexes");
      seen[v] = true;
    }
    c["leaf_order"] = tb.leaf_order;
  }
  canon["tiebreak"] = std::move(c);
}

void parse_modeselect(const json& root, ExperimentConfig& cfg, json& canon) {
  const json* secp = find(root, "modeselect");
  if (!secp) {
    if (cfg.id == "modeselect") bad("modeselect", "missing section");
    return;
  }
  if (!secp->is_object()) bad("modeselect", "expected an object");
  const json& sec = *secp;
  check_keys(sec, "modeselect",
             {"positions",      "base_station",     "cellular",         "pairs",
              "methods",        "alpha",            "mode_interval_s",  "overlay_fraction",
              "beta_lte_mw",    "beta_wifi_idle_mw", "beta_wifi_active_mw", "p0_tx_mw",
              "pi_tx_mw",       "pi_rx_mw",         "e3_tx_j_per_bit",  "e3_rx_j_per_bit",
              "wifi_rate_mbps", "wifi_range_m",     "noise_w",          "gamma_w",
              "cell_tx_mw",     "d2d_tx_mw",        "rb_per_subframe",  "subframe_ms",
              "symbols_per_rb", "pl0_db",           "ref_distance_m",   "pathloss_exponent",
              "shadowing_sigma_db"});
  json c = json::object();
  ModeSelectSetup& ms = cfg.modeselect;
  ms.present = true;

  const json* pos = find(sec, "positions");
  if (!pos || !pos->is_array() || pos->empty())
    bad("modeselect.positions", "expected a nonempty array of [x, y]");
  json cpos = json::array();
  for (const json& e : *pos) {
    const std::array<double, 2> p = as_point(e, "modeselect.positions");
    ms.positions.push_back(p);
    cpos.push_back(json{p[0], p[1]});
  }
  c["positions"] = std::move(cpos);
  const int n = static_cast<int>(ms.positions.size());

  if (const json* bs = find(sec, "base_station"))
    ms.base_station = as_point(*bs, "modeselect.base_station");
  c["base_station"] = json{ms.base_station[0], ms.base_station[1]};

  std::vector<bool> used(n, false);
  if (const json* cell = find(sec, "cellular")) {
    ms.cellular = as_int_array(*cell, "modeselect.cellular");
    for (int u : ms.cellular) {
      if (u < 0 || u >= n) bad("modeselect.cellular", "user index out of range");
      if (used[u]) bad("modeselect.cellular", "user " + std::to_string(u) + " listed twice");
      used[u] = true;
    }
  }
  c["cellular"] = ms.cellular;

  if (const json* pairs = find(sec, "pairs")) {
    if (!pairs->is_array()) bad("modeselect.pairs", "expected an array of [tx, rx]");
    for (const json& e : *pairs) {
      const std::vector<int> pr = as_int_array(e, "modeselect.pairs");
      if (pr.size() != 2) bad("modeselect.pairs", "expected [tx, rx] entries");
      for (int u : pr) {
        if (u < 0 || u >= n) bad("modeselect.pairs", "user index out of range");
        if (used[u])
          bad("modeselect.pairs", "user " + std::to_string(u) + " already has a role");
        used[u] = true;
      }
      if (pr[0] == pr[1]) bad("modeselect.pairs", "tx and rx must differ");
      ms.pairs.push_back({pr[0], pr[1]});
    }
  }
  json cpr = json::array();
  for (const D2dPair& p : ms.pairs) cpr.push_back(json{p.tx, p.rx});
  c["pairs"] = std::move(cpr);

  if (const json* m = find(sec, "methods")) {
    if (!m->is_array() || m->empty()) bad("modeselect.methods", "expected a nonempty array");
    for (const json& e : *m) {
      const std::string name = as_string(e, "modeselect.methods");
      static const std::initializer_list<std::string_view> known = {"social", "greedy", "ranked",
                                                                    "brute"};
      if (std::find(known.begin(), known.end(), name) == known.end())
        bad("modeselect.methods", "unknown method '" + name + "' (social|greedy|ranked|brute)");
      if (std::find(ms.methods.begin(), ms.methods.end(), name) != ms.methods.end())
        bad("modeselect.methods", "duplicate method '" + name + "'");
      ms.methods.push_back(name);
    }
  } else {
    ms.methods = {"social", "greedy", "ranked"};
    if (ms.pairs.size() <= 6) ms.methods.push_back("brute");
  }
  if (std::find(ms.methods.begin(), ms.methods.end(), "brute") != ms.methods.end() &&
      ms.pairs.size() > 8)
    bad("modeselect.methods", "brute supports at most 8 pairs");
  c["methods"] = ms.methods;

  const UtilityParams d;
  UtilityParams& up = ms.params;
  up.alpha = num_field(sec, "alpha", "modeselect", d.alpha, c);
  up.mode_interval = num_field(sec, "mode_interval_s", "modeselect", d.mode_interval, c);
  if (!(up.mode_interval > 0.0)) bad("modeselect.mode_interval_s", "must be positive");
  up.overlay_fraction = num_field(sec, "overlay_fraction", "modeselect", d.overlay_fraction, c);
  if (!(up.overlay_fraction >= 0.0) || up.overlay_fraction > 1.0)
    bad("modeselect.overlay_fraction", "must lie in [0, 1]");
  up.beta_lte = num_field(sec, "beta_lte_mw", "modeselect", d.beta_lte * 1e3, c) * 1e-3;
  up.beta_wifi_idle =
      num_field(sec, "beta_wifi_idle_mw", "modeselect", d.beta_wifi_idle * 1e3, c) * 1e-3;
  up.beta_wifi_active =
      num_field(sec, "beta_wifi_active_mw", "modeselect", d.beta_wifi_active * 1e3, c) * 1e-3;
  up.p0_tx = num_field(sec, "p0_tx_mw", "modeselect", d.p0_tx * 1e3, c) * 1e-3;
  up.pi_tx = num_field(sec, "pi_tx_mw", "modeselect", d.pi_tx * 1e3, c) * 1e-3;
  up.pi_rx = num_field(sec, "pi_rx_mw", "modeselect", d.pi_rx * 1e3, c) * 1e-3;
  up.e3_tx = num_field(sec, "e3_tx_j_per_bit", "modeselect", d.e3_tx, c);
  up.e3_rx = num_field(sec, "e3_rx_j_per_bit", "modeselect", d.e3_rx, c);
  up.wifi_rate = num_field(sec, "wifi_rate_mbps", "modeselect", d.wifi_rate * 1e-6, c) * 1e6;
  up.wifi_range = num_field(sec, "wifi_range_m", "modeselect", d.wifi_range, c);
  up.noise_power = num_field(sec, "noise_w", "modeselect", d.noise_power, c);
  if (!(up.noise_power > 0.0)) bad("modeselect.noise_w", "must be positive");
  up.gamma = num_field(sec, "gamma_w", "modeselect", d.gamma, c);
  if (!(up.gamma > 0.0)) bad("modeselect.gamma_w", "must be positive");
  up.cell_tx = num_field(sec, "cell_tx_mw", "modeselect", d.cell_tx * 1e3, c) * 1e-3;
  up.d2d_tx = num_field(sec, "d2d_tx_mw", "modeselect", d.d2d_tx * 1e3, c) * 1e-3;
  up.rb_per_subframe = static_cast<std::uint32_t>(
      u64_field(sec, "rb_per_subframe", "modeselect", d.rb_per_subframe, c));
  if (up.rb_per_subframe < 1) bad("modeselect.rb_per_subframe", "must be at least 1");
  up.subframe = num_field(sec, "subframe_ms", "modeselect", d.subframe * 1e3, c) * 1e-3;
  if (!(up.subframe > 0.0)) bad("modeselect.subframe_ms", "must be positive");
  up.symbols_per_rb = static_cast<std::uint32_t>(
      u64_field(sec, "symbols_per_rb", "modeselect", d.symbols_per_rb, c));
  if (up.symbols_per_rb < 1) bad("modeselect.symbols_per_rb", "must be at least 1");

  const PathLossModel pd;
  PathLossModel& pl = ms.pathloss;
  pl.pl0_db = num_field(sec, "pl0_db", "modeselect", pd.pl0_db, c);
  pl.ref_distance = num_field(sec, "ref_distance_m", "modeselect", pd.ref_distance, c);
  if (!(pl.ref_distance > 0.0)) bad("modeselect.ref_distance_m", "must be positive");
  pl.exponent = num_field(sec, "pathloss_exponent", "modeselect", pd.exponent, c);
  pl.shadowing_sigma_db =
      num_field(sec, "shadowing_sigma_db", "modeselect", pd.shadowing_sigma_db, c);
  if (!(pl.shadowing_sigma_db >= 0.0)) bad("modeselect.shadowing_sigma_db", "must be >= 0");

  canon["modeselect"] = std::move(c);
}

void parse_sweep(const json& root, ExperimentConfig& cfg, json& canon) {
  const json* secp = find(root, "sweep");
  if (!secp) {
    if (cfg.id == "sweep") bad("sweep", "missing section (sweep needs pointer and values)");
    return;
  }
  if (!secp->is_object()) bad("sweep", "expected an object");
  const json& sec = *secp;
  check_keys(sec, "sweep", {"pointer", "target", "values"});
  json c = json::object();
  SweepSetup& sw = cfg.sweep;
  sw.present = true;

  sw.pointer = str_field(sec, "pointer", "sweep", "", c);
  if (sw.pointer.empty() || sw.pointer[0] != '/')
    bad("sweep.pointer", "must be a JSON pointer like /simkit/load_mbps");
  sw.target = str_field(sec, "target", "sweep", "simulate", c);
  if (sw.target != "simulate" && sw.target != "analytics" && sw.target != "modeselect")
    bad("sweep.target", "unknown target '" + sw.target + "' (simulate|analytics|modeselect)");
  const json* vals = find(sec, "values");
  if (!vals || !vals->is_array() || vals->empty())
    bad("sweep.values", "expected a nonempty array");
  json cv = json::array();
  for (const json& e : *vals) {
    sw.values.push_back(e.dump());
    cv.push_back(e);
  }
  c["values"] = std::move(cv);
  canon["sweep"] = std::move(c);
}

bool class_valued(const std::vector<UserChannel>& users) {
  for (const UserChannel& u : users) {
    const double db = linear_to_db(u.mean_snr);
    if (std::fabs(db - 7.0) > 1e-9 && std::fabs(db - 16.0) > 1e-9 && std::fabs(db - 23.0) > 1e-9)
      return false;
  }
  return true;
}

void cross_checks(const ExperimentConfig& cfg) {
  const ScenarioConfig& sc = cfg.scenario;
  const std::size_t n_conn = sc.partition.empty() ? sc.users.size() : sc.partition.size();
  if (cfg.id == "analytics") {
    if (sc.scheduler != SchedulerId::ClusterWrr && sc.scheduler != SchedulerId::ClusterMaxRate)
      bad("experiment.id", "analytics needs scheduler clwrr or clmr");
    if (!sc.poisson_bps.empty())
      bad("simkit.load_mbps", "analytics models backlogged queues; remove the load");
  }
  if (cfg.id == "tiebreak") {
    for (const std::string& rule : cfg.tiebreak.rules) {
      if (rule == "maxfair" && n_conn != 2)
        bad("tiebreak.rules", "maxfair needs exactly two connections");
      if (rule == "lp" && n_conn > 10)
        bad("tiebreak.rules", "lp supports at most 10 connections");
      if ((rule == "belf" || rule == "wolf") && cfg.tiebreak.mapping != "identity" &&
          cfg.tiebreak.leaf_order.empty() && !class_valued(sc.users))
        bad("tiebreak.mapping", "needs class-valued users (poor|average|good)");
    }
  }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  check_keys(root, "",
             {"experiment", "channel", "simkit", "power", "tiebreak", "modeselect", "sweep"});

  ExperimentConfig cfg;
  cfg.source = json_text;
  json canon = json::object();
  parse_experiment(root, cfg, canon);
  parse_channel(root, cfg, canon);
  parse_simkit(root, cfg, canon);
  parse_power(root, cfg, canon);
  parse_tiebreak(root, cfg, canon);
  parse_modeselect(root, cfg, canon);
  parse_sweep(root, cfg, canon);
  cross_checks(cfg);
  try {
    cfg.scenario.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.canonical = canon.dump();
  // The hash names the experiment, not where its files land, so moving the
  // output directory never breaks a rerun comparison.
  json hashed = canon;
  hashed["experiment"].erase("out");
  cfg.hash = fnv1a(hashed.dump());
  return cfg;
}

std::string load_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig parse_config_file(const std::string& path) {
  return parse_config_text(load_text_file(path));
}

ExperimentConfig patch_config(
    const std::string& source_text,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  json root;
  try {
    root = json::parse(source_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [pointer, literal] : overrides) {
    json value;
    try {
      value = json::parse(literal);
    } catch (const json::exception&) {
      throw ConfigError("override " + pointer + ": value is not valid JSON");
    }
    try {
      root[json::json_pointer(pointer)] = value;
    } catch (const json::exception& e) {
      throw ConfigError("override " + pointer + ": " + e.what());
    }
  }
  return parse_config_text(root.dump());
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace d2dlab
