#include <cstdint>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "d2dlab/config.hpp"
#include "d2dlab/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  std::uint64_t replications = 0;
  std::uint64_t frames = 0;
  std::string out_dir;
  bool trace = false;
  CLI::App* sub = nullptr;
};

void add_common(CLI::App& app, CommonFlags& f, const std::string& name,
                const std::string& blurb) {
  f.sub = app.add_subcommand(name, blurb);
  f.sub->add_option("--config", f.config_path, "experiment description (JSON)")->required();
  f.sub->add_option("--seed", f.seed, "override experiment.seed");
  f.sub->add_option("--replications", f.replications, "override experiment.replications");
  f.sub->add_option("--frames", f.frames, "override experiment.frames");
  f.sub->add_option("--out", f.out_dir, "override experiment.out (result directory)");
  f.sub->add_flag("--trace", f.trace, "record the per-frame trace");
}

int run_with(const CommonFlags& f, const std::string& id) {
  const std::string source = d2dlab::load_text_file(f.config_path);
  std::vector<std::pair<std::string, std::string>> overrides;
  overrides.emplace_back("/experiment/id", nlohmann::json(id).dump());
  if (f.sub->count("--seed"))
    overrides.emplace_back("/experiment/seed", std::to_string(f.seed));
  if (f.sub->count("--replications"))
    overrides.emplace_back("/experiment/replications", std::to_string(f.replications));
  if (f.sub->count("--frames"))
    overrides.emplace_back("/experiment/frames", std::to_string(f.frames));
  if (f.sub->count("--out"))
    overrides.emplace_back("/experiment/out", nlohmann::json(f.out_dir).dump());
  if (f.trace) overrides.emplace_back("/simkit/trace", "true");

  const d2dlab::ExperimentConfig cfg = d2dlab::patch_config(source, overrides);
  d2dlab::run_experiment(cfg, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"analytic and simulated scheduling experiments for clustered cellular networks"};
  app.require_subcommand(1);

  CommonFlags analytics, simulate, tiebreak, modeselect, sweep;
  add_common(app, analytics, "analytics", "closed-form cluster throughput/power tables");
  add_common(app, simulate, "simulate", "frame-level simulation of the configured scenario");
  add_common(app, tiebreak, "tiebreak", "tie-breaking weight families and expected throughputs");
  add_common(app, modeselect, "modeselect", "direct-link mode assignment search");
  add_common(app, sweep, "sweep", "repeat an experiment over a swept config value");

  std::string summary_dir = "results";
  CLI::App* summary = app.add_subcommand("summary", "digest the CSVs in a result directory");
  summary->add_option("--out", summary_dir, "result directory to read");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (summary->parsed()) return d2dlab::report_summary(summary_dir, std::cout) ? 0 : 3;
    for (const CommonFlags* f : {&analytics, &simulate, &tiebreak, &modeselect, &sweep})
      if (f->sub->parsed()) return run_with(*f, f->sub->get_name());
    return 2;
  } catch (const d2dlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
