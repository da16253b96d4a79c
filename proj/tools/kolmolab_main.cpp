#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "kolmolab/run_io.hpp"
#include "kolmolab/scenarios.hpp"

using namespace kolmolab;

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for degenerate Kolmogorov-chain SDEs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int jobs = 0;
  std::vector<std::string> overrides;

  auto add_run_opts = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Config file (JSON key-value tree)");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Master seed")->each([&](const std::string&) {
      seed_given = true;
    });
    sub->add_option("--jobs", jobs, "Worker count for path-parallel stages");
    sub->add_option("--set", overrides, "Override config entries, key=value (repeatable)");
  };

  std::vector<std::string> scenario_names = {"validate", "proxy", "green", "sde",
                                             "peano",    "besov", "full-suite"};
  std::vector<CLI::App*> subs;
  for (const auto& name : scenario_names) {
    CLI::App* sub = app.add_subcommand(name, "Run the " + name + " scenario");
    add_run_opts(sub);
    subs.push_back(sub);
  }
  std::string report_dir;
  CLI::App* rep = app.add_subcommand("report", "Summarize a previous run directory");
  rep->add_option("dir", report_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage problems are configuration errors
  }

  if (rep->parsed()) {
    try {
      std::fputs(render_report(report_dir).c_str(), stdout);
      return 0;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 2;
    }
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = RunConfig::from_json_text(read_file(config_path));
    for (std::size_t i = 0; i < scenario_names.size(); ++i)
      if (subs[i]->parsed()) cfg.scenario = scenario_names[i];
    if (seed_given) {
      cfg.seed = seed;
      cfg.has_seed = true;
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (jobs > 0) cfg.jobs = jobs;
    for (const std::string& kv : overrides) cfg.apply_override(kv);
    cfg.validate();
    return run_and_write(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
