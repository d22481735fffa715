// Command-line front end for the fusion library. Talks to the shared
// library exclusively through the C API.
#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "msf_capi.h"

namespace {

int report(msf_status status, const char* action) {
  if (status == MSF_OK) return 0;
  std::fprintf(stderr, "error: %s failed: %s\n", action, msf_last_error());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"msf — multi-sensor ES-EKF fusion: simulate, fuse, evaluate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(msf_version()));

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic sensor log");
  std::string preset = "lab";
  std::uint64_t seed = 0;
  double duration = 300.0;
  std::string sim_out;
  simulate->add_option("--preset", preset, "Scenario preset")->capture_default_str();
  simulate->add_option("--seed", seed, "Random seed")->capture_default_str();
  simulate->add_option("--duration", duration, "Simulated seconds")->capture_default_str();
  simulate->add_option("--out", sim_out, "Output directory")->required();

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Replay a log through the filter");
  std::string config_path, log_path, fuse_out;
  double start = 0.0, end = 0.0;
  bool has_start = false, has_end = false;
  fuse->add_option("--config", config_path, "Run configuration (JSON)")->required();
  fuse->add_option("--log", log_path, "Input record log (JSON lines)")->required();
  fuse->add_option("--out", fuse_out, "Output directory")->required();
  fuse->add_option("--start", start,
                   "Replay window start [s]; the configured initial state must "
                   "describe the vehicle at this time")
      ->each([&](const std::string&) { has_start = true; });
  fuse->add_option("--end", end, "Replay window end [s]")->each([&](const std::string&) {
    has_end = true;
  });

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Compare estimates against ground truth");
  std::string est_path, truth_path, raw_path, eval_out;
  evaluate->add_option("--est", est_path, "Estimate log")->required();
  evaluate->add_option("--truth", truth_path, "Ground-truth log")->required();
  evaluate->add_option("--raw", raw_path, "Raw sensor log for per-sensor rows");
  evaluate->add_option("--out", eval_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) {
    char options[256];
    std::snprintf(options, sizeof(options),
                  "{\"preset\":\"%s\",\"seed\":%llu,\"duration\":%.17g}", preset.c_str(),
                  static_cast<unsigned long long>(seed), duration);
    int rc = report(msf_run_simulate(options, sim_out.c_str()), "simulate");
    if (rc == 0) {
      std::printf("wrote %s/sim.jsonl, truth.jsonl, config.json\n", sim_out.c_str());
    }
    return rc;
  }

  if (fuse->parsed()) {
    int rc = report(msf_run_fuse(config_path.c_str(), log_path.c_str(), fuse_out.c_str(),
                                 has_start ? &start : nullptr, has_end ? &end : nullptr),
                    "fuse");
    if (rc == 0) std::printf("wrote %s/estimate.jsonl, estimate.csv\n", fuse_out.c_str());
    return rc;
  }

  if (evaluate->parsed()) {
    int rc = report(msf_run_evaluate(est_path.c_str(), truth_path.c_str(),
                                     raw_path.empty() ? nullptr : raw_path.c_str(),
                                     eval_out.c_str()),
                    "evaluate");
    if (rc == 0) std::printf("wrote %s/report.json, report.txt\n", eval_out.c_str());
    return rc;
  }
  return 0;
}
