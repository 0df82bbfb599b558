#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "dac/harness.hpp"
#include "dac/plots.hpp"
#include "dac/scenario.hpp"

namespace {

dac::Scenario resolve_scenario(const std::string& ref) {
  if (ref == "builtin:nominal") return dac::Scenario::defaults();
  if (ref == "builtin:paper_damage1") return dac::Scenario::paper_damage1();
  if (ref.rfind("builtin:", 0) == 0) {
    throw dac::config_error("unknown builtin scenario '" + ref + "'");
  }
  return dac::load_scenario(ref);
}

struct Overrides {
  std::uint64_t seed = 0;
  bool seed_set = false;
  double duration = 0.0;
  bool duration_set = false;
};

void apply_overrides(dac::Scenario& sc, const Overrides& ov) {
  if (ov.seed_set) sc.seed = ov.seed;
  if (ov.duration_set) {
    if (!(ov.duration > 0.0)) {
      throw dac::config_error("--duration must be positive");
    }
    sc.duration = ov.duration;
  }
}

void write_config_echo(const std::string& dir, const dac::Scenario& sc) {
  std::ofstream echo(dir + "/config.resolved", std::ios::binary);
  echo << dac::scenario_to_json(sc);
}

// Persist one run into dir: run.csv, metrics.kv, config.resolved, plots/.
void persist_run(const std::string& dir, const dac::Scenario& sc,
                 const dac::RunResult& result, bool emit_plots,
                 const dac::RunResult* comparison = nullptr) {
  std::filesystem::create_directories(dir);
  write_config_echo(dir, sc);
  dac::write_csv(dir + "/run.csv", result.records);
  dac::write_metrics(dir + "/metrics.kv", dac::summarize(sc, result));
  if (emit_plots) {
    const std::string plot_dir = dir + "/plots";
    std::filesystem::create_directories(plot_dir);
    dac::write_run_plots(plot_dir, result, comparison);
  }
}

// Exit code 2 path: dump the tail of the record next to the partial run.csv.
int report_abort(const std::string& dir, const dac::RunResult& result) {
  const std::string tail = dir + "/abort_tail.csv";
  dac::write_csv_tail(tail, result.records, 100);
  std::fprintf(stderr, "run aborted: %s\n", result.abort_message.c_str());
  std::fprintf(stderr, "last %zu rows written to %s\n",
               std::min<std::size_t>(result.records.size(), 100), tail.c_str());
  return 2;
}

int cmd_run(const std::string& scenario_ref, const std::string& mode_s,
            const std::string& out_dir, const Overrides& ov, bool emit_plots) {
  dac::Scenario sc = resolve_scenario(scenario_ref);
  apply_overrides(sc, ov);
  const dac::RunMode mode = dac::parse_mode(mode_s);

  const dac::RunResult result = dac::run_scenario(sc, mode);
  persist_run(out_dir, sc, result, emit_plots);
  if (result.aborted) return report_abort(out_dir, result);
  std::printf("%s [%s]: %zu steps, wrote %s/run.csv\n", sc.name.c_str(),
              dac::mode_name(mode).c_str(), result.records.size(),
              out_dir.c_str());
  return 0;
}

int cmd_compare(const std::string& scenario_ref, const std::string& out_dir,
                const Overrides& ov, bool emit_plots) {
  dac::Scenario sc = resolve_scenario(scenario_ref);
  apply_overrides(sc, ov);

  const dac::RunResult dac_run = dac::run_scenario(sc, dac::RunMode::kDac);
  const dac::RunResult mbc_run = dac::run_scenario(sc, dac::RunMode::kMbc);
  persist_run(out_dir + "/dac", sc, dac_run, emit_plots, &mbc_run);
  persist_run(out_dir + "/mbc", sc, mbc_run, emit_plots);

  dac::Metrics paired;
  for (const auto& [k, v] : dac::summarize(sc, dac_run)) {
    paired.emplace_back("dac_" + k, v);
  }
  for (const auto& [k, v] : dac::summarize(sc, mbc_run)) {
    paired.emplace_back("mbc_" + k, v);
  }
  const double t_end = sc.duration;
  const double a = dac::error_rms(dac_run.records, t_end - 20.0, t_end);
  const double b = dac::error_rms(mbc_run.records, t_end - 20.0, t_end);
  paired.emplace_back("rms_ratio_last_20s", b > 0.0 ? a / b : 0.0);
  std::filesystem::create_directories(out_dir);
  dac::write_metrics(out_dir + "/metrics.kv", paired);

  if (dac_run.aborted) return report_abort(out_dir + "/dac", dac_run);
  if (mbc_run.aborted) return report_abort(out_dir + "/mbc", mbc_run);
  std::printf("%s: dac and mbc runs complete, last-20s rms ratio %.3f\n",
              sc.name.c_str(), b > 0.0 ? a / b : 0.0);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Damaged-flight simulation workbench"};
  app.require_subcommand(1);

  std::string scenario_ref = "builtin:nominal";
  std::string mode_s = "dac";
  std::string out_dir = "out";
  bool emit_plots = false;
  Overrides ov;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", scenario_ref,
                    "scenario JSON path or builtin:<name>");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_flag("--emit-plots", emit_plots, "write SVG figures to plots/");
    cmd->add_option("--seed", ov.seed, "override the scenario seed")
        ->each([&](const std::string&) { ov.seed_set = true; });
    cmd->add_option("--duration", ov.duration, "override the duration [s]")
        ->each([&](const std::string&) { ov.duration_set = true; });
  };

  CLI::App* run = app.add_subcommand("run", "simulate one mode");
  add_common(run);
  run->add_option("--mode", mode_s, "dac or mbc");

  CLI::App* compare =
      app.add_subcommand("compare", "simulate both modes and summarize");
  add_common(compare);

  CLI::App* print = app.add_subcommand("print", "echo the resolved scenario");
  print->add_option("--scenario", scenario_ref,
                    "scenario JSON path or builtin:<name>");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(scenario_ref, mode_s, out_dir, ov, emit_plots);
    }
    if (compare->parsed()) {
      return cmd_compare(scenario_ref, out_dir, ov, emit_plots);
    }
    if (print->parsed()) {
      const dac::Scenario sc = resolve_scenario(scenario_ref);
      std::fputs(dac::scenario_to_json(sc).c_str(), stdout);
      return 0;
    }
  } catch (const dac::config_error& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 1;
  } catch (const dac::numeric_error& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 2;
  }
  return 0;
}
