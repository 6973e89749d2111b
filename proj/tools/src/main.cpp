#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "risopt/error.hpp"
#include "risopt/tools/experiments.hpp"

namespace {

using risopt::tools::ExperimentConfig;

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kNumericalError = 3 };

struct Options {
  ExperimentConfig cfg;
  std::string scene, channels, varactor, ris_config;
  std::vector<std::string> modes;
  std::string control = "continuous-per-column";
  std::string line_search = "reoptimized";
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--scene", o.scene, "Scene JSON (default: built-in corridor junction)");
  cmd->add_option("--channels", o.channels, "Channel file (.json or .csv) replacing scene synthesis");
  cmd->add_option("--varactor", o.varactor, "Varactor model JSON");
  cmd->add_option("--power-dbm", o.cfg.powers_dbm, "Total BS power in dBm (repeatable)")
      ->take_all()
      ->allow_extra_args(false);
  cmd->add_option("--bandwidth-hz", o.cfg.bandwidth_hz, "Bandwidth for kTB noise and dBm/Hz")
      ->capture_default_str();
  cmd->add_option("--temperature-k", o.cfg.temperature_k, "Noise temperature")->capture_default_str();
  cmd->add_option("--seed", o.cfg.seed, "Random seed for initial RIS configurations")
      ->capture_default_str();
  cmd->add_option("--out", o.cfg.out_dir, "Output directory")->capture_default_str();
  cmd->add_flag("--reproducible", o.cfg.reproducible, "Omit timestamps from outputs");
  cmd->add_option("--threads", o.cfg.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

void add_optimizer(CLI::App* cmd, Options& o) {
  cmd->add_option("--ris-config", o.ris_config, "Warm-start RIS configuration JSON");
  cmd->add_option("--control", o.control,
                  "continuous-per-column or continuous-per-element")
      ->capture_default_str();
  cmd->add_option("--line-search", o.line_search, "reoptimized or fixed beamformer during backtracking")
      ->capture_default_str();
  cmd->add_option("--restarts", o.cfg.restarts, "Random restarts")->capture_default_str();
  cmd->add_option("--eps-g", o.cfg.eps_g, "Sweep improvement threshold")->capture_default_str();
  cmd->add_option("--max-sweeps", o.cfg.max_sweeps, "Maximum BCD sweeps")->capture_default_str();
}

void finalize(Options& o) {
  auto& c = o.cfg;
  if (!o.scene.empty()) c.scene_path = o.scene;
  if (!o.channels.empty()) c.channels_path = o.channels;
  if (!o.varactor.empty()) c.varactor_path = o.varactor;
  if (!o.ris_config.empty()) c.ris_config_path = o.ris_config;
  for (const auto& m : o.modes) c.modes.push_back(risopt::tools::sweep_mode_from_string(m));
  c.control = risopt::control_mode_from_string(o.control);
  if (o.line_search == "reoptimized") {
    c.line_search = risopt::LineSearchObjective::ReoptimizedBeamformer;
  } else if (o.line_search == "fixed") {
    c.line_search = risopt::LineSearchObjective::FixedBeamformer;
  } else {
    throw risopt::InvalidInput("--line-search must be reoptimized or fixed");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RIS configuration and beamforming experiments"};
  app.require_subcommand(1);
  Options o;

  using Runner = risopt::tools::CommandSummary (*)(const ExperimentConfig&);
  std::map<CLI::App*, Runner> runners;

  auto* scene = app.add_subcommand("scene", "Scene utilities")->require_subcommand(1);
  auto* trace = scene->add_subcommand("trace", "Trace propagation paths and synthesize channels");
  add_common(trace, o);
  runners[trace] = risopt::tools::run_scene_trace;

  auto* channel = app.add_subcommand("channel", "Channel file utilities")->require_subcommand(1);
  auto* convert = channel->add_subcommand("convert", "Validate and rewrite a channel file");
  add_common(convert, o);
  convert->add_option("--format", o.cfg.channel_format, "json or csv")->capture_default_str();
  runners[convert] = risopt::tools::run_channel_convert;

  auto* optimize = app.add_subcommand("optimize", "Alternating RIS/beamformer optimization");
  add_common(optimize, o);
  add_optimizer(optimize, o);
  runners[optimize] = risopt::tools::run_optimize;

  auto* sweep = app.add_subcommand("sweep", "Min rate versus BS power");
  add_common(sweep, o);
  add_optimizer(sweep, o);
  sweep->add_option("--mode", o.modes, "no-ris, continuous or onebit-exhaustive (repeatable)")
      ->take_all()
      ->allow_extra_args(false);
  runners[sweep] = risopt::tools::run_power_sweep;

  auto* exhaustive = app.add_subcommand("exhaustive", "Exhaustive column-paired 1-bit search");
  add_common(exhaustive, o);
  exhaustive->add_option("--bin-width", o.cfg.bin_width, "Histogram bin width (bps/Hz)")
      ->capture_default_str();
  runners[exhaustive] = risopt::tools::run_exhaustive;

  auto* perturb = app.add_subcommand("perturb", "1-bit gains under user-location perturbations");
  add_common(perturb, o);
  perturb->add_option("--bin-width", o.cfg.bin_width, "Histogram bin width (bps/Hz)")
      ->capture_default_str();
  perturb->add_option("--offset-x", o.cfg.offset_x, "Half-span of x offsets (m)")->capture_default_str();
  perturb->add_option("--offset-y", o.cfg.offset_y, "Half-span of y offsets (m)")->capture_default_str();
  perturb->add_option("--offsets-per-axis", o.cfg.offsets_per_axis, "Offsets per axis")
      ->capture_default_str();
  runners[perturb] = risopt::tools::run_perturbation;

  auto* gainmap = app.add_subcommand("gainmap", "Per-beam gain over the scene grid");
  add_common(gainmap, o);
  add_optimizer(gainmap, o);
  runners[gainmap] = risopt::tools::run_gain_map;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    finalize(o);
    for (const auto& [cmd, run] : runners) {
      if (!cmd->parsed()) continue;
      const auto summary = run(o.cfg);
      for (const auto& line : summary.lines) std::cout << line << "\n";
      for (const auto& file : summary.files) std::cout << "wrote " << file.string() << "\n";
    }
  } catch (const risopt::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const risopt::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
