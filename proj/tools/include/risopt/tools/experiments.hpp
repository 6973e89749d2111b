#pragma once

// Experiment drivers behind the risopt command-line tool. Each driver writes
// its files into ExperimentConfig::out_dir and returns a short summary.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "risopt/io.hpp"
#include "risopt/optimizer.hpp"

namespace risopt::tools {

namespace fs = std::filesystem;

enum class SweepMode { NoRis, Continuous, OneBitExhaustive };

std::string_view to_string(SweepMode mode);
SweepMode sweep_mode_from_string(std::string_view name);

struct ExperimentConfig {
  std::optional<fs::path> scene_path;       // default: built-in corridor scene
  std::optional<fs::path> channels_path;    // overrides scene synthesis
  std::optional<fs::path> varactor_path;
  std::optional<fs::path> ris_config_path;  // warm start / fixed configuration
  std::vector<double> powers_dbm;           // empty: command default
  double bandwidth_hz = 40e6;
  double temperature_k = 900.0;
  std::vector<SweepMode> modes;             // empty: all three
  ControlMode control = ControlMode::ContinuousPerColumn;
  fs::path out_dir = "out";
  std::uint64_t seed = 1;
  bool reproducible = false;
  unsigned threads = 1;
  double bin_width = 0.05;
  int restarts = 1;
  LineSearchObjective line_search = LineSearchObjective::ReoptimizedBeamformer;
  double eps_g = 1e-25;
  int max_sweeps = 50;
  double offset_x = 0.075;
  double offset_y = 0.092;
  std::size_t offsets_per_axis = 3;
  std::string channel_format = "json";  // channel convert output: json | csv

  void validate() const;
};

inline const std::vector<double> kDefaultSweepDbm{10.0, 15.0, 20.0, 25.0, 30.0};
inline constexpr double kDefaultPowerDbm = 30.0;

// Inputs resolved from a config.
struct ExperimentContext {
  SceneDescription scene;
  ChannelComponents components;
  VaractorModel varactor;
  double sigma2 = 0.0;
  std::vector<std::string> warnings;
};

ExperimentContext load_context(const ExperimentConfig& cfg);

// Power used by single-point commands: the first --power-dbm, else 30 dBm.
double single_power_dbm(const ExperimentConfig& cfg);

double dbm_per_hz(double dbm, double bandwidth_hz);
double watts_to_dbm_per_hz(double watts, double bandwidth_hz);

// 20 single-column groups for continuous control, 10 column pairs for 1-bit.
RisConfiguration default_layout(ControlMode mode, std::size_t n_ports);

BcdSettings bcd_settings(const ExperimentConfig& cfg);

struct CommandSummary {
  std::vector<fs::path> files;
  std::vector<std::string> lines;  // human-readable summary for stdout
};

CommandSummary run_scene_trace(const ExperimentConfig& cfg);
CommandSummary run_channel_convert(const ExperimentConfig& cfg);
CommandSummary run_optimize(const ExperimentConfig& cfg);
CommandSummary run_power_sweep(const ExperimentConfig& cfg);
CommandSummary run_exhaustive(const ExperimentConfig& cfg);
CommandSummary run_perturbation(const ExperimentConfig& cfg);
CommandSummary run_gain_map(const ExperimentConfig& cfg);

// Long-form channel CSV: matrix,row,col,re,im (frequency stored as the
// 1x1 pseudo-matrix "frequency_hz").
std::string components_to_csv(const ChannelComponents& c);
ChannelComponents components_from_csv(const std::string& text);
// Dispatches on the extension (.csv or JSON otherwise).
ChannelComponents load_channel_file(const fs::path& path);

}  // namespace risopt::tools
