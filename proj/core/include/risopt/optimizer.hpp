#pragma once

// Alternating RIS/beamformer optimization: block coordinate ascent on the
// capacitances with Armijo backtracking, duality beamformer in between.
// The 1-bit searches live here too.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "risopt/beamforming.hpp"
#include "risopt/channel.hpp"
#include "risopt/ris_model.hpp"
#include "risopt/scene.hpp"

namespace risopt {

// How SINR_min(C_trial) is evaluated during the line search.
enum class LineSearchObjective {
  // Duality beamformer recomputed for every trial point.
  ReoptimizedBeamformer,
  // Current W held fixed during backtracking and recomputed after acceptance.
  // Cheaper per trial, but with balanced SINRs it tends to stall at the
  // max-min kink well below what the reoptimized variant reaches.
  FixedBeamformer,
};

struct BcdSettings {
  double sigma_armijo = 0.05;
  double eta = 0.4;
  double rho_0 = 0.2 * kPicofarad;
  double rho_min = 1e-6 * kPicofarad;
  double eps_g = 1e-25;
  int t_g = 50;
  std::uint64_t rng_seed = 1;
  int restarts = 1;
  LineSearchObjective objective = LineSearchObjective::ReoptimizedBeamformer;
  PowerBalanceSettings duality;
  double rate_bandwidth = 1.0;

  void validate() const;
};

// Everything the objective depends on besides the RIS configuration.
struct SystemModel {
  ChannelComponents components;
  VaractorModel varactor;
  double p_bs = 1.0;    // W
  double sigma2 = 1.0;  // W
};

double min_sinr(const EffectiveChannel& h, const BeamformerMatrix& w, double sigma2);

// argmin_k SINR_k with ties resolved to the smallest index.
std::size_t weakest_user(const RVector& sinr);

// d SINR_{k*} / dC for one group (sum over its member elements), W fixed.
double min_sinr_gradient(const EffectiveChannel& h, const RisConfiguration& config,
                         const BeamformerMatrix& w, double sigma2, std::size_t group);
double min_sinr_gradient(const ChannelComponents& c, const VaractorModel& model,
                         const RisConfiguration& config, const BeamformerMatrix& w,
                         double sigma2, std::size_t group);

// Zeroes gradients pointing out of [c_min, c_max] at an active bound.
double suppress_boundary_gradient(double g, double c, double c_min, double c_max);

struct LineSearchResult {
  std::optional<double> accepted;  // new capacitance
  double step = 0.0;               // rho at acceptance
  double objective = 0.0;          // objective at the accepted trial
  int evaluations = 0;
};

// Projected Armijo backtracking along d = sign(g) for a scalar objective.
LineSearchResult armijo_line_search(double c, double g, double f0, double c_min, double c_max,
                                    const BcdSettings& settings,
                                    const std::function<double(double)>& objective);

struct OptimizerState {
  RisConfiguration config;
  EffectiveChannel channel;
  BeamformerMatrix beamformer;
  SinrReport report;  // for (config, beamformer)
  int beamformer_recomputes = 0;
};

OptimizerState make_state(const SystemModel& system, const RisConfiguration& config,
                          const BcdSettings& settings);

struct StepRecord {
  int sweep = 0;
  std::size_t group = 0;
  double step = 0.0;  // accepted capacitance change (F)
  double min_sinr_before = 0.0;
  double min_sinr_after = 0.0;
  int beamformer_recomputes = 0;
};

struct StepOutcome {
  bool accepted = false;
  StepRecord record;
  int evaluations = 0;
};

StepOutcome armijo_coordinate_step(OptimizerState& state, const SystemModel& system,
                                   std::size_t group, double gradient,
                                   const BcdSettings& settings);

struct SweepRecord {
  int sweep = 0;
  double min_sinr_before = 0.0;
  double min_sinr_after = 0.0;
  std::size_t accepted_steps = 0;
};

SweepRecord bcd_sweep(OptimizerState& state, const SystemModel& system, int sweep_index,
                      const BcdSettings& settings, std::vector<StepRecord>* steps = nullptr);

struct OptimizationTrace {
  std::vector<StepRecord> steps;
  std::vector<SweepRecord> sweeps;
  RisConfiguration initial_config;
  RisConfiguration final_config;
  BeamformerMatrix final_beamformer;
  SinrReport final_report;
  double initial_min_sinr = 0.0;
  int beamformer_recomputes = 0;
  bool converged = false;
  std::optional<std::string> failure;

  double final_min_sinr() const { return final_report.min_sinr(); }
};

// Random start: group capacitances uniform in [c_min, c_max] from rng_seed
// (restarts use rng_seed + r and the best run is returned).
OptimizationTrace alternating_optimize(const SystemModel& system, const RisConfiguration& layout,
                                       const BcdSettings& settings);

// Warm start from the capacitances in `initial`.
OptimizationTrace alternating_optimize_from(const SystemModel& system,
                                            const RisConfiguration& initial,
                                            const BcdSettings& settings);

// Number of trace steps whose min SINR is below the previous accepted value.
std::size_t monotonicity_violations(const OptimizationTrace& trace);

struct Histogram {
  double bin_width = 0.05;
  double origin = 0.0;  // left edge of bin 0
  std::vector<std::size_t> counts;

  double bin_left(std::size_t i) const { return origin + static_cast<double>(i) * bin_width; }
  double bin_right(std::size_t i) const { return bin_left(i + 1); }
  std::size_t total() const;
};

Histogram build_histogram(const std::vector<double>& values, double bin_width);

struct SearchOptions {
  unsigned threads = 1;
  double bin_width = 0.05;
  PowerBalanceSettings duality;
  double rate_bandwidth = 1.0;
};

struct ExhaustiveEntry {
  OneBitState state;
  std::optional<double> min_rate;  // empty when the evaluation failed
  std::optional<double> avg_received_power;
  std::string error;
};

struct ExhaustiveResult {
  std::vector<ExhaustiveEntry> entries;  // enumeration order
  std::vector<std::size_t> ranking;      // successful entries, best first
  Histogram histogram;
  double baseline_min_rate = 0.0;        // no-RIS duality beamformer
  double beat_baseline_fraction = 0.0;   // over successful entries
  std::size_t failures = 0;

  const ExhaustiveEntry& best() const { return entries.at(ranking.at(0)); }
  double median_min_rate() const;
};

// `layout` supplies grouping and the ON/OFF capacitances.
ExhaustiveResult exhaustive_1bit_search(const SystemModel& system, const RisConfiguration& layout,
                                        const SearchOptions& options = {});

RisConfiguration one_bit_configuration(const RisConfiguration& layout, const OneBitState& state);

// Receiver offsets on an nx x ny grid spanning [-dx, dx] x [-dy, dy].
std::vector<Point2> offset_grid(double dx, double dy, std::size_t nx, std::size_t ny);
std::vector<Point2> default_perturbation_offsets();

struct PerturbationCombination {
  std::vector<std::size_t> offset_index;  // per user
  double best_min_rate = 0.0;
  double no_ris_min_rate = 0.0;
  double improvement = 0.0;
  double all_off_improvement = 0.0;
};

struct PerturbationResult {
  std::vector<PerturbationCombination> combinations;  // successful ones, odometer order
  std::size_t skipped = 0;
  std::vector<std::string> errors;
  Histogram histogram;
};

PerturbationResult perturbation_study(const SceneDescription& scene, const VaractorModel& model,
                                      const RisConfiguration& layout,
                                      const std::vector<Point2>& offsets, double p_bs,
                                      double sigma2, const SearchOptions& options = {});

}  // namespace risopt
