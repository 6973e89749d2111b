#include "risopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "risopt/error.hpp"
#include "risopt/parallel.hpp"

namespace risopt {

void BcdSettings::validate() const {
  if (!(sigma_armijo > 0.0 && sigma_armijo < 1.0)) throw InvalidInput("Armijo sigma must lie in (0,1)");
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidInput("step shrink factor must lie in (0,1)");
  if (!(rho_0 > 0.0) || !(rho_min > 0.0) || rho_min > rho_0) {
    throw InvalidInput("step sizes need 0 < rho_min <= rho_0");
  }
  if (!(eps_g >= 0.0)) throw InvalidInput("convergence tolerance must be nonnegative");
  if (t_g < 1) throw InvalidInput("at least one sweep is required");
  if (restarts < 1) throw InvalidInput("at least one restart is required");
}

double min_sinr(const EffectiveChannel& h, const BeamformerMatrix& w, double sigma2) {
  return downlink_sinr(received_signals(h, w), sigma2).minCoeff();
}

std::size_t weakest_user(const RVector& sinr) {
  Eigen::Index k = 0;
  for (Eigen::Index i = 1; i < sinr.size(); ++i) {
    if (sinr(i) < sinr(k)) k = i;
  }
  return static_cast<std::size_t>(k);
}

double min_sinr_gradient(const EffectiveChannel& h, const RisConfiguration& config,
                         const BeamformerMatrix& w, double sigma2, std::size_t group) {
  if (group >= config.groups.size()) throw InvalidInput("RIS group index out of range");
  const CMatrix y = received_signals(h, w);
  const RVector sinr = downlink_sinr(y, sigma2);
  const std::size_t user = weakest_user(sinr);
  const auto ks = static_cast<Eigen::Index>(user);

  Eigen::RowVectorXcd dh = Eigen::RowVectorXcd::Zero(static_cast<Eigen::Index>(h.m()));
  for (std::size_t e : config.groups[group]) {
    dh += channel_row_derivative(h, user, e, config.capacitances.at(e));
  }
  const Eigen::RowVectorXcd dy = dh * w.weights;  // d y_{k*, j} / dC

  double d_num = 0.0;
  double d_den = 0.0;
  double interference = 0.0;
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    const double term = 2.0 * std::real(std::conj(y(ks, j)) * dy(j));
    if (j == ks) {
      d_num = term;
    } else {
      d_den += term;
      interference += std::norm(y(ks, j));
    }
  }
  return (d_num - sinr(ks) * d_den) / (interference + sigma2);
}

double min_sinr_gradient(const ChannelComponents& c, const VaractorModel& model,
                         const RisConfiguration& config, const BeamformerMatrix& w,
                         double sigma2, std::size_t group) {
  const EffectiveChannel h = assemble_effective_channel(c, model, config);
  return min_sinr_gradient(h, config, w, sigma2, group);
}

double suppress_boundary_gradient(double g, double c, double c_min, double c_max) {
  if (c >= c_max && g > 0.0) return 0.0;
  if (c <= c_min && g < 0.0) return 0.0;
  return g;
}

LineSearchResult armijo_line_search(double c, double g, double f0, double c_min, double c_max,
                                    const BcdSettings& settings,
                                    const std::function<double(double)>& objective) {
  LineSearchResult result;
  if (g == 0.0 || !std::isfinite(g)) return result;
  const double d = g > 0.0 ? 1.0 : -1.0;
  for (double rho = settings.rho_0; rho >= settings.rho_min; rho *= settings.eta) {
    const double trial = std::clamp(c + rho * d, c_min, c_max);
    const double f = objective(trial);
    ++result.evaluations;
    if (f >= f0 + settings.sigma_armijo * rho * g * d) {
      result.accepted = trial;
      result.step = rho;
      result.objective = f;
      return result;
    }
  }
  return result;
}

OptimizerState make_state(const SystemModel& system, const RisConfiguration& config,
                          const BcdSettings& settings) {
  OptimizerState state{config, assemble_effective_channel(system.components, system.varactor, config),
                       {}, {}, 0};
  const DualityResult dual = duality_beamformer(state.channel, system.p_bs, system.sigma2,
                                                settings.duality, settings.rate_bandwidth);
  state.beamformer = dual.beamformer;
  state.report = dual.report;
  state.beamformer_recomputes = 1;
  return state;
}

StepOutcome armijo_coordinate_step(OptimizerState& state, const SystemModel& system,
                                   std::size_t group, double gradient,
                                   const BcdSettings& settings) {
  StepOutcome outcome;
  outcome.record.group = group;
  outcome.record.min_sinr_before = state.report.min_sinr();
  outcome.record.min_sinr_after = outcome.record.min_sinr_before;
  if (gradient == 0.0) return outcome;

  const double c = state.config.capacitances.at(state.config.groups.at(group).front());
  auto trial_config = [&](double value) {
    std::vector<double> values = state.config.group_values();
    values[group] = value;
    return with_group_values(state.config, values);
  };

  // Reoptimized objective keeps the last trial's duality solution so an
  // accepted trial does not need a second solve.
  std::optional<DualityResult> last_dual;
  std::optional<EffectiveChannel> last_channel;
  const auto objective = [&](double value) {
    const RisConfiguration cfg = trial_config(value);
    EffectiveChannel h = assemble_effective_channel(system.components, system.varactor, cfg);
    double f = 0.0;
    if (settings.objective == LineSearchObjective::FixedBeamformer) {
      f = min_sinr(h, state.beamformer, system.sigma2);
    } else {
      last_dual = duality_beamformer(h, system.p_bs, system.sigma2, settings.duality,
                                     settings.rate_bandwidth);
      f = last_dual->report.min_sinr();
    }
    last_channel = std::move(h);
    return f;
  };

  LineSearchResult search;
  try {
    search = armijo_line_search(c, gradient, outcome.record.min_sinr_before, system.varactor.c_min,
                                system.varactor.c_max, settings, objective);
  } catch (const NumericalError& e) {
    state.report.warnings.push_back(std::string("line search aborted: ") + e.what());
    return outcome;
  }
  outcome.evaluations = search.evaluations;
  if (!search.accepted) return outcome;

  RisConfiguration next = trial_config(*search.accepted);
  EffectiveChannel next_channel = std::move(*last_channel);
  if (settings.objective == LineSearchObjective::FixedBeamformer) {
    SinrReport kept = make_report(received_signals(next_channel, state.beamformer), system.sigma2,
                                  settings.rate_bandwidth);
    try {
      DualityResult dual = duality_beamformer(next_channel, system.p_bs, system.sigma2,
                                              settings.duality, settings.rate_bandwidth);
      ++state.beamformer_recomputes;
      // Both beamformers meet the power budget; keep whichever is better.
      if (dual.report.min_sinr() >= kept.min_sinr()) {
        state.beamformer = std::move(dual.beamformer);
        kept = std::move(dual.report);
      }
    } catch (const NumericalError& e) {
      kept.warnings.push_back(std::string("beamformer recompute failed: ") + e.what());
    }
    state.report = std::move(kept);
  } else {
    ++state.beamformer_recomputes;
    state.beamformer = std::move(last_dual->beamformer);
    state.report = std::move(last_dual->report);
  }
  state.config = std::move(next);
  state.channel = std::move(next_channel);

  outcome.accepted = true;
  outcome.record.step = *search.accepted - c;
  outcome.record.min_sinr_after = state.report.min_sinr();
  outcome.record.beamformer_recomputes = state.beamformer_recomputes;
  return outcome;
}

SweepRecord bcd_sweep(OptimizerState& state, const SystemModel& system, int sweep_index,
                      const BcdSettings& settings, std::vector<StepRecord>* steps) {
  SweepRecord sweep;
  sweep.sweep = sweep_index;
  sweep.min_sinr_before = state.report.min_sinr();
  for (std::size_t g = 0; g < state.config.groups.size(); ++g) {
    const double c = state.config.capacitances.at(state.config.groups[g].front());
    const double raw = min_sinr_gradient(state.channel, state.config, state.beamformer,
                                         system.sigma2, g);
    const double grad =
        suppress_boundary_gradient(raw, c, system.varactor.c_min, system.varactor.c_max);
    StepOutcome outcome = armijo_coordinate_step(state, system, g, grad, settings);
    if (outcome.accepted) {
      ++sweep.accepted_steps;
      outcome.record.sweep = sweep_index;
      if (steps) steps->push_back(outcome.record);
    }
  }
  sweep.min_sinr_after = state.report.min_sinr();
  return sweep;
}

OptimizationTrace alternating_optimize_from(const SystemModel& system,
                                            const RisConfiguration& initial,
                                            const BcdSettings& settings) {
  settings.validate();
  initial.validate(system.varactor);
  OptimizationTrace trace;
  trace.initial_config = initial;
  trace.final_config = initial;

  // A 1-bit warm start keeps its column pairs but is optimized continuously.
  RisConfiguration start = initial;
  if (start.mode == ControlMode::ColumnPairedOneBit) start.mode = ControlMode::ContinuousPerColumn;

  std::optional<OptimizerState> state;
  try {
    state = make_state(system, start, settings);
  } catch (const NumericalError& e) {
    trace.failure = e.what();
    return trace;
  }
  trace.initial_min_sinr = state->report.min_sinr();

  auto finish = [&] {
    trace.final_config = state->config;
    trace.final_beamformer = state->beamformer;
    trace.final_report = state->report;
    trace.beamformer_recomputes = state->beamformer_recomputes;
  };

  if (initial.groups.empty()) {
    trace.converged = true;
    finish();
    return trace;
  }
  try {
    for (int t = 1; t <= settings.t_g; ++t) {
      const SweepRecord sweep = bcd_sweep(*state, system, t, settings, &trace.steps);
      trace.sweeps.push_back(sweep);
      if (std::abs(sweep.min_sinr_after - sweep.min_sinr_before) < settings.eps_g) {
        trace.converged = true;
        break;
      }
    }
  } catch (const NumericalError& e) {
    trace.failure = e.what();
  }
  finish();
  return trace;
}

OptimizationTrace alternating_optimize(const SystemModel& system, const RisConfiguration& layout,
                                       const BcdSettings& settings) {
  settings.validate();
  std::optional<OptimizationTrace> best;
  for (int r = 0; r < settings.restarts; ++r) {
    std::mt19937_64 rng(settings.rng_seed + static_cast<std::uint64_t>(r));
    std::uniform_real_distribution<double> dist(system.varactor.c_min, system.varactor.c_max);
    std::vector<double> values(layout.groups.size());
    for (double& v : values) v = dist(rng);
    RisConfiguration initial = with_group_values(layout, values);
    if (initial.mode == ControlMode::ColumnPairedOneBit) initial.mode = ControlMode::ContinuousPerColumn;
    OptimizationTrace trace = alternating_optimize_from(system, initial, settings);
    if (!best || (!trace.failure && (best->failure || trace.final_min_sinr() > best->final_min_sinr()))) {
      best = std::move(trace);
    }
  }
  return std::move(*best);
}

std::size_t monotonicity_violations(const OptimizationTrace& trace) {
  std::size_t violations = 0;
  double previous = trace.initial_min_sinr;
  for (const auto& step : trace.steps) {
    if (step.min_sinr_after < previous || step.min_sinr_after < step.min_sinr_before) ++violations;
    previous = step.min_sinr_after;
  }
  return violations;
}

std::size_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

Histogram build_histogram(const std::vector<double>& values, double bin_width) {
  if (!(bin_width > 0.0)) throw InvalidInput("histogram bin width must be positive");
  Histogram h;
  h.bin_width = bin_width;
  if (values.empty()) return h;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  h.origin = std::floor(*lo / bin_width) * bin_width;
  const auto bins = static_cast<std::size_t>(std::floor((*hi - h.origin) / bin_width)) + 1;
  h.counts.assign(bins, 0);
  for (double v : values) {
    auto i = static_cast<std::ptrdiff_t>(std::floor((v - h.origin) / bin_width));
    i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(i)];
  }
  return h;
}

double ExhaustiveResult::median_min_rate() const {
  std::vector<double> rates;
  for (std::size_t i : ranking) rates.push_back(*entries[i].min_rate);
  if (rates.empty()) throw InvalidInput("no successful evaluations");
  std::sort(rates.begin(), rates.end());
  const std::size_t n = rates.size();
  return n % 2 ? rates[n / 2] : 0.5 * (rates[n / 2 - 1] + rates[n / 2]);
}

RisConfiguration one_bit_configuration(const RisConfiguration& layout, const OneBitState& state) {
  RisConfiguration config = with_group_values(layout, one_bit_group_values(layout, state));
  config.mode = ControlMode::ColumnPairedOneBit;
  return config;
}

ExhaustiveResult exhaustive_1bit_search(const SystemModel& system, const RisConfiguration& layout,
                                        const SearchOptions& options) {
  const OneBitEnumeration enumeration = enumerate_1bit_configs(layout.groups.size());
  ExhaustiveResult result;
  result.baseline_min_rate =
      duality_beamformer(system.components.baseline_channel(), system.p_bs, system.sigma2,
                         options.duality, options.rate_bandwidth)
          .report.min_rate;

  result.entries.resize(enumeration.size());
  parallel_for(enumeration.size(), options.threads, [&](std::size_t i) {
    ExhaustiveEntry& entry = result.entries[i];
    entry.state = enumeration[i];
    try {
      const RisConfiguration config = one_bit_configuration(layout, entry.state);
      const EffectiveChannel h = assemble_effective_channel(system.components, system.varactor, config);
      const DualityResult dual = duality_beamformer(h, system.p_bs, system.sigma2, options.duality,
                                                    options.rate_bandwidth);
      entry.min_rate = dual.report.min_rate;
      entry.avg_received_power = dual.report.avg_received_power;
    } catch (const NumericalError& e) {
      entry.error = e.what();
    }
  });

  std::vector<double> rates;
  std::size_t beat = 0;
  for (std::size_t i = 0; i < result.entries.size(); ++i) {
    const auto& entry = result.entries[i];
    if (!entry.min_rate) {
      ++result.failures;
      continue;
    }
    result.ranking.push_back(i);
    rates.push_back(*entry.min_rate);
    if (*entry.min_rate > result.baseline_min_rate) ++beat;
  }
  std::stable_sort(result.ranking.begin(), result.ranking.end(), [&](std::size_t a, std::size_t b) {
    return *result.entries[a].min_rate > *result.entries[b].min_rate;
  });
  result.histogram = build_histogram(rates, options.bin_width);
  if (!rates.empty()) {
    result.beat_baseline_fraction = static_cast<double>(beat) / static_cast<double>(rates.size());
  }
  return result;
}

std::vector<Point2> offset_grid(double dx, double dy, std::size_t nx, std::size_t ny) {
  if (nx == 0 || ny == 0) throw InvalidInput("offset grid needs at least one point per axis");
  auto axis = [](double span, std::size_t n) {
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 0; i < n && n > 1; ++i) {
      v[i] = -span + 2.0 * span * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return v;
  };
  std::vector<Point2> out;
  for (double oy : axis(dy, ny)) {
    for (double ox : axis(dx, nx)) out.emplace_back(ox, oy);
  }
  return out;
}

std::vector<Point2> default_perturbation_offsets() { return offset_grid(0.075, 0.092, 3, 3); }

PerturbationResult perturbation_study(const SceneDescription& scene, const VaractorModel& model,
                                      const RisConfiguration& layout,
                                      const std::vector<Point2>& offsets, double p_bs,
                                      double sigma2, const SearchOptions& options) {
  if (offsets.empty()) throw InvalidInput("perturbation study needs at least one offset");
  const SynthesisResult base = synthesize_components(scene);
  const ChannelComponents& c = base.components;
  const std::size_t k_users = scene.users.size();
  const OneBitEnumeration enumeration = enumerate_1bit_configs(layout.groups.size());

  // The load system depends only on the RIS state, not on user positions.
  std::vector<std::optional<CMatrix>> port_response(enumeration.size());
  for (std::size_t i = 0; i < enumeration.size(); ++i) {
    try {
      const RisConfiguration config = one_bit_configuration(layout, enumeration[i]);
      port_response[i] = assemble_effective_channel(c, model, config).port_response();
    } catch (const NumericalError&) {
    }
  }

  // rows[u][o]: channel rows for user u displaced by offset o.
  std::vector<std::vector<std::optional<UserRows>>> rows(k_users);
  for (std::size_t u = 0; u < k_users; ++u) {
    rows[u].resize(offsets.size());
    for (std::size_t o = 0; o < offsets.size(); ++o) {
      try {
        rows[u][o] = synthesize_user_rows(scene, scene.users[u] + offsets[o]);
      } catch (const ConfigError&) {
      }
    }
  }

  std::size_t total = 1;
  for (std::size_t u = 0; u < k_users; ++u) total *= offsets.size();

  struct Slot {
    std::optional<PerturbationCombination> combination;
    std::string error;
  };
  std::vector<Slot> slots(total);
  const auto m = static_cast<Eigen::Index>(c.m());
  const auto n = static_cast<Eigen::Index>(c.n());
  const auto kk = static_cast<Eigen::Index>(k_users);

  parallel_for(total, options.threads, [&](std::size_t index) {
    PerturbationCombination combo;
    combo.offset_index.resize(k_users);
    std::size_t rest = index;
    for (std::size_t u = k_users; u-- > 0;) {
      combo.offset_index[u] = rest % offsets.size();
      rest /= offsets.size();
    }
    CMatrix h_u(kk, m), g_l(kk, n), h_nr(kk, m);
    for (std::size_t u = 0; u < k_users; ++u) {
      const auto& r = rows[u][combo.offset_index[u]];
      if (!r) {
        slots[index].error = "user " + std::to_string(u) + " offset lies on a wall";
        return;
      }
      h_u.row(static_cast<Eigen::Index>(u)) = r->h_u;
      g_l.row(static_cast<Eigen::Index>(u)) = r->g_l;
      h_nr.row(static_cast<Eigen::Index>(u)) = r->h_no_ris;
    }
    try {
      combo.no_ris_min_rate =
          duality_beamformer(h_nr, p_bs, sigma2, options.duality, options.rate_bandwidth).report.min_rate;
    } catch (const NumericalError& e) {
      slots[index].error = std::string("no-RIS baseline failed: ") + e.what();
      return;
    }
    double best = -std::numeric_limits<double>::infinity();
    std::optional<double> all_off;
    for (std::size_t i = 0; i < enumeration.size(); ++i) {
      if (!port_response[i]) continue;
      try {
        const CMatrix h = h_u + g_l * *port_response[i];
        const double rate =
            duality_beamformer(h, p_bs, sigma2, options.duality, options.rate_bandwidth).report.min_rate;
        best = std::max(best, rate);
        if (i == 0) all_off = rate;
      } catch (const NumericalError&) {
      }
    }
    if (!std::isfinite(best)) {
      slots[index].error = "every RIS configuration failed";
      return;
    }
    combo.best_min_rate = best;
    combo.improvement = best - combo.no_ris_min_rate;
    combo.all_off_improvement =
        all_off ? *all_off - combo.no_ris_min_rate : -std::numeric_limits<double>::infinity();
    slots[index].combination = std::move(combo);
  });

  PerturbationResult result;
  std::vector<double> improvements;
  for (auto& slot : slots) {
    if (slot.combination) {
      improvements.push_back(slot.combination->improvement);
      result.combinations.push_back(std::move(*slot.combination));
    } else {
      ++result.skipped;
      result.errors.push_back(slot.error);
    }
  }
  result.histogram = build_histogram(improvements, options.bin_width);
  return result;
}

}  // namespace risopt
