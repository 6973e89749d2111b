#include "risopt/tools/experiments.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "risopt/error.hpp"
#include "risopt/tools/csv.hpp"

namespace risopt::tools {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class OutputWriter {
 public:
  explicit OutputWriter(const ExperimentConfig& cfg) : cfg_(cfg) {
    fs::create_directories(cfg.out_dir);
    if (!cfg.reproducible) stamp_ = utc_timestamp();
  }

  void csv(const std::string& name, CsvTable table) {
    if (stamp_) table.comments.insert(table.comments.begin(), "generated " + *stamp_);
    write(name, table.render());
  }

  void json(const std::string& name, Json j) {
    if (stamp_) j["generated_at"] = *stamp_;
    write(name, j.dump(2) + "\n");
  }

  CommandSummary& summary() { return summary_; }

 private:
  void write(const std::string& name, const std::string& content) {
    const fs::path path = cfg_.out_dir / name;
    write_file_atomic(path, content);
    summary_.files.push_back(path);
  }

  const ExperimentConfig& cfg_;
  std::optional<std::string> stamp_;
  CommandSummary summary_;
};

std::string fmt(double v) { return format_double(v); }

std::string state_string(const OneBitState& state) {
  std::string s;
  for (auto bit : state) s += bit ? '1' : '0';
  return s;
}

Json report_to_json(const SinrReport& r, double bandwidth_hz) {
  Json j;
  j["sinr"] = std::vector<double>(r.sinr.begin(), r.sinr.end());
  j["rates_bps_hz"] = std::vector<double>(r.rates.begin(), r.rates.end());
  j["min_rate_bps_hz"] = r.min_rate;
  j["avg_rx_power_dbm_per_hz"] = watts_to_dbm_per_hz(r.avg_received_power, bandwidth_hz);
  j["noise_power_w"] = r.noise_power;
  j["warnings"] = r.warnings;
  return j;
}

Json beamformer_to_json(const BeamformerMatrix& w) {
  return {{"power_budget_w", w.power_budget}, {"weights", matrix_to_json(w.weights)}};
}

Json trace_to_json(const OptimizationTrace& trace) {
  Json j;
  j["initial_min_sinr"] = trace.initial_min_sinr;
  j["final_min_sinr"] = trace.final_min_sinr();
  j["final_min_rate_bps_hz"] = trace.final_report.min_rate;
  j["converged"] = trace.converged;
  j["failure"] = trace.failure ? Json(*trace.failure) : Json(nullptr);
  j["beamformer_recomputes"] = trace.beamformer_recomputes;
  j["monotonicity_violations"] = monotonicity_violations(trace);
  Json sweeps = Json::array();
  for (const auto& s : trace.sweeps) {
    sweeps.push_back({{"sweep", s.sweep},
                      {"min_sinr_before", s.min_sinr_before},
                      {"min_sinr_after", s.min_sinr_after},
                      {"accepted_steps", s.accepted_steps}});
  }
  j["sweeps"] = sweeps;
  Json steps = Json::array();
  for (const auto& s : trace.steps) {
    steps.push_back({{"sweep", s.sweep},
                     {"group", s.group},
                     {"step_pf", s.step / kPicofarad},
                     {"min_sinr_before", s.min_sinr_before},
                     {"min_sinr_after", s.min_sinr_after},
                     {"beamformer_recomputes", s.beamformer_recomputes}});
  }
  j["steps"] = steps;
  j["initial_config"] = ris_config_to_json(trace.initial_config);
  j["final_config"] = ris_config_to_json(trace.final_config);
  j["beamformer"] = beamformer_to_json(trace.final_beamformer);
  return j;
}

CsvTable histogram_table(const Histogram& h, const std::string& quantity) {
  CsvTable t;
  t.comments.push_back("histogram of " + quantity + ", bin width " + fmt(h.bin_width));
  t.header = {"bin_left", "bin_right", "count"};
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    t.rows.push_back({fmt(h.bin_left(i)), fmt(h.bin_right(i)), std::to_string(h.counts[i])});
  }
  return t;
}

SystemModel system_at(const ExperimentContext& ctx, double p_dbm) {
  return SystemModel{ctx.components, ctx.varactor, dbm_to_watts(p_dbm), ctx.sigma2};
}

SearchOptions search_options(const ExperimentConfig& cfg) {
  SearchOptions o;
  o.threads = cfg.threads;
  o.bin_width = cfg.bin_width;
  return o;
}

// Continuous optimization from a warm start file or from a seeded random start.
OptimizationTrace optimize_continuous(const ExperimentConfig& cfg, const ExperimentContext& ctx,
                                      double p_dbm) {
  const SystemModel system = system_at(ctx, p_dbm);
  const BcdSettings settings = bcd_settings(cfg);
  if (cfg.ris_config_path) {
    const RisConfiguration warm =
        ris_config_from_json(parse_json_file(*cfg.ris_config_path), ctx.components.n());
    return alternating_optimize_from(system, warm, settings);
  }
  return alternating_optimize(system, default_layout(cfg.control, ctx.components.n()), settings);
}

void add_warnings(CommandSummary& s, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) s.lines.push_back("warning: " + w);
}

}  // namespace

std::string_view to_string(SweepMode mode) {
  switch (mode) {
    case SweepMode::NoRis: return "no-ris";
    case SweepMode::Continuous: return "continuous";
    case SweepMode::OneBitExhaustive: return "onebit-exhaustive";
  }
  return "?";
}

SweepMode sweep_mode_from_string(std::string_view name) {
  if (name == "no-ris") return SweepMode::NoRis;
  if (name == "continuous") return SweepMode::Continuous;
  if (name == "onebit-exhaustive" || name == "onebit") return SweepMode::OneBitExhaustive;
  throw InvalidInput("unknown sweep mode '" + std::string(name) +
                     "' (expected no-ris, continuous or onebit-exhaustive)");
}

void ExperimentConfig::validate() const {
  if (!(bandwidth_hz > 0.0)) throw InvalidInput("bandwidth must be positive");
  if (!(temperature_k > 0.0)) throw InvalidInput("noise temperature must be positive");
  for (double p : powers_dbm) {
    if (!std::isfinite(p)) throw InvalidInput("power levels must be finite");
  }
  if (!(bin_width > 0.0)) throw InvalidInput("histogram bin width must be positive");
  if (restarts < 1) throw InvalidInput("restarts must be at least 1");
  if (max_sweeps < 1) throw InvalidInput("at least one sweep is required");
  if (offsets_per_axis == 0) throw InvalidInput("offset grid needs at least one point per axis");
  if (!(offset_x >= 0.0) || !(offset_y >= 0.0)) throw InvalidInput("offsets must be nonnegative");
  if (channel_format != "json" && channel_format != "csv") {
    throw InvalidInput("channel format must be json or csv");
  }
  if (out_dir.empty()) throw InvalidInput("output directory must not be empty");
}

ExperimentContext load_context(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentContext ctx;
  ctx.scene = cfg.scene_path ? load_scene(*cfg.scene_path) : default_scene();
  ctx.varactor = cfg.varactor_path ? varactor_from_json(parse_json_file(*cfg.varactor_path))
                                   : default_varactor();
  if (cfg.channels_path) {
    ctx.components = load_channel_file(*cfg.channels_path);
  } else {
    SynthesisResult syn = synthesize_components(ctx.scene);
    ctx.components = std::move(syn.components);
    ctx.warnings = std::move(syn.warnings);
  }
  ctx.sigma2 = noise_power(cfg.temperature_k, cfg.bandwidth_hz);
  return ctx;
}

double single_power_dbm(const ExperimentConfig& cfg) {
  return cfg.powers_dbm.empty() ? kDefaultPowerDbm : cfg.powers_dbm.front();
}

double dbm_per_hz(double dbm, double bandwidth_hz) { return dbm - 10.0 * std::log10(bandwidth_hz); }

double watts_to_dbm_per_hz(double watts, double bandwidth_hz) {
  return dbm_per_hz(10.0 * std::log10(watts * 1e3), bandwidth_hz);
}

RisConfiguration default_layout(ControlMode mode, std::size_t n_ports) {
  Grouping groups;
  switch (mode) {
    case ControlMode::ContinuousPerElement: groups = element_grouping(n_ports); break;
    case ControlMode::ContinuousPerColumn: groups = column_grouping(n_ports, 1, 1); break;
    case ControlMode::ColumnPairedOneBit: groups = column_grouping(n_ports, 1, 2); break;
  }
  RisConfiguration layout;
  return uniform_configuration(groups, n_ports, layout.c_off, mode);
}

BcdSettings bcd_settings(const ExperimentConfig& cfg) {
  BcdSettings s;
  s.rng_seed = cfg.seed;
  s.restarts = cfg.restarts;
  s.objective = cfg.line_search;
  s.eps_g = cfg.eps_g;
  s.t_g = cfg.max_sweeps;
  return s;
}

CommandSummary run_scene_trace(const ExperimentConfig& cfg) {
  const ExperimentContext ctx = load_context(cfg);
  const SceneDescription& scene = ctx.scene;
  OutputWriter out(cfg);

  Json links = Json::array();
  auto link = [&](const std::string& from, const Point2& a, const std::string& to, const Point2& b) {
    Json paths = Json::array();
    for (const auto& p : trace_paths(scene, a, b)) {
      paths.push_back({{"order", p.order},
                       {"length_m", p.length},
                       {"walls", p.walls},
                       {"gain", complex_to_json(path_gain(p, scene.frequency_hz))}});
    }
    links.push_back({{"from", from}, {"to", to}, {"paths", paths}});
  };
  const auto ports = scene.ris_ports();
  for (std::size_t b = 0; b < scene.bs_elements.size(); ++b) {
    for (std::size_t u = 0; u < scene.users.size(); ++u) {
      link("bs" + std::to_string(b), scene.bs_elements[b], "user" + std::to_string(u), scene.users[u]);
    }
    for (std::size_t n = 0; n < ports.size(); ++n) {
      link("bs" + std::to_string(b), scene.bs_elements[b], "port" + std::to_string(n), ports[n]);
    }
  }
  for (std::size_t n = 0; n < ports.size(); ++n) {
    for (std::size_t u = 0; u < scene.users.size(); ++u) {
      link("port" + std::to_string(n), ports[n], "user" + std::to_string(u), scene.users[u]);
    }
  }
  std::size_t path_count = 0;
  for (const auto& l : links) path_count += l["paths"].size();

  out.json("paths.json", {{"frequency_hz", scene.frequency_hz},
                          {"max_order", scene.max_reflection_order},
                          {"links", links}});
  out.json("channels.json", components_to_json(ctx.components));
  auto& s = out.summary();
  s.lines.push_back("traced " + std::to_string(links.size()) + " links, " +
                    std::to_string(path_count) + " paths");
  add_warnings(s, ctx.warnings);
  return s;
}

CommandSummary run_channel_convert(const ExperimentConfig& cfg) {
  const ExperimentContext ctx = load_context(cfg);
  OutputWriter out(cfg);
  if (cfg.channel_format == "csv") {
    CsvTable t = parse_csv(components_to_csv(ctx.components));
    out.csv("channels.csv", std::move(t));
  } else {
    out.json("channels.json", components_to_json(ctx.components));
  }
  auto& s = out.summary();
  s.lines.push_back("K=" + std::to_string(ctx.components.k()) + " M=" +
                    std::to_string(ctx.components.m()) + " N=" + std::to_string(ctx.components.n()));
  add_warnings(s, ctx.warnings);
  return s;
}

CommandSummary run_optimize(const ExperimentConfig& cfg) {
  if (cfg.control == ControlMode::ColumnPairedOneBit) {
    throw InvalidInput("optimize runs continuous control; use exhaustive for 1-bit");
  }
  const ExperimentContext ctx = load_context(cfg);
  const double p_dbm = single_power_dbm(cfg);
  const OptimizationTrace trace = optimize_continuous(cfg, ctx, p_dbm);
  if (trace.failure && trace.steps.empty() && trace.final_report.sinr.size() == 0) {
    throw NumericalError("optimization failed: " + *trace.failure);
  }
  OutputWriter out(cfg);
  out.json("trace.json", trace_to_json(trace));
  out.json("ris_config.json", ris_config_to_json(trace.final_config));
  Json report = report_to_json(trace.final_report, cfg.bandwidth_hz);
  report["power_dbm"] = p_dbm;
  report["power_dbm_per_hz"] = dbm_per_hz(p_dbm, cfg.bandwidth_hz);
  report["beamformer"] = beamformer_to_json(trace.final_beamformer);
  out.json("report.json", report);

  auto& s = out.summary();
  s.lines.push_back("min rate " + fmt(trace.final_report.min_rate) + " bps/Hz after " +
                    std::to_string(trace.sweeps.size()) + " sweeps, " +
                    std::to_string(trace.steps.size()) + " accepted steps");
  if (trace.failure) s.lines.push_back("warning: " + *trace.failure);
  add_warnings(s, ctx.warnings);
  add_warnings(s, trace.final_report.warnings);
  return s;
}

CommandSummary run_power_sweep(const ExperimentConfig& cfg) {
  const ExperimentContext ctx = load_context(cfg);
  const std::vector<double>& powers = cfg.powers_dbm.empty() ? kDefaultSweepDbm : cfg.powers_dbm;
  const std::vector<SweepMode> modes =
      cfg.modes.empty()
          ? std::vector<SweepMode>{SweepMode::NoRis, SweepMode::Continuous, SweepMode::OneBitExhaustive}
          : cfg.modes;

  CsvTable t;
  t.comments.push_back("min_rate_bps_hz: worst-user rate log2(1 + SINR)");
  t.comments.push_back(
      "avg_rx_power_db: mean over users of sum_j |Y[k,j]|^2, in dBm/Hz with B = " +
      fmt(cfg.bandwidth_hz) + " Hz");
  t.header = {"p_dbm", "p_dbm_per_hz", "mode", "min_rate_bps_hz", "avg_rx_power_db"};
  std::vector<std::string> log;
  for (double p : powers) {
    const SystemModel system = system_at(ctx, p);
    for (SweepMode mode : modes) {
      double rate = kNaN;
      double power = kNaN;
      try {
        switch (mode) {
          case SweepMode::NoRis: {
            const auto d = duality_beamformer(ctx.components.baseline_channel(), system.p_bs,
                                              system.sigma2);
            rate = d.report.min_rate;
            power = d.report.avg_received_power;
            break;
          }
          case SweepMode::Continuous: {
            const auto trace = optimize_continuous(cfg, ctx, p);
            if (trace.failure) throw NumericalError(*trace.failure);
            rate = trace.final_report.min_rate;
            power = trace.final_report.avg_received_power;
            break;
          }
          case SweepMode::OneBitExhaustive: {
            const auto ex = exhaustive_1bit_search(
                system, default_layout(ControlMode::ColumnPairedOneBit, ctx.components.n()),
                search_options(cfg));
            rate = *ex.best().min_rate;
            power = *ex.best().avg_received_power;
            break;
          }
        }
      } catch (const NumericalError& e) {
        log.push_back(std::string(to_string(mode)) + " at " + fmt(p) + " dBm failed: " + e.what());
      }
      t.rows.push_back({fmt(p), fmt(dbm_per_hz(p, cfg.bandwidth_hz)), std::string(to_string(mode)),
                        fmt(rate), fmt(std::isnan(power) ? kNaN
                                                         : watts_to_dbm_per_hz(power, cfg.bandwidth_hz))});
    }
  }
  OutputWriter out(cfg);
  out.csv("sweep.csv", t);
  auto& s = out.summary();
  for (const auto& row : t.rows) {
    s.lines.push_back(row[0] + " dBm  " + row[2] + "  min rate " + row[3] + " bps/Hz");
  }
  add_warnings(s, log);
  add_warnings(s, ctx.warnings);
  return s;
}

CommandSummary run_exhaustive(const ExperimentConfig& cfg) {
  const ExperimentContext ctx = load_context(cfg);
  const double p_dbm = single_power_dbm(cfg);
  const SystemModel system = system_at(ctx, p_dbm);
  const RisConfiguration layout = default_layout(ControlMode::ColumnPairedOneBit, ctx.components.n());
  const ExhaustiveResult ex = exhaustive_1bit_search(system, layout, search_options(cfg));
  if (ex.ranking.empty()) throw NumericalError("every 1-bit configuration failed to evaluate");

  Json entries = Json::array();
  for (std::size_t r = 0; r < ex.ranking.size(); ++r) {
    const auto& e = ex.entries[ex.ranking[r]];
    entries.push_back({{"rank", r + 1},
                       {"index", ex.ranking[r]},
                       {"state", state_string(e.state)},
                       {"min_rate_bps_hz", *e.min_rate},
                       {"avg_rx_power_dbm_per_hz",
                        watts_to_dbm_per_hz(*e.avg_received_power, cfg.bandwidth_hz)}});
  }
  Json failed = Json::array();
  for (std::size_t i = 0; i < ex.entries.size(); ++i) {
    if (!ex.entries[i].min_rate) {
      failed.push_back({{"index", i}, {"state", state_string(ex.entries[i].state)},
                        {"error", ex.entries[i].error}});
    }
  }
  const Json summary = {{"power_dbm", p_dbm},
                        {"power_dbm_per_hz", dbm_per_hz(p_dbm, cfg.bandwidth_hz)},
                        {"groups", layout.groups.size()},
                        {"evaluated", ex.entries.size()},
                        {"failures", ex.failures},
                        {"best_min_rate_bps_hz", *ex.best().min_rate},
                        {"median_min_rate_bps_hz", ex.median_min_rate()},
                        {"baseline_min_rate_bps_hz", ex.baseline_min_rate},
                        {"beat_baseline_fraction", ex.beat_baseline_fraction}};
  OutputWriter out(cfg);
  out.csv("histogram.csv", histogram_table(ex.histogram, "1-bit min rate (bps/Hz)"));
  Json ranking = summary;
  ranking["entries"] = entries;
  ranking["failed"] = failed;
  out.json("ranking.json", ranking);
  out.json("best_config.json", ris_config_to_json(one_bit_configuration(layout, ex.best().state)));
  out.json("summary.json", summary);

  auto& s = out.summary();
  s.lines.push_back("evaluated " + std::to_string(ex.entries.size()) + " configurations, best " +
                    state_string(ex.best().state) + " at " + fmt(*ex.best().min_rate) + " bps/Hz");
  s.lines.push_back("no-RIS baseline " + fmt(ex.baseline_min_rate) + " bps/Hz, beaten by " +
                    fmt(100.0 * ex.beat_baseline_fraction) + "% of configurations");
  add_warnings(s, ctx.warnings);
  return s;
}

CommandSummary run_perturbation(const ExperimentConfig& cfg) {
  const ExperimentContext ctx = load_context(cfg);
  if (cfg.channels_path) throw InvalidInput("perturb regenerates channels from the scene; drop --channels");
  const double p_dbm = single_power_dbm(cfg);
  const auto offsets =
      offset_grid(cfg.offset_x, cfg.offset_y, cfg.offsets_per_axis, cfg.offsets_per_axis);
  const RisConfiguration layout = default_layout(ControlMode::ColumnPairedOneBit, ctx.components.n());
  const PerturbationResult result = perturbation_study(
      ctx.scene, ctx.varactor, layout, offsets, dbm_to_watts(p_dbm), ctx.sigma2, search_options(cfg));

  CsvTable t;
  t.comments.push_back("improvement = best 1-bit min rate - no-RIS min rate (bps/Hz)");
  t.header = {"combination"};
  const std::size_t k = ctx.scene.users.size();
  for (std::size_t u = 0; u < k; ++u) {
    t.header.push_back("user" + std::to_string(u) + "_dx");
    t.header.push_back("user" + std::to_string(u) + "_dy");
  }
  for (const char* h : {"best_min_rate", "no_ris_min_rate", "improvement", "all_off_improvement"}) {
    t.header.emplace_back(h);
  }
  std::vector<double> improvements;
  for (std::size_t i = 0; i < result.combinations.size(); ++i) {
    const auto& c = result.combinations[i];
    std::vector<std::string> row{std::to_string(i)};
    for (std::size_t u = 0; u < k; ++u) {
      row.push_back(fmt(offsets[c.offset_index[u]].x()));
      row.push_back(fmt(offsets[c.offset_index[u]].y()));
    }
    for (double v : {c.best_min_rate, c.no_ris_min_rate, c.improvement, c.all_off_improvement}) {
      row.push_back(fmt(v));
    }
    t.rows.push_back(std::move(row));
    improvements.push_back(c.improvement);
  }
  Json summary = {{"power_dbm", p_dbm},
                  {"combinations", result.combinations.size()},
                  {"skipped", result.skipped},
                  {"errors", result.errors}};
  if (!improvements.empty()) {
    std::vector<double> sorted = improvements;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    summary["min_improvement"] = sorted.front();
    summary["median_improvement"] = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    summary["max_improvement"] = sorted.back();
  }
  OutputWriter out(cfg);
  out.csv("improvements.csv", t);
  out.csv("histogram.csv", histogram_table(result.histogram, "min-rate improvement (bps/Hz)"));
  out.json("summary.json", summary);

  auto& s = out.summary();
  s.lines.push_back(std::to_string(result.combinations.size()) + " combinations, " +
                    std::to_string(result.skipped) + " skipped");
  if (!improvements.empty()) {
    s.lines.push_back("improvement min " + fmt(summary["min_improvement"].get<double>()) + ", median " +
                      fmt(summary["median_improvement"].get<double>()) + ", max " +
                      fmt(summary["max_improvement"].get<double>()) + " bps/Hz");
  }
  return s;
}

CommandSummary run_gain_map(const ExperimentConfig& cfg) {
  if (cfg.channels_path) throw InvalidInput("gainmap derives the grid channels from the scene; drop --channels");
  const ExperimentContext ctx = load_context(cfg);
  if (!ctx.scene.grid) throw InvalidInput("scene has no observation grid");
  const double p_dbm = single_power_dbm(cfg);
  const OptimizationTrace trace = optimize_continuous(cfg, ctx, p_dbm);
  if (trace.failure) throw NumericalError("optimization failed: " + *trace.failure);

  const SynthesisResult grid = synthesize_grid_components(ctx.scene);
  const EffectiveChannel h =
      assemble_effective_channel(grid.components, ctx.varactor, trace.final_config);
  const auto points = ctx.scene.grid->points();

  OutputWriter out(cfg);
  for (std::size_t beam = 0; beam < trace.final_beamformer.weights.cols(); ++beam) {
    const auto gains = evaluate_gain_map(h, trace.final_beamformer, beam);
    CsvTable t;
    t.comments.push_back("gain_db = 10 log10(|h(x,y) w_" + std::to_string(beam) +
                         "|^2 / P_BS), floor " + fmt(kGainFloorDb) + " dB");
    t.header = {"x", "y", "gain_db"};
    for (std::size_t i = 0; i < points.size(); ++i) {
      t.rows.push_back({fmt(points[i].x()), fmt(points[i].y()), fmt(gains[i])});
    }
    out.csv("gain_beam_" + std::to_string(beam) + ".csv", std::move(t));
  }
  out.json("ris_config.json", ris_config_to_json(trace.final_config));
  auto& s = out.summary();
  s.lines.push_back(std::to_string(trace.final_beamformer.weights.cols()) + " beams over " +
                    std::to_string(points.size()) + " grid points");
  add_warnings(s, grid.warnings);
  return s;
}

std::string components_to_csv(const ChannelComponents& c) {
  CsvTable t;
  t.header = {"matrix", "row", "col", "re", "im"};
  t.rows.push_back({"frequency_hz", "0", "0", fmt(c.frequency_hz), "0"});
  auto emit = [&](const std::string& name, const CMatrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index col = 0; col < m.cols(); ++col) {
        t.rows.push_back({name, std::to_string(r), std::to_string(col), fmt(m(r, col).real()),
                          fmt(m(r, col).imag())});
      }
    }
  };
  emit("h_u", c.h_u);
  emit("h_0", c.h_0);
  emit("g_l", c.g_l);
  emit("z_ll", c.z_ll);
  if (c.h_no_ris) emit("h_no_ris", *c.h_no_ris);
  return t.render();
}

ChannelComponents components_from_csv(const std::string& text) {
  using Kind = FileFormatError::Kind;
  const CsvTable t = parse_csv(text);
  const std::size_t i_name = t.column("matrix"), i_row = t.column("row"), i_col = t.column("col"),
                    i_re = t.column("re"), i_im = t.column("im");
  std::map<std::string, std::vector<std::tuple<std::size_t, std::size_t, Complex>>> entries;
  for (const auto& row : t.rows) {
    const auto r = static_cast<std::size_t>(parse_double(row[i_row]));
    const auto col = static_cast<std::size_t>(parse_double(row[i_col]));
    entries[row[i_name]].emplace_back(r, col, Complex(parse_double(row[i_re]), parse_double(row[i_im])));
  }
  auto build = [&](const std::string& name, bool required) -> std::optional<CMatrix> {
    const auto it = entries.find(name);
    if (it == entries.end()) {
      if (required) throw FileFormatError(Kind::MissingField, name, "missing");
      return std::nullopt;
    }
    std::size_t rows = 0, cols = 0;
    for (const auto& [r, col, v] : it->second) {
      rows = std::max(rows, r + 1);
      cols = std::max(cols, col + 1);
    }
    if (rows * cols != it->second.size()) {
      throw FileFormatError(Kind::DimensionMismatch, name, "incomplete or duplicated entries");
    }
    CMatrix m = CMatrix::Constant(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols),
                                  Complex(kNaN, kNaN));
    for (const auto& [r, col, v] : it->second) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) = v;
    }
    return m;
  };
  ChannelComponents c;
  c.frequency_hz = build("frequency_hz", true)->coeff(0, 0).real();
  c.h_u = *build("h_u", true);
  c.h_0 = *build("h_0", true);
  c.g_l = *build("g_l", true);
  c.z_ll = *build("z_ll", true);
  c.h_no_ris = build("h_no_ris", false);
  // Cross-matrix shape checks name the matrix that disagrees with h_u / z_ll.
  if (c.h_0.cols() != c.h_u.cols()) throw FileFormatError(Kind::DimensionMismatch, "h_0", "M mismatch");
  if (c.h_0.rows() != c.z_ll.rows()) throw FileFormatError(Kind::DimensionMismatch, "h_0", "N mismatch");
  if (c.g_l.rows() != c.h_u.rows() || c.g_l.cols() != c.z_ll.rows()) {
    throw FileFormatError(Kind::DimensionMismatch, "g_l", "shape mismatch");
  }
  c.validate();
  return c;
}

ChannelComponents load_channel_file(const fs::path& path) {
  if (path.extension() == ".csv") {
    std::ifstream in(path);
    if (!in) throw FileFormatError(FileFormatError::Kind::Malformed, path.string(), "cannot open file");
    std::ostringstream text;
    text << in.rdbuf();
    return components_from_csv(text.str());
  }
  return load_components(path);
}

}  // namespace risopt::tools
