#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "risopt/error.hpp"
#include "risopt/tools/csv.hpp"
#include "risopt/tools/experiments.hpp"

using namespace risopt;
using namespace risopt::tools;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "risopt_experiments_test" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Csv, RenderParseRoundTrip) {
  CsvTable t;
  t.comments = {"first", "second"};
  t.header = {"a", "b"};
  t.rows = {{"1", format_double(0.1)}, {"x", format_double(-1e-300)}};
  const auto back = parse_csv(t.render());
  EXPECT_EQ(back.comments, t.comments);
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.column("b"), 1U);
  EXPECT_THROW(back.column("c"), std::exception);
  EXPECT_EQ(parse_double(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_TRUE(std::isnan(parse_double("nan")));
}

TEST(Units, PerHertzConversions) {
  EXPECT_NEAR(dbm_per_hz(30.0, 40e6), 30.0 - 10.0 * std::log10(40e6), 1e-12);
  EXPECT_NEAR(watts_to_dbm_per_hz(1.0, 1.0), 30.0, 1e-12);
}

TEST(ExperimentConfig, RejectsBadValues) {
  ExperimentConfig cfg;
  cfg.bandwidth_hz = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.bin_width = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.channel_format = "xml";
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ChannelCsv, RoundTripIsBitExact) {
  const auto c = synthesize_components(default_scene()).components;
  const auto back = components_from_csv(components_to_csv(c));
  EXPECT_EQ(back.h_u, c.h_u);
  EXPECT_EQ(back.h_0, c.h_0);
  EXPECT_EQ(back.g_l, c.g_l);
  EXPECT_EQ(back.z_ll, c.z_ll);
  EXPECT_EQ(back.frequency_hz, c.frequency_hz);
  ASSERT_EQ(back.h_no_ris.has_value(), c.h_no_ris.has_value());
}

TEST(ShippedScene, MatchesBuiltInDefault) {
  const auto shipped = parse_json_file(fs::path(RISOPT_SOURCE_DIR) / "tools/data/default_scene.json");
  EXPECT_EQ(shipped, scene_to_json(default_scene()));
}

TEST(PowerSweep, FivePowersTwoModesGiveTenRows) {
  ExperimentConfig cfg;
  cfg.out_dir = fresh_dir("sweep");
  cfg.modes = {SweepMode::NoRis, SweepMode::Continuous};
  cfg.reproducible = true;
  cfg.max_sweeps = 5;
  run_power_sweep(cfg);
  const auto t = read_csv(cfg.out_dir / "sweep.csv");
  ASSERT_EQ(t.rows.size(), 10U);
  const auto i_mode = t.column("mode"), i_rate = t.column("min_rate_bps_hz"), i_p = t.column("p_dbm");
  const auto i_ph = t.column("p_dbm_per_hz");
  for (std::size_t r = 0; r < t.rows.size(); r += 2) {
    EXPECT_EQ(t.rows[r][i_mode], "no-ris");
    EXPECT_EQ(t.rows[r + 1][i_mode], "continuous");
    EXPECT_EQ(t.rows[r][i_p], t.rows[r + 1][i_p]);
    EXPECT_GE(parse_double(t.rows[r + 1][i_rate]), parse_double(t.rows[r][i_rate]));
    EXPECT_NEAR(parse_double(t.rows[r][i_ph]), dbm_per_hz(parse_double(t.rows[r][i_p]), cfg.bandwidth_hz),
                1e-9);
  }
  for (const auto& c : t.comments) EXPECT_EQ(c.find("generated"), std::string::npos);
}

TEST(PowerSweep, TimestampOnlyWithoutReproducible) {
  ExperimentConfig cfg;
  cfg.out_dir = fresh_dir("stamp");
  cfg.modes = {SweepMode::NoRis};
  cfg.powers_dbm = {20.0};
  run_power_sweep(cfg);
  const auto t = read_csv(cfg.out_dir / "sweep.csv");
  ASSERT_FALSE(t.comments.empty());
  EXPECT_EQ(t.comments.front().rfind("generated ", 0), 0U);
}

TEST(GainMap, BeamPeaksAtItsOwnUser) {
  ExperimentConfig cfg;
  cfg.out_dir = fresh_dir("gain_opt");
  cfg.reproducible = true;
  cfg.max_sweeps = 5;
  run_optimize(cfg);
  const auto ris = ris_config_from_json(parse_json_file(cfg.out_dir / "ris_config.json"), 20);

  auto scene = default_scene();
  const auto users = scene.users;
  const auto system_c = synthesize_components(scene).components;
  const auto h_users = assemble_effective_channel(system_c, default_varactor(), ris);
  const auto w = duality_beamformer(h_users, dbm_to_watts(kDefaultPowerDbm),
                                    noise_power(cfg.temperature_k, cfg.bandwidth_hz))
                     .beamformer;
  const CMatrix y = received_signals(h_users, w);
  for (std::size_t k = 0; k < users.size(); ++k) {
    scene.grid = ObservationGrid{users[k], 0.1, 0.1, 1, 1};
    const auto grid = synthesize_grid_components(scene).components;
    const auto h = assemble_effective_channel(grid, default_varactor(), ris);
    std::vector<double> at_user;
    for (std::size_t b = 0; b < users.size(); ++b) {
      at_user.push_back(evaluate_gain_map(h, w, b)[0]);
      const auto kk = static_cast<Eigen::Index>(k), bb = static_cast<Eigen::Index>(b);
      EXPECT_NEAR(at_user.back(), 10.0 * std::log10(std::norm(y(kk, bb)) / w.power_budget), 1e-9);
    }
    for (std::size_t b = 0; b < users.size(); ++b) {
      if (b != k) EXPECT_GT(at_user[k], at_user[b]) << "user " << k << " beam " << b;
    }
  }
}

TEST(GainMap, WritesOneFilePerBeam) {
  ExperimentConfig cfg;
  cfg.out_dir = fresh_dir("gain");
  cfg.reproducible = true;
  cfg.max_sweeps = 5;
  const auto s = run_gain_map(cfg);
  const auto grid = *default_scene().grid;
  for (int b = 0; b < 3; ++b) {
    const auto t = read_csv(cfg.out_dir / ("gain_beam_" + std::to_string(b) + ".csv"));
    EXPECT_EQ(t.rows.size(), grid.nx * grid.ny);
  }
  EXPECT_FALSE(fs::exists(cfg.out_dir / "gain_beam_3.csv"));
  cfg.channels_path = cfg.out_dir / "channels.json";
  EXPECT_THROW(run_gain_map(cfg), InvalidInput);
}

TEST(Exhaustive, WritesRankingAndHistogram) {
  ExperimentConfig cfg;
  cfg.out_dir = fresh_dir("exhaustive");
  cfg.reproducible = true;
  run_exhaustive(cfg);
  const auto hist = read_csv(cfg.out_dir / "histogram.csv");
  std::size_t total = 0;
  for (const auto& row : hist.rows) total += static_cast<std::size_t>(parse_double(row[hist.column("count")]));
  EXPECT_EQ(total, 1024U);
  const auto summary = parse_json_file(cfg.out_dir / "summary.json");
  EXPECT_FALSE(summary.contains("generated_at"));
  const auto best = ris_config_from_json(parse_json_file(cfg.out_dir / "best_config.json"), 20);
  for (double c : best.capacitances) EXPECT_TRUE(c == best.c_on || c == best.c_off);
}

TEST(ChannelConvert, CsvAndJsonAgree) {
  ExperimentConfig cfg;
  cfg.out_dir = fresh_dir("convert_json");
  cfg.reproducible = true;
  run_channel_convert(cfg);
  ExperimentConfig csv = cfg;
  csv.out_dir = fresh_dir("convert_csv");
  csv.channel_format = "csv";
  run_channel_convert(csv);
  ExperimentConfig back = cfg;
  back.out_dir = fresh_dir("convert_back");
  back.channels_path = csv.out_dir / "channels.csv";
  run_channel_convert(back);
  EXPECT_EQ(slurp(back.out_dir / "channels.json"), slurp(cfg.out_dir / "channels.json"));
}

TEST(Outputs, EveryFileReparses) {
  const auto root = fresh_dir("reparse");
  ExperimentConfig base;
  base.reproducible = true;
  base.max_sweeps = 3;
  base.offsets_per_axis = 1;
  base.powers_dbm = {20.0, 30.0};
  using Runner = CommandSummary (*)(const ExperimentConfig&);
  const std::vector<std::pair<std::string, Runner>> runners{
      {"scene", run_scene_trace},  {"convert", run_channel_convert}, {"optimize", run_optimize},
      {"sweep", run_power_sweep},  {"exhaustive", run_exhaustive},   {"perturb", run_perturbation},
      {"gainmap", run_gain_map},
  };
  std::size_t checked = 0;
  for (const auto& [name, run] : runners) {
    ExperimentConfig cfg = base;
    cfg.out_dir = root / name;
    for (const auto& file : run(cfg).files) {
      ASSERT_TRUE(fs::exists(file)) << file;
      const auto ext = file.extension().string();
      const auto stem = file.filename().string();
      if (ext == ".csv") {
        const auto t = read_csv(file);
        for (const auto& row : t.rows) EXPECT_EQ(row.size(), t.header.size()) << file;
      } else {
        ASSERT_EQ(ext, ".json") << file;
        const auto j = parse_json_file(file);
        if (stem == "channels.json") EXPECT_NO_THROW(load_components(file));
        if (stem == "ris_config.json" || stem == "best_config.json") {
          EXPECT_NO_THROW(ris_config_from_json(j, 20).validate(default_varactor())) << file;
        }
      }
      ++checked;
    }
  }
  EXPECT_GE(checked, 15U);
}
