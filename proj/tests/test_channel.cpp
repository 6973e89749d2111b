#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "risopt/channel.hpp"
#include "risopt/error.hpp"

using namespace risopt;

namespace {

double rel(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / b.norm(); }

CVector loads_for(const VaractorModel& model, const std::vector<double>& caps, double f) {
  CVector z(static_cast<Eigen::Index>(caps.size()));
  for (std::size_t i = 0; i < caps.size(); ++i) z(static_cast<Eigen::Index>(i)) = load_impedance(model, caps[i], f);
  return z;
}

}  // namespace

TEST(EffectiveChannel, ScalarHandArithmetic) {
  ChannelComponents c;
  c.frequency_hz = 1e9;
  c.h_u = CMatrix::Constant(1, 1, 1.0);
  c.g_l = CMatrix::Constant(1, 1, 2.0);
  c.h_0 = CMatrix::Constant(1, 1, 3.0);
  c.z_ll = CMatrix::Constant(1, 1, 1.0);
  const auto h = assemble_effective_channel(c, CVector::Constant(1, 5.0));
  EXPECT_NEAR(std::abs(h.matrix()(0, 0) - Complex(2.5, 0.0)), 0.0, 1e-15);
}

TEST(EffectiveChannel, ZeroCouplingLeavesDirectChannel) {
  std::mt19937_64 rng(11);
  auto c = oracle::random_components(rng, 3, 3, 20);
  c.g_l.setZero();
  const auto z = loads_for(default_varactor(), oracle::random_capacitances(rng, 20), c.frequency_hz);
  EXPECT_EQ(assemble_effective_channel(c, z).matrix(), c.h_u);
}

TEST(EffectiveChannel, MatchesDenseInverseOracle) {
  std::mt19937_64 rng(12);
  const auto model = default_varactor();
  for (int trial = 0; trial < 25; ++trial) {
    const auto c = oracle::random_components(rng, 3, 3, 20);
    const auto z1 = loads_for(model, oracle::random_capacitances(rng, 20), c.frequency_hz);
    const auto z2 = loads_for(model, oracle::random_capacitances(rng, 20), c.frequency_hz);
    const CMatrix h1 = assemble_effective_channel(c, z1).matrix();
    const CMatrix h2 = assemble_effective_channel(c, z2).matrix();
    const CMatrix o1 = oracle::effective_channel(c, z1);
    const CMatrix o2 = oracle::effective_channel(c, z2);
    EXPECT_LT(rel(h1, o1), 1e-10);
    EXPECT_LT(rel(h2, o2), 1e-10);
    EXPECT_LT(rel(h1 - h2, o1 - o2), 1e-10);
  }
}

TEST(EffectiveChannel, CachedSolvesAreConsistent) {
  std::mt19937_64 rng(13);
  const auto c = oracle::random_components(rng, 3, 4, 8);
  const auto z = loads_for(default_varactor(), oracle::random_capacitances(rng, 8), c.frequency_hz);
  const auto h = assemble_effective_channel(c, z);
  CMatrix sys = -c.z_ll;
  sys.diagonal() += z;
  const CMatrix inv = oracle::dense_inverse(sys);
  EXPECT_LT(rel(h.port_response(), inv * c.h_0), 1e-12);
  EXPECT_LT(rel(h.user_coupling(), c.g_l * inv), 1e-12);
}

TEST(EffectiveChannel, UnloadedLimitAtTinyCapacitance) {
  std::mt19937_64 rng(14);
  auto model = default_varactor();
  const auto c = oracle::random_components(rng, 3, 3, 20);
  const auto z = loads_for(model, std::vector<double>(20, 1e-18), c.frequency_hz);
  const CMatrix h = assemble_effective_channel(c, z).matrix();
  EXPECT_LT(rel(h, c.h_u), 1e-6);
}

TEST(EffectiveChannel, SingularSystemIsReported) {
  ChannelComponents c;
  c.frequency_hz = 1e9;
  c.h_u = CMatrix::Constant(1, 1, 1.0);
  c.g_l = CMatrix::Constant(1, 1, 1.0);
  c.h_0 = CMatrix::Constant(1, 1, 1.0);
  c.z_ll = CMatrix::Constant(1, 1, Complex(2.0, 1.0));
  EXPECT_THROW(assemble_effective_channel(c, CVector::Constant(1, Complex(2.0, 1.0))), SingularityError);
}

TEST(EffectiveChannel, FingerprintTracksLoads) {
  std::mt19937_64 rng(15);
  const auto c = oracle::random_components(rng, 2, 2, 4);
  const auto model = default_varactor();
  const auto caps = oracle::random_capacitances(rng, 4);
  auto caps2 = caps;
  caps2[2] *= 1.01;
  const auto a = assemble_effective_channel(c, loads_for(model, caps, c.frequency_hz));
  const auto b = assemble_effective_channel(c, loads_for(model, caps, c.frequency_hz));
  const auto d = assemble_effective_channel(c, loads_for(model, caps2, c.frequency_hz));
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  EXPECT_NE(a.fingerprint(), d.fingerprint());
}

TEST(ReceivedSignals, IdentityAndScalarCases) {
  const CMatrix eye = CMatrix::Identity(3, 3);
  EXPECT_EQ(received_signals(eye, eye), eye);
  CMatrix h(1, 2), w(2, 1);
  h << Complex(1, 2), Complex(0, -1);
  w << Complex(0.5, 0), Complex(2, 1);
  EXPECT_EQ(received_signals(h, w)(0, 0), h(0, 0) * w(0, 0) + h(0, 1) * w(1, 0));
  EXPECT_THROW(received_signals(h, CMatrix::Identity(3, 3)), InvalidInput);
}

TEST(ReceivedSignals, MatchesLoopOracle) {
  std::mt19937_64 rng(16);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    CMatrix h(3, 4), w(4, 3);
    for (auto* m : {&h, &w}) {
      for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = Complex(g(rng), g(rng));
    }
    const CMatrix y = received_signals(h, w);
    const CMatrix o = oracle::received(h, w);
    EXPECT_LT((y - o).cwiseAbs().maxCoeff() / o.cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(ChannelDerivative, MatchesCentralDifference) {
  std::mt19937_64 rng(17);
  const auto model = default_varactor();
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = oracle::random_components(rng, 3, 3, 20);
    auto caps = oracle::random_capacitances(rng, 20);
    RisConfiguration config = uniform_configuration(element_grouping(20), 20, 0.5e-12,
                                                    ControlMode::ContinuousPerElement);
    config.capacitances = caps;
    const std::size_t n = static_cast<std::size_t>(trial) % 20;
    const CMatrix analytic = channel_derivative(c, model, config, n, c.frequency_hz);
    const double step = 1e-4 * caps[n];
    auto at = [&](double value) {
      auto shifted = caps;
      shifted[n] = value;
      return oracle::effective_channel(c, loads_for(model, shifted, c.frequency_hz));
    };
    const CMatrix fd = (at(caps[n] + step) - at(caps[n] - step)) / (2.0 * step);
    EXPECT_LT(rel(analytic, fd), 1e-5) << "trial " << trial;
  }
}

TEST(ChannelDerivative, ZeroCouplingAndGroupSum) {
  std::mt19937_64 rng(18);
  const auto model = default_varactor();
  auto c = oracle::random_components(rng, 3, 3, 20);
  auto config = uniform_configuration(column_grouping(20, 1, 2), 20, 0.38e-12,
                                      ControlMode::ColumnPairedOneBit);
  const auto h = assemble_effective_channel(c, model, config);
  for (std::size_t g = 0; g < 10; ++g) {
    const CMatrix sum = channel_derivative(h, 2 * g, config.capacitances[2 * g]) +
                        channel_derivative(h, 2 * g + 1, config.capacitances[2 * g + 1]);
    EXPECT_LT(rel(group_channel_derivative(h, config, g), sum), 1e-15);
    for (std::size_t k = 0; k < 3; ++k) {
      const Eigen::RowVectorXcd row = channel_row_derivative(h, k, 2 * g, config.capacitances[2 * g]);
      EXPECT_EQ(row, channel_derivative(h, 2 * g, config.capacitances[2 * g]).row(static_cast<Eigen::Index>(k)));
    }
  }
  c.g_l.setZero();
  const auto h0 = assemble_effective_channel(c, model, config);
  EXPECT_EQ(channel_derivative(h0, 3, config.capacitances[3]).norm(), 0.0);
}

TEST(GainMap, FreeSpaceSpreadingLaw) {
  SceneDescription s;
  s.bs_elements = {{0, 0}};
  s.users = {{1, 0}};
  s.ris.origin = {-50, 0};
  s.ris.n_ports = 1;
  s.ris.reflector_coefficient = 0.0;
  s.scaling.port_transfer_ohms = 0.0;
  s.max_reflection_order = 0;
  s.grid = ObservationGrid{{1.0, 0.0}, 0.5, 0.1, 8, 1};
  const auto grid = synthesize_grid_components(s).components;
  const auto h = assemble_effective_channel(grid, default_varactor(),
                                            uniform_configuration({{0}}, 1, 0.5e-12, ControlMode::ContinuousPerColumn));
  BeamformerMatrix w{CMatrix::Constant(1, 1, 1.0), 1.0};
  const auto gains = evaluate_gain_map(h, w, 0);
  ASSERT_EQ(gains.size(), 8U);
  for (std::size_t i = 1; i < gains.size(); ++i) {
    EXPECT_LT(gains[i], gains[i - 1]);
    const double d0 = 1.0 + 0.5 * static_cast<double>(i - 1), d1 = d0 + 0.5;
    EXPECT_NEAR(gains[i - 1] - gains[i], 20.0 * std::log10(d1 / d0), 1e-9);
  }
}

TEST(GainMap, ZeroBeamformerAndZeroBudgetHitTheFloor) {
  std::mt19937_64 rng(19);
  const auto c = oracle::random_components(rng, 5, 3, 4);
  const auto h = assemble_effective_channel(c, default_varactor(),
                                            uniform_configuration(element_grouping(4), 4, 0.5e-12,
                                                                  ControlMode::ContinuousPerElement));
  const BeamformerMatrix zero{CMatrix::Zero(3, 2), 1.0};
  for (double g : evaluate_gain_map(h, zero, 1)) EXPECT_EQ(g, kGainFloorDb);
  const BeamformerMatrix no_budget{CMatrix::Zero(3, 2), 0.0};
  for (double g : evaluate_gain_map(h, no_budget, 0)) EXPECT_EQ(g, kGainFloorDb);
  EXPECT_THROW(evaluate_gain_map(h, zero, 2), InvalidInput);
}
