#pragma once

#include <cstdint>
#include <vector>

#include "risopt/ris_model.hpp"
#include "risopt/scene.hpp"
#include "risopt/types.hpp"

namespace risopt {

// M x K transmit weights, one column per user stream.
struct BeamformerMatrix {
  CMatrix weights;
  double power_budget = 0.0;  // W

  double total_power() const { return weights.squaredNorm(); }
};

inline constexpr double kConditionLimit = 1e12;

// H~ = H_u + G_l (diag(Z_L) - Z_ll)^-1 H_0, together with the LU factors of
// the load system and the two one-sided solves reused by derivatives.
class EffectiveChannel {
 public:
  const CMatrix& matrix() const { return matrix_; }
  const Eigen::PartialPivLU<CMatrix>& factorization() const { return lu_; }
  // (diag(Z_L) - Z_ll)^-1 H_0, N x M
  const CMatrix& port_response() const { return port_response_; }
  // G_l (diag(Z_L) - Z_ll)^-1, K x N
  const CMatrix& user_coupling() const { return user_coupling_; }
  const CVector& load_impedances() const { return z_loads_; }
  std::uint64_t fingerprint() const { return fingerprint_; }
  double frequency_hz() const { return frequency_hz_; }
  double reciprocal_condition() const { return rcond_; }

  std::size_t k() const { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t m() const { return static_cast<std::size_t>(matrix_.cols()); }
  std::size_t n() const { return static_cast<std::size_t>(z_loads_.size()); }

  // (diag(Z_L) - Z_ll)^-1 rhs using the cached factorization.
  CMatrix solve(const CMatrix& rhs) const { return lu_.solve(rhs); }

 private:
  friend EffectiveChannel assemble_effective_channel(const ChannelComponents& c,
                                                     const CVector& z_loads);
  CMatrix matrix_;
  Eigen::PartialPivLU<CMatrix> lu_;
  CMatrix port_response_;
  CMatrix user_coupling_;
  CVector z_loads_;
  std::uint64_t fingerprint_ = 0;
  double frequency_hz_ = 0.0;
  double rcond_ = 0.0;
};

std::uint64_t fingerprint(const CVector& z_loads);
std::uint64_t fingerprint(const RisConfiguration& config);

// Throws SingularityError when the load system is singular or its estimated
// condition number exceeds kConditionLimit.
EffectiveChannel assemble_effective_channel(const ChannelComponents& c, const CVector& z_loads);
EffectiveChannel assemble_effective_channel(const ChannelComponents& c, const VaractorModel& model,
                                            const RisConfiguration& config);

// Y[k, j] = H~_k w_j
CMatrix received_signals(const CMatrix& channel, const CMatrix& weights);
CMatrix received_signals(const EffectiveChannel& h, const BeamformerMatrix& w);

// dH~/dC for one element, given its current capacitance.
CMatrix channel_derivative(const EffectiveChannel& h, std::size_t element, double capacitance);
CMatrix channel_derivative(const ChannelComponents& c, const VaractorModel& model,
                           const RisConfiguration& config, std::size_t element,
                           double frequency_hz);
// Chain rule over a group sharing one capacitance.
CMatrix group_channel_derivative(const EffectiveChannel& h, const RisConfiguration& config,
                                 std::size_t group);

// Row k* of dH~/dC for one element (1 x M); the optimizer only needs this row.
Eigen::RowVectorXcd channel_row_derivative(const EffectiveChannel& h, std::size_t user,
                                           std::size_t element, double capacitance);

inline constexpr double kGainFloorDb = -300.0;

// 10 log10(|H~_g w_beam|^2 / P_budget) for every receiver row of `grid`,
// clamped below at kGainFloorDb.
std::vector<double> evaluate_gain_map(const EffectiveChannel& grid, const BeamformerMatrix& w,
                                      std::size_t beam);

}  // namespace risopt
