#pragma once

// Max-min SINR downlink beamforming through uplink-downlink duality.

#include <string>
#include <vector>

#include "risopt/channel.hpp"
#include "risopt/types.hpp"

namespace risopt {

// Thermal noise kTB in watts.
double noise_power(double temperature_k, double bandwidth_hz);

struct SinrReport {
  RVector sinr;                     // linear
  RVector rates;                    // rate_bandwidth * log2(1 + sinr)
  double min_rate = 0.0;
  double avg_received_power = 0.0;  // mean over users of sum_j |Y[k, j]|^2
  double noise_power = 0.0;
  double rate_bandwidth = 1.0;      // 1 => bps/Hz
  std::vector<std::string> warnings;

  double min_sinr() const { return sinr.size() ? sinr.minCoeff() : 0.0; }
};

// SINR_k = |Y[k,k]|^2 / (sum_{j != k} |Y[k,j]|^2 + sigma2)
RVector downlink_sinr(const CMatrix& y, double sigma2);

SinrReport make_report(const CMatrix& y, double sigma2, double rate_bandwidth = 1.0);

// MMSE receive combiners, one column per user:
//   w_k = sqrt(q_k) (sigma2 I + sum_j q_j H_j^H H_j)^-1 H_k^H
CMatrix mmse_combiner(const CMatrix& h, const RVector& q, double sigma2);

RVector uplink_sinr(const CMatrix& h, const CMatrix& w_ul, const RVector& q, double sigma2);

struct PowerBalanceSettings {
  double tolerance = 1e-6;  // on the change of the minimum uplink SINR
  int max_iterations = 50;
};

struct PowerBalanceResult {
  RVector q;        // uplink powers, sum = p_bs
  CMatrix w_ul;     // MMSE combiners for q
  RVector sinr_ul;  // uplink SINRs for (q, w_ul)
  int iterations = 0;
  bool converged = false;
};

// Fixed-point uplink power balancing q_k <- q_k min_i SINR_i / SINR_k,
// renormalized to sum p_bs after every update. Starts from p_bs / K.
PowerBalanceResult fixed_point_power_balance(const CMatrix& h, double p_bs, double sigma2,
                                             const PowerBalanceSettings& settings = {});

// Solves p_k G(k,k) - SINR_k sum_{j != k} p_j G(k,j) = SINR_k sigma2 with
// G(k,j) = |H_k w_j|^2. Throws DualityError on a singular system or a
// negative power.
RVector downlink_power_recovery(const CMatrix& h, const CMatrix& w_ul, const RVector& sinr_ul,
                                double sigma2);

struct DualityResult {
  BeamformerMatrix beamformer;
  SinrReport report;
  PowerBalanceResult uplink;
  RVector downlink_powers;
};

inline constexpr double kPowerConservationTolerance = 1e-8;
inline constexpr double kDualityMismatchWarning = 1e-6;

DualityResult duality_beamformer(const CMatrix& h, double p_bs, double sigma2,
                                 const PowerBalanceSettings& settings = {},
                                 double rate_bandwidth = 1.0);
DualityResult duality_beamformer(const EffectiveChannel& h, double p_bs, double sigma2,
                                 const PowerBalanceSettings& settings = {},
                                 double rate_bandwidth = 1.0);

}  // namespace risopt
