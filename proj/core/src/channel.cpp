#include "risopt/channel.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "risopt/error.hpp"

namespace risopt {

namespace {

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h = 1469598103934665603ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

void check_dimensions(const ChannelComponents& c, const CVector& z_loads) {
  if (static_cast<std::size_t>(z_loads.size()) != c.n()) {
    throw InvalidInput("load vector length " + std::to_string(z_loads.size()) +
                       " does not match N = " + std::to_string(c.n()));
  }
  if (c.h_0.rows() != c.z_ll.rows() || c.g_l.cols() != c.z_ll.rows() ||
      c.h_0.cols() != c.h_u.cols() || c.g_l.rows() != c.h_u.rows()) {
    throw InvalidInput("channel component dimensions are inconsistent");
  }
}

}  // namespace

std::uint64_t fingerprint(const CVector& z_loads) {
  return fnv1a(z_loads.data(), static_cast<std::size_t>(z_loads.size()) * sizeof(Complex));
}

std::uint64_t fingerprint(const RisConfiguration& config) {
  return fnv1a(config.capacitances.data(), config.capacitances.size() * sizeof(double));
}

EffectiveChannel assemble_effective_channel(const ChannelComponents& c, const CVector& z_loads) {
  check_dimensions(c, z_loads);
  EffectiveChannel h;
  h.z_loads_ = z_loads;
  h.fingerprint_ = fingerprint(z_loads);
  h.frequency_hz_ = c.frequency_hz;

  CMatrix system = -c.z_ll;
  system.diagonal() += z_loads;
  h.lu_.compute(system);
  h.rcond_ = h.lu_.rcond();
  if (!(h.rcond_ * kConditionLimit >= 1.0)) {
    std::ostringstream msg;
    msg << "load impedance system is singular or ill-conditioned (rcond " << h.rcond_
        << ") for configuration " << std::hex << h.fingerprint_;
    throw SingularityError(msg.str());
  }
  h.port_response_ = h.lu_.solve(c.h_0);
  // G Z^-1 = (Z^-T G^T)^T
  CMatrix coupling_t(c.n(), c.k());
  h.lu_.template _solve_impl_transposed<false>(c.g_l.transpose(), coupling_t);
  h.user_coupling_ = coupling_t.transpose();
  h.matrix_ = c.h_u + c.g_l * h.port_response_;
  return h;
}

EffectiveChannel assemble_effective_channel(const ChannelComponents& c, const VaractorModel& model,
                                            const RisConfiguration& config) {
  return assemble_effective_channel(c, load_impedances(model, config, c.frequency_hz));
}

CMatrix received_signals(const CMatrix& channel, const CMatrix& weights) {
  if (channel.cols() != weights.rows()) {
    throw InvalidInput("beamformer has " + std::to_string(weights.rows()) +
                       " rows, channel has M = " + std::to_string(channel.cols()));
  }
  return channel * weights;
}

CMatrix received_signals(const EffectiveChannel& h, const BeamformerMatrix& w) {
  return received_signals(h.matrix(), w.weights);
}

CMatrix channel_derivative(const EffectiveChannel& h, std::size_t element, double capacitance) {
  if (element >= h.n()) throw InvalidInput("RIS element index out of range");
  const auto n = static_cast<Eigen::Index>(element);
  const Complex dz = load_impedance_derivative(capacitance, h.frequency_hz());
  // d(Z^-1)/dC = -Z^-1 (dz e_n e_n^T) Z^-1
  return -dz * h.user_coupling().col(n) * h.port_response().row(n);
}

CMatrix channel_derivative(const ChannelComponents& c, const VaractorModel& model,
                           const RisConfiguration& config, std::size_t element,
                           double frequency_hz) {
  const EffectiveChannel h =
      assemble_effective_channel(c, load_impedances(model, config, frequency_hz));
  return channel_derivative(h, element, config.capacitances.at(element));
}

CMatrix group_channel_derivative(const EffectiveChannel& h, const RisConfiguration& config,
                                 std::size_t group) {
  CMatrix total = CMatrix::Zero(static_cast<Eigen::Index>(h.k()), static_cast<Eigen::Index>(h.m()));
  for (std::size_t e : config.groups.at(group)) {
    total += channel_derivative(h, e, config.capacitances.at(e));
  }
  return total;
}

Eigen::RowVectorXcd channel_row_derivative(const EffectiveChannel& h, std::size_t user,
                                           std::size_t element, double capacitance) {
  const auto n = static_cast<Eigen::Index>(element);
  const Complex dz = load_impedance_derivative(capacitance, h.frequency_hz());
  return -dz * h.user_coupling()(static_cast<Eigen::Index>(user), n) * h.port_response().row(n);
}

std::vector<double> evaluate_gain_map(const EffectiveChannel& grid, const BeamformerMatrix& w,
                                      std::size_t beam) {
  if (beam >= static_cast<std::size_t>(w.weights.cols())) {
    throw InvalidInput("beam index " + std::to_string(beam) + " out of range");
  }
  if (w.weights.rows() != grid.matrix().cols()) {
    throw InvalidInput("beamformer does not match the grid channel width");
  }
  const CVector response = grid.matrix() * w.weights.col(static_cast<Eigen::Index>(beam));
  std::vector<double> gains(static_cast<std::size_t>(response.size()), kGainFloorDb);
  if (!(w.power_budget > 0.0)) return gains;
  for (Eigen::Index g = 0; g < response.size(); ++g) {
    const double ratio = std::norm(response(g)) / w.power_budget;
    if (ratio > 0.0) gains[static_cast<std::size_t>(g)] = std::max(kGainFloorDb, 10.0 * std::log10(ratio));
  }
  return gains;
}

}  // namespace risopt
