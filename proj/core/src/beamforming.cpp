#include "risopt/beamforming.hpp"

#include <cmath>
#include <sstream>

#include "risopt/error.hpp"

namespace risopt {

double noise_power(double temperature_k, double bandwidth_hz) {
  if (!(temperature_k > 0.0)) throw DomainError("noise temperature must be positive");
  if (!(bandwidth_hz > 0.0)) throw DomainError("bandwidth must be positive");
  return constants::kBoltzmann * temperature_k * bandwidth_hz;
}

RVector downlink_sinr(const CMatrix& y, double sigma2) {
  if (!(sigma2 > 0.0)) throw DomainError("noise power must be positive");
  const Eigen::Index k_users = y.rows();
  RVector sinr(k_users);
  for (Eigen::Index k = 0; k < k_users; ++k) {
    const double total = y.row(k).squaredNorm();
    const double desired = std::norm(y(k, k));
    sinr(k) = desired / (total - desired + sigma2);
  }
  return sinr;
}

SinrReport make_report(const CMatrix& y, double sigma2, double rate_bandwidth) {
  SinrReport r;
  r.sinr = downlink_sinr(y, sigma2);
  r.rate_bandwidth = rate_bandwidth;
  r.rates = r.sinr.unaryExpr([&](double s) { return rate_bandwidth * std::log2(1.0 + s); });
  r.min_rate = r.rates.size() ? r.rates.minCoeff() : 0.0;
  r.avg_received_power = y.rows() ? y.squaredNorm() / static_cast<double>(y.rows()) : 0.0;
  r.noise_power = sigma2;
  return r;
}

CMatrix mmse_combiner(const CMatrix& h, const RVector& q, double sigma2) {
  const Eigen::Index k_users = h.rows();
  if (q.size() != k_users) throw InvalidInput("uplink power vector length must equal K");
  // sigma2 I + H^H diag(q) H
  CMatrix gram = h.adjoint() * q.cast<Complex>().asDiagonal() * h;
  gram.diagonal().array() += sigma2;
  const Eigen::LLT<CMatrix> llt(gram);
  if (llt.info() != Eigen::Success) throw SingularityError("MMSE Gram matrix is not positive definite");
  CMatrix w = llt.solve(h.adjoint());
  for (Eigen::Index k = 0; k < k_users; ++k) w.col(k) *= std::sqrt(q(k));
  return w;
}

RVector uplink_sinr(const CMatrix& h, const CMatrix& w_ul, const RVector& q, double sigma2) {
  const Eigen::Index k_users = h.rows();
  // gains(j, k) = |H_j w_k|^2
  const Eigen::MatrixXd gains = (h * w_ul).cwiseAbs2();
  RVector sinr(k_users);
  for (Eigen::Index k = 0; k < k_users; ++k) {
    const double noise = sigma2 * w_ul.col(k).squaredNorm();
    double interference = 0.0;
    for (Eigen::Index j = 0; j < k_users; ++j) {
      if (j != k) interference += q(j) * gains(j, k);
    }
    const double desired = q(k) * gains(k, k);
    const double denom = interference + noise;
    sinr(k) = denom > 0.0 ? desired / denom : 0.0;
  }
  return sinr;
}

PowerBalanceResult fixed_point_power_balance(const CMatrix& h, double p_bs, double sigma2,
                                             const PowerBalanceSettings& settings) {
  if (!(p_bs > 0.0)) throw DomainError("BS power budget must be positive");
  if (!(sigma2 > 0.0)) throw DomainError("noise power must be positive");
  const Eigen::Index k_users = h.rows();
  if (k_users == 0) throw InvalidInput("channel has no users");
  for (Eigen::Index k = 0; k < k_users; ++k) {
    if (h.row(k).squaredNorm() == 0.0) {
      throw InfeasibleUserError(static_cast<std::size_t>(k),
                                "user " + std::to_string(k) + " has an all-zero channel");
    }
  }

  PowerBalanceResult out;
  out.q = RVector::Constant(k_users, p_bs / static_cast<double>(k_users));
  double previous_min = -1.0;
  for (int it = 1;; ++it) {
    out.w_ul = mmse_combiner(h, out.q, sigma2);
    out.sinr_ul = uplink_sinr(h, out.w_ul, out.q, sigma2);
    out.iterations = it;
    const double current_min = out.sinr_ul.minCoeff();
    if (!(current_min > 0.0)) {
      Eigen::Index worst = 0;
      out.sinr_ul.minCoeff(&worst);
      throw InfeasibleUserError(static_cast<std::size_t>(worst),
                                "user " + std::to_string(worst) + " has zero uplink SINR");
    }
    if (it > 1 && std::abs(current_min - previous_min) < settings.tolerance) {
      out.converged = true;
      break;
    }
    if (it >= settings.max_iterations) break;
    previous_min = current_min;
    for (Eigen::Index k = 0; k < k_users; ++k) out.q(k) *= current_min / out.sinr_ul(k);
    out.q *= p_bs / out.q.sum();
  }
  return out;
}

RVector downlink_power_recovery(const CMatrix& h, const CMatrix& w_ul, const RVector& sinr_ul,
                                double sigma2) {
  const Eigen::Index k_users = h.rows();
  const Eigen::MatrixXd gains = (h * w_ul).cwiseAbs2();  // G(k, j)
  Eigen::MatrixXd a(k_users, k_users);
  RVector b(k_users);
  for (Eigen::Index k = 0; k < k_users; ++k) {
    if (!(gains(k, k) > 0.0)) {
      throw DualityError("zero effective downlink gain for user " + std::to_string(k));
    }
    for (Eigen::Index j = 0; j < k_users; ++j) {
      a(k, j) = (j == k) ? gains(k, k) : -sinr_ul(k) * gains(k, j);
    }
    b(k) = sinr_ul(k) * sigma2;
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw DualityError("downlink power system is singular");
  RVector p = lu.solve(b);
  for (Eigen::Index k = 0; k < k_users; ++k) {
    if (!(p(k) >= 0.0)) {
      std::ostringstream msg;
      msg << "duality recovery produced negative power " << p(k) << " for user " << k
          << " (uplink SINR " << sinr_ul(k) << ")";
      throw DualityError(msg.str());
    }
  }
  return p;
}

DualityResult duality_beamformer(const CMatrix& h, double p_bs, double sigma2,
                                 const PowerBalanceSettings& settings, double rate_bandwidth) {
  DualityResult out;
  out.uplink = fixed_point_power_balance(h, p_bs, sigma2, settings);

  // Unit-norm combiners: the recovered powers are then the column powers of
  // the downlink beamformer and sum to the uplink budget.
  CMatrix directions = out.uplink.w_ul;
  for (Eigen::Index k = 0; k < directions.cols(); ++k) directions.col(k).normalize();

  out.downlink_powers = downlink_power_recovery(h, directions, out.uplink.sinr_ul, sigma2);
  const double total = out.downlink_powers.sum();
  if (std::abs(total - p_bs) > kPowerConservationTolerance * p_bs) {
    std::ostringstream msg;
    msg << "duality power mismatch: recovered " << total << " W for a " << p_bs << " W budget";
    throw DualityError(msg.str());
  }

  out.beamformer.power_budget = p_bs;
  out.beamformer.weights = directions * out.downlink_powers.cwiseSqrt().cast<Complex>().asDiagonal();
  out.beamformer.weights *= std::sqrt(p_bs / out.beamformer.weights.squaredNorm());

  out.report = make_report(received_signals(h, out.beamformer.weights), sigma2, rate_bandwidth);
  const RVector mismatch =
      ((out.report.sinr - out.uplink.sinr_ul).array().abs() / out.uplink.sinr_ul.array()).matrix();
  if (mismatch.maxCoeff() > kDualityMismatchWarning) {
    std::ostringstream msg;
    msg << "downlink SINR deviates from uplink SINR by " << mismatch.maxCoeff() << " (relative)";
    out.report.warnings.push_back(msg.str());
  }
  if (h.rows() > h.cols()) {
    out.report.warnings.emplace_back("more users than BS antennas (K > M)");
  }
  if (!out.uplink.converged) {
    out.report.warnings.emplace_back("uplink power balancing hit the iteration limit");
  }
  return out;
}

DualityResult duality_beamformer(const EffectiveChannel& h, double p_bs, double sigma2,
                                 const PowerBalanceSettings& settings, double rate_bandwidth) {
  return duality_beamformer(h.matrix(), p_bs, sigma2, settings, rate_bandwidth);
}

}  // namespace risopt
