#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>

#include <Eigen/Dense>

namespace risopt {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

namespace constants {
inline constexpr double kSpeedOfLight = 299792458.0;          // m/s
inline constexpr double kBoltzmann = 1.380649e-23;            // J/K
inline constexpr double kFreeSpaceImpedance = 376.730313668;  // ohms
inline constexpr double kPi = std::numbers::pi;
}  // namespace constants

inline double wavelength(double frequency_hz) { return constants::kSpeedOfLight / frequency_hz; }
inline double wavenumber(double frequency_hz) { return 2.0 * constants::kPi / wavelength(frequency_hz); }
inline double angular_frequency(double frequency_hz) { return 2.0 * constants::kPi * frequency_hz; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

}  // namespace risopt
