#pragma once

// Independent reference computations used by the unit and acceptance tests.
// None of these call into the library's numerical kernels.

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "risopt/optimizer.hpp"

namespace oracle {

using risopt::CMatrix;
using risopt::Complex;

// Gauss-Jordan elimination with partial pivoting on an explicit copy.
inline CMatrix dense_inverse(CMatrix a) {
  const Eigen::Index n = a.rows();
  CMatrix inv = CMatrix::Identity(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    }
    a.row(col).swap(a.row(pivot));
    inv.row(col).swap(inv.row(pivot));
    const Complex d = a(col, col);
    for (Eigen::Index c = 0; c < n; ++c) {
      a(col, c) /= d;
      inv(col, c) /= d;
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col) continue;
      const Complex f = a(r, col);
      for (Eigen::Index c = 0; c < n; ++c) {
        a(r, c) -= f * a(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  return inv;
}

inline CMatrix effective_channel(const risopt::ChannelComponents& c, const risopt::CVector& z) {
  CMatrix sys = -c.z_ll;
  for (Eigen::Index i = 0; i < sys.rows(); ++i) sys(i, i) += z(i);
  return c.h_u + c.g_l * dense_inverse(sys) * c.h_0;
}

inline CMatrix received(const CMatrix& h, const CMatrix& w) {
  CMatrix y = CMatrix::Zero(h.rows(), w.cols());
  for (Eigen::Index k = 0; k < h.rows(); ++k) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      Complex acc = 0.0;
      for (Eigen::Index m = 0; m < h.cols(); ++m) acc += h(k, m) * w(m, j);
      y(k, j) = acc;
    }
  }
  return y;
}

inline std::vector<double> sinr(const CMatrix& y, double sigma2) {
  std::vector<double> out;
  for (Eigen::Index k = 0; k < y.rows(); ++k) {
    double interference = 0.0;
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      if (j != k) interference += std::norm(y(k, j));
    }
    out.push_back(std::norm(y(k, k)) / (interference + sigma2));
  }
  return out;
}

inline double min_sinr(const CMatrix& h, const CMatrix& w, double sigma2) {
  const auto s = sinr(received(h, w), sigma2);
  return *std::min_element(s.begin(), s.end());
}

// Uplink SINR of user k with combiner columns w and powers q, by loops.
inline std::vector<double> uplink_sinr(const CMatrix& h, const CMatrix& w, const std::vector<double>& q,
                                       double sigma2) {
  std::vector<double> out;
  for (Eigen::Index k = 0; k < h.rows(); ++k) {
    auto inner = [&](Eigen::Index user) {
      Complex acc = 0.0;
      for (Eigen::Index m = 0; m < h.cols(); ++m) acc += std::conj(w(m, k)) * std::conj(h(user, m));
      return std::norm(acc);
    };
    double interference = 0.0;
    for (Eigen::Index j = 0; j < h.rows(); ++j) {
      if (j != k) interference += q[static_cast<std::size_t>(j)] * inner(j);
    }
    double wnorm = 0.0;
    for (Eigen::Index m = 0; m < h.cols(); ++m) wnorm += std::norm(w(m, k));
    out.push_back(q[static_cast<std::size_t>(k)] * inner(k) / (interference + sigma2 * wnorm));
  }
  return out;
}

// Max-min uplink SINR with per-power MMSE receivers, which for a fixed q
// maximize each user's SINR individually.
inline double mmse_min_uplink_sinr(const CMatrix& h, const std::vector<double>& q, double sigma2) {
  const Eigen::Index m = h.cols();
  double worst = HUGE_VAL;
  for (Eigen::Index k = 0; k < h.rows(); ++k) {
    CMatrix r = sigma2 * CMatrix::Identity(m, m);
    for (Eigen::Index j = 0; j < h.rows(); ++j) {
      if (j != k) r += q[static_cast<std::size_t>(j)] * h.row(j).adjoint() * h.row(j);
    }
    const Complex s = (h.row(k) * dense_inverse(r) * h.row(k).adjoint())(0, 0);
    worst = std::min(worst, q[static_cast<std::size_t>(k)] * s.real());
  }
  return worst;
}

// Composite Simpson rule on [a, b] with an even number of intervals.
template <typename F>
auto simpson(F&& f, double a, double b, int intervals) {
  const double h = (b - a) / intervals;
  auto sum = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * (h / 3.0);
}

// Induced-EMF mutual impedance of two parallel side-by-side half-wave
// dipoles from the near-field integral with sinusoidal currents.
inline Complex induced_emf_mutual(double d, double frequency_hz) {
  const double lambda = risopt::wavelength(frequency_hz);
  const double k = 2.0 * std::numbers::pi / lambda;
  const double l = lambda / 4.0;
  const double eta = risopt::constants::kFreeSpaceImpedance;
  auto integrand = [&](double z) {
    const double r1 = std::sqrt(d * d + (z - l) * (z - l));
    const double r2 = std::sqrt(d * d + (z + l) * (z + l));
    const Complex e = std::exp(Complex(0.0, -k * r1)) / r1 + std::exp(Complex(0.0, -k * r2)) / r2;
    return e * std::sin(k * (l - std::abs(z)));
  };
  const Complex integral = simpson(integrand, -l, 0.0, 4000) + simpson(integrand, 0.0, l, 4000);
  return Complex(0.0, eta / (4.0 * std::numbers::pi)) * integral;
}

struct LatticePath {
  double length;
  int order;
};

// Rectangle [0,w] x [0,h]: every image of src is (2iw +- x, 2jh +- y) and in
// a convex room its unfolded straight line is always a valid path.
inline std::vector<LatticePath> rectangle_images(double w, double h, risopt::Point2 src,
                                                 risopt::Point2 dst, int max_order) {
  std::vector<LatticePath> out;
  auto axis = [](double span, double x, int i, bool mirrored, int& reflections) {
    // even images 2 i span + x need 2|i| reflections, odd ones 2 i span - x
    // need |2i - 1| reflections
    reflections = mirrored ? std::abs(2 * i - 1) : 2 * std::abs(i);
    return mirrored ? 2.0 * i * span - x : 2.0 * i * span + x;
  };
  for (int i = -max_order; i <= max_order; ++i) {
    for (int mx = 0; mx < 2; ++mx) {
      int rx = 0;
      const double ix = axis(w, src.x(), i, mx == 1, rx);
      for (int j = -max_order; j <= max_order; ++j) {
        for (int my = 0; my < 2; ++my) {
          int ry = 0;
          const double iy = axis(h, src.y(), j, my == 1, ry);
          if (rx + ry > max_order) continue;
          out.push_back({std::hypot(dst.x() - ix, dst.y() - iy), rx + ry});
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const LatticePath& a, const LatticePath& b) {
    return a.order != b.order ? a.order < b.order : a.length < b.length;
  });
  return out;
}

// Random but well-conditioned K x M x N component set with a symmetric
// coupling matrix and RIS scattering of the same order as the direct channel.
inline risopt::ChannelComponents random_components(std::mt19937_64& rng, std::size_t k,
                                                   std::size_t m, std::size_t n,
                                                   double frequency_hz = 5.8e9) {
  std::normal_distribution<double> g(0.0, 1.0);
  auto cm = [&](std::size_t r, std::size_t c, double scale) {
    CMatrix out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = scale * Complex(g(rng), g(rng));
    }
    return out;
  };
  risopt::ChannelComponents c;
  c.frequency_hz = frequency_hz;
  c.h_u = cm(k, m, 1e-4);
  c.h_0 = cm(n, m, 1e-3);
  c.g_l = cm(k, n, 3e-2);
  CMatrix z = cm(n, n, 4.0);
  c.z_ll = 0.5 * (z + z.transpose());
  for (Eigen::Index i = 0; i < c.z_ll.rows(); ++i) c.z_ll(i, i) = Complex(73.1, 42.5);
  return c;
}

inline std::vector<double> random_capacitances(std::mt19937_64& rng, std::size_t n,
                                               double lo = 0.25e-12, double hi = 1.15e-12) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> out(n);
  for (double& v : out) v = u(rng);
  return out;
}

}  // namespace oracle
