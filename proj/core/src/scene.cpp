#include "risopt/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <gsl/gsl_sf_expint.h>

#include "risopt/error.hpp"

namespace risopt {

namespace {

constexpr double kOnWallTolerance = 1e-9;    // meters
constexpr double kLegParamTolerance = 1e-9;  // relative position along a leg
constexpr double kWallParamTolerance = 1e-12;

double cross(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

double distance_to_segment(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (a + t * ab - p).norm();
}

Point2 mirror(const Point2& p, const Wall& wall) {
  const Point2 d = (wall.b - wall.a).normalized();
  const Point2 rel = p - wall.a;
  return wall.a + 2.0 * rel.dot(d) * d - rel;
}

struct Hit {
  double t;  // along the leg
  double u;  // along the wall
};

std::optional<Hit> intersect(const Point2& p, const Point2& q, const Wall& wall) {
  const Point2 r = q - p;
  const Point2 s = wall.b - wall.a;
  const double denom = cross(r, s);
  if (std::abs(denom) <= 1e-300 || std::abs(denom) <= 1e-14 * r.norm() * s.norm()) {
    return std::nullopt;  // parallel legs never block or reflect
  }
  const Point2 ap = wall.a - p;
  return Hit{cross(ap, s) / denom, cross(ap, r) / denom};
}

bool leg_blocked(std::span<const Wall> walls, const Point2& p, const Point2& q,
                 std::size_t skip_a, std::size_t skip_b) {
  for (std::size_t w = 0; w < walls.size(); ++w) {
    if (w == skip_a || w == skip_b) continue;
    const auto hit = intersect(p, q, walls[w]);
    if (!hit) continue;
    if (hit->t > kLegParamTolerance && hit->t < 1.0 - kLegParamTolerance &&
        hit->u >= -kWallParamTolerance && hit->u <= 1.0 + kWallParamTolerance) {
      return true;
    }
  }
  return false;
}

constexpr std::size_t kNoWall = std::numeric_limits<std::size_t>::max();

class ImageTracer {
 public:
  ImageTracer(std::span<const Wall> walls, int max_order, const Point2& src, const Point2& dst)
      : walls_(walls), max_order_(max_order), src_(src), dst_(dst) {}

  PathList run() {
    sequence_.clear();
    images_.assign(1, src_);
    visit();
    std::sort(paths_.begin(), paths_.end(), [](const PropagationPath& a, const PropagationPath& b) {
      if (a.order != b.order) return a.order < b.order;
      if (a.length != b.length) return a.length < b.length;
      return a.walls < b.walls;
    });
    return std::move(paths_);
  }

 private:
  void visit() {
    validate_current();
    if (static_cast<int>(sequence_.size()) == max_order_) return;
    for (std::size_t w = 0; w < walls_.size(); ++w) {
      if (!sequence_.empty() && sequence_.back() == w) continue;
      const Point2& last = images_.back();
      // An image lying on the mirror line reflects onto itself.
      const Point2 dir = (walls_[w].b - walls_[w].a).normalized();
      if (std::abs(cross(dir, last - walls_[w].a)) <= kOnWallTolerance) continue;
      sequence_.push_back(w);
      images_.push_back(mirror(last, walls_[w]));
      visit();
      images_.pop_back();
      sequence_.pop_back();
    }
  }

  // Walks back from the receiver through the image chain; every leg must hit
  // its wall inside the segment and be free of other obstructions.
  void validate_current() {
    const std::size_t order = sequence_.size();
    Point2 target = dst_;
    std::size_t target_wall = kNoWall;
    Complex product{1.0, 0.0};
    for (std::size_t i = order; i-- > 0;) {
      const std::size_t w = sequence_[i];
      const Point2& image = images_[i + 1];
      const auto hit = intersect(image, target, walls_[w]);
      if (!hit) return;
      if (hit->t <= kLegParamTolerance || hit->t >= 1.0 - kLegParamTolerance) return;
      if (hit->u < -kWallParamTolerance || hit->u > 1.0 + kWallParamTolerance) return;
      const Point2 reflection_point = image + hit->t * (target - image);
      if (leg_blocked(walls_, reflection_point, target, w, target_wall)) return;
      product *= walls_[w].reflection;
      target = reflection_point;
      target_wall = w;
    }
    if (leg_blocked(walls_, src_, target, kNoWall, target_wall)) return;

    PropagationPath path;
    path.length = (images_.back() - dst_).norm();
    path.reflection_product = product;
    path.order = static_cast<int>(order);
    path.walls = sequence_;
    paths_.push_back(std::move(path));
  }

  std::span<const Wall> walls_;
  int max_order_;
  Point2 src_;
  Point2 dst_;
  std::vector<std::size_t> sequence_;
  std::vector<Point2> images_;
  PathList paths_;
};

void check_finite(const Point2& p, const std::string& what) {
  if (!std::isfinite(p.x()) || !std::isfinite(p.y())) {
    throw InvalidInput(what + " has a non-finite coordinate");
  }
}

void check_off_walls(std::span<const Wall> walls, const Point2& p, const std::string& what) {
  for (std::size_t w = 0; w < walls.size(); ++w) {
    if (distance_to_segment(p, walls[w].a, walls[w].b) <= kOnWallTolerance) {
      throw InvalidInput(what + " lies on wall " + std::to_string(w));
    }
  }
}

CMatrix sum_gains(std::span<const Wall> walls, int order, double frequency,
                  std::span<const Point2> rows, std::span<const Point2> cols, double scale,
                  bool& any_path) {
  CMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const PathList paths = trace_paths(walls, order, cols[c], rows[r]);
      any_path = any_path || !paths.empty();
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          scale * coherent_sum(paths, frequency);
    }
  }
  return out;
}

std::vector<Wall> walls_with_reflector(const SceneDescription& scene) {
  std::vector<Wall> walls = scene.walls;
  if (scene.ris.reflector_coefficient != Complex{0.0, 0.0}) walls.push_back(scene.ris_reflector());
  return walls;
}

double port_effective_length(const SceneDescription& scene) {
  return scene.scaling.port_effective_length > 0.0 ? scene.scaling.port_effective_length
                                                   : wavelength(scene.frequency_hz) / constants::kPi;
}

double transfer_scale(const SceneDescription& scene) {
  return scene.scaling.field_scale * scene.scaling.port_transfer_ohms *
         static_cast<double>(scene.ris.rows);
}

SynthesisResult synthesize_for_receivers(const SceneDescription& scene,
                                         std::span<const Point2> receivers) {
  scene.validate();
  const std::vector<Point2> ports = scene.ris_ports();
  const std::vector<Wall> with_reflector = walls_with_reflector(scene);
  for (std::size_t i = 0; i < receivers.size(); ++i) {
    check_off_walls(with_reflector, receivers[i], "receiver " + std::to_string(i));
  }

  const double f = scene.frequency_hz;
  const int order = scene.max_reflection_order;
  bool any_path = false;

  SynthesisResult out;
  ChannelComponents& c = out.components;
  c.frequency_hz = f;
  c.h_u = sum_gains(with_reflector, order, f, receivers, scene.bs_elements,
                    scene.scaling.field_scale, any_path);
  c.h_no_ris = sum_gains(scene.walls, order, f, receivers, scene.bs_elements,
                         scene.scaling.field_scale, any_path);
  c.h_0 = sum_gains(scene.walls, order, f, ports, scene.bs_elements, port_effective_length(scene),
                    any_path);
  c.g_l = sum_gains(scene.walls, order, f, receivers, ports, transfer_scale(scene), any_path);
  c.z_ll = synthesize_mutual_impedance(ports.size(), scene.port_spacing(), f,
                                       scene.scaling.self_impedance);
  if (!any_path) {
    out.warnings.emplace_back("no propagation paths found; channel components are all zero");
  }
  return out;
}

}  // namespace

std::vector<Point2> ObservationGrid::points() const {
  std::vector<Point2> out;
  out.reserve(nx * ny);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      out.emplace_back(origin.x() + static_cast<double>(ix) * dx,
                       origin.y() + static_cast<double>(iy) * dy);
    }
  }
  return out;
}

double SceneDescription::port_spacing() const {
  return ris.spacing > 0.0 ? ris.spacing : 0.5 * wavelength(frequency_hz);
}

std::vector<Point2> SceneDescription::ris_ports() const {
  const Point2 axis = ris.axis.normalized();
  const double s = port_spacing();
  const double centre = 0.5 * static_cast<double>(ris.n_ports - 1);
  std::vector<Point2> ports;
  ports.reserve(ris.n_ports);
  for (std::size_t n = 0; n < ris.n_ports; ++n) {
    ports.push_back(ris.origin + (static_cast<double>(n) - centre) * s * axis);
  }
  return ports;
}

Wall SceneDescription::ris_reflector() const {
  const Point2 axis = ris.axis.normalized();
  const double half = 0.5 * static_cast<double>(ris.n_ports) * port_spacing();
  return Wall{ris.origin - half * axis, ris.origin + half * axis, ris.reflector_coefficient};
}

void SceneDescription::validate() const {
  if (!(frequency_hz > 0.0) || !std::isfinite(frequency_hz)) {
    throw InvalidInput("frequency must be positive");
  }
  if (max_reflection_order < 0 || max_reflection_order > kMaxReflectionOrder) {
    throw InvalidInput("max reflection order must lie in [0, 5]");
  }
  if (bs_elements.empty()) throw InvalidInput("scene needs at least one BS element");
  if (users.empty()) throw InvalidInput("scene needs at least one user");
  if (ris.n_ports == 0) throw InvalidInput("RIS needs at least one port");
  if (ris.rows == 0) throw InvalidInput("RIS needs at least one row");
  if (ris.spacing < 0.0) throw InvalidInput("RIS spacing must be nonnegative");
  if (!(ris.axis.norm() > 0.0)) throw InvalidInput("RIS axis must be nonzero");
  if (std::abs(ris.reflector_coefficient) > 1.0) {
    throw InvalidInput("RIS reflector coefficient magnitude exceeds 1");
  }
  check_finite(ris.origin, "RIS origin");
  for (std::size_t w = 0; w < walls.size(); ++w) {
    check_finite(walls[w].a, "wall " + std::to_string(w));
    check_finite(walls[w].b, "wall " + std::to_string(w));
    if ((walls[w].b - walls[w].a).norm() <= 0.0) {
      throw InvalidInput("wall " + std::to_string(w) + " has zero length");
    }
    if (std::abs(walls[w].reflection) > 1.0) {
      throw InvalidInput("wall " + std::to_string(w) + " reflection magnitude exceeds 1");
    }
  }
  for (std::size_t m = 0; m < bs_elements.size(); ++m) check_finite(bs_elements[m], "BS element");
  for (std::size_t k = 0; k < users.size(); ++k) check_finite(users[k], "user");
  if (!(scaling.field_scale >= 0.0) || !(scaling.port_transfer_ohms >= 0.0)) {
    throw InvalidInput("channel scaling factors must be nonnegative");
  }
  if (!(scaling.self_impedance.real() > 0.0)) {
    throw InvalidInput("port self impedance needs a positive real part");
  }
  if (grid && (grid->nx == 0 || grid->ny == 0)) throw InvalidInput("grid counts must be positive");
}

PathList trace_paths(std::span<const Wall> walls, int max_order, const Point2& src,
                     const Point2& dst) {
  if (max_order < 0 || max_order > kMaxReflectionOrder) {
    throw InvalidInput("max reflection order must lie in [0, 5]");
  }
  check_finite(src, "source");
  check_finite(dst, "destination");
  if ((src - dst).norm() <= kOnWallTolerance) throw InvalidInput("source and destination coincide");
  check_off_walls(walls, src, "source");
  check_off_walls(walls, dst, "destination");
  return ImageTracer(walls, max_order, src, dst).run();
}

PathList trace_paths(const SceneDescription& scene, const Point2& src, const Point2& dst) {
  return trace_paths(scene.walls, scene.max_reflection_order, src, dst);
}

Complex path_gain(const PropagationPath& path, double frequency_hz) {
  if (!(path.length > 0.0)) throw InvalidInput("path length must be positive");
  const double k = wavenumber(frequency_hz);
  return path.reflection_product * std::polar(1.0 / path.length, -k * path.length);
}

Complex coherent_sum(const PathList& paths, double frequency_hz) {
  Complex total{0.0, 0.0};
  for (const auto& p : paths) total += path_gain(p, frequency_hz);
  return total;
}

Complex dipole_mutual_impedance(double separation, double frequency_hz) {
  if (!(separation > 0.0)) throw DomainError("dipole separation must be positive");
  const double k = wavenumber(frequency_hz);
  const double length = 0.5 * wavelength(frequency_hz);
  const double hyp = std::hypot(separation, length);
  const double u0 = k * separation;
  const double u1 = k * (hyp + length);
  const double u2 = k * (hyp - length);
  const double scale = constants::kFreeSpaceImpedance / (4.0 * constants::kPi);
  const double r = scale * (2.0 * gsl_sf_Ci(u0) - gsl_sf_Ci(u1) - gsl_sf_Ci(u2));
  const double x = -scale * (2.0 * gsl_sf_Si(u0) - gsl_sf_Si(u1) - gsl_sf_Si(u2));
  return {r, x};
}

CMatrix synthesize_mutual_impedance(std::size_t n_ports, double spacing, double frequency_hz,
                                    Complex self_impedance) {
  if (!(spacing > 0.0)) throw DomainError("port spacing must be positive");
  const auto n = static_cast<Eigen::Index>(n_ports);
  CMatrix z(n, n);
  // Toeplitz: the coupling depends only on |i - j|.
  std::vector<Complex> by_offset(n_ports, self_impedance);
  for (std::size_t d = 1; d < n_ports; ++d) {
    by_offset[d] = dipole_mutual_impedance(static_cast<double>(d) * spacing, frequency_hz);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      z(i, j) = by_offset[static_cast<std::size_t>(std::abs(i - j))];
    }
  }
  return z;
}

void ChannelComponents::validate() const {
  using Kind = FileFormatError::Kind;
  const auto K = h_u.rows();
  const auto M = h_u.cols();
  const auto N = z_ll.rows();
  if (K < 1 || M < 1) throw FileFormatError(Kind::DimensionMismatch, "h_u", "must be nonempty");
  if (N < 1 || z_ll.cols() != N) {
    throw FileFormatError(Kind::DimensionMismatch, "z_ll", "must be a nonempty square matrix");
  }
  if (h_0.rows() != N || h_0.cols() != M) {
    throw FileFormatError(Kind::DimensionMismatch, "h_0", "expected N x M");
  }
  if (g_l.rows() != K) {
    throw FileFormatError(Kind::DimensionMismatch, "h_u",
                          std::to_string(K) + " rows but g_l has " + std::to_string(g_l.rows()));
  }
  if (g_l.cols() != N) {
    throw FileFormatError(Kind::DimensionMismatch, "g_l", "expected K x N");
  }
  if (h_no_ris && (h_no_ris->rows() != K || h_no_ris->cols() != M)) {
    throw FileFormatError(Kind::DimensionMismatch, "h_no_ris", "expected K x M");
  }
  if (!(frequency_hz > 0.0) || !std::isfinite(frequency_hz)) {
    throw FileFormatError(Kind::InvalidValue, "frequency_hz", "must be positive");
  }
  const auto finite = [](const CMatrix& m) { return m.allFinite(); };
  if (!finite(h_u)) throw FileFormatError(Kind::InvalidValue, "h_u", "non-finite entry");
  if (!finite(h_0)) throw FileFormatError(Kind::InvalidValue, "h_0", "non-finite entry");
  if (!finite(g_l)) throw FileFormatError(Kind::InvalidValue, "g_l", "non-finite entry");
  if (!finite(z_ll)) throw FileFormatError(Kind::InvalidValue, "z_ll", "non-finite entry");
  if (h_no_ris && !finite(*h_no_ris)) {
    throw FileFormatError(Kind::InvalidValue, "h_no_ris", "non-finite entry");
  }
  const double norm = z_ll.norm();
  if ((z_ll - z_ll.transpose()).norm() > kImpedanceSymmetryTolerance * norm) {
    throw FileFormatError(Kind::SymmetryViolation, "z_ll", "impedance matrix is not symmetric");
  }
  for (Eigen::Index i = 0; i < N; ++i) {
    if (!(z_ll(i, i).real() > 0.0)) {
      throw FileFormatError(Kind::InvalidValue, "z_ll[" + std::to_string(i) + "]",
                            "diagonal entry needs a positive real part");
    }
  }
}

SynthesisResult synthesize_components(const SceneDescription& scene) {
  return synthesize_for_receivers(scene, scene.users);
}

SynthesisResult synthesize_grid_components(const SceneDescription& scene) {
  if (!scene.grid) throw InvalidInput("scene has no observation grid");
  const std::vector<Point2> points = scene.grid->points();
  return synthesize_for_receivers(scene, points);
}

UserRows synthesize_user_rows(const SceneDescription& scene, const Point2& user) {
  const std::vector<Point2> ports = scene.ris_ports();
  const std::vector<Wall> with_reflector = walls_with_reflector(scene);
  check_off_walls(with_reflector, user, "receiver");
  const double f = scene.frequency_hz;
  const int order = scene.max_reflection_order;
  const std::span<const Point2> rx(&user, 1);
  bool any_path = false;
  UserRows rows;
  rows.h_u = sum_gains(with_reflector, order, f, rx, scene.bs_elements, scene.scaling.field_scale,
                       any_path);
  rows.h_no_ris = sum_gains(scene.walls, order, f, rx, scene.bs_elements,
                            scene.scaling.field_scale, any_path);
  rows.g_l = sum_gains(scene.walls, order, f, rx, ports, transfer_scale(scene), any_path);
  return rows;
}

SceneDescription default_scene() {
  SceneDescription s;
  s.frequency_hz = 5.8e9;
  s.max_reflection_order = 2;
  const Complex wall_coefficient = std::polar(0.45, 0.9 * constants::kPi);
  // Corridor junction: a north-south corridor (x in [-0.05, 3.2]) meeting an
  // east-west corridor (y in [-4.2, -1.2]) that hosts the BS.
  s.walls = {
      {{-0.05, -4.2}, {-0.05, 5.0}, wall_coefficient},
      {{3.2, -1.2}, {3.2, 5.0}, wall_coefficient},
      {{3.2, -1.2}, {10.0, -1.2}, wall_coefficient},
      {{-0.05, -4.2}, {10.0, -4.2}, wall_coefficient},
  };
  const double half_lambda = 0.5 * wavelength(s.frequency_hz);
  for (int m = -1; m <= 1; ++m) s.bs_elements.emplace_back(6.0 + m * half_lambda, -3.0);
  s.ris = RisPlacement{};
  s.users = {{1.30, 3.13}, {1.80, 2.38}, {2.30, 1.63}};
  s.grid = ObservationGrid{{0.8, 1.2}, 0.1, 0.1, 21, 25};
  s.scaling.field_scale = 0.008;
  return s;
}

}  // namespace risopt
