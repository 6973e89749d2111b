#pragma once

// 2D scene description plus the image-method tracer that turns it into
// channel components.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "risopt/types.hpp"

namespace risopt {

using Point2 = Eigen::Vector2d;

struct Wall {
  Point2 a;
  Point2 b;
  Complex reflection{-1.0, 0.0};
};

// RIS aperture: n_ports load ports laid out from `origin` along the unit
// vector `axis`, centred on origin. Each port stands for one column of
// `rows` unit cells. The unloaded panel is represented in H_u by a specular
// reflector segment spanning the aperture.
struct RisPlacement {
  Point2 origin{0.0, 0.0};
  Point2 axis{0.0, 1.0};
  std::size_t n_ports = 20;
  double spacing = 0.0;  // meters; 0 means half a wavelength
  std::size_t rows = 11;
  Complex reflector_coefficient = std::polar(0.6, constants::kPi);
};

struct ObservationGrid {
  Point2 origin{0.0, 0.0};
  double dx = 0.1;
  double dy = 0.1;
  std::size_t nx = 1;
  std::size_t ny = 1;

  std::vector<Point2> points() const;  // row-major in y, x fastest
};

// Scale factors linking traced path gains to the channel components.
struct ChannelScaling {
  // Overall field normalization applied to every BS->user contribution.
  double field_scale = 1.0;
  // Open-circuit voltage per unit incident field at a port (m); 0 means the
  // half-wave dipole effective length lambda/pi.
  double port_effective_length = 0.0;
  // Field at a user per unit port current (ohms); eta/(2 pi) for a
  // half-wave dipole.
  double port_transfer_ohms = constants::kFreeSpaceImpedance / (2.0 * constants::kPi);
  Complex self_impedance{73.1, 42.5};
};

struct SceneDescription {
  std::vector<Wall> walls;
  std::vector<Point2> bs_elements;
  RisPlacement ris;
  std::vector<Point2> users;
  std::optional<ObservationGrid> grid;
  double frequency_hz = 5.8e9;
  int max_reflection_order = 2;
  ChannelScaling scaling;

  double port_spacing() const;
  std::vector<Point2> ris_ports() const;
  // Reflector segment used for the unloaded-panel contribution.
  Wall ris_reflector() const;

  // Throws InvalidInput when an invariant is violated.
  void validate() const;
};

struct PropagationPath {
  double length = 0.0;
  Complex reflection_product{1.0, 0.0};
  int order = 0;
  std::vector<std::size_t> walls;  // indices into the traced wall list, in travel order
};

using PathList = std::vector<PropagationPath>;

inline constexpr int kMaxReflectionOrder = 5;

// All specular paths from src to dst with at most max_order reflections,
// sorted by (order, length, wall sequence).
PathList trace_paths(std::span<const Wall> walls, int max_order, const Point2& src, const Point2& dst);
PathList trace_paths(const SceneDescription& scene, const Point2& src, const Point2& dst);

// product * exp(-j k d) / d
Complex path_gain(const PropagationPath& path, double frequency_hz);

Complex coherent_sum(const PathList& paths, double frequency_hz);

// Induced-EMF mutual impedance of two parallel side-by-side half-wave dipoles.
Complex dipole_mutual_impedance(double separation, double frequency_hz);

CMatrix synthesize_mutual_impedance(std::size_t n_ports, double spacing, double frequency_hz,
                                    Complex self_impedance);

struct ChannelComponents {
  CMatrix h_u;  // K x M
  CMatrix h_0;  // N x M
  CMatrix g_l;  // K x N
  CMatrix z_ll; // N x N
  double frequency_hz = 0.0;
  // Optional K x M channel with the RIS panel absent (no-RIS baseline).
  std::optional<CMatrix> h_no_ris;

  std::size_t k() const { return static_cast<std::size_t>(h_u.rows()); }
  std::size_t m() const { return static_cast<std::size_t>(h_u.cols()); }
  std::size_t n() const { return static_cast<std::size_t>(z_ll.rows()); }

  // Channel used by no-RIS evaluations: h_no_ris when present, else h_u.
  const CMatrix& baseline_channel() const { return h_no_ris ? *h_no_ris : h_u; }

  // Throws FileFormatError naming the offending field.
  void validate() const;
};

inline constexpr double kImpedanceSymmetryTolerance = 1e-12;

struct SynthesisResult {
  ChannelComponents components;
  std::vector<std::string> warnings;
};

SynthesisResult synthesize_components(const SceneDescription& scene);

// Components with the observation grid points acting as users. h_0 and z_ll
// are identical to synthesize_components on the same scene.
SynthesisResult synthesize_grid_components(const SceneDescription& scene);

// Per-user rows (h_u, g_l, h_no_ris) for an arbitrary receiver position.
struct UserRows {
  Eigen::RowVectorXcd h_u;
  Eigen::RowVectorXcd g_l;
  Eigen::RowVectorXcd h_no_ris;
};
UserRows synthesize_user_rows(const SceneDescription& scene, const Point2& user);

// Corridor-junction scene: three BS dipoles at (6,-3) spaced lambda/2,
// 20-column RIS at the origin, users at (1.3,3.13), (1.8,2.38), (2.3,1.63).
SceneDescription default_scene();

}  // namespace risopt
