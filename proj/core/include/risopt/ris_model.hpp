#pragma once

#include <cstddef>
#include <cstdint>
#include <iterator>
#include <string_view>
#include <vector>

#include "risopt/types.hpp"

namespace risopt {

inline constexpr double kPicofarad = 1e-12;

// Junction-law varactor with series parasitics:
//   C(V) = C_J / (1 - V / V_J)^m + C_par,   Z_L = R_v + j w L_v + 1 / (j w C).
struct VaractorModel {
  double c_j = 0.0;       // F
  double v_j = 0.0;       // V
  double exponent = 0.5;  // m
  double c_par = 0.0;     // F
  double r_v = 2.0;       // ohm
  double l_v = 0.2e-9;    // H
  double c_min = 0.20 * kPicofarad;
  double c_max = 1.20 * kPicofarad;

  void validate() const;
};

struct BiasAnchor {
  double volts;
  double farads;
};

// Solves C_J and V_J so that the junction law with the given exponent and
// parasitic capacitance passes through both anchors.
VaractorModel calibrate_varactor(BiasAnchor first, BiasAnchor second, double exponent,
                                 double c_par);

// Bias anchors 5.02 V <-> 0.54 pF and 3.05 V <-> 0.38 pF, m = 0.5,
// C_par = 0.05 pF, tunable range [0.20, 1.20] pF.
VaractorModel default_varactor();

double capacitance_from_bias(const VaractorModel& model, double v_bias);
double bias_from_capacitance(const VaractorModel& model, double capacitance);

Complex load_impedance(const VaractorModel& model, double capacitance, double frequency_hz);
// dZ_L / dC = j / (w C^2)
Complex load_impedance_derivative(double capacitance, double frequency_hz);

enum class ControlMode { ContinuousPerElement, ContinuousPerColumn, ColumnPairedOneBit };

std::string_view to_string(ControlMode mode);
ControlMode control_mode_from_string(std::string_view name);

// group index -> element indices. Groups are disjoint; elements that belong
// to no group keep their configured capacitance.
using Grouping = std::vector<std::vector<std::size_t>>;

Grouping element_grouping(std::size_t n_elements);
// Elements are numbered column-major: element = column * rows + row.
Grouping column_grouping(std::size_t n_columns, std::size_t rows, std::size_t columns_per_group);

void validate_grouping(const Grouping& grouping, std::size_t n_elements);

struct RisConfiguration {
  std::vector<double> capacitances;  // F, one per element
  ControlMode mode = ControlMode::ContinuousPerColumn;
  Grouping groups;
  double c_on = 0.54 * kPicofarad;
  double c_off = 0.38 * kPicofarad;

  std::size_t size() const { return capacitances.size(); }
  std::size_t group_count() const { return groups.size(); }

  // Capacitance of each group (value of its first member).
  std::vector<double> group_values() const;

  void validate(const VaractorModel& model) const;
};

// All elements at `value`, with the given grouping.
RisConfiguration uniform_configuration(const Grouping& groups, std::size_t n_elements,
                                       double value, ControlMode mode);

std::vector<double> expand_group_config(const RisConfiguration& config,
                                        const std::vector<double>& group_values);

RisConfiguration with_group_values(const RisConfiguration& config,
                                   const std::vector<double>& group_values);

CVector load_impedances(const VaractorModel& model, const RisConfiguration& config,
                        double frequency_hz);

// Binary group states: 1 = ON (c_on), 0 = OFF (c_off).
using OneBitState = std::vector<std::uint8_t>;

inline constexpr std::size_t kMaxEnumeratedGroups = 24;

// All 2^n binary states in lexicographic order (first group most significant).
class OneBitEnumeration {
 public:
  explicit OneBitEnumeration(std::size_t n_groups);

  std::size_t group_count() const { return n_groups_; }
  std::size_t size() const { return std::size_t{1} << n_groups_; }
  OneBitState operator[](std::size_t index) const;

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = OneBitState;
    using difference_type = std::ptrdiff_t;
    using pointer = void;
    using reference = OneBitState;

    iterator(const OneBitEnumeration* owner, std::size_t index) : owner_(owner), index_(index) {}
    OneBitState operator*() const { return (*owner_)[index_]; }
    iterator& operator++() {
      ++index_;
      return *this;
    }
    iterator operator++(int) {
      auto copy = *this;
      ++index_;
      return copy;
    }
    bool operator==(const iterator& other) const { return index_ == other.index_; }

   private:
    const OneBitEnumeration* owner_;
    std::size_t index_;
  };

  iterator begin() const { return {this, 0}; }
  iterator end() const { return {this, size()}; }

 private:
  std::size_t n_groups_;
};

OneBitEnumeration enumerate_1bit_configs(std::size_t n_groups);

std::vector<double> one_bit_group_values(const RisConfiguration& config, const OneBitState& state);

}  // namespace risopt
