#include "risopt/ris_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "risopt/error.hpp"

namespace risopt {

void VaractorModel::validate() const {
  if (!(c_j > 0.0) || !(v_j > 0.0) || !(exponent > 0.0)) {
    throw InvalidInput("varactor C_J, V_J and m must be positive");
  }
  if (!(c_par >= 0.0) || !(r_v >= 0.0) || !(l_v >= 0.0)) {
    throw InvalidInput("varactor C_par, R_v and L_v must be nonnegative");
  }
  if (!(c_min > 0.0) || !(c_min < c_max)) {
    throw InvalidInput("varactor range needs 0 < c_min < c_max");
  }
}

VaractorModel calibrate_varactor(BiasAnchor first, BiasAnchor second, double exponent,
                                 double c_par) {
  if (!(exponent > 0.0)) throw DomainError("junction exponent must be positive");
  if (!(first.farads > c_par) || !(second.farads > c_par)) {
    throw DomainError("anchor capacitances must exceed the parasitic capacitance");
  }
  if (first.volts == second.volts) throw DomainError("anchors need distinct bias voltages");
  // (1 - V1/V_J) / (1 - V2/V_J) = ((C2 - C_par) / (C1 - C_par))^(1/m)
  const double ratio = std::pow((second.farads - c_par) / (first.farads - c_par), 1.0 / exponent);
  const double inv_vj = (ratio - 1.0) / (ratio * second.volts - first.volts);
  if (!(inv_vj > 0.0) || !(1.0 - first.volts * inv_vj > 0.0) ||
      !(1.0 - second.volts * inv_vj > 0.0)) {
    throw DomainError("anchors are inconsistent with the junction law");
  }
  VaractorModel model;
  model.exponent = exponent;
  model.c_par = c_par;
  model.v_j = 1.0 / inv_vj;
  model.c_j = (first.farads - c_par) * std::pow(1.0 - first.volts * inv_vj, exponent);
  return model;
}

VaractorModel default_varactor() {
  VaractorModel model = calibrate_varactor({5.02, 0.54 * kPicofarad}, {3.05, 0.38 * kPicofarad},
                                           0.5, 0.05 * kPicofarad);
  model.r_v = 2.0;
  model.l_v = 0.2e-9;
  model.c_min = 0.20 * kPicofarad;
  model.c_max = 1.20 * kPicofarad;
  return model;
}

double capacitance_from_bias(const VaractorModel& model, double v_bias) {
  if (!std::isfinite(v_bias) || v_bias < 0.0) throw DomainError("bias voltage must be >= 0");
  const double base = 1.0 - v_bias / model.v_j;
  if (!(base > 0.0)) throw DomainError("bias voltage reaches the junction potential");
  return model.c_j / std::pow(base, model.exponent) + model.c_par;
}

double bias_from_capacitance(const VaractorModel& model, double capacitance) {
  const double junction = capacitance - model.c_par;
  if (!(junction > 0.0)) throw DomainError("capacitance below the parasitic capacitance");
  const double v = model.v_j * (1.0 - std::pow(model.c_j / junction, 1.0 / model.exponent));
  if (v < 0.0) throw DomainError("capacitance below the zero-bias value");
  return v;
}

Complex load_impedance(const VaractorModel& model, double capacitance, double frequency_hz) {
  if (!(capacitance > 0.0)) throw DomainError("load capacitance must be positive");
  const double w = angular_frequency(frequency_hz);
  return {model.r_v, w * model.l_v - 1.0 / (w * capacitance)};
}

Complex load_impedance_derivative(double capacitance, double frequency_hz) {
  const double w = angular_frequency(frequency_hz);
  return {0.0, 1.0 / (w * capacitance * capacitance)};
}

std::string_view to_string(ControlMode mode) {
  switch (mode) {
    case ControlMode::ContinuousPerElement: return "continuous-per-element";
    case ControlMode::ContinuousPerColumn: return "continuous-per-column";
    case ControlMode::ColumnPairedOneBit: return "column-paired-1-bit";
  }
  return "unknown";
}

ControlMode control_mode_from_string(std::string_view name) {
  for (auto mode : {ControlMode::ContinuousPerElement, ControlMode::ContinuousPerColumn,
                    ControlMode::ColumnPairedOneBit}) {
    if (to_string(mode) == name) return mode;
  }
  throw InvalidInput("unknown RIS control mode '" + std::string(name) + "'");
}

Grouping element_grouping(std::size_t n_elements) {
  Grouping g(n_elements);
  for (std::size_t n = 0; n < n_elements; ++n) g[n] = {n};
  return g;
}

Grouping column_grouping(std::size_t n_columns, std::size_t rows, std::size_t columns_per_group) {
  if (rows == 0 || columns_per_group == 0 || n_columns % columns_per_group != 0) {
    throw InvalidInput("columns must divide evenly into groups");
  }
  Grouping g(n_columns / columns_per_group);
  for (std::size_t col = 0; col < n_columns; ++col) {
    auto& members = g[col / columns_per_group];
    for (std::size_t row = 0; row < rows; ++row) members.push_back(col * rows + row);
  }
  return g;
}

void validate_grouping(const Grouping& grouping, std::size_t n_elements) {
  std::vector<bool> seen(n_elements, false);
  for (const auto& group : grouping) {
    if (group.empty()) throw InvalidInput("empty RIS group");
    for (std::size_t e : group) {
      if (e >= n_elements) throw InvalidInput("RIS group member out of range");
      if (seen[e]) throw InvalidInput("RIS groups overlap");
      seen[e] = true;
    }
  }
}

std::vector<double> RisConfiguration::group_values() const {
  std::vector<double> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(capacitances.at(g.front()));
  return out;
}

void RisConfiguration::validate(const VaractorModel& model) const {
  validate_grouping(groups, capacitances.size());
  for (double c : capacitances) {
    if (!(c >= model.c_min && c <= model.c_max)) {
      throw InvalidInput("capacitance outside the tunable range");
    }
  }
  for (const auto& g : groups) {
    for (std::size_t e : g) {
      if (capacitances[e] != capacitances[g.front()]) {
        throw InvalidInput("elements of one group must share a capacitance");
      }
    }
  }
  if (mode == ControlMode::ColumnPairedOneBit) {
    for (double c : capacitances) {
      if (c != c_on && c != c_off) throw InvalidInput("1-bit element outside {c_on, c_off}");
    }
  }
}

RisConfiguration uniform_configuration(const Grouping& groups, std::size_t n_elements,
                                       double value, ControlMode mode) {
  RisConfiguration config;
  config.capacitances.assign(n_elements, value);
  config.mode = mode;
  config.groups = groups;
  validate_grouping(config.groups, n_elements);
  return config;
}

std::vector<double> expand_group_config(const RisConfiguration& config,
                                        const std::vector<double>& group_values) {
  if (group_values.size() != config.groups.size()) {
    throw InvalidInput("expected " + std::to_string(config.groups.size()) + " group values, got " +
                       std::to_string(group_values.size()));
  }
  std::vector<double> out = config.capacitances;
  for (std::size_t g = 0; g < config.groups.size(); ++g) {
    for (std::size_t e : config.groups[g]) out.at(e) = group_values[g];
  }
  return out;
}

RisConfiguration with_group_values(const RisConfiguration& config,
                                   const std::vector<double>& group_values) {
  RisConfiguration out = config;
  out.capacitances = expand_group_config(config, group_values);
  return out;
}

CVector load_impedances(const VaractorModel& model, const RisConfiguration& config,
                        double frequency_hz) {
  CVector z(static_cast<Eigen::Index>(config.size()));
  for (std::size_t n = 0; n < config.size(); ++n) {
    z(static_cast<Eigen::Index>(n)) = load_impedance(model, config.capacitances[n], frequency_hz);
  }
  return z;
}

OneBitEnumeration::OneBitEnumeration(std::size_t n_groups) : n_groups_(n_groups) {
  if (n_groups > kMaxEnumeratedGroups) {
    throw InvalidInput("exhaustive enumeration of " + std::to_string(n_groups) +
                       " groups is intractable; use the continuous optimizer instead");
  }
}

OneBitState OneBitEnumeration::operator[](std::size_t index) const {
  OneBitState state(n_groups_);
  for (std::size_t g = 0; g < n_groups_; ++g) {
    state[g] = static_cast<std::uint8_t>((index >> (n_groups_ - 1 - g)) & 1U);
  }
  return state;
}

OneBitEnumeration enumerate_1bit_configs(std::size_t n_groups) {
  return OneBitEnumeration(n_groups);
}

std::vector<double> one_bit_group_values(const RisConfiguration& config,
                                         const OneBitState& state) {
  if (state.size() != config.groups.size()) throw InvalidInput("1-bit state length mismatch");
  std::vector<double> values(state.size());
  std::transform(state.begin(), state.end(), values.begin(),
                 [&](std::uint8_t s) { return s ? config.c_on : config.c_off; });
  return values;
}

}  // namespace risopt
