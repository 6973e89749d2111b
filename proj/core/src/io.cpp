#include "risopt/io.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "risopt/error.hpp"

namespace risopt {

namespace {

using Kind = FileFormatError::Kind;

const Json& member(const Json& j, const std::string& field) {
  if (!j.is_object()) throw FileFormatError(Kind::Malformed, "<root>", "expected a JSON object");
  const auto it = j.find(field);
  if (it == j.end()) throw FileFormatError(Kind::MissingField, field, "missing");
  return *it;
}

double number(const Json& j, const std::string& field) {
  if (!j.is_number()) throw FileFormatError(Kind::Malformed, field, "expected a number");
  return j.get<double>();
}

double number_member(const Json& j, const std::string& field) { return number(member(j, field), field); }

double number_or(const Json& j, const std::string& field, double fallback) {
  const auto it = j.find(field);
  return it == j.end() ? fallback : number(*it, field);
}

std::size_t count_member(const Json& j, const std::string& field) {
  const Json& v = member(j, field);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw FileFormatError(Kind::Malformed, field, "expected a nonnegative integer");
  }
  return v.get<std::size_t>();
}

Json point_to_json(const Point2& p) { return Json::array({p.x(), p.y()}); }

Point2 point_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw FileFormatError(Kind::Malformed, field, "expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

const Json& array_member(const Json& j, const std::string& field) {
  const Json& v = member(j, field);
  if (!v.is_array()) throw FileFormatError(Kind::Malformed, field, "expected an array");
  return v;
}

std::vector<double> picofarads(const Json& j, const std::string& field) {
  if (!j.is_array()) throw FileFormatError(Kind::Malformed, field, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(number(j[i], field + "[" + std::to_string(i) + "]") * kPicofarad);
  }
  return out;
}

}  // namespace

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw FileFormatError(Kind::Malformed, field, "expected [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Json matrix_to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const Json& j, const std::string& field, std::size_t rows,
                         std::size_t cols) {
  if (!j.is_array()) throw FileFormatError(Kind::Malformed, field, "expected a nested array");
  if (j.size() != rows) {
    throw FileFormatError(Kind::DimensionMismatch, field,
                          "expected " + std::to_string(rows) + " rows, found " +
                              std::to_string(j.size()));
  }
  CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_field = field + "[" + std::to_string(r) + "]";
    const Json& row = j[r];
    if (!row.is_array()) throw FileFormatError(Kind::Malformed, row_field, "expected an array");
    if (row.size() != cols) {
      throw FileFormatError(Kind::DimensionMismatch, row_field,
                            "expected " + std::to_string(cols) + " columns, found " +
                                std::to_string(row.size()));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          complex_from_json(row[c], row_field + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

Json components_to_json(const ChannelComponents& c) {
  Json j;
  j["k"] = c.k();
  j["m"] = c.m();
  j["n"] = c.n();
  j["frequency_hz"] = c.frequency_hz;
  j["h_u"] = matrix_to_json(c.h_u);
  j["h_0"] = matrix_to_json(c.h_0);
  j["g_l"] = matrix_to_json(c.g_l);
  j["z_ll"] = matrix_to_json(c.z_ll);
  if (c.h_no_ris) j["h_no_ris"] = matrix_to_json(*c.h_no_ris);
  return j;
}

ChannelComponents components_from_json(const Json& j) {
  const std::size_t k = count_member(j, "k");
  const std::size_t m = count_member(j, "m");
  const std::size_t n = count_member(j, "n");
  ChannelComponents c;
  c.frequency_hz = number_member(j, "frequency_hz");
  c.h_u = matrix_from_json(member(j, "h_u"), "h_u", k, m);
  c.h_0 = matrix_from_json(member(j, "h_0"), "h_0", n, m);
  c.g_l = matrix_from_json(member(j, "g_l"), "g_l", k, n);
  c.z_ll = matrix_from_json(member(j, "z_ll"), "z_ll", n, n);
  if (j.contains("h_no_ris")) c.h_no_ris = matrix_from_json(j["h_no_ris"], "h_no_ris", k, m);
  c.validate();
  return c;
}

void save_components(const ChannelComponents& c, const std::filesystem::path& path) {
  write_file_atomic(path, components_to_json(c).dump() + "\n");
}

ChannelComponents load_components(const std::filesystem::path& path) {
  return components_from_json(parse_json_file(path));
}

Json scene_to_json(const SceneDescription& scene) {
  Json j;
  Json walls = Json::array();
  for (const auto& w : scene.walls) {
    walls.push_back({{"a", point_to_json(w.a)},
                     {"b", point_to_json(w.b)},
                     {"reflection", complex_to_json(w.reflection)}});
  }
  j["walls"] = walls;
  Json bs = Json::array();
  for (const auto& p : scene.bs_elements) bs.push_back(point_to_json(p));
  j["bs"] = bs;
  j["ris"] = {{"origin", point_to_json(scene.ris.origin)},
              {"axis", point_to_json(scene.ris.axis)},
              {"n_ports", scene.ris.n_ports},
              {"spacing", scene.port_spacing()},
              {"rows", scene.ris.rows},
              {"reflector_coefficient", complex_to_json(scene.ris.reflector_coefficient)}};
  Json users = Json::array();
  for (const auto& p : scene.users) users.push_back(point_to_json(p));
  j["users"] = users;
  if (scene.grid) {
    j["grid"] = {{"origin", point_to_json(scene.grid->origin)},
                 {"dx", scene.grid->dx},
                 {"dy", scene.grid->dy},
                 {"nx", scene.grid->nx},
                 {"ny", scene.grid->ny}};
  }
  j["frequency_hz"] = scene.frequency_hz;
  j["max_order"] = scene.max_reflection_order;
  j["scaling"] = {{"field_scale", scene.scaling.field_scale},
                  {"port_effective_length", scene.scaling.port_effective_length},
                  {"port_transfer_ohms", scene.scaling.port_transfer_ohms},
                  {"self_impedance", complex_to_json(scene.scaling.self_impedance)}};
  return j;
}

SceneDescription scene_from_json(const Json& j) {
  SceneDescription s;
  const Json& walls = array_member(j, "walls");
  for (std::size_t i = 0; i < walls.size(); ++i) {
    const std::string f = "walls[" + std::to_string(i) + "]";
    Wall w;
    w.a = point_from_json(member(walls[i], "a"), f + ".a");
    w.b = point_from_json(member(walls[i], "b"), f + ".b");
    if (walls[i].contains("reflection")) {
      w.reflection = complex_from_json(walls[i]["reflection"], f + ".reflection");
    }
    s.walls.push_back(w);
  }
  const Json& bs = array_member(j, "bs");
  for (std::size_t i = 0; i < bs.size(); ++i) {
    s.bs_elements.push_back(point_from_json(bs[i], "bs[" + std::to_string(i) + "]"));
  }
  const Json& users = array_member(j, "users");
  for (std::size_t i = 0; i < users.size(); ++i) {
    s.users.push_back(point_from_json(users[i], "users[" + std::to_string(i) + "]"));
  }
  const Json& ris = member(j, "ris");
  s.ris.origin = point_from_json(member(ris, "origin"), "ris.origin");
  s.ris.n_ports = count_member(ris, "n_ports");
  s.ris.spacing = number_or(ris, "spacing", 0.0);
  if (ris.contains("axis")) s.ris.axis = point_from_json(ris["axis"], "ris.axis");
  if (ris.contains("rows")) s.ris.rows = count_member(ris, "rows");
  if (ris.contains("reflector_coefficient")) {
    s.ris.reflector_coefficient =
        complex_from_json(ris["reflector_coefficient"], "ris.reflector_coefficient");
  }
  if (j.contains("grid") && !j["grid"].is_null() && !j["grid"].empty()) {
    const Json& g = j["grid"];
    ObservationGrid grid;
    grid.origin = point_from_json(member(g, "origin"), "grid.origin");
    grid.dx = number_member(g, "dx");
    grid.dy = number_member(g, "dy");
    grid.nx = count_member(g, "nx");
    grid.ny = count_member(g, "ny");
    s.grid = grid;
  }
  s.frequency_hz = number_member(j, "frequency_hz");
  if (j.contains("max_order")) {
    const Json& order = j["max_order"];
    if (!order.is_number_integer()) throw FileFormatError(Kind::Malformed, "max_order", "expected an integer");
    s.max_reflection_order = order.get<int>();
  }
  if (j.contains("scaling")) {
    const Json& sc = j["scaling"];
    s.scaling.field_scale = number_or(sc, "field_scale", s.scaling.field_scale);
    s.scaling.port_effective_length =
        number_or(sc, "port_effective_length", s.scaling.port_effective_length);
    s.scaling.port_transfer_ohms = number_or(sc, "port_transfer_ohms", s.scaling.port_transfer_ohms);
    if (sc.contains("self_impedance")) {
      s.scaling.self_impedance = complex_from_json(sc["self_impedance"], "scaling.self_impedance");
    }
  }
  try {
    s.validate();
  } catch (const InvalidInput& e) {
    throw FileFormatError(Kind::InvalidValue, "scene", e.what());
  }
  return s;
}

SceneDescription load_scene(const std::filesystem::path& path) {
  return scene_from_json(parse_json_file(path));
}

Json varactor_to_json(const VaractorModel& model) {
  return {{"c_j_pf", model.c_j / kPicofarad}, {"v_j_v", model.v_j},
          {"m", model.exponent},              {"c_par_pf", model.c_par / kPicofarad},
          {"r_v_ohm", model.r_v},             {"l_v_nh", model.l_v * 1e9},
          {"c_min_pf", model.c_min / kPicofarad}, {"c_max_pf", model.c_max / kPicofarad}};
}

VaractorModel varactor_from_json(const Json& j) {
  VaractorModel model = default_varactor();
  model.c_j = number_or(j, "c_j_pf", model.c_j / kPicofarad) * kPicofarad;
  model.v_j = number_or(j, "v_j_v", model.v_j);
  model.exponent = number_or(j, "m", model.exponent);
  model.c_par = number_or(j, "c_par_pf", model.c_par / kPicofarad) * kPicofarad;
  model.r_v = number_or(j, "r_v_ohm", model.r_v);
  model.l_v = number_or(j, "l_v_nh", model.l_v * 1e9) * 1e-9;
  model.c_min = number_or(j, "c_min_pf", model.c_min / kPicofarad) * kPicofarad;
  model.c_max = number_or(j, "c_max_pf", model.c_max / kPicofarad) * kPicofarad;
  try {
    model.validate();
  } catch (const InvalidInput& e) {
    throw FileFormatError(Kind::InvalidValue, "varactor", e.what());
  }
  return model;
}

Json ris_config_to_json(const RisConfiguration& config) {
  Json j;
  j["mode"] = std::string(to_string(config.mode));
  j["c_on_pf"] = config.c_on / kPicofarad;
  j["c_off_pf"] = config.c_off / kPicofarad;
  j["groups"] = config.groups;
  Json caps = Json::array();
  for (double c : config.capacitances) caps.push_back(c / kPicofarad);
  j["capacitances_pf"] = caps;
  if (config.mode == ControlMode::ColumnPairedOneBit) {
    Json states = Json::array();
    for (double v : config.group_values()) states.push_back(v == config.c_on ? 1 : 0);
    j["states"] = states;
  }
  return j;
}

RisConfiguration ris_config_from_json(const Json& j, std::size_t n_elements) {
  RisConfiguration config;
  try {
    config.mode = control_mode_from_string(member(j, "mode").get<std::string>());
  } catch (const InvalidInput& e) {
    throw FileFormatError(Kind::InvalidValue, "mode", e.what());
  } catch (const Json::exception&) {
    throw FileFormatError(Kind::Malformed, "mode", "expected a string");
  }
  config.c_on = number_or(j, "c_on_pf", config.c_on / kPicofarad) * kPicofarad;
  config.c_off = number_or(j, "c_off_pf", config.c_off / kPicofarad) * kPicofarad;
  if (j.contains("groups")) {
    try {
      config.groups = j["groups"].get<Grouping>();
    } catch (const Json::exception&) {
      throw FileFormatError(Kind::Malformed, "groups", "expected an array of index arrays");
    }
  } else {
    config.groups = element_grouping(n_elements);
  }
  try {
    validate_grouping(config.groups, n_elements);
  } catch (const InvalidInput& e) {
    throw FileFormatError(Kind::InvalidValue, "groups", e.what());
  }
  config.capacitances.assign(n_elements, config.c_off);
  std::vector<double> group_values;
  if (j.contains("capacitances_pf")) {
    config.capacitances = picofarads(j["capacitances_pf"], "capacitances_pf");
    if (config.capacitances.size() != n_elements) {
      throw FileFormatError(Kind::DimensionMismatch, "capacitances_pf",
                            "expected " + std::to_string(n_elements) + " entries");
    }
    return config;
  }
  if (j.contains("group_values_pf")) {
    group_values = picofarads(j["group_values_pf"], "group_values_pf");
  } else if (j.contains("states")) {
    const Json& states = j["states"];
    if (!states.is_array()) throw FileFormatError(Kind::Malformed, "states", "expected an array");
    for (const auto& s : states) {
      if (!s.is_number_integer()) throw FileFormatError(Kind::Malformed, "states", "expected 0/1");
      group_values.push_back(s.get<int>() ? config.c_on : config.c_off);
    }
  } else {
    throw FileFormatError(Kind::MissingField, "capacitances_pf",
                          "one of capacitances_pf, group_values_pf or states is required");
  }
  if (group_values.size() != config.groups.size()) {
    throw FileFormatError(Kind::DimensionMismatch, j.contains("states") ? "states" : "group_values_pf",
                          "expected " + std::to_string(config.groups.size()) + " entries");
  }
  config.capacitances = expand_group_config(config, group_values);
  return config;
}

Json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileFormatError(Kind::Malformed, path.string(), "cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FileFormatError(Kind::Malformed, path.string(), e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace risopt
