#pragma once

// JSON serialization of the on-disk formats. Readers throw FileFormatError
// naming the offending field.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "risopt/ris_model.hpp"
#include "risopt/scene.hpp"

namespace risopt {

using Json = nlohmann::json;

Json complex_to_json(Complex z);
// Accepts [re, im] or a bare real number.
Complex complex_from_json(const Json& j, const std::string& field);
// Row-major nested arrays of [re, im].
Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j, const std::string& field, std::size_t rows,
                         std::size_t cols);

// Channel file:
//   {"k":K,"m":M,"n":N,"frequency_hz":f,"h_u":[[[re,im],...],...],"h_0":...,
//    "g_l":...,"z_ll":...,"h_no_ris":... (optional)}
Json components_to_json(const ChannelComponents& c);
ChannelComponents components_from_json(const Json& j);
void save_components(const ChannelComponents& c, const std::filesystem::path& path);
ChannelComponents load_components(const std::filesystem::path& path);

Json scene_to_json(const SceneDescription& scene);
SceneDescription scene_from_json(const Json& j);
SceneDescription load_scene(const std::filesystem::path& path);

// Capacitances in pF, voltages in V, resistance in ohm, inductance in nH.
Json varactor_to_json(const VaractorModel& model);
VaractorModel varactor_from_json(const Json& j);

// {"mode":..., "c_on_pf":..., "c_off_pf":..., "groups":[[...],...],
//  "capacitances_pf":[...]}; "group_values_pf" or (1-bit) "states" may
// replace "capacitances_pf". Without "groups" every element is its own group.
Json ris_config_to_json(const RisConfiguration& config);
RisConfiguration ris_config_from_json(const Json& j, std::size_t n_elements);

Json parse_json_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace risopt
