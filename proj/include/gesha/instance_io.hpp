#pragma once

#include <filesystem>
#include <string>

#include "gesha/core_model.hpp"

namespace gesha {

// Reads an instance document (sections electric, gas, coupling, time; see
// docs/instance_schema.json). Throws DataError on malformed input, naming the
// offending field. The returned instance is finalized but not validated.
Instance load_instance(const std::filesystem::path& path);
Instance parse_instance(const std::string& json_text);

// Round-trippable JSON text of an instance.
std::string instance_to_json(const Instance& instance);

}  // namespace gesha
