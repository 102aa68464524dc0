#pragma once

#include <cstddef>

#include <json.hpp>

#include "tguard/trojans.hpp"

namespace tguard {

/// Variant definitions as they appear in scenario files and in the
/// authority database's stored reference models.
nlohmann::json variant_to_json(const IpVariant& v);
/// Throws ConfigError on a malformed definition.
IpVariant variant_from_json(const nlohmann::json& j, std::size_t width);

nlohmann::json trojan_to_json(const TrojanSpec& t);
TrojanSpec trojan_from_json(const nlohmann::json& j, std::size_t width);

}  // namespace tguard
