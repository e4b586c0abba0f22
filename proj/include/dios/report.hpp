#pragma once

#include <string>

#include "json.hpp"

namespace dios {

/// Canonical JSON text: keys sorted, 17-significant-digit floats, LF line
/// endings. Identical documents serialize to identical bytes.
std::string canonical_dump(const nlohmann::json& j);

/// Wraps a subcommand report in the envelope (tool version, config echo)
/// and writes it canonically. Rejects non-finite numbers before writing.
/// Timing is only embedded when `timing_seconds` >= 0; reports meant to be
/// byte-reproducible omit it.
void emit_report(const nlohmann::json& body, const nlohmann::json& config_echo,
                 const std::string& path, double timing_seconds = -1);

nlohmann::json tool_info();

}  // namespace dios
