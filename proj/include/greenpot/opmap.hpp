#pragma once

#include <span>
#include <string_view>

namespace greenpot {

/// Which CLI subcommand exposes each library operation. Every operation is
/// reachable from exactly one subcommand; a test enumerates the mapping.
struct OpMapping {
    std::string_view operation;
    std::string_view subcommand;
};

std::span<const OpMapping> operation_map();

} // namespace greenpot
