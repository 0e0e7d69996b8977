#pragma once

#include <cstdint>

#include "greenpot/report.hpp"

namespace greenpot {

struct SuiteOptions {
    int instances = 100;
    std::uint64_t seed = 7;
};

/// Comparison principle: ordered boundary data produce ordered solutions.
/// Families where the discrete operator is order-preserving: edge mode for
/// p in {1.5, 2, 3} and chart mode for p = 2.
Report run_comparison_suite(const SuiteOptions& opts);

/// Weak maximum principle: interior values stay inside the boundary range.
Report run_max_principle_suite(const SuiteOptions& opts);

/// Level-component exclusion: no component of {u > a} or {u < a} avoids the
/// boundary stencil on solved instances.
Report run_level_component_suite(const SuiteOptions& opts);

/// Capacity calculus items (i), (ii), (iii), (iv), (v) on random nested
/// instances over a fixed grid.
Report run_capacity_calculus_suite(const SuiteOptions& opts);

/// All of the above.
Report run_principles_suite(const SuiteOptions& opts);

} // namespace greenpot
