#include "greenpot/opmap.hpp"

namespace greenpot {

namespace {

constexpr OpMapping kMap[] = {
    // space
    {"build_grid", "regularity"},
    {"ball", "regularity"},
    {"sphere_band", "profile"},
    {"estimate_regularity", "regularity"},
    // calculus
    {"gradient", "solve"},
    {"p_energy", "solve"},
    {"energy_gradient", "solve"},
    {"sobolev_norm", "solve"},
    {"comparability_ratio", "profile"},
    // dirichlet
    {"solve_dirichlet", "solve"},
    {"residual", "solve"},
    {"harnack_ratio", "profile"},
    {"oscillation_profile", "profile"},
    // capacity
    {"p_potential", "capacity"},
    {"capacity", "capacity"},
    {"level_set_capacity", "capacity"},
    {"capacity_calculus_check", "verify"},
    {"ring_bounds_check", "capacity"},
    {"loewner_profile", "capacity"},
    {"parabolicity_probe", "capacity"},
    // green
    {"green_compact", "green"},
    {"normalize_green", "green"},
    {"validate_green", "green"},
    {"fundamental_constant", "green"},
    {"near_pole_integrability", "green"},
    {"green_difference_bound", "green"},
    // global green
    {"green_global", "global-green"},
    {"log_asymptotics_fit", "global-green"},
    {"min_max_capacity_check", "global-green"},
    {"uniqueness_diagnostics", "global-green"},
    // cli
    {"run", "run"},
};

} // namespace

std::span<const OpMapping> operation_map() { return kMap; }

} // namespace greenpot
