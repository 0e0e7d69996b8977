#pragma once

#include <optional>
#include <string>
#include <vector>

#include "greenpot/dirichlet.hpp"
#include "greenpot/report.hpp"
#include "greenpot/space.hpp"

namespace greenpot {

/// Capacity problem between two plates.
///  - relative kind (K, Omega): admissible fields are 1 on K and 0 on every
///    vertex outside Omega; the zero plate is the complement of Omega.
///  - condenser kind (E, F; Omega): admissible fields are 1 on E, 0 on F,
///    free on Omega \ (E u F); vertices outside Omega do not participate.
struct Condenser {
    enum class Kind { relative, condenser };

    Kind kind = Kind::relative;
    const MetricGraph* graph = nullptr;
    VertexSet inner;  // E, the plate held at 1
    VertexSet outer;  // F, the plate held at 0 (condenser kind only)
    VertexSet omega;  // ambient open set

    static Condenser relative(const MetricGraph& g, VertexSet k, VertexSet omega);
    static Condenser between(const MetricGraph& g, VertexSet e, VertexSet f,
                             VertexSet omega);
};

enum class CapacityOutcome {
    finite,          // positive capacity with a computed potential
    zero_degenerate, // plates disconnected or zero plate empty: capacity 0
    infinite,        // no admissible field (plates overlap)
};

struct CapacityResult {
    CapacityOutcome outcome = CapacityOutcome::finite;
    double value = 0.0;
    ScalarField potential;
    double residual = 0.0;
    double p = 2.0;
    GradientMode mode = GradientMode::chart;
    // cells (chart) or edges (edge) the energy was taken over; empty = all
    std::vector<std::uint8_t> energy_mask;
};

/// Solves for the p-potential (1 on the inner plate, p-harmonic in between,
/// 0 on the outer plate) and returns its p-energy as the capacity.
CapacityResult p_potential(const Condenser& c, const SolverConfig& cfg);

/// Capacity value only. Throws DegenerateError for the infinite case.
double capacity(const Condenser& c, const SolverConfig& cfg);

/// cap(B̄(x0, r), B(x0, R)) as a relative problem.
CapacityResult ring_capacity(const MetricGraph& g, VertexId x0, double r, double R,
                             const SolverConfig& cfg);

struct LevelSetCapacity {
    double value = 0.0;     // capacity between {u >= beta} and complement of {u > alpha}
    double reference = 0.0; // cap E / (beta - alpha)^(p-1)
    double gap = 0.0;       // relative difference
};

/// Truncation identity: clamping the potential to the value band [alpha,
/// beta] produces the potential of the level condenser, so its energy is the
/// capacity between {u >= beta} and the complement of {u > alpha}. The gap
/// against cap E / (beta - alpha)^(p-1) measures the truncation chain-rule
/// defect (exact per edge, first-order for the chart energy).
LevelSetCapacity level_set_capacity(const CapacityResult& res, double alpha,
                                    double beta, const SolverConfig& cfg);

/// Randomized verification of the capacity calculus on g: set monotonicity,
/// domain antitonicity, decreasing-compact limits, finite subadditivity and
/// the nesting series inequality. Failures become report rows, not throws.
Report capacity_calculus_check(const MetricGraph& g, int instances,
                               std::uint64_t seed, const SolverConfig& cfg);

struct RingBoundsOptions {
    double r0 = 0.0;            // configured R0 bound; 0 = accept any R
    double stability_tol = 0.3; // max relative spread of the fitted constants
};

/// Ring capacity sweep against the two-sided model
/// (measure-scaling branch for p < Q, logarithmic branch for p = Q).
Report ring_bounds_check(const MetricGraph& g, VertexId x0,
                         std::span<const double> radii, double big_r,
                         const SolverConfig& cfg, const RingBoundsOptions& opt = {});

struct LoewnerPoint {
    double t = 0.0;   // dist(E, F) / min(diam E, diam F), graph metric
    double cap = 0.0; // condenser capacity in the whole space
};

struct LoewnerProfile {
    std::vector<LoewnerPoint> points; // sorted by t
    int skipped = 0;                  // degenerate pairs
};

LoewnerProfile loewner_profile(const MetricGraph& g,
                               const std::vector<std::pair<VertexSet, VertexSet>>& pairs,
                               const SolverConfig& cfg);

struct ProbeStage {
    const MetricGraph* graph = nullptr;
    VertexId pole = 0;
    double omega_radius = 0.0;
};

/// cap_p(K, Omega_i) along an expanding domain sequence; K is the closed
/// ball of radius k_radius around the pole of each stage.
std::vector<double> parabolicity_probe(const std::vector<ProbeStage>& stages,
                                       double k_radius, const SolverConfig& cfg);

} // namespace greenpot
