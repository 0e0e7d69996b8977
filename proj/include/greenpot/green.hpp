#pragma once

#include <span>
#include <vector>

#include "greenpot/capacity.hpp"
#include "greenpot/dirichlet.hpp"
#include "greenpot/report.hpp"
#include "greenpot/space.hpp"

namespace greenpot {

struct GreenLevelTrace {
    double radius;     // shrinking plate radius
    double cap;        // cap_p(plate, omega)
    double sup_change; // sup-norm change of the normalized level vs the previous one
};

struct LevelGap {
    double a, b;
    double gap; // relative gap of cap({u>=b},{u>a}) against (b-a)^(1-p)
};

/// A constructed singular potential on a relatively compact domain, after
/// capacity normalization.
struct GreenResult {
    ScalarField field;
    VertexId pole = 0;
    double p = 2.0;
    GradientMode mode = GradientMode::chart;
    double lambda = 1.0;     // multiplier applied by normalize_green
    double pole_value = 0.0; // field value at the pole
    double k_constant = std::numeric_limits<double>::quiet_NaN(); // Dirac pairing
    VertexSet omega;
    std::vector<ProfileEntry> profile;       // (r, m(r), M(r)) ladder
    std::vector<GreenLevelTrace> trace;      // shrinking-plate construction record
    std::vector<LevelGap> normalization_gaps; // post-normalization spot checks
};

/// Shrinking-ball construction: for i = 1..levels solves the p-potential of
/// (closed ball of radius 2^-i * scale, omega), rescales each level by
/// cap^(1/(1-p)), keeps the deepest level (the sequence stabilizes once the
/// plate is the pole alone) and applies normalize_green. scale <= 0 picks
/// the distance from the pole to the complement of omega.
GreenResult green_compact(const MetricGraph& g, const VertexSet& omega, VertexId x0,
                          const SolverConfig& cfg, int levels, double scale = 0.0);

/// Capacity normalization: with s = half the input's pole value and t from
/// t^(1-p) = cap_p({v >= s}, omega), returns u = (t/s) v. The capacity is
/// evaluated through the truncated field clamp(v/s, 0, 1) so the level-set
/// identity holds exactly at the normalization pair; the s rule makes the
/// operation exactly idempotent and scale-equivariant on a fixed graph.
GreenResult normalize_green(const ScalarField& v, const VertexSet& omega, VertexId x0,
                            double p, const SolverConfig& cfg);

struct GreenValidationTols {
    double residual_tol = 1e-7;  // p-harmonicity residual off the pole
    double pole_tol = 0.05;      // relative gap of the pole-value identity
    double levelset_tol = 0.02;  // relative gap of the level-set capacities
};

/// Checks the defining conditions: harmonicity off the pole, the pole-value
/// capacity identity, exact vanishing outside omega and the level-set
/// capacity law at the given (a, b) samples. Failures are report rows.
Report validate_green(const GreenResult& gr, std::span<const std::pair<double, double>> samples,
                      const SolverConfig& cfg, const GreenValidationTols& tols = {});

/// cap({u >= b}, {u > a}) for the constructed field, with the (b-a)^(1-p)
/// reference and relative gap.
LevelGap green_level_capacity(const GreenResult& gr, double a, double b,
                              const SolverConfig& cfg);

struct FundamentalConstant {
    double k = 0.0;      // mean Dirac pairing over the cutoff sweep
    double spread = 0.0; // max relative deviation across cutoffs
};

/// Pairs the field with radial Lipschitz cutoffs (1 inside R/2, 0 outside R)
/// for each cutoff radius; the mean is the fundamental-solution constant and
/// the spread certifies its independence of the cutoff.
FundamentalConstant fundamental_constant(GreenResult& gr, std::span<const double> cutoff_radii);

/// Near-pole integrability sweep: per radius reports the gradient
/// (p-1)-mass of the ball, the interior gradient p-energy against the scaled
/// exterior mass (Caccioppoli form), and the fitted constants.
Report near_pole_integrability(const GreenResult& gr, std::span<const double> radii,
                               double r0, double spread_tol = 0.3);

struct DifferenceBound {
    double sup_difference = 0.0;
    bool matched = false;
};

/// sup |u - v| over omega minus the pole after subtracting the difference at
/// the reference vertex (lexicographically smallest boundary-adjacent
/// interior vertex).
DifferenceBound green_difference_bound(const GreenResult& u, const GreenResult& v,
                                       double uniqueness_tol = 1e-4);

} // namespace greenpot
