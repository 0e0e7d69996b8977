#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "greenpot/capacity.hpp"
#include "greenpot/dirichlet.hpp"
#include "greenpot/green.hpp"
#include "greenpot/report.hpp"
#include "greenpot/space.hpp"

namespace greenpot {

struct StageGrid {
    std::shared_ptr<const MetricGraph> graph;
    VertexId pole = 0;
};

/// Produces a grid containing the ball of the requested radius around its
/// pole; throws ResourceError when the memory budget would be exceeded.
using GridGenerator = std::function<StageGrid(double outer_radius)>;

GridGenerator make_square_grid_generator(int dimension, double spacing,
                                         std::size_t max_vertices = 4u << 20);

struct GlobalStageTrace {
    double r_in;
    double r_out;
    double m;              // inf of the stage potential on the reference annulus
    double big_m;          // sup of the stage potential on the reference annulus
    double divisor;        // big_m - m (Harnack forbids zero)
    double overlap_change; // sup-norm change vs the previous stage on the fixed stage-1 annulus
};

struct AsymptoticFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
};

/// Conformal-exponent Green function built on expanding grids via annulus
/// potentials with the min-max normalization on the fixed reference annulus
/// (radius [scale, 2*scale] around the pole).
struct GlobalGreenResult {
    ScalarField field; // on the deepest grid
    std::shared_ptr<const MetricGraph> grid;
    VertexId pole = 0;
    double q = 2.0;
    double scale = 0.0;
    double lambda = 1.0;        // final capacity normalization multiplier
    double inner_radius = 0.0;  // deepest shrinking plate radius
    double outer_radius = 0.0;  // deepest expanding domain radius
    std::vector<GlobalStageTrace> trace;
    AsymptoticFit inner_fit, outer_fit; // filled by log_asymptotics_fit
};

/// Per stage i = 1..stages solves the Q-potential of
/// (closed ball 2^-i * scale, ball 2^i * scale), rescales by the inf/sup over
/// the reference annulus, and applies the final capacity normalization to the
/// deepest stage. The grid Ahlfors fit must match Q within 10%.
GlobalGreenResult green_global(const GridGenerator& gen, double q, int stages,
                               const SolverConfig& cfg, double scale);

struct LogAsymptotics {
    AsymptoticFit inner, outer;                           // band midpoint fits
    AsymptoticFit inner_min, inner_max, outer_min, outer_max;
    double max_band_gap_inner = 0.0;                      // sup of M(r) - m(r)
    double max_band_gap_outer = 0.0;
    bool slopes_positive = false;
    double slope_ratio = 0.0;                             // max/min over the four slopes
    bool pass = false;
};

/// Least-squares fits of m(r), M(r) against log(1/r) over the two ranges
/// (each must span at least a factor 4); fills the result's stored fits.
LogAsymptotics log_asymptotics_fit(GlobalGreenResult& gr,
                                   std::pair<double, double> inner_range,
                                   std::pair<double, double> outer_range,
                                   double max_slope_ratio = 1.5);

/// Two-sided min-max capacity inequalities over (r, R) pairs; the companion
/// lower branch uses r0 = 2r and is recorded inapplicable when its
/// hypothesis m(r) >= M(r0) fails.
Report min_max_capacity_check(const GlobalGreenResult& gr,
                              std::span<const std::pair<double, double>> pairs,
                              const SolverConfig& cfg, double c_max = 4.0);

/// Level-set capacity of the global field between {u >= beta} and {u > alpha};
/// levels may be negative. Throws when the sublevel structure reaches the
/// truncation rim.
LevelGap global_level_capacity(const GlobalGreenResult& gr, double alpha, double beta,
                               const SolverConfig& cfg);

struct UniquenessOptions {
    double r_lo = 0.0;        // 0: pick 8h and above the deepest plates
    double r_hi = 0.0;        // 0: 80% of the smaller outer radius
    double sup_tol = 5e-3;
    double grad_tol = 1e-2;
};

struct UniquenessDiagnostics {
    double sup_difference = 0.0;
    double gradient_lq = 0.0;
    bool matched = false;
    bool q_below_2_advisory = false; // uniqueness theory needs Q >= 2
};

/// Compares two constructions with the same pole, exponent and spacing on
/// the common annulus after matching values at one reference vertex.
UniquenessDiagnostics uniqueness_diagnostics(const GlobalGreenResult& u,
                                             const GlobalGreenResult& v,
                                             const UniquenessOptions& opts = {});

} // namespace greenpot
