#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "greenpot/calculus.hpp"
#include "greenpot/space.hpp"

namespace greenpot {

/// Solver parameters. The exponent is restricted to (1.2, 10]: the energy
/// Hessian degenerates towards p = 1 and far-p conditioning is out of scope.
struct SolverConfig {
    double p = 2.0;
    double energy_tol = 1e-10;  // relative energy change between accepted steps
    double grad_tol = 1e-9;     // max-norm of the energy gradient on the free set
    int max_iterations = 10000;
    double shrink = 0.5;        // backtracking line-search factor
    double reg_eps = 1e-12;     // added inside |Du|^2 before exponentiation
    GradientMode mode = GradientMode::chart;
    std::string log_path;       // iteration CSV (iteration, energy, residual) when set

    void validate() const;
};

/// Dirichlet data: unknowns on `omega`, prescribed values wherever the
/// boundary field is defined. Every omega vertex's energy stencil must be
/// covered by omega or by boundary data.
struct DirichletProblem {
    const MetricGraph* graph = nullptr;
    VertexSet omega;
    ScalarField boundary;
};

/// Minimizes the p-energy over fields agreeing with the boundary data off
/// omega. p = 2 short-circuits to one sparse linear solve; otherwise damped
/// Newton with backtracking on the regularized energy, falling back to
/// gradient steps on factorization failure.
ScalarField solve_dirichlet(const DirichletProblem& prob, const SolverConfig& cfg);

/// Max-norm of the energy gradient over omega: the weak-form residual
/// against the vertex-indicator test basis.
double residual(const ScalarField& u, double p, const VertexSet& omega,
                GradientMode mode);

/// sup u / inf u over ball(x, R); requires u > 0 on ball(x, 6R).
double harnack_ratio(const ScalarField& u, VertexId x, double R);

struct ProfileEntry {
    double r;
    double min_value; // m(r)
    double max_value; // M(r)
};

struct ProfileResult {
    std::vector<ProfileEntry> entries;
    std::vector<double> skipped_radii; // empty sphere bands
};

/// Min / max of u over the sphere band at each radius.
ProfileResult oscillation_profile(const ScalarField& u, VertexId x0,
                                  std::span<const double> radii);

} // namespace greenpot
