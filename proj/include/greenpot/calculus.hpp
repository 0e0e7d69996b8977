#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "greenpot/kernels.hpp"
#include "greenpot/space.hpp"

namespace greenpot {

/// Which discrete differential backs an operation: the chart differential
/// (per-vertex forward-difference vector on the grid chart) or the edge
/// difference quotient (upper-gradient analog on a general graph).
enum class GradientMode { chart, edge };

/// Real value per vertex of (a subset of) a MetricGraph.
struct ScalarField {
    const MetricGraph* graph = nullptr;
    std::vector<double> values;          // dense over all vertices
    std::vector<std::uint8_t> defined;   // 1 where the field carries a value

    ScalarField() = default;
    explicit ScalarField(const MetricGraph& g, double fill = 0.0, bool all_defined = true)
        : graph(&g), values(g.vertex_count(), fill),
          defined(g.vertex_count(), all_defined ? 1 : 0) {}

    double at(VertexId v) const { return values[v]; }
    bool is_defined(VertexId v) const { return defined[v] != 0; }
    void set(VertexId v, double x) {
        values[v] = x;
        defined[v] = 1;
    }
    bool fully_defined() const;
    VertexSet domain() const;

    double min_over(const VertexSet& s) const;
    double max_over(const VertexSet& s) const;
};

/// Discrete gradient data for a field, in one of the two modes.
struct GradientField {
    GradientMode mode = GradientMode::chart;
    int dimension = 0;
    std::vector<double> chart_data;  // vertex-major [v * dim + k], chart mode
    std::vector<double> edge_data;   // signed quotient per edge (a -> b), edge mode
    std::vector<double> norm;        // per vertex (chart) or per edge (edge)
};

/// Forward-difference chart gradient (one-sided at the lattice boundary) or
/// per-edge difference quotients. Throws naming the vertex whose stencil
/// value is missing.
GradientField gradient(const ScalarField& u, GradientMode mode);

/// p-energy of u over `region`.
/// Chart mode: sum over cells based at region vertices of
/// measure * |Du|^p; edge mode: sum over edges with both endpoints in the
/// region of conductance * length * |difference quotient|^p.
double p_energy(const ScalarField& u, double p, const VertexSet& region,
                GradientMode mode);

/// Partial derivatives of the (unregularized) p-energy with respect to the
/// values at `free`; returned field is defined exactly on `free`.
ScalarField energy_gradient(const ScalarField& u, double p, const VertexSet& free,
                            GradientMode mode);

/// ||u||_Lp + (p-energy)^(1/p) over the whole (fully defined) field.
double sobolev_norm(const ScalarField& u, double p);

/// min / max over vertices (where both are nonzero) of the chart gradient
/// norm divided by the vertex-aggregated edge upper gradient.
std::pair<double, double> comparability_ratio(const ScalarField& u);

void write_field(std::ostream& os, const ScalarField& u);
ScalarField read_field(std::istream& is, const MetricGraph& g);

/// Cell mask selecting exactly the given base vertices.
std::vector<std::uint8_t> mask_of(const VertexSet& s, std::size_t n);

} // namespace greenpot
