#include "greenpot/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "greenpot/util.hpp"

namespace greenpot {

bool ScalarField::fully_defined() const {
    return std::all_of(defined.begin(), defined.end(), [](std::uint8_t d) { return d != 0; });
}

VertexSet ScalarField::domain() const {
    VertexSet s;
    for (VertexId v = 0; v < defined.size(); ++v)
        if (defined[v]) s.push_back(v);
    return s;
}

double ScalarField::min_over(const VertexSet& s) const {
    double m = std::numeric_limits<double>::infinity();
    for (VertexId v : s) m = std::min(m, values[v]);
    return m;
}

double ScalarField::max_over(const VertexSet& s) const {
    double m = -std::numeric_limits<double>::infinity();
    for (VertexId v : s) m = std::max(m, values[v]);
    return m;
}

std::vector<std::uint8_t> mask_of(const VertexSet& s, std::size_t n) {
    std::vector<std::uint8_t> mask(n, 0);
    for (VertexId v : s) mask[v] = 1;
    return mask;
}

GradientField gradient(const ScalarField& u, GradientMode mode) {
    const MetricGraph& g = *u.graph;
    GradientField out;
    out.mode = mode;
    if (mode == GradientMode::chart) {
        const GridChart& chart = g.chart();
        const int dim = chart.dimension;
        out.dimension = dim;
        out.chart_data.assign(g.vertex_count() * dim, 0.0);
        out.norm.assign(g.vertex_count(), 0.0);
        for (VertexId v = 0; v < g.vertex_count(); ++v) {
            if (!u.is_defined(v)) continue;
            double s = 0;
            for (int k = 0; k < dim; ++k) {
                const VertexId fwd = chart.neighbor(v, k, +1);
                double diff;
                if (fwd != kNoVertex) {
                    if (!u.is_defined(fwd))
                        throw ParameterError("gradient: missing value at vertex " +
                                             std::to_string(fwd));
                    diff = u.values[fwd] - u.values[v];
                } else {
                    const VertexId bwd = chart.neighbor(v, k, -1);
                    if (bwd == kNoVertex || !u.is_defined(bwd))
                        throw ParameterError("gradient: missing value at vertex " +
                                             std::to_string(bwd == kNoVertex ? v : bwd));
                    diff = u.values[v] - u.values[bwd];
                }
                const double q = diff / chart.spacing;
                out.chart_data[static_cast<std::size_t>(v) * dim + k] = q;
                s += q * q;
            }
            out.norm[v] = std::sqrt(s);
        }
    } else {
        out.edge_data.assign(g.edge_count(), 0.0);
        out.norm.assign(g.edge_count(), 0.0);
        for (std::size_t ei = 0; ei < g.edge_count(); ++ei) {
            const auto& e = g.edges()[ei];
            if (!u.is_defined(e.a))
                throw ParameterError("gradient: missing value at vertex " + std::to_string(e.a));
            if (!u.is_defined(e.b))
                throw ParameterError("gradient: missing value at vertex " + std::to_string(e.b));
            const double q = (u.values[e.b] - u.values[e.a]) / e.length;
            out.edge_data[ei] = q;
            out.norm[ei] = std::abs(q);
        }
    }
    return out;
}

double p_energy(const ScalarField& u, double p, const VertexSet& region,
                GradientMode mode) {
    if (!(p > 1.0)) throw ParameterError("p_energy: exponent must exceed 1");
    const MetricGraph& g = *u.graph;
    for (VertexId v : region)
        if (!u.is_defined(v))
            throw ParameterError("p_energy: region vertex " + std::to_string(v) +
                                 " has no value");
    if (mode == GradientMode::chart) {
        const GridChart& chart = g.chart();
        for (VertexId v : region)
            for (int k = 0; k < chart.dimension; ++k) {
                const VertexId fwd = chart.neighbor(v, k, +1);
                if (fwd != kNoVertex && !u.is_defined(fwd))
                    throw ParameterError("p_energy: stencil vertex " + std::to_string(fwd) +
                                         " has no value");
            }
        const auto mask = mask_of(region, g.vertex_count());
        return kernels::chart_energy(g, u.values, mask, p, 0.0);
    }
    std::vector<std::uint8_t> emask(g.edge_count(), 0);
    for (std::size_t ei = 0; ei < g.edge_count(); ++ei) {
        const auto& e = g.edges()[ei];
        if (set_contains(region, e.a) && set_contains(region, e.b)) emask[ei] = 1;
    }
    return kernels::edge_energy(g, u.values, emask, p, 0.0);
}

ScalarField energy_gradient(const ScalarField& u, double p, const VertexSet& free,
                            GradientMode mode) {
    if (!(p > 1.0)) throw ParameterError("energy_gradient: exponent must exceed 1");
    const MetricGraph& g = *u.graph;
    std::vector<double> dense(g.vertex_count(), 0.0);
    if (mode == GradientMode::chart) {
        // cells whose whole stencil is defined
        const GridChart& chart = g.chart();
        std::vector<std::uint8_t> mask(g.vertex_count(), 0);
        for (VertexId v = 0; v < g.vertex_count(); ++v) {
            if (!u.is_defined(v)) continue;
            bool ok = true;
            for (int k = 0; k < chart.dimension && ok; ++k) {
                const VertexId fwd = chart.neighbor(v, k, +1);
                if (fwd != kNoVertex && !u.is_defined(fwd)) ok = false;
            }
            mask[v] = ok;
        }
        kernels::chart_energy_gradient(g, u.values, mask, p, 0.0, dense);
    } else {
        std::vector<std::uint8_t> emask(g.edge_count(), 0);
        for (std::size_t ei = 0; ei < g.edge_count(); ++ei) {
            const auto& e = g.edges()[ei];
            emask[ei] = u.is_defined(e.a) && u.is_defined(e.b);
        }
        kernels::edge_energy_gradient(g, u.values, emask, p, 0.0, dense);
    }
    ScalarField out(g, 0.0, false);
    for (VertexId v : free) out.set(v, dense[v]);
    return out;
}

double sobolev_norm(const ScalarField& u, double p) {
    if (!(p >= 1.0)) throw ParameterError("sobolev_norm: exponent must be at least 1");
    const MetricGraph& g = *u.graph;
    if (!u.fully_defined())
        throw ParameterError("sobolev_norm: field must be defined on every vertex");
    double lp = 0;
    for (VertexId v = 0; v < g.vertex_count(); ++v)
        lp += std::pow(std::abs(u.values[v]), p) * g.measure(v);
    const double energy = g.has_chart()
                              ? kernels::chart_energy(g, u.values, {}, p, 0.0)
                              : kernels::edge_energy(g, u.values, {}, p, 0.0);
    return std::pow(lp, 1.0 / p) + std::pow(energy, 1.0 / p);
}

std::pair<double, double> comparability_ratio(const ScalarField& u) {
    const MetricGraph& g = *u.graph;
    const GradientField chart_grad = gradient(u, GradientMode::chart);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    bool any = false;
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        double edge_agg = 0;
        for (std::uint32_t ei : g.incident_edges(v)) {
            const auto& e = g.edges()[ei];
            edge_agg = std::max(edge_agg,
                                std::abs(u.values[e.b] - u.values[e.a]) / e.length);
        }
        const double cn = chart_grad.norm[v];
        if (cn > 0 && edge_agg > 0) {
            const double r = cn / edge_agg;
            lo = std::min(lo, r);
            hi = std::max(hi, r);
            any = true;
        }
    }
    if (!any) throw DegenerateError("comparability_ratio: field is constant");
    return {lo, hi};
}

void write_field(std::ostream& os, const ScalarField& u) {
    for (VertexId v = 0; v < u.values.size(); ++v)
        if (u.is_defined(v)) os << v << " " << format_double(u.values[v]) << "\n";
}

ScalarField read_field(std::istream& is, const MetricGraph& g) {
    ScalarField u(g, 0.0, false);
    std::size_t id;
    double value;
    while (is >> id >> value) {
        if (id >= g.vertex_count())
            throw ParameterError("field file: vertex id out of range");
        u.set(static_cast<VertexId>(id), value);
    }
    return u;
}

} // namespace greenpot
