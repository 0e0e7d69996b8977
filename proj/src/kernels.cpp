#include "greenpot/kernels.hpp"

#include <cmath>

namespace greenpot {

namespace {

constexpr int kChunks = 256;

// Deterministic parallel sum: fixed chunking of [0, n), partials combined in
// chunk order, so the result is independent of the number of threads.
template <class Body>
double chunked_sum(std::int64_t n, Body&& body) {
    if (n <= 0) return 0.0;
    double partial[kChunks] = {0};
#pragma omp parallel for schedule(static)
    for (int c = 0; c < kChunks; ++c) {
        const std::int64_t lo = n * c / kChunks;
        const std::int64_t hi = n * (c + 1) / kChunks;
        double s = 0;
        for (std::int64_t i = lo; i < hi; ++i) s += body(i);
        partial[c] = s;
    }
    double total = 0;
    for (int c = 0; c < kChunks; ++c) total += partial[c];
    return total;
}

inline bool cell_active(std::span<const std::uint8_t> mask, std::int64_t i) {
    return mask.empty() || mask[static_cast<std::size_t>(i)];
}

struct CellDiffs {
    double v[3];
    int axes[3];
    int count;
};

inline CellDiffs cell_diffs(const GridChart& chart, std::span<const double> u, VertexId x) {
    CellDiffs d;
    d.count = 0;
    for (int k = 0; k < chart.dimension; ++k) {
        const VertexId fwd = chart.neighbor(x, k, +1);
        if (fwd == kNoVertex) continue;
        d.v[d.count] = (u[fwd] - u[x]) / chart.spacing;
        d.axes[d.count] = k;
        ++d.count;
    }
    return d;
}

inline double cell_density(const CellDiffs& d, double mu, double p, double eps) {
    double s = eps;
    for (int j = 0; j < d.count; ++j) s += d.v[j] * d.v[j];
    if (s == 0.0) return 0.0;
    if (p == 2.0) return mu * s;
    return mu * std::pow(s, 0.5 * p);
}

} // namespace

// ---------------------------------------------------------------------------
// OpenMP kernels

namespace kernels {

double chart_energy(const MetricGraph& g, std::span<const double> u,
                    std::span<const std::uint8_t> cell_mask, double p, double eps) {
    const GridChart& chart = g.chart();
    return chunked_sum(static_cast<std::int64_t>(g.vertex_count()), [&](std::int64_t i) {
        if (!cell_active(cell_mask, i)) return 0.0;
        const VertexId x = static_cast<VertexId>(i);
        return cell_density(cell_diffs(chart, u, x), g.measure(x), p, eps);
    });
}

void chart_energy_gradient(const MetricGraph& g, std::span<const double> u,
                           std::span<const std::uint8_t> cell_mask, double p,
                           double eps, std::span<double> grad_out) {
    const GridChart& chart = g.chart();
    const int dim = chart.dimension;
    const std::int64_t n = static_cast<std::int64_t>(g.vertex_count());
    // Pass 1: per-cell weight W[x,k] = d(cell density at x)/d(u[x + e_k]).
    std::vector<double> w(static_cast<std::size_t>(n) * dim, 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        if (!cell_active(cell_mask, i)) continue;
        const VertexId x = static_cast<VertexId>(i);
        const CellDiffs d = cell_diffs(chart, u, x);
        double s = eps;
        for (int j = 0; j < d.count; ++j) s += d.v[j] * d.v[j];
        if (s == 0.0) continue;
        const double f = g.measure(x) * p *
                         (p == 2.0 ? 1.0 : std::pow(s, 0.5 * p - 1.0)) / chart.spacing;
        for (int j = 0; j < d.count; ++j) w[i * dim + d.axes[j]] = f * d.v[j];
    }
    // Pass 2: gather. grad[v] = -sum_k W[v,k] + sum_k W[v - e_k, k].
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const VertexId v = static_cast<VertexId>(i);
        double gsum = 0;
        for (int k = 0; k < dim; ++k) {
            gsum -= w[i * dim + k];
            const VertexId bwd = chart.neighbor(v, k, -1);
            if (bwd != kNoVertex) gsum += w[static_cast<std::int64_t>(bwd) * dim + k];
        }
        grad_out[static_cast<std::size_t>(i)] = gsum;
    }
}

double chart_pairing(const MetricGraph& g, std::span<const double> u,
                     std::span<const double> phi,
                     std::span<const std::uint8_t> cell_mask, double p) {
    const GridChart& chart = g.chart();
    return chunked_sum(static_cast<std::int64_t>(g.vertex_count()), [&](std::int64_t i) {
        if (!cell_active(cell_mask, i)) return 0.0;
        const VertexId x = static_cast<VertexId>(i);
        const CellDiffs du = cell_diffs(chart, u, x);
        const CellDiffs dphi = cell_diffs(chart, phi, x);
        double s = 0, dot = 0;
        for (int j = 0; j < du.count; ++j) {
            s += du.v[j] * du.v[j];
            dot += du.v[j] * dphi.v[j];
        }
        if (s == 0.0) return 0.0;
        const double f = (p == 2.0) ? 1.0 : std::pow(s, 0.5 * (p - 2.0));
        return g.measure(x) * f * dot;
    });
}

double edge_energy(const MetricGraph& g, std::span<const double> u,
                   std::span<const std::uint8_t> edge_mask, double p, double eps) {
    const auto& edges = g.edges();
    return chunked_sum(static_cast<std::int64_t>(edges.size()), [&](std::int64_t i) {
        if (!cell_active(edge_mask, i)) return 0.0;
        const auto& e = edges[static_cast<std::size_t>(i)];
        const double d = (u[e.b] - u[e.a]) / e.length;
        const double s = d * d + eps;
        if (s == 0.0) return 0.0;
        const double dens = (p == 2.0) ? s : std::pow(s, 0.5 * p);
        return e.conductance * e.length * dens;
    });
}

void edge_energy_gradient(const MetricGraph& g, std::span<const double> u,
                          std::span<const std::uint8_t> edge_mask, double p,
                          double eps, std::span<double> grad_out) {
    const auto& edges = g.edges();
    const std::int64_t m = static_cast<std::int64_t>(edges.size());
    std::vector<double> w(edges.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) {
        if (!cell_active(edge_mask, i)) continue;
        const auto& e = edges[static_cast<std::size_t>(i)];
        const double d = (u[e.b] - u[e.a]) / e.length;
        const double s = d * d + eps;
        if (s == 0.0) continue;
        w[static_cast<std::size_t>(i)] =
            e.conductance * p * (p == 2.0 ? 1.0 : std::pow(s, 0.5 * p - 1.0)) * d;
    }
    const std::int64_t n = static_cast<std::int64_t>(g.vertex_count());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const VertexId v = static_cast<VertexId>(i);
        double gsum = 0;
        for (std::uint32_t ei : g.incident_edges(v))
            gsum += (edges[ei].b == v) ? w[ei] : -w[ei];
        grad_out[static_cast<std::size_t>(i)] = gsum;
    }
}

double weighted_power_sum(const MetricGraph& g, std::span<const double> u,
                          const VertexSet& set, double p) {
    return chunked_sum(static_cast<std::int64_t>(set.size()), [&](std::int64_t i) {
        const VertexId v = set[static_cast<std::size_t>(i)];
        return std::pow(std::abs(u[v]), p) * g.measure(v);
    });
}

} // namespace kernels

// ---------------------------------------------------------------------------
// Serial reference

namespace refk {

double chart_energy(const MetricGraph& g, std::span<const double> u,
                    std::span<const std::uint8_t> cell_mask, double p, double eps) {
    const GridChart& chart = g.chart();
    double total = 0;
    for (VertexId x = 0; x < g.vertex_count(); ++x) {
        if (!cell_mask.empty() && !cell_mask[x]) continue;
        double s = eps;
        for (int k = 0; k < chart.dimension; ++k) {
            const VertexId fwd = chart.neighbor(x, k, +1);
            if (fwd == kNoVertex) continue;
            const double v = (u[fwd] - u[x]) / chart.spacing;
            s += v * v;
        }
        if (s > 0.0) total += g.measure(x) * std::pow(s, 0.5 * p);
    }
    return total;
}

void chart_energy_gradient(const MetricGraph& g, std::span<const double> u,
                           std::span<const std::uint8_t> cell_mask, double p,
                           double eps, std::span<double> grad_out) {
    const GridChart& chart = g.chart();
    std::fill(grad_out.begin(), grad_out.end(), 0.0);
    for (VertexId x = 0; x < g.vertex_count(); ++x) {
        if (!cell_mask.empty() && !cell_mask[x]) continue;
        double s = eps;
        double diffs[3];
        VertexId fwds[3];
        int count = 0;
        for (int k = 0; k < chart.dimension; ++k) {
            const VertexId fwd = chart.neighbor(x, k, +1);
            if (fwd == kNoVertex) continue;
            diffs[count] = (u[fwd] - u[x]) / chart.spacing;
            fwds[count] = fwd;
            s += diffs[count] * diffs[count];
            ++count;
        }
        if (s == 0.0) continue;
        const double f = g.measure(x) * p * std::pow(s, 0.5 * p - 1.0) / chart.spacing;
        for (int j = 0; j < count; ++j) {
            grad_out[fwds[j]] += f * diffs[j];
            grad_out[x] -= f * diffs[j];
        }
    }
}

double chart_pairing(const MetricGraph& g, std::span<const double> u,
                     std::span<const double> phi,
                     std::span<const std::uint8_t> cell_mask, double p) {
    const GridChart& chart = g.chart();
    double total = 0;
    for (VertexId x = 0; x < g.vertex_count(); ++x) {
        if (!cell_mask.empty() && !cell_mask[x]) continue;
        double s = 0, dot = 0;
        for (int k = 0; k < chart.dimension; ++k) {
            const VertexId fwd = chart.neighbor(x, k, +1);
            if (fwd == kNoVertex) continue;
            const double vu = (u[fwd] - u[x]) / chart.spacing;
            const double vp = (phi[fwd] - phi[x]) / chart.spacing;
            s += vu * vu;
            dot += vu * vp;
        }
        if (s == 0.0) continue;
        total += g.measure(x) * std::pow(s, 0.5 * (p - 2.0)) * dot;
    }
    return total;
}

double edge_energy(const MetricGraph& g, std::span<const double> u,
                   std::span<const std::uint8_t> edge_mask, double p, double eps) {
    double total = 0;
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
        if (!edge_mask.empty() && !edge_mask[i]) continue;
        const auto& e = g.edges()[i];
        const double d = (u[e.b] - u[e.a]) / e.length;
        const double s = d * d + eps;
        if (s > 0.0) total += e.conductance * e.length * std::pow(s, 0.5 * p);
    }
    return total;
}

void edge_energy_gradient(const MetricGraph& g, std::span<const double> u,
                          std::span<const std::uint8_t> edge_mask, double p,
                          double eps, std::span<double> grad_out) {
    std::fill(grad_out.begin(), grad_out.end(), 0.0);
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
        if (!edge_mask.empty() && !edge_mask[i]) continue;
        const auto& e = g.edges()[i];
        const double d = (u[e.b] - u[e.a]) / e.length;
        const double s = d * d + eps;
        if (s == 0.0) continue;
        const double w = e.conductance * p * std::pow(s, 0.5 * p - 1.0) * d;
        grad_out[e.b] += w;
        grad_out[e.a] -= w;
    }
}

double weighted_power_sum(const MetricGraph& g, std::span<const double> u,
                          const VertexSet& set, double p) {
    double total = 0;
    for (VertexId v : set) total += std::pow(std::abs(u[v]), p) * g.measure(v);
    return total;
}

} // namespace refk

} // namespace greenpot
