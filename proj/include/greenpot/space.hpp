#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "greenpot/errors.hpp"

namespace greenpot {

using VertexId = std::uint32_t;

/// Sorted, duplicate-free list of vertex ids.
using VertexSet = std::vector<VertexId>;

inline constexpr VertexId kNoVertex = static_cast<VertexId>(-1);

bool set_contains(const VertexSet& s, VertexId v);
VertexSet set_sorted(VertexSet s);

/// Single rectangular coordinate patch over a lattice graph.
///
/// Vertex ids map bijectively onto an axis-aligned box of lattice points
/// with uniform spacing; world coordinates are `origin + index * spacing`.
struct GridChart {
    int dimension = 0;
    double spacing = 0.0;
    std::array<int, 3> extents{1, 1, 1};
    std::array<double, 3> origin{0.0, 0.0, 0.0};

    std::int64_t vertex_count() const {
        std::int64_t n = 1;
        for (int k = 0; k < dimension; ++k) n *= extents[k];
        return n;
    }

    std::array<int, 3> lattice(VertexId v) const;
    VertexId vertex_at(const std::array<int, 3>& idx) const; // kNoVertex if outside
    std::array<double, 3> coords(VertexId v) const;

    /// Lattice neighbor along `axis` in direction `dir` (+1/-1), kNoVertex at the box edge.
    VertexId neighbor(VertexId v, int axis, int dir) const;

    double euclidean(VertexId a, VertexId b) const;
};

/// Finite weighted graph playing the role of a metric measure space.
///
/// Immutable after construction; all queries are read-only and safe to run
/// concurrently. Shortest-path distances are cached per queried source
/// behind an internal lock.
class MetricGraph {
public:
    struct Edge {
        VertexId a;
        VertexId b;
        double length;
        double conductance;
    };

    MetricGraph(std::size_t n_vertices, std::vector<Edge> edges,
                std::vector<double> measures,
                std::optional<GridChart> chart = std::nullopt);

    // movable (the distance-cache lock is per-instance), not copyable
    MetricGraph(MetricGraph&& other) noexcept;
    MetricGraph& operator=(MetricGraph&& other) noexcept;
    MetricGraph(const MetricGraph&) = delete;
    MetricGraph& operator=(const MetricGraph&) = delete;

    std::size_t vertex_count() const { return measure_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    double measure(VertexId v) const { return measure_[v]; }
    const std::vector<double>& measures() const { return measure_; }
    double total_measure() const { return total_measure_; }
    double measure_of(const VertexSet& s) const;

    bool has_chart() const { return chart_.has_value(); }
    const GridChart& chart() const;

    /// Incident edge ids of `v`.
    std::span<const std::uint32_t> incident_edges(VertexId v) const;
    VertexId edge_other(std::uint32_t edge_id, VertexId v) const;

    /// Metric of the underlying space: Euclidean chart distance when a chart
    /// is present, shortest-path distance otherwise.
    double metric(VertexId a, VertexId b) const;

    /// Shortest-path distance along edges, regardless of chart.
    double graph_distance(VertexId a, VertexId b) const;

    /// All shortest-path distances from `source` (cached).
    std::shared_ptr<const std::vector<double>> distances_from(VertexId source) const;

    /// Open metric ball {y : metric(x0, y) < r}.
    VertexSet ball(VertexId x0, double r) const;

    /// Closed metric ball {y : metric(x0, y) <= r}.
    VertexSet closed_ball(VertexId x0, double r) const;

    /// Band {y : r - w/2 <= metric(x0, y) < r + w/2} standing in for the
    /// sphere of radius r. Default width: chart spacing if a chart is
    /// present, else the minimum edge length. Empty band -> nullopt.
    std::optional<VertexSet> sphere_band(VertexId x0, double r, double width = 0.0) const;

    double default_band_width() const;
    double min_edge_length() const;

    /// Distance between vertex sets / metric diameter of a set, both in the
    /// graph (shortest-path) metric.
    double set_distance(const VertexSet& e, const VertexSet& f) const;
    double set_diameter(const VertexSet& s) const;

    bool is_connected() const;

    void write_text(std::ostream& os) const;
    static MetricGraph read_text(std::istream& is);

private:
    std::vector<Edge> edges_;
    std::vector<double> measure_;
    double total_measure_ = 0.0;
    std::optional<GridChart> chart_;
    std::vector<std::uint32_t> adj_offsets_;
    std::vector<std::uint32_t> adj_edges_;

    mutable std::mutex cache_mutex_;
    mutable std::unordered_map<VertexId, std::shared_ptr<const std::vector<double>>> dist_cache_;

    std::vector<double> dijkstra(VertexId source) const;
};

/// Axis-aligned lattice on side^dimension vertices: edge length = spacing,
/// conductance = spacing^(dimension-1) (so the quadratic chart energy equals
/// the five-point finite-difference Dirichlet form), vertex measure =
/// spacing^dimension, chart attached.
MetricGraph build_grid(int dimension, int side, double spacing);

struct PoincareSample {
    VertexId center;
    double radius;
    double lhs; // mean oscillation of the test field on the ball
    double rhs; // diam(B) * (mean p-power of the chart gradient)^(1/p), dilation fixed at 1
};

struct RegularityReport {
    double doubling_estimate = 1.0;       // max mu(2B)/mu(B) over samples
    double ahlfors_q = 0.0;               // least-squares slope of log mu(B(x0,r)) vs log r
    double ahlfors_residual = 0.0;        // rms residual of that fit
    double pointwise_q = 0.0;             // min consecutive-scale slope at x0
    std::vector<PoincareSample> poincare_samples;
    double poincare_constant = 0.0;       // max lhs/rhs over samples
};

/// Measured regularity constants of the space around x0. Radii must be
/// increasing with at least two entries.
RegularityReport estimate_regularity(const MetricGraph& g, VertexId x0,
                                     std::span<const double> radii, double p,
                                     std::uint64_t seed = 1);

} // namespace greenpot
