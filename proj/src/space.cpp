#include "greenpot/space.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>

#include "greenpot/util.hpp"

namespace greenpot {

bool set_contains(const VertexSet& s, VertexId v) {
    return std::binary_search(s.begin(), s.end(), v);
}

VertexSet set_sorted(VertexSet s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

// ---------------------------------------------------------------------------
// GridChart

std::array<int, 3> GridChart::lattice(VertexId v) const {
    std::array<int, 3> idx{0, 0, 0};
    std::int64_t rest = v;
    for (int k = 0; k < dimension; ++k) {
        idx[k] = static_cast<int>(rest % extents[k]);
        rest /= extents[k];
    }
    return idx;
}

VertexId GridChart::vertex_at(const std::array<int, 3>& idx) const {
    std::int64_t id = 0;
    std::int64_t stride = 1;
    for (int k = 0; k < dimension; ++k) {
        if (idx[k] < 0 || idx[k] >= extents[k]) return kNoVertex;
        id += idx[k] * stride;
        stride *= extents[k];
    }
    return static_cast<VertexId>(id);
}

std::array<double, 3> GridChart::coords(VertexId v) const {
    const auto idx = lattice(v);
    std::array<double, 3> c{0.0, 0.0, 0.0};
    for (int k = 0; k < dimension; ++k) c[k] = origin[k] + idx[k] * spacing;
    return c;
}

VertexId GridChart::neighbor(VertexId v, int axis, int dir) const {
    auto idx = lattice(v);
    idx[axis] += dir;
    return vertex_at(idx);
}

double GridChart::euclidean(VertexId a, VertexId b) const {
    const auto ia = lattice(a);
    const auto ib = lattice(b);
    double s = 0;
    for (int k = 0; k < dimension; ++k) {
        const double d = (ia[k] - ib[k]) * spacing;
        s += d * d;
    }
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// MetricGraph

MetricGraph::MetricGraph(std::size_t n_vertices, std::vector<Edge> edges,
                         std::vector<double> measures,
                         std::optional<GridChart> chart)
    : edges_(std::move(edges)), measure_(std::move(measures)),
      chart_(std::move(chart)) {
    if (measure_.size() != n_vertices)
        throw ParameterError("measure vector size does not match vertex count");
    for (std::size_t v = 0; v < n_vertices; ++v)
        if (!(measure_[v] > 0.0))
            throw ParameterError("vertex measure must be strictly positive (vertex " +
                                 std::to_string(v) + ")");
    for (const auto& e : edges_) {
        if (e.a >= n_vertices || e.b >= n_vertices || e.a == e.b)
            throw ParameterError("edge endpoints out of range");
        if (!(e.length > 0.0))
            throw ParameterError("edge length must be strictly positive");
        if (!(e.conductance > 0.0))
            throw ParameterError("edge conductance must be strictly positive");
    }
    for (double m : measure_) total_measure_ += m;

    adj_offsets_.assign(n_vertices + 1, 0);
    for (const auto& e : edges_) {
        ++adj_offsets_[e.a + 1];
        ++adj_offsets_[e.b + 1];
    }
    for (std::size_t v = 0; v < n_vertices; ++v) adj_offsets_[v + 1] += adj_offsets_[v];
    adj_edges_.resize(2 * edges_.size());
    std::vector<std::uint32_t> cursor(adj_offsets_.begin(), adj_offsets_.end() - 1);
    for (std::uint32_t ei = 0; ei < edges_.size(); ++ei) {
        adj_edges_[cursor[edges_[ei].a]++] = ei;
        adj_edges_[cursor[edges_[ei].b]++] = ei;
    }

    if (n_vertices > 0 && !is_connected())
        throw IllPosedError("graph is not connected");
}

MetricGraph::MetricGraph(MetricGraph&& other) noexcept
    : edges_(std::move(other.edges_)), measure_(std::move(other.measure_)),
      total_measure_(other.total_measure_), chart_(std::move(other.chart_)),
      adj_offsets_(std::move(other.adj_offsets_)),
      adj_edges_(std::move(other.adj_edges_)) {
    std::lock_guard<std::mutex> lock(other.cache_mutex_);
    dist_cache_ = std::move(other.dist_cache_);
}

MetricGraph& MetricGraph::operator=(MetricGraph&& other) noexcept {
    if (this == &other) return *this;
    edges_ = std::move(other.edges_);
    measure_ = std::move(other.measure_);
    total_measure_ = other.total_measure_;
    chart_ = std::move(other.chart_);
    adj_offsets_ = std::move(other.adj_offsets_);
    adj_edges_ = std::move(other.adj_edges_);
    std::scoped_lock lock(cache_mutex_, other.cache_mutex_);
    dist_cache_ = std::move(other.dist_cache_);
    return *this;
}

const GridChart& MetricGraph::chart() const {
    if (!chart_) throw ParameterError("operation requires a grid chart");
    return *chart_;
}

std::span<const std::uint32_t> MetricGraph::incident_edges(VertexId v) const {
    return {adj_edges_.data() + adj_offsets_[v],
            adj_edges_.data() + adj_offsets_[v + 1]};
}

VertexId MetricGraph::edge_other(std::uint32_t edge_id, VertexId v) const {
    const Edge& e = edges_[edge_id];
    return e.a == v ? e.b : e.a;
}

double MetricGraph::measure_of(const VertexSet& s) const {
    double m = 0;
    for (VertexId v : s) m += measure_[v];
    return m;
}

double MetricGraph::min_edge_length() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& e : edges_) m = std::min(m, e.length);
    return m;
}

double MetricGraph::default_band_width() const {
    return chart_ ? chart_->spacing : min_edge_length();
}

std::vector<double> MetricGraph::dijkstra(VertexId source) const {
    std::vector<double> dist(vertex_count(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v]) continue;
        for (std::uint32_t ei : incident_edges(v)) {
            const VertexId w = edge_other(ei, v);
            const double nd = d + edges_[ei].length;
            if (nd < dist[w]) {
                dist[w] = nd;
                heap.emplace(nd, w);
            }
        }
    }
    return dist;
}

std::shared_ptr<const std::vector<double>> MetricGraph::distances_from(VertexId source) const {
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = dist_cache_.find(source);
        if (it != dist_cache_.end()) return it->second;
    }
    auto dist = std::make_shared<const std::vector<double>>(dijkstra(source));
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto [it, inserted] = dist_cache_.emplace(source, dist);
    return it->second;
}

double MetricGraph::graph_distance(VertexId a, VertexId b) const {
    if (a == b) return 0.0;
    return (*distances_from(a))[b];
}

double MetricGraph::metric(VertexId a, VertexId b) const {
    if (chart_) return chart_->euclidean(a, b);
    return graph_distance(a, b);
}

namespace {

// Enumerate the lattice box of radius r around x0 and keep vertices passing
// `keep(distance)`. Avoids a full-graph scan for local chart queries.
template <class Keep>
VertexSet chart_ball_scan(const GridChart& c, VertexId x0, double r, Keep keep) {
    VertexSet out;
    const auto c0 = c.lattice(x0);
    const int reach = static_cast<int>(std::floor(r / c.spacing)) + 1;
    std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int k = 0; k < c.dimension; ++k) {
        lo[k] = std::max(0, c0[k] - reach);
        hi[k] = std::min(c.extents[k] - 1, c0[k] + reach);
        if (lo[k] > hi[k]) return out;
    }
    std::array<int, 3> idx = lo;
    while (true) {
        double s = 0;
        for (int k = 0; k < c.dimension; ++k) {
            const double d = (idx[k] - c0[k]) * c.spacing;
            s += d * d;
        }
        if (keep(std::sqrt(s))) out.push_back(c.vertex_at(idx));
        int k = 0;
        for (; k < c.dimension; ++k) {
            if (++idx[k] <= hi[k]) break;
            idx[k] = lo[k];
        }
        if (k == c.dimension) break;
    }
    return set_sorted(std::move(out));
}

} // namespace

VertexSet MetricGraph::ball(VertexId x0, double r) const {
    if (x0 >= vertex_count()) throw ParameterError("ball center out of range");
    if (chart_) return chart_ball_scan(*chart_, x0, r, [r](double d) { return d < r; });
    const auto& dist = *distances_from(x0);
    VertexSet out;
    for (VertexId v = 0; v < dist.size(); ++v)
        if (dist[v] < r) out.push_back(v);
    return out;
}

VertexSet MetricGraph::closed_ball(VertexId x0, double r) const {
    if (x0 >= vertex_count()) throw ParameterError("ball center out of range");
    if (chart_) return chart_ball_scan(*chart_, x0, r, [r](double d) { return d <= r; });
    const auto& dist = *distances_from(x0);
    VertexSet out;
    for (VertexId v = 0; v < dist.size(); ++v)
        if (dist[v] <= r) out.push_back(v);
    return out;
}

std::optional<VertexSet> MetricGraph::sphere_band(VertexId x0, double r, double width) const {
    if (x0 >= vertex_count()) throw ParameterError("band center out of range");
    if (!(r > 0.0)) throw ParameterError("band radius must be positive");
    const double w = width > 0.0 ? width : default_band_width();
    const double lo = r - 0.5 * w, hi = r + 0.5 * w;
    VertexSet out;
    if (chart_) {
        out = chart_ball_scan(*chart_, x0, hi,
                              [lo, hi](double d) { return d >= lo && d < hi; });
    } else {
        const auto& dist = *distances_from(x0);
        for (VertexId v = 0; v < dist.size(); ++v)
            if (dist[v] >= lo && dist[v] < hi) out.push_back(v);
    }
    if (out.empty()) return std::nullopt;
    return out;
}

double MetricGraph::set_distance(const VertexSet& e, const VertexSet& f) const {
    if (e.empty() || f.empty()) throw ParameterError("set_distance on empty set");
    // multi-source Dijkstra from e
    std::vector<double> dist(vertex_count(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (VertexId v : e) {
        dist[v] = 0.0;
        heap.emplace(0.0, v);
    }
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v]) continue;
        for (std::uint32_t ei : incident_edges(v)) {
            const VertexId w = edge_other(ei, v);
            const double nd = d + edges_[ei].length;
            if (nd < dist[w]) {
                dist[w] = nd;
                heap.emplace(nd, w);
            }
        }
    }
    double best = std::numeric_limits<double>::infinity();
    for (VertexId v : f) best = std::min(best, dist[v]);
    return best;
}

double MetricGraph::set_diameter(const VertexSet& s) const {
    double diam = 0;
    for (VertexId v : s) {
        const auto& dist = *distances_from(v);
        for (VertexId w : s) diam = std::max(diam, dist[w]);
    }
    return diam;
}

bool MetricGraph::is_connected() const {
    if (vertex_count() == 0) return true;
    std::vector<std::uint8_t> seen(vertex_count(), 0);
    std::vector<VertexId> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        const VertexId v = stack.back();
        stack.pop_back();
        for (std::uint32_t ei : incident_edges(v)) {
            const VertexId w = edge_other(ei, v);
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                stack.push_back(w);
            }
        }
    }
    return count == vertex_count();
}

// ---------------------------------------------------------------------------
// Text format:
//   vertices N edges M dim D spacing H
//   v <id> <measure> [<coords>...]
//   e <id1> <id2> <length> <conductance>

void MetricGraph::write_text(std::ostream& os) const {
    const int dim = chart_ ? chart_->dimension : 0;
    os << "vertices " << vertex_count() << " edges " << edge_count()
       << " dim " << dim << " spacing "
       << format_double(chart_ ? chart_->spacing : 0.0) << "\n";
    for (VertexId v = 0; v < vertex_count(); ++v) {
        os << "v " << v << " " << format_double(measure_[v]);
        if (chart_) {
            const auto c = chart_->coords(v);
            for (int k = 0; k < dim; ++k) os << " " << format_double(c[k]);
        }
        os << "\n";
    }
    for (const auto& e : edges_) {
        os << "e " << e.a << " " << e.b << " " << format_double(e.length)
           << " " << format_double(e.conductance) << "\n";
    }
}

MetricGraph MetricGraph::read_text(std::istream& is) {
    std::string tok;
    std::size_t n = 0, m = 0;
    int dim = 0;
    double spacing = 0;
    is >> tok;
    if (tok != "vertices") throw ParameterError("graph file: expected 'vertices' header");
    is >> n >> tok;
    if (tok != "edges") throw ParameterError("graph file: expected 'edges' in header");
    is >> m >> tok;
    if (tok != "dim") throw ParameterError("graph file: expected 'dim' in header");
    is >> dim >> tok;
    if (tok != "spacing") throw ParameterError("graph file: expected 'spacing' in header");
    is >> spacing;
    if (!is) throw ParameterError("graph file: malformed header");

    std::vector<double> measures(n, 0.0);
    std::vector<std::array<double, 3>> coords(dim > 0 ? n : 0);
    std::vector<Edge> edges;
    edges.reserve(m);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t id;
        is >> tok >> id;
        if (!is || tok != "v" || id >= n)
            throw ParameterError("graph file: bad vertex line " + std::to_string(i));
        is >> measures[id];
        for (int k = 0; k < dim; ++k) is >> coords[id][k];
    }
    for (std::size_t i = 0; i < m; ++i) {
        Edge e{};
        std::size_t a, b;
        is >> tok >> a >> b >> e.length >> e.conductance;
        if (!is || tok != "e" || a >= n || b >= n)
            throw ParameterError("graph file: bad edge line " + std::to_string(i));
        e.a = static_cast<VertexId>(a);
        e.b = static_cast<VertexId>(b);
        edges.push_back(e);
    }

    std::optional<GridChart> chart;
    if (dim > 0) {
        // Rebuild the chart from coordinates: vertices must fill an
        // axis-aligned lattice box in id-major order.
        GridChart c;
        c.dimension = dim;
        c.spacing = spacing;
        std::array<double, 3> lo{0, 0, 0}, hi{0, 0, 0};
        for (int k = 0; k < dim; ++k) {
            lo[k] = hi[k] = coords[0][k];
            for (std::size_t v = 1; v < n; ++v) {
                lo[k] = std::min(lo[k], coords[v][k]);
                hi[k] = std::max(hi[k], coords[v][k]);
            }
            c.origin[k] = lo[k];
            c.extents[k] = static_cast<int>(std::llround((hi[k] - lo[k]) / spacing)) + 1;
        }
        if (static_cast<std::size_t>(c.vertex_count()) == n) {
            bool ok = true;
            for (std::size_t v = 0; v < n && ok; ++v) {
                const auto cc = c.coords(static_cast<VertexId>(v));
                for (int k = 0; k < dim; ++k)
                    if (std::abs(cc[k] - coords[v][k]) > 1e-9 * spacing) ok = false;
            }
            if (ok) chart = c;
        }
        if (!chart)
            throw ParameterError("graph file: coordinates do not form a full lattice box");
    }
    return MetricGraph(n, std::move(edges), std::move(measures), std::move(chart));
}

// ---------------------------------------------------------------------------

MetricGraph build_grid(int dimension, int side, double spacing) {
    if (dimension < 1 || dimension > 3)
        throw ParameterError("build_grid: dimension must be 1, 2 or 3 (got " +
                             std::to_string(dimension) + ")");
    if (side < 2)
        throw ParameterError("build_grid: side must be at least 2 (got " +
                             std::to_string(side) + ")");
    if (!(spacing > 0.0))
        throw ParameterError("build_grid: spacing must be positive");

    GridChart chart;
    chart.dimension = dimension;
    chart.spacing = spacing;
    for (int k = 0; k < dimension; ++k) chart.extents[k] = side;

    const std::int64_t n = chart.vertex_count();
    const double measure = std::pow(spacing, dimension);
    const double conductance = std::pow(spacing, dimension - 1);

    std::vector<MetricGraph::Edge> edges;
    edges.reserve(static_cast<std::size_t>(n) * dimension);
    for (std::int64_t v = 0; v < n; ++v) {
        for (int k = 0; k < dimension; ++k) {
            const VertexId w = chart.neighbor(static_cast<VertexId>(v), k, +1);
            if (w != kNoVertex)
                edges.push_back({static_cast<VertexId>(v), w, spacing, conductance});
        }
    }
    return MetricGraph(static_cast<std::size_t>(n), std::move(edges),
                       std::vector<double>(static_cast<std::size_t>(n), measure),
                       chart);
}

// ---------------------------------------------------------------------------

RegularityReport estimate_regularity(const MetricGraph& g, VertexId x0,
                                     std::span<const double> radii, double p,
                                     std::uint64_t seed) {
    if (radii.size() < 2)
        throw ParameterError("estimate_regularity: need at least 2 radii for the fit");
    for (std::size_t i = 0; i + 1 < radii.size(); ++i)
        if (!(radii[i] > 0.0) || !(radii[i] < radii[i + 1]))
            throw ParameterError("estimate_regularity: radii must be positive and increasing");

    RegularityReport rep;
    Rng rng(seed);

    // Sample centers: x0 plus a few random vertices.
    std::vector<VertexId> centers{x0};
    for (int i = 0; i < 8; ++i)
        centers.push_back(static_cast<VertexId>(rng.below(g.vertex_count())));

    rep.doubling_estimate = 1.0;
    for (VertexId c : centers) {
        for (double r : radii) {
            const double m1 = g.measure_of(g.ball(c, r));
            const double m2 = g.measure_of(g.ball(c, 2 * r));
            if (m1 > 0) rep.doubling_estimate = std::max(rep.doubling_estimate, m2 / m1);
        }
    }

    std::vector<double> logr, logm;
    for (double r : radii) {
        const double m = g.measure_of(g.ball(x0, r));
        if (m > 0) {
            logr.push_back(std::log(r));
            logm.push_back(std::log(m));
        }
    }
    if (logr.size() < 2)
        throw ParameterError("estimate_regularity: too few nonempty balls for the fit");
    const LinearFit fit = fit_line(logr, logm);
    rep.ahlfors_q = fit.slope;
    rep.ahlfors_residual = fit.rms_residual;

    rep.pointwise_q = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < logr.size(); ++i)
        rep.pointwise_q = std::min(rep.pointwise_q,
                                   (logm[i + 1] - logm[i]) / (logr[i + 1] - logr[i]));

    // Poincare ratio samples need the chart gradient as the upper gradient.
    if (g.has_chart()) {
        const GridChart& chart = g.chart();
        const int dim = chart.dimension;

        auto chart_grad_norm = [&](const std::vector<double>& u, VertexId v) {
            double s = 0;
            for (int k = 0; k < dim; ++k) {
                VertexId fwd = chart.neighbor(v, k, +1);
                double diff;
                if (fwd != kNoVertex) {
                    diff = u[fwd] - u[v];
                } else {
                    const VertexId bwd = chart.neighbor(v, k, -1);
                    diff = u[v] - u[bwd];
                }
                const double q = diff / chart.spacing;
                s += q * q;
            }
            return std::sqrt(s);
        };

        std::vector<std::vector<double>> fields;
        for (int k = 0; k < dim; ++k) {
            std::vector<double> u(g.vertex_count());
            for (VertexId v = 0; v < g.vertex_count(); ++v) u[v] = chart.coords(v)[k];
            fields.push_back(std::move(u));
        }
        for (int f = 0; f < 3; ++f) {
            std::vector<double> u(g.vertex_count());
            std::array<double, 3> freq{}, phase{}, amp{};
            for (int k = 0; k < dim; ++k) {
                freq[k] = rng.uniform(0.5, 3.0);
                phase[k] = rng.uniform(0.0, 6.28);
                amp[k] = rng.uniform(0.5, 1.5);
            }
            for (VertexId v = 0; v < g.vertex_count(); ++v) {
                const auto c = chart.coords(v);
                double val = 0;
                for (int k = 0; k < dim; ++k) val += amp[k] * std::sin(freq[k] * c[k] + phase[k]);
                u[v] = val;
            }
            fields.push_back(std::move(u));
        }

        for (const auto& u : fields) {
            for (double r : radii) {
                const VertexSet b = g.ball(x0, r);
                const double mb = g.measure_of(b);
                if (mb <= 0) continue;
                double mean = 0;
                for (VertexId v : b) mean += u[v] * g.measure(v);
                mean /= mb;
                double osc = 0, gpow = 0;
                for (VertexId v : b) {
                    osc += std::abs(u[v] - mean) * g.measure(v);
                    gpow += std::pow(chart_grad_norm(u, v), p) * g.measure(v);
                }
                PoincareSample s;
                s.center = x0;
                s.radius = r;
                s.lhs = osc / mb;
                s.rhs = 2 * r * std::pow(gpow / mb, 1.0 / p);
                rep.poincare_samples.push_back(s);
                if (s.rhs > 0)
                    rep.poincare_constant = std::max(rep.poincare_constant, s.lhs / s.rhs);
            }
        }
    }

    return rep;
}

} // namespace greenpot
