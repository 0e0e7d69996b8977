#include <doctest.h>

#include <cmath>
#include <sstream>

#include "greenpot/space.hpp"
#include "greenpot/util.hpp"

using namespace greenpot;

TEST_SUITE("space") {

TEST_CASE("smallest path grid") {
    const MetricGraph g = build_grid(1, 3, 0.5);
    CHECK(g.vertex_count() == 3);
    CHECK(g.edge_count() == 2);
    for (const auto& e : g.edges()) CHECK(e.length == 0.5);
    for (VertexId v = 0; v < 3; ++v) CHECK(g.measure(v) == 0.5);
}

TEST_CASE("3x3 grid counting") {
    const MetricGraph g = build_grid(2, 3, 1.0);
    CHECK(g.vertex_count() == 9);
    CHECK(g.edge_count() == 12);
    CHECK(g.total_measure() == doctest::Approx(9.0));
}

TEST_CASE("construction errors name the parameter") {
    CHECK_THROWS_WITH_AS(build_grid(4, 3, 1.0), doctest::Contains("dimension"), ParameterError);
    CHECK_THROWS_WITH_AS(build_grid(2, 1, 1.0), doctest::Contains("side"), ParameterError);
    CHECK_THROWS_AS(build_grid(2, 5, 0.0), ParameterError);
}

TEST_CASE("1d balls") {
    const MetricGraph g = build_grid(1, 9, 1.0);
    const VertexId mid = 4;
    CHECK(g.ball(mid, 1.5) == VertexSet{3, 4, 5});
    CHECK(g.ball(mid, 0.5) == VertexSet{mid});
}

TEST_CASE("2d ball vertex count by direct enumeration") {
    const double h = 0.25;
    const MetricGraph g = build_grid(2, 11, h);
    const VertexId center = g.chart().vertex_at({5, 5, 0});
    // independent oracle: enumerate lattice offsets with Euclidean norm < 2.5h
    int count = 0;
    for (int i = -3; i <= 3; ++i)
        for (int j = -3; j <= 3; ++j)
            if (i * i + j * j < 2.5 * 2.5) ++count;
    CHECK(count == 21);
    CHECK(g.ball(center, 2.5 * h).size() == static_cast<std::size_t>(count));
}

TEST_CASE("fine grid disk measure approximates the area") {
    const int n = 129;
    const double h = 1.0 / 128.0;
    const MetricGraph g = build_grid(2, n, h);
    const VertexId center = g.chart().vertex_at({64, 64, 0});
    const double r = 0.25;
    // oracle: direct lattice-point count
    long hits = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double dx = (i - 64) * h, dy = (j - 64) * h;
            if (std::sqrt(dx * dx + dy * dy) < r) ++hits;
        }
    const double measured = g.measure_of(g.ball(center, r));
    CHECK(measured == doctest::Approx(hits * h * h));
    CHECK(measured == doctest::Approx(M_PI * r * r).epsilon(0.05));
}

TEST_CASE("sphere bands") {
    const MetricGraph g = build_grid(2, 9, 1.0);
    const VertexId c = g.chart().vertex_at({4, 4, 0});
    SUBCASE("narrow unit sphere band is the four axis neighbors") {
        const auto band = g.sphere_band(c, 1.0, 0.5);
        REQUIRE(band.has_value());
        CHECK(band->size() == 4);
        for (VertexId v : *band) CHECK(g.metric(c, v) == 1.0);
    }
    SUBCASE("default-width band keeps members inside the stated interval") {
        const auto band = g.sphere_band(c, 1.0);
        REQUIRE(band.has_value());
        for (VertexId v : *band) {
            CHECK(g.metric(c, v) >= 0.5);
            CHECK(g.metric(c, v) < 1.5);
        }
        // the four axis neighbors are always in
        CHECK(band->size() >= 4);
    }
    SUBCASE("gap radius with a narrow band is signaled empty") {
        const auto band = g.sphere_band(c, 1.2, 0.1);
        CHECK(!band.has_value());
    }
    SUBCASE("1d band at 3h") {
        const MetricGraph path = build_grid(1, 11, 1.0);
        const auto band = path.sphere_band(5, 3.0);
        REQUIRE(band.has_value());
        CHECK(*band == VertexSet{2, 8});
    }
}

TEST_CASE("ball monotonicity and measure growth") {
    const MetricGraph g = build_grid(2, 33, 1.0 / 32.0);
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const VertexId x0 = static_cast<VertexId>(rng.below(g.vertex_count()));
        const double r1 = rng.uniform(0.01, 0.5);
        const double r2 = r1 + rng.uniform(0.0, 0.5);
        const auto b1 = g.ball(x0, r1);
        const auto b2 = g.ball(x0, r2);
        CHECK(std::includes(b2.begin(), b2.end(), b1.begin(), b1.end()));
        CHECK(g.measure_of(b1) <= g.measure_of(b2));
        CHECK(g.measure_of(b1) > 0);
    }
}

TEST_CASE("metric axioms on a general graph, exact shortest-path arithmetic") {
    // random connected graph with dyadic edge lengths: float sums are exact
    Rng rng(5);
    const std::size_t n = 40;
    std::vector<MetricGraph::Edge> edges;
    for (VertexId v = 1; v < n; ++v) {
        const VertexId parent = static_cast<VertexId>(rng.below(v));
        edges.push_back({parent, v, static_cast<double>(1 + rng.below(16)) / 16.0, 1.0});
    }
    for (int extra = 0; extra < 30; ++extra) {
        const VertexId a = static_cast<VertexId>(rng.below(n));
        const VertexId b = static_cast<VertexId>(rng.below(n));
        if (a != b)
            edges.push_back({a, b, static_cast<double>(1 + rng.below(16)) / 16.0, 1.0});
    }
    const MetricGraph g(n, edges, std::vector<double>(n, 1.0));
    for (int trial = 0; trial < 1000; ++trial) {
        const VertexId x = static_cast<VertexId>(rng.below(n));
        const VertexId y = static_cast<VertexId>(rng.below(n));
        const VertexId z = static_cast<VertexId>(rng.below(n));
        CHECK(g.metric(x, x) == 0.0);
        CHECK(g.metric(x, y) == g.metric(y, x));
        CHECK(g.metric(x, z) <= g.metric(x, y) + g.metric(y, z));
    }
}

TEST_CASE("chart-adjacent vertices sit at exactly one spacing") {
    const MetricGraph g = build_grid(2, 17, 1.0 / 16.0);
    for (const auto& e : g.edges()) CHECK(g.metric(e.a, e.b) == 1.0 / 16.0);
}

TEST_CASE("disconnected graph is rejected") {
    std::vector<MetricGraph::Edge> edges{{0, 1, 1.0, 1.0}};
    CHECK_THROWS_AS(MetricGraph(4, edges, std::vector<double>(4, 1.0)), IllPosedError);
}

TEST_CASE("regularity estimates on grids") {
    SUBCASE("2d Ahlfors fit near 2, doubling at most 5") {
        const MetricGraph g = build_grid(2, 129, 1.0 / 128.0);
        const VertexId c = g.chart().vertex_at({64, 64, 0});
        const double h = 1.0 / 128.0;
        std::vector<double> radii{8 * h, 16 * h, 32 * h, 64 * h};
        const RegularityReport rep = estimate_regularity(g, c, radii, 2.0);
        CHECK(rep.ahlfors_q > 1.9);
        CHECK(rep.ahlfors_q < 2.1);
        CHECK(rep.doubling_estimate <= 5.0);
        CHECK(rep.doubling_estimate >= 1.0);
        CHECK(!rep.poincare_samples.empty());
        for (const auto& s : rep.poincare_samples)
            CHECK(s.lhs <= rep.poincare_constant * s.rhs + 1e-12);
    }
    SUBCASE("1d fit near 1") {
        const MetricGraph g = build_grid(1, 257, 1.0 / 256.0);
        const double h = 1.0 / 256.0;
        std::vector<double> radii{8 * h, 16 * h, 32 * h, 64 * h};
        const RegularityReport rep = estimate_regularity(g, 128, radii, 2.0);
        CHECK(rep.ahlfors_q > 0.95);
        CHECK(rep.ahlfors_q < 1.05);
    }
    SUBCASE("fewer than two radii is a fit error") {
        const MetricGraph g = build_grid(1, 9, 1.0);
        std::vector<double> radii{1.0};
        CHECK_THROWS_AS(estimate_regularity(g, 4, radii, 2.0), ParameterError);
    }
}

TEST_CASE("graph text round trip") {
    const MetricGraph g = build_grid(2, 5, 1.0 / 3.0);
    std::stringstream ss;
    g.write_text(ss);
    const MetricGraph back = MetricGraph::read_text(ss);
    REQUIRE(back.vertex_count() == g.vertex_count());
    REQUIRE(back.edge_count() == g.edge_count());
    CHECK(back.has_chart());
    CHECK(back.chart().spacing == g.chart().spacing);
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        CHECK(back.measure(v) == g.measure(v));
        CHECK(back.chart().coords(v) == g.chart().coords(v));
    }
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
        CHECK(back.edges()[i].length == g.edges()[i].length);
        CHECK(back.edges()[i].conductance == g.edges()[i].conductance);
    }
}

} // TEST_SUITE
