#include <doctest.h>

#include <cmath>

#include "greenpot/green.hpp"
#include "greenpot/util.hpp"

using namespace greenpot;

namespace {

struct Domain {
    MetricGraph graph;
    VertexSet omega;
    VertexId center;
};

Domain interior_domain(int dim, int side, double spacing) {
    MetricGraph g = build_grid(dim, side, spacing);
    VertexSet omega;
    const GridChart& chart = g.chart();
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        const auto idx = chart.lattice(v);
        bool interior = true;
        for (int k = 0; k < dim; ++k)
            if (idx[k] == 0 || idx[k] == chart.extents[k] - 1) interior = false;
        if (interior) omega.push_back(v);
    }
    std::array<int, 3> mid{};
    for (int k = 0; k < dim; ++k) mid[k] = (side - 1) / 2;
    const VertexId center = g.chart().vertex_at(mid);
    return {std::move(g), std::move(omega), center};
}

} // namespace

TEST_SUITE("green") {

TEST_CASE("1d tent: construction, normalization, pairing") {
    const int n = 101;
    Domain d = interior_domain(1, n, 1.0 / (n - 1));
    SolverConfig cfg;
    GreenResult gr = green_compact(d.graph, d.omega, d.center, cfg, 7);

    SUBCASE("field is min(x, 1-x)/2 and the pole value is 1/4") {
        for (VertexId v = 0; v < d.graph.vertex_count(); ++v) {
            const double x = d.graph.chart().coords(v)[0];
            CHECK(gr.field.at(v) == doctest::Approx(std::min(x, 1 - x) / 2).epsilon(1e-8));
        }
        CHECK(gr.pole_value == doctest::Approx(0.25).epsilon(1e-8));
        CHECK(gr.lambda == doctest::Approx(1.0).epsilon(1e-6));
    }

    SUBCASE("defining conditions validate") {
        std::vector<std::pair<double, double>> samples{{0.05, 0.15}, {0.1, 0.2}, {0.05, 0.2}};
        const Report rep = validate_green(gr, samples, cfg);
        for (const auto& row : rep.rows) {
            CAPTURE(row.quantity);
            CHECK(row.pass);
        }
        for (const auto& row : rep.rows)
            if (row.quantity == "levelset_capacity_gap") CHECK(row.value <= 1e-6);
        // the level-capacity value itself: (b-a)^(-1) = 10 at (0.05, 0.15)
        const LevelGap lg = green_level_capacity(gr, 0.05, 0.15, cfg);
        CHECK(lg.gap <= 1e-9);
    }

    SUBCASE("pairing constant is exactly one") {
        std::vector<double> radii{0.1, 0.2, 0.3};
        const FundamentalConstant fc = fundamental_constant(gr, radii);
        CHECK(fc.k == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(fc.spread <= 1e-6);
        CHECK(gr.k_constant == fc.k);
    }

    SUBCASE("scaling the pairing input scales the constant by lambda^(p-1)") {
        GreenResult scaled = gr;
        for (double& v : scaled.field.values) v *= 1.7;
        std::vector<double> radii{0.2};
        const FundamentalConstant fc = fundamental_constant(scaled, radii);
        CHECK(fc.k == doctest::Approx(1.7).epsilon(1e-6)); // p = 2: lambda^(p-1) = 1.7
    }

    SUBCASE("normalization is idempotent and scale equivariant") {
        GreenResult again = normalize_green(gr.field, d.omega, d.center, 2.0, cfg);
        CHECK(again.lambda == doctest::Approx(1.0).epsilon(1e-12));

        ScalarField scaled = gr.field;
        for (double& v : scaled.values) v *= 10.0;
        GreenResult from_scaled = normalize_green(scaled, d.omega, d.center, 2.0, cfg);
        for (VertexId v = 0; v < d.graph.vertex_count(); ++v)
            CHECK(from_scaled.field.at(v) == doctest::Approx(gr.field.at(v)).epsilon(1e-8));
    }

    SUBCASE("unit tent normalizes with lambda one half") {
        ScalarField tent(d.graph);
        for (VertexId v = 0; v < d.graph.vertex_count(); ++v) {
            const double x = d.graph.chart().coords(v)[0];
            tent.values[v] = std::min(x, 1 - x);
        }
        const GreenResult unit = normalize_green(tent, d.omega, d.center, 2.0, cfg);
        CHECK(unit.lambda == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(unit.pole_value == doctest::Approx(0.25).epsilon(1e-10));
    }

    SUBCASE("trace stabilizes and the envelope is monotone") {
        REQUIRE(gr.trace.size() == 7);
        CHECK(gr.trace.back().sup_change == 0.0); // plate reached the pole alone
        for (std::size_t i = 0; i + 1 < gr.profile.size(); ++i)
            CHECK(gr.profile[i].max_value >=
                  gr.profile[i + 1].max_value - d.graph.default_band_width());
        for (VertexId v : d.omega) CHECK(gr.field.at(v) >= -1e-10);
    }

    SUBCASE("exterior is exactly zero") {
        for (VertexId v = 0; v < d.graph.vertex_count(); ++v)
            if (!set_contains(d.omega, v)) CHECK(gr.field.at(v) == 0.0);
    }
}

TEST_CASE("1d difference bound between stabilized schedules") {
    const int n = 101;
    Domain d = interior_domain(1, n, 1.0 / (n - 1));
    SolverConfig cfg;
    const GreenResult a = green_compact(d.graph, d.omega, d.center, cfg, 7);
    const GreenResult b = green_compact(d.graph, d.omega, d.center, cfg, 9);
    const DifferenceBound db = green_difference_bound(a, b);
    CHECK(db.matched);
    CHECK(db.sup_difference <= 1e-10);
}

TEST_CASE("construction errors") {
    const int n = 33;
    Domain d = interior_domain(1, n, 1.0 / (n - 1));
    SolverConfig cfg;
    SUBCASE("pole outside omega") {
        CHECK_THROWS_AS(green_compact(d.graph, d.omega, 0, cfg, 3), ParameterError);
    }
    SUBCASE("omega without exterior") {
        VertexSet all;
        for (VertexId v = 0; v < d.graph.vertex_count(); ++v) all.push_back(v);
        CHECK_THROWS_AS(green_compact(d.graph, all, d.center, cfg, 3), IllPosedError);
    }
    SUBCASE("oversized scale") {
        CHECK_THROWS_AS(green_compact(d.graph, d.omega, d.center, cfg, 3, 10.0),
                        ParameterError);
    }
}

TEST_CASE("2d compact construction at the conformal exponent") {
    const int n = 129;
    const double h = 1.0 / (n - 1);
    Domain d = interior_domain(2, n, h);
    SolverConfig cfg;
    GreenResult gr = green_compact(d.graph, d.omega, d.center, cfg, 8);

    SUBCASE("log slope matches 1/(2 pi) within 5 percent") {
        std::vector<double> xs, ys;
        for (const auto& e : gr.profile) {
            if (e.r < 8 * h || e.r > 0.25) continue;
            xs.push_back(std::log(1.0 / e.r));
            ys.push_back(0.5 * (e.min_value + e.max_value));
        }
        REQUIRE(xs.size() >= 4);
        const LinearFit fit = fit_line(xs, ys);
        CHECK(fit.slope == doctest::Approx(1.0 / (2 * M_PI)).epsilon(0.05));
    }

    SUBCASE("level capacities, pairing constant and validation") {
        // mid-range levels: both contours stay inside radii [8h, 0.3]
        auto level_at = [&](double r) {
            double best = 1e300, val = 0;
            for (const auto& e : gr.profile)
                if (std::abs(e.r - r) < best) {
                    best = std::abs(e.r - r);
                    val = 0.5 * (e.min_value + e.max_value);
                }
            return val;
        };
        const double lo = level_at(0.3), hi = level_at(8 * h);
        std::vector<std::pair<double, double>> samples;
        samples.emplace_back(lo, hi);
        samples.emplace_back(lo + 0.1 * (hi - lo), lo + 0.8 * (hi - lo));
        samples.emplace_back(lo + 0.2 * (hi - lo), lo + 0.95 * (hi - lo));
        GreenValidationTols tols;
        tols.levelset_tol = 0.02;
        const Report rep = validate_green(gr, samples, cfg, tols);
        for (const auto& row : rep.rows) {
            CAPTURE(row.quantity);
            CAPTURE(row.value);
            CHECK(row.pass);
        }

        std::vector<double> radii{0.1, 0.2, 0.3};
        const FundamentalConstant fc = fundamental_constant(gr, radii);
        CHECK(fc.k == doctest::Approx(1.0).epsilon(0.02));
        CHECK(fc.spread <= 0.02);
    }

    SUBCASE("near-pole sweep constants are stable") {
        std::vector<double> radii{0.05, 0.1, 0.2};
        const Report rep = near_pole_integrability(gr, radii, 0.8);
        for (const auto& row : rep.rows) {
            CAPTURE(row.quantity);
            if (row.quantity == "grad_pminus1_constant_spread") CHECK(row.pass);
            if (row.quantity == "caccioppoli_ratio") CHECK(row.value > 0);
        }
        CHECK_THROWS_AS(near_pole_integrability(gr, radii, 0.5), ParameterError);

        // a constant field has nothing on either side: the ratio row is
        // flagged undefined rather than reported as a number
        GreenResult flat = gr;
        flat.field = ScalarField(d.graph, 0.0);
        std::vector<double> one{0.05};
        const Report frep = near_pole_integrability(flat, one, 0.8);
        bool undefined_row = false;
        for (const auto& row : frep.rows)
            if (row.quantity == "caccioppoli_undefined") undefined_row = true;
        CHECK(undefined_row);
    }

    SUBCASE("unstabilized schedules do not match, stabilized ones do") {
        const GreenResult coarse = green_compact(d.graph, d.omega, d.center, cfg, 4);
        const GreenResult fine = green_compact(d.graph, d.omega, d.center, cfg, 10);
        CHECK(!green_difference_bound(coarse, fine).matched);
        const GreenResult fine2 = green_compact(d.graph, d.omega, d.center, cfg, 8);
        const DifferenceBound db = green_difference_bound(fine2, fine);
        CHECK(db.matched);
        CHECK(db.sup_difference <= 1e-4);
    }
}

} // TEST_SUITE
