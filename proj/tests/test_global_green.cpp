#include <doctest.h>

#include <cmath>

#include "greenpot/global_green.hpp"
#include "greenpot/util.hpp"

using namespace greenpot;

TEST_SUITE("global_green") {

TEST_CASE("construction on expanding grids") {
    const double h = 1.0 / 128.0;
    const double scale = 1.0 / 8.0;
    SolverConfig cfg;
    const GridGenerator gen = make_square_grid_generator(2, h);
    GlobalGreenResult gr = green_global(gen, 2.0, 3, cfg, scale);

    SUBCASE("trace divisors are positive and overlap changes shrink") {
        REQUIRE(gr.trace.size() == 3);
        for (const auto& t : gr.trace) CHECK(t.divisor > 0);
        CHECK(gr.trace[1].overlap_change > 0);
        CHECK(gr.trace[2].overlap_change <= gr.trace[1].overlap_change * 1.2);
    }

    SUBCASE("sign structure: positive near the pole, negative near the rim") {
        const auto near_band = gr.grid->sphere_band(gr.pole, 4 * h);
        REQUIRE(near_band.has_value());
        CHECK(gr.field.min_over(*near_band) > 0);
        const auto far_band = gr.grid->sphere_band(gr.pole, 0.9 * gr.outer_radius);
        REQUIRE(far_band.has_value());
        CHECK(gr.field.max_over(*far_band) < 0);
    }

    SUBCASE("log fits bracket the conformal coefficient") {
        const LogAsymptotics fits =
            log_asymptotics_fit(gr, {8 * h, 4 * 8 * h}, {0.2, 0.8});
        const double target = 1.0 / (2 * M_PI);
        CHECK(fits.slopes_positive);
        CHECK(fits.inner.slope == doctest::Approx(target).epsilon(0.10));
        CHECK(fits.outer.slope == doctest::Approx(target).epsilon(0.10));
        CHECK(fits.pass);
        CHECK(gr.inner_fit.slope == fits.inner.slope);
        // synthetic self-tests. A field constant on each sphere band (log of
        // the snapped radius) recovers the coefficient to machine precision;
        // a pointwise log field recovers it up to band-width quantization.
        GlobalGreenResult synth = gr;
        auto snap = [&](double d, double lo) {
            double r = lo;
            while (r * 1.25 <= d * std::sqrt(1.25)) r *= 1.25;
            return r;
        };
        ScalarField banded(*gr.grid);
        ScalarField pointwise(*gr.grid);
        for (VertexId v = 0; v < gr.grid->vertex_count(); ++v) {
            const double d = std::max(gr.grid->metric(gr.pole, v), 0.5 * h);
            banded.values[v] = 0.37 * std::log(1.0 / snap(d, 8 * h)) - 0.11;
            pointwise.values[v] = 0.37 * std::log(1.0 / d) - 0.11;
        }
        synth.field = banded;
        const LogAsymptotics bf = log_asymptotics_fit(synth, {8 * h, 4 * 8 * h}, {0.2, 0.8});
        CHECK(bf.inner.slope == doctest::Approx(0.37).epsilon(1e-6));
        synth.field = pointwise;
        const LogAsymptotics pf = log_asymptotics_fit(synth, {8 * h, 4 * 8 * h}, {0.2, 0.8});
        CHECK(pf.inner.slope == doctest::Approx(0.37).epsilon(0.01));
        CHECK(pf.outer.slope == doctest::Approx(0.37).epsilon(0.01));
    }

    SUBCASE("narrow fit window is rejected") {
        GlobalGreenResult copy = gr;
        CHECK_THROWS_AS(log_asymptotics_fit(copy, {0.1, 0.2}, {0.2, 0.8}), ParameterError);
    }

    SUBCASE("level-set law holds across signs") {
        SolverConfig vcfg;
        for (auto [a, b] : {std::pair{0.02, 0.1}, {-0.05, 0.05}, {-0.08, -0.01}}) {
            const LevelGap lg = global_level_capacity(gr, a, b, vcfg);
            CHECK(lg.gap <= 0.05);
        }
        // a level reaching past the truncation rim is refused
        CHECK_THROWS_AS(global_level_capacity(gr, -2.0, 0.1, vcfg), DegenerateError);
    }

    SUBCASE("min-max inequalities with a single modest constant") {
        std::vector<std::pair<double, double>> pairs{
            {0.06, 0.5}, {0.12, 0.5}, {0.12, 0.7}, {0.2, 0.7}, {0.3, 0.6}};
        const Report rep = min_max_capacity_check(gr, pairs, cfg);
        for (const auto& row : rep.rows) {
            CAPTURE(row.quantity);
            CAPTURE(row.value);
            CHECK(row.pass);
        }
    }
}

TEST_CASE("independently staged constructions agree after matching") {
    const double h = 1.0 / 256.0;
    const double scale = 1.0 / 16.0;
    SolverConfig cfg;
    const GridGenerator gen = make_square_grid_generator(2, h);
    const GlobalGreenResult a = green_global(gen, 2.0, 3, cfg, scale);
    const GlobalGreenResult b = green_global(gen, 2.0, 4, cfg, scale);
    const UniquenessDiagnostics uq = uniqueness_diagnostics(a, b);
    CHECK(uq.matched);
    CHECK(uq.sup_difference <= 5e-3);
    CHECK(uq.gradient_lq <= 1e-2);
    CHECK(!uq.q_below_2_advisory);

    // identical inputs match exactly
    const UniquenessDiagnostics same = uniqueness_diagnostics(a, a);
    CHECK(same.sup_difference == 0.0);
    CHECK(same.gradient_lq == 0.0);
}

TEST_CASE("construction guards") {
    SolverConfig cfg;
    const GridGenerator gen = make_square_grid_generator(2, 1.0 / 64.0);
    SUBCASE("too few stages") {
        CHECK_THROWS_AS(green_global(gen, 2.0, 2, cfg, 0.125), ParameterError);
    }
    SUBCASE("exponent must match the measured dimension") {
        SolverConfig c3 = cfg;
        c3.p = 3.0;
        CHECK_THROWS_AS(green_global(gen, 3.0, 3, c3, 0.125), IllPosedError);
    }
    SUBCASE("memory budget names the largest feasible stage") {
        const GridGenerator tight = make_square_grid_generator(2, 1.0 / 64.0, 20000);
        try {
            green_global(tight, 2.0, 4, cfg, 0.125);
            FAIL("expected ResourceError");
        } catch (const ResourceError& e) {
            CHECK(std::string(e.what()).find("largest feasible stage") != std::string::npos);
        }
    }
}

} // TEST_SUITE
