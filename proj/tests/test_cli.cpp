#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "greenpot/config.hpp"
#include "greenpot/opmap.hpp"
#include "greenpot/suites.hpp"

using namespace greenpot;

TEST_SUITE("cli") {

TEST_CASE("config parsing") {
    std::istringstream in(
        "# experiment\n"
        "[space]\n"
        "dim = 2\n"
        "side = 65    # inline comment\n"
        "spacing = 0.015625\n"
        "[solver]\n"
        "p = 3\n"
        "mode = edge\n"
        "[run]\n"
        "seed = 42\n"
        "radii = 0.1, 0.2 0.4\n");
    const Config cfg = Config::parse(in);
    CHECK(cfg.get_int("space.dim", 0) == 2);
    CHECK(cfg.get_int("space.side", 0) == 65);
    CHECK(cfg.get_double("space.spacing", 0) == 0.015625);
    CHECK(cfg.get_seed("run.seed", 0) == 42);
    CHECK(cfg.get_list("run.radii") == std::vector<double>{0.1, 0.2, 0.4});
    const SolverConfig s = cfg.solver();
    CHECK(s.p == 3.0);
    CHECK(s.mode == GradientMode::edge);
    CHECK(!cfg.has("space.missing"));
    CHECK(cfg.get_string("space.missing", "x") == "x");
}

TEST_CASE("config errors") {
    {
        std::istringstream in("key value\n");
        CHECK_THROWS_AS(Config::parse(in), ConfigError);
    }
    {
        std::istringstream in("[open\n");
        CHECK_THROWS_AS(Config::parse(in), ConfigError);
    }
    {
        std::istringstream in("[solver]\np = fast\n");
        CHECK_THROWS_AS(Config::parse(in).solver(), ConfigError);
    }
}

TEST_CASE("out-of-range exponent names the bound") {
    std::istringstream in("[solver]\np = 0.9\n");
    try {
        Config::parse(in).solver();
        FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("(1.2, 10]") != std::string::npos);
        CHECK(msg.find("0.9") != std::string::npos);
    }
}

TEST_CASE("every operation maps to exactly one subcommand") {
    const std::set<std::string> known_subcommands{
        "solve", "capacity", "green", "global-green", "verify", "profile",
        "regularity", "run"};
    const char* expected_ops[] = {
        "build_grid", "ball", "sphere_band", "estimate_regularity",
        "gradient", "p_energy", "energy_gradient", "sobolev_norm", "comparability_ratio",
        "solve_dirichlet", "residual", "harnack_ratio", "oscillation_profile",
        "p_potential", "capacity", "level_set_capacity", "capacity_calculus_check",
        "ring_bounds_check", "loewner_profile", "parabolicity_probe",
        "green_compact", "normalize_green", "validate_green", "fundamental_constant",
        "near_pole_integrability", "green_difference_bound",
        "green_global", "log_asymptotics_fit", "min_max_capacity_check",
        "uniqueness_diagnostics", "run"};

    std::map<std::string, int> seen;
    for (const auto& m : operation_map()) {
        seen[std::string(m.operation)] += 1;
        CHECK(known_subcommands.count(std::string(m.subcommand)) == 1);
    }
    for (const char* op : expected_ops) {
        CAPTURE(op);
        CHECK(seen[op] == 1);
    }
    CHECK(seen.size() == std::size(expected_ops));
}

TEST_CASE("seeded suites are byte-reproducible") {
    SuiteOptions opts;
    opts.instances = 6;
    opts.seed = 7;
    const std::string a = run_principles_suite(opts).to_csv();
    const std::string b = run_principles_suite(opts).to_csv();
    CHECK(a == b);
    opts.seed = 8;
    const std::string c = run_principles_suite(opts).to_csv();
    CHECK(a != c);
}

} // TEST_SUITE
