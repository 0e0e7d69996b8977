#include <doctest.h>

#include <omp.h>

#include "greenpot/kernels.hpp"
#include "greenpot/util.hpp"

using namespace greenpot;

namespace {

std::vector<double> random_field(std::size_t n, Rng& rng) {
    std::vector<double> u(n);
    for (double& x : u) x = rng.uniform(-1.0, 1.0);
    return u;
}

} // namespace

TEST_SUITE("kernels") {

TEST_CASE("parallel kernels match the serial reference") {
    const MetricGraph g = build_grid(2, 41, 1.0 / 40.0);
    Rng rng(99);
    const auto u = random_field(g.vertex_count(), rng);
    const auto phi = random_field(g.vertex_count(), rng);

    for (double p : {1.5, 2.0, 3.0}) {
        const double e1 = kernels::chart_energy(g, u, {}, p, 1e-12);
        const double e2 = refk::chart_energy(g, u, {}, p, 1e-12);
        CHECK(e1 == doctest::Approx(e2).epsilon(1e-13));

        std::vector<double> g1(g.vertex_count()), g2(g.vertex_count());
        kernels::chart_energy_gradient(g, u, {}, p, 1e-12, g1);
        refk::chart_energy_gradient(g, u, {}, p, 1e-12, g2);
        for (std::size_t i = 0; i < g1.size(); ++i)
            CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-12));

        CHECK(kernels::chart_pairing(g, u, phi, {}, p) ==
              doctest::Approx(refk::chart_pairing(g, u, phi, {}, p)).epsilon(1e-12));

        CHECK(kernels::edge_energy(g, u, {}, p, 0.0) ==
              doctest::Approx(refk::edge_energy(g, u, {}, p, 0.0)).epsilon(1e-13));

        std::vector<double> h1(g.vertex_count()), h2(g.vertex_count());
        kernels::edge_energy_gradient(g, u, {}, p, 0.0, h1);
        refk::edge_energy_gradient(g, u, {}, p, 0.0, h2);
        for (std::size_t i = 0; i < h1.size(); ++i)
            CHECK(h1[i] == doctest::Approx(h2[i]).epsilon(1e-12));
    }
}

TEST_CASE("reductions are identical across thread counts") {
    const MetricGraph g = build_grid(2, 51, 1.0 / 50.0);
    Rng rng(7);
    const auto u = random_field(g.vertex_count(), rng);

    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const double e_one = kernels::chart_energy(g, u, {}, 3.0, 1e-12);
    omp_set_num_threads(2);
    const double e_two = kernels::chart_energy(g, u, {}, 3.0, 1e-12);
    omp_set_num_threads(saved);
    CHECK(e_one == e_two); // bitwise: chunked reduction order is fixed
}

TEST_CASE("masked energies only count selected cells") {
    const MetricGraph g = build_grid(1, 5, 1.0);
    std::vector<double> u{0, 1, 3, 6, 10};
    std::vector<std::uint8_t> mask(5, 0);
    mask[1] = 1; // only cell between vertices 1 and 2
    CHECK(kernels::chart_energy(g, u, mask, 2.0, 0.0) == doctest::Approx(4.0));
}

} // TEST_SUITE
