// Benchmark of the OpenMP kernels against the serial reference on a large
// grid: energy, gradient and pairing evaluations dominate the solver's line
// searches, so these loops are what parallelism buys.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "greenpot/kernels.hpp"
#include "greenpot/util.hpp"

using namespace greenpot;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <class F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = Clock::now();
        f();
        best = std::min(best, ms_since(t0));
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {
    const int side = argc > 1 ? std::atoi(argv[1]) : 513;
    const int reps = 5;
    const MetricGraph g = build_grid(2, side, 1.0 / (side - 1));
    printf("grid %dx%d (%zu vertices), %d threads\n", side, side, g.vertex_count(),
           omp_get_max_threads());

    Rng rng(42);
    std::vector<double> u(g.vertex_count()), phi(g.vertex_count());
    for (auto& x : u) x = rng.uniform(-1, 1);
    for (auto& x : phi) x = rng.uniform(-1, 1);
    std::vector<double> grad(g.vertex_count());

    struct Row {
        std::string name;
        double serial_ms;
        double parallel_ms;
    };
    std::vector<Row> rows;

    for (double p : {2.0, 3.0}) {
        double acc = 0;
        char name[64];

        snprintf(name, sizeof name, "chart_energy p=%.0f", p);
        const double s1 = time_best_of(reps, [&] { acc += refk::chart_energy(g, u, {}, p, 1e-12); });
        const double p1 =
            time_best_of(reps, [&] { acc += kernels::chart_energy(g, u, {}, p, 1e-12); });
        rows.push_back({name, s1, p1});

        snprintf(name, sizeof name, "chart_gradient p=%.0f", p);
        const double s2 = time_best_of(
            reps, [&] { refk::chart_energy_gradient(g, u, {}, p, 1e-12, grad); });
        const double p2 = time_best_of(
            reps, [&] { kernels::chart_energy_gradient(g, u, {}, p, 1e-12, grad); });
        rows.push_back({name, s2, p2});

        snprintf(name, sizeof name, "edge_energy p=%.0f", p);
        const double s3 = time_best_of(reps, [&] { acc += refk::edge_energy(g, u, {}, p, 0); });
        const double p3 =
            time_best_of(reps, [&] { acc += kernels::edge_energy(g, u, {}, p, 0); });
        rows.push_back({name, s3, p3});

        if (acc == 12345.0) printf("?");
    }
    const double s4 = time_best_of(reps, [&] { refk::chart_pairing(g, u, phi, {}, 2.0); });
    const double p4 = time_best_of(reps, [&] { kernels::chart_pairing(g, u, phi, {}, 2.0); });
    rows.push_back({"chart_pairing p=2", s4, p4});

    printf("%-22s %12s %12s %9s\n", "kernel", "serial (ms)", "openmp (ms)", "speedup");
    for (const auto& r : rows)
        printf("%-22s %12.3f %12.3f %8.2fx\n", r.name.c_str(), r.serial_ms, r.parallel_ms,
               r.serial_ms / r.parallel_ms);
    return 0;
}
