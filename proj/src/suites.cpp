#include "greenpot/suites.hpp"

#include <array>
#include <cmath>

#include "greenpot/capacity.hpp"
#include "greenpot/dirichlet.hpp"
#include "greenpot/space.hpp"
#include "greenpot/util.hpp"

namespace greenpot {

namespace {

constexpr double kHuge = 1e300;
constexpr double kSlack = 1e-8;

struct Instance {
    MetricGraph graph;
    VertexSet omega;     // interior of the lattice box
    VertexSet boundary;  // the rest
};

Instance random_instance(Rng& rng) {
    const int dim = rng.below(2) == 0 ? 1 : 2;
    const int side = 7 + static_cast<int>(rng.below(9));
    MetricGraph g = build_grid(dim, side, 1.0 / (side - 1));
    VertexSet omega, bnd;
    const GridChart& chart = g.chart();
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        const auto idx = chart.lattice(v);
        bool interior = true;
        for (int k = 0; k < dim; ++k)
            if (idx[k] == 0 || idx[k] == chart.extents[k] - 1) interior = false;
        (interior ? omega : bnd).push_back(v);
    }
    return {std::move(g), std::move(omega), std::move(bnd)};
}

ScalarField random_smooth_field(const MetricGraph& g, Rng& rng, const VertexSet& support) {
    const GridChart& chart = g.chart();
    std::array<double, 3> lin{}, freq{}, phase{};
    for (int k = 0; k < chart.dimension; ++k) {
        lin[k] = rng.uniform(-1.0, 1.0);
        freq[k] = rng.uniform(1.0, 5.0);
        phase[k] = rng.uniform(0.0, 6.28);
    }
    const double amp = rng.uniform(0.2, 1.0);
    ScalarField u(g, 0.0, false);
    for (VertexId v : support) {
        const auto c = chart.coords(v);
        double val = 0;
        for (int k = 0; k < chart.dimension; ++k)
            val += lin[k] * c[k] + amp * std::sin(freq[k] * c[k] + phase[k]);
        u.set(v, val);
    }
    return u;
}

// the two discretizations with an exact order principle
SolverConfig exact_family_config(Rng& rng, int i) {
    SolverConfig cfg;
    if (i % 2 == 0) {
        cfg.mode = GradientMode::edge;
        const double ps[3] = {1.5, 2.0, 3.0};
        cfg.p = ps[rng.below(3)];
    } else {
        cfg.mode = GradientMode::chart;
        cfg.p = 2.0;
    }
    return cfg;
}

} // namespace

Report run_comparison_suite(const SuiteOptions& opts) {
    Report rep;
    Rng rng(opts.seed ^ 0x636f6d70);
    for (int i = 0; i < opts.instances; ++i) {
        Instance inst = random_instance(rng);
        const SolverConfig cfg = exact_family_config(rng, i);

        ScalarField phi_low = random_smooth_field(inst.graph, rng, inst.boundary);
        ScalarField phi_high = phi_low;
        for (VertexId v : inst.boundary)
            phi_high.values[v] += rng.uniform(0.0, 1.0);

        DirichletProblem prob{&inst.graph, inst.omega, phi_low};
        const ScalarField lo = solve_dirichlet(prob, cfg);
        prob.boundary = phi_high;
        const ScalarField hi = solve_dirichlet(prob, cfg);

        double worst = kHuge;
        for (VertexId v : inst.omega) worst = std::min(worst, hi.at(v) - lo.at(v));
        rep.add("cmp_" + std::to_string(i), "ordered_solutions_margin", worst, -kSlack, kHuge);
    }
    return rep;
}

Report run_max_principle_suite(const SuiteOptions& opts) {
    Report rep;
    Rng rng(opts.seed ^ 0x6d617870);
    for (int i = 0; i < opts.instances; ++i) {
        Instance inst = random_instance(rng);
        const SolverConfig cfg = exact_family_config(rng, i);
        const ScalarField phi = random_smooth_field(inst.graph, rng, inst.boundary);
        const ScalarField u = solve_dirichlet({&inst.graph, inst.omega, phi}, cfg);

        const double bmin = phi.min_over(inst.boundary);
        const double bmax = phi.max_over(inst.boundary);
        double excess = 0;
        for (VertexId v : inst.omega) {
            excess = std::max(excess, u.at(v) - bmax);
            excess = std::max(excess, bmin - u.at(v));
        }
        rep.add("max_" + std::to_string(i), "interior_range_excess", excess, 0.0, kSlack);
    }
    return rep;
}

Report run_level_component_suite(const SuiteOptions& opts) {
    Report rep;
    Rng rng(opts.seed ^ 0x6c766c63);
    for (int i = 0; i < opts.instances; ++i) {
        Instance inst = random_instance(rng);
        const MetricGraph& g = inst.graph;
        const SolverConfig cfg = exact_family_config(rng, i);
        const ScalarField phi = random_smooth_field(g, rng, inst.boundary);
        const ScalarField u = solve_dirichlet({&g, inst.omega, phi}, cfg);

        std::vector<std::uint8_t> in_omega(g.vertex_count(), 0);
        for (VertexId v : inst.omega) in_omega[v] = 1;

        auto compact_components = [&](double alpha, bool above) {
            // count components of {u > alpha} (or {u < alpha}) in omega that
            // never touch the boundary stencil
            std::vector<std::uint8_t> in_set(g.vertex_count(), 0), seen(g.vertex_count(), 0);
            for (VertexId v : inst.omega)
                in_set[v] = above ? (u.at(v) > alpha) : (u.at(v) < alpha);
            int bad = 0;
            for (VertexId start : inst.omega) {
                if (!in_set[start] || seen[start]) continue;
                bool touches = false;
                std::vector<VertexId> stack{start};
                seen[start] = 1;
                while (!stack.empty()) {
                    const VertexId v = stack.back();
                    stack.pop_back();
                    for (std::uint32_t ei : g.incident_edges(v)) {
                        const VertexId w = g.edge_other(ei, v);
                        if (!in_omega[w])
                            touches = true;
                        else if (in_set[w] && !seen[w]) {
                            seen[w] = 1;
                            stack.push_back(w);
                        }
                    }
                }
                if (!touches) ++bad;
            }
            return bad;
        };

        const double umin = u.min_over(inst.omega);
        const double umax = u.max_over(inst.omega);
        int bad = 0;
        for (int t = 0; t < 5; ++t) {
            const double alpha = rng.uniform(umin, umax);
            bad += compact_components(alpha, true);
            bad += compact_components(alpha, false);
        }
        rep.add("lvl_" + std::to_string(i), "compact_level_components", bad, 0.0, 0.0);
    }
    return rep;
}

Report run_capacity_calculus_suite(const SuiteOptions& opts) {
    Rng rng(opts.seed ^ 0x63616c63);
    const MetricGraph g = build_grid(2, 49, 1.0 / 48.0);
    SolverConfig cfg;
    return capacity_calculus_check(g, opts.instances, rng.next_u64(), cfg);
}

Report run_principles_suite(const SuiteOptions& opts) {
    Report rep;
    rep.append(run_comparison_suite(opts));
    rep.append(run_max_principle_suite(opts));
    rep.append(run_level_component_suite(opts));
    rep.append(run_capacity_calculus_suite(opts));
    return rep;
}

} // namespace greenpot
