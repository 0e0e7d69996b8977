#include "greenpot/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "greenpot/kernels.hpp"
#include "greenpot/util.hpp"

namespace greenpot {

namespace {

constexpr double kHuge = 1e300;

GradientMode effective_mode(const MetricGraph& g, const SolverConfig& cfg) {
    return (cfg.mode == GradientMode::chart && g.has_chart()) ? GradientMode::chart
                                                              : GradientMode::edge;
}

double distance_to_complement(const MetricGraph& g, const VertexSet& omega, VertexId x0) {
    double d = std::numeric_limits<double>::infinity();
    for (VertexId v = 0; v < g.vertex_count(); ++v)
        if (!set_contains(omega, v)) d = std::min(d, g.metric(x0, v));
    return d;
}

bool has_exterior(const MetricGraph& g, const VertexSet& omega) {
    return omega.size() < g.vertex_count();
}

std::vector<double> default_profile_radii(const MetricGraph& g, double r_max) {
    const double w = g.default_band_width();
    std::vector<double> radii;
    double r = 2 * w;
    while (r < 0.95 * r_max && radii.size() < 24) {
        radii.push_back(r);
        r *= 1.35;
    }
    return radii;
}

// Per-vertex gradient norm of the field in the result's mode (edge mode
// aggregates the max incident difference quotient).
std::vector<double> vertex_gradient_norm(const ScalarField& u, GradientMode mode) {
    const MetricGraph& g = *u.graph;
    const GradientField gf = gradient(u, mode);
    if (mode == GradientMode::chart) return gf.norm;
    std::vector<double> norm(g.vertex_count(), 0.0);
    for (std::size_t ei = 0; ei < g.edge_count(); ++ei) {
        const auto& e = g.edges()[ei];
        norm[e.a] = std::max(norm[e.a], gf.norm[ei]);
        norm[e.b] = std::max(norm[e.b], gf.norm[ei]);
    }
    return norm;
}

} // namespace

GreenResult normalize_green(const ScalarField& v, const VertexSet& omega, VertexId x0,
                            double p, const SolverConfig& cfg) {
    const MetricGraph& g = *v.graph;
    if (!set_contains(omega, x0))
        throw ParameterError("normalize_green: pole is not inside omega");
    const double pole_value = v.at(x0);
    if (!(pole_value > 0))
        throw DegenerateError("normalize_green: field is not positive at the pole");

    const double s = 0.5 * pole_value;
    std::size_t level_count = 0;
    for (VertexId w : omega)
        if (v.at(w) >= s) ++level_count;
    if (level_count == 0 || level_count >= omega.size())
        throw DegenerateError("normalize_green: level set {v >= s} is degenerate");

    // cap_p({v >= s}, omega) evaluated through the truncated field
    // clamp(v/s): the same route the level-set identity checks use, so the
    // normalization pair holds exactly by construction.
    SolverConfig scfg = cfg;
    scfg.p = p;
    const GradientMode mode = effective_mode(g, scfg);
    std::vector<double> w_trunc(g.vertex_count());
    for (VertexId w = 0; w < g.vertex_count(); ++w)
        w_trunc[w] = std::clamp(v.values[w] / s, 0.0, 1.0);
    const double cap = mode == GradientMode::chart
                           ? kernels::chart_energy(g, w_trunc, {}, p, 0.0)
                           : kernels::edge_energy(g, w_trunc, {}, p, 0.0);
    if (!(cap > 0)) throw DegenerateError("normalize_green: level-set capacity vanished");
    const double t = std::pow(cap, 1.0 / (1.0 - p));
    const double lambda = t / s;

    GreenResult out;
    out.field = ScalarField(g, 0.0, false);
    for (VertexId w = 0; w < g.vertex_count(); ++w)
        if (v.is_defined(w)) out.field.set(w, lambda * v.at(w));
    out.pole = x0;
    out.p = p;
    out.mode = mode;
    out.lambda = lambda;
    out.pole_value = out.field.at(x0);
    out.omega = omega;

    // Spot-check the level-set law at three interior value pairs.
    const double pv = out.pole_value;
    const std::pair<double, double> pairs[3] = {
        {0.2 * pv, 0.4 * pv}, {0.3 * pv, 0.6 * pv}, {0.1 * pv, 0.5 * pv}};
    for (const auto& [a, b] : pairs) {
        const LevelGap lg = green_level_capacity(out, a, b, scfg);
        out.normalization_gaps.push_back(lg);
    }
    return out;
}

GreenResult green_compact(const MetricGraph& g, const VertexSet& omega, VertexId x0,
                          const SolverConfig& cfg, int levels, double scale) {
    cfg.validate();
    if (levels < 1) throw ParameterError("green_compact: levels must be at least 1");
    if (!set_contains(omega, x0)) throw ParameterError("green_compact: pole outside omega");
    if (!has_exterior(g, omega))
        throw IllPosedError("green_compact: omega has no exterior, its complement has zero capacity");

    const double dist_bnd = distance_to_complement(g, omega, x0);
    if (!(dist_bnd > 0))
        throw ParameterError("green_compact: pole sits on the boundary stencil");
    if (scale <= 0) scale = dist_bnd;
    if (!(0.5 * scale < dist_bnd))
        throw ParameterError("green_compact: ball(x0, scale/2) is not contained in omega");

    SolverConfig scfg = cfg;
    std::vector<GreenLevelTrace> trace;
    ScalarField prev_level;
    ScalarField deepest;
    VertexSet prev_plate;

    for (int i = 1; i <= levels; ++i) {
        const double r = std::ldexp(scale, -i); // scale * 2^-i
        VertexSet plate;
        for (VertexId v : g.closed_ball(x0, r))
            if (set_contains(omega, v)) plate.push_back(v);
        if (plate.empty()) plate.push_back(x0);

        if (!prev_plate.empty() && plate == prev_plate) {
            // stabilized; deeper levels repeat the same problem
            trace.push_back({r, trace.back().cap, 0.0});
            continue;
        }

        const CapacityResult res = p_potential(Condenser::relative(g, plate, omega), scfg);
        if (res.outcome != CapacityOutcome::finite)
            throw IllPosedError("green_compact: degenerate plate capacity at level " +
                                std::to_string(i));
        const double factor = std::pow(res.value, 1.0 / (1.0 - cfg.p)); // cap^{1/(1-p)}
        ScalarField level(g, 0.0, true);
        for (VertexId v = 0; v < g.vertex_count(); ++v)
            level.values[v] = res.potential.at(v) * factor;

        double change = 0.0;
        if (prev_level.graph != nullptr)
            for (VertexId v : omega)
                change = std::max(change, std::abs(level.at(v) - prev_level.at(v)));
        trace.push_back({r, res.value, change});
        prev_level = level;
        deepest = std::move(level);
        prev_plate = std::move(plate);
    }

    GreenResult out = normalize_green(deepest, omega, x0, cfg.p, cfg);
    out.trace = std::move(trace);

    const auto radii = default_profile_radii(g, dist_bnd);
    out.profile = oscillation_profile(out.field, x0, radii).entries;
    return out;
}

LevelGap green_level_capacity(const GreenResult& gr, double a, double b,
                              const SolverConfig& cfg) {
    (void)cfg;
    if (!(a >= 0) || !(a < b))
        throw ParameterError("green_level_capacity: need 0 <= a < b");
    const MetricGraph& g = *gr.field.graph;
    // The clamp of the field to the value band [a, b] is the potential of
    // the level condenser; its energy is the capacity.
    bool any_plate = false;
    std::vector<double> w(g.vertex_count());
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        const double u = gr.field.at(v);
        w[v] = std::clamp((u - a) / (b - a), 0.0, 1.0);
        if (u >= b) any_plate = true;
    }
    if (!any_plate)
        throw DegenerateError("green_level_capacity: empty superlevel set at b = " +
                              format_double(b));
    LevelGap out;
    out.a = a;
    out.b = b;
    const double value = gr.mode == GradientMode::chart
                             ? kernels::chart_energy(g, w, {}, gr.p, 0.0)
                             : kernels::edge_energy(g, w, {}, gr.p, 0.0);
    const double reference = std::pow(b - a, 1.0 - gr.p);
    out.gap = std::abs(value - reference) / reference;
    return out;
}

Report validate_green(const GreenResult& gr, std::span<const std::pair<double, double>> samples,
                      const SolverConfig& cfg, const GreenValidationTols& tols) {
    Report rep;
    const MetricGraph& g = *gr.field.graph;

    // (i) p-harmonic off the pole
    VertexSet off_pole;
    for (VertexId v : gr.omega)
        if (v != gr.pole) off_pole.push_back(v);
    const double res = residual(gr.field, gr.p, off_pole, gr.mode);
    rep.add("green", "harmonic_residual_off_pole", res, 0.0, tols.residual_tol);

    // (ii) pole value = cap({x0}, omega)^{1/(1-p)}
    SolverConfig scfg = cfg;
    scfg.p = gr.p;
    const double cap_pole =
        capacity(Condenser::relative(g, VertexSet{gr.pole}, gr.omega), scfg);
    const double expect = std::pow(cap_pole, 1.0 / (1.0 - gr.p));
    rep.add("green", "pole_value_identity_gap",
            std::abs(gr.pole_value - expect) / expect, 0.0, tols.pole_tol);

    // (iii) identically zero outside omega
    double exterior = 0.0;
    for (VertexId v = 0; v < g.vertex_count(); ++v)
        if (!set_contains(gr.omega, v))
            exterior = std::max(exterior, std::abs(gr.field.at(v)));
    rep.add("green", "exterior_zero", exterior, 0.0, 0.0);

    // (iv) level-set capacities
    for (const auto& [a, b] : samples) {
        const std::string id = "a=" + format_double(a) + ",b=" + format_double(b);
        if (b >= gr.pole_value) {
            rep.add(id, "level_degenerate_above_pole", b, 0.0, kHuge);
            continue;
        }
        const LevelGap lg = green_level_capacity(gr, a, b, scfg);
        rep.add(id, "levelset_capacity_gap", lg.gap, 0.0, tols.levelset_tol);
    }
    return rep;
}

FundamentalConstant fundamental_constant(GreenResult& gr, std::span<const double> cutoff_radii) {
    const MetricGraph& g = *gr.field.graph;
    if (cutoff_radii.empty())
        throw ParameterError("fundamental_constant: need at least one cutoff radius");

    std::vector<double> ks;
    for (double r : cutoff_radii) {
        for (VertexId v : g.ball(gr.pole, r))
            if (!set_contains(gr.omega, v))
                throw ParameterError("fundamental_constant: cutoff of radius " +
                                     format_double(r) + " escapes omega");
        // radial Lipschitz cutoff: 1 on B(x0, r/2), 0 outside B(x0, r)
        std::vector<double> phi(g.vertex_count(), 0.0);
        for (VertexId v = 0; v < g.vertex_count(); ++v) {
            const double d = g.metric(gr.pole, v);
            phi[v] = std::clamp((r - d) / (0.5 * r), 0.0, 1.0);
        }
        double k;
        if (gr.mode == GradientMode::chart) {
            k = kernels::chart_pairing(g, gr.field.values, phi, {}, gr.p);
        } else {
            k = 0.0;
            for (const auto& e : g.edges()) {
                const double du = (gr.field.at(e.b) - gr.field.at(e.a)) / e.length;
                const double dphi = (phi[e.b] - phi[e.a]) / e.length;
                if (du == 0.0) continue;
                k += e.conductance * e.length * std::pow(std::abs(du), gr.p - 2.0) * du * dphi;
            }
        }
        ks.push_back(k);
    }
    FundamentalConstant out;
    for (double k : ks) out.k += k;
    out.k /= static_cast<double>(ks.size());
    for (double k : ks)
        out.spread = std::max(out.spread, std::abs(k - out.k) / std::max(std::abs(out.k), 1e-300));
    gr.k_constant = out.k;
    return out;
}

Report near_pole_integrability(const GreenResult& gr, std::span<const double> radii,
                               double r0, double spread_tol) {
    Report rep;
    const MetricGraph& g = *gr.field.graph;
    for (double r : radii)
        if (!(r > 0) || r > 0.25 * r0 + 1e-15)
            throw ParameterError("near_pole_integrability: radii must lie within R0/4");

    const double q = g.has_chart() ? static_cast<double>(g.chart().dimension) : gr.p;
    const std::vector<double> gnorm = vertex_gradient_norm(gr.field, gr.mode);

    std::vector<double> c_plain;
    double cacc_max = 0.0;
    for (double r : radii) {
        const std::string id = "r=" + format_double(r);
        const VertexSet br = g.ball(gr.pole, r);
        double i1 = 0, i2 = 0;
        for (VertexId v : br) {
            if (v != gr.pole) i1 += std::pow(gnorm[v], gr.p - 1.0) * g.measure(v);
            i2 += std::pow(gnorm[v], gr.p) * g.measure(v);
        }
        const VertexSet b2r = g.ball(gr.pole, 2 * r);
        double umass = 0;
        for (VertexId v : b2r)
            if (!set_contains(br, v))
                umass += std::pow(std::abs(gr.field.at(v)), gr.p) * g.measure(v);
        const double rhs = std::pow(r, -gr.p) * umass;

        rep.add(id, "grad_pminus1_mass", i1, 0.0, kHuge);
        rep.add(id, "grad_pminus1_over_r", i1 / r, 0.0, kHuge);
        rep.add(id, "grad_pminus1_over_r_logadj",
                i1 / (r * std::pow(std::log(2 * r0 / r), q - 1.0)), 0.0, kHuge);
        c_plain.push_back(i1 / r);
        if (rhs > 0) {
            const double ratio = i2 / rhs;
            cacc_max = std::max(cacc_max, ratio);
            rep.add(id, "caccioppoli_ratio", ratio, 0.0, kHuge);
        } else {
            rep.add(id, "caccioppoli_undefined", 0.0, 0.0, kHuge);
        }
    }
    const auto [lo, hi] = std::minmax_element(c_plain.begin(), c_plain.end());
    rep.add("sweep", "grad_pminus1_constant_spread", (*hi - *lo) / std::max(*lo, 1e-300),
            0.0, spread_tol);
    rep.add("sweep", "caccioppoli_fitted_C", cacc_max, 0.0, kHuge);
    return rep;
}

DifferenceBound green_difference_bound(const GreenResult& u, const GreenResult& v,
                                       double uniqueness_tol) {
    const MetricGraph& g = *u.field.graph;
    if (u.field.graph != v.field.graph || u.omega != v.omega || u.pole != v.pole ||
        u.p != v.p)
        throw ParameterError("green_difference_bound: domains, poles and exponents must match");

    // reference: smallest-id interior vertex adjacent to the exterior
    VertexId ref = kNoVertex;
    for (VertexId w : u.omega) {
        bool boundary_adjacent = false;
        for (std::uint32_t ei : g.incident_edges(w))
            if (!set_contains(u.omega, g.edge_other(ei, w))) boundary_adjacent = true;
        if (boundary_adjacent) {
            ref = w;
            break;
        }
    }
    if (ref == kNoVertex) throw ParameterError("green_difference_bound: no boundary-adjacent vertex");

    const double shift = u.field.at(ref) - v.field.at(ref);
    DifferenceBound out;
    for (VertexId w : u.omega) {
        if (w == u.pole) continue;
        out.sup_difference =
            std::max(out.sup_difference, std::abs(u.field.at(w) - v.field.at(w) - shift));
    }
    out.matched = out.sup_difference <= uniqueness_tol;
    return out;
}

} // namespace greenpot
