#include "greenpot/global_green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "greenpot/kernels.hpp"
#include "greenpot/util.hpp"

namespace greenpot {

namespace {

constexpr double kHuge = 1e300;

// Maps a vertex between two charts that share spacing, via the lattice
// offset from the respective poles. kNoVertex when outside the target box.
VertexId map_between(const GridChart& from, VertexId v, VertexId from_pole,
                     const GridChart& to, VertexId to_pole) {
    const auto iv = from.lattice(v);
    const auto ip = from.lattice(from_pole);
    auto it = to.lattice(to_pole);
    for (int k = 0; k < from.dimension; ++k) it[k] += iv[k] - ip[k];
    return to.vertex_at(it);
}

std::vector<double> geometric_ladder(double lo, double hi, double ratio) {
    std::vector<double> out;
    for (double r = lo; r <= hi * (1 + 1e-12); r *= ratio) out.push_back(r);
    return out;
}

} // namespace

GridGenerator make_square_grid_generator(int dimension, double spacing,
                                         std::size_t max_vertices) {
    return [dimension, spacing, max_vertices](double outer_radius) -> StageGrid {
        const int half = static_cast<int>(std::ceil(outer_radius / spacing)) + 2;
        const long long side = 2LL * half + 1;
        long long n = 1;
        for (int k = 0; k < dimension; ++k) n *= side;
        if (n > static_cast<long long>(max_vertices))
            throw ResourceError("stage grid of side " + std::to_string(side) + " needs " +
                                std::to_string(n) + " vertices, over the budget of " +
                                std::to_string(max_vertices));
        StageGrid sg;
        sg.graph = std::make_shared<MetricGraph>(
            build_grid(dimension, static_cast<int>(side), spacing));
        std::array<int, 3> mid{};
        for (int k = 0; k < dimension; ++k) mid[k] = half;
        sg.pole = sg.graph->chart().vertex_at(mid);
        return sg;
    };
}

GlobalGreenResult green_global(const GridGenerator& gen, double q, int stages,
                               const SolverConfig& cfg, double scale) {
    if (stages < 3) throw ParameterError("green_global: need at least 3 stages");
    if (!(scale > 0)) throw ParameterError("green_global: scale must be positive");
    SolverConfig scfg = cfg;
    scfg.p = q;
    scfg.validate();

    GlobalGreenResult out;
    out.q = q;
    out.scale = scale;

    std::shared_ptr<const MetricGraph> prev_grid;
    VertexId prev_pole = 0;
    ScalarField prev_v;

    for (int i = 1; i <= stages; ++i) {
        const double r_in = std::ldexp(scale, -i);
        const double r_out = std::ldexp(scale, i);
        StageGrid sg;
        try {
            sg = gen(r_out);
        } catch (const ResourceError& e) {
            throw ResourceError(std::string(e.what()) + "; largest feasible stage is " +
                                std::to_string(i - 1));
        }
        const MetricGraph& g = *sg.graph;

        if (i == 1) {
            // the construction is specific to the conformal exponent
            const double h = g.chart().spacing;
            std::vector<double> radii{4 * h, 8 * h, 16 * h};
            const RegularityReport reg = estimate_regularity(g, sg.pole, radii, q);
            if (std::abs(reg.ahlfors_q - q) > 0.1 * q)
                throw IllPosedError("green_global: grid Ahlfors fit " +
                                    format_double(reg.ahlfors_q) +
                                    " does not match Q = " + format_double(q));
        }

        const VertexSet omega = g.ball(sg.pole, r_out);
        VertexSet plate;
        for (VertexId v : g.closed_ball(sg.pole, r_in)) plate.push_back(v);
        const CapacityResult pot = p_potential(Condenser::relative(g, plate, omega), scfg);
        if (pot.outcome != CapacityOutcome::finite)
            throw IllPosedError("green_global: degenerate stage potential at stage " +
                                std::to_string(i));

        // min-max normalization on the fixed reference annulus [scale, 2 scale]
        const VertexSet ann_out = g.ball(sg.pole, 2 * scale);
        const VertexSet ann_in = g.ball(sg.pole, scale);
        double m = std::numeric_limits<double>::infinity();
        double big_m = -std::numeric_limits<double>::infinity();
        for (VertexId v : ann_out) {
            if (set_contains(ann_in, v)) continue;
            m = std::min(m, pot.potential.at(v));
            big_m = std::max(big_m, pot.potential.at(v));
        }
        if (!(big_m - m > 0))
            throw DegenerateError("green_global: normalization divisor vanished at stage " +
                                  std::to_string(i) + " (Harnack forbids a constant annulus)");

        ScalarField v_i(g, 0.0, true);
        for (VertexId v = 0; v < g.vertex_count(); ++v)
            v_i.values[v] = (pot.potential.at(v) - m) / (big_m - m);

        // stabilization evidence on the fixed stage-1 annulus [scale/2, 2 scale)
        double change = 0.0;
        if (prev_grid) {
            const VertexSet compact_out = prev_grid->ball(prev_pole, 2 * scale);
            const VertexSet compact_in = prev_grid->closed_ball(prev_pole, 0.5 * scale);
            for (VertexId v : compact_out) {
                if (set_contains(compact_in, v)) continue;
                const VertexId w =
                    map_between(prev_grid->chart(), v, prev_pole, g.chart(), sg.pole);
                if (w == kNoVertex) continue;
                change = std::max(change, std::abs(v_i.at(w) - prev_v.at(v)));
            }
        }
        out.trace.push_back({r_in, r_out, m, big_m, big_m - m, change});

        prev_grid = sg.graph;
        prev_pole = sg.pole;
        prev_v = std::move(v_i);
        out.grid = sg.graph;
        out.pole = sg.pole;
        out.inner_radius = r_in;
        out.outer_radius = r_out;
    }

    // Final capacity normalization: t^(1-Q) = cap({v >= s}, {v > 0}) with
    // s = 1, the sup of the stage field on the reference annulus. The
    // capacity is evaluated through the truncated field clamp(v, 0, 1), the
    // same route as the level-set identity checks, and the level pair sits
    // on the well-resolved reference annulus instead of hugging the pole.
    const MetricGraph& g = *out.grid;
    const double pole_value = prev_v.at(out.pole);
    if (!(pole_value > 0))
        throw DegenerateError("green_global: stage field is not positive at the pole");
    const double s = 1.0;
    std::size_t level_count = 0, positive_count = 0;
    std::vector<double> w_trunc(g.vertex_count());
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        const double val = prev_v.at(v);
        w_trunc[v] = std::clamp(val / s, 0.0, 1.0);
        if (val >= s) ++level_count;
        if (val > 0) ++positive_count;
    }
    if (level_count == 0 || level_count >= positive_count)
        throw DegenerateError("green_global: degenerate normalization level set");
    const double cap = kernels::chart_energy(g, w_trunc, {}, q, 0.0);
    const double t = std::pow(cap, 1.0 / (1.0 - q));
    out.lambda = t / s;

    out.field = ScalarField(g, 0.0, true);
    for (VertexId v = 0; v < g.vertex_count(); ++v)
        out.field.values[v] = out.lambda * prev_v.at(v);
    return out;
}

LogAsymptotics log_asymptotics_fit(GlobalGreenResult& gr,
                                   std::pair<double, double> inner_range,
                                   std::pair<double, double> outer_range,
                                   double max_slope_ratio) {
    for (const auto& range : {inner_range, outer_range}) {
        if (!(range.first > 0) || !(range.second >= 4 * range.first * (1 - 1e-12)))
            throw ParameterError("log_asymptotics_fit: range must span at least a factor 4");
        if (range.second > gr.outer_radius)
            throw ParameterError("log_asymptotics_fit: range exceeds the constructed domain");
    }

    LogAsymptotics out;
    auto fit_range = [&](std::pair<double, double> range, AsymptoticFit& mid,
                         AsymptoticFit& fmin, AsymptoticFit& fmax, double& max_gap) {
        const auto radii = geometric_ladder(range.first, range.second, 1.25);
        const ProfileResult prof = oscillation_profile(gr.field, gr.pole, radii);
        std::vector<double> x, ymin, ymax, ymid;
        max_gap = 0.0;
        for (const auto& e : prof.entries) {
            x.push_back(std::log(1.0 / e.r));
            ymin.push_back(e.min_value);
            ymax.push_back(e.max_value);
            ymid.push_back(0.5 * (e.min_value + e.max_value));
            max_gap = std::max(max_gap, e.max_value - e.min_value);
        }
        if (x.size() < 3) throw ParameterError("log_asymptotics_fit: too few usable radii");
        const LinearFit a = fit_line(x, ymid);
        const LinearFit b = fit_line(x, ymin);
        const LinearFit c = fit_line(x, ymax);
        mid = {a.slope, a.intercept, a.rms_residual};
        fmin = {b.slope, b.intercept, b.rms_residual};
        fmax = {c.slope, c.intercept, c.rms_residual};
    };

    fit_range(inner_range, out.inner, out.inner_min, out.inner_max, out.max_band_gap_inner);
    fit_range(outer_range, out.outer, out.outer_min, out.outer_max, out.max_band_gap_outer);

    const double slopes[4] = {out.inner_min.slope, out.inner_max.slope,
                              out.outer_min.slope, out.outer_max.slope};
    const auto [lo, hi] = std::minmax_element(std::begin(slopes), std::end(slopes));
    out.slopes_positive = *lo > 0;
    out.slope_ratio = out.slopes_positive ? *hi / *lo : kHuge;
    out.pass = out.slopes_positive && out.slope_ratio <= max_slope_ratio;

    gr.inner_fit = out.inner;
    gr.outer_fit = out.outer;
    return out;
}

Report min_max_capacity_check(const GlobalGreenResult& gr,
                              std::span<const std::pair<double, double>> pairs,
                              const SolverConfig& cfg, double c_max) {
    Report rep;
    const MetricGraph& g = *gr.grid;
    SolverConfig scfg = cfg;
    scfg.p = gr.q;
    const double exp_neg = 1.0 / (1.0 - gr.q);

    double fitted_c = 0.0;
    bool any = false;
    for (const auto& [r, big_r] : pairs) {
        const std::string id = "r=" + format_double(r) + ",R=" + format_double(big_r);
        if (!(r > 0) || !(r < big_r) || big_r > 0.95 * gr.outer_radius) {
            rep.add(id, "pair_skipped_infeasible", 0.0, 0.0, kHuge);
            continue;
        }
        const auto band_r = g.sphere_band(gr.pole, r);
        const auto band_R = g.sphere_band(gr.pole, big_r);
        if (!band_r || !band_R) {
            rep.add(id, "pair_skipped_empty_band", 0.0, 0.0, kHuge);
            continue;
        }
        const double m_r = gr.field.min_over(*band_r);
        const double m_R = gr.field.min_over(*band_R);
        const double big_m_R = gr.field.max_over(*band_R);

        const double capn =
            std::pow(ring_capacity(g, gr.pole, r, big_r, scfg).value, exp_neg);
        const double needed = (m_r - big_m_R) / capn;
        const double c_req = std::max(0.0, needed);
        fitted_c = std::max(fitted_c, c_req);
        any = true;
        rep.add(id, "upper_C_required", c_req, 0.0, c_max);

        // companion lower bound with r0 = 2r, applicable when m(r) >= M(r0)
        const double r0 = 2 * r;
        bool applicable = r0 < big_r;
        double big_m_r0 = 0;
        if (applicable) {
            const auto band_r0 = g.sphere_band(gr.pole, r0);
            applicable = band_r0.has_value();
            if (applicable) {
                big_m_r0 = gr.field.max_over(*band_r0);
                applicable = m_r >= big_m_r0;
            }
        }
        if (!applicable) {
            rep.add(id, "lower_branch_inapplicable", 0.0, 0.0, kHuge);
        } else {
            const double capn0 =
                std::pow(ring_capacity(g, gr.pole, r0, big_r, scfg).value, exp_neg);
            const double margin = m_r - m_R - capn0;
            rep.add(id, "lower_margin", margin, -1e-9, kHuge);
        }
    }
    if (any) rep.add("sweep", "fitted_C", fitted_c, 0.0, c_max);
    return rep;
}

LevelGap global_level_capacity(const GlobalGreenResult& gr, double alpha, double beta,
                               const SolverConfig& cfg) {
    (void)cfg;
    if (!(alpha < beta)) throw ParameterError("global_level_capacity: need alpha < beta");
    const MetricGraph& g = *gr.grid;
    const VertexSet rim_guard = g.ball(gr.pole, 0.97 * gr.outer_radius);
    bool any_plate = false;
    std::vector<double> w(g.vertex_count());
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        const double u = gr.field.at(v);
        w[v] = std::clamp((u - alpha) / (beta - alpha), 0.0, 1.0);
        if (u >= beta) any_plate = true;
        if (u > alpha && !set_contains(rim_guard, v))
            throw DegenerateError("global_level_capacity: level alpha = " +
                                  format_double(alpha) + " reaches the truncation rim");
    }
    if (!any_plate) throw DegenerateError("global_level_capacity: degenerate level sets");
    LevelGap out;
    out.a = alpha;
    out.b = beta;
    const double value = kernels::chart_energy(g, w, {}, gr.q, 0.0);
    const double reference = std::pow(beta - alpha, 1.0 - gr.q);
    out.gap = std::abs(value - reference) / reference;
    return out;
}

UniquenessDiagnostics uniqueness_diagnostics(const GlobalGreenResult& u,
                                             const GlobalGreenResult& v,
                                             const UniquenessOptions& opts) {
    const MetricGraph& gu = *u.grid;
    const MetricGraph& gv = *v.grid;
    if (u.q != v.q) throw ParameterError("uniqueness_diagnostics: exponents differ");
    if (gu.chart().spacing != gv.chart().spacing)
        throw ParameterError("uniqueness_diagnostics: grid spacings differ");
    if (u.scale != v.scale)
        throw ParameterError("uniqueness_diagnostics: reference scales differ (pole mismatch)");

    const double h = gu.chart().spacing;
    const bool u_smaller = u.outer_radius <= v.outer_radius;
    const GlobalGreenResult& a = u_smaller ? u : v;
    const GlobalGreenResult& b = u_smaller ? v : u;
    const MetricGraph& ga = *a.grid;
    const MetricGraph& gb = *b.grid;

    const double r_lo = opts.r_lo > 0
                            ? opts.r_lo
                            : std::max(8 * h, 3 * std::max(u.inner_radius, v.inner_radius));
    const double r_hi = opts.r_hi > 0 ? opts.r_hi : 0.8 * a.outer_radius;
    if (!(r_lo < r_hi))
        throw ParameterError("uniqueness_diagnostics: empty comparison annulus");

    const VertexSet outer = ga.ball(a.pole, r_hi);
    const VertexSet inner = ga.closed_ball(a.pole, r_lo);
    VertexSet annulus;
    for (VertexId w : outer)
        if (!set_contains(inner, w)) annulus.push_back(w);
    if (annulus.empty())
        throw ParameterError("uniqueness_diagnostics: empty comparison annulus");

    const VertexId ref = annulus.front();
    const VertexId ref_b = map_between(ga.chart(), ref, a.pole, gb.chart(), b.pole);
    if (ref_b == kNoVertex)
        throw ParameterError("uniqueness_diagnostics: domains do not overlap");
    const double shift = a.field.at(ref) - b.field.at(ref_b);

    UniquenessDiagnostics out;
    const GridChart& ca = ga.chart();
    const GridChart& cb = gb.chart();
    const int dim = ca.dimension;
    for (VertexId w : annulus) {
        const VertexId wb = map_between(ca, w, a.pole, cb, b.pole);
        if (wb == kNoVertex) continue;
        out.sup_difference = std::max(
            out.sup_difference, std::abs(a.field.at(w) - b.field.at(wb) - shift));
        // chart-cell gradient difference, Q-mass
        double s = 0;
        bool full_cell = true;
        for (int k = 0; k < dim; ++k) {
            const VertexId fa = ca.neighbor(w, k, +1);
            const VertexId fb = cb.neighbor(wb, k, +1);
            if (fa == kNoVertex || fb == kNoVertex) {
                full_cell = false;
                break;
            }
            const double da = (a.field.at(fa) - a.field.at(w)) / h;
            const double db = (b.field.at(fb) - b.field.at(wb)) / h;
            s += (da - db) * (da - db);
        }
        if (full_cell) out.gradient_lq += std::pow(s, 0.5 * u.q) * ga.measure(w);
    }
    out.q_below_2_advisory = u.q < 2.0;
    out.matched = out.sup_difference <= opts.sup_tol && out.gradient_lq <= opts.grad_tol;
    return out;
}

} // namespace greenpot
