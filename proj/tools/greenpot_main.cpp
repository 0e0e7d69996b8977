// greenpot: configuration-driven runner for the discrete nonlinear
// potential-theory engine. One subcommand per experimental surface; every
// subcommand also accepts a flat key=value config file (flags win).

#include <CLI11.hpp>

#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "greenpot/calculus.hpp"
#include "greenpot/capacity.hpp"
#include "greenpot/config.hpp"
#include "greenpot/dirichlet.hpp"
#include "greenpot/global_green.hpp"
#include "greenpot/green.hpp"
#include "greenpot/opmap.hpp"
#include "greenpot/report.hpp"
#include "greenpot/space.hpp"
#include "greenpot/suites.hpp"
#include "greenpot/util.hpp"

namespace fs = std::filesystem;
using namespace greenpot;

namespace {

// ---------------------------------------------------------------------------
// shared plumbing

void write_file_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ConfigError("cannot write " + path.string());
        out << content;
    }
    fs::rename(tmp, path);
}

fs::path out_dir(const Config& cfg) {
    fs::path dir = cfg.get_string("run.out", "out");
    fs::create_directories(dir);
    return dir;
}

void write_schema(const fs::path& dir, const std::string& name,
                  const std::vector<std::string>& lines) {
    std::ostringstream ss;
    for (const auto& l : lines) ss << l << "\n";
    write_file_atomic(dir / (name + "_schema.txt"), ss.str());
}

MetricGraph load_space(const Config& cfg) {
    const std::string path = cfg.get_string("space.graph");
    if (!path.empty()) {
        if (!fs::exists(path)) throw ConfigError("space.graph: no such file: " + path);
        std::ifstream in(path);
        return MetricGraph::read_text(in);
    }
    const int dim = cfg.get_int("space.dim", 2);
    const int side = cfg.get_int("space.side", 129);
    const double spacing = cfg.get_double("space.spacing", side > 1 ? 1.0 / (side - 1) : 1.0);
    return build_grid(dim, side, spacing);
}

VertexId resolve_pole(const Config& cfg, const std::string& key, const MetricGraph& g) {
    const std::string spec = cfg.get_string(key, "center");
    if (spec == "center") {
        if (!g.has_chart()) throw ConfigError(key + ": 'center' needs a grid chart");
        std::array<int, 3> mid{};
        for (int k = 0; k < g.chart().dimension; ++k) mid[k] = (g.chart().extents[k] - 1) / 2;
        return g.chart().vertex_at(mid);
    }
    try {
        const std::size_t id = std::stoull(spec);
        if (id >= g.vertex_count()) throw ConfigError(key + ": vertex id out of range");
        return static_cast<VertexId>(id);
    } catch (const std::invalid_argument&) {
        throw ConfigError(key + ": expected 'center' or a vertex id, got " + spec);
    }
}

VertexSet interior_omega(const MetricGraph& g) {
    const GridChart& chart = g.chart();
    VertexSet omega;
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        const auto idx = chart.lattice(v);
        bool interior = true;
        for (int k = 0; k < chart.dimension; ++k)
            if (idx[k] == 0 || idx[k] == chart.extents[k] - 1) interior = false;
        if (interior) omega.push_back(v);
    }
    return omega;
}

std::string field_text(const ScalarField& u) {
    std::ostringstream ss;
    write_field(ss, u);
    return ss.str();
}

int report_exit(const Report& rep) { return rep.all_pass() ? 0 : 2; }

// mid-band field level at (approximately) the given radius
double level_at_radius(const std::vector<ProfileEntry>& profile, double r) {
    double best = 1e300, val = 0;
    for (const auto& e : profile)
        if (std::abs(e.r - r) < best) {
            best = std::abs(e.r - r);
            val = 0.5 * (e.min_value + e.max_value);
        }
    return val;
}

// ---------------------------------------------------------------------------
// subcommands

int run_solve(const Config& cfg) {
    const MetricGraph g = load_space(cfg);
    const SolverConfig scfg = cfg.solver();
    const fs::path dir = out_dir(cfg);

    DirichletProblem prob;
    prob.graph = &g;
    const std::string boundary_path = cfg.get_string("solve.boundary");
    if (!boundary_path.empty()) {
        if (!fs::exists(boundary_path))
            throw ConfigError("solve.boundary: no such file: " + boundary_path);
        std::ifstream in(boundary_path);
        prob.boundary = read_field(in, g);
        for (VertexId v = 0; v < g.vertex_count(); ++v)
            if (!prob.boundary.is_defined(v)) prob.omega.push_back(v);
    } else {
        // default experiment: first coordinate prescribed on the box faces
        prob.omega = interior_omega(g);
        prob.boundary = ScalarField(g, 0.0, false);
        for (VertexId v = 0; v < g.vertex_count(); ++v)
            if (!set_contains(prob.omega, v))
                prob.boundary.set(v, g.chart().coords(v)[0]);
    }

    const ScalarField u = solve_dirichlet(prob, scfg);
    const GradientMode mode = g.has_chart() && scfg.mode == GradientMode::chart
                                  ? GradientMode::chart
                                  : GradientMode::edge;
    const double res = residual(u, scfg.p, prob.omega, mode);
    VertexSet all;
    for (VertexId v = 0; v < g.vertex_count(); ++v) all.push_back(v);
    const double energy = p_energy(u, scfg.p, all, mode);

    write_file_atomic(out_dir(cfg) / "solution.field", field_text(u));
    std::ostringstream ss;
    ss << "quantity,value\n";
    ss << "p," << format_double(scfg.p) << "\n";
    ss << "energy," << format_double(energy) << "\n";
    ss << "residual," << format_double(res) << "\n";
    ss << "sobolev_norm," << format_double(sobolev_norm(u, scfg.p)) << "\n";
    write_file_atomic(dir / "solve_summary.csv", ss.str());
    write_schema(dir, "solve",
                 {"solution.field: vertex_id value", "solve_summary.csv: quantity,value"});
    return 0;
}

int run_capacity(const Config& cfg) {
    const MetricGraph g = load_space(cfg);
    const SolverConfig scfg = cfg.solver();
    const fs::path dir = out_dir(cfg);
    const std::string task = cfg.get_string("capacity.task", "ring");
    Report rep;

    if (task == "ring" || task == "potential" || task == "levelset") {
        const VertexId pole = resolve_pole(cfg, "capacity.pole", g);
        const double r = cfg.get_double("capacity.inner_r", 0.1);
        const double big_r = cfg.get_double("capacity.outer_r", 0.4);
        const CapacityResult res = ring_capacity(g, pole, r, big_r, scfg);
        rep.add("ring", "capacity", res.value, 0.0, 1e300);
        rep.add("ring", "solver_residual", res.residual, 0.0, 1e300);
        write_file_atomic(dir / "potential.field", field_text(res.potential));
        if (task == "levelset") {
            const double alpha = cfg.get_double("capacity.alpha", 0.25);
            const double beta = cfg.get_double("capacity.beta", 0.75);
            const LevelSetCapacity lsc = level_set_capacity(res, alpha, beta, scfg);
            rep.add("levelset", "capacity", lsc.value, 0.0, 1e300);
            rep.add("levelset", "reference", lsc.reference, 0.0, 1e300);
            rep.add("levelset", "relative_gap", lsc.gap, 0.0,
                    cfg.get_double("capacity.gap_tol", 0.02));
        }
    } else if (task == "bounds") {
        const VertexId pole = resolve_pole(cfg, "capacity.pole", g);
        auto radii = cfg.get_list("capacity.radii");
        if (radii.empty()) radii = {0.05, 0.1, 0.2};
        RingBoundsOptions opt;
        opt.r0 = cfg.get_double("capacity.r0", 0.0);
        opt.stability_tol = cfg.get_double("capacity.stability_tol", 0.3);
        rep = ring_bounds_check(g, pole, radii, cfg.get_double("capacity.outer_r", 0.45),
                                scfg, opt);
    } else if (task == "calculus") {
        rep = capacity_calculus_check(g, cfg.get_int("capacity.instances", 100),
                                      cfg.get_seed("run.seed", 7), scfg);
    } else if (task == "loewner") {
        const VertexId pole = resolve_pole(cfg, "capacity.pole", g);
        const double d = cfg.get_double("capacity.disk_r", 0.08);
        // pairs of disks at doubling separations around the pole
        std::vector<std::pair<VertexSet, VertexSet>> pairs;
        const GridChart& chart = g.chart();
        const auto mid = chart.lattice(pole);
        for (double sep = 4 * d; sep >= 0.5 * d; sep *= 0.5) {
            const int off = static_cast<int>(sep / chart.spacing / 2);
            auto at = [&](int dx) {
                auto idx = mid;
                idx[0] += dx;
                return chart.vertex_at(idx);
            };
            if (at(-off) == kNoVertex || at(off) == kNoVertex) continue;
            pairs.emplace_back(g.closed_ball(at(-off), d), g.closed_ball(at(off), d));
        }
        const LoewnerProfile prof = loewner_profile(g, pairs, scfg);
        for (const auto& pt : prof.points)
            rep.add("t=" + format_double(pt.t), "capacity", pt.cap, 0.0, 1e300);
        rep.add("loewner", "skipped_pairs", prof.skipped, 0.0, 1e300);
    } else if (task == "parabolicity") {
        // expanding domains on growing grids, fixed plate
        const int dim = cfg.get_int("space.dim", 2);
        const double spacing = cfg.get_double("space.spacing", 1.0 / 128.0);
        const double base_r = cfg.get_double("capacity.k_r", 16 * spacing);
        const int stages = cfg.get_int("capacity.stages", 4);
        const GridGenerator gen = make_square_grid_generator(dim, spacing);
        std::vector<StageGrid> grids;
        std::vector<ProbeStage> st;
        for (int i = 1; i <= stages; ++i) {
            grids.push_back(gen(base_r * std::ldexp(1.0, i)));
            st.push_back({grids.back().graph.get(), grids.back().pole,
                          base_r * std::ldexp(1.0, i)});
        }
        const std::vector<double> caps = parabolicity_probe(st, base_r, scfg);
        double prev = 1e300;
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < caps.size(); ++i) {
            rep.add("stage_" + std::to_string(i + 1), "capacity", caps[i], 0.0, prev);
            prev = caps[i];
            xs.push_back(std::log(static_cast<double>(i + 1)));
            ys.push_back(std::log(caps[i]));
        }
        rep.add("sweep", "decay_exponent", -fit_line(xs, ys).slope,
                cfg.get_double("capacity.min_exponent", 0.0), 1e300);
    } else {
        throw ConfigError("capacity.task: unknown task " + task);
    }

    std::ostringstream ss;
    rep.write_csv(ss);
    write_file_atomic(dir / "capacity.csv", ss.str());
    write_schema(dir, "capacity",
                 {"capacity.csv: instance_id,quantity,value,bound_low,bound_high,pass",
                  "potential.field: vertex_id value (task=ring/potential/levelset)"});
    return report_exit(rep);
}

std::string green_sidecar(const GreenResult& gr) {
    std::ostringstream ss;
    ss << "pole = " << gr.pole << "\n";
    ss << "p = " << format_double(gr.p) << "\n";
    ss << "lambda = " << format_double(gr.lambda) << "\n";
    ss << "pole_value = " << format_double(gr.pole_value) << "\n";
    ss << "k_constant = " << format_double(gr.k_constant) << "\n";
    for (std::size_t i = 0; i < gr.trace.size(); ++i) {
        ss << "trace." << i << ".radius = " << format_double(gr.trace[i].radius) << "\n";
        ss << "trace." << i << ".capacity = " << format_double(gr.trace[i].cap) << "\n";
        ss << "trace." << i << ".sup_change = " << format_double(gr.trace[i].sup_change)
           << "\n";
    }
    return ss.str();
}

int run_green(const Config& cfg) {
    const MetricGraph g = load_space(cfg);
    SolverConfig scfg = cfg.solver();
    const fs::path dir = out_dir(cfg);
    const VertexId pole = resolve_pole(cfg, "green.pole", g);
    const VertexSet omega = interior_omega(g);
    const int levels = cfg.get_int("green.levels", 8);
    const double scale = cfg.get_double("green.scale", 0.0);

    GreenResult gr = green_compact(g, omega, pole, scfg, levels, scale);

    auto cutoffs = cfg.get_list("green.cutoffs");
    if (cutoffs.empty()) {
        const double reach = g.metric(pole, 0); // distance to a box corner
        cutoffs = {0.2 * reach, 0.4 * reach, 0.6 * reach};
    }
    const FundamentalConstant fc = fundamental_constant(gr, cutoffs);

    // level-law samples with both contours in the resolved mid annulus
    const double h = g.chart().spacing;
    const double lo = level_at_radius(gr.profile, 0.6 * gr.trace.front().radius * 2);
    const double hi = level_at_radius(gr.profile, 8 * h);
    std::vector<std::pair<double, double>> samples{
        {lo, hi}, {lo + 0.1 * (hi - lo), lo + 0.8 * (hi - lo)},
        {lo + 0.2 * (hi - lo), lo + 0.95 * (hi - lo)}};
    GreenValidationTols tols;
    tols.levelset_tol = cfg.get_double("green.levelset_tol", 0.02);
    tols.pole_tol = cfg.get_double("green.pole_tol", 0.05);
    Report rep = validate_green(gr, samples, scfg, tols);
    rep.add("green", "k_constant", fc.k, 1.0 - cfg.get_double("green.k_tol", 0.02),
            1.0 + cfg.get_double("green.k_tol", 0.02));
    rep.add("green", "k_spread", fc.spread, 0.0, cfg.get_double("green.k_tol", 0.02));

    write_file_atomic(dir / "green.field", field_text(gr.field));
    write_file_atomic(dir / "green_meta.txt", green_sidecar(gr));
    std::ostringstream prof;
    prof << "r,m,M\n";
    for (const auto& e : gr.profile)
        prof << format_double(e.r) << "," << format_double(e.min_value) << ","
             << format_double(e.max_value) << "\n";
    write_file_atomic(dir / "green_profile.csv", prof.str());
    std::ostringstream ss;
    rep.write_csv(ss);
    write_file_atomic(dir / "green_validation.csv", ss.str());
    write_schema(dir, "green",
                 {"green.field: vertex_id value",
                  "green_meta.txt: key = value sidecar (pole, p, lambda, pole_value, "
                  "k_constant, trace.*)",
                  "green_profile.csv: r,m,M",
                  "green_validation.csv: instance_id,quantity,value,bound_low,bound_high,pass"});
    return report_exit(rep);
}

int run_global_green(const Config& cfg) {
    SolverConfig scfg = cfg.solver();
    const fs::path dir = out_dir(cfg);
    const double q = cfg.get_double("global.q", 2.0);
    const int stages = cfg.get_int("global.stages", 4);
    const int dim = cfg.get_int("space.dim", 2);
    const double spacing = cfg.get_double("space.spacing", 1.0 / 512.0);
    const double scale = cfg.get_double("global.scale", 1.0 / 32.0);
    const std::size_t budget =
        static_cast<std::size_t>(cfg.get_double("global.budget", 4e6));

    const GridGenerator gen = make_square_grid_generator(dim, spacing, budget);
    GlobalGreenResult gr = green_global(gen, q, stages, scfg, scale);

    const double h = spacing;
    const std::pair<double, double> inner{cfg.get_double("global.inner_lo", 8 * h),
                                          cfg.get_double("global.inner_hi", 2 * scale)};
    const std::pair<double, double> outer{cfg.get_double("global.outer_lo", 0.2 * gr.outer_radius),
                                          cfg.get_double("global.outer_hi", 0.8 * gr.outer_radius)};
    const LogAsymptotics fits = log_asymptotics_fit(gr, inner, outer);

    Report rep;
    const double slope_tol = cfg.get_double("global.slope_tol", 0.10);
    const double target = scfg.p == 2.0 ? 1.0 / (2 * M_PI) : fits.inner.slope;
    rep.add("fits", "inner_slope", fits.inner.slope, target * (1 - slope_tol),
            target * (1 + slope_tol));
    rep.add("fits", "outer_slope", fits.outer.slope, target * (1 - slope_tol),
            target * (1 + slope_tol));
    rep.add("fits", "slope_ratio", fits.slope_ratio, 0.0,
            cfg.get_double("global.slope_ratio_max", 1.5));
    rep.add("fits", "band_gap_inner", fits.max_band_gap_inner, 0.0, 1e300);
    rep.add("fits", "band_gap_outer", fits.max_band_gap_outer, 0.0, 1e300);

    std::vector<std::pair<double, double>> pairs;
    for (double r = 2 * scale * 0.5; r >= 8 * h; r *= 0.5)
        pairs.emplace_back(r, std::min(8 * r, 0.8 * gr.outer_radius));
    rep.append(min_max_capacity_check(gr, pairs, scfg,
                                      cfg.get_double("global.c_max", 4.0)));

    std::ostringstream trace;
    trace << "stage,r_in,r_out,m_i,M_i,divisor,overlap_change\n";
    for (std::size_t i = 0; i < gr.trace.size(); ++i) {
        const auto& t = gr.trace[i];
        trace << i + 1 << "," << format_double(t.r_in) << "," << format_double(t.r_out)
              << "," << format_double(t.m) << "," << format_double(t.big_m) << ","
              << format_double(t.divisor) << "," << format_double(t.overlap_change) << "\n";
    }
    write_file_atomic(dir / "global_trace.csv", trace.str());

    std::ostringstream fitcsv;
    fitcsv << "range,slope,intercept,residual\n";
    fitcsv << "inner," << format_double(fits.inner.slope) << ","
           << format_double(fits.inner.intercept) << ","
           << format_double(fits.inner.residual) << "\n";
    fitcsv << "outer," << format_double(fits.outer.slope) << ","
           << format_double(fits.outer.intercept) << ","
           << format_double(fits.outer.residual) << "\n";
    write_file_atomic(dir / "global_fits.csv", fitcsv.str());
    write_file_atomic(dir / "global_green.field", field_text(gr.field));
    std::ostringstream ss;
    rep.write_csv(ss);
    write_file_atomic(dir / "global_validation.csv", ss.str());
    write_schema(dir, "global-green",
                 {"global_trace.csv: stage,r_in,r_out,m_i,M_i,divisor,overlap_change",
                  "global_fits.csv: range,slope,intercept,residual",
                  "global_green.field: vertex_id value",
                  "global_validation.csv: instance_id,quantity,value,bound_low,bound_high,pass"});
    return report_exit(rep);
}

int run_verify(const Config& cfg) {
    const fs::path dir = out_dir(cfg);
    const std::string suite = cfg.get_string("verify.suite", "principles");
    SuiteOptions opts;
    opts.instances = cfg.get_int("verify.instances", 100);
    opts.seed = cfg.get_seed("run.seed", 7);
    Report rep;
    if (suite == "principles") {
        rep = run_principles_suite(opts);
    } else if (suite == "comparison") {
        rep = run_comparison_suite(opts);
    } else if (suite == "maximum") {
        rep = run_max_principle_suite(opts);
    } else if (suite == "levels") {
        rep = run_level_component_suite(opts);
    } else if (suite == "calculus") {
        rep = run_capacity_calculus_suite(opts);
    } else {
        throw ConfigError("verify.suite: unknown suite " + suite);
    }
    std::ostringstream ss;
    rep.write_csv(ss);
    write_file_atomic(dir / (suite + ".csv"), ss.str());
    write_schema(dir, "verify",
                 {suite + ".csv: instance_id,quantity,value,bound_low,bound_high,pass"});
    std::cout << suite << ": " << rep.rows.size() - rep.failures() << "/" << rep.rows.size()
              << " rows pass\n";
    return report_exit(rep);
}

int run_profile(const Config& cfg) {
    const MetricGraph g = load_space(cfg);
    const fs::path dir = out_dir(cfg);
    const VertexId pole = resolve_pole(cfg, "profile.pole", g);

    ScalarField u(g);
    const std::string field_path = cfg.get_string("profile.field");
    if (!field_path.empty()) {
        if (!fs::exists(field_path))
            throw ConfigError("profile.field: no such file: " + field_path);
        std::ifstream in(field_path);
        u = read_field(in, g);
    } else {
        for (VertexId v = 0; v < g.vertex_count(); ++v) u.values[v] = g.metric(pole, v);
    }

    auto radii = cfg.get_list("profile.radii");
    if (radii.empty()) {
        const double reach = g.metric(pole, 0);
        for (double r = 4 * g.default_band_width(); r < 0.9 * reach; r *= 1.4)
            radii.push_back(r);
    }
    const ProfileResult prof = oscillation_profile(u, pole, radii);
    std::ostringstream ss;
    ss << "r,m,M\n";
    for (const auto& e : prof.entries)
        ss << format_double(e.r) << "," << format_double(e.min_value) << ","
           << format_double(e.max_value) << "\n";
    write_file_atomic(dir / "profile.csv", ss.str());

    Report rep;
    for (double r : prof.skipped_radii) rep.add("profile", "skipped_radius", r, 0.0, 1e300);
    const double harnack_r = cfg.get_double("profile.harnack_r", 0.0);
    if (harnack_r > 0)
        rep.add("profile", "harnack_ratio", harnack_ratio(u, pole, harnack_r), 1.0, 1e300);
    if (cfg.get_int("profile.comparability", 0)) {
        const auto [lo, hi] = comparability_ratio(u);
        rep.add("profile", "comparability_min", lo, 0.0, 1e300);
        rep.add("profile", "comparability_max", hi, 0.0, 1e300);
    }
    std::ostringstream rs;
    rep.write_csv(rs);
    write_file_atomic(dir / "profile_report.csv", rs.str());
    write_schema(dir, "profile",
                 {"profile.csv: r,m,M",
                  "profile_report.csv: instance_id,quantity,value,bound_low,bound_high,pass"});
    return report_exit(rep);
}

int run_regularity(const Config& cfg) {
    const MetricGraph g = load_space(cfg);
    const fs::path dir = out_dir(cfg);
    const VertexId pole = resolve_pole(cfg, "regularity.pole", g);
    auto radii = cfg.get_list("regularity.radii");
    if (radii.empty()) {
        const double h = g.has_chart() ? g.chart().spacing : g.min_edge_length();
        radii = {8 * h, 16 * h, 32 * h, 64 * h};
    }
    const RegularityReport rep = estimate_regularity(
        g, pole, radii, cfg.get_double("solver.p", 2.0), cfg.get_seed("run.seed", 7));

    std::ostringstream ss;
    ss << "quantity,value\n";
    ss << "doubling_estimate," << format_double(rep.doubling_estimate) << "\n";
    ss << "ahlfors_q," << format_double(rep.ahlfors_q) << "\n";
    ss << "ahlfors_residual," << format_double(rep.ahlfors_residual) << "\n";
    ss << "pointwise_q," << format_double(rep.pointwise_q) << "\n";
    ss << "poincare_constant," << format_double(rep.poincare_constant) << "\n";
    write_file_atomic(dir / "regularity.csv", ss.str());

    std::ostringstream ps;
    ps << "center,radius,lhs,rhs\n";
    for (const auto& s : rep.poincare_samples)
        ps << s.center << "," << format_double(s.radius) << "," << format_double(s.lhs)
           << "," << format_double(s.rhs) << "\n";
    write_file_atomic(dir / "poincare.csv", ps.str());

    std::ostringstream gs;
    g.write_text(gs);
    write_file_atomic(dir / "space.graph", gs.str());
    write_schema(dir, "regularity",
                 {"regularity.csv: quantity,value", "poincare.csv: center,radius,lhs,rhs",
                  "space.graph: header 'vertices N edges M dim D spacing H', then "
                  "'v <id> <measure> [<coords>]' and 'e <id1> <id2> <length> <conductance>'"});
    return 0;
}

int dispatch(const Config& cfg) {
    const std::string op = cfg.get_string("run.op");
    if (op == "solve") return run_solve(cfg);
    if (op == "capacity") return run_capacity(cfg);
    if (op == "green") return run_green(cfg);
    if (op == "global-green") return run_global_green(cfg);
    if (op == "verify") return run_verify(cfg);
    if (op == "profile") return run_profile(cfg);
    if (op == "regularity") return run_regularity(cfg);
    throw ConfigError("run.op: unknown operation '" + op + "'");
}

void apply_threads(const Config& cfg) {
    int threads = cfg.get_int("run.threads", omp_get_max_threads());
    if (const char* env = std::getenv("GREENPOT_THREADS")) {
        try {
            threads = std::min(threads, std::max(1, std::stoi(env)));
        } catch (const std::exception&) {
            throw ConfigError("GREENPOT_THREADS: not an integer");
        }
    }
    omp_set_num_threads(std::max(1, threads));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete nonlinear potential-theory engine"};
    app.require_subcommand(1);

    Config cfg;
    std::string config_path;

    struct Flag {
        std::string key;
        std::string value;
        bool set = false;
    };
    // flags mirror config keys; a passed flag wins over the file
    std::vector<std::pair<CLI::Option*, Flag*>> bound;
    std::vector<std::unique_ptr<Flag>> flags;
    auto mirror = [&](CLI::App* sub, const std::string& flag, const std::string& key,
                      const std::string& desc) {
        flags.push_back(std::make_unique<Flag>());
        Flag* f = flags.back().get();
        f->key = key;
        CLI::Option* opt = sub->add_option(flag, f->value, desc);
        bound.emplace_back(opt, f);
    };

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "flat key=value config file");
        mirror(sub, "--out", "run.out", "output directory");
        mirror(sub, "--seed", "run.seed", "random seed");
        mirror(sub, "--threads", "run.threads", "parallelism cap");
        mirror(sub, "--dim", "space.dim", "grid dimension");
        mirror(sub, "--side", "space.side", "grid side");
        mirror(sub, "--spacing", "space.spacing", "grid spacing");
        mirror(sub, "--graph", "space.graph", "graph file");
        mirror(sub, "--p", "solver.p", "energy exponent");
        mirror(sub, "--mode", "solver.mode", "gradient mode: chart or edge");
        mirror(sub, "--log", "solver.log", "iteration log CSV path");
    };

    CLI::App* s_run = app.add_subcommand("run", "execute the operation selected in a config");
    s_run->add_option("--config", config_path, "flat key=value config file")->required();

    CLI::App* s_solve = app.add_subcommand("solve", "p-harmonic Dirichlet solve");
    add_common(s_solve);
    mirror(s_solve, "--boundary", "solve.boundary", "boundary data field file");

    CLI::App* s_cap = app.add_subcommand("capacity", "capacities, potentials, probes");
    add_common(s_cap);
    mirror(s_cap, "--task", "capacity.task",
           "ring | potential | levelset | bounds | calculus | loewner | parabolicity");
    mirror(s_cap, "--pole", "capacity.pole", "'center' or vertex id");
    mirror(s_cap, "--inner-r", "capacity.inner_r", "inner plate radius");
    mirror(s_cap, "--outer-r", "capacity.outer_r", "outer domain radius");
    mirror(s_cap, "--alpha", "capacity.alpha", "lower level");
    mirror(s_cap, "--beta", "capacity.beta", "upper level");
    mirror(s_cap, "--radii", "capacity.radii", "sweep radii list");
    mirror(s_cap, "--r0", "capacity.r0", "ring-estimate scale bound");
    mirror(s_cap, "--instances", "capacity.instances", "random instances");

    CLI::App* s_green = app.add_subcommand("green", "compact-domain construction");
    add_common(s_green);
    mirror(s_green, "--pole", "green.pole", "'center' or vertex id");
    mirror(s_green, "--levels", "green.levels", "shrinking-plate levels");
    mirror(s_green, "--scale", "green.scale", "initial plate scale (0 = auto)");
    mirror(s_green, "--cutoffs", "green.cutoffs", "pairing cutoff radii list");

    CLI::App* s_glob = app.add_subcommand("global-green", "expanding-domain construction");
    add_common(s_glob);
    mirror(s_glob, "--q", "global.q", "conformal exponent");
    mirror(s_glob, "--stages", "global.stages", "number of stages");
    mirror(s_glob, "--scale", "global.scale", "reference annulus scale");
    mirror(s_glob, "--budget", "global.budget", "vertex budget");

    CLI::App* s_verify = app.add_subcommand("verify", "randomized principle suites");
    add_common(s_verify);
    mirror(s_verify, "--suite", "verify.suite",
           "principles | comparison | maximum | levels | calculus");
    mirror(s_verify, "--instances", "verify.instances", "instances per suite");

    CLI::App* s_prof = app.add_subcommand("profile", "radial profiles and ratios");
    add_common(s_prof);
    mirror(s_prof, "--pole", "profile.pole", "'center' or vertex id");
    mirror(s_prof, "--field", "profile.field", "field file to profile");
    mirror(s_prof, "--radii", "profile.radii", "profile radii list");
    mirror(s_prof, "--harnack-r", "profile.harnack_r", "harnack ball radius");
    mirror(s_prof, "--comparability", "profile.comparability", "1 to report ratios");

    CLI::App* s_reg = app.add_subcommand("regularity", "doubling / dimension estimates");
    add_common(s_reg);
    mirror(s_reg, "--pole", "regularity.pole", "'center' or vertex id");
    mirror(s_reg, "--radii", "regularity.radii", "fit radii list");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) cfg = Config::load(config_path);
        for (auto& [opt, f] : bound)
            if (opt->count() > 0) cfg.set(f->key, f->value);

        apply_threads(cfg);

        CLI::App* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name != "run") cfg.set("run.op", name); // `run` keeps the config's selector
        return dispatch(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 4;
    } catch (const ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 4;
    } catch (const NonConvergenceError& e) {
        std::cerr << "solver did not converge: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
