#include "greenpot/dirichlet.hpp"

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "greenpot/kernels.hpp"
#include "greenpot/util.hpp"

namespace greenpot {

void SolverConfig::validate() const {
    if (!(p > 1.2) || !(p <= 10.0))
        throw ParameterError("solver: exponent p must lie in (1.2, 10], got " +
                             format_double(p));
    if (!(energy_tol > 0) || !(grad_tol > 0))
        throw ParameterError("solver: tolerances must be positive");
    if (max_iterations < 1) throw ParameterError("solver: max_iterations must be positive");
    if (!(shrink > 0) || !(shrink < 1))
        throw ParameterError("solver: line-search shrink factor must lie in (0,1)");
    if (reg_eps < 0) throw ParameterError("solver: regularization epsilon must be nonnegative");
}

namespace {

struct Workspace {
    const MetricGraph* g;
    GradientMode mode;
    double p;
    double eps;
    std::vector<std::uint8_t> mask;       // active cells (chart) or edges (edge)
    std::vector<double> values;           // dense field, boundary filled in
    std::vector<VertexId> free_list;      // = omega
    std::vector<std::int32_t> free_index; // vertex -> free slot or -1

    double energy(std::span<const double> u) const {
        return mode == GradientMode::chart
                   ? kernels::chart_energy(*g, u, mask, p, eps)
                   : kernels::edge_energy(*g, u, mask, p, eps);
    }
    void dense_gradient(std::span<const double> u, std::span<double> out) const {
        if (mode == GradientMode::chart)
            kernels::chart_energy_gradient(*g, u, mask, p, eps, out);
        else
            kernels::edge_energy_gradient(*g, u, mask, p, eps, out);
    }
};

// Validates the problem and prepares the dense value array with boundary
// data, the active cell/edge mask and the free index map.
Workspace prepare(const DirichletProblem& prob, const SolverConfig& cfg) {
    const MetricGraph& g = *prob.graph;
    if (prob.omega.empty()) throw IllPosedError("dirichlet: empty omega");
    Workspace ws;
    ws.g = &g;
    ws.p = cfg.p;
    ws.eps = cfg.reg_eps;
    ws.mode = cfg.mode;
    ws.free_list = prob.omega;
    ws.free_index.assign(g.vertex_count(), -1);
    std::vector<std::uint8_t> is_free(g.vertex_count(), 0);
    for (std::size_t i = 0; i < prob.omega.size(); ++i) {
        const VertexId v = prob.omega[i];
        if (prob.boundary.is_defined(v))
            throw IllPosedError("dirichlet: vertex " + std::to_string(v) +
                                " is both free and boundary");
        ws.free_index[v] = static_cast<std::int32_t>(i);
        is_free[v] = 1;
    }

    ws.values.assign(g.vertex_count(), 0.0);
    for (VertexId v = 0; v < g.vertex_count(); ++v)
        if (prob.boundary.is_defined(v)) ws.values[v] = prob.boundary.at(v);

    auto covered = [&](VertexId v) { return is_free[v] || prob.boundary.is_defined(v); };

    if (ws.mode == GradientMode::chart) {
        const GridChart& chart = g.chart();
        ws.mask.assign(g.vertex_count(), 0);
        for (VertexId x = 0; x < g.vertex_count(); ++x) {
            bool touches = is_free[x] != 0;
            for (int k = 0; k < chart.dimension && !touches; ++k) {
                const VertexId fwd = chart.neighbor(x, k, +1);
                if (fwd != kNoVertex && is_free[fwd]) touches = true;
            }
            if (!touches) continue;
            if (!covered(x))
                throw IllPosedError("dirichlet: stencil vertex " + std::to_string(x) +
                                    " has no boundary value");
            for (int k = 0; k < chart.dimension; ++k) {
                const VertexId fwd = chart.neighbor(x, k, +1);
                if (fwd != kNoVertex && !covered(fwd))
                    throw IllPosedError("dirichlet: stencil vertex " + std::to_string(fwd) +
                                        " has no boundary value");
            }
            ws.mask[x] = 1;
        }
    } else {
        ws.mask.assign(g.edge_count(), 0);
        for (std::size_t ei = 0; ei < g.edge_count(); ++ei) {
            const auto& e = g.edges()[ei];
            if (!is_free[e.a] && !is_free[e.b]) continue;
            if (!covered(e.a) || !covered(e.b))
                throw IllPosedError("dirichlet: stencil vertex " +
                                    std::to_string(covered(e.a) ? e.b : e.a) +
                                    " has no boundary value");
            ws.mask[ei] = 1;
        }
    }

    // Every omega component must reach boundary data through graph edges.
    std::vector<std::uint8_t> seen(g.vertex_count(), 0);
    for (VertexId start : prob.omega) {
        if (seen[start]) continue;
        std::vector<VertexId> stack{start};
        std::vector<VertexId> component;
        seen[start] = 1;
        bool touches_boundary = false;
        while (!stack.empty()) {
            const VertexId v = stack.back();
            stack.pop_back();
            component.push_back(v);
            for (std::uint32_t ei : g.incident_edges(v)) {
                const VertexId w = g.edge_other(ei, v);
                if (is_free[w] && !seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                } else if (!is_free[w] && prob.boundary.is_defined(w)) {
                    touches_boundary = true;
                }
            }
        }
        if (!touches_boundary)
            throw IllPosedError("dirichlet: omega component containing vertex " +
                                std::to_string(component.front()) +
                                " has no boundary contact");
    }
    return ws;
}

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Quadratic (p = 2) stiffness system over the free vertices.
void assemble_quadratic(const Workspace& ws, SpMat& a, Eigen::VectorXd& rhs) {
    const MetricGraph& g = *ws.g;
    const std::size_t nf = ws.free_list.size();
    std::vector<Triplet> trips;
    rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nf));

    auto add_pair = [&](VertexId x, VertexId y, double w) {
        // energy term w * (u_y - u_x)^2 contributes to the gradient system
        const std::int32_t fx = ws.free_index[x];
        const std::int32_t fy = ws.free_index[y];
        if (fx >= 0) trips.emplace_back(fx, fx, w);
        if (fy >= 0) trips.emplace_back(fy, fy, w);
        if (fx >= 0 && fy >= 0) {
            trips.emplace_back(fx, fy, -w);
            trips.emplace_back(fy, fx, -w);
        } else if (fx >= 0) {
            rhs[fx] += w * ws.values[y];
        } else if (fy >= 0) {
            rhs[fy] += w * ws.values[x];
        }
    };

    if (ws.mode == GradientMode::chart) {
        const GridChart& chart = g.chart();
        const double h2 = chart.spacing * chart.spacing;
        for (VertexId x = 0; x < g.vertex_count(); ++x) {
            if (!ws.mask[x]) continue;
            const double w = g.measure(x) / h2;
            for (int k = 0; k < chart.dimension; ++k) {
                const VertexId fwd = chart.neighbor(x, k, +1);
                if (fwd != kNoVertex) add_pair(x, fwd, w);
            }
        }
    } else {
        for (std::size_t ei = 0; ei < g.edge_count(); ++ei) {
            if (!ws.mask[ei]) continue;
            const auto& e = g.edges()[ei];
            add_pair(e.a, e.b, e.conductance / e.length);
        }
    }
    a.resize(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nf));
    a.setFromTriplets(trips.begin(), trips.end());
}

void solve_quadratic(Workspace& ws, const SolverConfig& cfg) {
    SpMat a;
    Eigen::VectorXd rhs;
    assemble_quadratic(ws, a, rhs);
    const std::size_t nf = ws.free_list.size();
    Eigen::VectorXd x;
    if (nf <= 120000) {
        Eigen::SimplicialLDLT<SpMat> ldlt(a);
        if (ldlt.info() != Eigen::Success)
            throw IllPosedError("dirichlet: quadratic factorization failed");
        x = ldlt.solve(rhs);
    } else {
        Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper,
                                 Eigen::IncompleteCholesky<double>>
            cg;
        cg.setTolerance(1e-13);
        cg.setMaxIterations(40000);
        cg.compute(a);
        x = cg.solve(rhs);
        if (cg.info() != Eigen::Success && cg.error() > 1e-10)
            throw NonConvergenceError("dirichlet: conjugate gradient stalled at error " +
                                          format_double(cg.error()),
                                      ws.values, cg.error(), 0.0);
    }
    for (std::size_t i = 0; i < nf; ++i) ws.values[ws.free_list[i]] = x[static_cast<Eigen::Index>(i)];

    if (!cfg.log_path.empty() && cfg.p == 2.0) {
        std::vector<double> grad(ws.g->vertex_count(), 0.0);
        ws.dense_gradient(ws.values, grad);
        double gmax = 0;
        for (VertexId v : ws.free_list) gmax = std::max(gmax, std::abs(grad[v]));
        std::ofstream log(cfg.log_path);
        log << "iteration,energy,residual\n";
        log << 0 << "," << format_double(ws.energy(ws.values)) << "," << format_double(gmax)
            << "\n";
    }
}

// Hessian of the regularized energy restricted to the free block.
void assemble_hessian(const Workspace& ws, std::vector<Triplet>& trips, SpMat& h) {
    const MetricGraph& g = *ws.g;
    const std::size_t nf = ws.free_list.size();
    trips.clear();

    auto add = [&](VertexId r, VertexId c, double v) {
        const std::int32_t fr = ws.free_index[r];
        const std::int32_t fc = ws.free_index[c];
        if (fr >= 0 && fc >= 0) trips.emplace_back(fr, fc, v);
    };

    if (ws.mode == GradientMode::chart) {
        const GridChart& chart = g.chart();
        const double h2 = chart.spacing * chart.spacing;
        for (VertexId x = 0; x < g.vertex_count(); ++x) {
            if (!ws.mask[x]) continue;
            double v[3];
            VertexId fwd[3];
            int cnt = 0;
            double s = ws.eps;
            for (int k = 0; k < chart.dimension; ++k) {
                const VertexId f = chart.neighbor(x, k, +1);
                if (f == kNoVertex) continue;
                v[cnt] = (ws.values[f] - ws.values[x]) / chart.spacing;
                fwd[cnt] = f;
                s += v[cnt] * v[cnt];
                ++cnt;
            }
            if (s <= 0.0) continue;
            const double mu = g.measure(x);
            const double a = mu * ws.p * std::pow(s, 0.5 * ws.p - 1.0);
            const double b = mu * ws.p * (ws.p - 2.0) * std::pow(s, 0.5 * ws.p - 2.0);
            for (int j = 0; j < cnt; ++j) {
                for (int k = 0; k < cnt; ++k) {
                    const double q = ((j == k ? a : 0.0) + b * v[j] * v[k]) / h2;
                    if (q == 0.0) continue;
                    add(fwd[j], fwd[k], q);
                    add(fwd[j], x, -q);
                    add(x, fwd[k], -q);
                    add(x, x, q);
                }
            }
        }
    } else {
        for (std::size_t ei = 0; ei < g.edge_count(); ++ei) {
            if (!ws.mask[ei]) continue;
            const auto& e = g.edges()[ei];
            const double d = (ws.values[e.b] - ws.values[e.a]) / e.length;
            const double s = d * d + ws.eps;
            if (s <= 0.0) continue;
            const double cl = e.conductance * e.length;
            const double phi2 = cl * ws.p *
                                (std::pow(s, 0.5 * ws.p - 1.0) +
                                 (ws.p - 2.0) * d * d * std::pow(s, 0.5 * ws.p - 2.0));
            const double q = phi2 / (e.length * e.length);
            add(e.a, e.a, q);
            add(e.b, e.b, q);
            add(e.a, e.b, -q);
            add(e.b, e.a, -q);
        }
    }
    h.resize(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nf));
    h.setFromTriplets(trips.begin(), trips.end());
}

void solve_newton(Workspace& ws, const SolverConfig& cfg) {
    const std::size_t nf = ws.free_list.size();
    std::vector<double> dense_grad(ws.g->vertex_count(), 0.0);
    std::vector<double> trial(ws.values.size());
    std::vector<Triplet> trips;
    SpMat hess;
    Eigen::SimplicialLDLT<SpMat> ldlt;
    bool analyzed = false;

    std::ofstream log;
    if (!cfg.log_path.empty()) {
        log.open(cfg.log_path);
        log << "iteration,energy,residual\n";
    }

    double energy = ws.energy(ws.values);
    double prev_energy = std::numeric_limits<double>::infinity();
    double gscale = 1.0; // gradient scale of the problem, set at the first iterate

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        ws.dense_gradient(ws.values, dense_grad);
        double gmax = 0;
        for (VertexId v : ws.free_list) gmax = std::max(gmax, std::abs(dense_grad[v]));
        if (iter == 0) gscale = std::max(1.0, gmax);
        if (log.is_open())
            log << iter << "," << format_double(energy) << "," << format_double(gmax) << "\n";

        const bool energy_ok =
            std::abs(prev_energy - energy) <= cfg.energy_tol * std::max(1.0, std::abs(energy));
        if (gmax <= cfg.grad_tol * gscale && (iter == 0 || energy_ok)) return;

        assemble_hessian(ws, trips, hess);
        if (!analyzed) {
            ldlt.analyzePattern(hess);
            analyzed = true;
        }
        ldlt.factorize(hess);

        Eigen::VectorXd gvec(static_cast<Eigen::Index>(nf));
        for (std::size_t i = 0; i < nf; ++i) gvec[static_cast<Eigen::Index>(i)] = dense_grad[ws.free_list[i]];

        Eigen::VectorXd dir;
        bool newton_dir = ldlt.info() == Eigen::Success;
        if (newton_dir) {
            dir = ldlt.solve(-gvec);
            if (dir.dot(gvec) >= 0) newton_dir = false; // numerical loss of descent
        }
        if (!newton_dir) dir = -gvec;

        double new_energy = energy;
        bool accepted = false;
        auto backtrack = [&](const Eigen::VectorXd& d) {
            const double slope = d.dot(gvec);
            double t = 1.0;
            while (t > 1e-16) {
                trial = ws.values;
                for (std::size_t i = 0; i < nf; ++i)
                    trial[ws.free_list[i]] += t * d[static_cast<Eigen::Index>(i)];
                new_energy = ws.energy(trial);
                // strict decrease required: at the floating-point floor the
                // Armijo bound rounds to the current energy and would accept
                // no-progress steps forever
                if (new_energy <= energy + 1e-4 * t * slope && new_energy < energy) {
                    accepted = true;
                    return;
                }
                t *= cfg.shrink;
            }
        };
        backtrack(dir);
        if (!accepted && newton_dir) backtrack(-gvec);
        if (!accepted) {
            // No representable descent along the Newton or gradient
            // direction: the iterate is the minimizer of the convex energy
            // to the accuracy double precision can certify.
            return;
        }
        ws.values.swap(trial);
        prev_energy = energy;
        energy = new_energy;
    }

    ws.dense_gradient(ws.values, dense_grad);
    double gmax = 0;
    for (VertexId v : ws.free_list) gmax = std::max(gmax, std::abs(dense_grad[v]));
    if (gmax <= cfg.grad_tol * gscale) return;
    throw NonConvergenceError("dirichlet: iteration limit " +
                                  std::to_string(cfg.max_iterations) +
                                  " exceeded, residual " + format_double(gmax),
                              ws.values, gmax, energy);
}

} // namespace

ScalarField solve_dirichlet(const DirichletProblem& prob, const SolverConfig& cfg) {
    cfg.validate();
    SolverConfig effective = cfg;
    if (effective.mode == GradientMode::chart && !prob.graph->has_chart())
        effective.mode = GradientMode::edge;

    Workspace ws = prepare(prob, effective);

    // constant boundary data: the zero-energy minimizer is that constant
    {
        bool constant = true;
        double c = 0;
        bool first = true;
        for (VertexId v = 0; v < ws.g->vertex_count(); ++v) {
            if (!prob.boundary.is_defined(v)) continue;
            if (first) {
                c = prob.boundary.at(v);
                first = false;
            } else if (prob.boundary.at(v) != c) {
                constant = false;
                break;
            }
        }
        if (constant && !first) {
            ScalarField out(*prob.graph, 0.0, false);
            for (VertexId v = 0; v < ws.g->vertex_count(); ++v)
                if (prob.boundary.is_defined(v)) out.set(v, prob.boundary.at(v));
            for (VertexId v : prob.omega) out.set(v, c);
            return out;
        }
    }

    solve_quadratic(ws, effective); // exact for p = 2, warm start otherwise
    if (effective.p != 2.0) solve_newton(ws, effective);

    ScalarField out(*prob.graph, 0.0, false);
    for (VertexId v = 0; v < ws.g->vertex_count(); ++v)
        if (prob.boundary.is_defined(v)) out.set(v, ws.values[v]);
    for (VertexId v : prob.omega) out.set(v, ws.values[v]);
    return out;
}

double residual(const ScalarField& u, double p, const VertexSet& omega,
                GradientMode mode) {
    const ScalarField grad = energy_gradient(u, p, omega, mode);
    double r = 0;
    for (VertexId v : omega) r = std::max(r, std::abs(grad.at(v)));
    return r;
}

double harnack_ratio(const ScalarField& u, VertexId x, double R) {
    const MetricGraph& g = *u.graph;
    const VertexSet big = g.ball(x, 6 * R);
    for (VertexId v : big)
        if (!(u.at(v) > 0))
            throw ParameterError("harnack_ratio: field is not positive on ball(x, 6R) at vertex " +
                                 std::to_string(v));
    const VertexSet small = g.ball(x, R);
    return u.max_over(small) / u.min_over(small);
}

ProfileResult oscillation_profile(const ScalarField& u, VertexId x0,
                                  std::span<const double> radii) {
    const MetricGraph& g = *u.graph;
    ProfileResult out;
    for (double r : radii) {
        const auto band = g.sphere_band(x0, r);
        if (!band) {
            out.skipped_radii.push_back(r);
            continue;
        }
        out.entries.push_back({r, u.min_over(*band), u.max_over(*band)});
    }
    return out;
}

} // namespace greenpot
