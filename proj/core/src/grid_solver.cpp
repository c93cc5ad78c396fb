#include "infharnack/grid_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include "infharnack/errors.hpp"
#include "infharnack/format.hpp"

namespace infharnack {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Root of c + kappa R(c) = m for non-decreasing R: Newton from the previous value,
// falling back to bisection on the bracket between m and m - kappa R(m).
template <class RD>
double implicit_center(double m, double kappa, double guess, RD&& rd) {
    double lo = -kInf, hi = kInf;
    bool bracketed = false;
    double c = guess;
    for (int it = 0; it < 100; ++it) {
        auto [r, dr] = rd(c);
        const double phi = c + kappa * r - m;
        if (phi == 0.0) return c;
        if (phi > 0) hi = std::min(hi, c);
        else lo = std::max(lo, c);
        double cn = c - phi / (1.0 + kappa * dr);
        if (!(cn > lo && cn < hi) || !std::isfinite(cn)) {
            if (!bracketed) {
                const double rm = rd(m).first;
                if (rm == 0.0) return m;
                lo = std::max(lo, rm > 0 ? m - kappa * rm : m);
                hi = std::min(hi, rm > 0 ? m : m - kappa * rm);
                bracketed = true;
            }
            cn = 0.5 * (lo + hi);
        }
        if (std::abs(cn - c) <= 1e-15 * std::max(1.0, std::abs(c))) return cn;
        c = cn;
    }
    return c;
}

// Power families evaluated without the generic dispatch; other families fall back.
struct FastFn {
    const ScalarFunction* fn;
    bool power = false, odd = false;
    double c = 0.0, gamma = 0.0, offset = 0.0;

    explicit FastFn(const ScalarFunction& f) : fn(&f) {
        if (const auto* p = std::get_if<Power>(&f.family())) {
            power = true;
            odd = f.odd_extension();
            c = p->gamma == 0.0 ? 0.0 : p->c;
            gamma = p->gamma;
            offset = f.offset() + (p->gamma == 0.0 ? p->c : 0.0);
        }
    }
    static double ipow(double x, double g) {
        if (g == 1.0) return x;
        if (g == 2.0) return x * x;
        if (g == 3.0) return x * x * x;
        return std::pow(x, g);
    }
    // (value, derivative)
    std::pair<double, double> eval(double t) const {
        if (!power) return {fn->value(t), fn->derivative(t)};
        if (odd && t < 0.0) {
            auto [v, d] = eval(-t);
            return {-v, d};
        }
        if (c == 0.0) return {offset, 0.0};
        const double v = c * ipow(t, gamma) + offset;
        const double d = gamma == 1.0 ? c : c * gamma * ipow(t, gamma - 1.0);
        if (std::isnan(v) || std::isnan(d)) return {fn->value(t), fn->derivative(t)};
        return {v, d};
    }
};

// R, dR/du and dR/dG at one node.
struct RhsJet {
    double R, Ru, RG;
};

struct NonlinearNode {
    FastFn f, g;
    double q, kappa;
    bool zero, gzero;
    NonlinearNode(const NonlinearityPair& pair, double kappa_)
        : f(pair.f), g(pair.g), q(pair.q), kappa(kappa_),
          zero(pair.f.identically_zero() && pair.g.identically_zero()),
          gzero(pair.g.identically_zero()) {}
    double operator()(long, double m, double G, double guess) const {
        if (zero) return m;
        const double gq = q == 0.0 ? 1.0 : std::pow(G, q);
        return implicit_center(m, kappa, guess, [&](double c) {
            auto [fv, fd] = f.eval(c);
            if (gzero) return std::pair<double, double>{fv, fd};
            auto [gv, gd] = g.eval(c);
            return std::pair<double, double>{fv + gv * gq, fd + gd * gq};
        });
    }
    RhsJet jet(long, double u, double G) const {
        auto [fv, fd] = f.eval(u);
        if (gzero) return {fv, fd, 0.0};
        auto [gv, gd] = g.eval(u);
        const double gq = q == 0.0 ? 1.0 : std::pow(G, q);
        const double dG = q == 0.0 ? 0.0 : (q == 1.0 ? gv : gv * q * std::pow(G, q - 1.0));
        return {fv + gv * gq, fd + gd * gq, dG};
    }
};

struct CoefficientNode {
    const CoefficientRhs& rhs;
    double kappa;
    double operator()(long k, double m, double G, double guess) const {
        const double A = rhs.A[static_cast<std::size_t>(k)], B = rhs.B[static_cast<std::size_t>(k)];
        const double q = rhs.q;
        if (A == 0.0 && B == 0.0) return m;
        if (q == 0.0) return m <= 0.0 ? m : m / (1.0 + kappa * (A + B));
        if (q == 1.0) {
            // u_+^0 = 1, so the gradient term does not vanish at u = 0.
            const double c = m - kappa * B * G;
            return c <= 0.0 ? c : c / (1.0 + kappa * A);
        }
        if (m <= 0.0) return m;
        const double bg = B * std::pow(G, q);
        return implicit_center(m, kappa, std::max(guess, 0.5 * m), [&](double c) {
            if (c <= 0.0) return std::pair<double, double>{0.0, A};
            const double cq = std::pow(c, -q);
            return std::pair<double, double>{A * c + bg * c * cq, A + bg * (1.0 - q) * cq};
        });
    }
    RhsJet jet(long k, double u, double G) const {
        const double A = rhs.A[static_cast<std::size_t>(k)], B = rhs.B[static_cast<std::size_t>(k)];
        const double q = rhs.q;
        const double up = std::max(u, 0.0);
        const bool pos = u > 0.0;
        if (q == 0.0) return {(A + B) * up, pos ? A + B : 0.0, 0.0};
        if (q == 1.0) return {A * up + B * G, pos ? A : 0.0, B};
        const double gq = std::pow(G, q), uq = std::pow(up, 1.0 - q);
        return {A * up + B * gq * uq, pos ? A + B * gq * (1.0 - q) * uq / up : 0.0,
                B * q * std::pow(G, q - 1.0) * uq};
    }
};

// Semismooth Newton on F(u) = u + kappa R(u, G) - (max + min)/2 over interior nodes,
// with the max/min directions frozen per step.  The gradient coupling is capped so
// the Jacobian keeps non-positive off-diagonals.  Returns the number of steps taken.
template <class NodeSolve>
long newton_phase(const Grid2D& g, const NodeSolve& ns, double kappa, std::vector<double>& u,
                  double target, int max_steps) {
    const auto& plan = g.plan();
    const auto& taps = plan.taps;
    const int K = static_cast<int>(plan.angles.size()), T = plan.taps_per_direction;
    const double inv2rho = 0.5 / plan.rho;
    const auto& in = g.interior();
    const long n = static_cast<long>(in.size());
    std::vector<int> slot(static_cast<std::size_t>(g.size()), -1);
    for (long i = 0; i < n; ++i) slot[static_cast<std::size_t>(in[static_cast<std::size_t>(i)])] = static_cast<int>(i);

    struct Lin {
        int dmax, dmin;
        double diag, cmax, cmin;
    };
    std::vector<Lin> lin(static_cast<std::size_t>(n));
    Eigen::VectorXd F(n);
    auto evaluate = [&](const std::vector<double>& v, bool linearize) {
        std::pair<double, double> norms{0.0, 0.0};  // sup and l2
        for (long i = 0; i < n; ++i) {
            const long node = in[static_cast<std::size_t>(i)];
            double mx = -kInf, mn = kInf;
            int kmax = 0, kmin = 0;
            for (int k = 0; k < K; ++k) {
                const auto* tp = &taps[static_cast<std::size_t>(k * T)];
                double s = 0.0;
                for (int t = 0; t < T; ++t) s += tp[t].weight * v[static_cast<std::size_t>(node + tp[t].offset)];
                if (s > mx) mx = s, kmax = k;
                if (s < mn) mn = s, kmin = k;
            }
            const double G = (mx - mn) * inv2rho;
            const double c = v[static_cast<std::size_t>(node)];
            const RhsJet j = ns.jet(node, c, G);
            const double Fi = c + kappa * j.R - 0.5 * (mx + mn);
            F[i] = Fi;
            norms.first = std::max(norms.first, std::abs(Fi));
            norms.second += Fi * Fi;
            if (linearize) {
                const double grad = std::min(0.5 * (1.0 - 1e-9), kappa * j.RG * inv2rho);
                lin[static_cast<std::size_t>(i)] = {kmax, kmin,
                                                    1.0 + std::min(kappa * j.Ru, 1e12),
                                                    -0.5 + grad, -0.5 - grad};
            }
        }
        norms.second = std::sqrt(norms.second);
        return norms;
    };

    using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(1 + 2 * T));
    Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>> solver;
    solver.preconditioner().setDroptol(1e-4);
    solver.preconditioner().setFillfactor(4);
    solver.setTolerance(1e-6);
    solver.setMaxIterations(1000);
    std::vector<double> trial;

    // Steps are globalised on the l2 norm; the sup norm decides termination.
    auto phi = evaluate(u, true);
    long steps = 0;
    int slow = 0;
    for (; steps < max_steps && phi.first > target && std::isfinite(phi.second); ++steps) {
        trip.clear();
        for (long i = 0; i < n; ++i) {
            const Lin& L = lin[static_cast<std::size_t>(i)];
            const long node = in[static_cast<std::size_t>(i)];
            trip.emplace_back(i, i, L.diag);
            for (int side = 0; side < 2; ++side) {
                const int k = side == 0 ? L.dmax : L.dmin;
                const double c = side == 0 ? L.cmax : L.cmin;
                const auto* tp = &taps[static_cast<std::size_t>(k * T)];
                for (int t = 0; t < T; ++t) {
                    const int col = slot[static_cast<std::size_t>(node + tp[t].offset)];
                    if (col >= 0 && tp[t].weight != 0.0) trip.emplace_back(i, col, c * tp[t].weight);
                }
            }
        }
        SpMat J(n, n);
        J.setFromTriplets(trip.begin(), trip.end());
        solver.compute(J);
        if (solver.info() != Eigen::Success) break;
        const Eigen::VectorXd delta = solver.solve(-F);
        if (!delta.allFinite()) break;

        double lambda = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 6 && !accepted; ++ls, lambda *= 0.5) {
            trial = u;
            for (long i = 0; i < n; ++i)
                trial[static_cast<std::size_t>(in[static_cast<std::size_t>(i)])] += lambda * delta[i];
            const auto next = evaluate(trial, true);
            if (next.second < (1.0 - 1e-4 * lambda) * phi.second) {
                slow = next.second > 0.7 * phi.second ? slow + 1 : 0;
                u.swap(trial);
                phi = next;
                accepted = true;
            }
        }
        if (!accepted) {
            evaluate(u, false);
            break;
        }
        // Policy chatter between nearly tied directions: leave the rest to the sweeps.
        if (slow >= 3) {
            ++steps;
            break;
        }
    }
    return steps;
}

// One pass over the interior; returns the sup-norm update.
template <class NodeSolve>
double sweep(const Grid2D& g, const NodeSolve& solve, std::vector<double>& u,
             const std::vector<double>* old, double lambda, int order,
             const std::vector<std::size_t>& row_starts) {
    const auto& plan = g.plan();
    const auto& taps = plan.taps;
    const int K = static_cast<int>(plan.angles.size()), T = plan.taps_per_direction;
    const double inv2rho = 0.5 / plan.rho;
    const auto& interior = g.interior();
    const std::vector<double>& src = old ? *old : u;
    double maxupd = 0.0;
    auto visit = [&](long node) {
        double mx = -kInf, mn = kInf;
        for (int k = 0; k < K; ++k) {
            const auto* tp = &taps[static_cast<std::size_t>(k * T)];
            double v = 0.0;
            for (int t = 0; t < T; ++t) v += tp[t].weight * src[static_cast<std::size_t>(node + tp[t].offset)];
            mx = std::max(mx, v);
            mn = std::min(mn, v);
        }
        const double cur = src[static_cast<std::size_t>(node)];
        const double c = solve(node, 0.5 * (mx + mn), (mx - mn) * inv2rho, cur);
        const double nv = lambda == 1.0 ? c : (1.0 - lambda) * cur + lambda * c;
        maxupd = std::max(maxupd, std::abs(nv - cur));
        u[static_cast<std::size_t>(node)] = nv;
    };
    const std::size_t rows = row_starts.size() - 1;
    const bool rev_rows = order & 2, rev_cols = order & 1;
    for (std::size_t rr = 0; rr < rows; ++rr) {
        const std::size_t r = rev_rows ? rows - 1 - rr : rr;
        const std::size_t a = row_starts[r], b = row_starts[r + 1];
        if (rev_cols)
            for (std::size_t i = b; i-- > a;) visit(interior[i]);
        else
            for (std::size_t i = a; i < b; ++i) visit(interior[i]);
    }
    return maxupd;
}

template <class NodeSolve>
SolveResult run_solver(const PDEProblem& p, const GridFunction& initial, const SolverOptions& opt,
                       const NodeSolve& solve, double kappa) {
    const Grid2D& g = *p.grid;
    SolveResult res;
    res.u = initial;
    double scale = 1.0;
    for (long k : g.boundary()) scale = std::max(scale, std::abs(p.boundary[static_cast<std::size_t>(k)]));
    for (long k : g.boundary()) res.u[k] = p.boundary[static_cast<std::size_t>(k)];

    std::vector<std::size_t> row_starts{0};
    const auto& in = g.interior();
    for (std::size_t i = 1; i < in.size(); ++i)
        if (g.row(in[i]) != g.row(in[i - 1])) row_starts.push_back(i);
    row_starts.push_back(in.size());

    double lambda = opt.damping;
    if (!(lambda > 0.0 && lambda <= 1.0)) throw ArgumentError("damping must lie in (0, 1]");
    if (opt.newton && !g.interior().empty()) {
        const GridFunction before = res.u;
        try {
            res.newton_steps = newton_phase(g, solve, kappa, res.u.values, 0.1 * opt.tol * scale,
                                            opt.newton_max_steps);
        } catch (const DomainError&) {
            res.u.values.assign(res.u.values.size(), kNaN);
        }
        if (!std::all_of(res.u.values.begin(), res.u.values.end(), [](double v) { return std::isfinite(v); }))
            res.u = before;
    }
    const GridFunction start = res.u;
    std::vector<double> scratch;
    int growing = 0;
    double prev = kInf;
    for (long it = 0; it < opt.max_iter; ++it) {
        double upd;
        try {
            if (opt.sweep == SweepMode::Jacobi) {
                scratch = res.u.values;
                upd = sweep(g, solve, res.u.values, &scratch, lambda, 0, row_starts);
            } else {
                upd = sweep(g, solve, res.u.values, nullptr, lambda, static_cast<int>(it % 4), row_starts);
            }
        } catch (const DomainError&) {
            upd = kNaN;  // nonlinearity evaluated at a non-finite iterate
        }
        res.history.push_back(upd);
        res.iterations = it + 1;
        if (!std::isfinite(upd)) {
            lambda *= 0.5;
            res.u = start;
            growing = 0;
            prev = kInf;
            if (lambda < 1.0 / 1024) throw DivergenceError("solver produced non-finite values", res.history);
            continue;
        }
        if (upd < opt.tol * scale) {
            res.converged = true;
            break;
        }
        growing = upd > prev ? growing + 1 : 0;
        prev = upd;
        if (growing >= opt.divergence_window) {
            lambda *= 0.5;
            growing = 0;
            if (lambda < 1.0 / 1024)
                throw DivergenceError("update grew for " + std::to_string(opt.divergence_window) +
                                          " iterations at every damping down to 1/1024",
                                      res.history);
        }
    }
    res.damping = lambda;
    return res;
}

}  // namespace

std::vector<double> boundary_values(const Grid2D& g, const PointFunction& data, BoundaryMode mode) {
    std::vector<double> b(static_cast<std::size_t>(g.size()), 0.0);
    for (long k : g.boundary()) {
        const Point p = g.node(k);
        b[static_cast<std::size_t>(k)] =
            data(mode == BoundaryMode::Exact ? p : project_to_boundary(g.domain(), p));
    }
    return b;
}

CoefficientRhs coefficient_rhs(const Grid2D& g, const PointFunction& A, const PointFunction& B,
                               double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("coefficient form needs 0 <= q <= 1");
    CoefficientRhs r;
    r.q = q;
    r.A.assign(static_cast<std::size_t>(g.size()), 0.0);
    r.B.assign(static_cast<std::size_t>(g.size()), 0.0);
    for (long k : g.interior()) {
        const Point p = g.node(k);
        const double a = A(p), b = B(p);
        if (!(a >= 0.0) || !(b >= 0.0))
            throw ArgumentError("coefficients must be non-negative; A = " + fmt(a) + ", B = " +
                                fmt(b) + " at (" + fmt(p.x) + ", " + fmt(p.y) + ")");
        r.A[static_cast<std::size_t>(k)] = a;
        r.B[static_cast<std::size_t>(k)] = b;
    }
    return r;
}

PDEProblem make_problem(GridPtr grid, Rhs rhs, const PointFunction& data, BoundaryMode mode) {
    if (const auto* nl = std::get_if<NonlinearRhs>(&rhs); nl && nl->pair.q > 1.0)
        throw ArgumentError("grid problems need q <= 1");
    if (const auto* c = std::get_if<CoefficientRhs>(&rhs)) {
        if (static_cast<long>(c->A.size()) != grid->size() || static_cast<long>(c->B.size()) != grid->size())
            throw ArgumentError("coefficient fields do not match the grid");
        for (long k : grid->interior())
            if (c->A[static_cast<std::size_t>(k)] < 0.0 || c->B[static_cast<std::size_t>(k)] < 0.0)
                throw ArgumentError("coefficients must be non-negative");
    }
    auto b = boundary_values(*grid, data, mode);
    for (long k : grid->boundary())
        if (!std::isfinite(b[static_cast<std::size_t>(k)]))
            throw ArgumentError("boundary data must be finite");
    return PDEProblem{std::move(grid), std::move(rhs), std::move(b)};
}

double rhs_value(const Rhs& rhs, long node, double u, double G) {
    if (const auto* nl = std::get_if<NonlinearRhs>(&rhs)) {
        const auto& p = nl->pair;
        return p.f(u) + p.g(u) * std::pow(G, p.q);
    }
    const auto& c = std::get<CoefficientRhs>(rhs);
    const double up = std::max(u, 0.0);
    return c.A[static_cast<std::size_t>(node)] * up +
           c.B[static_cast<std::size_t>(node)] * std::pow(G, c.q) * std::pow(up, 1.0 - c.q);
}

GridFunction initial_guess(const PDEProblem& problem) {
    const auto& g = *problem.grid;
    GridFunction u(problem.grid);
    for (long k : g.boundary()) u[k] = problem.boundary[static_cast<std::size_t>(k)];
    // Nearest boundary node value, found through the projected boundary point.
    const double h = g.spacing();
    for (long k : g.interior()) {
        const Point b = project_to_boundary(g.domain(), g.node(k));
        const int i = static_cast<int>(std::lround((b.x - g.origin().x) / h));
        const int j = static_cast<int>(std::lround((b.y - g.origin().y) / h));
        const long m = g.index(std::clamp(i, 0, g.nx() - 1), std::clamp(j, 0, g.ny() - 1));
        u[k] = g.kind(m) == NodeKind::Boundary ? problem.boundary[static_cast<std::size_t>(m)] : 0.0;
    }
    return u;
}

SolveResult solve_dirichlet(const PDEProblem& problem, const GridFunction& initial,
                            const SolverOptions& opt) {
    if (initial.grid != problem.grid) throw ArgumentError("initial guess lives on a different grid");
    const double kappa = 0.5 * problem.grid->rho() * problem.grid->rho();
    if (const auto* nl = std::get_if<NonlinearRhs>(&problem.rhs)) {
        NonlinearNode ns(nl->pair, kappa);
        return run_solver(problem, initial, opt, ns, kappa);
    }
    CoefficientNode cs{std::get<CoefficientRhs>(problem.rhs), kappa};
    return run_solver(problem, initial, opt, cs, kappa);
}

SolveResult solve_dirichlet(const PDEProblem& problem, const SolverOptions& opt) {
    return solve_dirichlet(problem, initial_guess(problem), opt);
}

ResidualField residual(const PDEProblem& problem, const GridFunction& u) {
    return residual(problem, u, problem.grid->plan());
}

ResidualField residual(const PDEProblem& problem, const GridFunction& u, const StencilPlan& plan) {
    ResidualField r;
    r.field = GridFunction(problem.grid);
    r.min = kInf;
    r.max = -kInf;
    for (long k : problem.grid->interior()) {
        const auto s = stencil_extrema(u, k, plan);
        const double v = s.op - rhs_value(problem.rhs, k, u[k], s.grad);
        r.field[k] = v;
        r.sup = std::max(r.sup, std::abs(v));
        r.min = std::min(r.min, v);
        r.max = std::max(r.max, v);
    }
    return r;
}

BarrierValue barrier_v(double r, Point x) {
    if (!(r > 0.0)) throw ArgumentError("barrier radius must be positive");
    const double n = std::hypot(x.x, x.y);
    if (n == 0.0) throw DomainError("barrier operator is singular at the origin");
    if (n > r) throw DomainError("barrier evaluated outside its ball: |x| = " + fmt(n) + " > r = " + fmt(r));
    return {std::sqrt(r) - std::sqrt(n), 0.25 * std::pow(n, -1.5)};
}

double barrier_w(double u_center, double r, Point x_center, Point z) {
    if (!(r > 0.0)) throw ArgumentError("barrier radius must be positive");
    if (!(u_center >= 0.0)) throw ArgumentError("barrier needs u(x) >= 0");
    const double d = distance(x_center, z);
    if (d > r) throw DomainError("barrier evaluated outside its ball");
    return u_center * (std::sqrt(r) - std::sqrt(d)) / std::sqrt(r);
}

namespace {
// Separately built grids with identical layout count as the same grid.
bool same_layout(const GridPtr& a, const GridPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return a->nx() == b->nx() && a->ny() == b->ny() && a->spacing() == b->spacing() &&
           a->origin().x == b->origin().x && a->origin().y == b->origin().y &&
           a->mask() == b->mask();
}
}  // namespace

ComparisonResult check_comparison(const GridFunction& u_sub, const GridFunction& v_super,
                                  double tol) {
    if (!same_layout(u_sub.grid, v_super.grid)) throw ArgumentError("comparison needs a common grid");
    const auto& g = *u_sub.grid;
    for (long k : g.boundary())
        if (u_sub[k] > v_super[k])
            throw PreconditionError("boundary ordering violated at node " + std::to_string(k) +
                                    ": " + fmt(u_sub[k]) + " > " + fmt(v_super[k]));
    ComparisonResult res;
    res.worst_violation = -kInf;
    for (long k : g.interior()) {
        const double v = u_sub[k] - v_super[k];
        if (v > res.worst_violation) {
            res.worst_violation = v;
            res.worst_node = k;
        }
    }
    res.pass = res.worst_violation <= tol;
    return res;
}

ComparisonResult check_comparison(const PDEProblem& sub_problem, const GridFunction& u_sub,
                                  const PDEProblem& super_problem, const GridFunction& v_super,
                                  double tol, double residual_tol) {
    auto scale = [](const PDEProblem& p, const GridFunction& u) {
        double m = 1.0;
        for (long k = 0; k < p.grid->size(); ++k)
            if (p.grid->kind(k) != NodeKind::Exterior) m = std::max(m, std::abs(u[k]));
        return 0.5 * p.grid->rho() * p.grid->rho() / m;
    };
    const auto rs = residual(sub_problem, u_sub);
    if (rs.min * scale(sub_problem, u_sub) < -residual_tol)
        throw PreconditionError("first argument is not a discrete subsolution: residual " + fmt(rs.min));
    const auto rv = residual(super_problem, v_super);
    if (rv.max * scale(super_problem, v_super) > residual_tol)
        throw PreconditionError("second argument is not a discrete supersolution: residual " + fmt(rv.max));
    return check_comparison(u_sub, v_super, tol);
}

GlobalBoundResult check_global_bound(const GridFunction& u, const GrowthProfile& profile,
                                     double tol, double slack_c) {
    if (!profile.ko_holds())
        throw PreconditionError("global bound undefined: Keller-Osserman integral diverges");
    const auto& g = *u.grid;
    GlobalBoundResult res;
    res.slack = slack_c * g.rho();
    res.margin = GridFunction(u.grid);
    res.bound = GridFunction(u.grid);
    res.worst_margin = kInf;
    std::map<double, double> cache;
    for (long k : g.interior()) {
        const double d = g.dist(k);
        auto it = cache.find(d);
        if (it == cache.end()) it = cache.emplace(d, profile.q_bound(d)).first;
        const double m = it->second * (1.0 + tol) + res.slack - u[k];
        res.bound[k] = it->second;
        res.margin[k] = m;
        if (m < res.worst_margin) {
            res.worst_margin = m;
            res.worst_node = k;
        }
    }
    res.pass = res.worst_margin >= 0.0;
    return res;
}

PDEProblem build_problem(const DirichletSpec& spec, GridPtr grid) {
    if (!spec.boundary) throw ArgumentError("Dirichlet spec needs boundary data");
    if (spec.pair) return make_problem(std::move(grid), NonlinearRhs{*spec.pair}, spec.boundary, spec.mode);
    if (!spec.A || !spec.B) throw ArgumentError("Dirichlet spec needs a pair or coefficients A, B");
    auto c = coefficient_rhs(*grid, spec.A, spec.B, spec.q);
    return make_problem(std::move(grid), std::move(c), spec.boundary, spec.mode);
}

CascadeResult solve_cascade(const DirichletSpec& spec, int n, const SolverOptions& opt,
                            int coarsest) {
    std::vector<int> levels{n};
    while ((levels.back() - 1) % 2 == 0 && (levels.back() - 1) / 2 + 1 >= coarsest)
        levels.push_back((levels.back() - 1) / 2 + 1);
    std::reverse(levels.begin(), levels.end());

    CascadeResult out;
    std::optional<GridFunction> coarse;
    for (int nl : levels) {
        auto grid = make_grid(spec.domain, nl, spec.stencil);
        auto problem = build_problem(spec, grid);
        GridFunction init = initial_guess(problem);
        if (coarse) {
            for (long k : grid->interior()) init[k] = interpolate(*coarse, grid->node(k), Interp::Linear);
        }
        auto res = solve_dirichlet(problem, init, opt);
        out.total_iterations += res.iterations;
        coarse = res.u;
        out.problem = std::move(problem);
        out.result = std::move(res);
    }
    return out;
}

}  // namespace infharnack
