#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "infharnack/growth_profile.hpp"
#include "infharnack/grid.hpp"
#include "infharnack/nonlinearity.hpp"
#include "infharnack/stencil.hpp"

namespace infharnack {

// Right-hand side f(u) + g(u) |Du|^q.
struct NonlinearRhs {
    NonlinearityPair pair;
};

// Right-hand side A(x) u + B(x) |Du|^q |u|^(1-q), with per-node coefficients.
struct CoefficientRhs {
    std::vector<double> A;
    std::vector<double> B;
    double q = 0.0;
};

using Rhs = std::variant<NonlinearRhs, CoefficientRhs>;

enum class BoundaryMode {
    Projected,  // data at the nearest boundary point
    Exact       // data evaluated at the node itself
};

struct PDEProblem {
    GridPtr grid;
    Rhs rhs;
    std::vector<double> boundary;  // read at Boundary nodes only
};

using PointFunction = std::function<double(Point)>;

std::vector<double> boundary_values(const Grid2D& g, const PointFunction& data,
                                    BoundaryMode mode = BoundaryMode::Projected);
CoefficientRhs coefficient_rhs(const Grid2D& g, const PointFunction& A, const PointFunction& B,
                               double q);
PDEProblem make_problem(GridPtr grid, Rhs rhs, const PointFunction& data,
                        BoundaryMode mode = BoundaryMode::Projected);

// RHS evaluated at a node for value u and gradient magnitude G.  Negative u is clamped
// to zero inside the coefficient form only.
double rhs_value(const Rhs& rhs, long node, double u, double G);

enum class SweepMode { GaussSeidel, Jacobi };

struct SolverOptions {
    double tol = 1e-10;  // sup-norm update, relative to max(1, sup |boundary data|)
    long max_iter = 200000;
    double damping = 1.0;
    SweepMode sweep = SweepMode::GaussSeidel;
    int divergence_window = 50;
    // Semismooth Newton steps on the fixed-point equation before the sweeps; the sweeps
    // still decide convergence.
    bool newton = true;
    int newton_max_steps = 40;
};

struct SolveResult {
    GridFunction u;
    std::vector<double> history;  // sup-norm update per iteration
    long iterations = 0;     // fixed-point sweeps
    long newton_steps = 0;
    bool converged = false;
    double damping = 1.0;  // final damping after any automatic halving
};

// Boundary data on Boundary nodes, nearest-boundary data inside.
GridFunction initial_guess(const PDEProblem& problem);

SolveResult solve_dirichlet(const PDEProblem& problem, const GridFunction& initial,
                            const SolverOptions& opt = {});
SolveResult solve_dirichlet(const PDEProblem& problem, const SolverOptions& opt = {});

struct ResidualField {
    double sup = 0.0;    // max |op - RHS| over interior nodes
    double min = 0.0;    // most negative op - RHS
    double max = 0.0;    // most positive op - RHS
    GridFunction field;  // signed op - RHS at interior nodes, 0 elsewhere
};

ResidualField residual(const PDEProblem& problem, const GridFunction& u);
ResidualField residual(const PDEProblem& problem, const GridFunction& u, const StencilPlan& plan);

struct BarrierValue {
    double value;
    double op;  // exact normalized infinity-Laplacian
};

// r^(1/2) - |x|^(1/2) and its operator 1/4 |x|^(-3/2).
BarrierValue barrier_v(double r, Point x);
// u_center (r^(1/2) - |z - x_center|^(1/2)) / r^(1/2).
double barrier_w(double u_center, double r, Point x_center, Point z);

struct ComparisonResult {
    bool pass = false;
    double worst_violation = 0.0;  // max of u_sub - v_super over interior nodes
    long worst_node = -1;
};

ComparisonResult check_comparison(const GridFunction& u_sub, const GridFunction& v_super,
                                  double tol);

// Also verifies the residual signs: sub >= -residual_tol, super <= residual_tol, with the
// residual in fixed-point units (op - RHS) rho^2/2 / max(1, sup |u|).
ComparisonResult check_comparison(const PDEProblem& sub_problem, const GridFunction& u_sub,
                                  const PDEProblem& super_problem, const GridFunction& v_super,
                                  double tol, double residual_tol);

struct GlobalBoundResult {
    bool pass = false;
    double slack = 0.0;         // c * rho
    double worst_margin = 0.0;  // min over interior of bound - u
    long worst_node = -1;
    GridFunction margin;        // Q(d)(1 + tol) + slack - u at interior nodes
    GridFunction bound;         // Q(d) at interior nodes
};

GlobalBoundResult check_global_bound(const GridFunction& u, const GrowthProfile& profile,
                                     double tol = 1e-6, double slack_c = 1.0);

// Problem description independent of resolution, for coarse-to-fine solves.
struct DirichletSpec {
    Domain domain = Rectangle{};
    StencilOptions stencil{};
    PointFunction boundary;
    BoundaryMode mode = BoundaryMode::Projected;
    std::optional<NonlinearityPair> pair;  // nonlinear mode when set
    PointFunction A, B;                   // coefficient mode otherwise
    double q = 0.0;
};

PDEProblem build_problem(const DirichletSpec& spec, GridPtr grid);

struct CascadeResult {
    PDEProblem problem;
    SolveResult result;
    long total_iterations = 0;
};

// Solves on nested grids n_k = (n - 1)/2^k + 1 down to about `coarsest` nodes and uses
// each solution, bilinearly interpolated, as the next initial guess.
CascadeResult solve_cascade(const DirichletSpec& spec, int n, const SolverOptions& opt = {},
                            int coarsest = 17);

}  // namespace infharnack
