#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "infharnack/grid_solver.hpp"
#include "infharnack/growth_profile.hpp"

namespace infharnack {

// min{1, (4 (A0 + B0))^(-1/(2 - q))}.  A0, B0 >= 0 with A0 + B0 > 0; q in [0, 1].
double r0_constant(double q, double A0, double B0);

struct HarnackReport {
    Point center{};
    double r = 0.0;
    double sup_val = 0.0;  // over grid nodes in B(center, r/3)
    double inf_val = 0.0;
    double ratio = 1.0;    // +inf when inf_val = 0 < sup_val
    double bound = 6.0;
    double slack = 0.0;
    long nodes = 0;
    bool pass = false;
    std::string reason;
};

struct HarnackOptions {
    double bound = 6.0;
    double slack_c = 2.0;               // slack = slack_c * rho / r unless `slack` is set
    std::optional<double> slack;
    // supersolution check in fixed-point units: (op - RHS) rho^2/2 <= residual_tol max(1, sup u)
    double residual_tol = 1e-8;
    std::optional<double> A0, B0;       // default: sup of the coefficient fields
};

// Ratio check only: u >= 0 near the ball and B(x0, 2r) inside the domain.
HarnackReport ball_harnack(const GridFunction& u, Point x0, double r,
                           const HarnackOptions& opt = {});
// Also requires u to be a discrete supersolution of the coefficient problem on
// B(x0, 2r) and r < r0_constant(q, A0, B0).
HarnackReport ball_harnack(const PDEProblem& problem, const GridFunction& u, Point x0, double r,
                           const HarnackOptions& opt = {});

// max(v, 0) for the barrier of radius r_zero centred at x0: vanishes on a ring
// inside B(x0, r/3) whenever r_zero < r/3.
GridFunction harnack_counterexample(GridPtr grid, Point x0, double r_zero);

struct BarrierSignResult {
    bool pass = false;
    double min_residual = 0.0;  // over the tested annulus nodes
    long nodes = 0;
};
// Residual of the barrier under the constant-coefficient right-hand side on the
// annulus rho < |x| < r of a disk grid with n nodes across.
BarrierSignResult check_barrier_sign(double q, double A0, double B0, double r, int n,
                                     const StencilOptions& stencil);

struct Annulus {
    Point center{};
    double inner = 0.25;
    double outer = 0.5;
};
using Region = std::variant<Rectangle, Disk, Annulus>;
bool region_contains(const Region& region, Point p);
std::string describe(const Region& region);

struct Est00Options {
    double t0 = 2.0;          // profile level separating the two branches
    double rel_tol = 1e-6;
    int ap2_samples = 64;
};

struct CoefficientFields {
    GridFunction A, B;
    double eps = 0.0;
    double A0 = 0.0, B0 = 0.0;        // sup over Omega'
    double omega_prime_dist = 0.0;    // Omega' = {d > omega_prime_dist}
    long omega_prime_nodes = 0;
    bool est00_checked = false;
    bool est00_pass = false;
    double est00_C = 0.0;
    double est00_worst = 0.0;         // max of lhs / bound over Omega'
    long est00_worst_node = -1;
};

// A = f(u)/(u + eps), B = g(u)/(u + eps)^(1-q) at non-exterior nodes.  region_dist is
// dist(O, boundary); Omega' = {d > region_dist / 6}.  The est-00 test needs a profile.
CoefficientFields coefficient_fields(const GridFunction& u, const NonlinearityPair& pair,
                                     double eps, double region_dist,
                                     const GrowthProfile* profile = nullptr,
                                     const Est00Options& opt = {});
// 1e-6 (1 + sup u)
double default_epsilon(const GridFunction& u);

// Lower estimate of dist(O, boundary) from the grid nodes in O.
double region_distance(const Grid2D& grid, const Region& region);

struct ChainOptions {
    int pairs = 64;
    std::uint64_t seed = 1;
    double slack_c = 2.0;
    std::optional<double> r0;  // when set, 6r < r0 is required
};

struct ChainPair {
    Point x, y;
    int ell = 0;
    double ratio = 0.0;       // u(x) / u(y)
    double log10_bound = 0.0; // (2 ell + 1) log10 K
    bool pass = false;
};

struct ChainReport {
    long m = 0;
    double r = 0.0;
    double K = 6.0;
    double region_dist = 0.0;
    int worst_ell = 0;              // ell of the pair with the largest ratio
    int max_ell = 0;
    double worst_pair_ratio = 1.0;
    double log10_K_pow_m = 0.0;     // (2m + 1) log10 K
    double observed_ratio = 1.0;    // sup_O u / inf_O u
    long ball_failures = 0;
    double worst_ball_ratio = 1.0;
    long pair_failures = 0;
    bool pass_balls = false;
    bool pass_pairs = false;
    bool pass_global = false;
    bool pass = false;
    std::vector<Point> centers;
    std::vector<ChainPair> pair_rows;
};

ChainReport chain_harnack(const GridFunction& u, const Region& region, double r, double K,
                          const ChainOptions& opt = {});

void write_ball_reports(const std::vector<HarnackReport>& reports, std::ostream& os);
void write_chain_summary(const ChainReport& rep, std::ostream& os);

}  // namespace infharnack
