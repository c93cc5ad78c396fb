#include "infharnack/harnack.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "infharnack/errors.hpp"
#include "infharnack/format.hpp"

namespace infharnack {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Visits every non-exterior node within distance `radius` of p.
template <class Fn>
void for_nodes_in_ball(const Grid2D& g, Point p, double radius, Fn&& fn) {
    const double h = g.spacing();
    const Point o = g.origin();
    const int i0 = std::max(0, static_cast<int>(std::floor((p.x - radius - o.x) / h)));
    const int i1 = std::min(g.nx() - 1, static_cast<int>(std::ceil((p.x + radius - o.x) / h)));
    const int j0 = std::max(0, static_cast<int>(std::floor((p.y - radius - o.y) / h)));
    const int j1 = std::min(g.ny() - 1, static_cast<int>(std::ceil((p.y + radius - o.y) / h)));
    const double r2 = radius * radius * (1.0 + 1e-12);
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            const long k = g.index(i, j);
            const Point q = g.node(k);
            const double dx = q.x - p.x, dy = q.y - p.y;
            if (dx * dx + dy * dy <= r2) fn(k);
        }
}

double sup_field(const std::vector<double>& v, const Grid2D& g) {
    double s = 0.0;
    for (long k = 0; k < g.size(); ++k)
        if (g.kind(k) != NodeKind::Exterior) s = std::max(s, v[static_cast<std::size_t>(k)]);
    return s;
}

}  // namespace

double r0_constant(double q, double A0, double B0) {
    if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("r0: q must lie in [0, 1], got " + fmt(q));
    if (!(A0 >= 0.0) || !(B0 >= 0.0) || !(A0 + B0 > 0.0))
        throw ArgumentError("r0: need A0, B0 >= 0 with A0 + B0 > 0");
    if (!std::isfinite(A0 + B0)) return 0.0;
    return std::min(1.0, std::pow(4.0 * (A0 + B0), -1.0 / (2.0 - q)));
}

HarnackReport ball_harnack(const GridFunction& u, Point x0, double r, const HarnackOptions& opt) {
    if (!(r > 0.0)) throw ArgumentError("ball radius must be positive, got " + fmt(r));
    const Grid2D& g = *u.grid;
    if (signed_distance(g.domain(), x0) < 2.0 * r * (1.0 - 1e-9))
        throw PreconditionError("B(x0, 2r) is not contained in the domain (x0 = (" + fmt(x0.x) +
                                ", " + fmt(x0.y) + "), r = " + fmt(r) + ")");
    double neg = 0.0, scale = 0.0;
    for_nodes_in_ball(g, x0, 2.0 * r, [&](long k) {
        neg = std::min(neg, u[k]);
        scale = std::max(scale, std::abs(u[k]));
    });
    if (neg < -1e-12 * std::max(1.0, scale))
        throw PreconditionError("u takes the negative value " + fmt(neg) + " in B(x0, 2r)");

    HarnackReport rep;
    rep.center = x0;
    rep.r = r;
    rep.bound = opt.bound;
    rep.slack = opt.slack ? *opt.slack : opt.slack_c * g.rho() / r;
    rep.sup_val = -kInf;
    rep.inf_val = kInf;
    for_nodes_in_ball(g, x0, r / 3.0, [&](long k) {
        const double v = std::max(0.0, u[k]);
        rep.sup_val = std::max(rep.sup_val, v);
        rep.inf_val = std::min(rep.inf_val, v);
        ++rep.nodes;
    });
    if (rep.nodes == 0) throw PreconditionError("B(x0, r/3) contains no grid node");
    if (rep.inf_val > 0.0) rep.ratio = rep.sup_val / rep.inf_val;
    else rep.ratio = rep.sup_val > 0.0 ? kInf : 1.0;
    rep.pass = rep.ratio <= rep.bound * (1.0 + rep.slack);
    if (rep.pass) rep.reason = "ratio within bound";
    else if (std::isinf(rep.ratio)) rep.reason = "u vanishes in the ball while sup > 0: infinite ratio";
    else rep.reason = "ratio " + fmt(rep.ratio) + " exceeds " + fmt(rep.bound * (1.0 + rep.slack));
    return rep;
}

HarnackReport ball_harnack(const PDEProblem& problem, const GridFunction& u, Point x0, double r,
                           const HarnackOptions& opt) {
    const auto* c = std::get_if<CoefficientRhs>(&problem.rhs);
    if (!c) throw PreconditionError("per-ball Harnack needs a coefficient right-hand side");
    const Grid2D& g = *problem.grid;
    const double A0 = opt.A0 ? *opt.A0 : sup_field(c->A, g);
    const double B0 = opt.B0 ? *opt.B0 : sup_field(c->B, g);
    const double r0 = r0_constant(c->q, A0, B0);
    if (!(r < r0))
        throw PreconditionError("radius " + fmt(r) + " is not below r0 = " + fmt(r0));
    const auto res = residual(problem, u);
    double worst = -kInf;
    for_nodes_in_ball(g, x0, 2.0 * r, [&](long k) {
        if (g.kind(k) == NodeKind::Interior) worst = std::max(worst, res.field[k]);
    });
    const double allowed =
        opt.residual_tol * std::max(1.0, sup_field(u.values, g)) * 2.0 / (g.rho() * g.rho());
    if (worst > allowed)
        throw PreconditionError("u is not a discrete supersolution near the ball: residual " +
                                fmt(worst) + " > " + fmt(allowed));
    return ball_harnack(u, x0, r, opt);
}

GridFunction harnack_counterexample(GridPtr grid, Point x0, double r_zero) {
    if (!(r_zero > 0.0)) throw ArgumentError("counterexample radius must be positive");
    const double s = std::sqrt(r_zero);
    return sample(std::move(grid), [&](Point p) {
        return std::max(0.0, s - std::sqrt(distance(p, x0)));
    });
}

BarrierSignResult check_barrier_sign(double q, double A0, double B0, double r, int n,
                                     const StencilOptions& stencil) {
    if (!(r > 0.0)) throw ArgumentError("barrier radius must be positive");
    auto grid = make_grid(Disk{{0.0, 0.0}, r}, n, stencil);
    const double sr = std::sqrt(r);
    const auto v = sample(grid, [&](Point p) { return sr - std::sqrt(std::hypot(p.x, p.y)); });
    PDEProblem prob{grid,
                    CoefficientRhs{std::vector<double>(grid->size(), A0),
                                   std::vector<double>(grid->size(), B0), q},
                    std::vector<double>(grid->size(), 0.0)};
    const auto res = residual(prob, v);
    BarrierSignResult out;
    out.min_residual = kInf;
    const double inner = 2.0 * grid->rho();
    for (long k : grid->interior()) {
        const Point p = grid->node(k);
        if (std::hypot(p.x, p.y) <= inner) continue;
        out.min_residual = std::min(out.min_residual, res.field[k]);
        ++out.nodes;
    }
    if (out.nodes == 0) throw ArgumentError("barrier grid too coarse: no annulus nodes");
    out.pass = out.min_residual > 0.0;
    return out;
}

bool region_contains(const Region& region, Point p) {
    return std::visit(
        [&](const auto& o) -> bool {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, Annulus>) {
                const double d = distance(p, o.center);
                return d > o.inner && d < o.outer;
            } else {
                return contains(Domain{o}, p);
            }
        },
        region);
}

std::string describe(const Region& region) {
    std::ostringstream os;
    std::visit(
        [&](const auto& o) {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, Annulus>)
                os << "annulus center (" << fmt(o.center.x) << ", " << fmt(o.center.y)
                   << ") radii " << fmt(o.inner) << " " << fmt(o.outer);
            else if constexpr (std::is_same_v<T, Disk>)
                os << "disk center (" << fmt(o.center.x) << ", " << fmt(o.center.y) << ") radius "
                   << fmt(o.radius);
            else
                os << "rectangle " << fmt(o.x0) << " " << fmt(o.y0) << " " << fmt(o.x1) << " "
                   << fmt(o.y1);
        },
        region);
    return os.str();
}

double default_epsilon(const GridFunction& u) {
    return 1e-6 * (1.0 + sup_field(u.values, *u.grid));
}

CoefficientFields coefficient_fields(const GridFunction& u, const NonlinearityPair& pair,
                                     double eps, double region_dist,
                                     const GrowthProfile* profile, const Est00Options& opt) {
    if (!(eps > 0.0)) throw ArgumentError("epsilon must be positive, got " + fmt(eps));
    if (!(region_dist > 0.0)) throw ArgumentError("dist(O, boundary) must be positive");
    const Grid2D& g = *u.grid;
    const double q = pair.q;
    CoefficientFields cf;
    cf.eps = eps;
    cf.A = GridFunction(u.grid);
    cf.B = GridFunction(u.grid);
    cf.omega_prime_dist = region_dist / 6.0;
    std::vector<long> prime;
    for (long k = 0; k < g.size(); ++k) {
        if (g.kind(k) == NodeKind::Exterior) continue;
        const double uk = u[k];
        if (uk < -1e-12 * std::max(1.0, eps))
            throw PreconditionError("coefficient fields need u >= 0; u = " + fmt(uk));
        const double v = std::max(0.0, uk);
        cf.A[k] = pair.f(v) / (v + eps);
        cf.B[k] = pair.g(v) / std::pow(v + eps, 1.0 - q);
        if (g.kind(k) == NodeKind::Interior && g.dist(k) > cf.omega_prime_dist) {
            prime.push_back(k);
            cf.A0 = std::max(cf.A0, cf.A[k]);
            cf.B0 = std::max(cf.B0, cf.B[k]);
        }
    }
    cf.omega_prime_nodes = static_cast<long>(prime.size());
    if (prime.empty()) throw GeometryError("Omega' contains no interior node");
    if (!profile) return cf;
    if (profile->pair().q != q) throw ArgumentError("profile built for a different q");

    const bool log_branch = q == 1.0;
    const double t0 = opt.t0;
    const double psi_t0 = profile->psi(t0).value;
    double dmin = kInf, dmax = 0.0;
    for (long k : prime) {
        dmin = std::min(dmin, g.dist(k));
        dmax = std::max(dmax, g.dist(k));
    }
    // Log-spaced bins of d below Psi(t0).  Within a bin log Phi is taken at the bin's
    // upper edge, which lowers the allowed bound since Phi decreases.
    std::vector<double> edges;
    if (dmin < psi_t0) {
        const double hi = std::min(dmax, psi_t0);
        const int n = std::max(2, opt.ap2_samples);
        for (int i = 0; i < n; ++i)
            edges.push_back(i == n - 1 ? hi : dmin * std::pow(hi / dmin, double(i) / (n - 1)));
        if (hi <= dmin) edges.assign(1, dmin);
        const auto ap2 = ap2_estimate(*profile, edges, t0);
        cf.est00_C = ap2.C_estimate;
    }
    std::vector<double> log_phi;
    if (log_branch)
        for (double e : edges) log_phi.push_back(std::log(profile->phi(e)));
    double far_bound = h_value(pair, t0);
    if (log_branch) far_bound = std::max(far_bound, pair.g(0.0));

    cf.est00_worst = 0.0;
    for (long k : prime) {
        const double d = g.dist(k);
        const double lhs = std::sqrt(cf.A[k]) + std::pow(cf.B[k], 1.0 / (2.0 - q));
        double bound;
        if (d >= psi_t0) {
            bound = far_bound;
        } else {
            bound = cf.est00_C / d;
            if (log_branch) {
                auto it = std::lower_bound(edges.begin(), edges.end(), d);
                if (it == edges.end()) --it;
                bound *= log_phi[static_cast<std::size_t>(it - edges.begin())];
            }
        }
        const double ratio = lhs == 0.0 ? 0.0 : (bound > 0.0 ? lhs / bound : kInf);
        if (ratio > cf.est00_worst) {
            cf.est00_worst = ratio;
            cf.est00_worst_node = k;
        }
    }
    cf.est00_checked = true;
    cf.est00_pass = cf.est00_worst <= 1.0 + opt.rel_tol;
    return cf;
}

double region_distance(const Grid2D& grid, const Region& region) {
    double d = kInf;
    for (long k = 0; k < grid.size(); ++k)
        if (region_contains(region, grid.node(k))) d = std::min(d, grid.dist(k));
    if (!std::isfinite(d)) throw ArgumentError("region contains no grid node");
    return std::max(0.0, d - grid.spacing() * std::sqrt(0.5));
}

ChainReport chain_harnack(const GridFunction& u, const Region& region, double r, double K,
                          const ChainOptions& opt) {
    if (!(r > 0.0)) throw ArgumentError("ball radius must be positive");
    if (!(K >= 1.0)) throw ArgumentError("per-ball constant K must be at least 1");
    const Grid2D& g = *u.grid;

    std::vector<long> nodes;
    std::vector<int> slot(static_cast<std::size_t>(g.size()), -1);
    for (long k = 0; k < g.size(); ++k) {
        if (!region_contains(region, g.node(k))) continue;
        if (g.kind(k) != NodeKind::Interior)
            throw PreconditionError("region O is not compactly inside the grid interior");
        slot[static_cast<std::size_t>(k)] = static_cast<int>(nodes.size());
        nodes.push_back(k);
    }
    if (nodes.empty()) throw ArgumentError("region O contains no grid node");

    // 4-neighbour connectivity of O on the grid.
    {
        std::vector<char> seen(nodes.size(), 0);
        std::deque<long> queue{nodes.front()};
        seen[0] = 1;
        std::size_t count = 1;
        while (!queue.empty()) {
            const long k = queue.front();
            queue.pop_front();
            const int i = g.col(k), j = g.row(k);
            const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
            for (const auto& d : nb) {
                const int ii = i + d[0], jj = j + d[1];
                if (ii < 0 || jj < 0 || ii >= g.nx() || jj >= g.ny()) continue;
                const int s = slot[static_cast<std::size_t>(g.index(ii, jj))];
                if (s >= 0 && !seen[static_cast<std::size_t>(s)]) {
                    seen[static_cast<std::size_t>(s)] = 1;
                    ++count;
                    queue.push_back(g.index(ii, jj));
                }
            }
        }
        if (count != nodes.size()) throw ArgumentError("region O is disconnected on the grid");
    }

    ChainReport rep;
    rep.r = r;
    rep.K = K;
    rep.region_dist = region_distance(g, region);
    if (!(6.0 * r < rep.region_dist))
        throw PreconditionError("6r = " + fmt(6.0 * r) + " is not below dist(O, boundary) = " +
                                fmt(rep.region_dist));
    if (opt.r0 && !(6.0 * r < *opt.r0))
        throw PreconditionError("6r = " + fmt(6.0 * r) + " is not below r0 = " + fmt(*opt.r0));

    // Hexagonal lattice of centres with spacing r/2, restricted to O.
    double bx0 = kInf, by0 = kInf, bx1 = -kInf, by1 = -kInf;
    for (long k : nodes) {
        const Point p = g.node(k);
        bx0 = std::min(bx0, p.x), bx1 = std::max(bx1, p.x);
        by0 = std::min(by0, p.y), by1 = std::max(by1, p.y);
    }
    const double s = 0.5 * r, sy = s * std::sqrt(3.0) / 2.0;
    const int ni = static_cast<int>(std::ceil((bx1 - bx0) / s)) + 2;
    const int nj = static_cast<int>(std::ceil((by1 - by0) / sy)) + 2;
    std::map<std::pair<int, int>, int> lattice;
    auto lattice_point = [&](int i, int j) {
        return Point{bx0 + (i + ((j & 1) ? 0.5 : 0.0)) * s, by0 + j * sy};
    };
    for (int j = -1; j <= nj; ++j)
        for (int i = -1; i <= ni; ++i) {
            const Point c = lattice_point(i, j);
            if (!region_contains(region, c)) continue;
            lattice[{i, j}] = static_cast<int>(rep.centers.size());
            rep.centers.push_back(c);
        }
    rep.m = static_cast<long>(rep.centers.size());
    if (rep.m == 0) throw GeometryError("no lattice centre falls inside O");

    // Ball assigned to each node of O: the nearest centre within r.
    std::vector<int> home(nodes.size(), -1);
    for (std::size_t a = 0; a < nodes.size(); ++a) {
        const Point p = g.node(nodes[a]);
        const int jc = static_cast<int>(std::lround((p.y - by0) / sy));
        double best = kInf;
        for (int j = jc - 5; j <= jc + 5; ++j) {
            const double off = (j & 1) ? 0.5 : 0.0;
            const int ic = static_cast<int>(std::lround((p.x - bx0) / s - off));
            for (int i = ic - 3; i <= ic + 3; ++i) {
                auto it = lattice.find({i, j});
                if (it == lattice.end()) continue;
                const double d = distance(p, rep.centers[static_cast<std::size_t>(it->second)]);
                if (d < r && d < best) {
                    best = d;
                    home[a] = it->second;
                }
            }
        }
        if (home[a] < 0)
            throw GeometryError("ball cover misses the node at (" + fmt(p.x) + ", " + fmt(p.y) + ")");
    }

    // Adjacency: lattice neighbours, whose balls overlap.
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(rep.m));
    for (const auto& [ij, idx] : lattice) {
        const auto [i, j] = ij;
        const int odd = j & 1;
        const std::pair<int, int> nb[6] = {{i - 1, j}, {i + 1, j},
                                           {i - 1 + odd, j - 1}, {i + odd, j - 1},
                                           {i - 1 + odd, j + 1}, {i + odd, j + 1}};
        for (const auto& n : nb) {
            auto it = lattice.find(n);
            if (it != lattice.end()) adj[static_cast<std::size_t>(idx)].push_back(it->second);
        }
    }
    auto bfs = [&](int from) {
        std::vector<int> dist(static_cast<std::size_t>(rep.m), -1);
        std::deque<int> queue{from};
        dist[static_cast<std::size_t>(from)] = 0;
        while (!queue.empty()) {
            const int b = queue.front();
            queue.pop_front();
            for (int c : adj[static_cast<std::size_t>(b)])
                if (dist[static_cast<std::size_t>(c)] < 0) {
                    dist[static_cast<std::size_t>(c)] = dist[static_cast<std::size_t>(b)] + 1;
                    queue.push_back(c);
                }
        }
        return dist;
    };
    {
        const auto d0 = bfs(0);
        if (std::any_of(d0.begin(), d0.end(), [](int d) { return d < 0; }))
            throw GeometryError("ball cover of O is not connected");
    }

    // Per-ball check: the r-ball is the inner third of a 3r-ball.
    HarnackOptions hopt;
    hopt.bound = K;
    hopt.slack = opt.slack_c * g.rho() / (3.0 * r);
    for (const Point& c : rep.centers) {
        const auto b = ball_harnack(u, c, 3.0 * r, hopt);
        rep.worst_ball_ratio = std::max(rep.worst_ball_ratio, b.ratio);
        if (!b.pass) ++rep.ball_failures;
    }
    rep.pass_balls = rep.ball_failures == 0;

    const double log10K = std::log10(K);
    rep.log10_K_pow_m = (2.0 * static_cast<double>(rep.m) + 1.0) * log10K;

    std::size_t amax = 0, amin = 0;
    for (std::size_t a = 0; a < nodes.size(); ++a) {
        if (u[nodes[a]] > u[nodes[amax]]) amax = a;
        if (u[nodes[a]] < u[nodes[amin]]) amin = a;
    }
    const double umax = u[nodes[amax]], umin = u[nodes[amin]];
    rep.observed_ratio = umin > 0.0 ? umax / umin : (umax > 0.0 ? kInf : 1.0);
    rep.pass_global = std::log10(rep.observed_ratio) <= rep.log10_K_pow_m + 1e-12;

    std::vector<std::pair<std::size_t, std::size_t>> pairs{{amax, amin}};
    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
    for (int p = 0; p < opt.pairs; ++p) {
        const std::size_t a = pick(rng);
        pairs.emplace_back(a, pick(rng));
    }
    std::map<int, std::vector<int>> bfs_cache;
    rep.worst_pair_ratio = 0.0;
    for (const auto& [a, b] : pairs) {
        const int ba = home[a], bb = home[b];
        auto it = bfs_cache.find(ba);
        if (it == bfs_cache.end()) it = bfs_cache.emplace(ba, bfs(ba)).first;
        ChainPair row;
        row.x = g.node(nodes[a]);
        row.y = g.node(nodes[b]);
        row.ell = it->second[static_cast<std::size_t>(bb)] + 1;
        const double ux = u[nodes[a]], uy = u[nodes[b]];
        row.ratio = uy > 0.0 ? ux / uy : (ux > 0.0 ? kInf : 1.0);
        row.log10_bound = (2.0 * row.ell + 1.0) * log10K;
        row.pass = std::log10(row.ratio) <= row.log10_bound + 1e-12;
        if (!row.pass) ++rep.pair_failures;
        rep.max_ell = std::max(rep.max_ell, row.ell);
        if (row.ratio > rep.worst_pair_ratio) {
            rep.worst_pair_ratio = row.ratio;
            rep.worst_ell = row.ell;
        }
        rep.pair_rows.push_back(row);
    }
    rep.pass_pairs = rep.pair_failures == 0;
    rep.pass = rep.pass_balls && rep.pass_pairs && rep.pass_global;
    return rep;
}

void write_ball_reports(const std::vector<HarnackReport>& reports, std::ostream& os) {
    os << "center_x,center_y,r,sup,inf,ratio,bound,pass\n";
    for (const auto& b : reports)
        os << fmt(b.center.x) << ',' << fmt(b.center.y) << ',' << fmt(b.r) << ','
           << fmt(b.sup_val) << ',' << fmt(b.inf_val) << ',' << fmt(b.ratio) << ','
           << fmt(b.bound) << ',' << (b.pass ? "pass" : "fail") << '\n';
}

void write_chain_summary(const ChainReport& rep, std::ostream& os) {
    os << "m,worst_l,K,log10_K_pow_bound,observed_ratio,pass\n";
    os << rep.m << ',' << rep.worst_ell << ',' << fmt(rep.K) << ',' << fmt(rep.log10_K_pow_m)
       << ',' << fmt(rep.observed_ratio) << ',' << (rep.pass ? "pass" : "fail") << '\n';
}

}  // namespace infharnack
