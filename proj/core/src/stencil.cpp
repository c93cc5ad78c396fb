#include "infharnack/stencil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "infharnack/errors.hpp"

namespace infharnack {

namespace {

double catmull_rom(double pm1, double p0, double p1, double p2, double t) {
    return p0 + 0.5 * t *
                    (p1 - pm1 + t * (2 * pm1 - 5 * p0 + 4 * p1 - p2 + t * (3 * (p0 - p1) + p2 - pm1)));
}

// Golden-section search for an extremum of fn on [a, b]; sign = +1 for max, -1 for min.
template <class Fn>
double golden(Fn&& fn, double a, double b, double sign) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = sign * fn(c), fd = sign * fn(d);
    for (int it = 0; it < 60 && b - a > 1e-10; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sign * fn(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sign * fn(d);
        }
    }
    return sign * std::max(fc, fd);
}

}  // namespace

double interpolate(const GridFunction& u, Point p, Interp rule) {
    const auto& g = *u.grid;
    const double x = (p.x - g.origin().x) / g.spacing(), y = (p.y - g.origin().y) / g.spacing();
    const int i0 = static_cast<int>(std::floor(x)), j0 = static_cast<int>(std::floor(y));
    const double fx = x - i0, fy = y - j0;
    const int lo = rule == Interp::Cubic ? 1 : 0, hi = rule == Interp::Cubic ? 2 : 1;
    if (i0 - lo < 0 || j0 - lo < 0 || i0 + hi >= g.nx() || j0 + hi >= g.ny())
        throw DomainError("interpolation point outside the grid");
    for (int dj = -lo; dj <= hi; ++dj)
        for (int di = -lo; di <= hi; ++di)
            if (g.kind(g.index(i0 + di, j0 + dj)) == NodeKind::Exterior)
                throw StencilError("interpolation touches an exterior node",
                                   g.index(i0 + di, j0 + dj));
    if (rule == Interp::Linear) {
        const double a = u[g.index(i0, j0)], b = u[g.index(i0 + 1, j0)];
        const double c = u[g.index(i0, j0 + 1)], d = u[g.index(i0 + 1, j0 + 1)];
        return (1 - fy) * ((1 - fx) * a + fx * b) + fy * ((1 - fx) * c + fx * d);
    }
    double rows[4];
    for (int b = 0; b < 4; ++b) {
        const int j = j0 - 1 + b;
        rows[b] = catmull_rom(u[g.index(i0 - 1, j)], u[g.index(i0, j)], u[g.index(i0 + 1, j)],
                              u[g.index(i0 + 2, j)], fx);
    }
    return catmull_rom(rows[0], rows[1], rows[2], rows[3], fy);
}

StencilValue stencil_extrema(const GridFunction& u, long node) {
    return stencil_extrema(u, node, u.grid->plan());
}

StencilValue stencil_extrema(const GridFunction& u, long node, const StencilPlan& plan) {
    const auto& g = *u.grid;
    if (node < 0 || node >= g.size() || g.kind(node) != NodeKind::Interior)
        throw StencilError("stencil requested at non-interior node " + std::to_string(node), node);
    const int K = static_cast<int>(plan.angles.size()), T = plan.taps_per_direction;
    double mx = -std::numeric_limits<double>::infinity(), mn = -mx;
    int kmax = 0, kmin = 0;
    for (int k = 0; k < K; ++k) {
        double v = 0.0;
        for (int t = 0; t < T; ++t) {
            const auto& tap = plan.taps[static_cast<std::size_t>(k * T + t)];
            if (tap.weight == 0.0) continue;
            const long m = node + tap.offset;
            if (g.kind(m) == NodeKind::Exterior)
                throw StencilError("stencil of node " + std::to_string(node) +
                                       " touches an exterior node",
                                   node);
            v += tap.weight * u[m];
        }
        if (v > mx) {
            mx = v;
            kmax = k;
        }
        if (v < mn) {
            mn = v;
            kmin = k;
        }
    }
    if (plan.options.refine_angles) {
        const Point c = g.node(node);
        auto on_circle = [&](double th) {
            return interpolate(u, {c.x + plan.rho * std::cos(th), c.y + plan.rho * std::sin(th)},
                               plan.options.interp);
        };
        const double dth = plan.angles.size() > 1 ? plan.angles[1] - plan.angles[0] : 0.0;
        const double th_max = plan.angles[static_cast<std::size_t>(kmax)];
        const double th_min = plan.angles[static_cast<std::size_t>(kmin)];
        mx = std::max(mx, golden(on_circle, th_max - dth, th_max + dth, 1.0));
        mn = std::min(mn, golden(on_circle, th_min - dth, th_min + dth, -1.0));
    }
    StencilValue s;
    s.max_val = mx;
    s.min_val = mn;
    s.grad = (mx - mn) / (2.0 * plan.rho);
    s.op = (mx + mn - 2.0 * u[node]) / (plan.rho * plan.rho);
    return s;
}

}  // namespace infharnack
