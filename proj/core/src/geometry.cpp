#include "infharnack/geometry.hpp"

#include <algorithm>

namespace infharnack {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

double signed_distance(const Domain& d, Point p) {
    return std::visit(
        overloaded{
            [&](const Rectangle& r) {
                const double dx = std::max({r.x0 - p.x, 0.0, p.x - r.x1});
                const double dy = std::max({r.y0 - p.y, 0.0, p.y - r.y1});
                if (dx > 0.0 || dy > 0.0) return -std::hypot(dx, dy);
                return std::min({p.x - r.x0, r.x1 - p.x, p.y - r.y0, r.y1 - p.y});
            },
            [&](const Disk& c) { return c.radius - distance(p, c.center); },
        },
        d);
}

Point project_to_boundary(const Domain& d, Point p) {
    return std::visit(
        overloaded{
            [&](const Rectangle& r) {
                Point c{std::clamp(p.x, r.x0, r.x1), std::clamp(p.y, r.y0, r.y1)};
                if (c.x != p.x || c.y != p.y) return c;  // outside: clamping is the projection
                const double dl = p.x - r.x0, dr = r.x1 - p.x, db = p.y - r.y0, dt = r.y1 - p.y;
                const double m = std::min({dl, dr, db, dt});
                if (m == dl) return Point{r.x0, p.y};
                if (m == dr) return Point{r.x1, p.y};
                if (m == db) return Point{p.x, r.y0};
                return Point{p.x, r.y1};
            },
            [&](const Disk& c) {
                const double n = distance(p, c.center);
                if (n == 0.0) return Point{c.center.x + c.radius, c.center.y};
                return Point{c.center.x + c.radius * (p.x - c.center.x) / n,
                             c.center.y + c.radius * (p.y - c.center.y) / n};
            },
        },
        d);
}

bool contains(const Domain& d, Point p) { return signed_distance(d, p) > 0.0; }

Rectangle bounding_box(const Domain& d) {
    return std::visit(overloaded{
                          [](const Rectangle& r) { return r; },
                          [](const Disk& c) {
                              return Rectangle{c.center.x - c.radius, c.center.y - c.radius,
                                               c.center.x + c.radius, c.center.y + c.radius};
                          },
                      },
                      d);
}

}  // namespace infharnack
