#pragma once

#include <cmath>
#include <variant>

namespace infharnack {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Rectangle {
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

struct Disk {
    Point center{};
    double radius = 1.0;
};

using Domain = std::variant<Rectangle, Disk>;

// Signed distance to the boundary: positive inside, negative outside.
double signed_distance(const Domain& d, Point p);
// Nearest point on the boundary.
Point project_to_boundary(const Domain& d, Point p);
bool contains(const Domain& d, Point p);  // open set
// Axis-aligned bounding box as a rectangle.
Rectangle bounding_box(const Domain& d);

}  // namespace infharnack
