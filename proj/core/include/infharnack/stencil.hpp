#pragma once

#include "infharnack/grid.hpp"

namespace infharnack {

struct StencilValue {
    double max_val = 0.0;
    double min_val = 0.0;
    double grad = 0.0;  // (max - min) / (2 rho)
    double op = 0.0;    // (max + min - 2 u(node)) / rho^2
};

// Extrema of u over the discrete rho-circle around an interior node.
StencilValue stencil_extrema(const GridFunction& u, long node);
StencilValue stencil_extrema(const GridFunction& u, long node, const StencilPlan& plan);

// Bilinear or Catmull-Rom interpolation of u at an arbitrary point.
double interpolate(const GridFunction& u, Point p, Interp rule);

}  // namespace infharnack
