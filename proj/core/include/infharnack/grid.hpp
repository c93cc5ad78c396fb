#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "infharnack/geometry.hpp"

namespace infharnack {

enum class NodeKind : std::uint8_t { Interior = 0, Boundary = 1, Exterior = 2 };

enum class Interp { Linear, Cubic };

struct StencilOptions {
    double radius_multiplier = 3.0;  // rho = radius_multiplier * spacing
    int directions = 16;
    Interp interp = Interp::Linear;
    bool refine_angles = false;  // continuous search for the circle extrema
};

// Precomputed interpolation taps for each stencil direction.  Offsets and weights
// are identical for every node of a uniform grid.
struct StencilPlan {
    struct Tap {
        long offset;
        double weight;
    };
    StencilOptions options;
    double rho = 0.0;
    int taps_per_direction = 0;
    std::vector<Tap> taps;       // directions * taps_per_direction entries
    std::vector<double> angles;  // direction angles
    int reach = 0;               // max tap distance in cells along an axis
};

class Grid2D {
public:
    // n nodes across the bounding box of the domain (spacing = width / (n - 1)),
    // padded so every interior stencil stays on non-exterior nodes.
    Grid2D(Domain domain, int n, StencilOptions stencil = {});

    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }
    long size() const noexcept { return static_cast<long>(nx_) * ny_; }
    double spacing() const noexcept { return h_; }
    Point origin() const noexcept { return origin_; }
    double rho() const noexcept { return plan_.rho; }
    const Domain& domain() const noexcept { return domain_; }
    const StencilOptions& stencil_options() const noexcept { return plan_.options; }
    const StencilPlan& plan() const noexcept { return plan_; }

    long index(int i, int j) const noexcept { return static_cast<long>(j) * nx_ + i; }
    int col(long k) const noexcept { return static_cast<int>(k % nx_); }
    int row(long k) const noexcept { return static_cast<int>(k / nx_); }
    Point node(long k) const noexcept {
        return {origin_.x + col(k) * h_, origin_.y + row(k) * h_};
    }
    NodeKind kind(long k) const noexcept { return mask_[static_cast<std::size_t>(k)]; }
    const std::vector<NodeKind>& mask() const noexcept { return mask_; }
    // Signed distance to the domain boundary, positive inside.
    double dist(long k) const noexcept { return dist_[static_cast<std::size_t>(k)]; }
    const std::vector<long>& interior() const noexcept { return interior_; }
    const std::vector<long>& boundary() const noexcept { return boundary_; }

    // Plan for alternative stencil settings on this grid; throws StencilError if its
    // taps would reach exterior nodes.
    StencilPlan make_plan(const StencilOptions& opt) const;

private:
    Domain domain_;
    int nx_ = 0, ny_ = 0;
    double h_ = 0.0;
    Point origin_{};
    std::vector<NodeKind> mask_;
    std::vector<double> dist_;
    std::vector<long> interior_, boundary_;
    StencilPlan plan_;
};

using GridPtr = std::shared_ptr<const Grid2D>;

GridPtr make_grid(const Domain& domain, int n, const StencilOptions& stencil = {});

struct GridFunction {
    GridPtr grid;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(GridPtr g, double fill = 0.0);
    GridFunction(GridPtr g, std::vector<double> v);

    double& operator[](long k) { return values[static_cast<std::size_t>(k)]; }
    double operator[](long k) const { return values[static_cast<std::size_t>(k)]; }
};

// Samples fn at every non-exterior node (exterior nodes get 0).
template <class Fn>
GridFunction sample(GridPtr g, Fn&& fn) {
    GridFunction u(g);
    for (long k = 0; k < g->size(); ++k)
        if (g->kind(k) != NodeKind::Exterior) u[k] = fn(g->node(k));
    return u;
}

void write_grid_function(const GridFunction& u, std::ostream& os);
GridFunction read_grid_function(std::istream& is, GridPtr grid);
void write_mask(const Grid2D& g, std::ostream& os);

}  // namespace infharnack
