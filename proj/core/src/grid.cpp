#include "infharnack/grid.hpp"

#include <array>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "infharnack/errors.hpp"
#include "infharnack/format.hpp"

namespace infharnack {

namespace {

// Split a cell-unit offset into floor and fraction, snapping values within
// rounding distance of an integer.
std::pair<int, double> split(double x) {
    double r = std::round(x);
    if (std::abs(x - r) < 1e-12) return {static_cast<int>(r), 0.0};
    double fl = std::floor(x);
    return {static_cast<int>(fl), x - fl};
}

std::array<double, 4> catmull_rom(double t) {
    const double t2 = t * t, t3 = t2 * t;
    return {0.5 * (-t3 + 2 * t2 - t), 0.5 * (3 * t3 - 5 * t2 + 2), 0.5 * (-3 * t3 + 4 * t2 + t),
            0.5 * (t3 - t2)};
}

}  // namespace

Grid2D::Grid2D(Domain domain, int n, StencilOptions stencil) : domain_(std::move(domain)) {
    if (n < 3) throw ArgumentError("grid needs at least 3 nodes across the domain");
    if (!(stencil.radius_multiplier > 0.0)) throw ArgumentError("stencil radius multiplier must be positive");
    if (stencil.directions < 4 || stencil.directions % 2 != 0)
        throw ArgumentError("stencil needs an even number (>= 4) of directions");
    const Rectangle bb = bounding_box(domain_);
    const double width = bb.x1 - bb.x0, height = bb.y1 - bb.y0;
    if (!(width > 0.0) || !(height > 0.0)) throw ArgumentError("domain has empty extent");
    h_ = width / (n - 1);
    const int ny_in = static_cast<int>(std::lround(height / h_)) + 1;
    const int pad = static_cast<int>(std::ceil(stencil.radius_multiplier)) + 4;
    nx_ = n + 2 * pad;
    ny_ = ny_in + 2 * pad;
    origin_ = {bb.x0 - pad * h_, bb.y0 - pad * h_};

    const double rho = stencil.radius_multiplier * h_;
    const double band = rho + 3.0 * h_;
    mask_.resize(static_cast<std::size_t>(size()));
    dist_.resize(static_cast<std::size_t>(size()));
    for (long k = 0; k < size(); ++k) {
        const double d = signed_distance(domain_, node(k));
        dist_[static_cast<std::size_t>(k)] = d;
        NodeKind kind = d > 1e-9 * h_ ? NodeKind::Interior
                        : d > -band   ? NodeKind::Boundary
                                      : NodeKind::Exterior;
        mask_[static_cast<std::size_t>(k)] = kind;
        if (kind == NodeKind::Interior) interior_.push_back(k);
        if (kind == NodeKind::Boundary) boundary_.push_back(k);
    }
    if (interior_.empty() || boundary_.empty())
        throw ArgumentError("grid has no interior or no boundary nodes");
    plan_ = make_plan(stencil);
}

StencilPlan Grid2D::make_plan(const StencilOptions& opt) const {
    if (opt.directions < 4 || opt.directions % 2 != 0)
        throw ArgumentError("stencil needs an even number (>= 4) of directions");
    StencilPlan p;
    p.options = opt;
    p.rho = opt.radius_multiplier * h_;
    const int K = opt.directions;
    const bool cubic = opt.interp == Interp::Cubic;
    p.taps_per_direction = cubic ? 16 : 4;
    for (int k = 0; k < K; ++k) {
        const double th = 2.0 * std::numbers::pi * k / K;
        p.angles.push_back(th);
        auto [i0, fx] = split(opt.radius_multiplier * std::cos(th));
        auto [j0, fy] = split(opt.radius_multiplier * std::sin(th));
        if (cubic) {
            auto wx = catmull_rom(fx), wy = catmull_rom(fy);
            for (int b = 0; b < 4; ++b)
                for (int a = 0; a < 4; ++a)
                    p.taps.push_back({index(i0 - 1 + a, j0 - 1 + b) - index(0, 0), wx[a] * wy[b]});
        } else {
            p.taps.push_back({index(i0, j0) - index(0, 0), (1 - fx) * (1 - fy)});
            p.taps.push_back({index(i0 + 1, j0) - index(0, 0), fx * (1 - fy)});
            p.taps.push_back({index(i0, j0 + 1) - index(0, 0), (1 - fx) * fy});
            p.taps.push_back({index(i0 + 1, j0 + 1) - index(0, 0), fx * fy});
        }
    }
    p.reach = static_cast<int>(std::ceil(opt.radius_multiplier)) + (cubic ? 2 : 1);

    // Every tap of every interior node must land on a non-exterior node.
    for (long k : interior_) {
        const int i = col(k), j = row(k);
        if (i - p.reach < 0 || j - p.reach < 0 || i + p.reach >= nx_ || j + p.reach >= ny_)
            throw StencilError("stencil of node " + std::to_string(k) + " leaves the grid", k);
        if (opt.refine_angles) {
            // Points on the circle reach taps at most (1 or 2) sqrt(2) cells further out.
            const double within = opt.radius_multiplier + (cubic ? 2.0 : 1.0) * std::numbers::sqrt2 + 1e-9;
            for (int dj = -p.reach; dj <= p.reach; ++dj)
                for (int di = -p.reach; di <= p.reach; ++di)
                    if (std::hypot(di, dj) <= within && kind(index(i + di, j + dj)) == NodeKind::Exterior)
                        throw StencilError("stencil of node " + std::to_string(k) +
                                               " touches an exterior node",
                                           k);
        } else {
            for (const auto& t : p.taps)
                if (t.weight != 0.0 && kind(k + t.offset) == NodeKind::Exterior)
                    throw StencilError("stencil of node " + std::to_string(k) +
                                           " touches an exterior node",
                                       k);
        }
    }
    return p;
}

GridPtr make_grid(const Domain& domain, int n, const StencilOptions& stencil) {
    return std::make_shared<const Grid2D>(domain, n, stencil);
}

GridFunction::GridFunction(GridPtr g, double fill)
    : grid(std::move(g)), values(static_cast<std::size_t>(grid->size()), fill) {}

GridFunction::GridFunction(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (static_cast<long>(values.size()) != grid->size())
        throw ArgumentError("grid function size does not match its grid");
}

void write_grid_function(const GridFunction& u, std::ostream& os) {
    const auto& g = *u.grid;
    os << "# nx " << g.nx() << " ny " << g.ny() << " spacing " << fmt(g.spacing()) << " origin "
       << fmt(g.origin().x) << " " << fmt(g.origin().y) << "\n";
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            if (i) os << ' ';
            os << fmt(u[g.index(i, j)]);
        }
        os << '\n';
    }
}

GridFunction read_grid_function(std::istream& is, GridPtr grid) {
    std::string line;
    int lineno = 0;
    if (!std::getline(is, line)) throw ParseError("missing grid header", 1);
    ++lineno;
    std::istringstream hs(line);
    std::string hash, knx, kny;
    int nx = 0, ny = 0;
    if (!(hs >> hash >> knx >> nx >> kny >> ny) || hash != "#" || knx != "nx" || kny != "ny")
        throw ParseError("malformed grid header", lineno);
    if (nx != grid->nx() || ny != grid->ny()) throw ParseError("grid shape mismatch", lineno);
    GridFunction u(grid);
    for (int j = 0; j < ny; ++j) {
        if (!std::getline(is, line)) throw ParseError("missing grid row", lineno + 1);
        ++lineno;
        std::istringstream rs(line);
        for (int i = 0; i < nx; ++i) {
            std::string tok;
            if (!(rs >> tok)) throw ParseError("short grid row", lineno);
            try {
                u[grid->index(i, j)] = std::stod(tok);
            } catch (const std::exception&) {
                throw ParseError("non-numeric grid value", lineno);
            }
        }
    }
    return u;
}

void write_mask(const Grid2D& g, std::ostream& os) {
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            if (i) os << ' ';
            os << static_cast<int>(g.kind(g.index(i, j)));
        }
        os << '\n';
    }
}

}  // namespace infharnack
