#include "infharnack/scalar_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "infharnack/errors.hpp"
#include "infharnack/format.hpp"

namespace infharnack {

namespace {

// x^gamma with multiplication for small integer exponents.
inline double fast_pow(double x, double gamma) {
    if (gamma == 1.0) return x;
    if (gamma == 2.0) return x * x;
    if (gamma == 3.0) return x * x * x;
    if (gamma == 4.0) {
        const double x2 = x * x;
        return x2 * x2;
    }
    return std::pow(x, gamma);
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_knots(const std::vector<double>& t, const std::vector<double>& v, const char* what) {
    if (t.size() != v.size() || t.size() < 2)
        throw ArgumentError(std::string(what) + ": need at least two (t, value) pairs");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(v[i]))
            throw ArgumentError(std::string(what) + ": non-finite knot");
        if (i > 0 && !(t[i] > t[i - 1]))
            throw ArgumentError(std::string(what) + ": knots must be strictly increasing in t");
    }
}

// Segment index k with t[k] <= x < t[k+1], clamped to [0, n-2].
std::size_t segment(const std::vector<double>& t, double x) {
    auto it = std::upper_bound(t.begin(), t.end(), x);
    std::size_t k = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    return std::min(k, t.size() - 2);
}

// Shape-preserving derivative estimates (Fritsch-Butland weighted harmonic mean).
std::vector<double> pchip_slopes(const std::vector<double>& t, const std::vector<double>& v) {
    const std::size_t n = t.size();
    std::vector<double> h(n - 1), del(n - 1), d(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = t[k + 1] - t[k];
        del[k] = (v[k + 1] - v[k]) / h[k];
    }
    if (n == 2) {
        d[0] = d[1] = del[0];
        return d;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (del[k - 1] * del[k] <= 0.0) continue;
        double w1 = 2 * h[k] + h[k - 1], w2 = h[k] + 2 * h[k - 1];
        d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
    }
    auto end_slope = [](double h0, double h1, double m0, double m1) {
        double s = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if (s * m0 <= 0) return 0.0;
        if (m0 * m1 <= 0 && std::abs(s) > std::abs(3 * m0)) return 3 * m0;
        return s;
    };
    d[0] = end_slope(h[0], h[1], del[0], del[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    return d;
}

double hermite(double x0, double x1, double y0, double y1, double d0, double d1, double x) {
    double h = x1 - x0, s = (x - x0) / h;
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
}

double hermite_derivative(double x0, double x1, double y0, double y1, double d0, double d1,
                          double x) {
    double h = x1 - x0, s = (x - x0) / h;
    double a = 6 * s * s - 6 * s, b = 3 * s * s - 4 * s + 1, c = -a, e = 3 * s * s - 2 * s;
    return (a * y0 + c * y1) / h + b * d0 + e * d1;
}

void check_table_range(const Tabulated& tb, double x) {
    if (x < tb.t.front() || x > tb.t.back())
        throw DomainError("tabulated function queried at t = " + fmt(x) + " outside [" +
                          fmt(tb.t.front()) + ", " + fmt(tb.t.back()) + "]");
}

double pwl_integral(const std::vector<double>& t, const std::vector<double>& v, double a,
                    double b) {
    auto val = [&](double x) {
        std::size_t k = segment(t, x);
        return v[k] + (v[k + 1] - v[k]) * (x - t[k]) / (t[k + 1] - t[k]);
    };
    // Trapezoid rule is exact between consecutive breakpoints.
    double sum = 0.0, lo = a, vlo = val(a);
    for (double knot : t) {
        if (knot <= a) continue;
        if (knot >= b) break;
        double vk = val(knot);
        sum += 0.5 * (vlo + vk) * (knot - lo);
        lo = knot;
        vlo = vk;
    }
    return sum + 0.5 * (vlo + val(b)) * (b - lo);
}

}  // namespace

ScalarFunction::ScalarFunction() : family_(Power{0.0, 1.0}) {}

ScalarFunction::ScalarFunction(Family family, double offset, bool odd_extension)
    : family_(std::move(family)), offset_(offset), odd_(odd_extension) {
    if (!std::isfinite(offset_)) throw ArgumentError("function offset must be finite");
    std::visit(overloaded{
                   [](const Power& p) {
                       if (!std::isfinite(p.c) || !std::isfinite(p.gamma) || p.gamma < 0)
                           throw ArgumentError("power family needs finite c and gamma >= 0");
                   },
                   [](const ExpMinusOne& e) {
                       if (!std::isfinite(e.c)) throw ArgumentError("exp family needs finite c");
                   },
                   [](const LogPlusOne& l) {
                       if (!std::isfinite(l.c)) throw ArgumentError("log family needs finite c");
                   },
                   [](const PiecewiseLinear& p) { check_knots(p.t, p.v, "piecewise-linear"); },
                   [](Tabulated& tb) {
                       check_knots(tb.t, tb.v, "tabulated");
                       if (tb.rule == InterpRule::Pchip) tb.slopes = pchip_slopes(tb.t, tb.v);
                   },
               },
               family_);
}

ScalarFunction ScalarFunction::zero() { return ScalarFunction(); }
ScalarFunction ScalarFunction::constant(double c) { return ScalarFunction(Power{0.0, 1.0}, c); }
ScalarFunction ScalarFunction::power(double c, double gamma, bool odd) {
    return ScalarFunction(Power{c, gamma}, 0.0, odd);
}
ScalarFunction ScalarFunction::exp_minus_one(double c, bool odd) {
    return ScalarFunction(ExpMinusOne{c}, 0.0, odd);
}
ScalarFunction ScalarFunction::log_plus_one(double c, bool odd) {
    return ScalarFunction(LogPlusOne{c}, 0.0, odd);
}
ScalarFunction ScalarFunction::piecewise_linear(std::vector<double> t, std::vector<double> v,
                                                bool odd) {
    return ScalarFunction(PiecewiseLinear{std::move(t), std::move(v)}, 0.0, odd);
}
ScalarFunction ScalarFunction::tabulated(std::vector<double> t, std::vector<double> v,
                                         InterpRule rule, bool odd) {
    return ScalarFunction(Tabulated{std::move(t), std::move(v), rule, {}}, 0.0, odd);
}

double ScalarFunction::base_value(double t) const {
    return std::visit(
        overloaded{
            [&](const Power& p) {
                if (p.c == 0.0) return 0.0;
                if (p.gamma == 0.0) return p.c;
                double r = fast_pow(t, p.gamma);
                if (std::isnan(r))
                    throw DomainError("power t^" + fmt(p.gamma) + " undefined at t = " + fmt(t));
                return p.c * r;
            },
            [&](const ExpMinusOne& e) { return e.c == 0.0 ? 0.0 : e.c * std::expm1(t); },
            [&](const LogPlusOne& l) {
                if (t <= -1.0) throw DomainError("log(1 + t) undefined at t = " + fmt(t));
                return l.c * std::log1p(t);
            },
            [&](const PiecewiseLinear& p) {
                std::size_t k = segment(p.t, t);
                return p.v[k] + (p.v[k + 1] - p.v[k]) * (t - p.t[k]) / (p.t[k + 1] - p.t[k]);
            },
            [&](const Tabulated& tb) {
                check_table_range(tb, t);
                std::size_t k = segment(tb.t, t);
                if (tb.rule == InterpRule::Linear)
                    return tb.v[k] +
                           (tb.v[k + 1] - tb.v[k]) * (t - tb.t[k]) / (tb.t[k + 1] - tb.t[k]);
                return hermite(tb.t[k], tb.t[k + 1], tb.v[k], tb.v[k + 1], tb.slopes[k],
                               tb.slopes[k + 1], t);
            },
        },
        family_);
}

double ScalarFunction::base_derivative(double t) const {
    return std::visit(
        overloaded{
            [&](const Power& p) {
                if (p.c == 0.0 || p.gamma == 0.0) return 0.0;
                if (p.gamma == 1.0) return p.c;
                double r = p.c * p.gamma * fast_pow(t, p.gamma - 1.0);
                if (std::isnan(r))
                    throw DomainError("power derivative undefined at t = " + fmt(t));
                return r;
            },
            [&](const ExpMinusOne& e) { return e.c == 0.0 ? 0.0 : e.c * std::exp(t); },
            [&](const LogPlusOne& l) {
                if (t <= -1.0) throw DomainError("log(1 + t) undefined at t = " + fmt(t));
                return l.c / (1.0 + t);
            },
            [&](const PiecewiseLinear& p) {
                std::size_t k = segment(p.t, t);
                return (p.v[k + 1] - p.v[k]) / (p.t[k + 1] - p.t[k]);
            },
            [&](const Tabulated& tb) {
                check_table_range(tb, t);
                std::size_t k = segment(tb.t, t);
                if (tb.rule == InterpRule::Linear)
                    return (tb.v[k + 1] - tb.v[k]) / (tb.t[k + 1] - tb.t[k]);
                return hermite_derivative(tb.t[k], tb.t[k + 1], tb.v[k], tb.v[k + 1],
                                          tb.slopes[k], tb.slopes[k + 1], t);
            },
        },
        family_);
}

double ScalarFunction::value(double t) const {
    if (!std::isfinite(t)) throw DomainError("function evaluated at non-finite t");
    if (odd_ && t < 0.0) return -(base_value(-t) + offset_);
    return base_value(t) + offset_;
}

double ScalarFunction::derivative(double t) const {
    if (!std::isfinite(t)) throw DomainError("derivative evaluated at non-finite t");
    if (odd_ && t < 0.0) return base_derivative(-t);
    return base_derivative(t);
}

double ScalarFunction::log_value(double t) const {
    double v = value(t);
    if (std::isfinite(v)) {
        if (v <= 0.0) return -std::numeric_limits<double>::infinity();
        return std::log(v);
    }
    // Overflowed: only the analytic families can get here, with t > 0.
    if (const auto* p = std::get_if<Power>(&family_))
        return std::log(std::abs(p->c)) + p->gamma * std::log(std::abs(t));
    if (const auto* e = std::get_if<ExpMinusOne>(&family_))
        return std::log(std::abs(e->c)) + std::abs(t) + std::log1p(-std::exp(-std::abs(t)));
    return std::log(v);
}

std::optional<double> ScalarFunction::exact_integral(double a, double b) const {
    if (b < a) {
        auto r = exact_integral(b, a);
        return r ? std::optional<double>(-*r) : std::nullopt;
    }
    if (odd_ && a < 0.0) return std::nullopt;
    double off = offset_ * (b - a);
    if (const auto* p = std::get_if<PiecewiseLinear>(&family_))
        return pwl_integral(p->t, p->v, a, b) + off;
    if (const auto* tb = std::get_if<Tabulated>(&family_)) {
        if (tb->rule != InterpRule::Linear) return std::nullopt;
        check_table_range(*tb, a);
        check_table_range(*tb, b);
        return pwl_integral(tb->t, tb->v, a, b) + off;
    }
    if (const auto* p = std::get_if<Power>(&family_); p && (p->c == 0.0 || p->gamma == 0.0))
        return (p->c == 0.0 ? 0.0 : p->c * (b - a)) + off;
    return std::nullopt;
}

bool ScalarFunction::identically_zero() const {
    if (offset_ != 0.0) return false;
    return std::visit(overloaded{
                          [](const Power& p) { return p.c == 0.0; },
                          [](const ExpMinusOne& e) { return e.c == 0.0; },
                          [](const LogPlusOne& l) { return l.c == 0.0; },
                          [](const PiecewiseLinear& p) {
                              return std::all_of(p.v.begin(), p.v.end(),
                                                 [](double x) { return x == 0.0; });
                          },
                          [](const Tabulated& tb) {
                              return std::all_of(tb.v.begin(), tb.v.end(),
                                                 [](double x) { return x == 0.0; });
                          },
                      },
                      family_);
}

std::string ScalarFunction::describe() const {
    std::string s = std::visit(
        overloaded{
            [](const Power& p) {
                if (p.c == 0.0) return std::string("zero");
                if (p.gamma == 0.0) return "const " + fmt(p.c);
                return "power " + fmt(p.c) + " " + fmt(p.gamma);
            },
            [](const ExpMinusOne& e) { return "exp " + fmt(e.c); },
            [](const LogPlusOne& l) { return "log " + fmt(l.c); },
            [](const PiecewiseLinear& p) {
                std::string r = "pwl";
                for (std::size_t i = 0; i < p.t.size(); ++i) r += " " + fmt(p.t[i]) + ":" + fmt(p.v[i]);
                return r;
            },
            [](const Tabulated& tb) {
                return "table n=" + std::to_string(tb.t.size()) +
                       (tb.rule == InterpRule::Linear ? " linear" : " pchip");
            },
        },
        family_);
    if (offset_ != 0.0) s += " + " + fmt(offset_);
    if (odd_) s += " [odd]";
    return s;
}

}  // namespace infharnack
