#include "infharnack/radial_ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>

#include "infharnack/errors.hpp"
#include "infharnack/format.hpp"
#include "infharnack/quadrature.hpp"

namespace infharnack {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using State = std::array<double, 2>;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct StepResult {
    State y;
    double err;  // scaled error norm, accept if <= 1
};

template <class Rhs>
StepResult dp_step(Rhs& rhs, double x, const State& y, double h, double rtol, double atol) {
    auto axpy = [](const State& y0, std::initializer_list<std::pair<double, const State*>> terms,
                   double hh) {
        State out = y0;
        for (auto [c, k] : terms)
            for (int i = 0; i < 2; ++i) out[i] += hh * c * (*k)[i];
        return out;
    };
    State k1 = rhs(x, y);
    State k2 = rhs(x + c2 * h, axpy(y, {{a21, &k1}}, h));
    State k3 = rhs(x + c3 * h, axpy(y, {{a31, &k1}, {a32, &k2}}, h));
    State k4 = rhs(x + c4 * h, axpy(y, {{a41, &k1}, {a42, &k2}, {a43, &k3}}, h));
    State k5 = rhs(x + c5 * h, axpy(y, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, h));
    State k6 = rhs(x + h, axpy(y, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, h));
    State yn = axpy(y, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}}, h);
    State k7 = rhs(x + h, yn);
    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
        double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                        e7 * k7[i]);
        double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(yn[i]));
        err = std::max(err, std::abs(e) / sc);
    }
    if (!std::isfinite(yn[0]) || !std::isfinite(yn[1])) err = kInf;
    return {yn, err};
}

double step_factor(double err) {
    if (err == 0.0) return 5.0;
    return std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
}

// Upper bound on the remaining distance to blow-up from a state (phi_c, p_c) using
// phi'^2 >= p_c^2 + 2 int f and phi'^(2-q) >= p_c^(2-q) + (2-q) int g.
double tail_bound(const NonlinearityPair& pair, double phic, double pc) {
    const double q = pair.q;
    auto integrand = [&](double phi) {
        const double F = integral(pair.f, phic, phi, 1e-12);
        const double G = integral(pair.g, phic, phi, 1e-12);
        const double v1 = std::sqrt(pc * pc + 2.0 * std::max(F, 0.0));
        const double v2 = std::pow(std::pow(pc, 2.0 - q) + (2.0 - q) * std::max(G, 0.0),
                                   1.0 / (2.0 - q));
        return 1.0 / std::max(v1, v2);
    };
    quad::TailOptions opt;
    opt.rel_tol = 1e-8;
    auto r = quad::integrate_to_infinity(integrand, phic, opt);
    if (r.kind != quad::TailKind::Convergent) return kInf;
    return r.value + r.error;
}

}  // namespace

const char* to_string(RadialStatus s) {
    switch (s) {
        case RadialStatus::BlewUp: return "blew_up";
        case RadialStatus::ReachedCap: return "reached_cap";
        case RadialStatus::ReachedRmax: return "reached_rmax";
    }
    return "?";
}

namespace {

double allowance(double r, const RadialOptions& opt) { return opt.error_allowance * (1.0 + r); }

// The integrated r carries global error; widen the certified bracket by an allowance.
void set_bracket(RadialSolution& sol, double r, double tail, const RadialOptions& opt) {
    const double pad = allowance(r, opt);
    sol.R_lo = std::max(0.0, r - pad);
    sol.R_hi = r + tail + pad;
}

}  // namespace

RadialSolution solve_ivp(const NonlinearityPair& pair, double a, const RadialOptions& opt) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ArgumentError("IVP needs a > 0, got " + fmt(a));
    if (!(opt.r_max > 0.0) || !(opt.phi_cap > a))
        throw ArgumentError("IVP needs r_max > 0 and phi_cap > a");
    const double q = pair.q;
    RadialSolution sol;
    sol.a = a;
    sol.q = q;
    sol.nodes.push_back({0.0, a, 0.0});

    auto accel = [&](double phi, double dphi) {
        return pair.f(phi) + pair.g(phi) * std::pow(std::abs(dphi), q);
    };
    if (accel(a, 0.0) == 0.0) {
        sol.rest_point = true;
        sol.status = RadialStatus::ReachedRmax;
        sol.nodes.push_back({opt.r_max, a, 0.0});
        sol.R_lo = opt.r_max;
        sol.R_hi = kInf;
        sol.note = "rest point: f(a) + g(a) 0^q = 0, constant solution returned (not unique)";
        return sol;
    }

    auto fwd = [&](double, const State& y) { return State{y[1], accel(y[0], y[1])}; };
    auto inv = [&](double phi, const State& z) {
        return State{1.0 / z[1], accel(phi, z[1]) / z[1]};
    };

    bool inverse = false, allow_inverse = true;
    double x = 0.0;  // r in forward mode, phi in inverse mode
    State y{a, 0.0};  // (phi, phi') forward, (r, phi') inverse
    double h = std::min(1e-3, opt.r_max / 100.0);
    double cap = opt.phi_cap;
    for (long step = 0; step < opt.max_steps; ++step) {
        if (!inverse) {
            if (x >= opt.r_max) {
                sol.status = RadialStatus::ReachedRmax;
                sol.R_lo = x;
                sol.R_hi = kInf;
                return sol;
            }
            h = std::min(h, opt.r_max - x);
            auto s = dp_step(fwd, x, y, h, opt.rtol, opt.atol);
            if (s.err > 1.0) {
                h *= step_factor(s.err);
                if (h < 1e-15 * std::max(1.0, x)) {
                    sol.status = RadialStatus::BlewUp;
                    set_bracket(sol, x, tail_bound(pair, y[0], y[1]), opt);
                    sol.note = "step size underflow with growing phi";
                    return sol;
                }
                continue;
            }
            x = (h == opt.r_max - x) ? opt.r_max : x + h;
            y = s.y;
            h *= step_factor(s.err);
            sol.nodes.push_back({x, y[0], y[1]});
            if (allow_inverse && y[0] >= opt.inverse_switch * a && y[1] > 0.0) {
                inverse = true;
                double r = x;
                x = y[0];
                y = State{r, y[1]};
                h = 1e-3 * x;
            }
            continue;
        }
        auto s = dp_step(inv, x, y, h, opt.rtol, opt.atol);
        if (s.err > 1.0) {
            h *= step_factor(s.err);
            if (h < 1e-15 * x) {
                // f or g overflowed ahead of the cap.
                set_bracket(sol, y[0], tail_bound(pair, x, y[1]), opt);
                sol.status = RadialStatus::BlewUp;
                sol.note = "step size underflow in phi at phi = " + fmt(x);
                return sol;
            }
            continue;
        }
        if (s.y[0] > opt.r_max) {
            // The radius limit comes first: finish in r so the last node sits at r_max.
            inverse = false;
            allow_inverse = false;
            double phi = x;
            x = y[0];
            y = State{phi, y[1]};
            h = std::min(opt.r_max - x, 1e-3);
            continue;
        }
        x += h;
        y = s.y;
        h *= step_factor(s.err);
        // Near blow-up r may stop moving in double precision.
        if (y[0] > sol.nodes.back().r) sol.nodes.push_back({y[0], x, y[1]});
        if (x >= cap) {
            const double tail = tail_bound(pair, x, y[1]);
            if (tail + 2.0 * allowance(y[0], opt) <= opt.bracket_width || cap > 1e300) {
                sol.status = RadialStatus::ReachedCap;
                set_bracket(sol, y[0], tail, opt);
                if (!std::isfinite(tail)) sol.note = "tail bound diverges: no blow-up certified";
                return sol;
            }
            cap *= 100.0;
        }
    }
    throw DivergenceError("IVP: step budget exhausted", {});
}

LoUlReport verify_lo_ul(const RadialSolution& sol, const GrowthProfile& profile, double tol) {
    LoUlReport rep;
    rep.C_q = profile.C_q();
    if (sol.rest_point) {
        rep.pass = true;
        rep.vacuous = true;
        return rep;
    }
    const double a = sol.a, q = profile.pair().q;
    const auto& nodes = sol.nodes;
    auto above = std::count_if(nodes.begin(), nodes.end(), [&](const auto& n) { return n.phi > a; });
    if (above < 3) throw ArgumentError("verify_lo_ul needs at least 3 nodes with phi > a");

    auto denom_span = [&](double delta) {
        auto [F, G] = profile.script_FG_span(a, delta);
        return std::sqrt(F) + std::pow(G, 1.0 / (2.0 - q));
    };
    rep.min_lo_ratio = kInf;
    rep.min_ul_slack = kInf;
    rep.pass = true;
    double cumulative = 0.0, tau_prev = 0.0;
    for (const auto& n : nodes) {
        if (n.r <= 0.0 || n.phi <= a) continue;
        const double tau = std::sqrt(n.phi - a);
        if (tau > tau_prev) {
            cumulative += quad::integrate(
                              [&](double t) { return t == 0.0 ? 0.0 : 2.0 * t / denom_span(t * t); },
                              tau_prev, tau, 1e-10)
                              .value;
            tau_prev = tau;
        }
        if (n.phi - a < 1e-10 * a) continue;
        LoUlRow row{n.r, n.phi, n.dphi, n.dphi / denom_span(n.phi - a), rep.C_q * n.r, cumulative};
        rep.min_lo_ratio = std::min(rep.min_lo_ratio, row.lo_ratio);
        rep.min_ul_slack = std::min(rep.min_ul_slack, row.ul_rhs - row.ul_lhs);
        if (row.lo_ratio < rep.C_q * (1.0 - tol) || row.ul_lhs > row.ul_rhs * (1.0 + tol))
            rep.pass = false;
        rep.rows.push_back(row);
    }
    return rep;
}

RaResult verify_Ra(const RadialSolution& sol, const GrowthProfile& profile, double tol) {
    if (!profile.ko_holds())
        throw PreconditionError("R(a) <= Psi(a) undefined: Keller-Osserman integral diverges");
    RaResult res;
    res.R_hi = sol.R_hi;
    res.psi_a = profile.psi(sol.a).value;
    if (sol.status == RadialStatus::ReachedRmax) {
        res.verdict = Verdict::Inconclusive;
        res.reason = "no blow-up observed before r_max";
        return res;
    }
    if (sol.R_hi <= res.psi_a * (1.0 + tol)) {
        res.verdict = Verdict::Pass;
        res.reason = "R_hi " + fmt(sol.R_hi) + " <= Psi(a) " + fmt(res.psi_a);
    } else {
        res.verdict = Verdict::Fail;
        res.reason = "R_hi " + fmt(sol.R_hi) + " exceeds Psi(a) " + fmt(res.psi_a);
    }
    return res;
}

double radial_extension(const RadialSolution& sol, Point center, Point x) {
    const double d = distance(center, x);
    if (!(d < sol.R_lo))
        throw DomainError("radial extension at distance " + fmt(d) +
                          " outside the existence ball of radius " + fmt(sol.R_lo));
    const auto& n = sol.nodes;
    auto it = std::upper_bound(n.begin(), n.end(), d,
                               [](double v, const RadialNode& node) { return v < node.r; });
    std::size_t k = it == n.begin() ? 0 : static_cast<std::size_t>(it - n.begin()) - 1;
    k = std::min(k, n.size() - 2);
    const auto& p0 = n[k];
    const auto& p1 = n[k + 1];
    const double hh = p1.r - p0.r;
    if (hh <= 0.0) return p0.phi;
    const double sec = (p1.phi - p0.phi) / hh;
    double d0 = p0.dphi, d1 = p1.dphi;
    // Fritsch-Carlson limiter keeps the interpolant monotone.
    if (sec <= 0.0) {
        d0 = d1 = 0.0;
    } else {
        const double al = d0 / sec, be = d1 / sec, s2 = al * al + be * be;
        if (s2 > 9.0) {
            const double tau = 3.0 / std::sqrt(s2);
            d0 = tau * al * sec;
            d1 = tau * be * sec;
        }
    }
    const double s = (d - p0.r) / hh;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * p0.phi + h10 * hh * d0 + h01 * p1.phi + h11 * hh * d1;
}

void write_radial(const RadialSolution& sol, const NonlinearityPair& pair, std::ostream& os) {
    os << "# radial solution\n";
    os << "# a: " << fmt(sol.a) << "\n# q: " << fmt(sol.q) << "\n";
    os << "# pair: " << pair.describe() << "\n";
    os << "# status: " << to_string(sol.status) << "\n";
    os << "# R_bracket: " << fmt(sol.R_lo) << " " << fmt(sol.R_hi) << "\n";
    if (!sol.note.empty()) os << "# note: " << sol.note << "\n";
    for (const auto& n : sol.nodes) os << fmt(n.r) << " " << fmt(n.phi) << " " << fmt(n.dphi) << "\n";
}

}  // namespace infharnack
