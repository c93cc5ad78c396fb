#include "infharnack/growth_profile.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "infharnack/errors.hpp"
#include "infharnack/format.hpp"
#include "infharnack/quadrature.hpp"

namespace infharnack {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double integral(const ScalarFunction& fn, double a, double b, double tol) {
    if (a == b || fn.identically_zero()) return 0.0;
    if (auto exact = fn.exact_integral(a, b)) return *exact;
    auto r = quad::integrate([&](double x) { return fn(x); }, a, b, tol);
    return r.value;
}

double integral_span(const ScalarFunction& fn, double t, double delta, double tol) {
    if (delta == 0.0 || fn.identically_zero()) return 0.0;
    if (delta > 1e-4 * std::abs(t)) return integral(fn, t, t + delta, tol);
    return quad::integrate([&](double x) { return fn(t + x); }, 0.0, delta, tol).value;
}

double antiderivative(const ScalarFunction& fn, double t, double tol) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("antiderivative needs finite t >= 0");
    if (t == 0.0) return 0.0;
    constexpr int probes = 33;
    for (int i = 0; i <= probes; ++i) {
        double x = t * i / probes;
        double v = fn(x);
        if (v < 0.0)
            throw DomainError("antiderivative: integrand negative at t = " + fmt(x) + " (" +
                              fmt(v) + ")");
    }
    return integral(fn, 0.0, t, tol);
}

double C_of_q(double q) {
    if (!(q >= 0.0 && q < 2.0)) throw ArgumentError("C(q) needs 0 <= q < 2");
    return 0.5 * std::min(1.0, std::pow(2.0 - q, 1.0 / (2.0 - q)));
}

ConditionReport check_KO(const NonlinearityPair& pair, double tol) {
    ConditionReport rep;
    rep.parameters["ko_tol"] = tol;
    if (pair.f.identically_zero() && pair.g.identically_zero()) {
        rep.entries.push_back({ConditionId::KO, Verdict::Fail,
                               {{1.0, kInf, "F = G = 0: integrand infinite"}},
                               "F and G identically zero"});
        return rep;
    }
    const double e = 1.0 / (2.0 - pair.q);
    const double F1 = antiderivative(pair.f, 1.0), G1 = antiderivative(pair.g, 1.0);
    // F(s) = F(1) + int_1^s f keeps every evaluation a short integral.
    auto integrand = [&](double s) {
        double F = F1 + integral(pair.f, 1.0, s), G = G1 + integral(pair.g, 1.0, s);
        return 1.0 / (std::sqrt(std::max(F, 0.0)) + std::pow(std::max(G, 0.0), e));
    };
    quad::TailOptions opt;
    opt.rel_tol = tol;
    auto r = quad::integrate_to_infinity(integrand, 1.0, opt);
    rep.parameters["ko_integral"] = r.value;
    rep.parameters["ko_slope"] = r.slope;
    rep.parameters["ko_upper"] = r.upper;
    Witness w{r.upper, r.slope, "fitted log-log slope of integrand on last decade"};
    switch (r.kind) {
        case quad::TailKind::Convergent:
            rep.entries.push_back({ConditionId::KO, Verdict::Pass, {w},
                                   "integral converges to " + fmt(r.value)});
            break;
        case quad::TailKind::Divergent:
            rep.entries.push_back({ConditionId::KO, Verdict::Fail, {w},
                                   "integrand decays like 1/s or slower (slope " +
                                       fmt(r.slope) + ")"});
            break;
        case quad::TailKind::Inconclusive:
            rep.entries.push_back({ConditionId::KO, Verdict::Inconclusive, {w},
                                   "decay slope " + fmt(r.slope) + " too close to -1"});
            break;
    }
    return rep;
}

GrowthProfile::GrowthProfile(NonlinearityPair pair, ProfileOptions opt)
    : pair_(std::move(pair)), opt_(opt), cq_(C_of_q(pair_.q)) {
    if (!(opt_.table_lo > 0.0) || !(opt_.table_hi > opt_.table_lo) || opt_.table_nodes < 2)
        throw ArgumentError("profile table needs 0 < lo < hi and at least 2 nodes");
    if (!(opt_.quadrature_tol > 0.0)) throw ArgumentError("quadrature tolerance must be positive");
    ko_ = check_KO(pair_, opt_.quadrature_tol);
    ko_holds_ = ko_.get(ConditionId::KO).verdict != Verdict::Fail;

    auto nodes = log_grid(opt_.table_lo, opt_.table_hi, opt_.table_nodes);
    double Fprev = 0.0, Gprev = 0.0, sprev = 0.0;
    for (double s : nodes) {
        Fprev += integral(pair_.f, sprev, s, 1e-12);
        Gprev += integral(pair_.g, sprev, s, 1e-12);
        sprev = s;
        F_table_.emplace_back(s, Fprev);
        G_table_.emplace_back(s, Gprev);
    }
    if (ko_holds_) {
        for (double t : nodes) psi_table_.emplace_back(t, psi(t).value);
        psi0_ = compute_psi_zero_plus();
    } else {
        psi0_ = {kInf, true};
    }
}

std::pair<double, double> GrowthProfile::script_FG(double s, double t) const {
    if (!(t >= 0.0)) throw ArgumentError("script_FG needs t >= 0");
    if (s < t) throw ArgumentError("script_FG needs s >= t, got s = " + fmt(s) + ", t = " + fmt(t));
    return {integral(pair_.f, t, s, 1e-12), integral(pair_.g, t, s, 1e-12)};
}

std::pair<double, double> GrowthProfile::script_FG_span(double t, double delta) const {
    if (!(t >= 0.0) || !(delta >= 0.0)) throw ArgumentError("script_FG_span needs t, delta >= 0");
    return {integral_span(pair_.f, t, delta), integral_span(pair_.g, t, delta)};
}

double GrowthProfile::denominator(double F, double G) const {
    return std::sqrt(std::max(F, 0.0)) + std::pow(std::max(G, 0.0), 1.0 / (2.0 - pair_.q));
}

double GrowthProfile::integrand(double s, double t) const {
    auto [F, G] = script_FG(s, t);
    return 1.0 / denominator(F, G);
}

PsiValue GrowthProfile::psi(double t) const {
    if (t <= 0.0) return {psi0_.value, 0.0, psi0_.infinite};
    if (!ko_holds_) return {kInf, kInf, true};
    // With f(t) = 0 the sqrt(F) term is O(s - t); the endpoint is then integrable only
    // through G, which needs g(t) > 0 and q < 1.
    if (pair_.f.value(t) == 0.0 && (pair_.q >= 1.0 || !(pair_.g.value(t) > 0.0)))
        return {kInf, kInf, true};
    const double tol = opt_.quadrature_tol;
    // [t, 2t] with s = t + tau^2 removes the endpoint singularity.
    auto near = quad::integrate(
        [&](double tau) {
            if (tau == 0.0) return 0.0;
            auto [F, G] = script_FG_span(t, tau * tau);
            return 2.0 * tau / denominator(F, G);
        },
        0.0, std::sqrt(t), tol);
    // Keller-Osserman already settled convergence; the integrand may decay slowly
    // over the first decades when t is small, so never stop on a divergence guess.
    quad::TailOptions topt;
    topt.rel_tol = tol;
    topt.max_decades = 60;
    topt.divergent_decades = topt.max_decades + 1;
    auto far = quad::integrate_to_infinity([&](double s) { return integrand(s, t); }, 2.0 * t, topt);
    if (far.kind == quad::TailKind::Divergent) return {kInf, kInf, true};
    return {(near.value + far.value) / cq_, (near.error + far.error) / cq_, false};
}

PsiZeroPlus GrowthProfile::compute_psi_zero_plus() const {
    std::vector<double> v;
    for (int k = 0; k <= opt_.psi0_max_exponent; ++k) {
        const double t = std::pow(10.0, -k);
        auto p = psi(t);
        if (p.divergent || p.value > opt_.psi0_cap) return {kInf, true};
        v.push_back(p.value);
        const std::size_t n = v.size();
        if (n < 4) continue;
        const double d2 = v[n - 1] - v[n - 2], d1 = v[n - 2] - v[n - 3], d0 = v[n - 3] - v[n - 4];
        if (std::abs(d2) <= 10.0 * opt_.quadrature_tol * v.back() && d1 > 0 && d0 > 0 &&
            d2 < d1 && d1 < d0)
            return {v.back(), false};
    }
    const std::size_t n = v.size();
    const double d2 = v[n - 1] - v[n - 2], d1 = v[n - 2] - v[n - 3];
    if (d1 > 0 && d2 > 0 && d2 / d1 < 0.8) {
        const double r = d2 / d1;
        return {v.back() + d2 * r / (1.0 - r), false};
    }
    return {kInf, true};
}

double GrowthProfile::phi(double r) const {
    if (!(r > 0.0)) throw ArgumentError("Phi needs r > 0, got " + fmt(r));
    if (!ko_holds_) throw DomainError("Phi undefined: Keller-Osserman integral diverges");
    if (!psi0_.infinite && r >= psi0_.value)
        throw DomainError("Phi(" + fmt(r) + ") undefined: r >= Psi(0+) = " + fmt(psi0_.value));

    double tlo, thi, plo, phi_;
    const auto& tab = psi_table_;
    if (r > tab.front().second) {
        thi = tab.front().first;
        phi_ = tab.front().second;
        tlo = thi;
        plo = phi_;
        while (plo < r) {
            thi = tlo;
            phi_ = plo;
            tlo /= 10.0;
            if (tlo < 1e-300) throw DomainError("Phi(" + fmt(r) + "): no bracket found");
            plo = psi(tlo).value;
        }
    } else if (r < tab.back().second) {
        tlo = tab.back().first;
        plo = tab.back().second;
        thi = tlo;
        phi_ = plo;
        while (phi_ > r) {
            tlo = thi;
            plo = phi_;
            thi *= 10.0;
            if (thi > 1e300) throw DomainError("Phi(" + fmt(r) + "): no bracket found");
            phi_ = psi(thi).value;
        }
    } else {
        auto it = std::lower_bound(tab.begin(), tab.end(), r,
                                   [](const auto& node, double x) { return node.second > x; });
        // it->second <= r < (it-1)->second
        if (it->second == r) return it->first;
        thi = it->first;
        phi_ = it->second;
        tlo = std::prev(it)->first;
        plo = std::prev(it)->second;
    }
    if (plo == r) return tlo;
    if (phi_ == r) return thi;

    // Illinois iteration on log Psi(e^x) - log r, x = log t.
    const double lr = std::log(r);
    double xa = std::log(tlo), xb = std::log(thi);
    double fa = std::log(plo) - lr, fb = std::log(phi_) - lr;
    int side = 0;
    double x = xa;
    for (int it = 0; it < 200; ++it) {
        x = (xa * fb - xb * fa) / (fb - fa);
        if (!(x > std::min(xa, xb) && x < std::max(xa, xb))) x = 0.5 * (xa + xb);
        const double fx = std::log(psi(std::exp(x)).value) - lr;
        if (fx == 0.0) break;
        if ((fx > 0) == (fa > 0)) {
            xa = x;
            fa = fx;
            if (side == -1) fb *= 0.5;
            side = -1;
        } else {
            xb = x;
            fb = fx;
            if (side == 1) fa *= 0.5;
            side = 1;
        }
        if (std::abs(xb - xa) < opt_.inversion_tol || std::abs(fx) < 1e-14) break;
    }
    return std::exp(x);
}

double GrowthProfile::q_bound(double t) const {
    if (!(t > 0.0)) throw ArgumentError("Q needs t > 0, got " + fmt(t));
    if (!psi0_.infinite && t >= psi0_.value) return 0.0;
    return phi(t);
}

bool verify_limit_psi(const GrowthProfile& profile, const std::vector<double>& ts,
                      double threshold) {
    if (!profile.ko_holds())
        throw PreconditionError("limit of Psi undefined: Keller-Osserman integral diverges");
    if (ts.empty()) throw ArgumentError("verify_limit_psi: empty t-sequence");
    double prev = kInf;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i > 0 && !(ts[i] > ts[i - 1]))
            throw ArgumentError("verify_limit_psi: t-sequence must increase");
        double v = profile.psi(ts[i]).value;
        if (!(v < prev)) return false;
        prev = v;
    }
    return prev < threshold;
}

Ap1TailResult ap1_tail_check(const HFunction& h, double t, double theta, double varrho,
                             double t0, double tol) {
    if (!(theta > 1.0) || !(varrho > 1.0)) throw ArgumentError("ap1: need theta > 1, varrho > 1");
    if (!(t >= t0) || !(t > 0.0)) throw ArgumentError("ap1: need t >= t0 > 0");
    Ap1TailResult res;
    res.p = std::log(varrho) / std::log(theta);
    const double tp = std::pow(theta, res.p);
    res.rhs = tp * std::log(theta) / (tp - 1.0) / h(t);
    quad::TailOptions opt;
    opt.rel_tol = 1e-12;
    opt.max_decades = 60;
    auto r = quad::integrate_to_infinity([&](double s) { return 1.0 / (s * h(s)); }, t, opt);
    res.lhs = r.value;
    if (r.kind == quad::TailKind::Divergent) {
        res.pass = false;
        res.lhs = kInf;
        res.diagnostic = "integral of 1/(s h) diverges (tail slope " + fmt(r.slope) + ")";
        return res;
    }
    res.pass = res.lhs <= res.rhs * (1.0 + tol);
    res.diagnostic = res.pass ? "bound holds" : "lhs exceeds bound";
    return res;
}

bool ap1_log_limit(const HFunction& h, const std::vector<double>& ts, double threshold,
                   double theta) {
    if (ts.size() < 2) throw ArgumentError("ap1_log_limit: need at least two points");
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!(ts[i] > 1.0)) throw ArgumentError("ap1_log_limit: points must exceed 1");
        if (i > 0 && !(ts[i] > ts[i - 1]))
            throw ArgumentError("ap1_log_limit: points must increase");
        if (!(h(theta * ts[i]) > h(ts[i]) * (1.0 + 1e-9)))
            throw PreconditionError("ap1_log_limit: h(theta t)/h(t) <= 1 at t = " + fmt(ts[i]) +
                                    "; growth condition fails");
    }
    const double first = std::log(ts.front()) / h(ts.front());
    const double last = std::log(ts.back()) / h(ts.back());
    return last < first && last < threshold;
}

Ap2Result ap2_estimate(const GrowthProfile& profile, const std::vector<double>& r_grid,
                       double t0) {
    const auto& pair = profile.pair();
    const bool log_branch = pair.q == 1.0;
    if (!(t0 > 0.0)) throw ArgumentError("ap2: t0 must be positive");
    if (log_branch && !(t0 > 1.0)) throw ArgumentError("ap2: q = 1 requires t0 > 1");
    if (r_grid.empty()) throw ArgumentError("ap2: empty r-grid");
    const auto pt0 = profile.psi(t0);
    if (pt0.divergent) throw DomainError("ap2: Psi diverges");
    Ap2Result res;
    res.t0 = t0;
    for (double r : r_grid) {
        if (!(r > 0.0) || r > pt0.value * (1.0 + 1e-12))
            throw ArgumentError("ap2: r = " + fmt(r) + " outside (0, Psi(t0)] = (0, " +
                                fmt(pt0.value) + "]");
        const double ph = profile.phi(std::min(r, pt0.value));
        const double L = h_value(pair, ph);
        const double scaled = log_branch ? L * r / std::log(ph) : L * r;
        res.table.push_back({r, ph, L, scaled});
        res.C_estimate = std::max(res.C_estimate, scaled);
    }
    return res;
}

void dump_profile(const GrowthProfile& profile, std::ostream& os) {
    os << "# infharnack growth profile\n";
    os << "# pair: " << profile.pair().describe() << "\n";
    os << "# q: " << fmt(profile.pair().q) << "\n";
    os << "# C_q: " << fmt(profile.C_q()) << "\n";
    os << "# quadrature_tol: " << fmt(profile.options().quadrature_tol) << "\n";
    const auto p0 = profile.psi_zero_plus();
    os << "# psi_zero_plus: " << (p0.infinite ? std::string("inf") : fmt(p0.value)) << "\n";
    auto table = [&](const char* name, const auto& rows) {
        os << "# table " << name << "\n";
        for (const auto& [x, y] : rows) os << fmt(x) << " " << fmt(y) << "\n";
    };
    table("F", profile.F_table());
    table("G", profile.G_table());
    table("Psi", profile.psi_table());
}

ProfileTables load_profile_tables(std::istream& is) {
    ProfileTables out;
    std::string line, current;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            body.erase(0, body.find_first_not_of(' '));
            if (body.rfind("table ", 0) == 0) {
                current = body.substr(6);
                out.tables[current];
            } else if (auto c = body.find(':'); c != std::string::npos) {
                std::string key = body.substr(0, c), val = body.substr(c + 1);
                val.erase(0, val.find_first_not_of(' '));
                out.header[key] = val;
            }
            continue;
        }
        if (current.empty()) throw ParseError("data row before any table header", lineno);
        std::istringstream ss(line);
        std::string a, b;
        if (!(ss >> a >> b)) throw ParseError("expected two columns", lineno);
        try {
            out.tables[current].emplace_back(std::stod(a), std::stod(b));
        } catch (const std::exception&) {
            throw ParseError("non-numeric value", lineno);
        }
    }
    return out;
}

}  // namespace infharnack
