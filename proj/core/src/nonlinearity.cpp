#include "infharnack/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "infharnack/errors.hpp"
#include "infharnack/format.hpp"

namespace infharnack {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool increases_strictly(double a, double b, double rel) {
    return b > a + rel * std::max(std::abs(a), std::abs(b));
}

bool decreases_beyond(double a, double b, double rel) {
    return b < a - rel * std::max(std::abs(a), std::abs(b));
}

double logsumexp(double x, double y) {
    if (x == -kInf) return y;
    if (y == -kInf) return x;
    double m = std::max(x, y);
    return m + std::log1p(std::exp(std::min(x, y) - m));
}

ConditionEntry entry(ConditionId id, Verdict v, std::string reason,
                     std::vector<Witness> ev = {}) {
    return ConditionEntry{id, v, std::move(ev), std::move(reason)};
}

}  // namespace

NonlinearityPair::NonlinearityPair(ScalarFunction f_, ScalarFunction g_, double q_)
    : f(std::move(f_)), g(std::move(g_)), q(q_) {
    if (!(q >= 0.0 && q < 2.0)) throw ArgumentError("q must lie in [0, 2), got " + fmt(q));
}

std::string NonlinearityPair::describe() const {
    return "f = " + f.describe() + "; g = " + g.describe() + "; q = " + fmt(q);
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

const char* to_string(ConditionId id) {
    switch (id) {
        case ConditionId::Pa: return "P_a";
        case ConditionId::Pb: return "P_b";
        case ConditionId::C1: return "C1";
        case ConditionId::C2: return "C2";
        case ConditionId::C3: return "C3";
        case ConditionId::C4: return "C4";
        case ConditionId::KO: return "KO_q";
        case ConditionId::GZero: return "G_ZERO";
        case ConditionId::HEpsMonotone: return "H_EPS_MONOTONE";
    }
    return "?";
}

Verdict ConditionReport::overall() const {
    Verdict v = Verdict::Pass;
    for (const auto& e : entries) {
        if (e.verdict == Verdict::Fail) return Verdict::Fail;
        if (e.verdict == Verdict::Inconclusive) v = Verdict::Inconclusive;
    }
    return v;
}

const ConditionEntry& ConditionReport::get(ConditionId id) const {
    for (const auto& e : entries)
        if (e.id == id) return e;
    throw ArgumentError(std::string("report has no entry ") + to_string(id));
}

bool ConditionReport::has(ConditionId id) const {
    return std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.id == id; });
}

void ConditionReport::merge(const ConditionReport& other) {
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
    for (const auto& [k, v] : other.parameters) parameters[k] = v;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw ArgumentError("log_grid needs 0 < lo < hi, n >= 2");
    std::vector<double> out(static_cast<std::size_t>(n));
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

double h_value(const NonlinearityPair& pair, double s) {
    if (!(s > 0.0)) throw DomainError("h requires s > 0, got " + fmt(s));
    const double fs = pair.f(s), gs = pair.g(s);
    if (fs < 0.0 || gs < 0.0)
        throw DomainError("h requires f(s), g(s) >= 0 at s = " + fmt(s));
    double r = std::sqrt(fs / s) + std::pow(gs / std::pow(s, 1.0 - pair.q), 1.0 / (2.0 - pair.q));
    if (!std::isfinite(r)) return std::exp(log_h_value(pair, s));
    return r;
}

double log_h_value(const NonlinearityPair& pair, double s) {
    if (!(s > 0.0)) throw DomainError("h requires s > 0, got " + fmt(s));
    const double lf = pair.f.log_value(s), lg = pair.g.log_value(s);
    if (std::isnan(lf) || std::isnan(lg) || pair.f(s) < 0.0 || pair.g(s) < 0.0)
        throw DomainError("h requires f(s), g(s) >= 0 at s = " + fmt(s));
    const double ls = std::log(s);
    const double a = lf == -kInf ? -kInf : 0.5 * (lf - ls);
    const double b = lg == -kInf ? -kInf : (lg - (1.0 - pair.q) * ls) / (2.0 - pair.q);
    return logsumexp(a, b);
}

double h_epsilon_value(const NonlinearityPair& pair, double s, double eps) {
    if (!(eps > 0.0)) throw ArgumentError("h_epsilon requires eps > 0, got " + fmt(eps));
    if (!(s >= 0.0)) throw DomainError("h_epsilon requires s >= 0, got " + fmt(s));
    const double fs = pair.f(s), gs = pair.g(s);
    if (fs < 0.0 || gs < 0.0)
        throw DomainError("h_epsilon requires f(s), g(s) >= 0 at s = " + fmt(s));
    const double se = s + eps;
    return std::sqrt(fs / se) + std::pow(gs / std::pow(se, 1.0 - pair.q), 1.0 / (2.0 - pair.q));
}

ConditionReport check_condition_P(const NonlinearityPair& pair,
                                  const std::vector<double>& grid) {
    if (grid.empty()) throw ArgumentError("condition P: empty sample grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || !std::isfinite(grid[i]))
            throw ArgumentError("condition P: sample grid must lie in (0, inf)");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw ArgumentError("condition P: sample grid must be strictly increasing");
    }
    ConditionReport rep;
    rep.parameters["grid_min"] = grid.front();
    rep.parameters["grid_max"] = grid.back();

    // (a) f(-t) < 0 < f(t)
    {
        ConditionEntry e = entry(ConditionId::Pa, Verdict::Pass, "f(-t) < 0 < f(t) on the grid");
        for (double t : grid) {
            double fp = pair.f(t);
            if (!(fp > 0.0)) {
                e = entry(ConditionId::Pa, Verdict::Fail, "f(t) <= 0 at t = " + fmt(t),
                          {{t, fp, "f(t)"}});
                break;
            }
            double fm;
            try {
                fm = pair.f(-t);
            } catch (const DomainError& err) {
                e = entry(ConditionId::Pa, Verdict::Inconclusive,
                          "f undefined at negative arguments: " + std::string(err.what()));
                break;
            }
            if (!(fm < 0.0)) {
                e = entry(ConditionId::Pa, Verdict::Fail, "f(-t) >= 0 at t = " + fmt(t),
                          {{-t, fm, "f(-t)"}});
                break;
            }
        }
        rep.entries.push_back(std::move(e));
    }

    // (b) f or g strictly increasing
    {
        auto first_plateau = [&](const ScalarFunction& fn) -> std::optional<Witness> {
            if (grid.size() < 2) return std::nullopt;
            double prev = fn(grid[0]);
            for (std::size_t i = 1; i < grid.size(); ++i) {
                double cur = fn(grid[i]);
                if (!increases_strictly(prev, cur, 1e-12))
                    return Witness{grid[i], cur,
                                   "not above previous sample " + fmt(prev) + " at t = " +
                                       fmt(grid[i - 1])};
                prev = cur;
            }
            return std::nullopt;
        };
        auto wf = first_plateau(pair.f);
        auto wg = first_plateau(pair.g);
        if (!wf)
            rep.entries.push_back(entry(ConditionId::Pb, Verdict::Pass, "f strictly increasing"));
        else if (!wg)
            rep.entries.push_back(entry(ConditionId::Pb, Verdict::Pass, "g strictly increasing"));
        else {
            wf->note = "f " + wf->note;
            wg->note = "g " + wg->note;
            rep.entries.push_back(entry(ConditionId::Pb, Verdict::Fail,
                                        "neither f nor g strictly increasing", {*wf, *wg}));
        }
    }
    return rep;
}

ConditionReport check_C1_C2(const NonlinearityPair& pair, double theta, const GrowthWindow& w) {
    if (!(theta > 1.0)) throw ArgumentError("C1/C2: theta must exceed 1");
    if (!(w.t0 > 0.0) || !(w.t1 / theta > w.t0))
        throw ArgumentError("C1/C2: window needs 0 < T0 < T1/theta");
    if (w.samples < 16) throw ArgumentError("C1/C2: at least 16 samples required");
    if (!(w.margin > 0.0)) throw ArgumentError("C1/C2: margin must be positive");

    ConditionReport rep;
    rep.parameters["theta"] = theta;
    rep.parameters["window_lo"] = w.t0;
    rep.parameters["window_hi"] = w.t1;
    rep.parameters["margin"] = w.margin;

    // C1: h non-decreasing
    {
        auto ts = log_grid(w.t0, w.t1, w.samples);
        ConditionEntry e = entry(ConditionId::C1, Verdict::Pass, "h non-decreasing on window");
        double prev = log_h_value(pair, ts[0]);
        for (std::size_t i = 1; i < ts.size(); ++i) {
            double cur = log_h_value(pair, ts[i]);
            bool drop = (prev > -kInf) && (cur < prev - 1e-12 * std::max(1.0, std::abs(prev)));
            if (drop) {
                e = entry(ConditionId::C1, Verdict::Fail,
                          "h decreases between t = " + fmt(ts[i - 1]) + " and t = " + fmt(ts[i]),
                          {{ts[i - 1], std::exp(prev), "h"}, {ts[i], std::exp(cur), "h"}});
                break;
            }
            prev = cur;
        }
        rep.entries.push_back(std::move(e));
    }

    // C2: min of h(theta t)/h(t) over the upper half (log scale) of the admissible t-range
    {
        const double hi = w.t1 / theta;
        const double lo = std::sqrt(w.t0 * hi);
        auto ts = log_grid(lo, hi, w.samples);
        double min_ratio = kInf, argmin = lo;
        std::optional<Witness> vanish;
        for (double t : ts) {
            double a = log_h_value(pair, t), b = log_h_value(pair, theta * t);
            if (a == -kInf) {
                vanish = Witness{t, 0.0, "h(t) = 0, ratio undefined"};
                break;
            }
            double r = std::exp(b - a);
            if (r < min_ratio) {
                min_ratio = r;
                argmin = t;
            }
        }
        rep.parameters["c2_window_lo"] = lo;
        rep.parameters["c2_window_hi"] = hi;
        if (vanish) {
            rep.parameters["ratio"] = std::numeric_limits<double>::quiet_NaN();
            rep.entries.push_back(entry(ConditionId::C2, Verdict::Fail, "h vanishes", {*vanish}));
        } else {
            rep.parameters["ratio"] = min_ratio;
            Witness wt{argmin, min_ratio, "h(theta t)/h(t)"};
            if (min_ratio <= 1.0 + 1e-9)
                rep.entries.push_back(entry(ConditionId::C2, Verdict::Fail,
                                            "h(theta t)/h(t) = " + fmt(min_ratio) +
                                                " does not exceed 1",
                                            {wt}));
            else if (min_ratio <= 1.0 + w.margin)
                rep.entries.push_back(entry(ConditionId::C2, Verdict::Inconclusive,
                                            "ratio " + fmt(min_ratio) + " within margin of 1",
                                            {wt}));
            else
                rep.entries.push_back(entry(ConditionId::C2, Verdict::Pass,
                                            "min ratio " + fmt(min_ratio), {wt}));
        }
    }
    return rep;
}

ConditionReport check_C3_C4(const NonlinearityPair& pair, const C3C4Options& opt) {
    if (pair.q != 1.0) throw ArgumentError("C3/C4 apply only to q = 1, got q = " + fmt(pair.q));
    const auto& w = opt.window;
    if (!(w.t0 > 1.0) || !(w.t1 > w.t0))
        throw ArgumentError("C3/C4: window needs 1 < T0 < T1");
    if (w.samples < 16) throw ArgumentError("C3/C4: at least 16 samples required");

    ConditionReport rep;
    rep.parameters["window_lo"] = w.t0;
    rep.parameters["window_hi"] = w.t1;
    rep.parameters["margin"] = w.margin;
    rep.parameters["c4_cap"] = opt.c4_cap;
    const double mid = std::sqrt(w.t0 * w.t1);

    // C3: f -> infinity, judged by monotone growth across the upper half
    {
        auto ts = log_grid(w.t0, w.t1, w.samples);
        std::optional<ConditionEntry> bad;
        double prev = pair.f.log_value(ts[0]);
        for (std::size_t i = 1; i < ts.size() && !bad; ++i) {
            double cur = pair.f.log_value(ts[i]);
            if (cur < prev - 1e-12 * std::max(1.0, std::abs(prev)))
                bad = entry(ConditionId::C3, Verdict::Fail, "f decreases on the window",
                            {{ts[i - 1], pair.f(ts[i - 1]), "f"}, {ts[i], pair.f(ts[i]), "f"}});
            prev = cur;
        }
        if (bad) {
            rep.entries.push_back(*bad);
        } else {
            double lm = pair.f.log_value(mid), le = pair.f.log_value(w.t1);
            double growth = (lm == -kInf) ? (le == -kInf ? 0.0 : kInf) : std::expm1(le - lm);
            rep.parameters["c3_growth"] = growth;
            std::vector<Witness> ev{{mid, pair.f(mid), "f"}, {w.t1, pair.f(w.t1), "f"}};
            if (growth <= 1e-9)
                rep.entries.push_back(
                    entry(ConditionId::C3, Verdict::Fail, "f flat on the upper window", ev));
            else if (growth <= w.margin)
                rep.entries.push_back(entry(ConditionId::C3, Verdict::Inconclusive,
                                            "f growth " + fmt(growth) + " within margin", ev));
            else
                rep.entries.push_back(
                    entry(ConditionId::C3, Verdict::Pass, "f grows by " + fmt(growth), ev));
        }
    }

    // C4: g(t) / (log t sqrt f(t)) bounded
    {
        auto log_ratio = [&](double t) {
            double lf = pair.f.log_value(t), lg = pair.g.log_value(t);
            if (lg == -kInf) return -kInf;
            if (lf == -kInf) return kInf;
            return lg - std::log(std::log(t)) - 0.5 * lf;
        };
        auto ts = log_grid(mid, w.t1, w.samples);
        double lmax = -kInf, tmax = mid;
        for (double t : ts) {
            double lr = log_ratio(t);
            if (lr > lmax) {
                lmax = lr;
                tmax = t;
            }
        }
        double first = log_ratio(mid), last = log_ratio(w.t1);
        double rmax = std::exp(lmax);
        double trend = (first == -kInf) ? (last == -kInf ? 1.0 : kInf) : std::exp(last - first);
        rep.parameters["c4_max_ratio"] = rmax;
        rep.parameters["c4_trend"] = trend;
        Witness wmax{tmax, rmax, "g/(log t sqrt f)"};
        if (rmax > opt.c4_cap)
            rep.entries.push_back(entry(ConditionId::C4, Verdict::Fail,
                                        "ratio " + fmt(rmax) + " exceeds cap " + fmt(opt.c4_cap),
                                        {wmax}));
        else if (trend > 1.0 + w.margin)
            rep.entries.push_back(entry(ConditionId::C4, Verdict::Fail,
                                        "ratio grows by factor " + fmt(trend) + " across window",
                                        {{w.t1, std::exp(last), "g/(log t sqrt f)"}}));
        else if (rmax >= opt.c4_cap / (1.0 + w.margin) && trend > 1.0 - w.margin)
            rep.entries.push_back(entry(ConditionId::C4, Verdict::Inconclusive,
                                        "ratio flat near cap", {wmax}));
        else
            rep.entries.push_back(entry(ConditionId::C4, Verdict::Pass,
                                        "max ratio " + fmt(rmax) + ", trend " + fmt(trend),
                                        {wmax}));
    }
    return rep;
}

ConditionReport check_g_zero(const NonlinearityPair& pair, double abs_tol) {
    if (pair.q >= 1.0)
        throw PreconditionError("g(0) = 0 consistency applies to q < 1, got q = " + fmt(pair.q));
    ConditionReport rep;
    const double g0 = pair.g(0.0);
    rep.parameters["g0"] = g0;
    if (std::abs(g0) <= abs_tol)
        rep.entries.push_back(entry(ConditionId::GZero, Verdict::Pass, "g(0) = 0"));
    else
        rep.entries.push_back(entry(ConditionId::GZero, Verdict::Fail,
                                    "g(0) = " + fmt(g0) + " but q < 1 forces g(0) = 0",
                                    {{0.0, g0, "g(0)"}}));
    return rep;
}

ConditionReport verify_dif_monotonicity(const NonlinearityPair& pair,
                                        const std::vector<double>& eps_list,
                                        const std::vector<double>& t_grid) {
    if (eps_list.empty() || t_grid.empty())
        throw ArgumentError("dif monotonicity: empty epsilon list or grid");
    for (double e : eps_list)
        if (!(e > 0.0)) throw ArgumentError("dif monotonicity: epsilon must be positive");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw ArgumentError("dif monotonicity: grid must be strictly increasing");
    if (t_grid.front() < 0.0) throw ArgumentError("dif monotonicity: grid must be >= 0");

    constexpr double rel = 1e-10;
    // Hypothesis: h non-decreasing at the positive grid points.
    {
        double prev = -kInf, tprev = 0.0;
        for (double t : t_grid) {
            if (t <= 0.0) continue;
            double cur = h_value(pair, t);
            if (decreases_beyond(prev, cur, rel) && prev > -kInf)
                throw PreconditionError("h decreases between t = " + fmt(tprev) + " and t = " +
                                        fmt(t) + "; the monotonicity hypothesis fails");
            prev = cur;
            tprev = t;
        }
    }
    ConditionReport rep;
    rep.parameters["eps_count"] = static_cast<double>(eps_list.size());
    rep.parameters["grid_size"] = static_cast<double>(t_grid.size());
    for (double eps : eps_list) {
        double prev = h_epsilon_value(pair, t_grid[0], eps);
        for (std::size_t i = 1; i < t_grid.size(); ++i) {
            double cur = h_epsilon_value(pair, t_grid[i], eps);
            if (decreases_beyond(prev, cur, rel)) {
                rep.entries.push_back(entry(
                    ConditionId::HEpsMonotone, Verdict::Fail,
                    "h_eps decreases for eps = " + fmt(eps),
                    {{t_grid[i - 1], prev, "h_eps, eps = " + fmt(eps)},
                     {t_grid[i], cur, "h_eps, eps = " + fmt(eps)}}));
                return rep;
            }
            prev = cur;
        }
    }
    rep.entries.push_back(entry(ConditionId::HEpsMonotone, Verdict::Pass,
                                "h_eps non-decreasing for every eps"));
    return rep;
}

}  // namespace infharnack
