#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace infharnack::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> xk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

// One Gauss-Kronrod 7/15 panel with the QUADPACK error heuristic.
template <class F>
Panel gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double rk = fc * wk[7], rg = fc * wg[3], abs_k = std::abs(rk);
    std::array<double, 7> f1{}, f2{};
    for (int j = 0; j < 7; ++j) {
        double dx = h * xk[j];
        f1[j] = f(c - dx);
        f2[j] = f(c + dx);
        rk += wk[j] * (f1[j] + f2[j]);
        abs_k += wk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) rg += wg[j / 2] * (f1[j] + f2[j]);
    }
    const double mean = 0.5 * rk;
    double asc = wk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) asc += wk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    double err = std::abs((rk - rg) * h);
    asc *= std::abs(h);
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    if (abs_k * std::abs(h) > std::numeric_limits<double>::min() / (50 * eps))
        err = std::max(50 * eps * abs_k * std::abs(h), err);
    return {a, b, rk * h, err};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod quadrature of f over the finite interval [a, b].
template <class F>
Result integrate(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0,
                 int max_panels = 4000) {
    Result r;
    if (a == b) {
        r.converged = true;
        return r;
    }
    std::priority_queue<detail::Panel> heap;
    auto first = detail::gk15(f, a, b);
    heap.push(first);
    double total = first.value, err = first.error;
    r.evaluations = 15;
    int panels = 1;
    while (err > std::max(abs_tol, rel_tol * std::abs(total)) && panels < max_panels) {
        auto p = heap.top();
        heap.pop();
        const double m = 0.5 * (p.a + p.b);
        if (m <= p.a || m >= p.b) {  // cannot split further
            heap.push(p);
            break;
        }
        auto l = detail::gk15(f, p.a, m), rr = detail::gk15(f, m, p.b);
        r.evaluations += 30;
        total += l.value + rr.value - p.value;
        err += l.error + rr.error - p.error;
        heap.push(l);
        heap.push(rr);
        ++panels;
    }
    // Re-sum to remove drift from incremental updates.
    total = 0.0;
    err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    r.value = total;
    r.error = err;
    r.converged = err <= std::max(abs_tol, rel_tol * std::abs(total));
    return r;
}

// Least-squares slope of log|f| against log s over n log-spaced samples of [lo, hi].
// Samples where f vanishes are skipped; returns NaN with fewer than 3 usable samples.
template <class F>
double loglog_slope(F&& f, double lo, double hi, int n = 9) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    const double l0 = std::log(lo), l1 = std::log(hi);
    for (int i = 0; i < n; ++i) {
        double x = l0 + (l1 - l0) * i / (n - 1);
        double y = std::abs(f(std::exp(x)));
        if (!(y > 0.0) || !std::isfinite(y)) continue;
        double ly = std::log(y);
        sx += x;
        sy += ly;
        sxx += x * x;
        sxy += x * ly;
        ++m;
    }
    if (m < 3) return std::numeric_limits<double>::quiet_NaN();
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

enum class TailKind { Convergent, Divergent, Inconclusive };

struct TailResult {
    double value = 0.0;   // integral over [a, upper] plus the tail estimate
    double error = 0.0;   // quadrature error plus |tail|
    double tail = 0.0;    // estimated contribution of [upper, inf)
    double slope = 0.0;   // last fitted log-log slope
    double upper = 0.0;   // truncation point T
    int decades = 0;
    TailKind kind = TailKind::Inconclusive;
};

struct TailOptions {
    double rel_tol = 1e-10;
    double delta = 0.05;  // slope <= -(1 + delta) counts as convergent decay
    int max_decades = 40;
    int divergent_decades = 3;
};

// Integral of f over [a, inf), a > 0, integrated decade by decade.  After each decade
// the decay exponent is fitted on that decade; a power-law tail f(T) T / (-slope - 1)
// is added once it drops below rel_tol / 10 of the running sum.
template <class F>
TailResult integrate_to_infinity(F&& f, double a, const TailOptions& opt = {}) {
    TailResult out;
    double lo = a, sum = 0.0, qerr = 0.0;
    int slow = 0;
    for (int k = 0; k < opt.max_decades; ++k) {
        const double hi = lo * 10.0;
        auto seg = integrate(f, lo, hi, opt.rel_tol, 0.1 * opt.rel_tol * std::abs(sum));
        sum += seg.value;
        qerr += seg.error;
        out.decades = k + 1;
        out.upper = hi;
        const double slope = loglog_slope(f, lo, hi);
        const double fhi = std::abs(f(hi));
        lo = hi;
        if (std::isnan(slope) || fhi == 0.0) {
            // Integrand has vanished numerically: nothing left beyond hi.
            out.kind = TailKind::Convergent;
            out.tail = 0.0;
            out.slope = -std::numeric_limits<double>::infinity();
            break;
        }
        out.slope = slope;
        if (slope <= -(1.0 + opt.delta)) {
            slow = 0;
            const double tail = fhi * hi / (-slope - 1.0);
            out.tail = tail;
            out.kind = TailKind::Convergent;
            if (tail <= 0.1 * opt.rel_tol * std::abs(sum + tail)) break;
        } else if (slope >= -1.0 - 1e-6) {
            out.kind = TailKind::Divergent;
            out.tail = std::numeric_limits<double>::infinity();
            if (++slow >= opt.divergent_decades) break;
        } else {
            slow = 0;
            out.kind = TailKind::Inconclusive;
            out.tail = fhi * hi / (-slope - 1.0);
        }
    }
    out.value = sum + out.tail;
    out.error = qerr + std::abs(out.tail);
    return out;
}

}  // namespace infharnack::quad
