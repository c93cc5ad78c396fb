#include "runner/runner.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "infharnack/errors.hpp"
#include "infharnack/format.hpp"
#include "infharnack/grid_solver.hpp"
#include "infharnack/growth_profile.hpp"
#include "infharnack/harnack.hpp"
#include "infharnack/radial_ode.hpp"

namespace infharnack::cli {

namespace {

Verdict worst(Verdict a, Verdict b) {
    if (a == Verdict::Fail || b == Verdict::Fail) return Verdict::Fail;
    if (a == Verdict::Inconclusive || b == Verdict::Inconclusive) return Verdict::Inconclusive;
    return Verdict::Pass;
}

Verdict of(bool pass) { return pass ? Verdict::Pass : Verdict::Fail; }
const char* pf(bool pass) { return pass ? "pass" : "fail"; }

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c == '\n' ? ' ' : c;
    }
    return q + '"';
}

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

class Output {
public:
    Output(std::filesystem::path dir) : dir_(std::move(dir)) {}

    Table& table(std::string name, std::vector<std::string> header) {
        tables_.push_back(Table{std::move(name), std::move(header), {}});
        return tables_.back();
    }
    // Pre-formatted block with its own header line.
    void raw(std::string name, std::string body) { raws_.emplace_back(tables_.size(), name, body); }

    void set(const std::string& key, const std::string& value) {
        for (auto& kv : manifest_)
            if (kv.first == key) {
                kv.second = value;
                return;
            }
        manifest_.emplace_back(key, value);
    }
    void set(const std::string& key, double value) { set(key, fmt(value)); }
    void set(const std::string& key, long value) { set(key, std::to_string(value)); }
    void set(const std::string& key, int value) { set(key, std::to_string(value)); }
    void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }
    void set(const std::string& key, const char* value) { set(key, std::string(value)); }

    // Columns of numbers, one row per line.
    void plot(const std::string& tag, const std::vector<std::string>& columns,
              const std::function<void(std::ostream&)>& body) {
        plots_.push_back({tag, columns, body});
    }

    std::vector<std::filesystem::path> write(const std::string& config_text) const {
        std::filesystem::create_directories(dir_);
        std::vector<std::filesystem::path> files;

        const auto report = dir_ / "report.csv";
        {
            std::ofstream os(report);
            std::size_t r = 0;
            bool first = true;
            auto sep = [&] {
                if (!first) os << '\n';
                first = false;
            };
            auto flush_raw = [&](std::size_t before) {
                for (; r < raws_.size() && std::get<0>(raws_[r]) <= before; ++r) {
                    sep();
                    os << "# " << std::get<1>(raws_[r]) << '\n' << std::get<2>(raws_[r]);
                }
            };
            for (std::size_t t = 0; t < tables_.size(); ++t) {
                flush_raw(t);
                sep();
                const auto& tb = tables_[t];
                os << "# " << tb.name << '\n';
                for (std::size_t i = 0; i < tb.header.size(); ++i)
                    os << (i ? "," : "") << tb.header[i];
                os << '\n';
                for (const auto& row : tb.rows) {
                    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
                    os << '\n';
                }
            }
            flush_raw(tables_.size());
        }
        files.push_back(report);

        const auto manifest = dir_ / "manifest.txt";
        {
            std::ofstream os(manifest);
            for (const auto& [k, v] : manifest_) os << k << " = " << v << '\n';
            os << "\n# configuration\n" << config_text;
            if (!config_text.empty() && config_text.back() != '\n') os << '\n';
        }
        files.push_back(manifest);

        for (const auto& p : plots_) {
            const auto path = dir_ / ("plotdata_" + p.tag + ".dat");
            std::ofstream os(path);
            os << '#';
            for (const auto& c : p.columns) os << ' ' << c;
            os << '\n';
            p.body(os);
            files.push_back(path);
        }
        return files;
    }

private:
    struct Plot {
        std::string tag;
        std::vector<std::string> columns;
        std::function<void(std::ostream&)> body;
    };
    std::filesystem::path dir_;
    std::deque<Table> tables_;  // stable references from table()
    std::vector<std::tuple<std::size_t, std::string, std::string>> raws_;
    std::vector<std::pair<std::string, std::string>> manifest_;
    std::vector<Plot> plots_;
};

const std::set<std::string> kSolveSections = {"pair", "coefficients", "domain", "grid", "solver",
                                              "boundary"};

std::set<std::string> with(std::set<std::string> base, std::initializer_list<std::string> more) {
    base.insert(more.begin(), more.end());
    return base;
}

Point domain_center(const Domain& d) {
    if (const auto* r = std::get_if<Rectangle>(&d)) return {(r->x0 + r->x1) / 2, (r->y0 + r->y1) / 2};
    return std::get<Disk>(d).center;
}

void record_pair(Output& out, const NonlinearityPair& pair) {
    out.set("pair", pair.describe());
    out.set("q", pair.q);
    out.set("C_q", C_of_q(pair.q));
}

ProfileOptions read_profile(const Config& c, Output& out) {
    const auto& s = c.optional("profile");
    s.restrict_to({"nodes", "lo", "hi", "tol", "psi0_cap", "t"});
    ProfileOptions o;
    o.table_nodes = static_cast<int>(s.integer("nodes", o.table_nodes));
    o.table_lo = s.num("lo", o.table_lo);
    o.table_hi = s.num("hi", o.table_hi);
    o.quadrature_tol = s.num("tol", o.quadrature_tol);
    o.psi0_cap = s.num("psi0_cap", o.psi0_cap);
    out.set("profile.table_nodes", o.table_nodes);
    out.set("profile.table_lo", o.table_lo);
    out.set("profile.table_hi", o.table_hi);
    out.set("profile.quadrature_tol", o.quadrature_tol);
    out.set("profile.inversion_tol", o.inversion_tol);
    return o;
}

struct SolveSetup {
    DirichletSpec spec;
    int n = 129;
    SolverOptions solver;
    bool cascade = true;
    int coarsest = 17;
};

SolveSetup read_solve(const Config& c, Output& out, bool need_pair, bool need_coefficients) {
    SolveSetup s;
    s.spec.domain = parse_domain(c.section("domain"));
    const auto& g = c.section("grid");
    s.spec.stencil = parse_stencil(g);
    s.n = static_cast<int>(g.integer("n", s.n));
    const auto& sv = c.optional("solver");
    s.cascade = sv.flag("cascade", true);
    s.coarsest = static_cast<int>(sv.integer("coarsest", 17));
    s.solver = parse_solver(sv);

    const auto& b = c.section("boundary");
    b.restrict_to({"data", "mode"});
    const Point center = domain_center(s.spec.domain);
    s.spec.boundary = parse_point_function(b.str("data"), center, b.entry("data").line);
    const std::string mode = b.str("mode", "projected");
    if (mode == "projected") s.spec.mode = BoundaryMode::Projected;
    else if (mode == "exact") s.spec.mode = BoundaryMode::Exact;
    else throw ParseError("[boundary] mode must be projected or exact", b.entry("mode").line);

    const bool has_pair = c.has("pair"), has_coef = c.has("coefficients");
    if (has_pair && has_coef)
        throw ParseError("[pair] and [coefficients] are mutually exclusive", c.section("coefficients").line());
    if (need_pair && !has_pair) throw ParseError("missing [pair] block", 0);
    if (need_coefficients && !has_coef) throw ParseError("missing [coefficients] block", 0);
    if (!has_pair && !has_coef) throw ParseError("missing [pair] or [coefficients] block", 0);
    if (has_pair) {
        s.spec.pair = parse_pair(c.section("pair"), c.base_dir());
        if (s.spec.pair->q > 1.0)
            throw ParseError("the grid solver requires q <= 1", c.section("pair").entry("q").line);
        record_pair(out, *s.spec.pair);
    } else {
        const auto& k = c.section("coefficients");
        k.restrict_to({"A", "B", "q"});
        s.spec.A = parse_point_function(k.str("A"), center, k.entry("A").line);
        s.spec.B = parse_point_function(k.str("B", "const 0"), center,
                                        k.has("B") ? k.entry("B").line : k.line());
        s.spec.q = k.num("q", 0.0);
        if (!(s.spec.q >= 0.0 && s.spec.q <= 1.0))
            throw ParseError("[coefficients] q must lie in [0, 1]", k.entry("q").line);
        out.set("coefficients.A", k.str("A"));
        out.set("coefficients.B", k.str("B", "const 0"));
        out.set("q", s.spec.q);
        out.set("C_q", C_of_q(s.spec.q));
    }

    out.set("domain", describe(Region{std::visit([](auto d) -> Region { return d; }, s.spec.domain)}));
    out.set("grid.n", s.n);
    out.set("grid.rho_multiplier", s.spec.stencil.radius_multiplier);
    out.set("grid.directions", s.spec.stencil.directions);
    out.set("grid.interp", s.spec.stencil.interp == Interp::Cubic ? "cubic" : "linear");
    out.set("grid.refine_angles", s.spec.stencil.refine_angles);
    out.set("boundary.data", b.str("data"));
    out.set("boundary.mode", mode);
    out.set("solver.tol", s.solver.tol);
    out.set("solver.max_iter", s.solver.max_iter);
    out.set("solver.damping", s.solver.damping);
    out.set("solver.sweep", s.solver.sweep == SweepMode::Jacobi ? "jacobi" : "gauss-seidel");
    out.set("solver.newton", s.solver.newton);
    out.set("solver.cascade", s.cascade);
    return s;
}

struct Solved {
    PDEProblem problem;
    SolveResult result;
};

Solved solve(const SolveSetup& s, Output& out, const std::string& tag = "") {
    Solved r;
    if (s.cascade) {
        auto cr = solve_cascade(s.spec, s.n, s.solver, s.coarsest);
        r.problem = std::move(cr.problem);
        r.result = std::move(cr.result);
    } else {
        r.problem = build_problem(s.spec, make_grid(s.spec.domain, s.n, s.spec.stencil));
        r.result = solve_dirichlet(r.problem, s.solver);
    }
    const auto& g = *r.problem.grid;
    out.set("grid.spacing", g.spacing());
    out.set("grid.rho", g.rho());
    out.set("grid.nodes", static_cast<long>(g.interior().size()));
    const std::string p = tag.empty() ? "solve." : "solve." + tag + ".";
    out.set(p + "newton_steps", r.result.newton_steps);
    out.set(p + "sweeps", r.result.iterations);
    out.set(p + "converged", r.result.converged);
    return r;
}

std::pair<double, double> extrema(const GridFunction& u) {
    double lo = INFINITY, hi = -INFINITY;
    for (long k = 0; k < u.grid->size(); ++k)
        if (u.grid->kind(k) != NodeKind::Exterior) {
            lo = std::min(lo, u[k]);
            hi = std::max(hi, u[k]);
        }
    return {lo, hi};
}

void plot_field(Output& out, const std::string& tag, const GridFunction& u) {
    out.plot(tag, {"x", "y", "u"}, [u](std::ostream& os) {
        const auto& g = *u.grid;
        for (int j = 0; j < g.ny(); ++j) {
            bool any = false;
            for (int i = 0; i < g.nx(); ++i) {
                const long k = g.index(i, j);
                if (g.kind(k) == NodeKind::Exterior) continue;
                const Point p = g.node(k);
                os << fmt(p.x) << ' ' << fmt(p.y) << ' ' << fmt(u[k]) << '\n';
                any = true;
            }
            if (any) os << '\n';
        }
    });
}

void solve_rows(Table& t, const std::string& label, const Solved& s) {
    const auto res = residual(s.problem, s.result.u);
    const auto [lo, hi] = extrema(s.result.u);
    const double last = s.result.history.empty() ? 0.0 : s.result.history.back();
    t.add({label, std::to_string(s.problem.grid->nx()), fmt(s.problem.grid->spacing()),
           fmt(s.problem.grid->rho()), std::to_string(s.result.newton_steps),
           std::to_string(s.result.iterations), s.result.converged ? "true" : "false", fmt(last),
           fmt(res.sup), fmt(lo), fmt(hi)});
}

const std::vector<std::string> kSolveHeader = {"label", "nx", "spacing", "rho", "newton_steps",
                                               "sweeps", "converged", "final_update",
                                               "residual_sup", "min_u", "max_u"};

// -------------------------------------------------------------------------------------

Verdict cmd_check_conditions(const Config& c, Output& out) {
    c.restrict_sections({"pair", "conditions"});
    const auto pair = parse_pair(c.section("pair"), c.base_dir());
    record_pair(out, pair);
    const auto& s = c.optional("conditions");
    s.restrict_to({"theta", "t0", "t1", "samples", "margin", "c34_t0", "c34_t1", "c34_samples",
                   "c4_cap", "p_lo", "p_hi", "p_samples", "eps", "gzero_tol", "ko_tol"});

    ConditionReport all;
    const double p_lo = s.num("p_lo", 1e-3), p_hi = s.num("p_hi", 1e3);
    const int p_n = static_cast<int>(s.integer("p_samples", 64));
    const auto grid = log_grid(p_lo, p_hi, p_n);
    all.merge(check_condition_P(pair, grid));

    const double theta = s.num("theta", 2.0);
    GrowthWindow w{s.num("t0", 1.0), s.num("t1", 1e4), static_cast<int>(s.integer("samples", 64)),
                   s.num("margin", 0.05)};
    all.merge(check_C1_C2(pair, theta, w));
    out.set("conditions.theta", theta);
    out.set("conditions.window", fmt(w.t0) + " " + fmt(w.t1));
    out.set("conditions.samples", w.samples);
    out.set("conditions.margin", w.margin);

    if (pair.q == 1.0) {
        C3C4Options o;
        o.window = {s.num("c34_t0", 10.0), s.num("c34_t1", 1e4),
                    static_cast<int>(s.integer("c34_samples", 64)), w.margin};
        o.c4_cap = s.num("c4_cap", o.c4_cap);
        all.merge(check_C3_C4(pair, o));
        out.set("conditions.c34_window", fmt(o.window.t0) + " " + fmt(o.window.t1));
        out.set("conditions.c4_cap", o.c4_cap);
    }
    const double ko_tol = s.num("ko_tol", 1e-10);
    all.merge(check_KO(pair, ko_tol));
    out.set("conditions.ko_tol", ko_tol);
    if (pair.q < 1.0) {
        const double tol = s.num("gzero_tol", 1e-12);
        all.merge(check_g_zero(pair, tol));
        out.set("conditions.gzero_tol", tol);
    }
    if (s.has("eps")) {
        const auto eps = s.numbers("eps", {});
        all.merge(verify_dif_monotonicity(pair, eps, grid));
        std::string joined;
        for (double e : eps) joined += (joined.empty() ? "" : " ") + fmt(e);
        out.set("conditions.eps", joined);
    }
    out.set("conditions.p_grid", fmt(p_lo) + " " + fmt(p_hi) + " " + std::to_string(p_n));

    auto& t = out.table("conditions", {"condition", "verdict", "witness_t", "witness_value", "reason"});
    auto& ev = out.table("evidence", {"condition", "t", "value", "note"});
    for (const auto& e : all.entries) {
        const bool has_w = !e.evidence.empty();
        t.add({to_string(e.id), to_string(e.verdict), has_w ? fmt(e.evidence[0].t) : "",
               has_w ? fmt(e.evidence[0].value) : "", e.reason});
        for (const auto& wt : e.evidence) ev.add({to_string(e.id), fmt(wt.t), fmt(wt.value), wt.note});
    }
    for (const auto& [k, v] : all.parameters) out.set("param." + k, v);
    return all.overall();
}

Verdict cmd_profile(const Config& c, Output& out) {
    c.restrict_sections({"pair", "profile"});
    const auto pair = parse_pair(c.section("pair"), c.base_dir());
    record_pair(out, pair);
    const auto opt = read_profile(c, out);
    const GrowthProfile prof(pair, opt);
    const auto ko = prof.ko_report().get(ConditionId::KO);
    out.set("ko", to_string(ko.verdict));
    const auto p0 = prof.psi_zero_plus();
    out.set("psi_zero_plus", p0.infinite ? std::string("inf") : fmt(p0.value));
    if (ko.verdict == Verdict::Fail) {
        auto& t = out.table("profile", {"ko", "reason"});
        t.add({to_string(ko.verdict), ko.reason});
        return Verdict::Fail;
    }

    const auto queries =
        c.optional("profile").numbers("t", {0.25, 0.5, 1.0, 2.0, 4.0, 8.0});
    auto& q = out.table("psi", {"t", "psi", "error", "phi_of_psi", "rel_roundtrip"});
    double max_rel = 0.0;
    auto row = [&](double tv) {
        const auto v = prof.psi(tv);
        const double back = v.divergent ? NAN : prof.phi(v.value);
        const double rel = std::abs(back - tv) / tv;
        max_rel = std::max(max_rel, std::isnan(rel) ? INFINITY : rel);
        q.add({fmt(tv), v.divergent ? "inf" : fmt(v.value), fmt(v.error), fmt(back), fmt(rel)});
    };
    for (double tv : queries) row(tv);
    auto& tab = out.table("psi_table", {"t", "psi", "F", "G"});
    for (std::size_t i = 0; i < prof.psi_table().size(); ++i) {
        const double tv = prof.psi_table()[i].first;
        const double back = prof.phi(prof.psi_table()[i].second);
        max_rel = std::max(max_rel, std::abs(back - tv) / tv);
        tab.add({fmt(tv), fmt(prof.psi_table()[i].second), fmt(prof.F_table()[i].second),
                 fmt(prof.G_table()[i].second)});
    }
    const double rt_tol = 1e-6;
    out.set("roundtrip_tol", rt_tol);
    out.set("roundtrip_worst", max_rel);
    std::vector<std::array<double, 3>> rows;
    for (const auto& [tv, p] : prof.psi_table()) rows.push_back({tv, p, prof.phi(p)});
    out.plot("psi", {"t", "psi"}, [rows](std::ostream& os) {
        for (const auto& r : rows) os << fmt(r[0]) << ' ' << fmt(r[1]) << '\n';
    });
    out.plot("phi", {"r", "phi"}, [rows](std::ostream& os) {
        for (auto it = rows.rbegin(); it != rows.rend(); ++it) os << fmt((*it)[1]) << ' ' << fmt((*it)[2]) << '\n';
    });
    return worst(of(max_rel <= rt_tol), ko.verdict);
}

Verdict cmd_radial(const Config& c, Output& out) {
    c.restrict_sections({"pair", "radial", "profile"});
    const auto pair = parse_pair(c.section("pair"), c.base_dir());
    record_pair(out, pair);
    const auto& s = c.optional("radial");
    s.restrict_to({"a", "phi_cap", "r_max", "bracket_width", "rtol", "tol"});
    RadialOptions ro;
    ro.phi_cap = s.num("phi_cap", ro.phi_cap);
    ro.r_max = s.num("r_max", ro.r_max);
    ro.bracket_width = s.num("bracket_width", ro.bracket_width);
    ro.rtol = s.num("rtol", ro.rtol);
    ro.atol = ro.rtol;
    const double tol = s.num("tol", 1e-8);
    out.set("radial.phi_cap", ro.phi_cap);
    out.set("radial.r_max", ro.r_max);
    out.set("radial.bracket_width", ro.bracket_width);
    out.set("radial.rtol", ro.rtol);
    out.set("radial.verify_tol", tol);
    const auto popt = read_profile(c, out);
    const GrowthProfile prof(pair, popt);

    auto& t = out.table("radial", {"a", "status", "R_lo", "R_hi", "width", "psi_a", "Ra",
                                   "lo_ul", "min_lo_ratio", "min_ul_slack", "reason"});
    Verdict v = Verdict::Pass;
    int idx = 0;
    for (double a : s.numbers("a", {1.0})) {
        const auto sol = solve_ivp(pair, a, ro);
        const auto ra = verify_Ra(sol, prof, tol);
        const auto lu = verify_lo_ul(sol, prof, tol);
        v = worst(v, worst(ra.verdict, of(lu.pass)));
        std::string reason = ra.reason;
        if (!sol.note.empty()) reason += (reason.empty() ? "" : "; ") + sol.note;
        t.add({fmt(a), to_string(sol.status), fmt(sol.R_lo), fmt(sol.R_hi), fmt(sol.R_hi - sol.R_lo),
               fmt(ra.psi_a), to_string(ra.verdict), lu.vacuous ? "vacuous" : pf(lu.pass),
               fmt(lu.min_lo_ratio), fmt(lu.min_ul_slack), reason});
        out.plot("radial_" + std::to_string(idx++), {"r", "phi", "dphi"}, [sol](std::ostream& os) {
            for (const auto& n : sol.nodes) os << fmt(n.r) << ' ' << fmt(n.phi) << ' ' << fmt(n.dphi) << '\n';
        });
    }
    return v;
}

Verdict cmd_solve(const Config& c, Output& out) {
    c.restrict_sections(kSolveSections);
    const auto setup = read_solve(c, out, false, false);
    const auto s = solve(setup, out);
    solve_rows(out.table("solve", kSolveHeader), "u", s);
    plot_field(out, "solution", s.result.u);
    return of(s.result.converged);
}

Verdict cmd_compare(const Config& c, Output& out) {
    c.restrict_sections(with(kSolveSections, {"compare"}));
    auto lower = read_solve(c, out, false, false);
    const auto& cs = c.section("compare");
    cs.restrict_to({"upper", "tol", "residual_tol"});
    auto upper = lower;
    upper.spec.boundary =
        parse_point_function(cs.str("upper"), domain_center(lower.spec.domain), cs.entry("upper").line);
    const double tol = cs.num("tol", 1e-8) + lower.solver.tol;
    const double rtol = cs.num("residual_tol", 10 * lower.solver.tol);
    out.set("compare.upper", cs.str("upper"));
    out.set("compare.tol", tol);
    out.set("compare.residual_tol", rtol);

    const auto a = solve(lower, out, "lower");
    const auto b = solve(upper, out, "upper");
    auto& st = out.table("solve", kSolveHeader);
    solve_rows(st, "lower", a);
    solve_rows(st, "upper", b);

    double bd_gap = INFINITY;
    for (long k : a.problem.grid->boundary()) bd_gap = std::min(bd_gap, b.problem.boundary[k] - a.problem.boundary[k]);
    if (bd_gap < 0.0)
        throw PreconditionError("boundary data are not ordered: upper - lower reaches " + fmt(bd_gap));

    const auto r = check_comparison(a.problem, a.result.u, b.problem, b.result.u, tol, rtol);
    const Point w = r.worst_node >= 0 ? a.problem.grid->node(r.worst_node) : Point{NAN, NAN};
    auto& t = out.table("compare", {"boundary_gap", "worst_violation", "worst_x", "worst_y", "tol", "pass"});
    t.add({fmt(bd_gap), fmt(r.worst_violation), fmt(w.x), fmt(w.y), fmt(tol), pf(r.pass)});
    out.plot("compare", {"x", "y", "u_lower", "u_upper"}, [ua = a.result.u, ub = b.result.u](std::ostream& os) {
        const auto& g = *ua.grid;
        for (long k : g.interior()) {
            const Point p = g.node(k);
            os << fmt(p.x) << ' ' << fmt(p.y) << ' ' << fmt(ua[k]) << ' ' << fmt(ub[k]) << '\n';
        }
    });
    return worst(of(r.pass), of(a.result.converged && b.result.converged));
}

Verdict cmd_global_bound(const Config& c, Output& out) {
    c.restrict_sections(with(kSolveSections, {"profile", "global_bound"}));
    const auto setup = read_solve(c, out, true, false);
    const auto& gs = c.optional("global_bound");
    gs.restrict_to({"tol", "slack_c"});
    const double tol = gs.num("tol", 1e-6), slack_c = gs.num("slack_c", 1.0);
    out.set("global_bound.tol", tol);
    out.set("global_bound.slack_c", slack_c);
    const GrowthProfile prof(*setup.spec.pair, read_profile(c, out));
    if (prof.ko_report().get(ConditionId::KO).verdict == Verdict::Fail)
        throw PreconditionError("the global bound needs the Keller-Osserman condition: " +
                                prof.ko_report().get(ConditionId::KO).reason);
    const auto s = solve(setup, out);
    solve_rows(out.table("solve", kSolveHeader), "u", s);
    const auto r = check_global_bound(s.result.u, prof, tol, slack_c);
    out.set("global_bound.slack", r.slack);
    const Point w = r.worst_node >= 0 ? s.problem.grid->node(r.worst_node) : Point{NAN, NAN};
    auto& t = out.table("global_bound", {"slack", "worst_margin", "worst_x", "worst_y", "pass"});
    t.add({fmt(r.slack), fmt(r.worst_margin), fmt(w.x), fmt(w.y), pf(r.pass)});
    out.plot("global_bound", {"d", "u", "bound"}, [u = s.result.u, bd = r.bound](std::ostream& os) {
        const auto& g = *u.grid;
        for (long k : g.interior()) os << fmt(g.dist(k)) << ' ' << fmt(u[k]) << ' ' << fmt(bd[k]) << '\n';
    });
    return worst(of(r.pass), of(s.result.converged));
}

std::vector<Point> parse_centers(const Section& s) {
    std::vector<Point> out;
    const auto& e = s.entry("centers");
    std::stringstream ss(e.value);
    for (std::string item; std::getline(ss, item, ';');) {
        std::istringstream is(item);
        std::string x, y, extra;
        if (!(is >> x >> y) || (is >> extra))
            throw ParseError("[harnack] centers must be 'x y; x y; ...'", e.line);
        Section tmp("harnack", e.line);
        tmp.set("x", {x, e.line});
        tmp.set("y", {y, e.line});
        out.push_back({tmp.num("x"), tmp.num("y")});
    }
    if (out.empty()) throw ParseError("[harnack] centers is empty", e.line);
    return out;
}

double sup_of(const std::vector<double>& v, const Grid2D& g) {
    double m = 0.0;
    for (long k : g.interior()) m = std::max(m, v[static_cast<std::size_t>(k)]);
    for (long k : g.boundary()) m = std::max(m, v[static_cast<std::size_t>(k)]);
    return m;
}

Verdict cmd_harnack(const Config& c, Output& out) {
    c.restrict_sections(with(kSolveSections, {"harnack"}));
    const auto& hs = c.section("harnack");
    hs.restrict_to({"centers", "r", "r_factor", "A0", "B0", "slack_c", "residual_tol", "bound"});
    const auto centers = parse_centers(hs);
    const auto setup = read_solve(c, out, false, true);
    const auto s = solve(setup, out);
    solve_rows(out.table("solve", kSolveHeader), "u", s);

    const auto& rhs = std::get<CoefficientRhs>(s.problem.rhs);
    HarnackOptions ho;
    ho.A0 = hs.num("A0", sup_of(rhs.A, *s.problem.grid));
    ho.B0 = hs.num("B0", sup_of(rhs.B, *s.problem.grid));
    ho.slack_c = hs.num("slack_c", ho.slack_c);
    ho.bound = hs.num("bound", ho.bound);
    ho.residual_tol = hs.num("residual_tol", 10 * setup.solver.tol);
    const double r0 = r0_constant(rhs.q, *ho.A0, *ho.B0);
    double r = 0.0;
    const std::string rs = hs.str("r", "auto");
    const double r_factor = hs.num("r_factor", 0.9);
    if (rs == "auto") r = r_factor * r0;
    else r = hs.num("r");
    out.set("harnack.A0", *ho.A0);
    out.set("harnack.B0", *ho.B0);
    out.set("harnack.r0", r0);
    out.set("harnack.r", r);
    out.set("harnack.r_rule", rs == "auto" ? "r_factor * r0" : "fixed");
    out.set("harnack.r_factor", r_factor);
    out.set("harnack.bound", ho.bound);
    out.set("harnack.slack_c", ho.slack_c);
    out.set("harnack.slack", ho.slack_c * s.problem.grid->rho() / r);
    out.set("harnack.residual_tol", ho.residual_tol);

    std::vector<HarnackReport> reps;
    for (Point x0 : centers) reps.push_back(ball_harnack(s.problem, s.result.u, x0, r, ho));
    std::ostringstream balls;
    write_ball_reports(reps, balls);
    out.raw("balls", balls.str());
    auto& notes = out.table("ball_notes", {"center_x", "center_y", "nodes", "slack", "allowed", "reason"});
    Verdict v = of(s.result.converged);
    for (const auto& b : reps) {
        notes.add({fmt(b.center.x), fmt(b.center.y), std::to_string(b.nodes), fmt(b.slack),
                   fmt(b.bound * (1 + b.slack)), b.reason});
        v = worst(v, of(b.pass));
    }
    return v;
}

Verdict cmd_chain(const Config& c, Output& out, std::uint64_t seed) {
    c.restrict_sections(with(kSolveSections, {"profile", "chain"}));
    const auto& cs = c.section("chain");
    cs.restrict_to({"region", "K", "pairs", "r", "r_factor", "t0", "eps_factors", "slack_c",
                    "est00_tol"});
    const Region region = parse_region(cs.str("region"), cs.entry("region").line);
    const auto setup = read_solve(c, out, true, false);
    const auto& pair = *setup.spec.pair;
    const GrowthProfile prof(pair, read_profile(c, out));

    Verdict v = Verdict::Pass;
    auto& pre = out.table("prerequisites", {"check", "verdict", "reason"});
    const auto ko = prof.ko_report().get(ConditionId::KO);
    pre.add({"KO", to_string(ko.verdict), ko.reason});
    v = worst(v, ko.verdict);
    if (pair.q < 1.0) {
        const auto gz = check_g_zero(pair).get(ConditionId::GZero);
        pre.add({"G_ZERO", to_string(gz.verdict), gz.reason});
        v = worst(v, gz.verdict);
    }
    if (ko.verdict == Verdict::Fail)
        throw PreconditionError("the chain pipeline needs the Keller-Osserman condition: " + ko.reason);

    const auto s = solve(setup, out);
    solve_rows(out.table("solve", kSolveHeader), "u", s);
    v = worst(v, of(s.result.converged));

    const double dist = region_distance(*s.problem.grid, region);
    const double eps = default_epsilon(s.result.u);
    Est00Options eo;
    eo.t0 = cs.num("t0", eo.t0);
    eo.rel_tol = cs.num("est00_tol", eo.rel_tol);
    out.set("chain.region", describe(region));
    out.set("chain.region_dist", dist);
    out.set("chain.omega_prime", "d > region_dist / 6");
    out.set("chain.epsilon", eps);
    out.set("chain.est00_t0", eo.t0);
    out.set("chain.est00_tol", eo.rel_tol);

    auto& ct = out.table("coefficients", {"eps", "A0", "B0", "omega_prime_nodes", "est00_C",
                                          "est00_worst", "est00"});
    std::optional<CoefficientFields> base;
    std::string factors;
    for (double f : cs.numbers("eps_factors", {1.0, 10.0, 100.0})) {
        auto cf = coefficient_fields(s.result.u, pair, f * eps, dist, &prof, eo);
        ct.add({fmt(cf.eps), fmt(cf.A0), fmt(cf.B0), std::to_string(cf.omega_prime_nodes),
                fmt(cf.est00_C), fmt(cf.est00_worst), cf.est00_checked ? pf(cf.est00_pass) : "unchecked"});
        v = worst(v, cf.est00_checked ? of(cf.est00_pass) : Verdict::Inconclusive);
        factors += (factors.empty() ? "" : " ") + fmt(f);
        if (f == 1.0 || !base) base = std::move(cf);
    }
    out.set("chain.eps_factors", factors);

    const double r0 = r0_constant(pair.q, base->A0, base->B0);
    const double K = cs.num("K", 6.0);
    const std::string rs = cs.str("r", "auto");
    const double r_factor = cs.num("r_factor", 0.9);
    const double r = rs == "auto" ? r_factor * std::min(r0, 5.0 / 6.0 * dist) / 6.0 : cs.num("r");
    ChainOptions co;
    co.pairs = static_cast<int>(cs.integer("pairs", co.pairs));
    co.seed = seed;
    co.slack_c = cs.num("slack_c", co.slack_c);
    co.r0 = r0;
    out.set("chain.A0", base->A0);
    out.set("chain.B0", base->B0);
    out.set("chain.r0", r0);
    out.set("chain.r", r);
    out.set("chain.r_rule", rs == "auto" ? "r_factor * min(r0, 5/6 region_dist) / 6" : "fixed");
    out.set("chain.K", K);
    out.set("chain.pairs", co.pairs);
    out.set("chain.slack_c", co.slack_c);
    out.set("chain.ball_check_radius", "3 r");

    const auto rep = chain_harnack(s.result.u, region, r, K, co);
    out.set("chain.m", rep.m);
    out.set("chain.log10_K_pow_2m_plus_1", rep.log10_K_pow_m);
    out.set("chain.K_pow_2m_plus_1",
            rep.log10_K_pow_m < 300 ? fmt(std::pow(10.0, rep.log10_K_pow_m))
                                    : "10^" + fmt(rep.log10_K_pow_m));
    std::ostringstream summary;
    write_chain_summary(rep, summary);
    out.raw("chain", summary.str());
    auto& dt = out.table("chain_detail", {"max_l", "worst_pair_ratio", "ball_failures",
                                          "worst_ball_ratio", "pair_failures", "pass_balls",
                                          "pass_pairs", "pass_global"});
    dt.add({std::to_string(rep.max_ell), fmt(rep.worst_pair_ratio), std::to_string(rep.ball_failures),
            fmt(rep.worst_ball_ratio), std::to_string(rep.pair_failures), pf(rep.pass_balls),
            pf(rep.pass_pairs), pf(rep.pass_global)});
    auto& pt = out.table("chain_pairs", {"x_x", "x_y", "y_x", "y_y", "l", "ratio", "log10_bound", "pass"});
    for (const auto& p : rep.pair_rows)
        pt.add({fmt(p.x.x), fmt(p.x.y), fmt(p.y.x), fmt(p.y.y), std::to_string(p.ell), fmt(p.ratio),
                fmt(p.log10_bound), pf(p.pass)});
    out.plot("chain_centers", {"x", "y"}, [centers = rep.centers](std::ostream& os) {
        for (const auto& p : centers) os << fmt(p.x) << ' ' << fmt(p.y) << '\n';
    });
    return worst(v, of(rep.pass));
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"check-conditions", "profile", "radial", "solve",
                                                   "compare", "global-bound", "harnack", "chain"};
    return names;
}

int exit_code(Verdict v) {
    switch (v) {
        case Verdict::Pass: return kExitPass;
        case Verdict::Fail: return kExitFail;
        default: return kExitInconclusive;
    }
}

RunResult execute(const RunOptions& opt, const Config& config) {
    Output out(opt.out);
    out.set("version", kVersion);
    out.set("subcommand", opt.subcommand);
    out.set("seed", std::to_string(opt.seed));
    out.set("threads", opt.threads);

    Verdict v;
    const auto& sc = opt.subcommand;
    if (sc == "check-conditions") v = cmd_check_conditions(config, out);
    else if (sc == "profile") v = cmd_profile(config, out);
    else if (sc == "radial") v = cmd_radial(config, out);
    else if (sc == "solve") v = cmd_solve(config, out);
    else if (sc == "compare") v = cmd_compare(config, out);
    else if (sc == "global-bound") v = cmd_global_bound(config, out);
    else if (sc == "harnack") v = cmd_harnack(config, out);
    else if (sc == "chain") v = cmd_chain(config, out, opt.seed);
    else throw ArgumentError("unknown subcommand '" + sc + "'");
    out.set("verdict", to_string(v));
    return {v, out.write(config.text())};
}

int run(const RunOptions& opt, std::ostream& err) {
    try {
        const auto cfg = Config::load(opt.config);
        const auto r = execute(opt, cfg);
        err << opt.subcommand << ": " << to_string(r.verdict) << " (" << (opt.out / "report.csv").string()
            << ")\n";
        return exit_code(r.verdict);
    } catch (const ParseError& e) {
        err << opt.config.string() << ": " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << opt.subcommand << ": error: " << e.what() << '\n';
    }
    return kExitError;
}

}  // namespace infharnack::cli
