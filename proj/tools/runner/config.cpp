#include "runner/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "infharnack/errors.hpp"

namespace infharnack::cli {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string w; is >> w;) out.push_back(w);
    return out;
}

double to_number(const std::string& word, const std::string& what, int line) {
    double v = 0.0;
    const char* b = word.data();
    const char* e = b + word.size();
    if (!word.empty() && *b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e || word.empty())
        throw ParseError(what + ": '" + word + "' is not a number", line);
    return v;
}

std::vector<double> numbers_of(const std::vector<std::string>& words, std::size_t from,
                               const std::string& what, int line) {
    std::vector<double> out;
    for (std::size_t i = from; i < words.size(); ++i) out.push_back(to_number(words[i], what, line));
    return out;
}

void expect_count(const std::vector<std::string>& w, std::size_t n, const std::string& spec,
                  int line) {
    if (w.size() != n)
        throw ParseError("'" + spec + "' expects " + std::to_string(n - 1) + " parameter(s)", line);
}

}  // namespace

const Entry& Section::entry(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end())
        throw ParseError("missing key '" + key + "' in [" + name_ + "]", line_);
    return it->second;
}

std::string Section::str(const std::string& key) const { return entry(key).value; }

std::string Section::str(const std::string& key, const std::string& def) const {
    return has(key) ? entry(key).value : def;
}

double Section::num(const std::string& key) const {
    const auto& e = entry(key);
    return to_number(e.value, "[" + name_ + "] " + key, e.line);
}

double Section::num(const std::string& key, double def) const { return has(key) ? num(key) : def; }

long Section::integer(const std::string& key, long def) const {
    if (!has(key)) return def;
    const double v = num(key);
    if (v != std::floor(v) || std::abs(v) > 1e15)
        throw ParseError("[" + name_ + "] " + key + " must be an integer", entry(key).line);
    return static_cast<long>(v);
}

bool Section::flag(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const auto& e = entry(key);
    if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
    if (e.value == "false" || e.value == "no" || e.value == "0") return false;
    throw ParseError("[" + name_ + "] " + key + " must be true or false", e.line);
}

std::vector<double> Section::numbers(const std::string& key, std::vector<double> def) const {
    if (!has(key)) return def;
    const auto& e = entry(key);
    auto out = numbers_of(split_ws(e.value), 0, "[" + name_ + "] " + key, e.line);
    if (out.empty()) throw ParseError("[" + name_ + "] " + key + " is empty", e.line);
    return out;
}

void Section::restrict_to(const std::set<std::string>& allowed) const {
    for (const auto& [k, e] : entries_)
        if (!allowed.count(k)) throw ParseError("unknown key '" + k + "' in [" + name_ + "]", e.line);
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open configuration file " + path.string(), 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
}

Config Config::parse(const std::string& text, const std::filesystem::path& base_dir) {
    Config cfg;
    cfg.text_ = text;
    cfg.base_ = base_dir;

    // Blank out '#' comments so the INI reader sees the same line numbers.
    std::istringstream raw(text);
    std::ostringstream cleaned;
    std::map<std::pair<std::string, std::string>, int> key_line;
    std::map<std::string, int> section_line;
    std::string line, current;
    int lineno = 0;
    while (std::getline(raw, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (!t.empty() && t[0] == '#') {
            cleaned << '\n';
            continue;
        }
        cleaned << line << '\n';
        if (t.empty() || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            current = trim(t.substr(1, t.size() - 2));
            section_line.emplace(current, lineno);
        } else if (auto eq = t.find('='); eq != std::string::npos) {
            key_line.emplace(std::make_pair(current, trim(t.substr(0, eq))), lineno);
        }
    }

    boost::property_tree::ptree pt;
    std::istringstream in(cleaned.str());
    try {
        boost::property_tree::ini_parser::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ParseError(e.message(), static_cast<int>(e.line()));
    }
    for (const auto& [name, child] : pt) {
        if (child.empty()) {
            auto it = key_line.find({"", name});
            throw ParseError("key '" + name + "' outside any [section]",
                             it == key_line.end() ? 0 : it->second);
        }
        Section s(name, section_line.count(name) ? section_line[name] : 0);
        for (const auto& [key, node] : child) {
            auto it = key_line.find({name, key});
            s.set(key, Entry{trim(node.data()), it == key_line.end() ? 0 : it->second});
        }
        cfg.sections_.emplace(name, std::move(s));
    }
    return cfg;
}

const Section& Config::section(const std::string& name) const {
    auto it = sections_.find(name);
    if (it == sections_.end()) throw ParseError("missing [" + name + "] block", 0);
    return it->second;
}

const Section& Config::optional(const std::string& name) const {
    static const Section empty;
    auto it = sections_.find(name);
    return it == sections_.end() ? empty : it->second;
}

std::vector<std::string> Config::section_names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : sections_) out.push_back(k);
    return out;
}

void Config::restrict_sections(const std::set<std::string>& allowed) const {
    for (const auto& [k, s] : sections_)
        if (!allowed.count(k)) throw ParseError("block [" + k + "] is not used by this command", s.line());
}

ScalarFunction parse_function(const std::string& spec, bool odd,
                              const std::filesystem::path& base_dir, int line) {
    const auto w = split_ws(spec);
    if (w.empty()) throw ParseError("empty function specification", line);
    const std::string& fam = w[0];
    if (fam == "zero") {
        expect_count(w, 1, spec, line);
        return ScalarFunction::zero();
    }
    if (fam == "const") {
        expect_count(w, 2, spec, line);
        return ScalarFunction::constant(to_number(w[1], "const", line));
    }
    if (fam == "power") {
        expect_count(w, 3, spec, line);
        return ScalarFunction::power(to_number(w[1], "power c", line),
                                     to_number(w[2], "power gamma", line), odd);
    }
    if (fam == "exp") {
        expect_count(w, 2, spec, line);
        return ScalarFunction::exp_minus_one(to_number(w[1], "exp c", line), odd);
    }
    if (fam == "log") {
        expect_count(w, 2, spec, line);
        return ScalarFunction::log_plus_one(to_number(w[1], "log c", line), odd);
    }
    if (fam == "pwl") {
        std::vector<double> t, v;
        for (std::size_t i = 1; i < w.size(); ++i) {
            const auto c = w[i].find(':');
            if (c == std::string::npos) throw ParseError("pwl knot '" + w[i] + "' is not t:v", line);
            t.push_back(to_number(w[i].substr(0, c), "pwl t", line));
            v.push_back(to_number(w[i].substr(c + 1), "pwl v", line));
        }
        try {
            return ScalarFunction::piecewise_linear(std::move(t), std::move(v), odd);
        } catch (const std::exception& e) {
            throw ParseError(e.what(), line);
        }
    }
    if (fam == "table") {
        if (w.size() != 2 && w.size() != 3) throw ParseError("'table' expects a path and a rule", line);
        InterpRule rule = InterpRule::Linear;
        if (w.size() == 3) {
            if (w[2] == "pchip") rule = InterpRule::Pchip;
            else if (w[2] != "linear") throw ParseError("table rule must be linear or pchip", line);
        }
        std::filesystem::path p = w[1];
        if (p.is_relative()) p = base_dir / p;
        std::ifstream in(p);
        if (!in) throw ParseError("cannot open table " + p.string(), line);
        std::vector<double> t, v;
        std::string row;
        int rl = 0;
        while (std::getline(in, row)) {
            ++rl;
            const auto cols = split_ws(row);
            if (cols.empty() || cols[0][0] == '#') continue;
            if (cols.size() != 2)
                throw ParseError(p.string() + ":" + std::to_string(rl) + ": expected two columns", line);
            t.push_back(to_number(cols[0], p.string(), line));
            v.push_back(to_number(cols[1], p.string(), line));
        }
        try {
            return ScalarFunction::tabulated(std::move(t), std::move(v), rule, odd);
        } catch (const std::exception& e) {
            throw ParseError(p.string() + ": " + e.what(), line);
        }
    }
    throw ParseError("unknown function family '" + fam + "'", line);
}

PointFunction parse_point_function(const std::string& spec, Point center, int line) {
    const auto w = split_ws(spec);
    if (w.empty()) throw ParseError("empty data specification", line);
    if (w[0] == "const") {
        expect_count(w, 2, spec, line);
        const double c = to_number(w[1], "const", line);
        return [c](Point) { return c; };
    }
    if (w[0] == "linear") {
        expect_count(w, 4, spec, line);
        const auto p = numbers_of(w, 1, "linear", line);
        return [p](Point x) { return p[0] + p[1] * x.x + p[2] * x.y; };
    }
    if (w[0] == "angular") {
        expect_count(w, 4, spec, line);
        const auto p = numbers_of(w, 1, "angular", line);
        return [p, center](Point x) {
            return p[0] + p[1] * std::cos(p[2] * std::atan2(x.y - center.y, x.x - center.x));
        };
    }
    throw ParseError("unknown data family '" + w[0] + "'", line);
}

Domain parse_domain(const Section& s) {
    s.restrict_to({"type", "x0", "y0", "x1", "y1", "cx", "cy", "radius"});
    const std::string type = s.str("type", "rectangle");
    if (type == "rectangle") {
        Rectangle r{s.num("x0", 0.0), s.num("y0", 0.0), s.num("x1", 1.0), s.num("y1", 1.0)};
        if (!(r.x1 > r.x0 && r.y1 > r.y0)) throw ParseError("[domain] rectangle is empty", s.line());
        return r;
    }
    if (type == "disk") {
        Disk d{{s.num("cx", 0.0), s.num("cy", 0.0)}, s.num("radius", 1.0)};
        if (!(d.radius > 0.0)) throw ParseError("[domain] radius must be positive", s.line());
        return d;
    }
    throw ParseError("[domain] type must be rectangle or disk", s.has("type") ? s.entry("type").line : s.line());
}

Region parse_region(const std::string& spec, int line) {
    const auto w = split_ws(spec);
    if (w.empty()) throw ParseError("empty region specification", line);
    if (w[0] == "annulus") {
        expect_count(w, 5, spec, line);
        const auto p = numbers_of(w, 1, "annulus", line);
        if (!(p[2] >= 0.0 && p[3] > p[2])) throw ParseError("annulus radii must satisfy 0 <= inner < outer", line);
        return Annulus{{p[0], p[1]}, p[2], p[3]};
    }
    if (w[0] == "disk") {
        expect_count(w, 4, spec, line);
        const auto p = numbers_of(w, 1, "disk", line);
        if (!(p[2] > 0.0)) throw ParseError("disk radius must be positive", line);
        return Disk{{p[0], p[1]}, p[2]};
    }
    if (w[0] == "rectangle") {
        expect_count(w, 5, spec, line);
        const auto p = numbers_of(w, 1, "rectangle", line);
        if (!(p[2] > p[0] && p[3] > p[1])) throw ParseError("rectangle is empty", line);
        return Rectangle{p[0], p[1], p[2], p[3]};
    }
    throw ParseError("unknown region type '" + w[0] + "'", line);
}

StencilOptions parse_stencil(const Section& s) {
    s.restrict_to({"n", "rho_multiplier", "directions", "interp", "refine_angles"});
    StencilOptions o;
    o.radius_multiplier = s.num("rho_multiplier", o.radius_multiplier);
    o.directions = static_cast<int>(s.integer("directions", o.directions));
    const std::string interp = s.str("interp", "linear");
    if (interp == "linear") o.interp = Interp::Linear;
    else if (interp == "cubic") o.interp = Interp::Cubic;
    else throw ParseError("[grid] interp must be linear or cubic", s.entry("interp").line);
    o.refine_angles = s.flag("refine_angles", false);
    return o;
}

SolverOptions parse_solver(const Section& s) {
    s.restrict_to({"tol", "max_iter", "damping", "sweep", "newton", "newton_max_steps", "cascade",
                   "coarsest"});
    SolverOptions o;
    o.tol = s.num("tol", o.tol);
    o.max_iter = s.integer("max_iter", o.max_iter);
    o.damping = s.num("damping", o.damping);
    const std::string sweep = s.str("sweep", "gauss-seidel");
    if (sweep == "gauss-seidel") o.sweep = SweepMode::GaussSeidel;
    else if (sweep == "jacobi") o.sweep = SweepMode::Jacobi;
    else throw ParseError("[solver] sweep must be gauss-seidel or jacobi", s.entry("sweep").line);
    o.newton = s.flag("newton", o.newton);
    o.newton_max_steps = static_cast<int>(s.integer("newton_max_steps", o.newton_max_steps));
    if (!(o.tol > 0.0)) throw ParseError("[solver] tol must be positive", s.entry("tol").line);
    if (!(o.damping > 0.0 && o.damping <= 1.0))
        throw ParseError("[solver] damping must lie in (0, 1]", s.entry("damping").line);
    return o;
}

NonlinearityPair parse_pair(const Section& s, const std::filesystem::path& base_dir) {
    s.restrict_to({"f", "g", "q", "f_odd", "g_odd"});
    const bool f_odd = s.flag("f_odd", true), g_odd = s.flag("g_odd", false);
    auto f = parse_function(s.str("f"), f_odd, base_dir, s.entry("f").line);
    auto g = s.has("g") ? parse_function(s.str("g"), g_odd, base_dir, s.entry("g").line)
                        : ScalarFunction::zero();
    const double q = s.num("q", 0.0);
    try {
        return NonlinearityPair(std::move(f), std::move(g), q);
    } catch (const std::exception& e) {
        throw ParseError(e.what(), s.has("q") ? s.entry("q").line : s.line());
    }
}

}  // namespace infharnack::cli
