#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "infharnack/geometry.hpp"
#include "infharnack/grid_solver.hpp"
#include "infharnack/harnack.hpp"
#include "infharnack/scalar_function.hpp"

namespace infharnack::cli {

struct Entry {
    std::string value;
    int line = 0;
};

class Section {
public:
    Section() = default;
    Section(std::string name, int line) : name_(std::move(name)), line_(line) {}

    const std::string& name() const noexcept { return name_; }
    int line() const noexcept { return line_; }
    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    const Entry& entry(const std::string& key) const;  // ParseError when absent
    void set(const std::string& key, Entry e) { entries_[key] = std::move(e); }
    const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

    std::string str(const std::string& key) const;
    std::string str(const std::string& key, const std::string& def) const;
    double num(const std::string& key) const;
    double num(const std::string& key, double def) const;
    long integer(const std::string& key, long def) const;
    bool flag(const std::string& key, bool def) const;
    std::vector<double> numbers(const std::string& key, std::vector<double> def) const;

    // ParseError at the first key outside `allowed`.
    void restrict_to(const std::set<std::string>& allowed) const;

private:
    std::string name_;
    int line_ = 0;
    std::map<std::string, Entry> entries_;
};

class Config {
public:
    static Config load(const std::filesystem::path& path);
    static Config parse(const std::string& text, const std::filesystem::path& base_dir = ".");

    bool has(const std::string& section) const { return sections_.count(section) != 0; }
    const Section& section(const std::string& name) const;  // ParseError when absent
    // Present section or an empty one.
    const Section& optional(const std::string& name) const;
    const std::string& text() const noexcept { return text_; }
    const std::filesystem::path& base_dir() const noexcept { return base_; }
    std::vector<std::string> section_names() const;

    // ParseError at the first section outside `allowed`.
    void restrict_sections(const std::set<std::string>& allowed) const;

private:
    std::map<std::string, Section> sections_;
    std::string text_;
    std::filesystem::path base_;
};

// "power c gamma", "exp c", "log c", "pwl t:v ...", "table path linear|pchip", "zero",
// "const c".  Relative table paths resolve against base_dir.
ScalarFunction parse_function(const std::string& spec, bool odd,
                              const std::filesystem::path& base_dir, int line = 0);

// Spatial data: "const c", "linear a b c" (a + b x + c y), "angular a b k"
// (a + b cos(k theta) about `center`).
PointFunction parse_point_function(const std::string& spec, Point center, int line = 0);

Domain parse_domain(const Section& s);
Region parse_region(const std::string& spec, int line = 0);
StencilOptions parse_stencil(const Section& s);
SolverOptions parse_solver(const Section& s);
NonlinearityPair parse_pair(const Section& s, const std::filesystem::path& base_dir);

}  // namespace infharnack::cli
