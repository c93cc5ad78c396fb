#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace infharnack {

// Invalid caller input (bad window, empty grid, non-positive epsilon).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Query outside the mathematical domain of a function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A documented hypothesis of an operation does not hold.
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class StencilError : public std::runtime_error {
public:
    StencilError(const std::string& msg, long node)
        : std::runtime_error(msg), node_(node) {}
    long node() const noexcept { return node_; }

private:
    long node_;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& msg, std::vector<double> history)
        : std::runtime_error(msg), history_(std::move(history)) {}
    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, int line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace infharnack
