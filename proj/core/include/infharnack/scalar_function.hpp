#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace infharnack {

// c * t^gamma
struct Power {
    double c = 1.0;
    double gamma = 1.0;
};

// c * (e^t - 1)
struct ExpMinusOne {
    double c = 1.0;
};

// c * log(1 + t)
struct LogPlusOne {
    double c = 1.0;
};

// Linear interpolation between knots, linear extrapolation outside.
struct PiecewiseLinear {
    std::vector<double> t;
    std::vector<double> v;
};

enum class InterpRule { Linear, Pchip };

// Sampled values; queries outside [t.front(), t.back()] are domain errors.
struct Tabulated {
    std::vector<double> t;
    std::vector<double> v;
    InterpRule rule = InterpRule::Linear;
    std::vector<double> slopes;  // filled by the constructor for Pchip
};

using Family = std::variant<Power, ExpMinusOne, LogPlusOne, PiecewiseLinear, Tabulated>;

class ScalarFunction {
public:
    ScalarFunction();  // identically zero
    explicit ScalarFunction(Family family, double offset = 0.0, bool odd_extension = false);

    static ScalarFunction zero();
    static ScalarFunction constant(double c);
    static ScalarFunction power(double c, double gamma, bool odd = false);
    static ScalarFunction exp_minus_one(double c, bool odd = false);
    static ScalarFunction log_plus_one(double c, bool odd = false);
    static ScalarFunction piecewise_linear(std::vector<double> t, std::vector<double> v,
                                           bool odd = false);
    static ScalarFunction tabulated(std::vector<double> t, std::vector<double> v,
                                    InterpRule rule, bool odd = false);

    double operator()(double t) const { return value(t); }
    double value(double t) const;
    double derivative(double t) const;
    // log(value(t)) for value > 0, finite even where value overflows.
    double log_value(double t) const;
    // Exact integral over [a, b] for piecewise-linear and linearly tabulated families.
    std::optional<double> exact_integral(double a, double b) const;

    bool identically_zero() const;
    const Family& family() const noexcept { return family_; }
    double offset() const noexcept { return offset_; }
    bool odd_extension() const noexcept { return odd_; }
    std::string describe() const;

private:
    double base_value(double t) const;
    double base_derivative(double t) const;

    Family family_;
    double offset_ = 0.0;
    bool odd_ = false;
};

}  // namespace infharnack
