#pragma once

#include <map>
#include <string>
#include <vector>

#include "infharnack/scalar_function.hpp"

namespace infharnack {

// The data (f, g, q) of the equation  Lu = f(u) + g(u)|Du|^q.
struct NonlinearityPair {
    ScalarFunction f;
    ScalarFunction g;
    double q = 0.0;

    NonlinearityPair() = default;
    // Accepts 0 <= q < 2; PDE-level operations further require q <= 1.
    NonlinearityPair(ScalarFunction f_, ScalarFunction g_, double q_);

    std::string describe() const;
};

enum class Verdict { Pass, Fail, Inconclusive };

enum class ConditionId { Pa, Pb, C1, C2, C3, C4, KO, GZero, HEpsMonotone };

const char* to_string(Verdict v);
const char* to_string(ConditionId id);

struct Witness {
    double t = 0.0;
    double value = 0.0;
    std::string note;
};

struct ConditionEntry {
    ConditionId id{};
    Verdict verdict = Verdict::Inconclusive;
    std::vector<Witness> evidence;
    std::string reason;
};

struct ConditionReport {
    std::vector<ConditionEntry> entries;
    std::map<std::string, double> parameters;

    // Fail dominates inconclusive, which dominates pass.
    Verdict overall() const;
    const ConditionEntry& get(ConditionId id) const;
    bool has(ConditionId id) const;
    void merge(const ConditionReport& other);
};

double h_value(const NonlinearityPair& pair, double s);
// log h(s), finite where h overflows; -inf where h(s) = 0.
double log_h_value(const NonlinearityPair& pair, double s);
double h_epsilon_value(const NonlinearityPair& pair, double s, double eps);

ConditionReport check_condition_P(const NonlinearityPair& pair,
                                  const std::vector<double>& sample_grid);

struct GrowthWindow {
    double t0 = 1.0;
    double t1 = 1e4;
    int samples = 64;
    double margin = 0.05;
};

ConditionReport check_C1_C2(const NonlinearityPair& pair, double theta, const GrowthWindow& w);

struct C3C4Options {
    GrowthWindow window{10.0, 1e4, 64, 0.05};
    double c4_cap = 10.0;
};

ConditionReport check_C3_C4(const NonlinearityPair& pair, const C3C4Options& opt = {});

ConditionReport check_g_zero(const NonlinearityPair& pair, double abs_tol = 1e-12);

ConditionReport verify_dif_monotonicity(const NonlinearityPair& pair,
                                        const std::vector<double>& eps_list,
                                        const std::vector<double>& t_grid);

std::vector<double> log_grid(double lo, double hi, int n);

}  // namespace infharnack
