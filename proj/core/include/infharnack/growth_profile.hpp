#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "infharnack/nonlinearity.hpp"

namespace infharnack {

// Integral of fn over [a, b]: closed form when the family has one, otherwise
// adaptive Gauss-Kronrod with relative tolerance tol.
double integral(const ScalarFunction& fn, double a, double b, double tol = 1e-12);

// Integral of fn over [t, t + delta] that stays accurate when delta is below the
// resolution of t.
double integral_span(const ScalarFunction& fn, double t, double delta, double tol = 1e-12);

// F(t) = integral of fn over [0, t]; fn must be non-negative there.
double antiderivative(const ScalarFunction& fn, double t, double tol = 1e-12);

// 1/2 min{1, (2-q)^(1/(2-q))}; equals 1/2 on [0, 1].
double C_of_q(double q);

// Keller-Osserman integral over [1, inf) of 1/(sqrt F + G^(1/(2-q))).
ConditionReport check_KO(const NonlinearityPair& pair, double tol = 1e-10);

struct PsiValue {
    double value = 0.0;
    double error = 0.0;
    bool divergent = false;
};

struct PsiZeroPlus {
    double value = 0.0;
    bool infinite = false;
};

struct ProfileOptions {
    double quadrature_tol = 1e-10;
    int table_nodes = 64;
    double table_lo = 1e-2;
    double table_hi = 1e4;
    double psi0_cap = 1e8;
    int psi0_max_exponent = 14;  // Psi(0+) probes t = 10^-k, k <= this
    double inversion_tol = 1e-10;
};

class GrowthProfile {
public:
    explicit GrowthProfile(NonlinearityPair pair, ProfileOptions opt = {});

    const NonlinearityPair& pair() const noexcept { return pair_; }
    const ProfileOptions& options() const noexcept { return opt_; }
    double C_q() const noexcept { return cq_; }
    const ConditionReport& ko_report() const noexcept { return ko_; }
    bool ko_holds() const noexcept { return ko_holds_; }

    // (F(s) - F(t), G(s) - G(t)) for 0 < t <= s.
    std::pair<double, double> script_FG(double s, double t) const;
    // script_FG(t + delta, t) without forming t + delta.
    std::pair<double, double> script_FG_span(double t, double delta) const;

    PsiValue psi(double t) const;
    PsiZeroPlus psi_zero_plus() const noexcept { return psi0_; }
    double phi(double r) const;
    double q_bound(double t) const;

    const std::vector<std::pair<double, double>>& psi_table() const noexcept { return psi_table_; }
    const std::vector<std::pair<double, double>>& F_table() const noexcept { return F_table_; }
    const std::vector<std::pair<double, double>>& G_table() const noexcept { return G_table_; }

private:
    double integrand(double s, double t) const;
    double denominator(double F, double G) const;
    PsiZeroPlus compute_psi_zero_plus() const;

    NonlinearityPair pair_;
    ProfileOptions opt_;
    double cq_;
    ConditionReport ko_;
    bool ko_holds_ = false;
    PsiZeroPlus psi0_;
    std::vector<std::pair<double, double>> psi_table_;
    std::vector<std::pair<double, double>> F_table_;
    std::vector<std::pair<double, double>> G_table_;
};

bool verify_limit_psi(const GrowthProfile& profile, const std::vector<double>& ts,
                      double threshold = 0.05);

using HFunction = std::function<double(double)>;

struct Ap1TailResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double p = 0.0;
    bool pass = false;
    std::string diagnostic;
};

Ap1TailResult ap1_tail_check(const HFunction& h, double t, double theta, double varrho,
                             double t0, double tol = 1e-6);

// True iff log t / h(t) decreases along ts and ends below threshold.
bool ap1_log_limit(const HFunction& h, const std::vector<double>& ts, double threshold = 0.1,
                   double theta = 2.0);

struct Ap2Row {
    double r, phi, lhs, scaled;
};

struct Ap2Result {
    double C_estimate = 0.0;
    double t0 = 0.0;
    std::vector<Ap2Row> table;
};

// Largest observed r L(r) (q < 1) or r L(r) / log Phi(r) (q = 1) over r_grid in (0, Psi(t0)].
Ap2Result ap2_estimate(const GrowthProfile& profile, const std::vector<double>& r_grid,
                       double t0);

// Header-tagged two-column tables.
void dump_profile(const GrowthProfile& profile, std::ostream& os);

struct ProfileTables {
    std::map<std::string, std::string> header;
    std::map<std::string, std::vector<std::pair<double, double>>> tables;
};

ProfileTables load_profile_tables(std::istream& is);

}  // namespace infharnack
