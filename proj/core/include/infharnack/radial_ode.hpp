#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "infharnack/geometry.hpp"
#include "infharnack/growth_profile.hpp"
#include "infharnack/nonlinearity.hpp"

namespace infharnack {

enum class RadialStatus { BlewUp, ReachedCap, ReachedRmax };
const char* to_string(RadialStatus s);

struct RadialNode {
    double r, phi, dphi;
};

struct RadialOptions {
    double phi_cap = 1e6;
    double r_max = 10.0;
    double rtol = 1e-12;
    double atol = 1e-12;
    double bracket_width = 1e-3;
    double error_allowance = 1e-7;  // bracket padding per unit radius for global error
    double inverse_switch = 10.0;  // integrate in phi once phi >= inverse_switch * a
    long max_steps = 2000000;
};

struct RadialSolution {
    double a = 0.0;
    double q = 0.0;
    std::vector<RadialNode> nodes;
    RadialStatus status = RadialStatus::ReachedRmax;
    // Blow-up radius lies in [R_lo, R_hi]; R_hi = inf when no blow-up was certified.
    double R_lo = 0.0;
    double R_hi = 0.0;
    bool rest_point = false;  // constant solution returned, uniqueness not guaranteed
    std::string note;
};

// phi'' = f(phi) + g(phi) |phi'|^q, phi(0) = a, phi'(0) = 0, with 0^0 = 1.
RadialSolution solve_ivp(const NonlinearityPair& pair, double a, const RadialOptions& opt = {});

struct LoUlRow {
    double r, phi, dphi;
    double lo_ratio;  // phi' / (sqrt F + G^(1/(2-q)))
    double ul_lhs;    // C(q) r
    double ul_rhs;    // integral from a to phi of ds / (sqrt F + G^(1/(2-q)))
};

struct LoUlReport {
    bool pass = false;
    bool vacuous = false;
    double C_q = 0.0;
    double min_lo_ratio = 0.0;
    double min_ul_slack = 0.0;  // min of ul_rhs - ul_lhs
    std::vector<LoUlRow> rows;
};

LoUlReport verify_lo_ul(const RadialSolution& sol, const GrowthProfile& profile,
                        double tol = 1e-8);

struct RaResult {
    double R_hi = 0.0;
    double psi_a = 0.0;
    Verdict verdict = Verdict::Inconclusive;
    std::string reason;
};

RaResult verify_Ra(const RadialSolution& sol, const GrowthProfile& profile, double tol = 1e-8);

// phi(|x - center|) by monotone cubic Hermite interpolation of the nodes.
double radial_extension(const RadialSolution& sol, Point center, Point x);

void write_radial(const RadialSolution& sol, const NonlinearityPair& pair, std::ostream& os);

}  // namespace infharnack
