#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "infharnack/errors.hpp"
#include "infharnack/growth_profile.hpp"
#include "infharnack/radial_ode.hpp"

namespace ih = infharnack;
using ih::GrowthProfile;
using ih::NonlinearityPair;
using ih::RadialStatus;
using ih::ScalarFunction;
using ih::Verdict;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

NonlinearityPair cubic() { return {ScalarFunction::power(2, 3), ScalarFunction::zero(), 0}; }
NonlinearityPair linear() { return {ScalarFunction::power(1, 1, true), ScalarFunction::zero(), 0}; }

// R(1) = int_1^inf dphi / sqrt(phi^4 - 1), written in u = phi - 1.
double blowup_radius_oracle() {
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(
        [](double u) { return 1.0 / std::sqrt(u * (u + 2) * (u * u + 2 * u + 2)); }, 0.0, kInf);
}

}  // namespace

TEST(SolveIvp, LinearForceGivesCosh) {
    ih::RadialOptions opt;
    opt.r_max = 3.0;
    const auto sol = ih::solve_ivp(linear(), 1.0, opt);
    EXPECT_EQ(sol.status, RadialStatus::ReachedRmax);
    double worst = 0;
    for (const auto& n : sol.nodes) {
        worst = std::max(worst, std::abs(n.phi - std::cosh(n.r)));
        worst = std::max(worst, std::abs(n.dphi - std::sinh(n.r)));
    }
    EXPECT_LE(worst, 1e-8);
    EXPECT_DOUBLE_EQ(sol.nodes.back().r, 3.0);
}

TEST(SolveIvp, CubicBlowUpBracketContainsOracle) {
    const double R1 = blowup_radius_oracle();
    EXPECT_NEAR(R1, 1.3110288, 1e-7);
    const auto sol = ih::solve_ivp(cubic(), 1.0);
    ASSERT_NE(sol.status, RadialStatus::ReachedRmax);
    EXPECT_LE(sol.R_lo, R1);
    EXPECT_GE(sol.R_hi, R1) << std::setprecision(17) << sol.R_lo << " " << sol.R_hi << " " << R1;
    EXPECT_LE(sol.R_hi - sol.R_lo, 1e-3);
}

TEST(SolveIvp, BlowUpRadiusScalesInverselyWithA) {
    const double R1 = blowup_radius_oracle();
    for (double a : {2.0, 4.0, 8.0}) {
        ih::RadialOptions opt;
        opt.phi_cap = 1e6 * a;
        const auto sol = ih::solve_ivp(cubic(), a, opt);
        EXPECT_LE(sol.R_lo, R1 / a + 1e-12) << a;
        EXPECT_GE(sol.R_hi, R1 / a - 1e-12) << a;
    }
}

TEST(SolveIvp, RestPointReturnsFlaggedConstant) {
    const NonlinearityPair none(ScalarFunction::zero(), ScalarFunction::zero(), 0);
    const auto sol = ih::solve_ivp(none, 1.0);
    EXPECT_TRUE(sol.rest_point);
    EXPECT_EQ(sol.status, RadialStatus::ReachedRmax);
    for (const auto& n : sol.nodes) {
        EXPECT_EQ(n.phi, 1.0);
        EXPECT_EQ(n.dphi, 0.0);
    }
    EXPECT_FALSE(sol.note.empty());
}

TEST(SolveIvp, ZeroToTheZeroIsOne) {
    // q = 0 with g = 1: phi''(0) = f(a) + g(a) even though phi'(0) = 0.
    const NonlinearityPair p(ScalarFunction::zero(), ScalarFunction::constant(1), 0);
    ih::RadialOptions opt;
    opt.r_max = 2.0;
    const auto sol = ih::solve_ivp(p, 1.0, opt);
    EXPECT_FALSE(sol.rest_point);
    for (const auto& n : sol.nodes) EXPECT_NEAR(n.phi, 1.0 + 0.5 * n.r * n.r, 1e-10);
}

TEST(SolveIvp, RejectsBadArguments) {
    EXPECT_THROW(ih::solve_ivp(cubic(), 0.0), ih::ArgumentError);
    EXPECT_THROW(ih::solve_ivp(cubic(), -1.0), ih::ArgumentError);
    ih::RadialOptions opt;
    opt.phi_cap = 0.5;
    EXPECT_THROW(ih::solve_ivp(cubic(), 1.0, opt), ih::ArgumentError);
}

TEST(SolveIvp, StartsAtRestAndStaysMonotoneAndConvex) {
    const NonlinearityPair pairs[] = {
        cubic(), linear(),
        {ScalarFunction::power(1, 3), ScalarFunction::power(1, 1), 1},
        {ScalarFunction::exp_minus_one(1), ScalarFunction::zero(), 0.5},
        {ScalarFunction::power(0.5, 2), ScalarFunction::constant(1), 1.5}};
    for (const auto& p : pairs) {
        ih::RadialOptions opt;
        opt.r_max = 3.0;
        const auto sol = ih::solve_ivp(p, 1.0, opt);
        ASSERT_GE(sol.nodes.size(), 3u);
        EXPECT_EQ(sol.nodes.front().r, 0.0);
        EXPECT_EQ(sol.nodes.front().phi, 1.0);
        EXPECT_EQ(sol.nodes.front().dphi, 0.0);
        EXPECT_LE(sol.R_lo, sol.R_hi);
        if (sol.status != RadialStatus::ReachedRmax) EXPECT_LE(sol.R_hi - sol.R_lo, 1e-3);
        for (std::size_t i = 1; i < sol.nodes.size(); ++i) {
            EXPECT_GT(sol.nodes[i].r, sol.nodes[i - 1].r);
            EXPECT_GE(sol.nodes[i].phi, sol.nodes[i - 1].phi);
            EXPECT_GE(sol.nodes[i].dphi, sol.nodes[i - 1].dphi);
        }
    }
}

TEST(SolveIvp, EnergyIsConservedWithoutGradientTerm) {
    // phi'^2 = 2 int_a^phi f; F for f = 2t^3 is (phi^4 - 1)/2.
    const auto sol = ih::solve_ivp(cubic(), 1.0);
    for (const auto& n : sol.nodes) {
        const double energy = std::expm1(4 * std::log(n.phi));
        EXPECT_NEAR(n.dphi * n.dphi, energy, 1e-8 * (1 + energy)) << n.r;
    }
}

TEST(SolveIvp, HalvingTolerancesMovesBracketLessThanItsWidth) {
    ih::RadialOptions coarse;
    coarse.rtol = coarse.atol = 1e-9;
    ih::RadialOptions fine = coarse;
    fine.rtol = fine.atol = 5e-10;
    const auto a = ih::solve_ivp(cubic(), 1.0, coarse), b = ih::solve_ivp(cubic(), 1.0, fine);
    EXPECT_LT(std::abs(a.R_hi - b.R_hi), std::max(a.R_hi - a.R_lo, b.R_hi - b.R_lo));
}

TEST(LoUl, RatioIsSqrtTwoForCubicAndLinear) {
    for (const auto& p : {cubic(), linear()}) {
        ih::RadialOptions opt;
        opt.r_max = 3.0;
        const auto sol = ih::solve_ivp(p, 1.0, opt);
        const GrowthProfile prof(p);
        const auto rep = ih::verify_lo_ul(sol, prof);
        EXPECT_TRUE(rep.pass);
        EXPECT_FALSE(rep.vacuous);
        EXPECT_DOUBLE_EQ(rep.C_q, 0.5);
        for (const auto& row : rep.rows) {
            if (row.r < 1e-3) continue;  // 0/0 at the start
            EXPECT_NEAR(row.lo_ratio, std::sqrt(2.0), 1e-6) << row.r;
            EXPECT_GE(row.ul_rhs, row.ul_lhs - 1e-8);
        }
    }
}

TEST(LoUl, GradientBranchHolds) {
    const NonlinearityPair p(ScalarFunction::zero(), ScalarFunction::power(1, 1), 0);
    ih::RadialOptions opt;
    opt.r_max = 3.0;
    const auto rep = ih::verify_lo_ul(ih::solve_ivp(p, 1.0, opt), GrowthProfile(p));
    EXPECT_TRUE(rep.pass);
    EXPECT_GE(rep.min_lo_ratio, 0.5);
}

TEST(LoUl, RestPointIsVacuous) {
    const NonlinearityPair none(ScalarFunction::zero(), ScalarFunction::zero(), 0);
    const GrowthProfile prof(cubic());
    const auto rep = ih::verify_lo_ul(ih::solve_ivp(none, 1.0), prof);
    EXPECT_TRUE(rep.pass);
    EXPECT_TRUE(rep.vacuous);
}

TEST(Ra, CubicBlowUpBelowPsi) {
    const GrowthProfile prof(cubic());
    const double R1 = blowup_radius_oracle();
    for (double a : {1.0, 2.0, 4.0, 8.0}) {
        ih::RadialOptions opt;
        opt.phi_cap = 1e6 * a;
        const auto res = ih::verify_Ra(ih::solve_ivp(cubic(), a, opt), prof);
        EXPECT_EQ(res.verdict, Verdict::Pass) << res.reason;
        EXPECT_NEAR(res.psi_a, 2 * std::sqrt(2.0) * R1 / a, 1e-6 / a);
    }
}

TEST(Ra, NoBlowUpIsInconclusiveAndDivergentKoThrows) {
    ih::RadialOptions opt;
    opt.r_max = 0.5;
    const auto res = ih::verify_Ra(ih::solve_ivp(cubic(), 1.0, opt), GrowthProfile(cubic()));
    EXPECT_EQ(res.verdict, Verdict::Inconclusive);
    const auto sol = ih::solve_ivp(linear(), 1.0, opt);
    EXPECT_THROW(ih::verify_Ra(sol, GrowthProfile(linear())), ih::PreconditionError);
}

TEST(RadialExtension, CenterSymmetryAndCosh) {
    ih::RadialOptions opt;
    opt.r_max = 3.0;
    const auto sol = ih::solve_ivp(linear(), 1.0, opt);
    const ih::Point z{0.3, -0.2};
    EXPECT_DOUBLE_EQ(ih::radial_extension(sol, z, z), 1.0);
    EXPECT_NEAR(ih::radial_extension(sol, z, {z.x + 1, z.y}), std::cosh(1.0), 1e-7);
    EXPECT_NEAR(ih::radial_extension(sol, z, {z.x + 1, z.y}), 1.5430806, 1e-7);
    for (double d : {0.1, 0.77, 1.9, 2.5}) {
        const double v1 = ih::radial_extension(sol, z, {z.x + d, z.y});
        const double v2 = ih::radial_extension(sol, z, {z.x - d * 0.6, z.y + d * 0.8});
        EXPECT_NEAR(v1, v2, 1e-14);
    }
    EXPECT_THROW(ih::radial_extension(sol, z, {z.x + 3.5, z.y}), ih::DomainError);
}

TEST(RadialExtension, OrderedInInitialValue) {
    const auto s1 = ih::solve_ivp(cubic(), 1.0), s2 = ih::solve_ivp(cubic(), 2.0);
    const double R = std::min(s1.R_lo, s2.R_lo);
    for (int i = 0; i < 50; ++i) {
        const ih::Point x{R * i / 51.0, 0};
        EXPECT_LT(ih::radial_extension(s1, {}, x), ih::radial_extension(s2, {}, x));
    }
}

TEST(WriteRadial, HeaderAndThreeColumns) {
    std::ostringstream os;
    ih::write_radial(ih::solve_ivp(cubic(), 1.0), cubic(), os);
    const std::string s = os.str();
    EXPECT_NE(s.find("status"), std::string::npos);
    std::istringstream in(s);
    std::string line, last;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') last = line;
    std::istringstream row(last);
    double r, phi, dphi;
    EXPECT_TRUE(static_cast<bool>(row >> r >> phi >> dphi));
}
