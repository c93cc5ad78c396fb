#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <sstream>

#include "infharnack/errors.hpp"
#include "infharnack/growth_profile.hpp"

namespace ih = infharnack;
using ih::GrowthProfile;
using ih::NonlinearityPair;
using ih::ScalarFunction;
using ih::Verdict;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

NonlinearityPair pair_of(ScalarFunction f, ScalarFunction g, double q) {
    return NonlinearityPair(std::move(f), std::move(g), q);
}

// c t^gamma pairs with cancellation-free differences of the antiderivatives.
struct PowerPair {
    double cf, gf, cg, gg, q;
    static double diff(double c, double gamma, double t, double u) {
        if (c == 0) return 0;
        if (t == 0) return c * std::pow(u, gamma + 1) / (gamma + 1);
        return c * std::pow(t, gamma + 1) / (gamma + 1) * std::expm1((gamma + 1) * std::log1p(u / t));
    }
    NonlinearityPair pair() const {
        return pair_of(cf == 0 ? ScalarFunction::zero() : ScalarFunction::power(cf, gf),
                       cg == 0 ? ScalarFunction::zero() : ScalarFunction::power(cg, gg), q);
    }
};

// Psi by double-exponential quadrature in u = s - t on (0, inf), independent of the
// library code.
double psi_oracle(const PowerPair& p, double t) {
    boost::math::quadrature::tanh_sinh<double> ts;
    auto integrand = [&](double u) {
        const double dF = PowerPair::diff(p.cf, p.gf, t, u), dG = PowerPair::diff(p.cg, p.gg, t, u);
        return 1.0 / (std::sqrt(dF) + std::pow(dG, 1.0 / (2.0 - p.q)));
    };
    return ts.integrate(integrand, 0.0, kInf) / ih::C_of_q(p.q);
}

double lemniscate_integral() {
    // int_1^inf ds / sqrt(s^4 - 1) with s = 1 + u
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(
        [](double u) {
            const double s = 1 + u;
            return 1.0 / std::sqrt(u * (2 + u) * (s * s + 1));
        },
        0.0, kInf);
}

}  // namespace

TEST(Antiderivative, Examples) {
    EXPECT_NEAR(ih::antiderivative(ScalarFunction::power(1, 3), 2.0), 4.0, 1e-12);
    EXPECT_EQ(ih::antiderivative(ScalarFunction::zero(), 5.0), 0.0);
    EXPECT_NEAR(ih::antiderivative(ScalarFunction::exp_minus_one(1), 1.0), std::exp(1.0) - 2.0, 1e-12);
    EXPECT_THROW(ih::antiderivative(ScalarFunction::constant(-1), 1.0), ih::DomainError);
}

TEST(Antiderivative, PiecewiseLinearIsExact) {
    const auto f = ScalarFunction::piecewise_linear({0, 1, 3}, {0, 2, 2});
    EXPECT_DOUBLE_EQ(ih::antiderivative(f, 3.0), 1.0 + 4.0);
    EXPECT_DOUBLE_EQ(ih::antiderivative(f, 0.5), 0.25);
}

TEST(Antiderivative, MatchesGaussKronrodOracle) {
    for (const auto& f : {ScalarFunction::log_plus_one(2.0), ScalarFunction::power(0.7, 1.3),
                          ScalarFunction::tabulated({0, 1, 2, 4}, {0, 1, 5, 6}, ih::InterpRule::Pchip)}) {
        const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double s) { return f(s); }, 0.0, 3.5, 15, 1e-14);
        EXPECT_NEAR(ih::antiderivative(f, 3.5), ref, 1e-10 * std::abs(ref)) << f.describe();
    }
}

TEST(CofQ, ConstantHalfOnUnitInterval) {
    for (double q : {0.0, 0.3, 0.5, 1.0}) EXPECT_DOUBLE_EQ(ih::C_of_q(q), 0.5);
    EXPECT_NEAR(ih::C_of_q(1.5), 0.5 * std::min(1.0, std::pow(0.5, 2.0)), 1e-15);
    EXPECT_THROW(ih::C_of_q(2.0), ih::ArgumentError);
}

TEST(KO, Examples) {
    auto r = ih::check_KO(pair_of(ScalarFunction::power(1, 3), {}, 0));
    EXPECT_EQ(r.overall(), Verdict::Pass);
    EXPECT_NEAR(r.parameters.at("ko_integral"), 2.0, 1e-6);

    r = ih::check_KO(pair_of(ScalarFunction::power(1, 1), {}, 0));
    EXPECT_EQ(r.overall(), Verdict::Fail);
    EXPECT_FALSE(r.get(ih::ConditionId::KO).evidence.empty());

    r = ih::check_KO(pair_of({}, ScalarFunction::power(1, 3), 1));
    EXPECT_EQ(r.overall(), Verdict::Pass);
    EXPECT_NEAR(r.parameters.at("ko_integral"), 4.0 / 3.0, 1e-6);

    r = ih::check_KO(pair_of({}, {}, 0));
    EXPECT_EQ(r.overall(), Verdict::Fail);
}

TEST(ScriptFG, Examples) {
    const GrowthProfile a(pair_of(ScalarFunction::power(1, 3), {}, 0));
    EXPECT_EQ(a.script_FG(2.0, 2.0), std::make_pair(0.0, 0.0));
    auto [F, G] = a.script_FG(2.0, 1.0);
    EXPECT_NEAR(F, 15.0 / 4.0, 1e-12);
    EXPECT_EQ(G, 0.0);
    const GrowthProfile b(pair_of(ScalarFunction::power(1, 3), ScalarFunction::power(1, 1), 1));
    std::tie(F, G) = b.script_FG(3.0, 1.0);
    EXPECT_NEAR(F, 20.0, 1e-11);
    EXPECT_NEAR(G, 4.0, 1e-12);
    EXPECT_THROW(b.script_FG(1.0, 2.0), ih::ArgumentError);
}

TEST(Psi, CubicMatchesLemniscateOracle) {
    const double L = lemniscate_integral();
    EXPECT_NEAR(L, 1.3110287771, 1e-9);
    const GrowthProfile p(pair_of(ScalarFunction::power(1, 3), {}, 0));
    for (double t : {1.0, 2.0, 4.0}) {
        const auto v = p.psi(t);
        EXPECT_FALSE(v.divergent);
        EXPECT_NEAR(v.value, 4.0 * L / t, 1e-8 * v.value) << "t = " << t;
    }
}

TEST(Psi, DivergentWhenKOFails) {
    const GrowthProfile p(pair_of(ScalarFunction::power(1, 1), {}, 0));
    EXPECT_FALSE(p.ko_holds());
    EXPECT_TRUE(p.psi(1.0).divergent);
    EXPECT_TRUE(p.psi_zero_plus().infinite);
}

TEST(Psi, ScalingOracleMatrix) {
    // f = c t^gamma: Psi(t) = Psi(1) / t^((gamma - 1)/2).
    for (double c : {0.5, 2.0})
        for (double gamma : {2.0, 3.0, 5.0}) {
            const GrowthProfile p(pair_of(ScalarFunction::power(c, gamma), {}, 0));
            const double base = p.psi(1.0).value;
            EXPECT_NEAR(base, psi_oracle({c, gamma, 0, 0, 0}, 1.0), 1e-7 * base);
            for (double t : {0.5, 3.0, 10.0})
                EXPECT_NEAR(p.psi(t).value, base / std::pow(t, (gamma - 1) / 2), 1e-7 * base)
                    << "c " << c << " gamma " << gamma << " t " << t;
        }
}

TEST(Psi, MixedPairsMatchOracle) {
    const PowerPair cases[] = {{1, 3, 1, 1, 1}, {1, 3, 1, 3, 1}, {0, 0, 1, 3, 0.5},
                               {1, 2, 0.5, 1.5, 0.5}, {2, 3, 1, 1, 0}};
    for (const auto& c : cases) {
        const GrowthProfile p(c.pair());
        for (double t : {0.5, 2.0}) {
            const double ref = psi_oracle(c, t);
            EXPECT_NEAR(p.psi(t).value, ref, 1e-7 * ref) << c.pair().describe() << " t " << t;
        }
    }
}

TEST(Psi, PureGradientTermAtQOneDivergesAtTheEndpoint) {
    // f = 0 < g and q = 1: the integrand behaves like 1/(g(t)(s - t)) near s = t.
    const GrowthProfile p(pair_of({}, ScalarFunction::power(1, 3), 1));
    EXPECT_TRUE(p.psi(1.0).divergent);
    // Any f > 0 restores the square-root singularity.
    const GrowthProfile q(pair_of(ScalarFunction::power(1e-3, 3), ScalarFunction::power(1, 3), 1));
    EXPECT_FALSE(q.psi(1.0).divergent);
}

TEST(Psi, EndpointSingularityStableUnderTolerance) {
    const auto pair = pair_of(ScalarFunction::power(1, 3), {}, 0);
    ih::ProfileOptions o;
    o.quadrature_tol = 1e-8;
    const GrowthProfile coarse(pair, o);
    o.quadrature_tol = 5e-9;
    const GrowthProfile fine(pair, o);
    const auto a = coarse.psi(1.0), b = fine.psi(1.0);
    EXPECT_LE(std::abs(a.value - b.value), std::max(a.error, 1e-12));
}

TEST(PsiZeroPlus, Examples) {
    EXPECT_TRUE(GrowthProfile(pair_of(ScalarFunction::power(1, 3), {}, 0)).psi_zero_plus().infinite);
    EXPECT_TRUE(GrowthProfile(pair_of(ScalarFunction::exp_minus_one(1), {}, 0)).psi_zero_plus().infinite);
    // f(t) = t^3 + 1 on t > 0: finite limit, oracle 2 int_0^inf ds / sqrt(s^4/4 + s).
    const GrowthProfile p(pair_of(ScalarFunction(ih::Power{1, 3}, 1.0), {}, 0));
    boost::math::quadrature::tanh_sinh<double> ts;
    const double ref = 2.0 * ts.integrate([](double s) { return 1.0 / std::sqrt(s * s * s * s / 4 + s); }, 0.0, kInf);
    const auto z = p.psi_zero_plus();
    ASSERT_FALSE(z.infinite);
    EXPECT_NEAR(z.value, ref, 1e-5 * ref);
}

TEST(Phi, InverseExamples) {
    const double L = lemniscate_integral();
    const GrowthProfile p(pair_of(ScalarFunction::power(1, 3), {}, 0));
    EXPECT_NEAR(p.phi(4 * L), 1.0, 1e-6);
    EXPECT_NEAR(p.phi(p.psi(2.0).value), 2.0, 2e-6);
    EXPECT_GT(p.phi(0.5), p.phi(0.6));
    EXPECT_THROW(p.phi(0.0), ih::ArgumentError);
    const GrowthProfile f(pair_of(ScalarFunction(ih::Power{1, 3}, 1.0), {}, 0));
    EXPECT_THROW(f.phi(2 * f.psi_zero_plus().value), ih::DomainError);
}

TEST(Phi, RoundTripOnEveryTableNode) {
    // Psi of the exponential pair underflows beyond t ~ 1400, so its table stops earlier.
    ih::ProfileOptions shorter;
    shorter.table_hi = 200;
    for (const auto& [pair, opt] : {std::make_pair(pair_of(ScalarFunction::power(2, 3), {}, 0), ih::ProfileOptions{}),
                                    std::make_pair(pair_of(ScalarFunction::power(1, 3), ScalarFunction::power(1, 1), 1), ih::ProfileOptions{}),
                                    std::make_pair(pair_of(ScalarFunction::exp_minus_one(1), {}, 0.5), shorter)}) {
        const GrowthProfile p(pair, opt);
        ASSERT_FALSE(p.psi_table().empty());
        for (const auto& [t, v] : p.psi_table()) EXPECT_NEAR(p.phi(v), t, 1e-6 * t) << pair.describe();
    }
}

TEST(Profile, TablesMonotone) {
    const GrowthProfile p(pair_of(ScalarFunction::power(1, 3), ScalarFunction::power(1, 1), 1));
    for (std::size_t i = 1; i < p.F_table().size(); ++i) {
        EXPECT_GE(p.F_table()[i].second, p.F_table()[i - 1].second);
        EXPECT_GE(p.G_table()[i].second, p.G_table()[i - 1].second);
        EXPECT_LT(p.psi_table()[i].second, p.psi_table()[i - 1].second);
    }
}

TEST(QBound, Examples) {
    const double L = lemniscate_integral();
    const GrowthProfile p(pair_of(ScalarFunction::power(1, 3), {}, 0));
    EXPECT_NEAR(p.q_bound(1.0), 4 * L, 1e-5);
    const GrowthProfile f(pair_of(ScalarFunction(ih::Power{1, 3}, 1.0), {}, 0));
    const double z = f.psi_zero_plus().value;
    EXPECT_EQ(f.q_bound(z), 0.0);
    EXPECT_EQ(f.q_bound(2 * z), 0.0);
    double prev = kInf;
    for (double t = 0.05; t < 1.5 * z; t *= 1.3) {
        const double v = f.q_bound(t);
        EXPECT_LE(v, prev);
        prev = v;
    }
}

TEST(LimitPsi, Examples) {
    EXPECT_TRUE(ih::verify_limit_psi(GrowthProfile(pair_of(ScalarFunction::power(1, 3), {}, 0)),
                                     {1, 10, 100, 1000}));
    EXPECT_TRUE(ih::verify_limit_psi(
        GrowthProfile(pair_of(ScalarFunction::power(1, 3), ScalarFunction::power(1, 3), 1)), {1, 10, 100, 1000}));
    EXPECT_THROW(ih::verify_limit_psi(GrowthProfile(pair_of(ScalarFunction::power(1, 1), {}, 0)), {1, 10}),
                 ih::PreconditionError);
}

TEST(Ap1, TailCheckClosedFormMatrix) {
    auto lin = [](double s) { return s; };
    auto root = [](double s) { return std::sqrt(s); };
    auto r = ih::ap1_tail_check(lin, 1.0, 2.0, 2.0, 1.0);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.lhs, 1.0, 1e-8);
    EXPECT_NEAR(r.rhs, 2 * std::log(2.0), 1e-12);
    r = ih::ap1_tail_check(lin, 10.0, 2.0, 2.0, 1.0);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.lhs, 0.1, 1e-9);
    EXPECT_NEAR(r.rhs, 0.2 * std::log(2.0), 1e-12);
    r = ih::ap1_tail_check(root, 1.0, 4.0, 2.0, 1.0);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.lhs, 2.0, 1e-8);
    EXPECT_NEAR(r.rhs, 2 * std::log(4.0), 1e-12);
    EXPECT_NEAR(r.p, 0.5, 1e-15);
}

TEST(Ap1, DivergentTailFails) {
    const auto r = ih::ap1_tail_check([](double) { return 1.0; }, 1.0, 2.0, 2.0, 1.0);
    EXPECT_FALSE(r.pass);
    EXPECT_FALSE(r.diagnostic.empty());
}

TEST(Ap1, LogLimit) {
    const std::vector<double> ts = {10, 100, 1e3, 1e4, 1e5};
    EXPECT_TRUE(ih::ap1_log_limit([](double s) { return s; }, ts));
    EXPECT_TRUE(ih::ap1_log_limit([](double s) { return std::sqrt(s); }, ts));
    EXPECT_THROW(ih::ap1_log_limit([](double) { return 1.0; }, ts), ih::PreconditionError);
}

TEST(Ap2, CubicConstantIsPsiOfOne) {
    const double L = lemniscate_integral();
    const GrowthProfile p(pair_of(ScalarFunction::power(1, 3), {}, 0));
    const double t0 = 2.0;
    const auto grid = ih::log_grid(1e-3, p.psi(t0).value, 40);
    const auto r = ih::ap2_estimate(p, grid, t0);
    EXPECT_NEAR(r.C_estimate, 4 * L, 1e-5);
    for (const auto& row : r.table) EXPECT_NEAR(row.scaled, 4 * L, 1e-5);
}

TEST(Ap2, LogBranchBounded) {
    const GrowthProfile p(pair_of(ScalarFunction::power(1, 3), ScalarFunction::power(1, 1), 1));
    const double t0 = 2.0;
    const auto grid = ih::log_grid(1e-3, p.psi(t0).value, 40);
    const auto r = ih::ap2_estimate(p, grid, t0);
    EXPECT_TRUE(std::isfinite(r.C_estimate));
    EXPECT_GT(r.C_estimate, 0.0);
    // Refining the grid toward 0 does not make the constant run away.
    const auto r2 = ih::ap2_estimate(p, ih::log_grid(1e-5, p.psi(t0).value, 60), t0);
    EXPECT_LT(r2.C_estimate, 1.5 * r.C_estimate);
    EXPECT_THROW(ih::ap2_estimate(p, {10 * p.psi(t0).value}, t0), ih::ArgumentError);
}

TEST(ProfileDump, RoundTrip) {
    const GrowthProfile p(pair_of(ScalarFunction::power(2, 3), {}, 0));
    std::stringstream ss;
    ih::dump_profile(p, ss);
    const auto t = ih::load_profile_tables(ss);
    EXPECT_EQ(t.header.at("C_q"), "0.5");
    ASSERT_EQ(t.tables.at("Psi").size(), p.psi_table().size());
    for (std::size_t i = 0; i < p.psi_table().size(); ++i)
        EXPECT_NEAR(t.tables.at("Psi")[i].second, p.psi_table()[i].second, 1e-8 * p.psi_table()[i].second);
    std::istringstream bad("1 2\n");
    EXPECT_THROW(ih::load_profile_tables(bad), ih::ParseError);
}
