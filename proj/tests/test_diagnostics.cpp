#include <cmath>

#include <gtest/gtest.h>

#include "lanemden/diagnostics.hpp"

using namespace lanemden;

namespace {

const ExponentPair kCrit(5, 5);

// int_0^inf (1 + r^2/3)^{-3} r^2 dr through r = sqrt(3) tan(t)
double talenti_energy_oracle() {
    const int n = 20000;
    const double a = 0.0, b = M_PI / 2.0, h = (b - a) / n;
    auto f = [](double t) {
        const double c = std::cos(t), s = std::sin(t);
        return 3.0 * std::sqrt(3.0) * s * s * c * c;  // r^2 dr / (1 + r^2/3)^3 = 3 sqrt3 sin^2 cos^2 dt
    };
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return acc * h / 3.0;
}

}  // namespace

TEST(Pohozaev, VanishesOnTheFlatCriticalSolution) {
    const auto m = builtin_profile(Family::Euclidean, 3);
    const ShotOutcome o = integrate_shot(m, kCrit, 1.0, 1.0);
    const PohozaevScan s = pohozaev_scan(o.trajectory, m, kCrit);
    EXPECT_LT(s.max_abs_P, 1e-9);
    EXPECT_LT(s.energy_residual, 1e-11);
    EXPECT_LT(s.pohozaev_residual, 1e-11);
    for (const auto& p : s.samples) EXPECT_NEAR(p.K_scaled, 0.0, 1e-12);
}

TEST(Pohozaev, NegativeAndDecreasingOnHyperbolicSpace) {
    const auto m = builtin_profile(Family::Hyperbolic, 3, 1.0);
    const ShotOutcome o = integrate_shot(m, kCrit, 1.0, 1.0);
    const PohozaevScan s = pohozaev_scan(o.trajectory, m, kCrit);
    EXPECT_EQ(s.sign_violations, 0u);
    EXPECT_EQ(s.monotonicity_violations, 0u);
    EXPECT_LT(s.pohozaev_residual, 1e-11);
    for (const auto& p : s.samples)
        if (p.r >= 1.0 && p.r <= 50.0) EXPECT_LT(p.P, -1e-6) << "r = " << p.r;
}

TEST(Pohozaev, MonotoneOnSupercriticalIncompleteShots) {
    const auto m = builtin_profile(Family::ExpPower, 3, 3.0);
    const ExponentPair e(6, 8);
    const ShootingProblem prob(m, e);
    for (double eta : {0.3, 1.0, 3.0}) {
        const ShotOutcome o = integrate_shot(prob, 1.0, eta);
        const PohozaevScan s = pohozaev_scan(o.trajectory, m, e);
        EXPECT_EQ(s.sign_violations, 0u) << eta;
        EXPECT_EQ(s.monotonicity_violations, 0u) << eta;
        EXPECT_TRUE(s.identities_ok(1e-10)) << eta;
    }
}

TEST(Kernel, ScaledAndIntegralFormsAgree) {
    for (const auto& m : {builtin_profile(Family::Hyperbolic, 3, 1.0), builtin_profile(Family::ExpPower, 3, 3.0),
                          builtin_profile(Family::Euclidean, 4)}) {
        for (double r : {0.1, 0.7, 2.0, 6.0}) {
            const double a = kernel_scaled(m, kCrit, r, theta(m, r));
            const double b = kernel_scaled_integral_form(m, kCrit, r);
            EXPECT_NEAR(a, b, 1e-9) << m.name << " r = " << r;
        }
    }
}

TEST(Kernel, NonPositiveOnConvexModelsInTheCriticalRegime) {
    const auto m = builtin_profile(Family::Hyperbolic, 3, 1.0);
    for (double r : {0.01, 0.5, 3.0, 30.0}) EXPECT_LE(kernel_scaled(m, kCrit, r, theta(m, r)), 1e-12);
}

TEST(Ledger, FlatEnergiesMatchClosedForm) {
    const auto m = builtin_profile(Family::Euclidean, 3);
    const ShotOutcome o = integrate_shot(m, kCrit, 1.0, 1.0);
    const EnergyLedger L = energy_ledger(o.trajectory, m, kCrit, {1e-3, 1.0, 10.0, 100.0, 1000.0});
    const double oracle = talenti_energy_oracle();
    EXPECT_NEAR(oracle, 3.0 * std::sqrt(3.0) * M_PI / 16.0, 1e-12);
    EXPECT_NEAR(L.points.back().I_u, oracle, 1e-6);
    EXPECT_NEAR(L.points.back().I_v, oracle, 1e-6);
    EXPECT_LT(L.points.front().I_u, 1e-8);
    EXPECT_LT(L.max_residual(), 1e-8);
}

TEST(Ledger, HyperbolicMixedEnergyGrows) {
    const auto m = builtin_profile(Family::Hyperbolic, 3, 1.0);
    const ShotOutcome o = integrate_shot(m, kCrit, 1.0, 1.0);
    const EnergyLedger L = energy_ledger(o.trajectory, m, kCrit, {10, 20, 50, 100, 200});
    EXPECT_LT(L.max_residual(), 1e-8);
    const DivergenceVerdict d = divergence_verdict(L, 3.0 * std::sqrt(3.0) * M_PI / 16.0);
    EXPECT_TRUE(d.increasing);
    EXPECT_TRUE(d.exceeds);
    EXPECT_GT(d.slope, 1.0);
    EXPECT_TRUE(d.diverges());
}

TEST(Ledger, FlatEnergyFlattens) {
    const auto m = builtin_profile(Family::Euclidean, 3);
    const ShotOutcome o = integrate_shot(m, kCrit, 1.0, 1.0);
    const EnergyLedger L = energy_ledger(o.trajectory, m, kCrit, {100, 200, 500, 1000});
    const DivergenceVerdict d = divergence_verdict(L, 3.0 * std::sqrt(3.0) * M_PI / 16.0);
    EXPECT_FALSE(d.exceeds);
    EXPECT_TRUE(d.flattening);
    EXPECT_LT(d.slope, 0.05);
    EXPECT_FALSE(d.diverges());
}

TEST(Bounds, EqualExponentsSimplify) {
    const double th = 0.284346949320599;
    const LimitBounds b = limit_bounds(kCrit, th);
    EXPECT_NEAR(b.u, std::pow(1.25, 0.25) * std::pow(th, -0.25), 1e-12);
    EXPECT_NEAR(b.v, b.u, 1e-12);
    // general form evaluated directly
    const double p = 4.0, q = 6.5, d = p * q - 1.0;
    const LimitBounds g = limit_bounds(ExponentPair(p, q), th);
    const double ref = std::pow(std::pow(p, q + 1.0) * std::pow(q + 1.0, q + 2.0) /
                                    ((p + 1.0) * std::pow(d * th, q + 1.0)), 1.0 / d);
    EXPECT_NEAR(g.u, ref, 1e-12 * ref);
    EXPECT_THROW(limit_bounds(kCrit, 0.0), Error);
}

TEST(Bounds, GlobalShotEnclosuresRespectTheBound) {
    const auto m = builtin_profile(Family::ExpPower, 3, 3.0);
    const ShootingProblem prob(m, kCrit);
    const double th = prob.geometry.theta_value();
    for (double eta : {0.4, 0.8, 1.2}) {
        const ShotOutcome o = integrate_shot(prob, 1.0, eta);
        ASSERT_EQ(o.cls, ShotClass::Global);
        const auto enc = limit_enclosure(o, prob.geometry, kCrit);
        EXPECT_TRUE(abs_bound_check(enc, kCrit, th).satisfied);
        EXPECT_LE(enc.first.upper, o.last.u);
    }
}

TEST(Bounds, WideEnclosureIsReported) {
    const auto m = builtin_profile(Family::ExpPower, 3, 3.0);
    const ShootingProblem prob(m, kCrit);
    IntegratorConfig c;
    c.horizon = 0.3;
    c.certification_width = 1e-14;
    const ShotOutcome o = integrate_shot(prob, 1.0, 0.8, c);
    try {
        limit_enclosure(o, prob.geometry, kCrit, 1e-6);
        FAIL() << "expected a width error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EnclosureTooWide);
    }
}

TEST(Product, StatisticIsPositiveAlongGlobalShots) {
    const auto m = builtin_profile(Family::ExpPower, 3, 3.0);
    const ShootingProblem prob(m, kCrit);
    IntegratorConfig c;
    c.certification_width = 1e-14;
    const ShotOutcome o = integrate_shot(prob, 1.0, 0.8, c);
    const auto stat = product_statistic(o.trajectory, prob.geometry);
    ASSERT_FALSE(stat.empty());
    for (const auto& [r, v] : stat) EXPECT_GT(v, 0.0) << r;
}
