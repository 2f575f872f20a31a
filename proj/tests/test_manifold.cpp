#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "lanemden/manifold.hpp"

using namespace lanemden;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

// Volume-surface ratio by composite Simpson on the weight ratio.
double theta_oracle(const ManifoldProfile& m, double r) {
    const double c = double(m.n - 1);
    return simpson([&](double s) { return s <= 0.0 ? 0.0 : std::exp(c * (m.log_psi(s) - m.log_psi(r))); }, 0.0, r,
                   20000);
}

double hyperbolic_theta_n3(double r) {
    const double sh = std::sinh(r);
    return (sh * std::cosh(r) - r) / (2.0 * sh * sh);
}

}  // namespace

TEST(Theta, FlatIsLinear) {
    const auto m = builtin_profile(Family::Euclidean, 3);
    for (double r : {1e-13, 1e-6, 0.3, 1.5, 40.0}) EXPECT_NEAR(theta(m, r), r / 3.0, 1e-12 * r);
    const auto m5 = builtin_profile(Family::Euclidean, 5);
    EXPECT_NEAR(theta(m5, 2.0), 0.4, 1e-12);
}

TEST(Theta, HyperbolicClosedForm) {
    const auto m = builtin_profile(Family::Hyperbolic, 3, 1.0);
    for (double r : {1e-4, 0.01, 0.3, 1.0, 10.0, 200.0}) {
        const double ref = r < 1e-3 ? r / 3.0 - 2.0 * r * r * r / 45.0 : hyperbolic_theta_n3(r);
        EXPECT_NEAR(theta(m, r), ref, 1e-10 * ref) << "r = " << r;
    }
}

TEST(Theta, ExpPowerAgainstSimpson) {
    const auto m = builtin_profile(Family::ExpPower, 3, 3.0);
    for (double r : {0.2, 0.8, 1.5, 2.5}) {
        const double ref = theta_oracle(m, r);
        EXPECT_NEAR(theta(m, r), ref, 1e-9 * ref) << "r = " << r;
    }
}

TEST(Theta, FarFieldDoesNotOverflow) {
    const auto m = builtin_profile(Family::ExpPower, 3, 3.0);
    const double r = 500.0;
    const double th = theta(m, r);
    EXPECT_TRUE(std::isfinite(th));
    EXPECT_NEAR(th * 2.0 * m.dlog_psi(r), 1.0, 1e-5);
}

TEST(Warping, LogShiftMatchesDirectDifference) {
    for (const auto& m : {builtin_profile(Family::Hyperbolic, 3, 1.0), builtin_profile(Family::ExpPower, 3, 2.5),
                          builtin_profile(Family::Euclidean, 3)}) {
        for (double r : {0.5, 2.0, 5.0})
            for (double d : {-0.25, 1e-3, 0.7})
                EXPECT_NEAR(m.log_psi_shift(r, d), m.log_psi(r + d) - m.log_psi(r), 1e-11) << m.name;
    }
}

TEST(Warping, DerivativesAgreeWithDifferences) {
    const auto m = builtin_profile(Family::ExpPower, 4, 1.5);
    const double r = 0.9, h = 1e-5;
    EXPECT_NEAR(m.dpsi(r), (m.psi(r + h) - m.psi(r - h)) / (2 * h), 1e-7);
    EXPECT_NEAR(m.d2psi(r), (m.dpsi(r + h) - m.dpsi(r - h)) / (2 * h), 1e-6);
    EXPECT_NEAR(m.d2psi_over_psi(r), m.d2psi(r) / m.psi(r), 1e-12);
}

TEST(Profile, RejectsBadPole) {
    EXPECT_THROW(custom_profile(
                     "doubled", 3, [](double r) { return 2.0 * r; }, [](double) { return 2.0; },
                     [](double) { return 0.0; }),
                 Error);
    EXPECT_THROW(builtin_profile(Family::Euclidean, 2), Error);
}

TEST(Profile, ParsesFamilies) {
    EXPECT_EQ(parse_family("hyperbolic"), Family::Hyperbolic);
    EXPECT_EQ(parse_family("exp_power"), Family::ExpPower);
    EXPECT_FALSE(parse_family("sphere").has_value());
}

TEST(ThetaTotal, CompleteProfilesDiverge) {
    EXPECT_EQ(theta_total(builtin_profile(Family::Euclidean, 3)).kind, ThetaTotal::Kind::Infinite);
    EXPECT_EQ(theta_total(builtin_profile(Family::Hyperbolic, 3, 1.0)).kind, ThetaTotal::Kind::Infinite);
    EXPECT_EQ(theta_total(builtin_profile(Family::ExpPower, 3, 1.0)).kind, ThetaTotal::Kind::Infinite);
}

TEST(ThetaTotal, ExpPowerCubicIsFinite) {
    const auto m = builtin_profile(Family::ExpPower, 3, 3.0);
    const ThetaTotal t = theta_total(m);
    ASSERT_EQ(t.kind, ThetaTotal::Kind::Finite);
    // Simpson over [0, 50] with the leading tail 1 / (6 r^2) beyond
    const double body = simpson([&](double r) { return r <= 0.0 ? 0.0 : theta(m, r); }, 0.0, 50.0, 4000);
    EXPECT_NEAR(t.value, body + 1.0 / 300.0, 1e-6);
    EXPECT_NEAR(t.value, 0.284346949320599, 1e-9);
}

TEST(Summary, DeclaredAndInferredCompleteness) {
    const auto g2 = summarize(builtin_profile(Family::ExpPower, 3, 2.0));
    EXPECT_TRUE(g2.complete());
    EXPECT_EQ(g2.source, CompletenessSource::Declared);
    const auto g3 = summarize(builtin_profile(Family::ExpPower, 3, 3.0));
    EXPECT_FALSE(g3.complete());
    EXPECT_FALSE(g3.tail.empty());
    const auto gh = summarize(builtin_profile(Family::Hyperbolic, 3, 1.0));
    EXPECT_TRUE(gh.complete());
}

TEST(Summary, AmbiguousTailNeedsAHint) {
    // Theta ~ 1/(4r): integrability is undecidable from the tail
    auto m = builtin_profile(Family::ExpPower, 3, 2.0);
    m.completeness_hint.reset();
    try {
        summarize(m);
        FAIL() << "expected an ambiguity error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::AmbiguousCompleteness);
    }
}

TEST(Summary, TailTableMatchesDirectIntegral) {
    const auto g = summarize(builtin_profile(Family::ExpPower, 3, 3.0));
    for (double H : {0.5, 2.0, 7.3, 100.0}) {
        const TailSample s = g.tail_at(H);
        const double direct = g.total.value - integrate_theta(g.profile, 0.0, H, g.quad);
        EXPECT_NEAR(s.tail_theta, direct, 1e-8 * std::max(1.0, direct) + 1e-12) << "H = " << H;
        EXPECT_GT(s.cross, 0.0);
        EXPECT_LE(s.cross, s.theta * H + s.tail_theta * 10.0);
    }
}

TEST(Convexity, ModelSpacesAreCertified) {
    const ExponentPair crit(5, 5), super(6, 8);
    for (const auto& m : {builtin_profile(Family::Euclidean, 3), builtin_profile(Family::Hyperbolic, 3, 1.0),
                          builtin_profile(Family::ExpPower, 3, 3.0)}) {
        EXPECT_TRUE(check_volume_convexity(m, crit).convex) << m.name;
        EXPECT_TRUE(check_volume_convexity(m, super).convex) << m.name;
    }
    EXPECT_EQ(check_volume_convexity(builtin_profile(Family::Euclidean, 3), crit).method, "integral");
}

TEST(Convexity, BoundedWarpingFails) {
    const auto m = custom_profile(
        "capped", 3, [](double r) { return r / (1.0 + r); }, [](double r) { return 1.0 / ((1.0 + r) * (1.0 + r)); },
        [](double r) { return -2.0 / std::pow(1.0 + r, 3.0); }, Completeness::Complete);
    const VolumeConvexity v = check_volume_convexity(m, ExponentPair(6, 8));
    EXPECT_FALSE(v.convex);
    ASSERT_TRUE(v.witness.has_value());
    EXPECT_GT(*v.witness, 0.0);
}

TEST(Convexity, SubcriticalIsRejected) {
    EXPECT_THROW(check_volume_convexity(builtin_profile(Family::Euclidean, 3), ExponentPair(2, 2)), Error);
}
