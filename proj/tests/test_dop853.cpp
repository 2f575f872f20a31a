#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lanemden/dop853.hpp"

using namespace lanemden;

namespace {

// y1' = y2, y2' = -y1 with y(0) = (0, 1): y = (sin r, cos r)
struct Oscillator {
    Vec<2> operator()(double, const Vec<2>& y) const { return {y[1], -y[0]}; }
};

double fixed_step_error(int steps) {
    Dop853<2> st(1e-12, 1e-12);
    Dop853Trial<2> t;
    Oscillator rhs;
    Vec<2> y{0.0, 1.0};
    const double R = 2.0, h = R / steps;
    double r = 0.0;
    for (int k = 0; k < steps; ++k) {
        st.attempt(rhs, r, y, rhs(r, y), h, t);
        y = t.y_new;
        r += h;
    }
    return std::hypot(y[0] - std::sin(R), y[1] - std::cos(R));
}

}  // namespace

TEST(Dop853, EighthOrderConvergence) {
    const double e1 = fixed_step_error(8), e2 = fixed_step_error(16);
    const double order = std::log2(e1 / e2);
    EXPECT_GT(order, 7.5);
    EXPECT_LT(order, 9.5);
}

TEST(Dop853, AdaptiveDriverMeetsTolerance) {
    Oscillator rhs;
    const Vec<2> y = dop853_integrate<2>(rhs, 0.0, Vec<2>{0.0, 1.0}, 20.0, 1e-11, 1e-13, [](const auto&) {});
    EXPECT_NEAR(y[0], std::sin(20.0), 1e-9);
    EXPECT_NEAR(y[1], std::cos(20.0), 1e-9);
}

TEST(Dop853, DenseOutputMatchesInsideSteps) {
    Oscillator rhs;
    double worst = 0.0;
    std::size_t segments = 0;
    dop853_integrate<2>(rhs, 0.0, Vec<2>{0.0, 1.0}, 10.0, 1e-10, 1e-12, [&](const DenseSegment<2>& s) {
        ++segments;
        for (double f : {0.1, 0.37, 0.5, 0.81}) {
            const double r = s.r0 + f * s.h;
            worst = std::max(worst, std::fabs(s(r)[0] - std::sin(r)));
            worst = std::max(worst, std::fabs(s.at(r, 1) - std::cos(r)));
        }
    });
    EXPECT_GT(segments, 3u);
    EXPECT_LT(worst, 1e-8);
}

TEST(Dop853, DenseOutputInterpolatesEndpoints) {
    Oscillator rhs;
    Dop853<2> st(1e-10, 1e-12);
    Dop853Trial<2> t;
    const Vec<2> y{0.3, -0.2};
    st.attempt(rhs, 1.0, y, rhs(1.0, y), 0.25, t);
    t.f_new = rhs(1.25, t.y_new);
    const DenseSegment<2> seg = st.dense(rhs, t);
    EXPECT_DOUBLE_EQ(seg(1.0)[0], y[0]);
    EXPECT_NEAR(seg(1.25)[1], t.y_new[1], 1e-15);
    EXPECT_DOUBLE_EQ(seg.r1(), 1.25);
}

TEST(Dop853, StepFactorIsBounded) {
    EXPECT_LE(Dop853<1>::next_factor(0.0, true), 6.0);
    EXPECT_GE(Dop853<1>::next_factor(1e9, false), 1.0 / 3.0);
    EXPECT_LT(Dop853<1>::next_factor(2.0, false), 1.0);
}
