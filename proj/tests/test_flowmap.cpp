#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lelab/flowmap.hpp"

using namespace lelab;

namespace {

constexpr double pi = std::numbers::pi;

Domain unit_disk() { return Domain::disk({0, 0}, 1); }
Domain unit_square() { return Domain::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }
Domain l_shape() { return Domain::polygon({{-1, -1}, {1, -1}, {1, 0}, {0, 0}, {0, 1}, {-1, 1}}); }

// composite Simpson on [a, b]
template <class F>
double simpson(F f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
}

// mean of the exact distance gradient over directions around the corner of a wedge with
// interior angle theta spanned by the rays at angles 0 and theta
Vec2 corner_average(double theta) {
    auto grad = [theta](double a) -> Vec2 {
        const Vec2 n0{0, -1};                                    // outward normal of the ray at angle 0
        const Vec2 n1{-std::sin(theta), std::cos(theta)};        // outward normal of the ray at angle theta
        if (a >= 0 && a <= theta) return a < theta / 2 ? n0 : n1;  // inside: nearest side
        if (a > theta && a < theta + pi / 2) return n1;          // normal zone of side 1
        if (a < 0 && a > -pi / 2) return n0;                     // normal zone of side 0
        return {std::cos(a), std::sin(a)};                       // the corner is nearest
    };
    Vec2 s{0, 0};
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
        double a = -pi + 2 * pi * (k + 0.5) / n;
        if (a < -pi / 2 && a + 2 * pi < theta + pi / 2) a += 2 * pi;
        s = s + grad(a) / n;
    }
    return s;
}

}  // namespace

TEST(Profiles, MollifierAndCutoff) {
    EXPECT_EQ(bump(1.0), 0.0);
    EXPECT_EQ(bump(1.5), 0.0);
    for (double r = 0; r < 1; r += 0.01) EXPECT_GE(bump(r), bump(r + 0.01));
    EXPECT_EQ(cutoff(0.0), 1.0);
    EXPECT_EQ(cutoff(0.5), 1.0);
    EXPECT_EQ(cutoff(-0.5), 1.0);
    EXPECT_EQ(cutoff(1.0), 0.0);
    EXPECT_EQ(cutoff(-1.2), 0.0);
    for (double s = 0.5; s < 1; s += 0.01) {
        EXPECT_GE(cutoff(s), cutoff(s + 0.01));
        EXPECT_GE(cutoff(s), 0.0);
        EXPECT_LE(cutoff(s), 1.0);
    }
    // derivative against a difference quotient
    for (double r : {0.1, 0.4, 0.8}) EXPECT_NEAR(bump_derivative(r), (bump(r + 1e-6) - bump(r - 1e-6)) / 2e-6, 1e-7);
}

TEST(FlowField, Normalization) {
    const FlowField ff(unit_disk(), 0.05, 0.2);
    EXPECT_LE(ff.normalization_error(), 1e-8);
    const double I = simpson([&](double r) { return ff.phi(r) * r; }, 0.0, 1.0, 20000);
    EXPECT_NEAR(2 * pi * I, 1.0, 1e-8);
    EXPECT_NEAR(ff.t_max(), 0.05 / (pi * ff.phi_derivative_max()), 1e-15);
}

TEST(FlowField, BulkAndFarFieldVanish) {
    const FlowField ff(unit_disk(), 0.05, 0.2);
    EXPECT_EQ(norm(ff.X({0, 0})), 0.0);
    EXPECT_EQ(norm(ff.X({0.5, 0.1})), 0.0);  // delta = -0.49 < -eta0 - eps0
    EXPECT_EQ(norm(ff.X({3, 0})), 0.0);
}

TEST(FlowField, DiskBoundaryPointsOutward) {
    const FlowField ff(unit_disk(), 0.05, 0.2);
    for (double a : {0.0, 0.3, 2.0, 4.1}) {
        const Vec2 nu{std::cos(a), std::sin(a)};
        EXPECT_GE(dot(ff.X(nu), nu), 0.99);
    }
}

TEST(FlowField, UnitBoundOnGrids) {
    for (const Domain& d : {unit_disk(), unit_square(), l_shape()}) {
        const auto r = check_field_bound(FlowField(d, 0.05, 0.2), 48);
        EXPECT_EQ(r.violations, 0) << to_spec(d);
        EXPECT_LE(r.max_violation, 0.0);
    }
}

TEST(Flow, IdentityCasesAndGuard) {
    const FlowField ff(unit_square(), 0.05, 0.1);
    const double t = 0.5 * ff.t_max();
    const Vec2 p{0.37, 0.0};
    EXPECT_EQ(ff.flow(0.0, p).x, p.x);
    EXPECT_EQ(ff.flow(0.0, p).y, p.y);
    const Vec2 deep{0.5, 0.5};
    EXPECT_EQ(ff.flow(t, deep).x, 0.5);
    EXPECT_THROW(ff.flow(ff.t_max(), p), FlowError);
    EXPECT_THROW(ff.flow(-2 * ff.t_max(), p), FlowError);
}

TEST(Flow, DiskBoundaryFirstOrder) {
    const FlowField ff(unit_disk(), 0.05, 0.2);
    const double t = 0.5 * ff.t_max();
    for (double a : {0.0, 1.0, 3.0}) {
        const Vec2 x{std::cos(a), std::sin(a)};
        const double r = norm(ff.flow(t, x));
        EXPECT_GT(r, 1.0);
        EXPECT_LE(r, 1.0 + t);
        EXPECT_NEAR(r, 1.0 + t * dot(ff.X(x), x), 1e-12);
    }
}

TEST(Flow, JacobianPositiveBelowHalfTmax) {
    const FlowField ff(unit_square(), 0.05, 0.2);
    const auto r = check_jacobian(ff, 0.5 * ff.t_max(), 24);
    EXPECT_EQ(r.violations, 0);
}

TEST(Inclusion, Inner) {
    EXPECT_EQ(check_inner_inclusion(FlowField(unit_disk(), 0.1, 0.2), 0.0).violations, 0);
    const auto r = check_inner_inclusion(FlowField(unit_disk(), 0.1, 0.2), 0.1);
    EXPECT_EQ(r.violations, 0);
    EXPECT_GT(r.samples, 1000);
    EXPECT_EQ(check_inner_inclusion(FlowField(unit_square(), 0.08, 0.1), 0.1).violations, 0);
}

TEST(Inclusion, OuterOnDisk) {
    const auto r = check_outer_inclusion(FlowField(unit_disk(), 0.02, 0.2), 0.05, 0.1, 128);
    EXPECT_EQ(r.violations, 0);
    EXPECT_EQ(check_outer_inclusion(FlowField(unit_disk(), 0.02, 0.2), 0.0, 0.1, 64).violations, 0);
    EXPECT_THROW(check_outer_inclusion(FlowField(unit_square(), 0.02, 0.2), 0.05, 0.1), FlowError);
    const auto sw = outer_inclusion_sweep(unit_disk(), 0.2, 0.05, 0.1, {0.1, 0.04, 0.02});
    ASSERT_EQ(sw.runs.size(), 3u);
    EXPECT_TRUE(sw.runs.back().pass());
    EXPECT_GT(sw.minimal_passing_eps0, 0.0);
    EXPECT_NE(sw.runs[0].to_json().find("\"max_X_minus_nu\": "), std::string::npos);
}

TEST(NormalConvergence, DiskAndEllipse) {
    for (const Domain& d : {unit_disk(), Domain::ellipse({0, 0}, 2, 1)}) {
        const auto nc = normal_convergence(d, 0.2, {0.2, 0.1, 0.05, 0.02}, 64);
        EXPECT_TRUE(nc.monotone) << to_spec(d);
        EXPECT_TRUE(nc.final_small) << to_spec(d);
    }
}

TEST(Corner, SquareCornerMatchesAngularAverage) {
    const double oracle = norm(corner_average(pi / 2));
    // closed form of the same average
    EXPECT_NEAR(oracle, ((pi / 2 + pi) * std::sin(pi / 4) + 2 * std::cos(pi / 4)) / (2 * pi), 1e-6);
    const auto c = corner_displacement(unit_square(), 0, 0.01, 0.04);
    EXPECT_NEAR(c.theta, pi / 2, 1e-12);
    EXPECT_NEAR(c.factor, oracle, 0.005 * oracle);
    EXPECT_LT(c.factor, 1.0);  // the corner moves less than t: outer inclusion fails there
    EXPECT_NEAR(c.predicted, std::sqrt(2.0) / 2, 1e-15);
}

TEST(Corner, ObtuseCornerOfHexagon) {
    std::vector<Vec2> v;
    for (int k = 0; k < 6; ++k) v.push_back({std::cos(k * pi / 3), std::sin(k * pi / 3)});
    const auto c = corner_displacement(Domain::polygon(v), 0, 0.01, 0.04);
    EXPECT_NEAR(c.theta, 2 * pi / 3, 1e-12);
    EXPECT_NEAR(c.factor, norm(corner_average(2 * pi / 3)), 0.005);
}

TEST(InteriorNormal, DiskEstimate) {
    std::vector<double> excess;
    for (double e : {0.1, 0.05, 0.02}) {
        const FlowField ff(unit_disk(), e, 0.5);
        const double Q = interior_normal_estimate(ff, {1, 0}, {1, 0});
        // integration by parts gives -X.nu when the cutoff is 1 on the ball
        EXPECT_NEAR(Q, -dot(ff.X({1, 0}), Vec2{1, 0}), 1e-6);
        EXPECT_GE(Q, -1.0 - 1e-9);
        excess.push_back((Q + 1) / e);
    }
    // fitted O(eps0) constant stays bounded
    for (double c : excess) EXPECT_LT(c, 0.1);
}
