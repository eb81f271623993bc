#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lelab/lane_emden.hpp"

using namespace lelab;

namespace {

constexpr double pi = std::numbers::pi;

double bessel_j0(double x) {
    // power series; fine for x < 4
    double term = 1.0, s = 1.0;
    for (int k = 1; k < 60; ++k) {
        term *= -(x * x / 4.0) / (double(k) * k);
        s += term;
    }
    return s;
}

double j01() {
    double a = 2.0, b = 3.0;
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (a + b);
        (bessel_j0(a) * bessel_j0(m) <= 0 ? b : a) = m;
    }
    return 0.5 * (a + b);
}

// Radial shooting for the unit-disk value: w'' + w'/r = -w^{q-1}, w(0) = 1, first zero R,
// then lambda = R^2 ||w(R .)||_q^{-(2-q)}.
double radial_disk_lambda(double q) {
    auto rhs = [q](double r, double w, double dw) {
        const double f = std::pow(std::max(w, 0.0), q - 1.0);
        return std::array<double, 2>{dw, -f - dw / r};
    };
    double r = 1e-4, w = 1.0 - r * r / 4.0, dw = -r / 2.0;
    double integral = 0.5 * r * r;  // int w^q s ds near the origin
    const double dr = 1e-5;
    while (true) {
        const auto k1 = rhs(r, w, dw);
        const auto k2 = rhs(r + dr / 2, w + dr / 2 * k1[0], dw + dr / 2 * k1[1]);
        const auto k3 = rhs(r + dr / 2, w + dr / 2 * k2[0], dw + dr / 2 * k2[1]);
        const auto k4 = rhs(r + dr, w + dr * k3[0], dw + dr * k3[1]);
        const double wn = w + dr / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
        const double dwn = dw + dr / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
        if (wn <= 0) {
            const double R = r + dr * w / (w - wn);
            integral += 0.5 * (std::pow(w, q) * r) * (R - r);
            const double norm_q = std::pow(2 * pi / (R * R) * integral, 1.0 / q);
            return R * R * std::pow(norm_q, -(2.0 - q));
        }
        integral += 0.5 * dr * (std::pow(w, q) * r + std::pow(wn, q) * (r + dr));
        w = wn;
        dw = dwn;
        r += dr;
    }
}

std::shared_ptr<const Mesh> disk_mesh(double h, double radius = 1.0) {
    return std::make_shared<const Mesh>(mesh_domain(Domain::disk({0, 0}, radius), h));
}

}  // namespace

TEST(Alpha, KnownValues) {
    EXPECT_DOUBLE_EQ(alpha(1.0), 0.25);
    EXPECT_DOUBLE_EQ(alpha(2.0), 0.5);
    EXPECT_DOUBLE_EQ(alpha(1.5), 3.0 / 8.0);
    EXPECT_DOUBLE_EQ(alpha(1.0, 3), 0.2);
    EXPECT_DOUBLE_EQ(linfty_exponent(1.3), 0.5);
    EXPECT_THROW(alpha(2.5), std::invalid_argument);
    EXPECT_THROW(alpha(0.5), std::invalid_argument);
}

TEST(RadialOracle, MatchesClosedForms) {
    EXPECT_NEAR(radial_disk_lambda(1.0), 8 / pi, 1e-6);
    const double j = j01();
    EXPECT_NEAR(j, 2.404825557695773, 1e-12);
    EXPECT_NEAR(radial_disk_lambda(2.0), j * j, 1e-6);
}

TEST(GroundState, DiskTorsion) {
    const auto gs = solve_ground_state(disk_mesh(0.05), 1.0);
    EXPECT_NEAR(gs.lambda, 8 / pi, 0.01 * 8 / pi);
    EXPECT_EQ(gs.iterations, 1);
    EXPECT_LE(gs.residuals.el_residual, 1e-8);
    EXPECT_LE(gs.residuals.normalization_error, 1e-12);
    EXPECT_LE(gs.residuals.rayleigh_gap, 1e-12);
    // discrete energy bounds the continuum value from above
    EXPECT_GT(gs.lambda, 8 / pi);
}

TEST(GroundState, DiskDirichletEigenvalue) {
    const double j = j01();
    const auto gs = solve_ground_state(disk_mesh(0.05), 2.0);
    EXPECT_NEAR(gs.lambda, j * j, 0.01 * j * j);
    EXPECT_GT(gs.lambda, j * j);
    EXPECT_LE(gs.residuals.el_residual, 1e-8);
    EXPECT_GE(gs.min_interior, 0.0);
}

TEST(GroundState, SquareEigenvalue) {
    auto m = std::make_shared<const Mesh>(triangulate(Domain::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), 0.05));
    const auto gs = solve_ground_state(m, 2.0);
    EXPECT_NEAR(gs.lambda, 2 * pi * pi, 0.01 * 2 * pi * pi);
}

TEST(GroundState, IntermediateExponentAgainstRadialOracle) {
    for (double q : {1.25, 1.5, 1.75}) {
        const double oracle = radial_disk_lambda(q);
        const auto gs = solve_ground_state(disk_mesh(0.05), q);
        EXPECT_NEAR(gs.lambda, oracle, 0.01 * oracle) << q;
        EXPECT_LE(gs.residuals.el_residual, 1e-8) << q;
        EXPECT_LE(gs.residuals.normalization_error, 1e-10) << q;
        for (size_t k = 1; k < gs.rayleigh_history.size(); ++k)
            EXPECT_LE(gs.rayleigh_history[k], gs.rayleigh_history[k - 1] * (1 + 1e-12)) << q;
    }
}

TEST(GroundState, ScalingLawIsExactOnMappedMesh) {
    const auto m = disk_mesh(0.1);
    const auto m2 = std::make_shared<const Mesh>(map_mesh(*m, [](Vec2 p) { return 2.0 * p; }));
    const double q = 1.5;
    const double l1 = solve_ground_state(m, q).lambda;
    const double l2 = solve_ground_state(m2, q).lambda;
    EXPECT_NEAR(l2 / l1, std::pow(2.0, -8.0 / 3.0), 1e-8);
}

TEST(GroundState, MonotoneUnderRefinement) {
    for (double q : {1.0, 1.5, 2.0}) {
        const auto seq = solve_nested(mesh_domain(Domain::ellipse({0, 0}, 1.25, 0.8), 0.2), 3, q);
        EXPECT_GT(seq[0].lambda, seq[1].lambda) << q;
        EXPECT_GT(seq[1].lambda, seq[2].lambda) << q;
    }
}

TEST(GroundState, RejectsDisconnectedMesh) {
    const Domain two = Domain::union_of({Domain::disk({0, 0}, 1), Domain::disk({3, 0}, 1)});
    auto m = std::make_shared<const Mesh>(mesh_domain(two, 0.1));
    EXPECT_THROW(solve_ground_state(m, 1.5), SolverError);
    SolveOptions o;
    o.allow_disconnected = true;
    EXPECT_NO_THROW(solve_ground_state(m, 1.0, o));
}

TEST(Union, TwoEqualDisksTorsion) {
    const auto gs = solve_ground_state(disk_mesh(0.1), 1.0);
    const auto r = solve_union(std::vector<GroundState>{gs, gs}, 1.0);
    EXPECT_NEAR(r.lambda, gs.lambda / 2, 1e-14);
    EXPECT_NEAR(solve_union(std::vector<double>{8 / pi, 8 / pi}, 1.0).lambda, 4 / pi, 1e-14);
    // the combined field is q-normalized
    double s = 0;
    for (double w : r.weights) s += std::pow(w, 1.0);
    EXPECT_NEAR(s, 1.0, 1e-14);
}

TEST(Union, WeightsNormalizeForAnyExponent) {
    const std::vector<double> lam{3.0, 5.0, 11.0};
    for (double q : {1.0, 1.3, 1.9, 1.999}) {
        const auto r = solve_union(lam, q);
        double s = 0;
        for (double w : r.weights) s += std::pow(w, q);
        EXPECT_NEAR(s, 1.0, 1e-12) << q;
        if (q > 1.9) {
            // (3/5)^{q/(2-q)} underflows; the value sits on the smallest component to rounding
            EXPECT_NEAR(r.lambda, 3.0, 1e-14) << q;
            continue;
        }
        EXPECT_LT(r.lambda, 3.0);
        double t = 0;
        for (double l : lam) t += std::pow(l, -q / (2 - q));
        EXPECT_NEAR(r.lambda, std::pow(t, -(2 - q) / q), 1e-12 * r.lambda) << q;
    }
    const auto r2 = solve_union(lam, 2.0);
    EXPECT_EQ(r2.lambda, 3.0);
    EXPECT_FALSE(r2.tie);
    EXPECT_TRUE(solve_union(std::vector<double>{4.0, 4.0}, 2.0).tie);
}

TEST(Extrapolation, RecoversLimitOfPowerLaw) {
    auto f = [](double h) { return 5.0 + 0.7 * std::pow(h, 1.7); };
    const auto e = extrapolate_lambda(f(0.1), f(0.05), f(0.025));
    EXPECT_NEAR(e.value, 5.0, 1e-12);
    EXPECT_NEAR(e.order, 1.7, 1e-10);
    EXPECT_THROW(extrapolate_lambda(1.0, 0.9, 0.95), SolverError);
    bool ok = true;
    EXPECT_EQ(extrapolate_or_last({1.0, 0.9, 0.95}, &ok).value, 0.95);
    EXPECT_FALSE(ok);
}

TEST(Extrapolation, DiskEigenvalueConverges) {
    const double j = j01();
    const auto seq = solve_nested(mesh_domain(Domain::disk({0, 0}, 1), 0.1, 1e-4), 3, 2.0);
    const auto e = extrapolate_lambda(seq[0].lambda, seq[1].lambda, seq[2].lambda);
    EXPECT_NEAR(e.value, j * j, 2e-3 * j * j);
}

TEST(Linfty, DiskRatios) {
    // q = 1: max = 1/(4 * pi/8) with lambda = 8/pi, ratio about 0.399
    const auto r1 = linfty_bound_check(solve_ground_state(disk_mesh(0.05), 1.0));
    EXPECT_NEAR(r1.ratio, (2 / pi) / std::sqrt(8 / pi), 0.01);
    EXPECT_TRUE(r1.pass);
    const auto r2 = linfty_bound_check(solve_ground_state(disk_mesh(0.05), 2.0));
    EXPECT_TRUE(r2.pass);
}

TEST(GroundState, JsonExport) {
    const auto gs = solve_ground_state(disk_mesh(0.2), 1.5);
    const std::string js = gs.to_json();
    EXPECT_NE(js.find("\"lambda\": "), std::string::npos);
    EXPECT_NE(js.find("\"residuals\": {"), std::string::npos);
    EXPECT_LT(js.find("\"q\""), js.find("\"lambda\""));
}
