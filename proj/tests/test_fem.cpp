#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lelab/fem.hpp"

using namespace lelab;

namespace {

constexpr double pi = std::numbers::pi;

Domain unit_square() { return Domain::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

// Torsion function of the unit square as a double sine series.
double square_torsion(double x, double y, int terms) {
    double s = 0.0;
    for (int m = 1; m <= terms; m += 2)
        for (int n = 1; n <= terms; n += 2)
            s += 16.0 / (pi * pi * pi * pi * m * n * (m * m + n * n)) * std::sin(m * pi * x) * std::sin(n * pi * y);
    return s;
}

std::vector<double> poisson(const Mesh& m, const std::function<double(Vec2)>& f, double tol = 1e-12) {
    const DofMap d = DofMap::interior(m);
    const CsrMatrix A = assemble_stiffness(m, d);
    const CsrMatrix M = assemble_mass(m, d);
    std::vector<double> fi(d.size());
    for (int i = 0; i < d.size(); ++i) fi[i] = f(m.vertices[d.vertex_of_dof[i]]);
    const auto x = solve_spd(A, M * fi, tol);
    return d.extend(x, m.num_vertices());
}

}  // namespace

TEST(Element, RightTriangleStiffness) {
    const Mat3 k = element_stiffness({0, 0}, {1, 0}, {0, 1});
    const double expect[3][3] = {{1, -0.5, -0.5}, {-0.5, 0.5, 0}, {-0.5, 0, 0.5}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(k[i][j], expect[i][j], 1e-15);
}

TEST(Assembly, PartitionOfUnity) {
    const Mesh m = mesh_domain(Domain::ellipse({0, 0}, 1.25, 0.8), 0.1);
    const DofMap all = DofMap::all(m);
    const CsrMatrix K = assemble_stiffness(m, all);
    const CsrMatrix M = assemble_mass(m, all);
    double total = 0;
    for (double v : M.val) total += v;
    EXPECT_NEAR(total, m.total_area(), 1e-12);
    const auto k1 = K * std::vector<double>(m.num_vertices(), 1.0);
    for (double v : k1) EXPECT_NEAR(v, 0.0, 1e-12);
    for (int i = 0; i < K.n; ++i)
        for (int k = K.row_ptr[i]; k < K.row_ptr[i + 1]; ++k) EXPECT_EQ(K.val[k], K.at(K.col[k], i));
}

TEST(SolveSpd, DiagonalSystem) {
    CsrMatrix D;
    D.n = 4;
    D.row_ptr = {0, 1, 2, 3, 4};
    D.col = {0, 1, 2, 3};
    D.val = {2, 4, 0.5, 8};
    const auto x = solve_spd(D, {1, 2, 3, 4}, 1e-14);
    EXPECT_NEAR(x[0], 0.5, 1e-15);
    EXPECT_NEAR(x[1], 0.5, 1e-15);
    EXPECT_NEAR(x[2], 6.0, 1e-14);
    EXPECT_NEAR(x[3], 0.5, 1e-15);
}

TEST(SolveSpd, SquareTorsionMaximum) {
    const double oracle = square_torsion(0.5, 0.5, 401);
    EXPECT_NEAR(oracle, 0.0736713, 1e-6);
    const Mesh m = triangulate(unit_square(), 0.1);
    const auto v = poisson(m, [](Vec2) { return 1.0; });
    const double vmax = *std::max_element(v.begin(), v.end());
    EXPECT_NEAR(vmax, oracle, 0.02 * oracle);
}

TEST(SolveSpd, ResidualContract) {
    const Mesh m = triangulate(unit_square(), 0.05);
    const DofMap d = DofMap::interior(m);
    const CsrMatrix A = assemble_stiffness(m, d);
    std::vector<double> b(d.size());
    for (int i = 0; i < d.size(); ++i) b[i] = std::sin(3.0 * i) + 0.1;
    SolveStats st;
    const auto x = solve_spd(A, b, 1e-12, &st);
    const auto Ax = A * x;
    double r = 0, bn = 0;
    for (int i = 0; i < d.size(); ++i) {
        r += (Ax[i] - b[i]) * (Ax[i] - b[i]);
        bn += b[i] * b[i];
    }
    EXPECT_LE(std::sqrt(r / bn), 1e-12);
    EXPECT_LE(st.relative_residual, 1e-12);
    // Galerkin energy identity
    double xb = 0;
    for (int i = 0; i < d.size(); ++i) xb += x[i] * b[i];
    EXPECT_NEAR(A.quadratic_form(x), xb, 1e-10 * std::abs(xb));
    EXPECT_EQ(solve_spd(A, b, 1e-12), x);
}

TEST(LqNorm, ConstantsAndMassForm) {
    const Mesh m = mesh_domain(Domain::disk({0, 0}, 1), 0.1);
    const DofMap all = DofMap::all(m);
    const CsrMatrix M = assemble_mass(m, all);
    const std::vector<double> c(m.num_vertices(), 1.7);
    EXPECT_NEAR(lq_integral(m, c, 2.0), 1.7 * 1.7 * m.total_area(), 1e-12);
    EXPECT_NEAR(M.quadratic_form(c), 1.7 * 1.7 * m.total_area(), 1e-12);
    std::vector<double> u(m.num_vertices());
    for (int v = 0; v < m.num_vertices(); ++v) u[v] = std::cos(m.vertices[v].x) * (1 + m.vertices[v].y);
    EXPECT_NEAR(lq_integral(m, u, 2.0), M.quadratic_form(u), 1e-12);
    FemField f{std::make_shared<Mesh>(m), u};
    EXPECT_NEAR(lq_norm(f, 2.0), std::sqrt(M.quadratic_form(u)), 1e-12);
}

TEST(LqNorm, DiskTorsionL1) {
    const Mesh m = mesh_domain(Domain::disk({0, 0}, 1), 0.05);
    const auto v = poisson(m, [](Vec2) { return 1.0; });
    // v = (1 - r^2) / 4, so c = 1/4 and the integral is c pi / 2
    EXPECT_NEAR(lq_integral(m, v, 1.0), 0.25 * pi / 2, 0.01 * 0.25 * pi / 2);
}

TEST(LqLoad, PairingMatchesIntegral) {
    const Mesh m = mesh_domain(Domain::disk({0, 0}, 1), 0.1);
    const DofMap d = DofMap::interior(m);
    std::vector<double> u(m.num_vertices(), 0.0);
    for (int v = 0; v < m.num_vertices(); ++v)
        if (!m.on_boundary[v]) u[v] = 1.0 - norm2(m.vertices[v]) + 0.1 * m.vertices[v].x;
    for (double q : {1.0, 1.25, 1.5, 2.0}) {
        const auto b = lq_load(m, d, u, q);
        double s = 0;
        for (int i = 0; i < d.size(); ++i) s += b[i] * u[d.vertex_of_dof[i]];
        EXPECT_NEAR(s, lq_integral(m, u, q), 1e-12) << q;
    }
}

TEST(Convergence, PoissonOrderOnSquare) {
    auto exact = [](Vec2 p) { return std::sin(pi * p.x) * std::sin(pi * p.y); };
    Mesh m = triangulate(unit_square(), 0.1);
    std::vector<double> err;
    for (int level = 0; level < 3; ++level) {
        const auto u = poisson(m, [&](Vec2 p) { return 2 * pi * pi * exact(p); });
        std::vector<double> e(m.num_vertices());
        for (int v = 0; v < m.num_vertices(); ++v) e[v] = u[v] - exact(m.vertices[v]);
        err.push_back(std::sqrt(lq_integral(m, e, 2.0)));
        m = refine(m);
    }
    EXPECT_GE(std::log2(err[0] / err[1]), 1.8);
    EXPECT_GE(std::log2(err[1] / err[2]), 1.8);
}

TEST(HarmonicExtension, ReproducesLinear) {
    const Mesh m = mesh_domain(Domain::ellipse({0, 0}, 1.25, 0.8), 0.1);
    std::vector<double> g(m.num_vertices(), 0.0);
    for (int v = 0; v < m.num_vertices(); ++v)
        if (m.on_boundary[v]) g[v] = 2 * m.vertices[v].x - m.vertices[v].y + 0.5;
    const auto u = harmonic_extension(m, g);
    for (int v = 0; v < m.num_vertices(); ++v) EXPECT_NEAR(u[v], 2 * m.vertices[v].x - m.vertices[v].y + 0.5, 1e-9);
}

TEST(PointLocator, LinearInterpolation) {
    auto mesh = std::make_shared<Mesh>(triangulate(unit_square(), 0.1));
    std::vector<double> u(mesh->num_vertices());
    for (int v = 0; v < mesh->num_vertices(); ++v) u[v] = 3 * mesh->vertices[v].x + mesh->vertices[v].y;
    const PointLocator loc(mesh);
    for (double x : {0.0, 0.13, 0.5, 0.999, 1.0})
        for (double y : {0.0, 0.71, 1.0}) EXPECT_NEAR(loc.evaluate(u, {x, y}), 3 * x + y, 1e-12);
    EXPECT_TRUE(std::isnan(loc.evaluate(u, {1.5, 0.5})));
}

TEST(OffsetMesh, DiskMovesRadially) {
    const Domain disk = Domain::disk({0, 0}, 1);
    const Mesh m = mesh_domain(disk, 0.1);
    const Mesh o = offset_mesh(m, disk, 0.05);
    EXPECT_EQ(validate(o), "");
    for (int v = 0; v < m.num_vertices(); ++v) {
        if (!m.on_boundary[v]) continue;
        EXPECT_NEAR(norm(o.vertices[v]), norm(m.vertices[v]) + 0.05, 1e-12);
    }
}
