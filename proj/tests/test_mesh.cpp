#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "lelab/mesh.hpp"

using namespace lelab;

namespace {

constexpr double pi = std::numbers::pi;

Domain unit_square() { return Domain::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }
Domain lshape() { return Domain::polygon({{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}}); }

double polygon_area(const Domain& d) { return d.get<Polygon>()->signed_area(); }

}  // namespace

TEST(Polygonize, DiskPerimeterBounds) {
    const Domain p = polygonize(Domain::disk({0, 0}, 1), 1e-3);
    const double per = perimeter(p);
    EXPECT_GE(per, 2 * pi - 0.01);
    EXPECT_LE(per, 2 * pi);
    for (const auto& v : p.get<Polygon>()->vertices) EXPECT_NEAR(norm(v), 1.0, 1e-14);
    // Hausdorff distance of an inscribed polygon is its largest sagitta.
    const auto& v = p.get<Polygon>()->vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 m = (v[i] + v[(i + 1) % v.size()]) * 0.5;
        EXPECT_LE(1.0 - norm(m), 1e-3);
    }
}

TEST(Polygonize, EllipseSagitta) {
    const Ellipse e{{0, 0}, 1.25, 0.8};
    const Domain p = polygonize(Domain::ellipse(e.center, e.a, e.b), 1e-4);
    const auto& v = p.get<Polygon>()->vertices;
    EXPECT_EQ(v.size() % 4, 0u);
    const Domain dom = Domain::ellipse(e.center, e.a, e.b);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 m = (v[i] + v[(i + 1) % v.size()]) * 0.5;
        EXPECT_LE(-signed_distance(dom, m), 1e-4);
    }
}

TEST(Polygonize, PolygonUnchangedAndEmptyLevelSet) {
    const Domain sq = unit_square();
    EXPECT_EQ(to_spec(polygonize(sq, 0.1)), to_spec(sq));
    LevelSetGrid g;
    g.origin = {0, 0};
    g.spacing = 0.1;
    g.nx = g.ny = 5;
    g.values.assign(25, 1.0);
    EXPECT_THROW(polygonize(Domain::level_set(g), 0.01), MeshError);
}

TEST(Polygonize, LevelSetDiskContour) {
    LevelSetGrid g;
    g.spacing = 0.01;
    g.origin = {-1.2, -1.2};
    g.nx = g.ny = 241;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) g.values.push_back(norm(g.node(i, j)) - 1.0);
    const Domain p = polygonize(Domain::level_set(g), 0.01);
    ASSERT_NE(p.get<Polygon>(), nullptr);
    EXPECT_NEAR(polygon_area(p), pi, 4 * g.spacing * g.spacing * 2 * pi);
    for (const auto& v : p.get<Polygon>()->vertices) EXPECT_NEAR(norm(v), 1.0, g.spacing * g.spacing);
}

TEST(Triangulate, SquareCoarse) {
    const Mesh m = triangulate(unit_square(), 0.5);
    EXPECT_GE(m.num_triangles(), 8);
    EXPECT_NEAR(m.total_area(), 1.0, 1e-12);
    EXPECT_EQ(validate(m), "");
    EXPECT_LE(m.h, 0.5 + 1e-12);
}

TEST(Triangulate, DiskAreaMatchesInscribedPolygon) {
    const Domain poly = polygonize(Domain::disk({0, 0}, 1), 1e-3);
    const int n = static_cast<int>(poly.get<Polygon>()->vertices.size());
    const Mesh m = triangulate(poly, 0.05);
    const double inscribed = 0.5 * n * std::sin(2 * pi / n);
    EXPECT_NEAR(m.total_area(), inscribed, 1e-10 * pi);
    // Area deficit of an inscribed polygon with sagitta s is at most s times the perimeter.
    EXPECT_LE(pi - m.total_area(), 1e-3 * 2 * pi);
    EXPECT_EQ(validate(m), "");
}

TEST(Triangulate, QualityOnConvexInputs) {
    std::vector<Domain> doms = {unit_square(), Domain::polygon({{0, 0}, {2, 0}, {2, 1}, {0, 1}}),
                                polygonize(Domain::disk({0, 0}, 1), 1e-3),
                                polygonize(Domain::ellipse({0, 0}, 1.25, 0.8), 1e-4)};
    for (const auto& d : doms) {
        for (double h : {0.1, 0.05}) {
            const Mesh m = triangulate(d, h);
            EXPECT_EQ(validate(m), "");
            EXPECT_GE(m.min_angle_deg(), 20.0);
            EXPECT_LE(m.h, h * (1 + 1e-9));
            EXPECT_NEAR(m.total_area(), polygon_area(d), 1e-10 * polygon_area(d));
        }
    }
}

TEST(Triangulate, LShapeAndBoundaryOnPolygon) {
    const Domain L = lshape();
    const Mesh m = triangulate(L, 0.05);
    EXPECT_EQ(validate(m), "");
    EXPECT_NEAR(m.total_area(), 0.75, 1e-12);
    EXPECT_GE(m.min_angle_deg(), 20.0);
    for (int v = 0; v < m.num_vertices(); ++v) {
        if (m.on_boundary[v]) EXPECT_NEAR(signed_distance(L, m.vertices[v]), 0.0, 1e-15);
        else EXPECT_LT(signed_distance(L, m.vertices[v]), 0.0);
    }
    double per = 0;
    for (const auto& e : m.boundary_edges) {
        per += e.length;
        // outward: the midpoint pushed along the normal leaves the domain
        const Vec2 mid = (m.vertices[e.a] + m.vertices[e.b]) * 0.5;
        EXPECT_GT(signed_distance(L, mid + e.normal * 1e-6), 0.0);
    }
    EXPECT_NEAR(per, 4.0, 1e-12);
}

TEST(Triangulate, RejectsNarrowCorner) {
    const double a = 0.5 * pi / 180.0;
    const Domain sliver = Domain::polygon({{0, 0}, {1, 0}, {std::cos(a), std::sin(a)}});
    EXPECT_THROW(triangulate(sliver, 0.1), MeshError);
}

TEST(Refine, CountsAreaAndNesting) {
    const Mesh m = triangulate(lshape(), 0.1);
    const Mesh r = refine(m);
    EXPECT_EQ(r.num_triangles(), 4 * m.num_triangles());
    EXPECT_EQ(r.num_vertices(), m.num_vertices() + static_cast<int>(mesh_edges(m).size()));
    EXPECT_NEAR(r.total_area(), m.total_area(), 1e-12);
    EXPECT_EQ(validate(r), "");
    EXPECT_NEAR(r.h, m.h / 2, 1e-15);
    EXPECT_EQ(r.parent_vertices, m.num_vertices());
    for (int v = 0; v < m.num_vertices(); ++v) EXPECT_EQ(r.vertices[v], m.vertices[v]);
    for (std::size_t k = 0; k < r.parent_edges.size(); ++k) {
        const auto e = r.parent_edges[k];
        EXPECT_EQ(r.vertices[m.num_vertices() + k], (m.vertices[e[0]] + m.vertices[e[1]]) * 0.5);
    }
    EXPECT_EQ(r.boundary_edges.size(), 2 * m.boundary_edges.size());
}

TEST(MapMesh, ScalingAndInversion) {
    const Mesh m = triangulate(unit_square(), 0.2);
    const Mesh s = map_mesh(m, [](Vec2 p) { return p * 2.0 + Vec2(1, 0); });
    EXPECT_NEAR(s.total_area(), 4.0, 1e-12);
    EXPECT_EQ(validate(s), "");
    EXPECT_THROW(map_mesh(m, [](Vec2 p) { return Vec2(-p.x, p.y); }), MeshError);
}

TEST(Components, UnionMesh) {
    const Mesh m = mesh_domain(parse_domain("union { disk -1.5 0 1 ; disk 1.5 0 1 }"), 0.1);
    EXPECT_EQ(connected_components(m), 2);
    EXPECT_EQ(validate(m), "");
    int n = 0;
    const auto comp = triangle_components(m, &n);
    const Mesh a = extract_component(m, comp, 0);
    const Mesh b = extract_component(m, comp, 1);
    EXPECT_EQ(validate(a), "");
    EXPECT_NEAR(a.total_area() + b.total_area(), m.total_area(), 1e-12);
    EXPECT_NEAR(a.total_area(), b.total_area(), 1e-12);
}

TEST(Triangulate, Deterministic) {
    const Mesh a = mesh_domain(Domain::ellipse({0, 0}, 1.25, 0.8), 0.05);
    const Mesh b = mesh_domain(Domain::ellipse({0, 0}, 1.25, 0.8), 0.05);
    std::ostringstream sa, sb;
    write_off(a, sa);
    write_off(b, sb);
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_EQ(sa.str().substr(0, 4), "OFF\n");
}

TEST(Triangulate, OffsetPolygonAndLevelSet) {
    const Mesh a = mesh_domain(minkowski_ball_sum(unit_square(), 0.1), 0.05);
    EXPECT_EQ(validate(a), "");
    EXPECT_NEAR(a.total_area(), 1.4 + pi * 0.01, 1e-4);
    const Domain ls = minkowski_ball_sum(lshape(), 0.05);
    const Mesh b = mesh_domain(ls, 0.05);
    EXPECT_EQ(validate(b), "");
    EXPECT_EQ(connected_components(b), 1);
}
