#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "lelab/geometry.hpp"

namespace lelab {

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Directed boundary edge: the domain lies to the left of a -> b.
struct BoundaryEdge {
    int a = 0;
    int b = 0;
    Vec2 normal;
    double length = 0.0;
};

struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  // counterclockwise
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<char> on_boundary;  // per vertex
    double h = 0.0;                 // longest edge

    // Nesting record filled by refine(): vertices [0, parent_vertices) are the parent's,
    // vertex parent_vertices + k is the midpoint of parent_edges[k].
    int parent_vertices = 0;
    std::vector<std::array<int, 2>> parent_edges;
    int level = 0;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    double triangle_area(int t) const;
    double total_area() const;
    double min_angle_deg() const;
};

/// Polygonal approximation of the boundary with Hausdorff distance <= resolution.
/// Polygons come back unchanged, unions member-wise.
Domain polygonize(const Domain& dom, double resolution);

/// Conforming Delaunay triangulation of a simple polygon: boundary points every <= h,
/// hexagonal interior lattice, then circumcenter refinement until every triangle has
/// edges <= h and angles >= 20 degrees (corners with small input angles excepted).
Mesh triangulate(const Domain& polygon, double h);

/// polygonize + triangulate + snap_boundary; unions are meshed member by member and merged.
/// resolution <= 0 picks chords of length about h on the most curved part of the boundary.
Mesh mesh_domain(const Domain& dom, double h, double resolution = 0.0);

/// Uniform red refinement: every triangle split into four at edge midpoints.
Mesh refine(const Mesh& mesh);
/// Same, with the new boundary midpoints moved onto the boundary of dom (curved members only),
/// so nested sequences converge to the true domain.
Mesh refine(const Mesh& mesh, const Domain& dom);

/// Projects boundary vertices with index >= first_vertex onto the boundary of dom.
/// No-op unless dom has a disk or ellipse member.
Mesh snap_boundary(const Mesh& mesh, const Domain& dom, int first_vertex = 0);

/// Same topology, vertices moved by f. Throws if a triangle flips or degenerates.
Mesh map_mesh(const Mesh& mesh, const std::function<Vec2(Vec2)>& f);
Mesh with_vertices(const Mesh& mesh, std::vector<Vec2> vertices);

/// Disjoint concatenation.
Mesh merge(const std::vector<Mesh>& parts);

/// Connected components by shared vertices; returns a component id per triangle.
std::vector<int> triangle_components(const Mesh& mesh, int* count = nullptr);
int connected_components(const Mesh& mesh);

/// Submesh made of the triangles with comp[t] == id.
Mesh extract_component(const Mesh& mesh, const std::vector<int>& comp, int id);

/// Empty string when every structural invariant holds, otherwise a description of the first failure.
std::string validate(const Mesh& mesh);

/// Unique undirected edges (i < j), sorted.
std::vector<std::array<int, 2>> mesh_edges(const Mesh& mesh);

void write_off(const Mesh& mesh, std::ostream& os);

}  // namespace lelab
