#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lelab/vec2.hpp"

namespace lelab {

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by parse_domain; carries the offending token position.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t token) : std::runtime_error(what), token_(token) {}
    std::size_t token() const { return token_; }

private:
    std::size_t token_;
};

struct Disk {
    Vec2 center;
    double radius = 1.0;
};

/// Axis-aligned ellipse with semi-axes a (along x) and b (along y).
struct Ellipse {
    Vec2 center;
    double a = 1.0;
    double b = 1.0;
};

/// Simple polygon, vertices in counterclockwise order.
struct Polygon {
    std::vector<Vec2> vertices;

    bool is_convex() const;
    double signed_area() const;
};

/// Signed distance samples on a regular grid; value(i, j) lives at origin + (i, j) * spacing.
struct LevelSetGrid {
    Vec2 origin;
    double spacing = 0.0;
    int nx = 0;
    int ny = 0;
    std::vector<double> values;

    double value(int i, int j) const { return values[static_cast<std::size_t>(j) * nx + i]; }
    Vec2 node(int i, int j) const { return origin + Vec2(i * spacing, j * spacing); }
    /// Bilinear interpolation; outside the grid the clamped value plus the distance to the grid.
    double interpolate(Vec2 p) const;
};

class Domain;

struct DomainUnion {
    std::vector<Domain> members;
};

enum class DomainKind { disk, ellipse, convex_polygon, polygon, level_set, union_of };

/// Immutable planar region. Construct through the factory functions, which validate invariants.
class Domain {
public:
    using Shape = std::variant<Disk, Ellipse, Polygon, LevelSetGrid, DomainUnion>;

    static Domain disk(Vec2 center, double radius);
    static Domain ellipse(Vec2 center, double a, double b);
    /// Accepts either orientation; stores counterclockwise. Rejects self-intersections and zero area.
    static Domain polygon(std::vector<Vec2> vertices);
    static Domain level_set(LevelSetGrid grid);
    /// Members must be pairwise disjoint with positive distance.
    static Domain union_of(std::vector<Domain> members);

    DomainKind kind() const;
    const Shape& shape() const { return shape_; }
    const Box& bounding_box() const { return box_; }
    double diameter() const { return box_.diameter(); }

    template <class T>
    const T* get() const { return std::get_if<T>(&shape_); }

private:
    Domain(Shape s, Box b) : shape_(std::move(s)), box_(b) {}

    Shape shape_;
    Box box_;
};

std::string kind_name(DomainKind k);

/// dist(p, Omega) - dist(p, complement); negative inside.
double signed_distance(const Domain& dom, Vec2 p);

/// Outward unit normal at (or nearest to) p. Exact for disks, ellipses and polygons.
Vec2 outward_normal(const Domain& dom, Vec2 p);

/// Omega + tB. Disks stay disks, convex polygons get chord-approximated arcs, unions are summed
/// member-wise while they stay disjoint, everything else becomes a level-set grid.
/// grid_spacing <= 0 selects diam / 512.
Domain minkowski_ball_sum(const Domain& dom, double t, double grid_spacing = 0.0);

/// Exact (1 - s) a + s b for convex polygons (edge-vector merge by angle).
Domain minkowski_convex_sum(const Domain& a, const Domain& b, double s);

/// (1 - s) a + s b for the pairs where the sum is exactly representable:
/// disk/disk, convex polygon/convex polygon and convex polygon/disk.
Domain minkowski_interpolate(const Domain& a, const Domain& b, double s);

/// x -> s x + v.
Domain scale_translate(const Domain& dom, double s, Vec2 v);

/// Disk centered at the origin with the same area.
Domain symmetrized_ball(const Domain& dom);

double area(const Domain& dom);
double perimeter(const Domain& dom);

struct BoundarySample {
    Vec2 point;
    Vec2 normal;
    double weight = 0.0;
};

/// n points on the boundary with outward normals and arclength weights. Smooth curves are
/// sampled at n parameter nodes with half-chord weights, so the weights add up to the
/// perimeter of the inscribed polygon.
std::vector<BoundarySample> boundary_sample(const Domain& dom, int n);

/// Parses the domain grammar:
///   disk cx cy r | ellipse cx cy a b | polygon x1 y1 x2 y2 ... |
///   union { <domain> <domain> ... } | sum t <domain>
/// Members inside a union may be separated by ';' or ','.
Domain parse_domain(std::string_view text);

/// Inverse of parse_domain for all kinds except level sets.
std::string to_spec(const Domain& dom);

}  // namespace lelab
