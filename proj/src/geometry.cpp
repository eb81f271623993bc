#include "lelab/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace lelab {

namespace {

constexpr double kPi = std::numbers::pi;

Box box_union(const Box& a, const Box& b) {
    return {{std::min(a.lo.x, b.lo.x), std::min(a.lo.y, b.lo.y)},
            {std::max(a.hi.x, b.hi.x), std::max(a.hi.y, b.hi.y)}};
}

Box vertex_box(const std::vector<Vec2>& v) {
    Box b{v.front(), v.front()};
    for (const auto& p : v) {
        b.lo.x = std::min(b.lo.x, p.x);
        b.lo.y = std::min(b.lo.y, p.y);
        b.hi.x = std::max(b.hi.x, p.x);
        b.hi.y = std::max(b.hi.y, p.y);
    }
    return b;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = norm2(ab);
    double s = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return distance(p, a + ab * s);
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    const double d1 = orient(q1, q2, p1);
    const double d2 = orient(q1, q2, p2);
    const double d3 = orient(p1, p2, q1);
    const double d4 = orient(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    if (d1 == 0 && on_segment(q1, q2, p1)) return true;
    if (d2 == 0 && on_segment(q1, q2, p2)) return true;
    if (d3 == 0 && on_segment(p1, p2, q1)) return true;
    if (d4 == 0 && on_segment(p1, p2, q2)) return true;
    return false;
}

bool point_in_polygon(const std::vector<Vec2>& v, Vec2 p) {
    bool inside = false;
    const std::size_t n = v.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = v[i];
        const Vec2 b = v[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < xc) inside = !inside;
        }
    }
    return inside;
}

double polygon_signed_distance(const Polygon& poly, Vec2 p) {
    const auto& v = poly.vertices;
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        d = std::min(d, point_segment_distance(p, v[i], v[(i + 1) % v.size()]));
    }
    return point_in_polygon(v, p) ? -d : d;
}

// Closest point on the ellipse (x/e0)^2 + (y/e1)^2 = 1 for a query in the first quadrant,
// e0 >= e1 > 0. Bisection on the Lagrange multiplier (Eberly).
double ellipse_root(double r0, double z0, double z1, double g) {
    const double n0 = r0 * z0;
    double s0 = z1 - 1.0;
    double s1 = g < 0.0 ? 0.0 : std::hypot(n0, z1) - 1.0;
    double s = 0.0;
    for (int i = 0; i < 2000; ++i) {
        s = 0.5 * (s0 + s1);
        if (s == s0 || s == s1) break;
        const double ratio0 = n0 / (s + r0);
        const double ratio1 = z1 / (s + 1.0);
        g = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if (g > 0.0) {
            s0 = s;
        } else if (g < 0.0) {
            s1 = s;
        } else {
            break;
        }
    }
    return s;
}

Vec2 ellipse_closest_first_quadrant(double e0, double e1, double y0, double y1) {
    if (y1 > 0.0) {
        if (y0 > 0.0) {
            const double z0 = y0 / e0;
            const double z1 = y1 / e1;
            const double g = z0 * z0 + z1 * z1 - 1.0;
            if (g != 0.0) {
                const double r0 = (e0 / e1) * (e0 / e1);
                const double sbar = ellipse_root(r0, z0, z1, g);
                return {r0 * y0 / (sbar + r0), y1 / (sbar + 1.0)};
            }
            return {y0, y1};
        }
        return {0.0, e1};
    }
    const double numer0 = e0 * y0;
    const double denom0 = e0 * e0 - e1 * e1;
    if (numer0 < denom0) {
        const double xde0 = numer0 / denom0;
        return {e0 * xde0, e1 * std::sqrt(std::max(0.0, 1.0 - xde0 * xde0))};
    }
    return {e0, 0.0};
}

/// Closest point on the ellipse boundary to p (any quadrant, any axis order).
Vec2 ellipse_closest(const Ellipse& e, Vec2 p) {
    const Vec2 q = p - e.center;
    const bool swap = e.b > e.a;
    const double e0 = swap ? e.b : e.a;
    const double e1 = swap ? e.a : e.b;
    double y0 = std::abs(swap ? q.y : q.x);
    double y1 = std::abs(swap ? q.x : q.y);
    Vec2 c = ellipse_closest_first_quadrant(e0, e1, y0, y1);
    if (swap) std::swap(c.x, c.y);
    if (q.x < 0) c.x = -c.x;
    if (q.y < 0) c.y = -c.y;
    return c + e.center;
}

double ellipse_signed_distance(const Ellipse& e, Vec2 p) {
    const Vec2 q = p - e.center;
    const double level = (q.x / e.a) * (q.x / e.a) + (q.y / e.b) * (q.y / e.b);
    const double d = distance(p, ellipse_closest(e, p));
    return level < 1.0 ? -d : d;
}

Vec2 ellipse_normal_at(const Ellipse& e, Vec2 on_curve) {
    const Vec2 q = on_curve - e.center;
    return normalized({q.x / (e.a * e.a), q.y / (e.b * e.b)});
}

double ellipse_perimeter(const Ellipse& e) {
    // Trapezoid rule is spectrally accurate for the periodic integrand.
    constexpr int n = 4096;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * kPi * i / n;
        sum += std::hypot(e.a * std::sin(th), e.b * std::cos(th));
    }
    return sum * 2.0 * kPi / n;
}

Vec2 edge_normal(Vec2 a, Vec2 b) {
    const Vec2 d = normalized(b - a);
    return {d.y, -d.x};
}

std::vector<Vec2> remove_degenerate_vertices(std::vector<Vec2> v, double tol) {
    // Drops repeated vertices and vertices on a straight line between their neighbours.
    bool changed = true;
    while (changed && v.size() > 3) {
        changed = false;
        std::vector<Vec2> out;
        const std::size_t n = v.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 prev = out.empty() ? v[(i + n - 1) % n] : out.back();
            const Vec2 cur = v[i];
            const Vec2 next = v[(i + 1) % n];
            const double scale = std::max(norm(cur - prev), norm(next - cur));
            if (norm(cur - prev) <= tol || std::abs(orient(prev, cur, next)) <= tol * scale) {
                if (dot(cur - prev, next - cur) >= 0.0 || norm(cur - prev) <= tol) {
                    changed = true;
                    continue;
                }
            }
            out.push_back(cur);
        }
        if (out.size() >= 3) v = std::move(out);
        else break;
    }
    return v;
}

std::vector<Vec2> convex_ball_sum_vertices(const std::vector<Vec2>& v, double t) {
    // Offsets every edge by t and joins consecutive offsets with chords of the corner arc.
    // Arc vertices lie on the exact arc; the chord sagitta is at most 1e-4 t.
    const std::size_t n = v.size();
    const double max_step = 2.0 * std::acos(1.0 - 1e-4);
    std::vector<Vec2> out;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 prev = v[(i + n - 1) % n];
        const Vec2 cur = v[i];
        const Vec2 next = v[(i + 1) % n];
        const Vec2 n_in = edge_normal(prev, cur);
        const Vec2 n_out = edge_normal(cur, next);
        const double a0 = std::atan2(n_in.y, n_in.x);
        double turn = std::atan2(cross(n_in, n_out), dot(n_in, n_out));
        if (turn < 0.0) turn = 0.0;
        const int k = std::max(1, static_cast<int>(std::ceil(turn / max_step)));
        out.push_back(cur + n_in * t);
        for (int j = 1; j < k; ++j) {
            const double a = a0 + turn * j / k;
            out.push_back(cur + Vec2(std::cos(a), std::sin(a)) * t);
        }
        if (turn > 0.0) out.push_back(cur + n_out * t);
    }
    return remove_degenerate_vertices(std::move(out), 1e-14 * (1.0 + t));
}

Domain level_set_ball_sum(const Domain& dom, double t, double spacing) {
    Box b = dom.bounding_box();
    const double pad = t + 0.02 * b.diameter();
    b.lo = b.lo - Vec2(pad, pad);
    b.hi = b.hi + Vec2(pad, pad);
    if (spacing <= 0.0) spacing = b.diameter() / 512.0;
    LevelSetGrid g;
    g.origin = b.lo;
    g.spacing = spacing;
    g.nx = static_cast<int>(std::ceil(b.width() / spacing)) + 1;
    g.ny = static_cast<int>(std::ceil(b.height() / spacing)) + 1;
    g.values.resize(static_cast<std::size_t>(g.nx) * g.ny);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            g.values[static_cast<std::size_t>(j) * g.nx + i] = signed_distance(dom, g.node(i, j)) - t;
        }
    }
    return Domain::level_set(std::move(g));
}

std::vector<Vec2> convex_sum_vertices(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    auto start = [](const std::vector<Vec2>& v) {
        std::size_t k = 0;
        for (std::size_t i = 1; i < v.size(); ++i) {
            if (v[i].y < v[k].y || (v[i].y == v[k].y && v[i].x < v[k].x)) k = i;
        }
        return k;
    };
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    const std::size_t ia = start(a);
    const std::size_t ib = start(b);
    // Edge angles measured from the +x axis in [0, 2pi); starting at the bottom-most vertex
    // the edge sequence of a convex CCW polygon is sorted by angle.
    auto angle = [](Vec2 e) {
        double th = std::atan2(e.y, e.x);
        if (th < 0) th += 2.0 * kPi;
        return th;
    };
    std::vector<Vec2> out;
    Vec2 p = a[ia] + b[ib];
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < na || j < nb) {
        out.push_back(p);
        const Vec2 ea = a[(ia + i + 1) % na] - a[(ia + i) % na];
        const Vec2 eb = b[(ib + j + 1) % nb] - b[(ib + j) % nb];
        if (j >= nb) {
            p += ea;
            ++i;
        } else if (i >= na) {
            p += eb;
            ++j;
        } else {
            const double c = cross(ea, eb);
            const double scale = norm(ea) * norm(eb);
            if (std::abs(c) <= 1e-13 * scale && dot(ea, eb) > 0) {
                p += ea + eb;
                ++i;
                ++j;
            } else if (angle(ea) < angle(eb)) {
                p += ea;
                ++i;
            } else {
                p += eb;
                ++j;
            }
        }
    }
    return out;
}

std::vector<Vec2> scaled(const std::vector<Vec2>& v, double s) {
    std::vector<Vec2> out;
    out.reserve(v.size());
    for (auto p : v) out.push_back(p * s);
    return out;
}

}  // namespace

bool Polygon::is_convex() const {
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (orient(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) < 0.0) return false;
    }
    return true;
}

double Polygon::signed_area() const {
    double s = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) s += cross(vertices[i], vertices[(i + 1) % n]);
    return 0.5 * s;
}

double LevelSetGrid::interpolate(Vec2 p) const {
    const Vec2 hi = node(nx - 1, ny - 1);
    const Vec2 c{std::clamp(p.x, origin.x, hi.x), std::clamp(p.y, origin.y, hi.y)};
    const double fx = (c.x - origin.x) / spacing;
    const double fy = (c.y - origin.y) / spacing;
    const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, nx - 2);
    const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, ny - 2);
    const double u = fx - i;
    const double w = fy - j;
    const double v = (1 - u) * (1 - w) * value(i, j) + u * (1 - w) * value(i + 1, j) +
                     (1 - u) * w * value(i, j + 1) + u * w * value(i + 1, j + 1);
    return v + distance(p, c);
}

Domain Domain::disk(Vec2 center, double radius) {
    if (!(radius > 0.0)) throw GeometryError("disk radius must be positive");
    return Domain(Disk{center, radius}, {center - Vec2(radius, radius), center + Vec2(radius, radius)});
}

Domain Domain::ellipse(Vec2 center, double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw GeometryError("ellipse semi-axes must be positive");
    return Domain(Ellipse{center, a, b}, {center - Vec2(a, b), center + Vec2(a, b)});
}

Domain Domain::polygon(std::vector<Vec2> vertices) {
    if (vertices.size() >= 2 && vertices.front() == vertices.back()) vertices.pop_back();
    if (vertices.size() < 3) throw GeometryError("polygon needs at least 3 vertices");
    Polygon poly{std::move(vertices)};
    const double a = poly.signed_area();
    if (a == 0.0 || !std::isfinite(a)) throw GeometryError("polygon has zero area");
    if (a < 0.0) std::reverse(poly.vertices.begin(), poly.vertices.end());
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (v[i] == v[(i + 1) % n]) throw GeometryError("polygon has repeated vertices");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) {
                throw GeometryError("polygon is not simple (edges " + std::to_string(i) + " and " +
                                    std::to_string(j) + " intersect)");
            }
        }
    }
    const Box b = vertex_box(poly.vertices);
    return Domain(std::move(poly), b);
}

Domain Domain::level_set(LevelSetGrid grid) {
    if (grid.nx < 2 || grid.ny < 2 || !(grid.spacing > 0.0) ||
        grid.values.size() != static_cast<std::size_t>(grid.nx) * grid.ny) {
        throw GeometryError("malformed level-set grid");
    }
    const double bound = 3.0 * grid.spacing * (1.0 + 1e-12);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const double v = grid.value(i, j);
            if ((i + 1 < grid.nx && std::abs(grid.value(i + 1, j) - v) > bound) ||
                (j + 1 < grid.ny && std::abs(grid.value(i, j + 1) - v) > bound)) {
                throw GeometryError("level-set samples violate the 1-Lipschitz bound");
            }
        }
    }
    const Box b{grid.origin, grid.node(grid.nx - 1, grid.ny - 1)};
    return Domain(std::move(grid), b);
}

Domain Domain::union_of(std::vector<Domain> members) {
    if (members.empty()) throw GeometryError("union needs at least one member");
    for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
            // Disjointness with a gap: no boundary sample of one lies in or on the other.
            for (int pass = 0; pass < 2; ++pass) {
                const Domain& a = pass == 0 ? members[i] : members[j];
                const Domain& b = pass == 0 ? members[j] : members[i];
                if (a.kind() == DomainKind::level_set || a.kind() == DomainKind::union_of) continue;
                for (const auto& s : boundary_sample(a, 256)) {
                    if (signed_distance(b, s.point) <= 1e-12 * (1.0 + a.diameter())) {
                        throw GeometryError("union members must be disjoint with positive distance");
                    }
                }
            }
        }
    }
    Box b = members.front().bounding_box();
    for (const auto& m : members) b = box_union(b, m.bounding_box());
    return Domain(DomainUnion{std::move(members)}, b);
}

DomainKind Domain::kind() const {
    return std::visit(
        [](const auto& s) -> DomainKind {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Disk>) return DomainKind::disk;
            else if constexpr (std::is_same_v<T, Ellipse>) return DomainKind::ellipse;
            else if constexpr (std::is_same_v<T, Polygon>)
                return s.is_convex() ? DomainKind::convex_polygon : DomainKind::polygon;
            else if constexpr (std::is_same_v<T, LevelSetGrid>) return DomainKind::level_set;
            else return DomainKind::union_of;
        },
        shape_);
}

std::string kind_name(DomainKind k) {
    switch (k) {
        case DomainKind::disk: return "disk";
        case DomainKind::ellipse: return "ellipse";
        case DomainKind::convex_polygon: return "convex-polygon";
        case DomainKind::polygon: return "polygon";
        case DomainKind::level_set: return "level-set";
        case DomainKind::union_of: return "union";
    }
    return "unknown";
}

double signed_distance(const Domain& dom, Vec2 p) {
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Disk>) {
                return distance(p, s.center) - s.radius;
            } else if constexpr (std::is_same_v<T, Ellipse>) {
                return ellipse_signed_distance(s, p);
            } else if constexpr (std::is_same_v<T, Polygon>) {
                return polygon_signed_distance(s, p);
            } else if constexpr (std::is_same_v<T, LevelSetGrid>) {
                return s.interpolate(p);
            } else {
                double d = std::numeric_limits<double>::infinity();
                for (const auto& m : s.members) d = std::min(d, signed_distance(m, p));
                return d;
            }
        },
        dom.shape());
}

Vec2 outward_normal(const Domain& dom, Vec2 p) {
    return std::visit(
        [&](const auto& s) -> Vec2 {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Disk>) {
                const Vec2 d = p - s.center;
                return norm(d) > 0 ? normalized(d) : Vec2(1, 0);
            } else if constexpr (std::is_same_v<T, Ellipse>) {
                return ellipse_normal_at(s, ellipse_closest(s, p));
            } else if constexpr (std::is_same_v<T, Polygon>) {
                const auto& v = s.vertices;
                double best = std::numeric_limits<double>::infinity();
                Vec2 n;
                for (std::size_t i = 0; i < v.size(); ++i) {
                    const Vec2 a = v[i];
                    const Vec2 b = v[(i + 1) % v.size()];
                    const double d = point_segment_distance(p, a, b);
                    if (d < best) {
                        best = d;
                        n = edge_normal(a, b);
                    }
                }
                return n;
            } else if constexpr (std::is_same_v<T, DomainUnion>) {
                const Domain* best = &s.members.front();
                double bd = std::numeric_limits<double>::infinity();
                for (const auto& m : s.members) {
                    const double d = std::abs(signed_distance(m, p));
                    if (d < bd) {
                        bd = d;
                        best = &m;
                    }
                }
                return outward_normal(*best, p);
            } else {
                const double h = 0.5 * s.spacing;
                const Vec2 g{signed_distance(dom, p + Vec2(h, 0)) - signed_distance(dom, p - Vec2(h, 0)),
                             signed_distance(dom, p + Vec2(0, h)) - signed_distance(dom, p - Vec2(0, h))};
                return norm(g) > 0 ? normalized(g) : Vec2(1, 0);
            }
        },
        dom.shape());
}

Domain minkowski_ball_sum(const Domain& dom, double t, double grid_spacing) {
    if (!(t >= 0.0)) throw GeometryError("minkowski_ball_sum requires t >= 0");
    if (t == 0.0) return dom;
    if (const auto* d = dom.get<Disk>()) return Domain::disk(d->center, d->radius + t);
    if (const auto* p = dom.get<Polygon>(); p && p->is_convex()) {
        return Domain::polygon(convex_ball_sum_vertices(p->vertices, t));
    }
    if (const auto* u = dom.get<DomainUnion>()) {
        std::vector<Domain> parts;
        for (const auto& m : u->members) parts.push_back(minkowski_ball_sum(m, t, grid_spacing));
        try {
            return Domain::union_of(std::move(parts));
        } catch (const GeometryError&) {
            // Members merged; fall through to the grid representation.
        }
    }
    if (const auto* g = dom.get<LevelSetGrid>()) {
        LevelSetGrid out = *g;
        for (auto& v : out.values) v -= t;
        return Domain::level_set(std::move(out));
    }
    return level_set_ball_sum(dom, t, grid_spacing);
}

Domain minkowski_convex_sum(const Domain& a, const Domain& b, double s) {
    const auto* pa = a.get<Polygon>();
    const auto* pb = b.get<Polygon>();
    if (!pa || !pb || !pa->is_convex() || !pb->is_convex()) {
        throw GeometryError("minkowski_convex_sum requires two convex polygons");
    }
    if (!(s >= 0.0 && s <= 1.0)) throw GeometryError("minkowski_convex_sum requires s in [0, 1]");
    if (s == 0.0) return a;
    if (s == 1.0) return b;
    auto v = convex_sum_vertices(scaled(pa->vertices, 1.0 - s), scaled(pb->vertices, s));
    return Domain::polygon(remove_degenerate_vertices(std::move(v), 0.0));
}

Domain minkowski_interpolate(const Domain& a, const Domain& b, double s) {
    if (!(s >= 0.0 && s <= 1.0)) throw GeometryError("minkowski_interpolate requires s in [0, 1]");
    if (s == 0.0) return a;
    if (s == 1.0) return b;
    const auto* da = a.get<Disk>();
    const auto* db = b.get<Disk>();
    if (da && db) {
        return Domain::disk(da->center * (1.0 - s) + db->center * s, da->radius * (1.0 - s) + db->radius * s);
    }
    const auto* pa = a.get<Polygon>();
    const auto* pb = b.get<Polygon>();
    if (pa && pb) return minkowski_convex_sum(a, b, s);
    if (pa && db && pa->is_convex()) {
        const Domain base = scale_translate(a, 1.0 - s, db->center * s);
        return minkowski_ball_sum(base, db->radius * s);
    }
    if (pb && da && pb->is_convex()) return minkowski_interpolate(b, a, 1.0 - s);
    throw GeometryError("Minkowski interpolation is only exact for disks and convex polygons; "
                        "non-convex pairs are outside the supported Brunn-Minkowski checks");
}

Domain scale_translate(const Domain& dom, double s, Vec2 v) {
    if (!(s > 0.0)) throw GeometryError("scale factor must be positive");
    return std::visit(
        [&](const auto& sh) -> Domain {
            using T = std::decay_t<decltype(sh)>;
            if constexpr (std::is_same_v<T, Disk>) {
                return Domain::disk(sh.center * s + v, sh.radius * s);
            } else if constexpr (std::is_same_v<T, Ellipse>) {
                return Domain::ellipse(sh.center * s + v, sh.a * s, sh.b * s);
            } else if constexpr (std::is_same_v<T, Polygon>) {
                std::vector<Vec2> out;
                for (auto p : sh.vertices) out.push_back(p * s + v);
                return Domain::polygon(std::move(out));
            } else if constexpr (std::is_same_v<T, LevelSetGrid>) {
                LevelSetGrid g = sh;
                g.origin = g.origin * s + v;
                g.spacing *= s;
                for (auto& x : g.values) x *= s;
                return Domain::level_set(std::move(g));
            } else {
                std::vector<Domain> parts;
                for (const auto& m : sh.members) parts.push_back(scale_translate(m, s, v));
                return Domain::union_of(std::move(parts));
            }
        },
        dom.shape());
}

double area(const Domain& dom) {
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Disk>) return kPi * s.radius * s.radius;
            else if constexpr (std::is_same_v<T, Ellipse>) return kPi * s.a * s.b;
            else if constexpr (std::is_same_v<T, Polygon>) return s.signed_area();
            else if constexpr (std::is_same_v<T, LevelSetGrid>)
                throw GeometryError("area of a level-set domain: polygonize it first");
            else {
                double a = 0.0;
                for (const auto& m : s.members) a += area(m);
                return a;
            }
        },
        dom.shape());
}

double perimeter(const Domain& dom) {
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Disk>) return 2.0 * kPi * s.radius;
            else if constexpr (std::is_same_v<T, Ellipse>) return ellipse_perimeter(s);
            else if constexpr (std::is_same_v<T, Polygon>) {
                double p = 0.0;
                for (std::size_t i = 0; i < s.vertices.size(); ++i) {
                    p += distance(s.vertices[i], s.vertices[(i + 1) % s.vertices.size()]);
                }
                return p;
            } else if constexpr (std::is_same_v<T, LevelSetGrid>)
                throw GeometryError("perimeter of a level-set domain: polygonize it first");
            else {
                double p = 0.0;
                for (const auto& m : s.members) p += perimeter(m);
                return p;
            }
        },
        dom.shape());
}

Domain symmetrized_ball(const Domain& dom) {
    const double a = area(dom);
    if (!(a > 0.0) || !std::isfinite(a)) throw GeometryError("symmetrized_ball needs positive area");
    return Domain::disk({0.0, 0.0}, std::sqrt(a / kPi));
}

std::vector<BoundarySample> boundary_sample(const Domain& dom, int n) {
    if (n < 8) throw GeometryError("boundary_sample needs n >= 8");
    std::vector<BoundarySample> out;
    auto smooth_curve = [&](auto point_at, auto normal_at) {
        std::vector<Vec2> pts(n);
        for (int i = 0; i < n; ++i) pts[i] = point_at(2.0 * kPi * i / n);
        for (int i = 0; i < n; ++i) {
            const double w = 0.5 * (distance(pts[i], pts[(i + 1) % n]) + distance(pts[i], pts[(i + n - 1) % n]));
            out.push_back({pts[i], normal_at(pts[i]), w});
        }
    };
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Disk>) {
                smooth_curve([&](double th) { return s.center + Vec2(std::cos(th), std::sin(th)) * s.radius; },
                             [&](Vec2 p) { return normalized(p - s.center); });
            } else if constexpr (std::is_same_v<T, Ellipse>) {
                smooth_curve([&](double th) { return s.center + Vec2(s.a * std::cos(th), s.b * std::sin(th)); },
                             [&](Vec2 p) { return ellipse_normal_at(s, p); });
            } else if constexpr (std::is_same_v<T, Polygon>) {
                const auto& v = s.vertices;
                const double total = perimeter(dom);
                const std::size_t m = v.size();
                // At least one sample per edge; the rest proportional to length.
                std::vector<int> counts(m, 1);
                int left = n - static_cast<int>(m);
                if (left > 0) {
                    for (std::size_t i = 0; i < m; ++i) {
                        counts[i] += static_cast<int>(std::floor(left * distance(v[i], v[(i + 1) % m]) / total));
                    }
                }
                for (std::size_t i = 0; i < m; ++i) {
                    const Vec2 a = v[i];
                    const Vec2 b = v[(i + 1) % m];
                    const Vec2 nrm = edge_normal(a, b);
                    const double len = distance(a, b);
                    for (int k = 0; k < counts[i]; ++k) {
                        const double s0 = static_cast<double>(k) / counts[i];
                        const double s1 = static_cast<double>(k + 1) / counts[i];
                        out.push_back({a + (b - a) * (0.5 * (s0 + s1)), nrm, len * (s1 - s0)});
                    }
                }
            } else if constexpr (std::is_same_v<T, LevelSetGrid>) {
                throw GeometryError("boundary_sample of a level-set domain: polygonize it first");
            } else {
                const double total = perimeter(dom);
                for (const auto& m : s.members) {
                    const int k = std::max(8, static_cast<int>(std::round(n * perimeter(m) / total)));
                    auto part = boundary_sample(m, k);
                    out.insert(out.end(), part.begin(), part.end());
                }
            }
        },
        dom.shape());
    return out;
}

namespace {

struct Tokens {
    std::vector<std::string> items;
    std::size_t pos = 0;

    bool done() const { return pos >= items.size(); }
    const std::string& peek() const { return items[pos]; }
    std::string next() {
        if (done()) throw ParseError("unexpected end of domain specification", pos);
        return items[pos++];
    }
};

Tokens tokenize(std::string_view text) {
    Tokens t;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) t.items.push_back(std::move(cur));
        cur.clear();
    };
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            flush();
        } else if (c == '{' || c == '}' || c == ';' || c == ',') {
            flush();
            t.items.emplace_back(1, c);
        } else {
            cur.push_back(c);
        }
    }
    flush();
    return t;
}

bool parse_number(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

double expect_number(Tokens& t) {
    const std::size_t at = t.pos;
    const std::string s = t.next();
    double v = 0.0;
    if (!parse_number(s, v)) throw ParseError("expected a number, got '" + s + "'", at);
    return v;
}

Domain parse_one(Tokens& t) {
    const std::size_t at = t.pos;
    const std::string kw = t.next();
    try {
        if (kw == "disk") {
            const double cx = expect_number(t), cy = expect_number(t), r = expect_number(t);
            return Domain::disk({cx, cy}, r);
        }
        if (kw == "ellipse") {
            const double cx = expect_number(t), cy = expect_number(t), a = expect_number(t), b = expect_number(t);
            return Domain::ellipse({cx, cy}, a, b);
        }
        if (kw == "polygon") {
            std::vector<double> xs;
            double v = 0.0;
            while (!t.done() && parse_number(t.peek(), v)) {
                xs.push_back(v);
                ++t.pos;
            }
            if (xs.size() % 2 != 0) throw ParseError("polygon needs an even number of coordinates", t.pos);
            std::vector<Vec2> pts;
            for (std::size_t i = 0; i < xs.size(); i += 2) pts.push_back({xs[i], xs[i + 1]});
            return Domain::polygon(std::move(pts));
        }
        if (kw == "union") {
            if (t.next() != "{") throw ParseError("expected '{' after union", t.pos - 1);
            std::vector<Domain> parts;
            while (true) {
                if (t.done()) throw ParseError("unterminated union", t.pos);
                if (t.peek() == "}") {
                    ++t.pos;
                    break;
                }
                if (t.peek() == ";" || t.peek() == ",") {
                    ++t.pos;
                    continue;
                }
                parts.push_back(parse_one(t));
            }
            return Domain::union_of(std::move(parts));
        }
        if (kw == "sum") {
            const double r = expect_number(t);
            if (r < 0.0) throw ParseError("sum radius must be non-negative", at + 1);
            return minkowski_ball_sum(parse_one(t), r);
        }
    } catch (const GeometryError& e) {
        throw ParseError(std::string("invalid ") + kw + ": " + e.what(), at);
    }
    throw ParseError("unknown domain keyword '" + kw + "'", at);
}

void append_number(std::ostringstream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << ' ' << buf;
}

}  // namespace

Domain parse_domain(std::string_view text) {
    Tokens t = tokenize(text);
    if (t.items.empty()) throw ParseError("empty domain specification", 0);
    Domain d = parse_one(t);
    if (!t.done()) throw ParseError("trailing tokens after domain: '" + t.peek() + "'", t.pos);
    return d;
}

std::string to_spec(const Domain& dom) {
    std::ostringstream os;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Disk>) {
                os << "disk";
                append_number(os, s.center.x);
                append_number(os, s.center.y);
                append_number(os, s.radius);
            } else if constexpr (std::is_same_v<T, Ellipse>) {
                os << "ellipse";
                append_number(os, s.center.x);
                append_number(os, s.center.y);
                append_number(os, s.a);
                append_number(os, s.b);
            } else if constexpr (std::is_same_v<T, Polygon>) {
                os << "polygon";
                for (auto p : s.vertices) {
                    append_number(os, p.x);
                    append_number(os, p.y);
                }
            } else if constexpr (std::is_same_v<T, LevelSetGrid>) {
                os << "level-set " << s.nx << 'x' << s.ny;
            } else {
                os << "union {";
                for (std::size_t i = 0; i < s.members.size(); ++i) os << (i ? " ; " : " ") << to_spec(s.members[i]);
                os << " }";
            }
        },
        dom.shape());
    return os.str();
}

}  // namespace lelab
