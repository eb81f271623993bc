#include "lelab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

namespace lelab {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// Positive when d lies inside the circumcircle of the counterclockwise triangle abc.
long double incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const long double adx = (long double)a.x - d.x, ady = (long double)a.y - d.y;
    const long double bdx = (long double)b.x - d.x, bdy = (long double)b.y - d.y;
    const long double cdx = (long double)c.x - d.x, cdy = (long double)c.y - d.y;
    const long double alift = adx * adx + ady * ady;
    const long double blift = bdx * bdx + bdy * bdy;
    const long double clift = cdx * cdx + cdy * cdy;
    return alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) + clift * (adx * bdy - bdx * ady);
}

long double orient_ld(Vec2 a, Vec2 b, Vec2 c) {
    return ((long double)b.x - a.x) * ((long double)c.y - a.y) - ((long double)b.y - a.y) * ((long double)c.x - a.x);
}

Vec2 circumcenter(Vec2 a, Vec2 b, Vec2 c) {
    const Vec2 ab = b - a;
    const Vec2 ac = c - a;
    const double d = 2.0 * cross(ab, ac);
    const double ab2 = norm2(ab);
    const double ac2 = norm2(ac);
    return a + Vec2(ac.y * ab2 - ab.y * ac2, ab.x * ac2 - ac.x * ab2) / d;
}

struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> n;  // n[i] is across the edge opposite v[i]
    bool alive = true;
    bool inside = false;
};

struct BoundaryOfCavity {
    int a, b, outside, owner;
};

class Delaunay {
public:
    explicit Delaunay(const Box& box) {
        const Vec2 c = (box.lo + box.hi) * 0.5;
        const double L = 50.0 * std::max({box.width(), box.height(), 1e-300});
        pts_ = {c + Vec2(-3, -2) * L, c + Vec2(3, -2) * L, c + Vec2(0, 4) * L};
        vtri_ = {0, 0, 0};
        tris_.push_back({{0, 1, 2}, {-1, -1, -1}, true, false});
    }

    const std::vector<Vec2>& points() const { return pts_; }
    const std::vector<Tri>& tris() const { return tris_; }
    int num_points() const { return static_cast<int>(pts_.size()); }

    bool is_segment(int a, int b) const { return segs_.count(edge_key(a, b)) > 0; }
    const std::unordered_map<std::uint64_t, std::array<int, 2>>& segments() const { return segs_; }
    void add_segment(int a, int b) { segs_[edge_key(a, b)] = {a, b}; }

    int locate(Vec2 p, int start) const {
        int t = start;
        if (t < 0 || t >= static_cast<int>(tris_.size()) || !tris_[t].alive) t = last_alive();
        unsigned rot = 0;
        const int limit = 4 * static_cast<int>(tris_.size()) + 100;
        for (int step = 0; step < limit; ++step) {
            const Tri& T = tris_[t];
            bool moved = false;
            for (int k = 0; k < 3; ++k) {
                const int i = static_cast<int>((k + rot) % 3);
                const int a = T.v[(i + 1) % 3];
                const int b = T.v[(i + 2) % 3];
                if (orient_ld(pts_[a], pts_[b], p) < 0) {
                    if (T.n[i] < 0) throw MeshError("point outside the bounding triangle");
                    t = T.n[i];
                    moved = true;
                    break;
                }
            }
            if (!moved) return t;
            rot = rot * 1103515245u + 12345u;
            rot >>= 3;
        }
        throw MeshError("point location did not terminate");
    }

    // Triangles whose circumcircle strictly contains p, grown until every boundary edge sees p.
    std::vector<int> cavity(Vec2 p, int t0, std::vector<BoundaryOfCavity>& boundary) {
        std::vector<int> cav{t0};
        mark_.resize(tris_.size(), 0);
        ++stamp_;
        if (stamp_ == 0) {
            std::fill(mark_.begin(), mark_.end(), 0);
            stamp_ = 1;
        }
        mark_[t0] = stamp_;
        for (std::size_t k = 0; k < cav.size(); ++k) {
            const Tri& T = tris_[cav[k]];
            for (int i = 0; i < 3; ++i) {
                const int nb = T.n[i];
                if (nb < 0 || mark_[nb] == stamp_) continue;
                const Tri& N = tris_[nb];
                if (incircle(pts_[N.v[0]], pts_[N.v[1]], pts_[N.v[2]], p) > 0) {
                    mark_[nb] = stamp_;
                    cav.push_back(nb);
                }
            }
        }
        for (int guard = 0; guard < 1000; ++guard) {
            boundary.clear();
            int bad_outside = -1;
            for (int t : cav) {
                const Tri& T = tris_[t];
                for (int i = 0; i < 3; ++i) {
                    const int nb = T.n[i];
                    if (nb >= 0 && mark_[nb] == stamp_) continue;
                    const int a = T.v[(i + 1) % 3];
                    const int b = T.v[(i + 2) % 3];
                    if (orient_ld(pts_[a], pts_[b], p) <= 0 && bad_outside < 0) {
                        if (nb < 0) throw MeshError("cavity reached the bounding triangle");
                        bad_outside = nb;
                    }
                    boundary.push_back({a, b, nb, t});
                }
            }
            if (bad_outside < 0) return cav;
            mark_[bad_outside] = stamp_;
            cav.push_back(bad_outside);
        }
        throw MeshError("cavity repair did not terminate");
    }

    int commit(Vec2 p, const std::vector<int>& cav, const std::vector<BoundaryOfCavity>& boundary,
               std::vector<int>* created = nullptr) {
        {
            std::unordered_set<int> on_rim;
            for (const auto& e : boundary) on_rim.insert(e.a);
            for (int t : cav) {
                for (int v : tris_[t].v) {
                    if (!on_rim.count(v)) throw MeshError("cavity swallowed a vertex (near-degenerate input)");
                }
            }
        }
        const int pid = static_cast<int>(pts_.size());
        pts_.push_back(p);
        vtri_.push_back(-1);
        for (int t : cav) tris_[t].alive = false;
        std::unordered_map<int, int> start_of;
        std::unordered_map<int, int> end_of;
        const int first = static_cast<int>(tris_.size());
        for (const auto& e : boundary) {
            const int id = static_cast<int>(tris_.size());
            Tri T;
            T.v = {e.a, e.b, pid};
            T.n = {-1, -1, e.outside};
            T.inside = tris_[e.owner].inside;
            tris_.push_back(T);
            start_of[e.a] = id;
            end_of[e.b] = id;
            if (e.outside >= 0) {
                Tri& N = tris_[e.outside];
                for (int j = 0; j < 3; ++j) {
                    if (N.v[(j + 1) % 3] == e.b && N.v[(j + 2) % 3] == e.a) N.n[j] = id;
                }
            }
            vtri_[e.a] = id;
            vtri_[e.b] = id;
            vtri_[pid] = id;
        }
        for (int id = first; id < static_cast<int>(tris_.size()); ++id) {
            Tri& T = tris_[id];
            T.n[0] = start_of.at(T.v[1]);
            T.n[1] = end_of.at(T.v[0]);
            if (created) created->push_back(id);
        }
        last_ = first;
        return pid;
    }

    int insert(Vec2 p, int hint, std::vector<int>* created = nullptr) {
        const int t = locate(p, hint);
        std::vector<BoundaryOfCavity> boundary;
        const auto cav = cavity(p, t, boundary);
        return commit(p, cav, boundary, created);
    }

    int vertex_triangle(int v) const { return vtri_[v]; }
    int last() const { return last_; }

    // Triangle holding the directed edge a -> b (counterclockwise), or -1.
    std::pair<int, int> find_directed_edge(int a, int b) const {
        int t = vtri_[a];
        if (t < 0 || !tris_[t].alive) return {-1, -1};
        // Walk around a in both directions.
        for (int dir = 0; dir < 2; ++dir) {
            int cur = t;
            for (int guard = 0; guard < 10000 && cur >= 0; ++guard) {
                const Tri& T = tris_[cur];
                int i = 0;
                while (T.v[i] != a) ++i;
                if (T.v[(i + 1) % 3] == b) return {cur, i};
                // dir 0: rotate clockwise across edge (a, v[i+1]); dir 1: counterclockwise across (v[i+2], a)
                const int next = dir == 0 ? T.n[(i + 2) % 3] : T.n[(i + 1) % 3];
                if (next == t) break;
                cur = next;
            }
        }
        return {-1, -1};
    }

    void set_inside_by_flood() {
        for (auto& T : tris_) T.inside = true;
        std::vector<int> stack;
        std::vector<char> seen(tris_.size(), 0);
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
            const Tri& T = tris_[t];
            if (!T.alive) continue;
            if (T.v[0] < 3 || T.v[1] < 3 || T.v[2] < 3) {
                stack.push_back(t);
                seen[t] = 1;
            }
        }
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            tris_[t].inside = false;
            const Tri& T = tris_[t];
            for (int i = 0; i < 3; ++i) {
                const int nb = T.n[i];
                if (nb < 0 || seen[nb]) continue;
                if (is_segment(T.v[(i + 1) % 3], T.v[(i + 2) % 3])) continue;
                seen[nb] = 1;
                stack.push_back(nb);
            }
        }
    }

    void split_segment_record(int a, int b, int m) {
        const auto it = segs_.find(edge_key(a, b));
        const auto dir = it->second;
        segs_.erase(it);
        segs_[edge_key(dir[0], m)] = {dir[0], m};
        segs_[edge_key(m, dir[1])] = {m, dir[1]};
    }

private:
    int last_alive() const {
        if (last_ >= 0 && last_ < static_cast<int>(tris_.size()) && tris_[last_].alive) return last_;
        for (int t = static_cast<int>(tris_.size()) - 1; t >= 0; --t) {
            if (tris_[t].alive) return t;
        }
        throw MeshError("empty triangulation");
    }

    std::vector<Vec2> pts_;
    std::vector<Tri> tris_;
    std::vector<int> vtri_;
    std::unordered_map<std::uint64_t, std::array<int, 2>> segs_;
    std::vector<unsigned> mark_;
    unsigned stamp_ = 0;
    int last_ = 0;
};

class Mesher {
public:
    Mesher(const Polygon& poly, double h) : poly_(poly), h_(h), dt_(bounding(poly)) {}

    Mesh run() {
        const auto& v = poly_.vertices;
        const std::size_t n = v.size();
        check_angles();
        // Boundary points.
        std::vector<int> corner_ids;
        std::vector<std::vector<int>> edge_points(n);
        for (std::size_t i = 0; i < n; ++i) {
            corner_ids.push_back(dt_.insert(v[i], dt_.last()));
        }
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 a = v[i];
            const Vec2 b = v[(i + 1) % n];
            const int k = std::max(1, static_cast<int>(std::ceil(distance(a, b) / h_ * (1.0 - 1e-12))));
            int prev = corner_ids[i];
            for (int j = 1; j < k; ++j) {
                const int id = dt_.insert(a + (b - a) * (static_cast<double>(j) / k), dt_.last());
                dt_.add_segment(prev, id);
                prev = id;
            }
            dt_.add_segment(prev, corner_ids[(i + 1) % n]);
        }
        for (std::size_t i = 0; i < n; ++i) corner_angle_[corner_ids[i]] = interior_angle(i);
        insert_lattice();
        recover_segments();
        dt_.set_inside_by_flood();
        refine_quality();
        return finish();
    }

private:
    static Box bounding(const Polygon& poly) {
        Box b{poly.vertices.front(), poly.vertices.front()};
        for (auto p : poly.vertices) {
            b.lo = {std::min(b.lo.x, p.x), std::min(b.lo.y, p.y)};
            b.hi = {std::max(b.hi.x, p.x), std::max(b.hi.y, p.y)};
        }
        return b;
    }

    double interior_angle(std::size_t i) const {
        const auto& v = poly_.vertices;
        const std::size_t n = v.size();
        const Vec2 d_in = v[(i + n - 1) % n] - v[i];
        const Vec2 d_out = v[(i + 1) % n] - v[i];
        double ang = std::atan2(cross(d_out, d_in), dot(d_out, d_in));
        if (ang < 0) ang += 2 * kPi;
        return ang;
    }

    void check_angles() const {
        for (std::size_t i = 0; i < poly_.vertices.size(); ++i) {
            const double a = interior_angle(i);
            if (a < kPi / 180.0 || a > 2 * kPi - kPi / 180.0) {
                throw MeshError("polygon has a corner angle below 1 degree; cannot triangulate");
            }
        }
    }

    void insert_lattice() {
        const Box b = bounding(poly_);
        const double s = 0.9 * h_;
        const double dy = s * std::sqrt(3.0) / 2.0;
        const Domain dom = Domain::polygon(poly_.vertices);
        const int ny = static_cast<int>(std::floor(b.height() / dy));
        for (int j = 1; j <= ny; ++j) {
            const double y = b.lo.y + j * dy;
            const double x0 = b.lo.x + ((j % 2) ? 0.5 * s : 0.0);
            std::vector<Vec2> row;
            for (double x = x0; x < b.hi.x; x += s) {
                const Vec2 p{x, y};
                if (signed_distance(dom, p) < -0.55 * s) row.push_back(p);
            }
            // Serpentine order keeps the point-location walks short.
            if (j % 2 == 0) std::reverse(row.begin(), row.end());
            for (auto p : row) dt_.insert(p, dt_.last());
        }
    }

    bool encroached(int a, int b) const {
        // a -> b keeps the domain on its left.
        const auto [t, i] = dt_.find_directed_edge(a, b);
        if (t < 0) return true;  // missing from the triangulation
        const int c = dt_.tris()[t].v[(i + 2) % 3];
        const auto& P = dt_.points();
        return dot(P[a] - P[c], P[b] - P[c]) < 0.0;
    }

    int split_segment(int a, int b, std::vector<int>* created) {
        const auto& P = dt_.points();
        const Vec2 m = (P[a] + P[b]) * 0.5;
        const int id = dt_.insert(m, dt_.vertex_triangle(a), created);
        dt_.split_segment_record(a, b, id);
        return id;
    }

    std::vector<std::array<int, 2>> sorted_segments() const {
        std::vector<std::array<int, 2>> s;
        for (const auto& [k, d] : dt_.segments()) s.push_back(d);
        std::sort(s.begin(), s.end());
        return s;
    }

    void recover_segments() {
        for (int round = 0; round < 200; ++round) {
            bool changed = false;
            for (const auto& s : sorted_segments()) {
                if (encroached(s[0], s[1])) {
                    split_segment(s[0], s[1], nullptr);
                    changed = true;
                }
            }
            if (!changed) return;
        }
        throw MeshError("segment recovery did not converge");
    }

    bool is_bad(int t, bool* skip_small_corner) const {
        const Tri& T = dt_.tris()[t];
        const auto& P = dt_.points();
        *skip_small_corner = false;
        double l2[3];
        for (int i = 0; i < 3; ++i) l2[i] = norm2(P[T.v[(i + 1) % 3]] - P[T.v[(i + 2) % 3]]);
        const double lmax = std::max({l2[0], l2[1], l2[2]});
        if (lmax > h_ * h_ * (1.0 + 1e-9)) return true;
        const int imin = static_cast<int>(std::min_element(l2, l2 + 3) - l2);
        const Vec2 cc = circumcenter(P[T.v[0]], P[T.v[1]], P[T.v[2]]);
        const double r2 = norm2(cc - P[T.v[0]]);
        if (r2 <= 2.0 * l2[imin]) return false;
        // Smallest angle sits opposite the shortest edge. Leave it alone at narrow input corners
        // where both adjacent edges are boundary segments.
        for (int i = 0; i < 3; ++i) {
            if (i == imin) continue;
            const int apex = T.v[i];
            const auto it = corner_angle_.find(apex);
            if (it != corner_angle_.end() && it->second < kPi / 3.0) {
                const int o1 = T.v[(i + 1) % 3];
                const int o2 = T.v[(i + 2) % 3];
                if (dt_.is_segment(apex, o1) && dt_.is_segment(apex, o2)) {
                    *skip_small_corner = true;
                    return false;
                }
            }
        }
        return true;
    }

    void refine_quality() {
        std::deque<int> tri_queue;
        std::deque<std::array<int, 2>> seg_queue;
        for (int t = 0; t < static_cast<int>(dt_.tris().size()); ++t) {
            if (dt_.tris()[t].alive && dt_.tris()[t].inside) tri_queue.push_back(t);
        }
        for (const auto& s : sorted_segments()) seg_queue.push_back(s);
        const int max_points = 30 * dt_.num_points() + 20000;

        auto enqueue_created = [&](const std::vector<int>& created) {
            for (int id : created) {
                const Tri& T = dt_.tris()[id];
                if (T.inside) tri_queue.push_back(id);
                for (int i = 0; i < 3; ++i) {
                    const int a = T.v[(i + 1) % 3];
                    const int b = T.v[(i + 2) % 3];
                    if (dt_.is_segment(a, b)) seg_queue.push_back(dt_.segments().at(edge_key(a, b)));
                }
            }
        };

        while (!tri_queue.empty() || !seg_queue.empty()) {
            if (dt_.num_points() > max_points) throw MeshError("quality refinement exceeded the point budget");
            if (!seg_queue.empty()) {
                const auto s = seg_queue.front();
                seg_queue.pop_front();
                if (!dt_.is_segment(s[0], s[1])) continue;
                const auto dir = dt_.segments().at(edge_key(s[0], s[1]));
                if (!encroached(dir[0], dir[1])) continue;
                std::vector<int> created;
                split_segment(dir[0], dir[1], &created);
                enqueue_created(created);
                continue;
            }
            const int t = tri_queue.front();
            tri_queue.pop_front();
            const Tri& T = dt_.tris()[t];
            if (!T.alive || !T.inside) continue;
            bool skip = false;
            if (!is_bad(t, &skip)) continue;
            const auto& P = dt_.points();
            const Vec2 cc = circumcenter(P[T.v[0]], P[T.v[1]], P[T.v[2]]);
            const int loc = dt_.locate(cc, t);
            if (!dt_.tris()[loc].inside) {
                // Circumcenter beyond the boundary: split the first segment the ray crosses.
                const Vec2 start = (P[T.v[0]] + P[T.v[1]] + P[T.v[2]]) / 3.0;
                const auto s = first_crossed_segment(start, cc);
                if (s[0] < 0) throw MeshError("circumcenter outside the domain without a crossed segment");
                std::vector<int> created;
                split_segment(s[0], s[1], &created);
                enqueue_created(created);
                tri_queue.push_back(t);
                continue;
            }
            std::vector<BoundaryOfCavity> boundary;
            const auto cav = dt_.cavity(cc, loc, boundary);
            std::vector<std::array<int, 2>> hit;
            for (int c : cav) {
                const Tri& C = dt_.tris()[c];
                for (int i = 0; i < 3; ++i) {
                    const int a = C.v[(i + 1) % 3];
                    const int b = C.v[(i + 2) % 3];
                    if (!dt_.is_segment(a, b)) continue;
                    const auto dir = dt_.segments().at(edge_key(a, b));
                    const bool interior_to_cavity = C.n[i] >= 0 && std::find(cav.begin(), cav.end(), C.n[i]) != cav.end();
                    if (interior_to_cavity || dot(P[a] - cc, P[b] - cc) < 0.0) {
                        if (std::find(hit.begin(), hit.end(), dir) == hit.end()) hit.push_back(dir);
                    }
                }
            }
            if (!hit.empty()) {
                std::sort(hit.begin(), hit.end());
                for (const auto& s : hit) {
                    if (!dt_.is_segment(s[0], s[1])) continue;
                    std::vector<int> created;
                    split_segment(s[0], s[1], &created);
                    enqueue_created(created);
                }
                tri_queue.push_back(t);
                continue;
            }
            std::vector<int> created;
            dt_.commit(cc, cav, boundary, &created);
            enqueue_created(created);
        }
    }

    std::array<int, 2> first_crossed_segment(Vec2 p, Vec2 q) const {
        const auto& P = dt_.points();
        double best = std::numeric_limits<double>::infinity();
        std::array<int, 2> out{-1, -1};
        for (const auto& s : sorted_segments()) {
            const Vec2 a = P[s[0]];
            const Vec2 b = P[s[1]];
            const double d1 = orient(a, b, p);
            const double d2 = orient(a, b, q);
            const double d3 = orient(p, q, a);
            const double d4 = orient(p, q, b);
            if ((d1 > 0) == (d2 > 0) || (d3 > 0) == (d4 > 0)) {
                if (!(d3 == 0 || d4 == 0)) continue;
            }
            const double denom = d1 - d2;
            if (denom == 0) continue;
            const double s_par = d1 / denom;
            if (s_par < 0 || s_par > 1) continue;
            if (s_par < best) {
                best = s_par;
                out = s;
            }
        }
        return out;
    }

    Mesh finish() const {
        const auto& P = dt_.points();
        Mesh m;
        std::vector<int> remap(P.size(), -1);
        for (const auto& T : dt_.tris()) {
            if (!T.alive || !T.inside) continue;
            std::array<int, 3> tri;
            for (int i = 0; i < 3; ++i) {
                int& r = remap[T.v[i]];
                if (T.v[i] < 3) throw MeshError("interior triangle touches the bounding triangle");
                if (r < 0) {
                    r = static_cast<int>(m.vertices.size());
                    m.vertices.push_back(P[T.v[i]]);
                }
                tri[i] = r;
            }
            m.triangles.push_back(tri);
        }
        m.on_boundary.assign(m.vertices.size(), 0);
        for (const auto& s : sorted_segments()) {
            const int a = remap[s[0]];
            const int b = remap[s[1]];
            if (a < 0 || b < 0) throw MeshError("boundary segment without an interior triangle");
            const Vec2 d = m.vertices[b] - m.vertices[a];
            const double len = norm(d);
            m.boundary_edges.push_back({a, b, Vec2(d.y, -d.x) / len, len});
            m.on_boundary[a] = m.on_boundary[b] = 1;
        }
        return m;
    }

    const Polygon& poly_;
    double h_;
    Delaunay dt_;
    std::unordered_map<int, double> corner_angle_;
};

double max_edge(const Mesh& m) {
    double h2 = 0.0;
    for (const auto& t : m.triangles) {
        for (int i = 0; i < 3; ++i) h2 = std::max(h2, norm2(m.vertices[t[i]] - m.vertices[t[(i + 1) % 3]]));
    }
    return std::sqrt(h2);
}

// Boundary edges sorted so each closed loop is contiguous, starting from its smallest vertex.
void order_boundary_loops(Mesh& m) {
    std::unordered_map<int, int> from;
    for (int i = 0; i < static_cast<int>(m.boundary_edges.size()); ++i) from[m.boundary_edges[i].a] = i;
    std::vector<char> used(m.boundary_edges.size(), 0);
    std::vector<int> starts;
    for (int i = 0; i < static_cast<int>(m.boundary_edges.size()); ++i) starts.push_back(i);
    std::sort(starts.begin(), starts.end(),
              [&](int x, int y) { return m.boundary_edges[x].a < m.boundary_edges[y].a; });
    std::vector<BoundaryEdge> out;
    for (int s : starts) {
        if (used[s]) continue;
        int cur = s;
        while (!used[cur]) {
            used[cur] = 1;
            out.push_back(m.boundary_edges[cur]);
            const auto it = from.find(m.boundary_edges[cur].b);
            if (it == from.end()) break;
            cur = it->second;
        }
    }
    m.boundary_edges = std::move(out);
}

// --- polygonization ---------------------------------------------------------------

std::vector<Vec2> disk_polygon(const Disk& d, double res) {
    const double r = d.radius;
    const double ratio = std::min(res / r, 0.29);
    int n = static_cast<int>(std::ceil(kPi / std::acos(1.0 - ratio)));
    n = std::max(8, 4 * ((n + 3) / 4));
    std::vector<Vec2> v(n);
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * kPi * i / n;
        v[i] = d.center + Vec2(std::cos(th), std::sin(th)) * r;
    }
    return v;
}

std::vector<Vec2> ellipse_polygon(const Ellipse& e, double res) {
    // Equidistribute ds / c(s), with c = sqrt(8 res rho) the chord whose sagitta is res at
    // curvature radius rho. Vertex count rounded to a multiple of 4 keeps both mirror symmetries.
    const int m = 20000;
    auto speed = [&](double th) { return std::hypot(e.a * std::sin(th), e.b * std::cos(th)); };
    auto density = [&](double th) {
        const double sp = speed(th);
        const double rho = sp * sp * sp / (e.a * e.b);
        return sp / std::sqrt(8.0 * res * rho);
    };
    std::vector<double> cum(m + 1, 0.0);
    for (int i = 0; i < m; ++i) {
        const double t0 = 2 * kPi * i / m;
        const double t1 = 2 * kPi * (i + 1) / m;
        cum[i + 1] = cum[i] + 0.5 * (density(t0) + density(t1)) * (t1 - t0);
    }
    int n = static_cast<int>(std::ceil(cum[m] * 1.05));
    n = std::max(8, 4 * ((n + 3) / 4));
    std::vector<Vec2> v;
    v.reserve(n);
    int j = 0;
    for (int k = 0; k < n; ++k) {
        const double target = cum[m] * k / n;
        while (j < m && cum[j + 1] < target) ++j;
        const double frac = cum[j + 1] > cum[j] ? (target - cum[j]) / (cum[j + 1] - cum[j]) : 0.0;
        const double th = 2 * kPi * (j + frac) / m;
        v.push_back(e.center + Vec2(e.a * std::cos(th), e.b * std::sin(th)));
    }
    return v;
}

// Marching squares on the zero level, sample values nudged away from exact zeros.
std::vector<std::vector<Vec2>> contour_loops(const LevelSetGrid& g) {
    auto val = [&](int i, int j) {
        const double v = g.value(i, j);
        return v == 0.0 ? 1e-14 * g.spacing : v;
    };
    auto crossing = [&](int i0, int j0, int i1, int j1) {
        const double a = val(i0, j0);
        const double b = val(i1, j1);
        const double s = a / (a - b);
        return g.node(i0, j0) + (g.node(i1, j1) - g.node(i0, j0)) * s;
    };
    // Edge ids: horizontal (i,j)-(i+1,j) -> 2*(j*nx+i), vertical (i,j)-(i,j+1) -> 2*(j*nx+i)+1.
    auto hid = [&](int i, int j) { return 2L * (static_cast<long>(j) * g.nx + i); };
    auto vid = [&](int i, int j) { return 2L * (static_cast<long>(j) * g.nx + i) + 1; };
    std::unordered_map<long, long> next;  // directed: inside on the left
    std::unordered_map<long, Vec2> where;
    auto point_of = [&](long id) {
        auto it = where.find(id);
        if (it != where.end()) return it->second;
        const int k = static_cast<int>(id / 2);
        const int i = k % g.nx;
        const int j = k / g.nx;
        const Vec2 p = (id % 2 == 0) ? crossing(i, j, i + 1, j) : crossing(i, j, i, j + 1);
        where[id] = p;
        return p;
    };
    for (int j = 0; j + 1 < g.ny; ++j) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double v0 = val(i, j), v1 = val(i + 1, j), v2 = val(i + 1, j + 1), v3 = val(i, j + 1);
            const int code = (v0 < 0) | ((v1 < 0) << 1) | ((v2 < 0) << 2) | ((v3 < 0) << 3);
            if (code == 0 || code == 15) continue;
            const long eb = hid(i, j), er = vid(i + 1, j), et = hid(i, j + 1), el = vid(i, j);
            // Corner k inside; corner k+1 outside => the contour leaves through the edge between them.
            // Edges counterclockwise: bottom (0-1), right (1-2), top (2-3), left (3-0).
            const long edges[4] = {eb, er, et, el};
            const bool in[4] = {v0 < 0, v1 < 0, v2 < 0, v3 < 0};
            std::vector<long> enter, leave;
            for (int k = 0; k < 4; ++k) {
                const bool a = in[k];
                const bool b = in[(k + 1) % 4];
                if (a && !b) leave.push_back(edges[k]);   // walking ccw along the cell edge: in -> out
                if (!a && b) enter.push_back(edges[k]);
            }
            if (enter.size() == 1) {
                // The contour with inside on its left runs from the "leave" edge to the "enter" edge.
                next[leave[0]] = enter[0];
            } else {
                // Saddle: decide by the cell center value.
                const double c = 0.25 * (v0 + v1 + v2 + v3);
                const int k0 = in[0] ? 0 : 1;  // first inside corner
                // inside corners are k0 and k0+2
                const long leave_a = edges[k0], enter_a = edges[(k0 + 3) % 4];
                const long leave_b = edges[(k0 + 2) % 4], enter_b = edges[(k0 + 1) % 4];
                if (c < 0) {
                    // inside corners joined through the center
                    next[leave_a] = enter_b;
                    next[leave_b] = enter_a;
                } else {
                    next[leave_a] = enter_a;
                    next[leave_b] = enter_b;
                }
            }
        }
    }
    std::vector<std::vector<Vec2>> loops;
    std::vector<long> keys;
    for (const auto& [k, v] : next) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    std::unordered_set<long> used;
    for (long s : keys) {
        if (used.count(s)) continue;
        std::vector<Vec2> loop;
        long cur = s;
        while (!used.count(cur)) {
            used.insert(cur);
            loop.push_back(point_of(cur));
            const auto it = next.find(cur);
            if (it == next.end()) throw MeshError("open contour in level-set polygonization");
            cur = it->second;
        }
        if (cur != s) throw MeshError("malformed contour in level-set polygonization");
        loops.push_back(std::move(loop));
    }
    return loops;
}

std::vector<Vec2> thin_loop(const std::vector<Vec2>& loop, double min_len) {
    std::vector<Vec2> out;
    for (auto p : loop) {
        if (out.empty() || distance(out.back(), p) >= min_len) out.push_back(p);
    }
    while (out.size() > 3 && distance(out.back(), out.front()) < min_len) out.pop_back();
    return out;
}

double loop_area(const std::vector<Vec2>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += cross(v[i], v[(i + 1) % v.size()]);
    return 0.5 * s;
}

double max_curvature(const Domain& dom) {
    if (const auto* d = dom.get<Disk>()) return 1.0 / d->radius;
    if (const auto* e = dom.get<Ellipse>()) return std::max(e->a / (e->b * e->b), e->b / (e->a * e->a));
    if (const auto* u = dom.get<DomainUnion>()) {
        double k = 0.0;
        for (const auto& m : u->members) k = std::max(k, max_curvature(m));
        return k;
    }
    return 0.0;
}

}  // namespace

double Mesh::triangle_area(int t) const {
    const auto& tri = triangles[t];
    return 0.5 * orient(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

double Mesh::total_area() const {
    double a = 0.0;
    for (int t = 0; t < num_triangles(); ++t) a += triangle_area(t);
    return a;
}

double Mesh::min_angle_deg() const {
    double best = 180.0;
    for (const auto& t : triangles) {
        for (int i = 0; i < 3; ++i) {
            const Vec2 p = vertices[t[i]];
            const Vec2 a = vertices[t[(i + 1) % 3]] - p;
            const Vec2 b = vertices[t[(i + 2) % 3]] - p;
            best = std::min(best, std::atan2(std::abs(cross(a, b)), dot(a, b)) * 180.0 / kPi);
        }
    }
    return best;
}

Domain polygonize(const Domain& dom, double resolution) {
    if (!(resolution > 0.0)) throw MeshError("polygonize needs a positive resolution");
    if (dom.get<Polygon>()) return dom;
    if (const auto* d = dom.get<Disk>()) return Domain::polygon(disk_polygon(*d, resolution));
    if (const auto* e = dom.get<Ellipse>()) return Domain::polygon(ellipse_polygon(*e, resolution));
    if (const auto* u = dom.get<DomainUnion>()) {
        std::vector<Domain> parts;
        for (const auto& m : u->members) parts.push_back(polygonize(m, resolution));
        return Domain::union_of(std::move(parts));
    }
    const auto& g = *dom.get<LevelSetGrid>();
    auto loops = contour_loops(g);
    std::vector<Domain> parts;
    for (auto& loop : loops) {
        auto thin = thin_loop(loop, 0.3 * g.spacing);
        if (thin.size() < 3) continue;
        if (loop_area(thin) < 0) throw MeshError("level-set domain with holes is not supported");
        parts.push_back(Domain::polygon(std::move(thin)));
    }
    if (parts.empty()) throw MeshError("level-set domain has an empty zero level set");
    if (parts.size() == 1) return parts.front();
    return Domain::union_of(std::move(parts));
}

Mesh triangulate(const Domain& polygon, double h) {
    const auto* poly = polygon.get<Polygon>();
    if (!poly) throw MeshError("triangulate needs a polygon domain");
    if (!(h > 0.0)) throw MeshError("mesh size must be positive");
    if (h >= polygon.diameter() / 2.0) throw MeshError("mesh size must be below half the diameter");
    Mesher mesher(*poly, h);
    Mesh m = mesher.run();
    order_boundary_loops(m);
    m.h = max_edge(m);
    if (const std::string err = validate(m); !err.empty()) throw MeshError("triangulation failed: " + err);
    return m;
}

Mesh mesh_domain(const Domain& dom, double h, double resolution) {
    if (resolution <= 0.0) {
        const double k = max_curvature(dom);
        resolution = k > 0.0 ? 0.125 * h * h * k : h;
    }
    const Domain poly = polygonize(dom, resolution);
    if (const auto* u = poly.get<DomainUnion>()) {
        std::vector<Mesh> parts;
        for (const auto& m : u->members) parts.push_back(triangulate(m, std::min(h, m.diameter() / 4.0)));
        return snap_boundary(merge(parts), dom);
    }
    return snap_boundary(triangulate(poly, h), dom);
}

namespace {

bool curved(const Domain& dom) {
    if (dom.kind() == DomainKind::disk || dom.kind() == DomainKind::ellipse) return true;
    if (const auto* u = dom.get<DomainUnion>())
        return std::any_of(u->members.begin(), u->members.end(), [](const Domain& m) { return curved(m); });
    return false;
}

Vec2 project(const Domain& dom, Vec2 p) {
    // two closest-point steps; the first is exact for disks and ellipses
    for (int k = 0; k < 2; ++k) p = p - signed_distance(dom, p) * outward_normal(dom, p);
    return p;
}

}  // namespace

Mesh snap_boundary(const Mesh& mesh, const Domain& dom, int first_vertex) {
    if (!curved(dom)) return mesh;
    std::vector<Vec2> v = mesh.vertices;
    for (int i = std::max(first_vertex, 0); i < mesh.num_vertices(); ++i)
        if (mesh.on_boundary[i]) v[i] = project(dom, v[i]);
    return with_vertices(mesh, std::move(v));
}

Mesh refine(const Mesh& mesh, const Domain& dom) {
    const Mesh r = refine(mesh);
    return snap_boundary(r, dom, r.parent_vertices);
}

std::vector<std::array<int, 2>> mesh_edges(const Mesh& mesh) {
    std::vector<std::array<int, 2>> e;
    e.reserve(3 * mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        for (int i = 0; i < 3; ++i) {
            int a = t[i];
            int b = t[(i + 1) % 3];
            if (a > b) std::swap(a, b);
            e.push_back({a, b});
        }
    }
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    return e;
}

Mesh refine(const Mesh& mesh) {
    const auto edges = mesh_edges(mesh);
    const int nv = mesh.num_vertices();
    Mesh out;
    out.vertices = mesh.vertices;
    out.on_boundary = mesh.on_boundary;
    out.parent_vertices = nv;
    out.parent_edges = edges;
    out.level = mesh.level + 1;
    std::unordered_map<std::uint64_t, int> mid;
    mid.reserve(edges.size() * 2);
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto& e = edges[k];
        out.vertices.push_back((mesh.vertices[e[0]] + mesh.vertices[e[1]]) * 0.5);
        out.on_boundary.push_back(0);
        mid[edge_key(e[0], e[1])] = nv + static_cast<int>(k);
    }
    out.triangles.reserve(4 * mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        const int m01 = mid.at(edge_key(t[0], t[1]));
        const int m12 = mid.at(edge_key(t[1], t[2]));
        const int m20 = mid.at(edge_key(t[2], t[0]));
        out.triangles.push_back({t[0], m01, m20});
        out.triangles.push_back({m01, t[1], m12});
        out.triangles.push_back({m20, m12, t[2]});
        out.triangles.push_back({m01, m12, m20});
    }
    for (const auto& e : mesh.boundary_edges) {
        const int m = mid.at(edge_key(e.a, e.b));
        out.on_boundary[m] = 1;
        out.boundary_edges.push_back({e.a, m, e.normal, 0.5 * e.length});
        out.boundary_edges.push_back({m, e.b, e.normal, 0.5 * e.length});
    }
    for (auto& e : out.boundary_edges) e.length = distance(out.vertices[e.a], out.vertices[e.b]);
    out.h = max_edge(out);
    return out;
}

Mesh map_mesh(const Mesh& mesh, const std::function<Vec2(Vec2)>& f) {
    std::vector<Vec2> moved;
    moved.reserve(mesh.vertices.size());
    for (auto p : mesh.vertices) moved.push_back(f(p));
    return with_vertices(mesh, std::move(moved));
}

Mesh with_vertices(const Mesh& mesh, std::vector<Vec2> vertices) {
    if (vertices.size() != mesh.vertices.size()) throw MeshError("vertex count mismatch");
    Mesh out = mesh;
    out.vertices = std::move(vertices);
    for (int t = 0; t < out.num_triangles(); ++t) {
        if (!(out.triangle_area(t) > 0.0)) throw MeshError("mapped mesh has an inverted triangle");
    }
    for (auto& e : out.boundary_edges) {
        const Vec2 d = out.vertices[e.b] - out.vertices[e.a];
        e.length = norm(d);
        e.normal = Vec2(d.y, -d.x) / e.length;
    }
    out.h = max_edge(out);
    return out;
}

Mesh merge(const std::vector<Mesh>& parts) {
    if (parts.empty()) throw MeshError("merge of no meshes");
    if (parts.size() == 1) return parts.front();
    Mesh out;
    for (const auto& m : parts) {
        const int off = out.num_vertices();
        out.vertices.insert(out.vertices.end(), m.vertices.begin(), m.vertices.end());
        out.on_boundary.insert(out.on_boundary.end(), m.on_boundary.begin(), m.on_boundary.end());
        for (const auto& t : m.triangles) out.triangles.push_back({t[0] + off, t[1] + off, t[2] + off});
        for (auto e : m.boundary_edges) {
            e.a += off;
            e.b += off;
            out.boundary_edges.push_back(e);
        }
        out.h = std::max(out.h, m.h);
    }
    return out;
}

std::vector<int> triangle_components(const Mesh& mesh, int* count) {
    std::vector<int> parent(mesh.vertices.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& t : mesh.triangles) {
        const int r0 = find(t[0]);
        for (int i = 1; i < 3; ++i) {
            const int r = find(t[i]);
            if (r != r0) parent[std::max(r, r0)] = std::min(r, r0);
        }
    }
    std::map<int, int> ids;
    std::vector<int> comp(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const int r = find(mesh.triangles[t][0]);
        auto it = ids.find(r);
        if (it == ids.end()) it = ids.emplace(r, static_cast<int>(ids.size())).first;
        comp[t] = it->second;
    }
    // Renumber by first appearance so ids follow triangle order.
    std::vector<int> order(ids.size(), -1);
    int next = 0;
    for (auto& c : comp) {
        if (order[c] < 0) order[c] = next++;
        c = order[c];
    }
    if (count) *count = next;
    return comp;
}

int connected_components(const Mesh& mesh) {
    int n = 0;
    triangle_components(mesh, &n);
    return n;
}

Mesh extract_component(const Mesh& mesh, const std::vector<int>& comp, int id) {
    Mesh out;
    std::vector<int> remap(mesh.vertices.size(), -1);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        if (comp[t] != id) continue;
        std::array<int, 3> tri;
        for (int i = 0; i < 3; ++i) {
            int& r = remap[mesh.triangles[t][i]];
            if (r < 0) {
                r = out.num_vertices();
                out.vertices.push_back(mesh.vertices[mesh.triangles[t][i]]);
                out.on_boundary.push_back(mesh.on_boundary[mesh.triangles[t][i]]);
            }
            tri[i] = r;
        }
        out.triangles.push_back(tri);
    }
    for (auto e : mesh.boundary_edges) {
        if (remap[e.a] < 0) continue;
        e.a = remap[e.a];
        e.b = remap[e.b];
        out.boundary_edges.push_back(e);
    }
    out.h = max_edge(out);
    return out;
}

std::string validate(const Mesh& mesh) {
    const int nv = mesh.num_vertices();
    if (static_cast<int>(mesh.on_boundary.size()) != nv) return "on_boundary size mismatch";
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        for (int v : mesh.triangles[t]) {
            if (v < 0 || v >= nv) return "triangle index out of range";
        }
        if (!(mesh.triangle_area(t) > 0.0)) return "triangle " + std::to_string(t) + " has non-positive area";
    }
    std::unordered_map<std::uint64_t, int> directed;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int i = 0; i < 3; ++i) {
            const std::uint64_t k = (static_cast<std::uint64_t>(tri[i]) << 32) | static_cast<std::uint32_t>(tri[(i + 1) % 3]);
            if (directed.count(k)) return "directed edge used twice (non-manifold or inconsistent orientation)";
            directed[k] = t;
        }
    }
    std::unordered_set<std::uint64_t> bset;
    std::unordered_map<int, int> out_deg, in_deg;
    for (const auto& e : mesh.boundary_edges) {
        const std::uint64_t k = (static_cast<std::uint64_t>(e.a) << 32) | static_cast<std::uint32_t>(e.b);
        if (!directed.count(k)) return "boundary edge not in a triangle with the domain on its left";
        const std::uint64_t rev = (static_cast<std::uint64_t>(e.b) << 32) | static_cast<std::uint32_t>(e.a);
        if (directed.count(rev)) return "boundary edge shared by two triangles";
        bset.insert(k);
        ++out_deg[e.a];
        ++in_deg[e.b];
        if (!mesh.on_boundary[e.a] || !mesh.on_boundary[e.b]) return "boundary vertex flag missing";
    }
    for (const auto& [v, d] : out_deg) {
        if (d != 1 || in_deg[v] != 1) return "boundary edges do not form closed loops";
    }
    if (in_deg.size() != out_deg.size()) return "boundary edges do not form closed loops";
    // Every edge with only one triangle must be a boundary edge.
    for (const auto& [k, t] : directed) {
        const int a = static_cast<int>(k >> 32);
        const int b = static_cast<int>(k & 0xffffffffu);
        const std::uint64_t rev = (static_cast<std::uint64_t>(b) << 32) | static_cast<std::uint32_t>(a);
        if (!directed.count(rev) && !bset.count(k)) return "hanging edge not marked as boundary";
    }
    for (int v = 0; v < nv; ++v) {
        if (mesh.on_boundary[v] && !out_deg.count(v)) return "vertex flagged boundary without a boundary edge";
    }
    return {};
}

void write_off(const Mesh& mesh, std::ostream& os) {
    char buf[96];
    os << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_triangles() << " 0\n";
    for (const auto& p : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", p.x, p.y);
        os << buf;
    }
    for (const auto& t : mesh.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace lelab
