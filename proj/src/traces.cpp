#include "lelab/traces.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

namespace lelab {

const char* to_string(TraceMethod m) {
    return m == TraceMethod::raw_gradient ? "raw-gradient" : "variational-flux";
}

double BoundaryTrace::perimeter() const {
    double s = 0;
    for (const auto& e : edges) s += e.weight;
    return s;
}

double BoundaryTrace::total_flux() const {
    double s = 0;
    for (const auto& e : edges) s += e.g * e.weight;
    return s;
}

double BoundaryTrace::max_abs() const {
    double m = 0;
    for (const auto& e : edges) m = std::max(m, std::abs(e.g));
    return m;
}

double BoundaryTrace::sign_violation() const {
    const double m = max_abs();
    if (m == 0) return 0;
    double p = 0;
    for (const auto& e : edges) p = std::max(p, e.g);
    return p / m;
}

namespace {

BoundaryTrace skeleton(const Mesh& mesh, TraceMethod method) {
    BoundaryTrace tr;
    tr.method = method;
    tr.edges.reserve(mesh.boundary_edges.size());
    for (const auto& be : mesh.boundary_edges) {
        TraceEdge e;
        e.a = mesh.vertices[be.a];
        e.b = mesh.vertices[be.b];
        e.midpoint = 0.5 * (e.a + e.b);
        e.normal = be.normal;
        e.weight = be.length;
        e.g = 0;
        tr.edges.push_back(e);
    }
    return tr;
}

void raw_gradient(const Mesh& mesh, const std::vector<double>& u, BoundaryTrace& tr) {
    // directed edge a->b belongs to the ccw triangle on its left
    std::map<std::pair<int, int>, int> owner;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& T = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) owner[{T[k], T[(k + 1) % 3]}] = t;
    }
    for (size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
        const auto& be = mesh.boundary_edges[i];
        const auto it = owner.find({be.a, be.b});
        if (it == owner.end()) throw TraceError("boundary edge without an adjacent triangle");
        tr.edges[i].g = dot(be.normal, triangle_gradient(mesh, u, it->second));
    }
}

void variational_flux(const Mesh& mesh, const std::vector<double>& u, double lambda, double q, BoundaryTrace& tr) {
    const DofMap all = DofMap::all(mesh);
    const CsrMatrix K = assemble_stiffness(mesh, all);
    const auto Ku = K * u;
    const auto load = lq_load(mesh, all, u, q);
    std::vector<double> w(mesh.num_vertices(), 0.0);
    for (const auto& be : mesh.boundary_edges) {
        w[be.a] += 0.5 * be.length;
        w[be.b] += 0.5 * be.length;
    }
    std::vector<double> F(mesh.num_vertices(), 0.0);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (!mesh.on_boundary[v]) continue;
        F[v] = (Ku[v] - lambda * load[v]) / w[v];
    }
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (!mesh.on_boundary[v]) continue;
        tr.nodes.push_back(v);
        tr.node_flux.push_back(F[v]);
        tr.node_weight.push_back(w[v]);
    }
    for (size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
        const auto& be = mesh.boundary_edges[i];
        tr.edges[i].g = 0.5 * (F[be.a] + F[be.b]);
    }
}

}  // namespace

BoundaryTrace normal_derivative(const Mesh& mesh, const std::vector<double>& u, double lambda, double q,
                                TraceMethod method) {
    if (static_cast<int>(u.size()) != mesh.num_vertices()) throw TraceError("field size does not match the mesh");
    BoundaryTrace tr = skeleton(mesh, method);
    if (method == TraceMethod::raw_gradient)
        raw_gradient(mesh, u, tr);
    else
        variational_flux(mesh, u, lambda, q, tr);
    return tr;
}

BoundaryTrace normal_derivative(const GroundState& gs, TraceMethod method) {
    if (!gs.u.mesh || !(gs.lambda > 0)) throw TraceError("ground state has not been solved");
    return normal_derivative(*gs.u.mesh, gs.u.values, gs.lambda, gs.q, method);
}

double boundary_integral_sq(const BoundaryTrace& tr) {
    double s = 0;
    for (const auto& e : tr.edges) s += e.g * e.g * e.weight;
    return s;
}

double pohozaev_integral(const BoundaryTrace& tr, Vec2 origin) {
    double s = 0;
    for (const auto& e : tr.edges) s += e.g * e.g * dot(e.midpoint - origin, e.normal) * e.weight;
    return s;
}

double weighted_boundary_integral(const BoundaryTrace& tr, const std::function<Vec2(Vec2)>& field) {
    double s = 0;
    for (const auto& e : tr.edges) s += e.g * e.g * dot(e.normal, field(e.midpoint)) * e.weight;
    return s;
}

double expected_total_flux(const GroundState& gs) {
    const Mesh& m = gs.mesh();
    const auto load = lq_load(m, DofMap::all(m), gs.u.values, gs.q);
    double s = 0;
    for (double v : load) s += v;
    return -gs.lambda * s;
}

void write_trace_csv(const BoundaryTrace& tr, std::ostream& os) {
    os << "s_arclength,x,y,nu_x,nu_y,g\n";
    double s = 0;
    char buf[256];
    for (const auto& e : tr.edges) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s + 0.5 * e.weight, e.midpoint.x,
                      e.midpoint.y, e.normal.x, e.normal.y, e.g);
        os << buf;
        s += e.weight;
    }
}

}  // namespace lelab
