#include "lelab/fem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lelab {

void CsrMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

std::vector<double> CsrMatrix::operator*(const std::vector<double>& x) const {
    std::vector<double> y;
    multiply(x, y);
    return y;
}

double CsrMatrix::quadratic_form(const std::vector<double>& x) const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double r = 0.0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) r += val[k] * x[col[k]];
        s += x[i] * r;
    }
    return s;
}

double CsrMatrix::at(int i, int j) const {
    const auto first = col.begin() + row_ptr[i];
    const auto last = col.begin() + row_ptr[i + 1];
    const auto it = std::lower_bound(first, last, j);
    return (it != last && *it == j) ? val[it - col.begin()] : 0.0;
}

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = at(i, i);
    return d;
}

DofMap DofMap::interior(const Mesh& mesh) {
    DofMap m;
    m.dof_of_vertex.assign(mesh.vertices.size(), -1);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (mesh.on_boundary[v]) continue;
        m.dof_of_vertex[v] = m.size();
        m.vertex_of_dof.push_back(v);
    }
    return m;
}

DofMap DofMap::all(const Mesh& mesh) {
    DofMap m;
    m.dof_of_vertex.resize(mesh.vertices.size());
    m.vertex_of_dof.resize(mesh.vertices.size());
    for (int v = 0; v < mesh.num_vertices(); ++v) m.dof_of_vertex[v] = m.vertex_of_dof[v] = v;
    return m;
}

std::vector<double> DofMap::restrict(const std::vector<double>& nodal) const {
    std::vector<double> x(size());
    for (int i = 0; i < size(); ++i) x[i] = nodal[vertex_of_dof[i]];
    return x;
}

std::vector<double> DofMap::extend(const std::vector<double>& dofs, int num_vertices) const {
    std::vector<double> u(num_vertices, 0.0);
    for (int i = 0; i < size(); ++i) u[vertex_of_dof[i]] = dofs[i];
    return u;
}

Mat3 element_stiffness(Vec2 p0, Vec2 p1, Vec2 p2) {
    const Vec2 p[3] = {p0, p1, p2};
    const double area = 0.5 * orient(p0, p1, p2);
    double b[3], c[3];
    for (int i = 0; i < 3; ++i) {
        b[i] = p[(i + 1) % 3].y - p[(i + 2) % 3].y;
        c[i] = p[(i + 2) % 3].x - p[(i + 1) % 3].x;
    }
    Mat3 k{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
    return k;
}

Mat3 element_mass(Vec2 p0, Vec2 p1, Vec2 p2) {
    const double area = 0.5 * orient(p0, p1, p2);
    Mat3 m{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
    return m;
}

namespace {

CsrMatrix sparsity(const Mesh& mesh, const DofMap& dofs) {
    const int n = dofs.size();
    std::vector<std::vector<int>> rows(n);
    for (int i = 0; i < n; ++i) rows[i].push_back(i);
    for (const auto& e : mesh_edges(mesh)) {
        const int a = dofs.dof_of_vertex[e[0]];
        const int b = dofs.dof_of_vertex[e[1]];
        if (a < 0 || b < 0) continue;
        rows[a].push_back(b);
        rows[b].push_back(a);
    }
    CsrMatrix A;
    A.n = n;
    A.row_ptr.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) {
        std::sort(rows[i].begin(), rows[i].end());
        A.row_ptr[i + 1] = A.row_ptr[i] + static_cast<int>(rows[i].size());
    }
    A.col.reserve(A.row_ptr[n]);
    for (const auto& r : rows) A.col.insert(A.col.end(), r.begin(), r.end());
    A.val.assign(A.col.size(), 0.0);
    return A;
}

template <class Element>
CsrMatrix assemble(const Mesh& mesh, const DofMap& dofs, Element element) {
    CsrMatrix A = sparsity(mesh, dofs);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2 p0 = mesh.vertices[tri[0]], p1 = mesh.vertices[tri[1]], p2 = mesh.vertices[tri[2]];
        const double area = 0.5 * orient(p0, p1, p2);
        if (!(area > 1e-14 * mesh.h * mesh.h)) throw FemError("degenerate triangle in assembly");
        const Mat3 k = element(p0, p1, p2);
        for (int i = 0; i < 3; ++i) {
            const int r = dofs.dof_of_vertex[tri[i]];
            if (r < 0) continue;
            for (int j = 0; j < 3; ++j) {
                const int c = dofs.dof_of_vertex[tri[j]];
                if (c < 0) continue;
                const auto first = A.col.begin() + A.row_ptr[r];
                const auto last = A.col.begin() + A.row_ptr[r + 1];
                A.val[std::lower_bound(first, last, c) - A.col.begin()] += k[i][j];
            }
        }
    }
    return A;
}

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

CsrMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs) { return assemble(mesh, dofs, element_stiffness); }
CsrMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs) { return assemble(mesh, dofs, element_mass); }

std::vector<double> solve_spd(const CsrMatrix& A, const std::vector<double>& b, double tol, SolveStats* stats,
                              const std::vector<double>* x0) {
    if (!(tol > 0.0)) throw FemError("solve_spd needs tol > 0");
    const int n = A.n;
    std::vector<double> x = x0 ? *x0 : std::vector<double>(n, 0.0);
    const double bnorm = std::sqrt(dotv(b, b));
    if (bnorm == 0.0) {
        if (stats) *stats = {0, 0.0};
        return std::vector<double>(n, 0.0);
    }
    const auto d = A.diagonal();
    for (double v : d) {
        if (!(v > 0.0)) throw FemError("non-positive diagonal entry in SPD solve");
    }
    std::vector<double> r(n), z(n), p(n), Ap(n);
    A.multiply(x, Ap);
    for (int i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
    for (int i = 0; i < n; ++i) z[i] = r[i] / d[i];
    p = z;
    double rz = dotv(r, z);
    const int max_it = std::max(200, static_cast<int>(50.0 * std::sqrt(static_cast<double>(n))));
    for (int it = 0; it <= max_it; ++it) {
        const double rnorm = std::sqrt(dotv(r, r));
        if (rnorm <= tol * bnorm) {
            // Confirm with the true residual; recursion drift can fake convergence.
            A.multiply(x, Ap);
            double true_r = 0.0;
            for (int i = 0; i < n; ++i) true_r += (b[i] - Ap[i]) * (b[i] - Ap[i]);
            true_r = std::sqrt(true_r);
            if (true_r <= tol * bnorm) {
                if (stats) *stats = {it, true_r / bnorm};
                return x;
            }
            for (int i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
            for (int i = 0; i < n; ++i) z[i] = r[i] / d[i];
            p = z;
            rz = dotv(r, z);
        }
        A.multiply(p, Ap);
        const double pAp = dotv(p, Ap);
        if (!(pAp > 0.0)) throw FemError("matrix is not positive definite (p'Ap <= 0 in CG)");
        const double alpha = rz / pAp;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        for (int i = 0; i < n; ++i) z[i] = r[i] / d[i];
        const double rz_new = dotv(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw FemError("conjugate gradients did not converge within 50 sqrt(n) iterations");
}

double lq_integral(const Mesh& mesh, const std::vector<double>& u, double q) {
    double s = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double w = mesh.triangle_area(t) / 3.0;
        for (const auto& lam : kQuadBary) {
            const double v = lam[0] * u[tri[0]] + lam[1] * u[tri[1]] + lam[2] * u[tri[2]];
            s += w * (q == 2.0 ? v * v : std::pow(std::abs(v), q));
        }
    }
    return s;
}

double lq_norm(const FemField& u, double q) { return std::pow(lq_integral(*u.mesh, u.values, q), 1.0 / q); }

double dirichlet_energy(const Mesh& mesh, const std::vector<double>& u) {
    double s = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Vec2 g = triangle_gradient(mesh, u, t);
        s += norm2(g) * mesh.triangle_area(t);
    }
    return s;
}

double dirichlet_energy(const FemField& u) { return dirichlet_energy(*u.mesh, u.values); }

std::vector<double> lq_load(const Mesh& mesh, const DofMap& dofs, const std::vector<double>& u, double q) {
    std::vector<double> b(dofs.size(), 0.0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double w = mesh.triangle_area(t) / 3.0;
        for (const auto& lam : kQuadBary) {
            const double v = lam[0] * u[tri[0]] + lam[1] * u[tri[1]] + lam[2] * u[tri[2]];
            double f;
            if (q == 1.0) f = 1.0;
            else if (q == 2.0) f = v;
            else f = v == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(v), q - 1.0), v);
            for (int i = 0; i < 3; ++i) {
                const int r = dofs.dof_of_vertex[tri[i]];
                if (r >= 0) b[r] += w * f * lam[i];
            }
        }
    }
    return b;
}

Vec2 triangle_gradient(const Mesh& mesh, const std::vector<double>& u, int t) {
    const auto& tri = mesh.triangles[t];
    const Vec2 p0 = mesh.vertices[tri[0]], p1 = mesh.vertices[tri[1]], p2 = mesh.vertices[tri[2]];
    const double two_area = orient(p0, p1, p2);
    const Vec2 p[3] = {p0, p1, p2};
    Vec2 g;
    for (int i = 0; i < 3; ++i) {
        const double b = p[(i + 1) % 3].y - p[(i + 2) % 3].y;
        const double c = p[(i + 2) % 3].x - p[(i + 1) % 3].x;
        g += Vec2(b, c) * (u[tri[i]] / two_area);
    }
    return g;
}

std::vector<double> harmonic_extension(const Mesh& mesh, const std::vector<double>& nodal, double tol) {
    const DofMap dofs = DofMap::interior(mesh);
    const CsrMatrix A = assemble_stiffness(mesh, dofs);
    // rhs = -K_{IB} g
    std::vector<double> rhs(dofs.size(), 0.0);
    for (const auto& tri : mesh.triangles) {
        const Mat3 k = element_stiffness(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
        for (int i = 0; i < 3; ++i) {
            const int r = dofs.dof_of_vertex[tri[i]];
            if (r < 0) continue;
            for (int j = 0; j < 3; ++j) {
                if (dofs.dof_of_vertex[tri[j]] >= 0) continue;
                rhs[r] -= k[i][j] * nodal[tri[j]];
            }
        }
    }
    const auto x = solve_spd(A, rhs, tol);
    std::vector<double> out = nodal;
    for (int i = 0; i < dofs.size(); ++i) out[dofs.vertex_of_dof[i]] = x[i];
    return out;
}

PointLocator::PointLocator(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
    const auto& m = *mesh_;
    box_ = {m.vertices.front(), m.vertices.front()};
    for (auto p : m.vertices) {
        box_.lo = {std::min(box_.lo.x, p.x), std::min(box_.lo.y, p.y)};
        box_.hi = {std::max(box_.hi.x, p.x), std::max(box_.hi.y, p.y)};
    }
    const double target = std::sqrt(box_.width() * box_.height() / std::max(1, m.num_triangles()) * 2.0);
    cell_ = std::max(target, 1e-300);
    nx_ = std::max(1, static_cast<int>(std::ceil(box_.width() / cell_)));
    ny_ = std::max(1, static_cast<int>(std::ceil(box_.height() / cell_)));
    buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (int t = 0; t < m.num_triangles(); ++t) {
        const auto& tri = m.triangles[t];
        double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
        for (int v : tri) {
            x0 = std::min(x0, m.vertices[v].x);
            x1 = std::max(x1, m.vertices[v].x);
            y0 = std::min(y0, m.vertices[v].y);
            y1 = std::max(y1, m.vertices[v].y);
        }
        const int i0 = std::clamp(static_cast<int>((x0 - box_.lo.x) / cell_), 0, nx_ - 1);
        const int i1 = std::clamp(static_cast<int>((x1 - box_.lo.x) / cell_), 0, nx_ - 1);
        const int j0 = std::clamp(static_cast<int>((y0 - box_.lo.y) / cell_), 0, ny_ - 1);
        const int j1 = std::clamp(static_cast<int>((y1 - box_.lo.y) / cell_), 0, ny_ - 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
    }
}

int PointLocator::find(Vec2 p, std::array<double, 3>* bary, double tol) const {
    const auto& m = *mesh_;
    const double slack = tol * cell_;
    if (p.x < box_.lo.x - slack || p.x > box_.hi.x + slack || p.y < box_.lo.y - slack || p.y > box_.hi.y + slack)
        return -1;
    const int i = std::clamp(static_cast<int>((p.x - box_.lo.x) / cell_), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>((p.y - box_.lo.y) / cell_), 0, ny_ - 1);
    int best = -1;
    double best_min = -std::numeric_limits<double>::infinity();
    std::array<double, 3> best_l{};
    for (int t : buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
        const auto& tri = m.triangles[t];
        const Vec2 a = m.vertices[tri[0]], b = m.vertices[tri[1]], c = m.vertices[tri[2]];
        const double area2 = orient(a, b, c);
        const std::array<double, 3> l = {orient(p, b, c) / area2, orient(a, p, c) / area2, orient(a, b, p) / area2};
        const double mn = std::min({l[0], l[1], l[2]});
        if (mn > best_min) {
            best_min = mn;
            best = t;
            best_l = l;
        }
    }
    if (best < 0 || best_min < -tol) return -1;
    if (bary) *bary = best_l;
    return best;
}

double PointLocator::evaluate(const std::vector<double>& u, Vec2 p) const {
    std::array<double, 3> l;
    const int t = find(p, &l);
    if (t < 0) return std::numeric_limits<double>::quiet_NaN();
    const auto& tri = mesh_->triangles[t];
    return l[0] * u[tri[0]] + l[1] * u[tri[1]] + l[2] * u[tri[2]];
}

Mesh offset_mesh(const Mesh& mesh, const Domain& dom, double t) {
    if (t == 0.0) return mesh;
    std::vector<double> dx(mesh.vertices.size(), 0.0), dy(mesh.vertices.size(), 0.0);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (!mesh.on_boundary[v]) continue;
        const Vec2 n = outward_normal(dom, mesh.vertices[v]);
        dx[v] = t * n.x;
        dy[v] = t * n.y;
    }
    const auto ex = harmonic_extension(mesh, dx);
    const auto ey = harmonic_extension(mesh, dy);
    std::vector<Vec2> moved(mesh.vertices.size());
    for (int v = 0; v < mesh.num_vertices(); ++v) moved[v] = mesh.vertices[v] + Vec2(ex[v], ey[v]);
    return with_vertices(mesh, std::move(moved));
}

}  // namespace lelab
