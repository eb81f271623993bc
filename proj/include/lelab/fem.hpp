#pragma once

#include <array>
#include <memory>
#include <stdexcept>
#include <vector>

#include "lelab/mesh.hpp"

namespace lelab {

class FemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Symmetric sparse matrix, compressed rows with sorted columns.
struct CsrMatrix {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;

    void multiply(const std::vector<double>& x, std::vector<double>& y) const;
    std::vector<double> operator*(const std::vector<double>& x) const;
    double quadratic_form(const std::vector<double>& x) const;
    double at(int i, int j) const;
    std::vector<double> diagonal() const;
};

/// Vertex <-> unknown numbering. interior() drops Dirichlet (boundary) vertices.
struct DofMap {
    std::vector<int> dof_of_vertex;  // -1 for eliminated vertices
    std::vector<int> vertex_of_dof;

    int size() const { return static_cast<int>(vertex_of_dof.size()); }
    static DofMap interior(const Mesh& mesh);
    static DofMap all(const Mesh& mesh);

    std::vector<double> restrict(const std::vector<double>& nodal) const;
    /// Scatter to all vertices, zero elsewhere.
    std::vector<double> extend(const std::vector<double>& dofs, int num_vertices) const;
};

using Mat3 = std::array<std::array<double, 3>, 3>;
Mat3 element_stiffness(Vec2 p0, Vec2 p1, Vec2 p2);
Mat3 element_mass(Vec2 p0, Vec2 p1, Vec2 p2);

CsrMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs);
CsrMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs);

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients to ||Ax - b|| <= tol ||b||.
/// Throws FemError after 50 sqrt(n) iterations (at least 200).
std::vector<double> solve_spd(const CsrMatrix& A, const std::vector<double>& b, double tol,
                              SolveStats* stats = nullptr, const std::vector<double>* x0 = nullptr);

/// Nodal values over all mesh vertices; boundary entries are exactly zero for H1_0 fields.
struct FemField {
    std::shared_ptr<const Mesh> mesh;
    std::vector<double> values;
};

/// 3-point interior rule, barycentric (2/3, 1/6, 1/6) and permutations, weights |T|/3.
constexpr std::array<std::array<double, 3>, 3> kQuadBary = {{{2.0 / 3, 1.0 / 6, 1.0 / 6},
                                                             {1.0 / 6, 2.0 / 3, 1.0 / 6},
                                                             {1.0 / 6, 1.0 / 6, 2.0 / 3}}};

/// integral of |u|^q with the 3-point rule applied to the linear interpolant.
double lq_integral(const Mesh& mesh, const std::vector<double>& u, double q);
double lq_norm(const FemField& u, double q);
double dirichlet_energy(const FemField& u);
double dirichlet_energy(const Mesh& mesh, const std::vector<double>& u);

/// Load vector of |u|^{q-2} u with the same rule, so u . lq_load(u) equals lq_integral(u).
/// At q = 1 the nonlinearity is taken as 1 (non-negative fields), giving the integrals of the hat functions.
std::vector<double> lq_load(const Mesh& mesh, const DofMap& dofs, const std::vector<double>& u, double q);

/// Constant gradient of the interpolant on triangle t.
Vec2 triangle_gradient(const Mesh& mesh, const std::vector<double>& u, int t);

/// Discrete harmonic extension of boundary values (entries at interior vertices are ignored).
std::vector<double> harmonic_extension(const Mesh& mesh, const std::vector<double>& nodal, double tol = 1e-12);

/// Evaluates P1 interpolants at arbitrary points; bucket grid over the triangles.
class PointLocator {
public:
    explicit PointLocator(std::shared_ptr<const Mesh> mesh);
    /// Triangle containing p (with slack tol in barycentric coordinates), -1 if none.
    int find(Vec2 p, std::array<double, 3>* bary = nullptr, double tol = 1e-12) const;
    /// NaN outside the mesh.
    double evaluate(const std::vector<double>& u, Vec2 p) const;

private:
    std::shared_ptr<const Mesh> mesh_;
    Box box_;
    int nx_ = 1, ny_ = 1;
    double cell_ = 1.0;
    std::vector<std::vector<int>> buckets_;
};

/// Boundary vertices moved by t times the outward normal of dom at the nearest boundary point,
/// interior vertices by the harmonic extension of that displacement. Same topology as the input.
Mesh offset_mesh(const Mesh& mesh, const Domain& dom, double t);

}  // namespace lelab
