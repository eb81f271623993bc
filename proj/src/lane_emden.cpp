#include "lelab/lane_emden.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lelab/json_writer.hpp"

namespace lelab {

double alpha(double q, int d) {
    if (!(q >= 1.0 && q <= 2.0)) throw std::invalid_argument("q must lie in [1, 2]");
    if (d < 1) throw std::invalid_argument("dimension must be positive");
    return 1.0 / (2.0 + d * (2.0 / q - 1.0));
}

double linfty_exponent(double q, int d) {
    if (!(q >= 1.0 && q <= 2.0)) throw std::invalid_argument("q must lie in [1, 2]");
    return d / (2.0 * d - q * (d - 2.0));
}

std::string GroundState::to_json() const {
    JsonWriter w;
    w.begin_object();
    w.field("q", q).field("lambda", lambda).field("alpha_q", alpha_q).field("h", h);
    w.field("iterations", iterations);
    w.key("residuals").begin_object();
    w.field("rayleigh_gap", residuals.rayleigh_gap);
    w.field("el_residual", residuals.el_residual);
    w.field("normalization_error", residuals.normalization_error);
    w.end_object();
    w.field("normalization", u.mesh ? lq_norm(u, q) : 0.0);
    w.field("num_vertices", u.mesh ? u.mesh->num_vertices() : 0);
    w.end_object();
    return w.str();
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using VecX = Eigen::VectorXd;

SpMat to_eigen(const CsrMatrix& A) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(A.val.size());
    for (int i = 0; i < A.n; ++i)
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) t.emplace_back(i, A.col[k], A.val[k]);
    SpMat S(A.n, A.n);
    S.setFromTriplets(t.begin(), t.end());
    return S;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}


struct Problem {
    const Mesh& mesh;
    DofMap dofs;
    CsrMatrix A;
    Eigen::SimplicialLLT<SpMat> llt;
    double q;

    Problem(const Mesh& m, double q_) : mesh(m), dofs(DofMap::interior(m)), A(assemble_stiffness(m, dofs)), q(q_) {
        if (dofs.size() == 0) throw SolverError("mesh has no interior vertices");
        llt.compute(to_eigen(A));
        if (llt.info() != Eigen::Success) throw SolverError("stiffness factorization failed");
    }

    std::vector<double> nodal(const std::vector<double>& x) const { return dofs.extend(x, mesh.num_vertices()); }

    std::vector<double> load(const std::vector<double>& x) const { return lq_load(mesh, dofs, nodal(x), q); }

    std::vector<double> solve(const std::vector<double>& b) const {
        const VecX x = llt.solve(Eigen::Map<const VecX>(b.data(), b.size()));
        return {x.data(), x.data() + x.size()};
    }

    double qnorm(const std::vector<double>& x) const { return std::pow(lq_integral(mesh, nodal(x), q), 1.0 / q); }

    void normalize(std::vector<double>& x) const {
        const double n = qnorm(x);
        if (!(n > 0)) throw SolverError("iterate vanished");
        for (double& v : x) v /= n;
    }

    // energy of a q-normalized iterate
    double rayleigh(const std::vector<double>& x) const { return A.quadratic_form(x); }

    double el_residual(const std::vector<double>& x, double lambda) const {
        const auto b = load(x);
        const auto Ax = A * x;
        double r = 0, bn = 0;
        for (size_t i = 0; i < x.size(); ++i) {
            r += (Ax[i] - lambda * b[i]) * (Ax[i] - lambda * b[i]);
            bn += lambda * lambda * b[i] * b[i];
        }
        return std::sqrt(r / bn);
    }
};

GroundState finish(const Problem& P, std::shared_ptr<const Mesh> mesh, std::vector<double> x, double lambda,
                   int iterations, std::vector<double> history) {
    GroundState gs;
    gs.q = P.q;
    gs.alpha_q = alpha(P.q);
    gs.h = mesh->h;
    gs.lambda = lambda;
    gs.iterations = iterations;
    gs.rayleigh_history = std::move(history);
    const double nq = P.qnorm(x);
    gs.residuals.normalization_error = std::abs(nq - 1.0);
    gs.residuals.rayleigh_gap = std::abs(lambda - P.A.quadratic_form(x) / (nq * nq)) / lambda;
    gs.residuals.el_residual = P.el_residual(x, lambda);
    double mn = std::numeric_limits<double>::infinity(), mx = 0;
    for (double v : x) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    gs.min_interior = mn;
    if (mn < -1e-10 * mx) {
        std::ostringstream os;
        os << "ground state changes sign (min " << mn << ", max " << mx << "); mesh is not acute enough";
        throw SolverError(os.str());
    }
    gs.u = FemField{std::move(mesh), P.nodal(x)};
    return gs;
}

}  // namespace

GroundState solve_ground_state(std::shared_ptr<const Mesh> mesh, double q, const SolveOptions& opt) {
    if (!mesh) throw SolverError("null mesh");
    if (!(q >= 1.0 && q <= 2.0)) throw SolverError("q must lie in [1, 2]");
    if (!opt.allow_disconnected && connected_components(*mesh) > 1)
        throw SolverError("mesh is disconnected; solve the components and combine them");

    const Problem P(*mesh, q);
    const int n = P.dofs.size();

    if (q == 1.0) {
        // torsion: one solve with the constant load
        const std::vector<double> b = P.load(std::vector<double>(n, 1.0));
        std::vector<double> v = P.solve(b);
        const double bv = dot(b, v);
        if (!(bv > 0)) throw SolverError("torsion solve produced a non-positive integral");
        for (double& x : v) x /= bv;
        const double lambda = 1.0 / bv;
        return finish(P, std::move(mesh), std::move(v), lambda, 1, {lambda});
    }

    // q in (1, 2]: u <- A^{-1} |u|^{q-2}u, normalized; inverse iteration at q = 2.
    std::vector<double> u(n, 1.0);
    P.normalize(u);
    double lambda = P.rayleigh(u);
    std::vector<double> history{lambda};
    for (int it = 1; it <= opt.max_iterations; ++it) {
        std::vector<double> w = P.solve(P.load(u));
        P.normalize(w);
        double theta = 1.0;
        double lw = P.rayleigh(w);
        std::vector<double> cand = w;
        int bt = 0;
        while (lw > lambda * (1.0 + 1e-13) && bt < opt.max_backtracks) {
            theta *= 0.5;
            ++bt;
            for (int i = 0; i < n; ++i) cand[i] = (1.0 - theta) * u[i] + theta * w[i];
            P.normalize(cand);
            lw = P.rayleigh(cand);
        }
        if (lw > lambda * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "Rayleigh quotient increased at iteration " << it << ": " << lambda << " -> " << lw;
            throw SolverError(os.str());
        }
        const double change = std::abs(lambda - lw) / lw;
        u = std::move(cand);
        lambda = lw;
        history.push_back(lambda);
        if (change <= opt.tol && P.el_residual(u, lambda) <= opt.el_tol)
            return finish(P, std::move(mesh), std::move(u), lambda, it, std::move(history));
    }
    std::ostringstream os;
    os << "no convergence after " << opt.max_iterations << " iterations (lambda " << lambda << ", residual "
       << P.el_residual(u, lambda) << ")";
    throw SolverError(os.str());
}

UnionResult solve_union(const std::vector<double>& lam, double q) {
    if (lam.empty()) throw SolverError("empty union");
    if (!(q >= 1.0 && q <= 2.0)) throw SolverError("q must lie in [1, 2]");
    for (double l : lam)
        if (!(l > 0)) throw SolverError("component values must be positive");
    UnionResult r;
    const int k = static_cast<int>(lam.size());
    r.achiever = static_cast<int>(std::min_element(lam.begin(), lam.end()) - lam.begin());
    const double lmin = lam[r.achiever];
    if (q >= 2.0) {
        r.lambda = lmin;
        r.weights.assign(k, 0.0);
        r.weights[r.achiever] = 1.0;
        for (int j = 0; j < k; ++j)
            if (j != r.achiever && std::abs(lam[j] - lmin) <= 1e-8 * lmin) r.tie = true;
        return r;
    }
    // lambda^{-e} = sum lambda_j^{-e}, e = q/(2-q); log-sum-exp keeps q near 2 finite
    const double e = q / (2.0 - q);
    double s = 0;
    for (double l : lam) s += std::exp(-e * (std::log(l) - std::log(lmin)));
    r.lambda = lmin * std::exp(-std::log(s) / e);
    r.weights.resize(k);
    for (int j = 0; j < k; ++j) r.weights[j] = std::exp((std::log(r.lambda) - std::log(lam[j])) / (2.0 - q));
    return r;
}

UnionResult solve_union(const std::vector<GroundState>& comps, double q) {
    std::vector<double> lam;
    for (const auto& g : comps) lam.push_back(g.lambda);
    return solve_union(lam, q);
}

Extrapolation extrapolate_lambda(double a, double b, double c) {
    const double d1 = a - b, d2 = b - c;
    if (!(d1 != 0 && d2 != 0 && (d1 > 0) == (d2 > 0)))
        throw SolverError("refinement sequence is not monotone");
    const double ratio = d1 / d2;
    if (!(ratio > 1.0)) throw SolverError("refinement differences do not contract");
    const double p = std::log2(ratio);
    return {c - d2 / (ratio - 1.0), p};
}

Extrapolation extrapolate_or_last(const std::vector<double>& v, bool* ok) {
    if (ok) *ok = false;
    if (v.empty()) throw SolverError("no values");
    if (v.size() < 3) return {v.back(), 0.0};
    const size_t n = v.size();
    try {
        const Extrapolation e = extrapolate_lambda(v[n - 3], v[n - 2], v[n - 1]);
        if (ok) *ok = true;
        return e;
    } catch (const SolverError&) {
        return {v.back(), 0.0};
    }
}

LinftyReport linfty_bound_check(const GroundState& gs, double bound) {
    LinftyReport r;
    r.max_u = *std::max_element(gs.u.values.begin(), gs.u.values.end());
    r.lambda = gs.lambda;
    r.exponent = linfty_exponent(gs.q);
    r.ratio = r.max_u / std::pow(gs.lambda, r.exponent);
    r.bound = bound;
    r.pass = r.ratio <= bound;
    return r;
}

std::vector<GroundState> solve_nested(const Mesh& base, int levels, double q, const SolveOptions& opt,
                                     const Domain* dom) {
    std::vector<GroundState> out;
    auto m = std::make_shared<const Mesh>(base);
    for (int l = 0; l < levels; ++l) {
        out.push_back(solve_ground_state(m, q, opt));
        if (l + 1 < levels) m = std::make_shared<const Mesh>(dom ? refine(*m, *dom) : refine(*m));
    }
    return out;
}

}  // namespace lelab
