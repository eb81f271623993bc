#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "lelab/fem.hpp"

namespace lelab {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// (2 + d (2/q - 1))^{-1}; throws outside 1 <= q <= 2 or d < 1.
double alpha(double q, int d = 2);

/// d / (2d - q(d - 2)); equals 1/2 in the plane for every q.
double linfty_exponent(double q, int d = 2);

struct GroundStateResiduals {
    double rayleigh_gap = 0.0;         // |lambda - energy / ||u||_q^2| / lambda
    double el_residual = 0.0;          // ||A u - lambda M_q(u)|| / ||lambda M_q(u)||
    double normalization_error = 0.0;  // | ||u||_q - 1 |
};

struct GroundState {
    double q = 2.0;
    double lambda = 0.0;
    double alpha_q = 0.5;
    double h = 0.0;
    int iterations = 0;
    FemField u;
    GroundStateResiduals residuals;
    std::vector<double> rayleigh_history;
    double min_interior = 0.0;

    const Mesh& mesh() const { return *u.mesh; }
    std::string to_json() const;
};

struct SolveOptions {
    double tol = 1e-10;          // relative change of lambda between iterations
    double el_tol = 1e-8;        // residual relative to the load
    int max_iterations = 10000;
    int max_backtracks = 30;
    bool allow_disconnected = false;
};

/// Lane-Emden ground state on a mesh: inverse iteration (q = 2), one torsion solve (q = 1),
/// Rayleigh-monotone damped fixed point in between.
GroundState solve_ground_state(std::shared_ptr<const Mesh> mesh, double q, const SolveOptions& opt = {});

struct UnionResult {
    double lambda = 0.0;
    std::vector<double> weights;  // u = sum_j weights[j] u_j
    int achiever = 0;             // q = 2: index of the smallest component value
    bool tie = false;             // q = 2: minimizer not unique
};

/// Combines component values of a disjoint union.
UnionResult solve_union(const std::vector<double>& component_lambdas, double q);
UnionResult solve_union(const std::vector<GroundState>& components, double q);

struct Extrapolation {
    double value = 0.0;
    double order = 0.0;
};

/// Richardson fit lambda_h = lambda* + C h^p through values at h, h/2, h/4.
/// Throws SolverError unless the sequence is strictly monotone.
Extrapolation extrapolate_lambda(double v_h, double v_h2, double v_h4);

/// Same fit without the monotonicity requirement; falls back to the finest value when the
/// differences do not shrink geometrically. ok reports whether the fit was used.
Extrapolation extrapolate_or_last(const std::vector<double>& values, bool* ok);

struct LinftyReport {
    double max_u = 0.0;
    double lambda = 0.0;
    double exponent = 0.5;
    double ratio = 0.0;  // max_u / lambda^exponent
    double bound = 0.0;
    bool pass = false;
};

/// Empirical constant for the sup bound; see the README for the calibration.
inline constexpr double kLinftyCalibratedBound = 1.0;

LinftyReport linfty_bound_check(const GroundState& gs, double bound = kLinftyCalibratedBound);

/// Ground states on mesh, refine(mesh), ... (levels meshes in total). With dom, refinement
/// follows the curved boundary.
std::vector<GroundState> solve_nested(const Mesh& base, int levels, double q, const SolveOptions& opt = {},
                                     const Domain* dom = nullptr);

}  // namespace lelab
