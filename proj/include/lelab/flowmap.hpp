#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "lelab/geometry.hpp"

namespace lelab {

class FlowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unnormalized bump exp(-1/(1-r^2)) on [0,1), zero beyond.
double bump(double r);
double bump_derivative(double r);

/// C-infinity cutoff: 1 on [-1/2, 1/2], 0 outside (-1, 1).
double cutoff(double s);

/// Mollified signed-distance field X and the map x + t X(x).
class FlowField {
public:
    FlowField(Domain dom, double eps0, double eta0, int n_radial = 32, int n_angular = 32);

    const Domain& domain() const { return dom_; }
    double eps0() const { return eps0_; }
    double eta0() const { return eta0_; }

    /// Normalized mollifier profile phi(r) = c bump(r) with 2 pi int_0^1 phi r dr = 1.
    double phi(double r) const { return c_ * bump(r); }
    double phi_derivative(double r) const { return c_ * bump_derivative(r); }
    double phi_derivative_max() const { return dphi_max_; }
    /// |discrete radial-angular sum of phi - 1|.
    double normalization_error() const { return norm_error_; }

    /// Injectivity radius eps0 / (pi max|phi'|).
    double t_max() const;

    /// Central differences at step eps0 / 64.
    Vec2 grad_delta(Vec2 y) const;
    Vec2 X(Vec2 x) const;

    /// Throws FlowError for |t| >= t_max.
    Vec2 flow(double t, Vec2 x) const;
    /// Pointwise map without the injectivity guard.
    Vec2 flow_unchecked(double t, Vec2 x) const { return x + t * X(x); }

    /// det D Phi(t, .) by central differences at step eps0 / 128.
    double jacobian_det(double t, Vec2 x) const;

private:
    Domain dom_;
    double eps0_, eta0_;
    double c_ = 1.0;
    double dphi_max_ = 0.0;
    double norm_error_ = 0.0;
    std::vector<Vec2> offsets_;    // unit-disk nodes
    std::vector<double> weights_;  // phi-weighted, summing to one
};

struct FlowReport {
    std::string check;
    double epsilon0 = 0, eta0 = 0, t = 0;
    int samples = 0;
    int violations = 0;
    double max_violation = 0;  // largest amount by which the inequality fails (<= 0 when none)
    double max_X_minus_nu = 0;

    bool pass() const { return violations == 0; }
    std::string to_json() const;
};

/// |X| <= 1 + 1e-8 on an n x n grid over the bounding box enlarged by eps0 + eta0; also counts
/// nonzero X where delta < -eta0 - eps0 (bulk identity).
FlowReport check_field_bound(const FlowField& ff, int n = 256);

/// det D Phi(t, .) > 0 on an n x n grid over the enlarged bounding box.
FlowReport check_jacobian(const FlowField& ff, double t, int n = 64);

/// delta(Phi(t, x)) < t + slack on the grid of spacing eps0/8 inside Omega. The map is evaluated
/// pointwise, so t is not limited by t_max.
FlowReport check_inner_inclusion(const FlowField& ff, double t, double slack = 2e-8);

/// delta(Phi((1+delta) t, x)) >= t - slack for n boundary samples. Disks, ellipses and unions of them only.
FlowReport check_outer_inclusion(const FlowField& ff, double t, double delta, int n = 512, double slack = 2e-8);

struct OuterSweep {
    std::vector<FlowReport> runs;  // decreasing eps0
    double minimal_passing_eps0 = 0;  // largest eps0 from which every smaller one passes; 0 if none
};
OuterSweep outer_inclusion_sweep(const Domain& dom, double eta0, double t, double delta,
                                 const std::vector<double>& eps_list);

struct NormalConvergence {
    std::vector<double> eps0;
    std::vector<double> max_X_minus_nu;
    bool monotone = false;     // each term <= 1.2 x previous
    bool final_small = false;  // last term <= 0.05
};
NormalConvergence normal_convergence(const Domain& dom, double eta0, const std::vector<double>& eps_list,
                                     int n = 256);

struct CornerDisplacement {
    double theta = 0;            // interior angle
    double factor = 0;           // |Phi(t, corner) - corner| / t = |X(corner)|
    double predicted = 0;        // sqrt(2 - 2 cos theta) / 2
    double relative_gap = 0;     // |factor - predicted| / predicted
};
/// First-order displacement of a polygon corner; the eps0 ball must not reach another corner.
CornerDisplacement corner_displacement(const Domain& polygon, int corner, double eps0, double eta0);

/// eps0^{-3} int phi'(|y|/eps0) (y.nu/|y|) delta(x + y) dy at a boundary point x with outward normal nu.
double interior_normal_estimate(const FlowField& ff, Vec2 x, Vec2 nu);

}  // namespace lelab
