#pragma once

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "lelab/lane_emden.hpp"

namespace lelab {

class TraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TraceMethod { raw_gradient, variational_flux };

const char* to_string(TraceMethod m);

struct TraceEdge {
    Vec2 a, b;
    Vec2 midpoint;
    Vec2 normal;      // outward
    double weight;    // edge length
    double g;         // normal derivative at the midpoint
};

struct BoundaryTrace {
    TraceMethod method = TraceMethod::variational_flux;
    std::vector<TraceEdge> edges;  // same order as mesh.boundary_edges
    // variational flux only: F_i per boundary vertex and the lumped weights
    std::vector<int> nodes;
    std::vector<double> node_flux;
    std::vector<double> node_weight;

    double perimeter() const;
    double total_flux() const;  // sum g * weight
    double max_abs() const;
    /// Largest positive g relative to max|g|; the ground state is non-negative so this should be ~0.
    double sign_violation() const;
};

/// Recovers du/dnu on every boundary edge.
BoundaryTrace normal_derivative(const GroundState& gs, TraceMethod method = TraceMethod::variational_flux);

/// Same recovery for an arbitrary field satisfying -Delta u = lambda |u|^{q-2} u weakly.
BoundaryTrace normal_derivative(const Mesh& mesh, const std::vector<double>& u, double lambda, double q,
                                TraceMethod method = TraceMethod::variational_flux);

double boundary_integral_sq(const BoundaryTrace& tr);
double pohozaev_integral(const BoundaryTrace& tr, Vec2 origin = {0, 0});
double weighted_boundary_integral(const BoundaryTrace& tr, const std::function<Vec2(Vec2)>& field);

/// -lambda * integral of u^{q-1}, the value the total flux must reproduce.
double expected_total_flux(const GroundState& gs);

/// Columns s_arclength, x, y, nu_x, nu_y, g; one row per edge midpoint.
void write_trace_csv(const BoundaryTrace& tr, std::ostream& os);

}  // namespace lelab
