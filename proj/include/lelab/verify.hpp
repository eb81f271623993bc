#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lelab/lane_emden.hpp"
#include "lelab/traces.hpp"

namespace lelab {

class VerifyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

struct VerificationReport {
    std::string name;
    double q = 0;
    std::string domain;
    double lhs = 0;
    double rhs = 0;
    double tol = 0;
    std::vector<double> h_sequence;
    std::vector<bool> extrapolated;  // lhs, rhs
    std::uint64_t seed = 0;
    bool two_sided = false;  // identities: |margin| <= tol
    std::string note;        // human-readable detail, not part of the JSON schema
    std::string error;       // set when the check could not run; forces FAIL

    double margin() const { return lhs - rhs; }
    bool pass() const;
    std::string to_json() const;
};

struct VerifyOptions {
    double h0 = 0.04;         // coarsest mesh size of the nested sequence
    int levels = 3;           // h0, h0/2, h0/4
    double tol_rel = 5e-3;    // declared relative floor added to propagated errors
    std::optional<double> tol_override;  // forces every declared tolerance (command-line --tol)
    std::uint64_t seed = 0x5eed5eed5eedULL;
};

/// lambda_q of the unit disk, extrapolated from h = 0.02, 0.01, 0.005; cached per q, thread-safe.
struct BallReference {
    double lambda = 0;
    double error = 0;
};
BallReference ball_reference(double q);

/// A value extrapolated from a nested sequence with an error estimate.
struct Estimate {
    double value = 0;
    double error = 0;
    bool extrapolated = false;
};
Estimate estimate(const std::vector<double>& seq);
/// Richardson with a known convergence order p on consecutive halvings; the error is the
/// change between the last two extrapolants.
Estimate estimate_known_order(const std::vector<double>& seq, double p);
/// Boundary-integral estimate: known-order extrapolation when dom has a reentrant corner
/// (order 2 pi / omega - 1), plain Richardson otherwise.
Estimate flux_estimate(const std::vector<double>& seq, const Domain& dom);
double corner_flux_order(const Domain& dom);

/// Nested-sequence data for one domain and q. Unions are solved component-wise and recombined.
struct Sequence {
    std::vector<double> h;
    std::vector<double> lambda;
    std::vector<double> flux_sq;   // integral of g^2
    std::vector<double> pohozaev;  // integral of g^2 x.nu
    std::vector<double> sign_violation;
};
Sequence solve_sequence(const Domain& dom, double q, const VerifyOptions& opt);
/// Memoized solve_sequence keyed by domain spec, q and mesh options.
Sequence cached_sequence(const Domain& dom, double q, const VerifyOptions& opt);

/// lhs - rhs of the main inequality at each level (unextrapolated), for the tightening property.
std::vector<double> main_inequality_margins(const Domain& dom, double q, const VerifyOptions& opt = {});

/// Torsion function -Delta v = 1 by PCG on the nested meshes.
struct TorsionValues {
    std::vector<double> h;
    std::vector<double> rigidity;  // T = integral of |grad v|^2 = integral of v
    std::vector<double> flux_sq;   // integral of (dv/dn)^2
};
TorsionValues torsion_sequence(const Domain& dom, const VerifyOptions& opt = {});

VerificationReport check_main_inequality(const Domain& dom, double q, const VerifyOptions& opt = {});
VerificationReport check_q1_torsion(const Domain& dom, const VerifyOptions& opt = {});
VerificationReport check_corollary(const Domain& dom, double q, const VerifyOptions& opt = {});
VerificationReport check_pohozaev(const Domain& dom, double q, double tol_rel, const VerifyOptions& opt = {});
std::vector<VerificationReport> check_bm(const Domain& dom0, const Domain& dom1, double q,
                                         const std::vector<double>& t_list, const VerifyOptions& opt = {});

enum class FieldKind { dilation, translation, shear };
FieldKind parse_field(const std::string& s);
const char* to_string(FieldKind f);

struct HadamardValues {
    double finite_difference = 0;
    double bulk = 0;
    double boundary = 0;
    double lambda = 0;
    std::optional<double> exact;
};
HadamardValues hadamard_values(const Domain& dom, double q, FieldKind field, const std::vector<double>& t_list,
                               double h);
/// Three reports (finite difference, bulk formula, boundary formula), each against the exact
/// derivative when one is known, otherwise against the finite difference.
std::vector<VerificationReport> check_hadamard(const Domain& dom, double q, FieldKind field,
                                               const std::vector<double>& t_list, double tol_rel,
                                               const VerifyOptions& opt = {});

struct MinkowskiValues {
    std::vector<double> t;
    std::vector<double> lambda_t;
    std::vector<double> chain_bound;
    double lambda0 = 0;
    double flux_sq = 0;     // integral of g^2 on the base mesh
    double derivative = 0;  // extrapolated one-sided quotient
};
MinkowskiValues minkowski_values(const Domain& dom, double q, const std::vector<double>& t_list, double h);
/// Derivative report (two-sided, tol_rel of the flux integral) and chain-bound report (worst t).
std::vector<VerificationReport> check_minkowski_derivative(const Domain& dom, double q,
                                                           const std::vector<double>& t_list, double tol_rel,
                                                           const VerifyOptions& opt = {});

struct ColesantiResult {
    double worst = 0;  // smallest lhs - rhs over the samples
    double lhs_at_worst = 0, rhs_at_worst = 0;
    int samples = 0;
    int violations = 0;
};
ColesantiResult colesanti_sample(const Domain& dom0, const Domain& dom1, double q, double t, int n, double h,
                                 std::uint64_t seed, double tol);
VerificationReport check_colesanti(const Domain& dom0, const Domain& dom1, double q, double t, int n, double tol,
                                   const VerifyOptions& opt = {});

/// Direct solve on the disconnected mesh against the component recombination (same level).
VerificationReport check_union_reduction(const Domain& dom, double q, const VerifyOptions& opt = {});

VerificationReport check_linfty(const Domain& dom, double q, const VerifyOptions& opt = {});

// ---- corpus ---------------------------------------------------------------

struct CheckLine {
    int line = 0;
    std::string name;
    std::vector<std::string> domains;
    std::map<std::string, std::string> params;
};

struct RunConfig {
    std::map<std::string, std::string> domain_specs;  // name -> grammar string
    std::vector<std::string> domain_order;
    std::vector<double> q_list{1.0, 1.5, 2.0};
    std::vector<CheckLine> checks;
    VerifyOptions options;
    std::string out_dir = "reports";
    int jobs = 1;
};

/// Key-value config; see README for the grammar. Throws ConfigError with the line number.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

const std::vector<std::string>& known_checks();

/// Runs every check line in order (tasks may run concurrently; output order is the config order).
std::vector<VerificationReport> run_corpus(const RunConfig& cfg);

/// JSON array of reports, byte-deterministic.
std::string reports_to_json(const std::vector<VerificationReport>& reports);
void write_reports(const std::vector<VerificationReport>& reports, const std::string& dir);
std::string summary_table(const std::vector<VerificationReport>& reports);

}  // namespace lelab
