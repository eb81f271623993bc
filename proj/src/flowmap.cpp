#include "lelab/flowmap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lelab/json_writer.hpp"

namespace lelab {

namespace {

constexpr double pi = std::numbers::pi;

// Gauss-Legendre nodes and weights on [0, 1] by Newton on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = 0.5 * (1 - z);
        w[i] = 1.0 / ((1 - z * z) * dp * dp);  // 2/((1-z^2)p'^2) on [-1,1], halved
    }
}

double smooth_step(double x) {
    auto f = [](double s) { return s > 0 ? std::exp(-1.0 / s) : 0.0; };
    if (x <= 0) return 0;
    if (x >= 1) return 1;
    return f(x) / (f(x) + f(1 - x));
}

bool smooth_only(const Domain& dom) {
    if (dom.kind() == DomainKind::disk || dom.kind() == DomainKind::ellipse) return true;
    if (const auto* u = dom.get<DomainUnion>())
        return std::all_of(u->members.begin(), u->members.end(), [](const Domain& m) { return smooth_only(m); });
    return false;
}

Box enlarged_box(const FlowField& ff) {
    Box b = ff.domain().bounding_box();
    const double pad = ff.eps0() + ff.eta0();
    b.lo = b.lo - Vec2{pad, pad};
    b.hi = b.hi + Vec2{pad, pad};
    return b;
}

}  // namespace

double bump(double r) {
    r = std::abs(r);
    if (r >= 1) return 0;
    return std::exp(-1.0 / (1 - r * r));
}

double bump_derivative(double r) {
    if (r <= 0 || r >= 1) return 0;
    const double s = 1 - r * r;
    return bump(r) * (-2 * r / (s * s));
}

double cutoff(double s) { return smooth_step(2 * (1 - std::abs(s))); }

FlowField::FlowField(Domain dom, double eps0, double eta0, int n_radial, int n_angular)
    : dom_(std::move(dom)), eps0_(eps0), eta0_(eta0) {
    if (!(eps0 > 0) || !(eta0 > 0)) throw FlowError("eps0 and eta0 must be positive");
    if (n_radial < 2 || n_angular < 4) throw FlowError("quadrature too coarse");
    // continuum normalization 2 pi int bump(r) r dr, 400-point rule
    std::vector<double> xr, wr;
    gauss_legendre(400, xr, wr);
    double I = 0;
    for (int i = 0; i < 400; ++i) I += wr[i] * bump(xr[i]) * xr[i];
    c_ = 1.0 / (2 * pi * I);
    for (int k = 1; k < 100000; ++k) dphi_max_ = std::max(dphi_max_, std::abs(phi_derivative(k / 100000.0)));

    gauss_legendre(n_radial, xr, wr);
    double total = 0;
    for (int i = 0; i < n_radial; ++i)
        for (int j = 0; j < n_angular; ++j) {
            const double a = 2 * pi * (j + 0.5) / n_angular;
            offsets_.push_back(xr[i] * Vec2{std::cos(a), std::sin(a)});
            const double w = phi(xr[i]) * xr[i] * wr[i] * (2 * pi / n_angular);
            weights_.push_back(w);
            total += w;
        }
    norm_error_ = std::abs(total - 1.0);
    for (double& w : weights_) w /= total;
}

double FlowField::t_max() const { return eps0_ / (pi * dphi_max_); }

Vec2 FlowField::grad_delta(Vec2 y) const {
    const double s = eps0_ / 64;
    return {(signed_distance(dom_, y + Vec2{s, 0}) - signed_distance(dom_, y - Vec2{s, 0})) / (2 * s),
            (signed_distance(dom_, y + Vec2{0, s}) - signed_distance(dom_, y - Vec2{0, s})) / (2 * s)};
}

Vec2 FlowField::X(Vec2 x) const {
    // delta is 1-Lipschitz: the cutoff vanishes on the whole ball once |delta(x)| >= eta0 + eps0
    if (std::abs(signed_distance(dom_, x)) >= eta0_ + eps0_) return {0, 0};
    Vec2 acc{0, 0};
    for (size_t k = 0; k < offsets_.size(); ++k) {
        const Vec2 y = x + eps0_ * offsets_[k];
        const double c = cutoff(signed_distance(dom_, y) / eta0_);
        if (c == 0) continue;
        acc = acc + (weights_[k] * c) * grad_delta(y);
    }
    return acc;
}

Vec2 FlowField::flow(double t, Vec2 x) const {
    if (!(std::abs(t) < t_max())) throw FlowError("|t| must stay below t_max = " + std::to_string(t_max()));
    return flow_unchecked(t, x);
}

double FlowField::jacobian_det(double t, Vec2 x) const {
    const double s = eps0_ / 128;
    const Vec2 dx = (flow_unchecked(t, x + Vec2{s, 0}) - flow_unchecked(t, x - Vec2{s, 0})) / (2 * s);
    const Vec2 dy = (flow_unchecked(t, x + Vec2{0, s}) - flow_unchecked(t, x - Vec2{0, s})) / (2 * s);
    return cross(dx, dy);
}

std::string FlowReport::to_json() const {
    JsonWriter w;
    w.begin_object();
    w.field("epsilon0", epsilon0).field("eta0", eta0).field("t", t);
    w.field("violations", violations).field("max_violation", max_violation);
    w.field("max_X_minus_nu", max_X_minus_nu);
    w.end_object();
    return w.str();
}

namespace {

FlowReport base_report(const FlowField& ff, const char* name, double t) {
    FlowReport r;
    r.check = name;
    r.epsilon0 = ff.eps0();
    r.eta0 = ff.eta0();
    r.t = t;
    r.max_violation = -std::numeric_limits<double>::infinity();
    return r;
}

void record(FlowReport& r, double excess) {
    ++r.samples;
    r.max_violation = std::max(r.max_violation, excess);
    if (excess > 0) ++r.violations;
}

template <class F>
void grid(const Box& b, int nx, int ny, F&& f) {
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            f(Vec2{b.lo.x + (i + 0.5) * b.width() / nx, b.lo.y + (j + 0.5) * b.height() / ny});
}

}  // namespace

FlowReport check_field_bound(const FlowField& ff, int n) {
    FlowReport r = base_report(ff, "field_bound", 0);
    const double deep = -ff.eta0() - ff.eps0();
    grid(enlarged_box(ff), n, n, [&](Vec2 x) {
        const Vec2 X = ff.X(x);
        record(r, norm(X) - (1 + 1e-8));
        if (signed_distance(ff.domain(), x) < deep && norm(X) != 0) ++r.violations;
    });
    return r;
}

FlowReport check_jacobian(const FlowField& ff, double t, int n) {
    FlowReport r = base_report(ff, "jacobian", t);
    grid(enlarged_box(ff), n, n, [&](Vec2 x) { record(r, -ff.jacobian_det(t, x)); });
    return r;
}

FlowReport check_inner_inclusion(const FlowField& ff, double t, double slack) {
    if (t < 0 || t >= 1) throw FlowError("inner inclusion needs 0 <= t < 1");
    FlowReport r = base_report(ff, "inner_inclusion", t);
    const Box b = ff.domain().bounding_box();
    const double s = ff.eps0() / 8;
    const int nx = std::max(1, static_cast<int>(std::ceil(b.width() / s)));
    const int ny = std::max(1, static_cast<int>(std::ceil(b.height() / s)));
    grid(b, nx, ny, [&](Vec2 x) {
        if (signed_distance(ff.domain(), x) >= 0) return;
        record(r, signed_distance(ff.domain(), ff.flow_unchecked(t, x)) - (t + slack));
    });
    return r;
}

FlowReport check_outer_inclusion(const FlowField& ff, double t, double delta, int n, double slack) {
    if (!smooth_only(ff.domain()))
        throw FlowError(
            "outer inclusion needs a C1 boundary; at a polygon corner of interior angle theta the point moves "
            "only t sqrt(2 - 2 cos theta) / 2 to first order");
    if (!(delta > 0)) throw FlowError("delta must be positive");
    FlowReport r = base_report(ff, "outer_inclusion", t);
    for (const auto& s : boundary_sample(ff.domain(), n)) {
        const Vec2 X = ff.X(s.point);
        r.max_X_minus_nu = std::max(r.max_X_minus_nu, norm(X - s.normal));
        record(r, (t - slack) - signed_distance(ff.domain(), s.point + (1 + delta) * t * X));
    }
    return r;
}

OuterSweep outer_inclusion_sweep(const Domain& dom, double eta0, double t, double delta,
                                 const std::vector<double>& eps_list) {
    OuterSweep sw;
    for (double e : eps_list) sw.runs.push_back(check_outer_inclusion(FlowField(dom, e, eta0), t, delta));
    // smallest tail of passing runs
    for (size_t k = sw.runs.size(); k-- > 0;) {
        if (!sw.runs[k].pass()) break;
        sw.minimal_passing_eps0 = sw.runs[k].epsilon0;
    }
    return sw;
}

NormalConvergence normal_convergence(const Domain& dom, double eta0, const std::vector<double>& eps_list, int n) {
    NormalConvergence nc;
    const auto samples = boundary_sample(dom, n);
    for (double e : eps_list) {
        const FlowField ff(dom, e, eta0);
        double m = 0;
        for (const auto& s : samples) m = std::max(m, norm(ff.X(s.point) - s.normal));
        nc.eps0.push_back(e);
        nc.max_X_minus_nu.push_back(m);
    }
    nc.monotone = true;
    for (size_t k = 1; k < nc.max_X_minus_nu.size(); ++k)
        if (nc.max_X_minus_nu[k] > 1.2 * nc.max_X_minus_nu[k - 1]) nc.monotone = false;
    nc.final_small = !nc.max_X_minus_nu.empty() && nc.max_X_minus_nu.back() <= 0.05;
    return nc;
}

CornerDisplacement corner_displacement(const Domain& polygon, int corner, double eps0, double eta0) {
    const auto* p = polygon.get<Polygon>();
    if (!p) throw FlowError("corner displacement needs a polygon");
    const auto& v = p->vertices;
    const int n = static_cast<int>(v.size());
    if (corner < 0 || corner >= n) throw FlowError("corner index out of range");
    const Vec2 c = v[corner], a = v[(corner + n - 1) % n], b = v[(corner + 1) % n];
    for (int k = 0; k < n; ++k)
        if (k != corner && distance(v[k], c) <= eps0 + eta0) throw FlowError("another corner lies within eps0 + eta0");
    CornerDisplacement r;
    // counterclockwise polygon: interior angle between the edges to the neighbours
    const Vec2 u = normalized(b - c), w = normalized(a - c);
    double ang = std::atan2(cross(u, w), dot(u, w));
    if (ang < 0) ang += 2 * pi;
    r.theta = ang;
    r.factor = norm(FlowField(polygon, eps0, eta0).X(c));
    r.predicted = std::sqrt(2 - 2 * std::cos(r.theta)) / 2;
    r.relative_gap = std::abs(r.factor - r.predicted) / r.predicted;
    return r;
}

double interior_normal_estimate(const FlowField& ff, Vec2 x, Vec2 nu) {
    std::vector<double> xr, wr;
    gauss_legendre(64, xr, wr);
    const int na = 128;
    const double e = ff.eps0();
    double s = 0;
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < na; ++j) {
            const double a = 2 * pi * (j + 0.5) / na;
            const Vec2 dir{std::cos(a), std::sin(a)};
            s += wr[i] * (2 * pi / na) * ff.phi_derivative(xr[i]) * dot(dir, nu) *
                 signed_distance(ff.domain(), x + e * xr[i] * dir) * xr[i];
        }
    return s / e;
}

}  // namespace lelab
