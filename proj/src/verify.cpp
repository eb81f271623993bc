#include "lelab/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "lelab/json_writer.hpp"

namespace lelab {

bool VerificationReport::pass() const {
    if (!error.empty()) return false;
    const double m = margin();
    if (!std::isfinite(m) || !std::isfinite(tol)) return false;
    return two_sided ? std::abs(m) <= tol : m >= -tol;
}

std::string VerificationReport::to_json() const {
    JsonWriter w;
    w.begin_object();
    w.field("name", name).field("q", q).field("domain", domain);
    w.field("lhs", lhs).field("rhs", rhs).field("margin", margin()).field("tol", tol);
    w.field("pass", pass());
    w.array("h_sequence", h_sequence);
    w.key("extrapolated").begin_array();
    for (bool b : extrapolated) w.value(b);
    w.end_array();
    w.field("seed", static_cast<unsigned long long>(seed));
    w.end_object();
    return w.str();
}

namespace {

std::string digest(const Domain& dom) {
    try {
        return to_spec(dom);
    } catch (const std::exception&) {
        return kind_name(dom.kind());
    }
}

double declared(const VerifyOptions& opt, double tol_rel) { return opt.tol_override ? *opt.tol_override : tol_rel; }

std::vector<double> nominal_h(const VerifyOptions& opt) {
    std::vector<double> h;
    for (int k = 0; k < opt.levels; ++k) h.push_back(opt.h0 / std::pow(2.0, k));
    return h;
}

// value at 0 of the interpolating polynomial through (x_i, y_i)
double lagrange_at_zero(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double l = 1;
        for (std::size_t j = 0; j < x.size(); ++j)
            if (j != i) l *= -x[j] / (x[i] - x[j]);
        s += l * y[i];
    }
    return s;
}

bool is_union(const Domain& d) { return d.kind() == DomainKind::union_of; }

}  // namespace

// Largest interior angle above pi gives g^2 ~ r^(2 pi/omega - 2) at the corner, so the
// boundary integral converges like h^(2 pi/omega - 1). Zero when there is no reentrant corner.
double corner_flux_order(const Domain& d) {
    if (const auto* u = d.get<DomainUnion>()) {
        double p = 0;
        for (const auto& m : u->members) {
            const double pm = corner_flux_order(m);
            if (pm > 0) p = p > 0 ? std::min(p, pm) : pm;
        }
        return p;
    }
    const auto* poly = d.get<Polygon>();
    if (!poly) return 0;
    const auto& v = poly->vertices;
    const std::size_t n = v.size();
    double omega = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = v[(i + n - 1) % n] - v[i], b = v[(i + 1) % n] - v[i];
        // counterclockwise: interior angle measured from b round to a
        double ang = std::atan2(cross(b, a), dot(b, a));
        if (ang < 0) ang += 2 * std::numbers::pi;
        omega = std::max(omega, ang);
    }
    return omega > std::numbers::pi + 1e-9 ? 2 * std::numbers::pi / omega - 1 : 0;
}

namespace {

Sequence single_sequence(const Domain& dom, double q, const VerifyOptions& opt) {
    const Mesh base = mesh_domain(dom, opt.h0);
    const auto states = solve_nested(base, opt.levels, q, {}, &dom);
    Sequence s;
    s.h = nominal_h(opt);
    for (const auto& gs : states) {
        const auto tr = normal_derivative(gs);
        s.lambda.push_back(gs.lambda);
        s.flux_sq.push_back(boundary_integral_sq(tr));
        s.pohozaev.push_back(pohozaev_integral(tr));
        s.sign_violation.push_back(tr.sign_violation());
    }
    return s;
}

}  // namespace

// ---- references and sequences --------------------------------------------

BallReference ball_reference(double q) {
    static std::mutex mu;
    static std::map<double, BallReference> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        if (auto it = cache.find(q); it != cache.end()) return it->second;
    }
    const Domain B = Domain::disk({0, 0}, 1);
    const auto states = solve_nested(mesh_domain(B, 0.02), 3, q, {}, &B);
    BallReference r;
    bool ok = false;
    const auto e = extrapolate_or_last({states[0].lambda, states[1].lambda, states[2].lambda}, &ok);
    r.lambda = e.value;
    // distance to the finest value bounds the Richardson remainder with a wide margin
    r.error = std::abs(e.value - states[2].lambda);
    if (!ok) r.error = std::abs(states[2].lambda - states[1].lambda);
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(q, r);
    return r;
}

Estimate estimate(const std::vector<double>& seq) {
    Estimate e;
    if (seq.empty()) return e;
    e.value = seq.back();
    if (seq.size() == 1) return e;
    e.error = std::abs(seq.back() - seq[seq.size() - 2]);
    if (seq.size() < 3) return e;
    bool ok = false;
    const std::vector<double> last3(seq.end() - 3, seq.end());
    const auto x = extrapolate_or_last(last3, &ok);
    if (ok) {
        e.value = x.value;
        e.error = std::abs(x.value - seq.back());
        e.extrapolated = true;
    }
    return e;
}

Estimate estimate_known_order(const std::vector<double>& seq, double p) {
    if (seq.size() < 2) return estimate(seq);
    const double f = 1 / (std::pow(2.0, p) - 1);
    std::vector<double> e;
    for (std::size_t k = 1; k < seq.size(); ++k) e.push_back(seq[k] + (seq[k] - seq[k - 1]) * f);
    Estimate out;
    out.value = e.back();
    out.error = e.size() > 1 ? std::abs(e.back() - e[e.size() - 2]) : std::abs(seq.back() - seq[seq.size() - 2]);
    out.extrapolated = true;
    return out;
}

Estimate flux_estimate(const std::vector<double>& seq, const Domain& dom) {
    const double p = corner_flux_order(dom);
    return p > 0 ? estimate_known_order(seq, p) : estimate(seq);
}

Sequence solve_sequence(const Domain& dom, double q, const VerifyOptions& opt) {
    if (opt.h0 <= 0 || opt.levels < 1) throw VerifyError("mesh sequence needs h0 > 0 and at least one level");
    if (!is_union(dom)) return single_sequence(dom, q, opt);

    // components separately, recombined level by level
    const auto& members = dom.get<DomainUnion>()->members;
    std::vector<Sequence> parts;
    for (const auto& m : members) parts.push_back(cached_sequence(m, q, opt));
    Sequence s;
    s.h = nominal_h(opt);
    for (int l = 0; l < opt.levels; ++l) {
        std::vector<double> lam;
        for (const auto& p : parts) lam.push_back(p.lambda[l]);
        const auto u = solve_union(lam, q);
        double G = 0, P = 0, sv = 0;
        for (std::size_t j = 0; j < parts.size(); ++j) {
            const double w2 = u.weights[j] * u.weights[j];
            G += w2 * parts[j].flux_sq[l];
            P += w2 * parts[j].pohozaev[l];
            if (w2 > 0) sv = std::max(sv, parts[j].sign_violation[l]);
        }
        s.lambda.push_back(u.lambda);
        s.flux_sq.push_back(G);
        s.pohozaev.push_back(P);
        s.sign_violation.push_back(sv);
    }
    return s;
}

Sequence cached_sequence(const Domain& dom, double q, const VerifyOptions& opt) {
    std::string key;
    try {
        key = to_spec(dom);
    } catch (const std::exception&) {
        return solve_sequence(dom, q, opt);
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "|%.17g|%.17g|%d", q, opt.h0, opt.levels);
    key += buf;
    static std::mutex mu;
    static std::map<std::string, Sequence> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    Sequence s = solve_sequence(dom, q, opt);
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(key, s);
    return s;
}

// ---- main inequality and relatives ------------------------------------------

namespace {

struct MainParts {
    Estimate G, lambda;
    double rhs = 0, rhs_error = 0;
    Sequence seq;
};

MainParts main_parts(const Domain& dom, double q, const VerifyOptions& opt) {
    MainParts m;
    m.seq = cached_sequence(dom, q, opt);
    m.G = flux_estimate(m.seq.flux_sq, dom);
    m.lambda = estimate(m.seq.lambda);
    const auto B = ball_reference(q);
    const double a = alpha(q);
    m.rhs = std::pow(m.lambda.value, 1 + a) / (a * std::pow(B.lambda, a));
    m.rhs_error = m.rhs * ((1 + a) * m.lambda.error / m.lambda.value + a * B.error / B.lambda);
    return m;
}

}  // namespace

VerificationReport check_main_inequality(const Domain& dom, double q, const VerifyOptions& opt) {
    const auto m = main_parts(dom, q, opt);
    VerificationReport r;
    r.name = "main_inequality";
    r.q = q;
    r.domain = digest(dom);
    r.lhs = m.G.value;
    r.rhs = m.rhs;
    r.tol = declared(opt, opt.tol_rel) * std::abs(m.rhs) + m.G.error + m.rhs_error;
    r.h_sequence = m.seq.h;
    r.extrapolated = {m.G.extrapolated, m.lambda.extrapolated};
    r.seed = opt.seed;
    std::ostringstream note;
    note << "lambda=" << m.lambda.value << " hopf_sign_violation=" << m.seq.sign_violation.back();
    r.note = note.str();
    return r;
}

std::vector<double> main_inequality_margins(const Domain& dom, double q, const VerifyOptions& opt) {
    const auto s = cached_sequence(dom, q, opt);
    const double a = alpha(q);
    const double lb = ball_reference(q).lambda;
    std::vector<double> m;
    for (std::size_t l = 0; l < s.lambda.size(); ++l)
        m.push_back(s.flux_sq[l] - std::pow(s.lambda[l], 1 + a) / (a * std::pow(lb, a)));
    return m;
}

TorsionValues torsion_sequence(const Domain& dom, const VerifyOptions& opt) {
    TorsionValues tv;
    tv.h = nominal_h(opt);
    Mesh mesh = mesh_domain(dom, opt.h0);
    for (int l = 0; l < opt.levels; ++l) {
        if (l > 0) mesh = refine(mesh, dom);
        const DofMap dofs = DofMap::interior(mesh);
        const CsrMatrix A = assemble_stiffness(mesh, dofs);
        const std::vector<double> ones(mesh.num_vertices(), 1.0);
        const auto b = lq_load(mesh, dofs, ones, 1.0);
        const auto x = solve_spd(A, b, 1e-11);
        double T = 0;
        for (int i = 0; i < dofs.size(); ++i) T += b[i] * x[i];
        const auto v = dofs.extend(x, mesh.num_vertices());
        const auto tr = normal_derivative(mesh, v, 1.0, 1.0);
        tv.rigidity.push_back(T);
        tv.flux_sq.push_back(boundary_integral_sq(tr));
    }
    return tv;
}

VerificationReport check_q1_torsion(const Domain& dom, const VerifyOptions& opt) {
    const auto tv = torsion_sequence(dom, opt);
    const auto G = flux_estimate(tv.flux_sq, dom);
    const auto T = estimate(tv.rigidity);
    const auto B = ball_reference(1.0);
    const double TB = 1.0 / B.lambda;
    const double rhs = 4 * std::pow(TB, 0.25) * std::pow(T.value, 0.75);
    const double rhs_err = rhs * (0.25 * B.error / B.lambda + 0.75 * T.error / T.value);
    VerificationReport r;
    r.name = "q1_torsion_form";
    r.q = 1.0;
    r.domain = digest(dom);
    r.lhs = G.value;
    r.rhs = rhs;
    r.tol = declared(opt, opt.tol_rel) * rhs + G.error + rhs_err;
    r.h_sequence = tv.h;
    r.extrapolated = {G.extrapolated, T.extrapolated};
    r.seed = opt.seed;
    // the q = 1 ground state carries the same information: lambda_1 = 1 / T
    const auto lam1 = estimate(cached_sequence(dom, 1.0, opt).lambda);
    std::ostringstream note;
    note << "T=" << T.value << " cross_check_rel=" << std::abs(T.value * lam1.value - 1.0);
    r.note = note.str();
    return r;
}

VerificationReport check_corollary(const Domain& dom, double q, const VerifyOptions& opt) {
    const Domain ball = symmetrized_ball(dom);
    const auto a = flux_estimate(cached_sequence(dom, q, opt).flux_sq, dom);
    const auto s = cached_sequence(ball, q, opt);
    const auto b = estimate(s.flux_sq);
    VerificationReport r;
    r.name = "corollary";
    r.q = q;
    r.domain = digest(dom) + " vs " + digest(ball);
    r.lhs = a.value;
    r.rhs = b.value;
    r.tol = declared(opt, opt.tol_rel) * std::abs(b.value) + a.error + b.error;
    r.h_sequence = s.h;
    r.extrapolated = {a.extrapolated, b.extrapolated};
    r.seed = opt.seed;
    return r;
}

VerificationReport check_pohozaev(const Domain& dom, double q, double tol_rel, const VerifyOptions& opt) {
    // single resolution h0 / 2 (the second level of the default sequence)
    VerifyOptions one = opt;
    one.h0 = opt.h0 / 2;
    one.levels = 1;
    const auto s = cached_sequence(dom, q, one);
    VerificationReport r;
    r.name = "pohozaev";
    r.q = q;
    r.domain = digest(dom);
    r.lhs = s.pohozaev[0];
    r.rhs = s.lambda[0] / alpha(q);
    r.tol = declared(opt, tol_rel) * std::abs(r.rhs);
    r.two_sided = true;
    r.h_sequence = s.h;
    r.extrapolated = {false, false};
    r.seed = opt.seed;
    return r;
}

std::vector<VerificationReport> check_bm(const Domain& dom0, const Domain& dom1, double q,
                                         const std::vector<double>& t_list, const VerifyOptions& opt) {
    auto convexish = [](const Domain& d) {
        return d.kind() == DomainKind::disk || d.kind() == DomainKind::convex_polygon;
    };
    if (!convexish(dom0) || !convexish(dom1))
        throw VerifyError(
            "bm needs disks or convex polygons: Minkowski combinations are only formed exactly for those "
            "(see minkowski_interpolate)");
    const double a = alpha(q);
    const auto e0 = estimate(cached_sequence(dom0, q, opt).lambda);
    const auto e1 = estimate(cached_sequence(dom1, q, opt).lambda);
    std::vector<VerificationReport> out;
    for (double t : t_list) {
        if (t < 0 || t > 1) throw VerifyError("bm: t must lie in [0, 1]");
        const Domain dt = t == 0 ? dom0 : t == 1 ? dom1 : minkowski_interpolate(dom0, dom1, t);
        const auto s = cached_sequence(dt, q, opt);
        const auto et = estimate(s.lambda);
        auto pw = [a](double x) { return std::pow(x, -a); };
        auto dpw = [a](const Estimate& e) { return a * std::pow(e.value, -a) * e.error / e.value; };
        VerificationReport r;
        r.name = "bm";
        r.q = q;
        char tb[40];
        std::snprintf(tb, sizeof tb, " @ t=%.17g", t);
        r.domain = digest(dom0) + " | " + digest(dom1) + tb;
        r.lhs = pw(et.value);
        r.rhs = (1 - t) * pw(e0.value) + t * pw(e1.value);
        r.tol = declared(opt, opt.tol_rel) * std::abs(r.rhs) + dpw(et) + (1 - t) * dpw(e0) + t * dpw(e1);
        r.h_sequence = s.h;
        r.extrapolated = {et.extrapolated, e0.extrapolated && e1.extrapolated};
        r.seed = opt.seed;
        out.push_back(r);
    }
    return out;
}

// ---- shape derivatives --------------------------------------------------------

FieldKind parse_field(const std::string& s) {
    if (s == "dilation") return FieldKind::dilation;
    if (s == "translation") return FieldKind::translation;
    if (s == "shear") return FieldKind::shear;
    throw VerifyError("unknown field '" + s + "' (dilation, translation, shear)");
}

const char* to_string(FieldKind f) {
    switch (f) {
        case FieldKind::dilation: return "dilation";
        case FieldKind::translation: return "translation";
        case FieldKind::shear: return "shear";
    }
    return "?";
}

namespace {

// velocity field and its (constant) Jacobian
Vec2 velocity(FieldKind f, Vec2 x) {
    switch (f) {
        case FieldKind::dilation: return x;
        case FieldKind::translation: return {1, 0};
        case FieldKind::shear: return {x.y, 0};
    }
    return {};
}

std::array<double, 4> velocity_jacobian(FieldKind f) {  // row-major d(vel_i)/dx_j
    switch (f) {
        case FieldKind::dilation: return {1, 0, 0, 1};
        case FieldKind::translation: return {0, 0, 0, 0};
        case FieldKind::shear: return {0, 1, 0, 0};
    }
    return {};
}

}  // namespace

HadamardValues hadamard_values(const Domain& dom, double q, FieldKind field, const std::vector<double>& t_list,
                               double h) {
    if (t_list.empty()) throw VerifyError("hadamard: empty t list");
    auto mesh = std::make_shared<const Mesh>(mesh_domain(dom, h));
    const auto gs = solve_ground_state(mesh, q);
    HadamardValues hv;
    hv.lambda = gs.lambda;
    if (field == FieldKind::dilation) hv.exact = -gs.lambda / alpha(q);
    if (field == FieldKind::translation) hv.exact = 0.0;

    // centered differences, extrapolated in t^2
    std::vector<double> t2, D;
    for (double t : t_list) {
        auto lam = [&](double s) {
            auto m = std::make_shared<const Mesh>(map_mesh(*mesh, [&](Vec2 x) { return x + s * velocity(field, x); }));
            return solve_ground_state(m, q).lambda;
        };
        t2.push_back(t * t);
        D.push_back((lam(t) - lam(-t)) / (2 * t));
    }
    hv.finite_difference = lagrange_at_zero(t2, D);

    // bulk form with the velocity Jacobian taken analytically
    const auto J = velocity_jacobian(field);
    const double div = J[0] + J[3];
    const auto& u = gs.u.values;
    double bulk = 0;
    for (int t = 0; t < mesh->num_triangles(); ++t) {
        const Vec2 g = triangle_gradient(*mesh, u, t);
        const double area_t = mesh->triangle_area(t);
        const Vec2 Jg{J[0] * g.x + J[1] * g.y, J[2] * g.x + J[3] * g.y};
        double uq = 0;
        const auto& tri = mesh->triangles[t];
        for (const auto& b : kQuadBary) {
            const double val = b[0] * u[tri[0]] + b[1] * u[tri[1]] + b[2] * u[tri[2]];
            uq += std::pow(std::max(val, 0.0), q) * area_t / 3;
        }
        bulk += -2 * dot(g, Jg) * area_t + div * (dot(g, g) * area_t - (2 / q) * gs.lambda * uq);
    }
    hv.bulk = bulk;

    const auto tr = normal_derivative(gs);
    hv.boundary = -weighted_boundary_integral(tr, [field](Vec2 x) { return velocity(field, x); });
    return hv;
}

std::vector<VerificationReport> check_hadamard(const Domain& dom, double q, FieldKind field,
                                               const std::vector<double>& t_list, double tol_rel,
                                               const VerifyOptions& opt) {
    const double h = opt.h0 / 2;
    const auto hv = hadamard_values(dom, q, field, t_list, h);
    // no closed form: compare on the scale of lambda against the finite difference
    const double scale = hv.exact && *hv.exact != 0 ? std::abs(*hv.exact) : hv.lambda;
    const double tol = declared(opt, tol_rel) * scale;
    std::vector<VerificationReport> out;
    auto add = [&](const char* est, double lhs, double rhs) {
        VerificationReport r;
        r.name = "hadamard_general";
        r.q = q;
        r.domain = digest(dom) + " field=" + to_string(field) + " estimate=" + est;
        r.lhs = lhs;
        r.rhs = rhs;
        r.tol = tol;
        r.two_sided = true;
        r.h_sequence = {h};
        r.extrapolated = {std::string(est) == "finite_difference", false};
        r.seed = opt.seed;
        out.push_back(r);
    };
    if (hv.exact) {
        add("finite_difference", hv.finite_difference, *hv.exact);
        add("bulk", hv.bulk, *hv.exact);
        add("boundary", hv.boundary, *hv.exact);
    } else {
        add("finite_difference", hv.finite_difference, hv.bulk);
        add("bulk", hv.bulk, hv.finite_difference);
        add("boundary", hv.boundary, hv.finite_difference);
    }
    return out;
}

MinkowskiValues minkowski_values(const Domain& dom, double q, const std::vector<double>& t_list, double h) {
    if (t_list.empty()) throw VerifyError("minkowski derivative: empty t list");
    const Mesh base = mesh_domain(dom, h);
    auto mesh = std::make_shared<const Mesh>(base);
    const auto gs = solve_ground_state(mesh, q);
    MinkowskiValues mv;
    mv.lambda0 = gs.lambda;
    mv.flux_sq = boundary_integral_sq(normal_derivative(gs));
    const double a = alpha(q);
    const double lb = ball_reference(q).lambda;
    std::vector<double> D;
    for (double t : t_list) {
        if (t <= 0) throw VerifyError("minkowski derivative: t must be positive");
        auto m = std::make_shared<const Mesh>(offset_mesh(base, dom, t));
        const double lt = solve_ground_state(m, q).lambda;
        mv.t.push_back(t);
        mv.lambda_t.push_back(lt);
        mv.chain_bound.push_back(std::pow(std::pow(gs.lambda, -a) + t * std::pow(lb, -a), -1 / a));
        D.push_back((lt - gs.lambda) / t);
    }
    mv.derivative = lagrange_at_zero(mv.t, D);
    return mv;
}

std::vector<VerificationReport> check_minkowski_derivative(const Domain& dom, double q,
                                                           const std::vector<double>& t_list, double tol_rel,
                                                           const VerifyOptions& opt) {
    const double h = opt.h0 / 2;
    const auto mv = minkowski_values(dom, q, t_list, h);
    std::string d = digest(dom);
    if (dom.kind() != DomainKind::disk && dom.kind() != DomainKind::ellipse) d += " (non-smooth boundary)";
    std::vector<VerificationReport> out;
    VerificationReport r;
    r.name = "minkowski_derivative";
    r.q = q;
    r.domain = d;
    r.lhs = mv.derivative;
    r.rhs = -mv.flux_sq;
    r.tol = declared(opt, tol_rel) * mv.flux_sq;
    r.two_sided = true;
    r.h_sequence = {h};
    r.extrapolated = {true, false};
    r.seed = opt.seed;
    out.push_back(r);

    // chain bound at the worst sampled t
    std::size_t worst = 0;
    for (std::size_t i = 1; i < mv.t.size(); ++i)
        if (mv.chain_bound[i] - mv.lambda_t[i] < mv.chain_bound[worst] - mv.lambda_t[worst]) worst = i;
    VerificationReport c;
    c.name = "minkowski_chain";
    c.q = q;
    char tb[40];
    std::snprintf(tb, sizeof tb, " @ t=%.17g", mv.t[worst]);
    c.domain = d + tb;
    c.lhs = mv.chain_bound[worst];
    c.rhs = mv.lambda_t[worst];
    c.tol = declared(opt, opt.tol_rel) * c.rhs;
    c.h_sequence = {h};
    c.extrapolated = {false, false};
    c.seed = opt.seed;
    out.push_back(c);
    return out;
}

// ---- pointwise concavity -----------------------------------------------------

namespace {

// uniform double in [0, 1) from the top 53 bits; identical on every platform
double unit(std::uint64_t r) { return static_cast<double>(r >> 11) * 0x1.0p-53; }

struct Sampled {
    std::shared_ptr<const Mesh> mesh;
    GroundState gs;
    std::unique_ptr<PointLocator> loc;
};

Sampled sampled(const Domain& d, double q, double h) {
    Sampled s;
    s.mesh = std::make_shared<const Mesh>(mesh_domain(d, h));
    s.gs = solve_ground_state(s.mesh, q);
    s.loc = std::make_unique<PointLocator>(s.mesh);
    return s;
}

Vec2 draw(const Sampled& s, std::mt19937_64& rng) {
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    for (const Vec2& v : s.mesh->vertices) {
        x0 = std::min(x0, v.x), x1 = std::max(x1, v.x);
        y0 = std::min(y0, v.y), y1 = std::max(y1, v.y);
    }
    for (int k = 0; k < 100000; ++k) {
        const Vec2 p{x0 + (x1 - x0) * unit(rng()), y0 + (y1 - y0) * unit(rng())};
        if (s.loc->find(p) >= 0) return p;
    }
    throw VerifyError("colesanti: could not sample the domain");
}

double field_at(const Sampled& s, Vec2 p) {
    const double v = s.loc->evaluate(s.gs.u.values, p);
    return std::isnan(v) ? 0.0 : std::max(v, 0.0);
}

}  // namespace

ColesantiResult colesanti_sample(const Domain& dom0, const Domain& dom1, double q, double t, int n, double h,
                                 std::uint64_t seed, double tol) {
    if (!(q >= 1 && q < 2)) throw VerifyError("colesanti: needs 1 <= q < 2");
    if (!(t >= 0 && t <= 1)) throw VerifyError("colesanti: t must lie in [0, 1]");
    const Domain dt = t == 0 ? dom0 : t == 1 ? dom1 : minkowski_interpolate(dom0, dom1, t);
    const auto s0 = sampled(dom0, q, h);
    const auto s1 = sampled(dom1, q, h);
    const auto st = sampled(dt, q, h);
    const double p = (2 - q) / 2;
    const double c0 = 1 / std::sqrt(s0.gs.lambda), c1 = 1 / std::sqrt(s1.gs.lambda), ct = 1 / std::sqrt(st.gs.lambda);
    std::mt19937_64 rng(seed);
    ColesantiResult res;
    res.worst = 1e300;
    for (int k = 0; k < n * n; ++k) {
        const Vec2 x = draw(s0, rng);
        const Vec2 y = draw(s1, rng);
        const double lhs = ct * std::pow(field_at(st, (1 - t) * x + t * y), p);
        const double rhs = (1 - t) * c0 * std::pow(field_at(s0, x), p) + t * c1 * std::pow(field_at(s1, y), p);
        ++res.samples;
        if (lhs - rhs < -tol) ++res.violations;
        if (lhs - rhs < res.worst) {
            res.worst = lhs - rhs;
            res.lhs_at_worst = lhs;
            res.rhs_at_worst = rhs;
        }
    }
    return res;
}

VerificationReport check_colesanti(const Domain& dom0, const Domain& dom1, double q, double t, int n, double tol,
                                   const VerifyOptions& opt) {
    const double h = opt.h0 / 4;
    const auto c = colesanti_sample(dom0, dom1, q, t, n, h, opt.seed, tol);
    VerificationReport r;
    r.name = "colesanti_pointwise";
    r.q = q;
    char tb[64];
    std::snprintf(tb, sizeof tb, " @ t=%.17g n=%d", t, n);
    r.domain = digest(dom0) + " | " + digest(dom1) + tb;
    r.lhs = c.lhs_at_worst;
    r.rhs = c.rhs_at_worst;
    r.tol = declared(opt, tol);
    r.h_sequence = {h};
    r.extrapolated = {false, false};
    r.seed = opt.seed;
    r.note = "violations=" + std::to_string(c.violations) + "/" + std::to_string(c.samples);
    return r;
}

VerificationReport check_union_reduction(const Domain& dom, double q, const VerifyOptions& opt) {
    if (!is_union(dom)) throw VerifyError("union_reduction needs a union domain");
    const int levels = std::min(opt.levels, 2);
    VerifyOptions o = opt;
    o.levels = levels;
    const auto rec = cached_sequence(dom, q, o);
    SolveOptions so;
    so.allow_disconnected = true;
    const auto direct = solve_nested(mesh_domain(dom, opt.h0), levels, q, so, &dom);
    VerificationReport r;
    r.name = "union_reduction";
    r.q = q;
    r.domain = digest(dom);
    r.lhs = direct.back().lambda;
    r.rhs = rec.lambda.back();
    r.tol = 1e-6 * std::abs(r.rhs);
    r.two_sided = true;
    r.h_sequence = rec.h;
    r.extrapolated = {false, false};
    r.seed = opt.seed;
    std::ostringstream note;
    note << "flux_sq direct=" << boundary_integral_sq(normal_derivative(direct.back()))
         << " recombined=" << rec.flux_sq.back();
    r.note = note.str();
    return r;
}

VerificationReport check_linfty(const Domain& dom, double q, const VerifyOptions& opt) {
    const double h = opt.h0 / 2;
    const auto gs = solve_ground_state(std::make_shared<const Mesh>(mesh_domain(dom, h)), q,
                                       SolveOptions{.allow_disconnected = is_union(dom)});
    const auto l = linfty_bound_check(gs);
    VerificationReport r;
    r.name = "linfty";
    r.q = q;
    r.domain = digest(dom);
    r.lhs = l.bound;
    r.rhs = l.ratio;
    r.tol = 0;
    r.h_sequence = {h};
    r.extrapolated = {false, false};
    r.seed = opt.seed;
    return r;
}

// ---- config and corpus -------------------------------------------------------

const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> k = {"main_inequality", "q1_torsion_form",      "corollary",
                                               "pohozaev",        "bm",                   "hadamard_general",
                                               "minkowski_derivative", "colesanti_pointwise", "union_reduction",
                                               "linfty"};
    return k;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_number(const std::string& s, int line) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("expected a number, got '" + s + "'", line);
    }
    if (pos != s.size() || !std::isfinite(v)) throw ConfigError("expected a number, got '" + s + "'", line);
    return v;
}

std::vector<double> to_list(const std::string& s, int line) {
    std::vector<double> v;
    std::string tok;
    std::istringstream in(s);
    while (std::getline(in, tok, ',')) {
        std::istringstream ws(tok);
        std::string w;
        while (ws >> w) v.push_back(to_number(w, line));
    }
    if (v.empty()) throw ConfigError("empty list", line);
    return v;
}

void check_q(const std::vector<double>& qs, int line) {
    for (double q : qs)
        if (q < 1 || q > 2) throw ConfigError("q must lie in [1, 2]", line);
}

const std::map<std::string, std::vector<std::string>>& allowed_params() {
    static const std::map<std::string, std::vector<std::string>> m = {
        {"main_inequality", {"q"}},
        {"q1_torsion_form", {}},
        {"corollary", {"q"}},
        {"pohozaev", {"q", "tol"}},
        {"bm", {"q", "t"}},
        {"hadamard_general", {"q", "t", "field", "tol"}},
        {"minkowski_derivative", {"q", "t", "tol"}},
        {"colesanti_pointwise", {"q", "t", "n", "tol"}},
        {"union_reduction", {"q"}},
        {"linfty", {"q"}},
    };
    return m;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (auto c = raw.find('#'); c != std::string::npos) raw.resize(c);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        std::istringstream ws(s);
        std::string head;
        ws >> head;
        if (head == "domain") {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError("domain line needs 'domain <name> = <spec>'", line);
            const std::string name = trim(s.substr(6, eq - 6));
            const std::string spec = trim(s.substr(eq + 1));
            if (name.empty() || name.find_first_of(" \t") != std::string::npos)
                throw ConfigError("domain name must be one word", line);
            if (cfg.domain_specs.count(name)) throw ConfigError("duplicate domain '" + name + "'", line);
            try {
                (void)parse_domain(spec);
            } catch (const std::exception& e) {
                throw ConfigError("bad domain '" + name + "': " + e.what(), line);
            }
            cfg.domain_specs[name] = spec;
            cfg.domain_order.push_back(name);
        } else if (head == "check") {
            CheckLine c;
            c.line = line;
            if (!(ws >> c.name)) throw ConfigError("check line needs a check name", line);
            const auto& known = known_checks();
            if (std::find(known.begin(), known.end(), c.name) == known.end())
                throw ConfigError("unknown check '" + c.name + "'", line);
            const auto& allowed = allowed_params().at(c.name);
            std::string tok;
            while (ws >> tok) {
                if (auto eq = tok.find('='); eq != std::string::npos) {
                    const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
                    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
                        throw ConfigError("check " + c.name + " does not take '" + k + "'", line);
                    if (v.empty()) throw ConfigError("empty value for '" + k + "'", line);
                    c.params[k] = v;
                } else {
                    if (!cfg.domain_specs.count(tok)) throw ConfigError("unknown domain '" + tok + "'", line);
                    c.domains.push_back(tok);
                }
            }
            if (c.domains.empty()) throw ConfigError("check " + c.name + " lists no domains", line);
            const bool pair = c.name == "bm" || c.name == "colesanti_pointwise";
            if (pair && c.domains.size() != 2) throw ConfigError("check " + c.name + " takes two domains", line);
            if (c.params.count("q")) check_q(to_list(c.params["q"], line), line);
            if (c.params.count("t")) (void)to_list(c.params["t"], line);
            if (c.params.count("tol") && to_number(c.params["tol"], line) < 0)
                throw ConfigError("tol must be non-negative", line);
            if (c.params.count("n") && to_number(c.params["n"], line) < 1) throw ConfigError("n must be >= 1", line);
            if (c.params.count("field")) {
                try {
                    (void)parse_field(c.params["field"]);
                } catch (const VerifyError& e) {
                    throw ConfigError(e.what(), line);
                }
            }
            cfg.checks.push_back(c);
        } else {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
            const std::string k = trim(s.substr(0, eq)), v = trim(s.substr(eq + 1));
            if (v.empty()) throw ConfigError("empty value for '" + k + "'", line);
            if (k == "q") {
                cfg.q_list = to_list(v, line);
                check_q(cfg.q_list, line);
            } else if (k == "h") {
                cfg.options.h0 = to_number(v, line);
                if (!(cfg.options.h0 > 0)) throw ConfigError("h must be positive", line);
            } else if (k == "refine") {
                const double r = to_number(v, line);
                if (r < 0 || r != std::floor(r) || r > 6) throw ConfigError("refine must be an integer in [0, 6]", line);
                cfg.options.levels = static_cast<int>(r) + 1;
            } else if (k == "tol") {
                cfg.options.tol_rel = to_number(v, line);
                if (cfg.options.tol_rel < 0) throw ConfigError("tol must be non-negative", line);
            } else if (k == "seed") {
                try {
                    std::size_t pos = 0;
                    cfg.options.seed = std::stoull(v, &pos, 0);
                    if (pos != v.size()) throw std::invalid_argument(v);
                } catch (const std::exception&) {
                    throw ConfigError("seed must be an unsigned integer", line);
                }
            } else if (k == "out") {
                cfg.out_dir = v;
            } else if (k == "jobs") {
                const double j = to_number(v, line);
                if (j < 1 || j != std::floor(j)) throw ConfigError("jobs must be a positive integer", line);
                cfg.jobs = static_cast<int>(j);
            } else {
                throw ConfigError("unknown key '" + k + "'", line);
            }
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read " + path, 0);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

namespace {

using Task = std::function<std::vector<VerificationReport>()>;

VerificationReport failed(const std::string& name, double q, const std::string& dom, const std::string& what,
                          const VerifyOptions& opt) {
    VerificationReport r;
    r.name = name;
    r.q = q;
    r.domain = dom;
    r.error = what;
    r.note = what;
    r.extrapolated = {false, false};
    r.seed = opt.seed;
    return r;
}

}  // namespace

std::vector<VerificationReport> run_corpus(const RunConfig& cfg) {
    std::vector<Task> tasks;
    const VerifyOptions opt = cfg.options;
    for (const auto& c : cfg.checks) {
        std::vector<Domain> doms;
        for (const auto& n : c.domains) doms.push_back(parse_domain(cfg.domain_specs.at(n)));
        auto param = [&](const std::string& k) -> const std::string* {
            auto it = c.params.find(k);
            return it == c.params.end() ? nullptr : &it->second;
        };
        const auto qs = param("q") ? to_list(*param("q"), c.line) : cfg.q_list;
        const auto tl = param("t") ? std::optional(to_list(*param("t"), c.line)) : std::nullopt;
        const double tol_given = param("tol") ? to_number(*param("tol"), c.line) : -1.0;
        auto tol_or = [tol_given](double d) { return tol_given >= 0 ? tol_given : d; };
        const std::string name = c.name;
        auto guard = [name, opt](double q, std::string d, std::function<std::vector<VerificationReport>()> f) -> Task {
            return [=]() -> std::vector<VerificationReport> {
                try {
                    return f();
                } catch (const std::exception& e) {
                    return {failed(name, q, d, e.what(), opt)};
                }
            };
        };

        if (name == "q1_torsion_form") {
            for (const auto& d : doms)
                tasks.push_back(guard(1.0, digest(d), [=] { return std::vector{check_q1_torsion(d, opt)}; }));
            continue;
        }
        if (name == "bm" || name == "colesanti_pointwise") {
            const Domain d0 = doms[0], d1 = doms[1];
            const std::string dd = digest(d0) + " | " + digest(d1);
            for (double q : qs) {
                if (name == "bm") {
                    const auto ts = tl.value_or(std::vector<double>{0.5});
                    tasks.push_back(guard(q, dd, [=] { return check_bm(d0, d1, q, ts, opt); }));
                } else {
                    const auto ts = tl.value_or(std::vector<double>{0.5});
                    const int n = param("n") ? static_cast<int>(to_number(*param("n"), c.line)) : 40;
                    const double tl_ = tol_or(1e-3);
                    for (double t : ts)
                        tasks.push_back(guard(q, dd, [=] {
                            return std::vector{check_colesanti(d0, d1, q, t, n, tl_, opt)};
                        }));
                }
            }
            continue;
        }
        for (const auto& d : doms) {
            for (double q : qs) {
                const std::string dd = digest(d);
                if (name == "main_inequality")
                    tasks.push_back(guard(q, dd, [=] { return std::vector{check_main_inequality(d, q, opt)}; }));
                else if (name == "corollary")
                    tasks.push_back(guard(q, dd, [=] { return std::vector{check_corollary(d, q, opt)}; }));
                else if (name == "pohozaev") {
                    const double tr = tol_or(0.01);
                    tasks.push_back(guard(q, dd, [=] { return std::vector{check_pohozaev(d, q, tr, opt)}; }));
                } else if (name == "hadamard_general") {
                    const FieldKind f = param("field") ? parse_field(*param("field")) : FieldKind::dilation;
                    const auto ts = tl.value_or(std::vector<double>{0.02, 0.01});
                    const double tr = tol_or(0.03);
                    tasks.push_back(guard(q, dd, [=] { return check_hadamard(d, q, f, ts, tr, opt); }));
                } else if (name == "minkowski_derivative") {
                    const auto ts = tl.value_or(std::vector<double>{0.04, 0.02, 0.01});
                    const double tr = tol_or(0.04);
                    tasks.push_back(guard(q, dd, [=] { return check_minkowski_derivative(d, q, ts, tr, opt); }));
                } else if (name == "union_reduction")
                    tasks.push_back(guard(q, dd, [=] { return std::vector{check_union_reduction(d, q, opt)}; }));
                else if (name == "linfty")
                    tasks.push_back(guard(q, dd, [=] { return std::vector{check_linfty(d, q, opt)}; }));
            }
        }
    }

    std::vector<std::vector<VerificationReport>> results(tasks.size());
    const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(tasks.size())));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) results[i] = tasks[i]();
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < tasks.size(); i = next++) results[i] = tasks[i]();
            });
        for (auto& th : pool) th.join();
    }
    std::vector<VerificationReport> out;
    for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
    return out;
}

std::string reports_to_json(const std::vector<VerificationReport>& reports) {
    std::string s = "[";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        s += i ? ",\n  " : "\n  ";
        s += reports[i].to_json();
    }
    s += reports.empty() ? "]\n" : "\n]\n";
    return s;
}

void write_reports(const std::vector<VerificationReport>& reports, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream f(fs::path(dir) / "reports.json", std::ios::binary);
        f << reports_to_json(reports);
    }
    for (std::size_t i = 0; i < reports.size(); ++i) {
        char name[128];
        std::snprintf(name, sizeof name, "%03zu_%s.json", i, reports[i].name.c_str());
        std::ofstream f(fs::path(dir) / name, std::ios::binary);
        f << reports[i].to_json() << '\n';
    }
}

std::string summary_table(const std::vector<VerificationReport>& reports) {
    std::string s;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-4s %-22s %-5s %-14s %-14s %-11s %-10s %s\n", "#", "check", "q", "lhs", "rhs",
                  "margin", "tol", "result  domain");
    s += buf;
    int passed = 0;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        const bool ok = r.pass();
        passed += ok;
        std::snprintf(buf, sizeof buf, "%-4zu %-22s %-5.3g %-14.8g %-14.8g %-11.3e %-10.3e %-7s %s%s%s\n", i,
                      r.name.c_str(), r.q, r.lhs, r.rhs, r.margin(), r.tol, ok ? "PASS" : "FAIL", r.domain.c_str(),
                      r.error.empty() ? "" : "  error: ", r.error.c_str());
        s += buf;
    }
    std::snprintf(buf, sizeof buf, "passed %d of %zu, failed %zu\n", passed, reports.size(),
                  reports.size() - static_cast<std::size_t>(passed));
    s += buf;
    return s;
}

}  // namespace lelab
