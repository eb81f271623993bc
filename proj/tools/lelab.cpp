#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lelab/json_writer.hpp"
#include "lelab/lane_emden.hpp"
#include "lelab/traces.hpp"
#include "lelab/verify.hpp"

using namespace lelab;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v) { return JsonWriter::format_double(v); }

std::vector<double> parse_q_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

int cmd_solve(const std::string& spec, double q, double h, const std::string& out) {
    Domain dom = [&] {
        try {
            return parse_domain(spec);
        } catch (const std::exception& e) {
            std::cerr << "lelab solve: " << e.what() << "\n";
            throw 2;
        }
    }();
    if (!(q >= 1 && q <= 2) || !(h > 0)) {
        std::cerr << "lelab solve: need 1 <= q <= 2 and h > 0\n";
        return 2;
    }
    try {
        auto mesh = std::make_shared<const Mesh>(mesh_domain(dom, h));
        SolveOptions so;
        so.allow_disconnected = dom.kind() == DomainKind::union_of;
        const auto gs = solve_ground_state(mesh, q, so);
        const auto tr = normal_derivative(gs);
        fs::create_directories(out);
        std::ofstream(fs::path(out) / "groundstate.json", std::ios::binary) << gs.to_json() << '\n';
        {
            std::ofstream f(fs::path(out) / "field.csv", std::ios::binary);
            f << "x,y,u\n";
            for (int i = 0; i < mesh->num_vertices(); ++i)
                f << fmt(mesh->vertices[i].x) << ',' << fmt(mesh->vertices[i].y) << ',' << fmt(gs.u.values[i]) << '\n';
        }
        {
            std::ofstream f(fs::path(out) / "trace.csv", std::ios::binary);
            write_trace_csv(tr, f);
        }
        std::cout << gs.to_json() << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "lelab solve: " << e.what() << "\n";
        return 3;
    }
}

struct VerifyFlags {
    std::string q, out;
    double h = 0, tol = -1;
    int refine = -1, jobs = 0;
    long long seed = -1;
};

int cmd_verify(const std::string& path, const VerifyFlags& fl) {
    RunConfig cfg;
    try {
        cfg = load_config(path);
        if (!fl.q.empty()) {
            cfg.q_list = parse_q_list(fl.q);
            for (double q : cfg.q_list)
                if (q < 1 || q > 2) throw ConfigError("--q values must lie in [1, 2]", 0);
        }
        if (fl.h > 0) cfg.options.h0 = fl.h;
        if (fl.refine >= 0) cfg.options.levels = fl.refine + 1;
        if (fl.tol >= 0) cfg.options.tol_override = fl.tol;
        if (fl.jobs > 0) cfg.jobs = fl.jobs;
        if (!fl.out.empty()) cfg.out_dir = fl.out;
        if (fl.seed >= 0) cfg.options.seed = static_cast<std::uint64_t>(fl.seed);
    } catch (const std::exception& e) {
        std::cerr << "lelab verify: " << path << ": " << e.what() << "\n";
        return 2;
    }
    const auto reports = run_corpus(cfg);
    try {
        write_reports(reports, cfg.out_dir);
    } catch (const std::exception& e) {
        std::cerr << "lelab verify: " << e.what() << "\n";
        return 2;
    }
    std::cout << summary_table(reports);
    for (const auto& r : reports)
        if (!r.pass()) return 1;
    return 0;
}

int cmd_sweep(const std::string& spec, double q, double t0, double t1, double dt, double h, const std::string& out) {
    Domain dom = [&] {
        try {
            return parse_domain(spec);
        } catch (const std::exception& e) {
            std::cerr << "lelab sweep: " << e.what() << "\n";
            throw 2;
        }
    }();
    if (!(q >= 1 && q <= 2) || !(h > 0) || !(dt > 0) || !(t0 >= 0) || !(t1 >= t0)) {
        std::cerr << "lelab sweep: need 1 <= q <= 2, h > 0, dt > 0 and 0 <= t0 <= t1\n";
        return 2;
    }
    try {
        const double a = alpha(q);
        const double lb = ball_reference(q).lambda;
        SolveOptions so;
        so.allow_disconnected = dom.kind() == DomainKind::union_of;
        auto lambda_at = [&](double t) {
            const Domain d = t == 0 ? dom : minkowski_ball_sum(dom, t);
            return solve_ground_state(std::make_shared<const Mesh>(mesh_domain(d, h)), q, so).lambda;
        };
        const int n = static_cast<int>(std::floor((t1 - t0) / dt + 1e-9)) + 1;
        const double base = lambda_at(0.0);
        fs::path p(out);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream f(out, std::ios::binary);
        if (!f) {
            std::cerr << "lelab sweep: cannot write " << out << "\n";
            return 2;
        }
        f << "t,lambda,bm_upper_bound,secant_slope\n";
        double prev_t = 0, prev_l = 0;
        for (int i = 0; i < n; ++i) {
            const double t = t0 + i * dt;
            const double l = t == 0 ? base : lambda_at(t);
            const double bound = t == 0 ? base : std::pow(std::pow(base, -a) + t * std::pow(lb, -a), -1 / a);
            const double slope = i == 0 ? NAN : (l - prev_l) / (t - prev_t);
            f << fmt(t) << ',' << fmt(l) << ',' << fmt(bound) << ',' << (i == 0 ? "nan" : fmt(slope)) << '\n';
            prev_t = t;
            prev_l = l;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "lelab sweep: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lane-Emden ground states on planar domains"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "show help");  // -h is taken by the mesh size

    std::string spec, out = "out", config;
    double q = 2, h = 0.02;

    auto* solve = app.add_subcommand("solve", "solve one ground state; writes groundstate.json, field.csv, trace.csv");
    solve->add_option("domain", spec, "domain, e.g. \"disk 0 0 1\"")->required();
    solve->add_option("--q", q, "exponent in [1, 2]");
    solve->add_option("--h", h, "mesh size");
    solve->add_option("--out", out, "output directory");

    VerifyFlags vf;
    auto* verify = app.add_subcommand("verify", "run a check corpus; exit 0 iff every report passes");
    verify->add_option("config", config, "config file")->required();
    verify->add_option("--q", vf.q, "comma-separated q list (overrides the config)");
    verify->add_option("--h", vf.h, "coarsest mesh size");
    verify->add_option("--refine", vf.refine, "number of nested refinements");
    verify->add_option("--tol", vf.tol, "override every declared tolerance");
    verify->add_option("--jobs", vf.jobs, "concurrent checks");
    verify->add_option("--out", vf.out, "report directory");
    verify->add_option("--seed", vf.seed, "sampling seed");

    double t0 = 0, t1 = 0.5, dt = 0.05;
    std::string csv = "sweep.csv";
    auto* sweep = app.add_subcommand("sweep", "lambda along the outer parallel sets, as CSV");
    sweep->add_option("domain", spec, "domain")->required();
    sweep->add_option("--q", q, "exponent in [1, 2]");
    sweep->add_option("--h", h, "mesh size");
    sweep->add_option("--t0", t0, "first t");
    sweep->add_option("--t1", t1, "last t");
    sweep->add_option("--dt", dt, "t step");
    sweep->add_option("--out", csv, "CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    try {
        if (*solve) return cmd_solve(spec, q, h, out);
        if (*verify) return cmd_verify(config, vf);
        if (*sweep) return cmd_sweep(spec, q, t0, t1, dt, h, csv);
    } catch (int code) {
        return code;
    }
    return 2;
}
