#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "lelab/verify.hpp"

using namespace lelab;

namespace {

constexpr double pi = std::numbers::pi;

double bessel_j0(double x) {
    double term = 1, sum = 1;
    for (int k = 1; k < 80; ++k) {
        term *= -(x * x / 4) / (k * k);
        sum += term;
    }
    return sum;
}

double j01() {
    double a = 2.0, b = 3.0;
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (a + b);
        (bessel_j0(a) * bessel_j0(m) <= 0 ? b : a) = m;
    }
    return 0.5 * (a + b);
}

// integral of the torsion function of the unit square, double sine series
double square_torsion_series() {
    double s = 0;
    for (int m = 1; m < 4000; m += 2)
        for (int n = 1; n < 4000; n += 2) s += 1.0 / (double(m) * m * n * n * (double(m) * m + double(n) * n));
    return 64 / std::pow(pi, 6) * s;
}

Domain unit_disk() { return Domain::disk({0, 0}, 1); }
Domain unit_square() { return parse_domain("polygon -0.5 -0.5 0.5 -0.5 0.5 0.5 -0.5 0.5"); }
Domain l_shape() { return parse_domain("polygon -1 -1 1 -1 1 0 0 0 0 1 -1 1"); }
Domain two_disks() { return parse_domain("union { disk -1.5 0 1 disk 1.5 0 1 }"); }

}  // namespace

TEST(Report, PassIsDerivedFromMargin) {
    VerificationReport r;
    r.lhs = 1.0;
    r.rhs = 1.5;
    r.tol = 0.4;
    EXPECT_FALSE(r.pass());
    r.tol = 0.5;
    EXPECT_TRUE(r.pass());
    r.lhs = 3;
    EXPECT_TRUE(r.pass());
    r.two_sided = true;
    EXPECT_FALSE(r.pass());
    r.lhs = 1.5;
    r.error = "boom";
    EXPECT_FALSE(r.pass());
}

TEST(Report, JsonFieldsInOrder) {
    VerificationReport r;
    r.name = "x";
    r.q = 1.5;
    r.domain = "disk 0 0 1";
    r.lhs = 0.1;
    r.rhs = 0.3;
    r.tol = 0.5;
    r.h_sequence = {0.04, 0.02};
    r.extrapolated = {true, false};
    r.seed = 7;
    const std::string j = r.to_json();
    std::size_t pos = 0;
    for (const char* k : {"\"name\"", "\"q\"", "\"domain\"", "\"lhs\"", "\"rhs\"", "\"margin\"", "\"tol\"", "\"pass\"",
                          "\"h_sequence\"", "\"extrapolated\"", "\"seed\""}) {
        const auto p = j.find(k, pos);
        ASSERT_NE(p, std::string::npos) << k;
        pos = p;
    }
    EXPECT_NE(j.find("\"margin\": -0.19999999999999998"), std::string::npos);
    EXPECT_NE(j.find("\"pass\": true"), std::string::npos);
    EXPECT_NE(j.find("\"extrapolated\": [true, false]"), std::string::npos);
}

TEST(Estimates, KnownOrderIsExactOnPowerLaw) {
    std::vector<double> s;
    for (double h : {0.04, 0.02, 0.01}) s.push_back(3.0 - 2.0 * std::pow(h, 1.0 / 3));
    const auto e = estimate_known_order(s, 1.0 / 3);
    EXPECT_NEAR(e.value, 3.0, 1e-12);
    EXPECT_LT(e.error, 1e-12);
    EXPECT_NEAR(corner_flux_order(l_shape()), 1.0 / 3, 1e-12);
    EXPECT_EQ(corner_flux_order(unit_square()), 0.0);
    EXPECT_EQ(corner_flux_order(unit_disk()), 0.0);
}

TEST(BallReference, MatchesClosedForms) {
    EXPECT_NEAR(ball_reference(1.0).lambda, 8 / pi, 1e-6);
    EXPECT_NEAR(ball_reference(2.0).lambda, j01() * j01(), 1e-6);
    EXPECT_LT(ball_reference(2.0).error, 1e-4);
}

// Orientation table: each equality case sits at margin 0, and moving away from it in the
// direction the inequality allows gives a positive margin.
TEST(SignConvention, BallEqualityMainInequality) {
    const auto r = check_main_inequality(unit_disk(), 2.0);
    const double oracle = 2 * j01() * j01();
    EXPECT_NEAR(r.lhs, oracle, 0.005 * oracle);
    EXPECT_NEAR(r.rhs, oracle, 0.005 * oracle);
    EXPECT_LE(std::abs(r.margin()), r.tol);
    EXPECT_TRUE(r.extrapolated[0] && r.extrapolated[1]);
    EXPECT_GT(check_main_inequality(unit_square(), 2.0).margin(), 0.0);
}

TEST(SignConvention, HomothetyBrunnMinkowski) {
    const auto rs = check_bm(unit_disk(), Domain::disk({0, 0}, 2), 1.5, {0.0, 0.5, 1.0});
    ASSERT_EQ(rs.size(), 3u);
    for (const auto& r : rs) {
        EXPECT_LE(std::abs(r.margin()), 1e-3);
        EXPECT_TRUE(r.pass());
    }
    // both sides scale like the radius
    EXPECT_NEAR(rs[1].lhs, 1.5 * rs[0].lhs, 1e-6);
    const double s = std::sqrt(pi) / 2;
    const auto sq = Domain::polygon({{-s, -s}, {s, -s}, {s, s}, {-s, s}});
    const auto strict = check_bm(sq, unit_disk(), 1.5, {0.5});
    EXPECT_GT(strict[0].margin(), strict[0].tol);
}

TEST(SignConvention, DilationHadamard) {
    for (const auto& r : check_hadamard(unit_disk(), 1.5, FieldKind::dilation, {0.02, 0.01}, 0.03)) {
        EXPECT_LT(r.rhs, 0.0);  // growing the domain lowers lambda
        EXPECT_TRUE(r.pass()) << r.domain;
    }
}

TEST(MainInequality, DiskQ1BothSidesAre32OverPi) {
    const auto r = check_main_inequality(unit_disk(), 1.0);
    EXPECT_NEAR(r.lhs, 32 / pi, 0.005 * 32 / pi);
    EXPECT_NEAR(r.rhs, 32 / pi, 0.005 * 32 / pi);
    EXPECT_TRUE(r.pass());
}

TEST(MainInequality, StrictOnSquareAndLShape) {
    for (const Domain& d : {unit_square(), l_shape()})
        for (double q : {1.0, 1.5, 2.0}) {
            const auto r = check_main_inequality(d, q);
            EXPECT_GT(r.margin(), 3 * r.tol) << r.domain << " q=" << q;
        }
}

TEST(MainInequality, MarginsTightenOnSmoothDomains) {
    for (const Domain& d : {Domain::ellipse({0, 0}, 1.25, 0.8), unit_disk()}) {
        const auto m = main_inequality_margins(d, 1.5);
        ASSERT_EQ(m.size(), 3u);
        EXPECT_LT(std::abs(m[2] - m[1]), std::abs(m[1] - m[0]));
    }
}

TEST(MainInequality, UnionThroughComponents) {
    const auto r = check_union_reduction(two_disks(), 1.5);
    EXPECT_TRUE(r.pass()) << r.lhs << " " << r.rhs;
    EXPECT_LE(std::abs(r.margin()), 1e-6 * r.rhs);
    // lambda_1 of two unit disks = lambda_1(B) / 2 = 4 / pi
    const auto s = cached_sequence(two_disks(), 1.0, VerifyOptions{});
    EXPECT_NEAR(estimate(s.lambda).value, 4 / pi, 0.01 * 4 / pi);
    EXPECT_THROW(check_union_reduction(unit_disk(), 1.0), VerifyError);
}

TEST(Torsion, DiskAndSquare) {
    const auto r = check_q1_torsion(unit_disk());
    EXPECT_NEAR(r.lhs, pi / 2, 0.005 * pi / 2);
    EXPECT_NEAR(r.rhs, pi / 2, 0.005 * pi / 2);
    EXPECT_TRUE(r.pass());
    const auto tv = torsion_sequence(parse_domain("polygon 0 0 1 0 1 1 0 1"));
    const double oracle = square_torsion_series();
    EXPECT_NEAR(oracle, 0.035144, 1e-5);
    EXPECT_NEAR(estimate(tv.rigidity).value, oracle, 0.01 * oracle);
    const auto td = torsion_sequence(unit_disk());
    EXPECT_NEAR(estimate(td.rigidity).value, pi / 8, 1e-5);
    // T = 1 / lambda_1 links the torsion check to the q = 1 ground state
    EXPECT_NEAR(estimate(td.rigidity).value * estimate(cached_sequence(unit_disk(), 1.0, {}).lambda).value, 1.0,
                1e-5);
    const auto s = check_q1_torsion(unit_square());
    EXPECT_GT(s.margin(), s.tol);
}

TEST(Torsion, ScalingDegreeFour) {
    const double t1 = estimate(torsion_sequence(unit_disk()).rigidity).value;
    const double t2 = estimate(torsion_sequence(Domain::disk({0, 0}, 2)).rigidity).value;
    EXPECT_NEAR(t2 / t1, 16.0, 1e-4);
}

TEST(Corollary, EqualityOnDisksStrictOtherwise) {
    const auto d = check_corollary(Domain::disk({0.3, -0.2}, 1), 2.0);
    EXPECT_LE(std::abs(d.margin()), d.tol);
    const auto sq = check_corollary(unit_square(), 2.0);
    EXPECT_GT(sq.margin(), sq.tol);
    const auto el = check_corollary(Domain::ellipse({0, 0}, 1.5, 1 / 1.5), 1.0);
    EXPECT_GT(el.margin(), el.tol);
}

TEST(BrunnMinkowski, RejectsNonConvex) {
    EXPECT_THROW(check_bm(l_shape(), unit_square(), 1.0, {0.5}), VerifyError);
    EXPECT_THROW(check_bm(Domain::ellipse({0, 0}, 2, 1), unit_disk(), 1.0, {0.5}), VerifyError);
}

TEST(Hadamard, TranslationAndShear) {
    for (const auto& r : check_hadamard(unit_square(), 2.0, FieldKind::translation, {0.02, 0.01}, 0.01)) {
        EXPECT_TRUE(r.pass()) << r.domain;
        EXPECT_EQ(r.rhs, 0.0);
    }
    const auto hv = hadamard_values(unit_disk(), 2.0, FieldKind::shear, {0.02, 0.01}, 0.02);
    const double scale = 0.03 * hv.lambda;
    EXPECT_NEAR(hv.finite_difference, hv.bulk, scale);
    EXPECT_NEAR(hv.boundary, hv.bulk, scale);
    EXPECT_THROW(parse_field("twist"), VerifyError);
}

TEST(MinkowskiDerivative, DiskDilationAndEllipse) {
    const auto mv = minkowski_values(unit_disk(), 2.0, {0.04, 0.02, 0.01}, 0.02);
    // disk + tB = (1 + t) B
    EXPECT_NEAR(mv.derivative, -mv.lambda0 / alpha(2.0), 0.01 * mv.lambda0 / alpha(2.0));
    for (std::size_t i = 0; i < mv.t.size(); ++i)
        EXPECT_NEAR(mv.lambda_t[i], mv.lambda0 * std::pow(1 + mv.t[i], -2), 1e-9 * mv.lambda0);
    const auto rs = check_minkowski_derivative(Domain::ellipse({0, 0}, 1.25, 0.8), 2.0, {0.04, 0.02, 0.01}, 0.04);
    ASSERT_EQ(rs.size(), 2u);
    EXPECT_TRUE(rs[0].pass());
    EXPECT_TRUE(rs[1].pass());
    EXPECT_GT(rs[1].margin(), 0.0);  // strict for the ellipse
}

TEST(Colesanti, HomotheticAndRotatedSquares) {
    const auto h = colesanti_sample(parse_domain("polygon 0 0 1 0 1 1 0 1"), parse_domain("polygon 0 0 2 0 2 2 0 2"),
                                    1.0, 0.5, 40, 0.01, 42, 1e-3);
    EXPECT_EQ(h.samples, 1600);
    EXPECT_EQ(h.violations, 0);
    const double c = std::sqrt(0.5);
    const auto rot = Domain::polygon({{c, 0}, {0, c}, {-c, 0}, {0, -c}});
    EXPECT_EQ(colesanti_sample(unit_square(), rot, 1.5, 0.5, 40, 0.01, 42, 1e-3).violations, 0);
    EXPECT_THROW(colesanti_sample(unit_square(), rot, 2.0, 0.5, 4, 0.05, 1, 1e-3), VerifyError);
    // same seed, same answer
    const auto a = colesanti_sample(unit_square(), unit_square(), 1.0, 0.3, 10, 0.05, 9, 1e-3);
    const auto b = colesanti_sample(unit_square(), unit_square(), 1.0, 0.3, 10, 0.05, 9, 1e-3);
    EXPECT_EQ(a.worst, b.worst);
}

TEST(Pohozaev, CorpusShapes) {
    for (const Domain& d : {unit_disk(), Domain::ellipse({0, 0}, 1.25, 0.8), unit_square()})
        for (double q : {1.0, 2.0}) EXPECT_TRUE(check_pohozaev(d, q, 0.01).pass()) << to_spec(d);
    EXPECT_TRUE(check_pohozaev(l_shape(), 1.5, 0.03).pass());
}

TEST(Config, ParsesGrammar) {
    const auto cfg = parse_config(
        "# comment\n"
        "h = 0.05\n"
        "refine = 1\n"
        "q = 1, 2\n"
        "seed = 12345\n"
        "jobs = 2\n"
        "out = somewhere\n"
        "domain a = disk 0 0 1   # trailing comment\n"
        "domain b = polygon 0 0 1 0 1 1 0 1\n"
        "check main_inequality a b\n"
        "check bm a b q=1.5 t=0.25,0.5\n");
    EXPECT_DOUBLE_EQ(cfg.options.h0, 0.05);
    EXPECT_EQ(cfg.options.levels, 2);
    EXPECT_EQ(cfg.q_list, (std::vector<double>{1, 2}));
    EXPECT_EQ(cfg.options.seed, 12345u);
    EXPECT_EQ(cfg.jobs, 2);
    EXPECT_EQ(cfg.out_dir, "somewhere");
    ASSERT_EQ(cfg.checks.size(), 2u);
    EXPECT_EQ(cfg.checks[1].line, 11);
    EXPECT_EQ(cfg.checks[1].params.at("t"), "0.25,0.5");
    EXPECT_EQ(cfg.domain_order, (std::vector<std::string>{"a", "b"}));
}

TEST(Config, ErrorsCarryLineNumbers) {
    auto line_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return e.line();
        }
        return -1;
    };
    EXPECT_EQ(line_of("h = 0.1\nbogus = 3\n"), 2);
    EXPECT_EQ(line_of("\n\ncheck nonsense a\n"), 3);
    EXPECT_EQ(line_of("domain a = disk 0 0 1\ncheck main_inequality b\n"), 2);
    EXPECT_EQ(line_of("domain a = disk 0 0\n"), 1);
    EXPECT_EQ(line_of("q = 1, 3\n"), 1);
    EXPECT_EQ(line_of("h = -1\n"), 1);
    EXPECT_EQ(line_of("domain a = disk 0 0 1\ncheck bm a\n"), 2);
    EXPECT_EQ(line_of("domain a = disk 0 0 1\ncheck main_inequality a t=0.5\n"), 2);
    EXPECT_EQ(line_of("domain a = disk 0 0 1\ndomain a = disk 0 0 2\n"), 2);
    EXPECT_EQ(line_of("just some words\n"), 1);
    EXPECT_THROW(load_config("/nonexistent/config.cfg"), ConfigError);
}

TEST(Corpus, EmptyCheckListGivesNoReports) {
    const auto cfg = parse_config("domain a = disk 0 0 1\n");
    EXPECT_TRUE(run_corpus(cfg).empty());
    EXPECT_EQ(reports_to_json({}), "[]\n");
}

TEST(Corpus, CardinalityOrderAndDeterminism) {
    const std::string text =
        "h = 0.16\n"
        "refine = 1\n"
        "domain disk = disk 0 0 1\n"
        "domain ellipse = ellipse 0 0 1.25 0.8\n"
        "domain square = polygon -0.5 -0.5 0.5 -0.5 0.5 0.5 -0.5 0.5\n"
        "domain rect = polygon -1 -0.5 1 -0.5 1 0.5 -1 0.5\n"
        "domain lshape = polygon -1 -1 1 -1 1 0 0 0 0 1 -1 1\n"
        "domain twodisks = union { disk -1.5 0 1 disk 1.5 0 1 }\n"
        "check main_inequality disk ellipse square rect lshape twodisks\n"
        "check pohozaev square q=1\n";
    auto cfg = parse_config(text);
    const auto a = run_corpus(cfg);
    ASSERT_EQ(a.size(), 19u);
    std::set<std::string> doms;
    for (std::size_t i = 0; i < 18; ++i) {
        EXPECT_EQ(a[i].name, "main_inequality");
        EXPECT_EQ(a[i].q, (std::vector<double>{1, 1.5, 2})[i % 3]);
        doms.insert(a[i].domain);
    }
    EXPECT_EQ(doms.size(), 6u);
    EXPECT_EQ(a[18].name, "pohozaev");
    cfg.jobs = 3;
    const auto b = run_corpus(cfg);
    EXPECT_EQ(reports_to_json(a), reports_to_json(b));
}

TEST(Corpus, TightToleranceFails) {
    auto cfg = parse_config("h = 0.1\nrefine = 0\ndomain d = disk 0 0 1\ncheck pohozaev d q=2\n");
    EXPECT_TRUE(run_corpus(cfg)[0].pass());
    cfg.options.tol_override = 1e-15;
    EXPECT_FALSE(run_corpus(cfg)[0].pass());
}

TEST(Corpus, CheckErrorsBecomeFailures) {
    const auto cfg = parse_config("domain l = polygon -1 -1 1 -1 1 0 0 0 0 1 -1 1\ndomain d = disk 0 0 1\n"
                                  "check bm l d q=1\n");
    const auto r = run_corpus(cfg);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_FALSE(r[0].pass());
    EXPECT_FALSE(r[0].error.empty());
    EXPECT_TRUE(std::isfinite(r[0].margin()));
}
