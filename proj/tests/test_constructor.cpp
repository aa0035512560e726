#include "hcv/constructor/dichotomy.hpp"
#include "hcv/constructor/pipeline.hpp"
#include "hcv/constructor/plan.hpp"
#include "hcv/constructor/stage.hpp"
#include "hcv/io/json.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hcv;

namespace {

StageInputs inputs(const char* p, double rho, Mode mode = Mode::Optimized)
{
    StageInputs in;
    in.p = parse_polynomial(p);
    in.rho0 = rho;
    in.mode = mode;
    if (mode == Mode::Faithful) in.allow_rho_below_2 = true;
    return in;
}

/// A small optimized stage shared by several tests.
const StageResult& small_stage()
{
    static const StageResult r = build_stage(plan_stage(inputs("z", 1.01)));
    return r;
}

} // namespace

TEST(Plan, DefaultDeltaExample)
{
    StageInputs in = inputs("1", 2.0);
    in.s0 = 2;
    in.eps1 = 0.5;
    const StagePlan p = plan_stage(in);
    EXPECT_DOUBLE_EQ(p.eps0, 0.5);
    EXPECT_DOUBLE_EQ(p.M1.to_double(), 1.0);
    EXPECT_NEAR(p.delta0, 0.25 * std::log(9.0 / 8.0), 1e-15);
    EXPECT_NEAR(p.delta0, 0.029445, 1e-6);
    // 3 + log2(1/eps0) = 4 enters v3
    EXPECT_GE(p.v3, 5.0);
}

TEST(Plan, ThresholdsDominated)
{
    for (const char* t : {"1", "z", "1+z", "(1/2+i)z^2 - 3"}) {
        for (double rho : {1.01, 1.05, 1.5}) {
            const StagePlan p = plan_stage(inputs(t, rho));
            for (double q : {double(p.v0), double(p.v1), double(p.v2), double(p.ell), double(p.q_degree),
                             3.0 + std::log2(1.0 / p.eps0)}) {
                EXPECT_GT(p.v3, q) << t << " rho " << rho;
            }
            EXPECT_GE(p.v0, 1u);
            EXPECT_GE(p.v1, 1u);
            EXPECT_GT(p.delta0, 0.0);
            EXPECT_LT(p.delta0, p.delta0_max);
            EXPECT_GT(p.gap, p.ell);
            EXPECT_GE(p.order_floor, p.gap);
        }
    }
}

TEST(Plan, V0IsMinimal)
{
    for (const char* t : {"z", "z^3+1", "(1/2+i)z^2 - 3", "2z^4"}) {
        const StagePlan p = plan_stage(inputs(t, 1.05));
        const double x = p.eps0 / p.M1.to_double();
        auto holds = [&](double v) { return v / (v + p.ell) * std::log1p(x / 2) > std::log1p(x / 4); };
        EXPECT_TRUE(holds(static_cast<double>(p.v0))) << t;
        if (p.v0 > 1) {
            EXPECT_FALSE(holds(static_cast<double>(p.v0 - 1))) << t;
        }
    }
}

TEST(Plan, RejectsBadInputs)
{
    EXPECT_THROW(plan_stage(inputs("z", 1.0)), PreconditionError);
    StageInputs in = inputs("z", 1.5, Mode::Faithful);
    in.allow_rho_below_2 = false;
    EXPECT_THROW(plan_stage(in), PreconditionError);
    in = inputs("z", 1.05);
    in.s0 = 0.5;
    EXPECT_THROW(plan_stage(in), PreconditionError);
    in = inputs("z", 1.05);
    in.delta0 = 1.0;
    EXPECT_THROW(plan_stage(in), PreconditionError);
    in = inputs("0", 1.05);
    EXPECT_THROW(plan_stage(in), PreconditionError);
}

TEST(Plan, TargetFromIndex)
{
    StageInputs in;
    in.j0 = 7;
    const StagePlan p = plan_stage(in);
    EXPECT_EQ(to_string(p.in.p), to_string(to_float(enumerate_targets(7))));
}

TEST(Plan, FaithfulAtRhoTwoRefusesWithEstimate)
{
    StageInputs in = inputs("1", 2.0, Mode::Faithful);
    in.allow_rho_below_2 = false;
    try {
        plan_stage(in);
        FAIL() << "expected CoverageExceeded";
    } catch (const CoverageExceeded& e) {
        ASSERT_TRUE(e.result.log10_N0_estimate.has_value());
        EXPECT_GT(*e.result.log10_N0_estimate, 10.0);
        EXPECT_EQ(e.result.extrapolation, CoverageResult::Extrapolation::DivergesEventually);
    }
}

TEST(Plan, SquaresBaseInfeasible)
{
    StageInputs in = inputs("1", 2.0, Mode::Faithful);
    in.base = parse_sequence("n^2");
    try {
        plan_stage(in);
        FAIL() << "expected BudgetExceeded";
    } catch (const CoverageExceeded& e) {
        ASSERT_TRUE(e.result.supremum.has_value());
        EXPECT_LT(*e.result.supremum, 1.5);
        EXPECT_LT(*e.result.supremum, e.result.required);
    }
}

TEST(Plan, Monotonicity)
{
    // tighter 1/s0 never lowers N0
    std::uint64_t prev = 0;
    for (double s0 : {2.0, 4.0, 10.0, 20.0, 50.0}) {
        StageInputs in = inputs("1", 1.001, Mode::Faithful);
        in.s0 = s0;
        in.eps1 = 1.0;
        const StagePlan p = plan_stage(in);
        EXPECT_GE(p.N0, prev) << s0;
        prev = p.N0;
    }
    // shrinking rho0 toward 1 never increases the required coverage
    double last = 1e300;
    for (double rho : {3.0, 2.0, 1.5, 1.1, 1.01, 1.001}) {
        const StagePlan p = plan_stage(inputs("1", rho));
        EXPECT_LE(p.faithful.required, last);
        last = p.faithful.required;
    }
}

TEST(Stage, FaithfulSingleCell)
{
    const StagePlan plan = plan_stage(inputs("1", 1.0001, Mode::Faithful));
    EXPECT_EQ(plan.N0, 0u);
    const StageResult r = build_stage(plan);
    ASSERT_EQ(r.cert.cells.size(), 1u);
    EXPECT_TRUE(r.cert.pass);
    EXPECT_EQ(r.cert.flag, EndpointFlag::Appended);
    EXPECT_EQ(r.f.size(), 1u);
    VerifyOptions o;
    o.grid = 200;
    EXPECT_TRUE(verify_stage(r.f, r.cert, o).pass);
}

TEST(Stage, FaithfulSmall)
{
    StageInputs in = inputs("1+z", 1.002, Mode::Faithful);
    const StagePlan plan = plan_stage(in);
    const StageResult r = build_stage(plan);
    EXPECT_EQ(r.cert.cells.size(), plan.N0 + 1);
    EXPECT_TRUE(r.cert.pass);
    for (const auto& c : r.cert.cells) {
        EXPECT_LT(c.local.to_double(), plan.eps0 / 2);
        EXPECT_LT(c.tail.to_double(), plan.eps0 / 2);
    }
    EXPECT_LT(r.cert.closeness.analytic.to_double(), plan.eps0);
    VerifyOptions o;
    o.grid = 500;
    o.random = 500;
    const auto v = verify_stage(r.f, r.cert, o);
    EXPECT_TRUE(v.pass) << v.failures;
}

TEST(Stage, OptimizedStructure)
{
    const StageResult& r = small_stage();
    const StageCertificate& c = r.cert;
    ASSERT_TRUE(c.pass);
    EXPECT_EQ(c.cells.size(), c.plan.N0 + 1);
    EXPECT_EQ(c.m0, c.cells.back().order);
    EXPECT_DOUBLE_EQ(c.cells.front().anchor, 1.0 / 1.01);
    // the final cell is the single point rho0 and carries only its tail
    EXPECT_EQ(c.cells.back().anchor, 1.01);
    EXPECT_EQ(c.cells.back().right, 1.01);
    EXPECT_TRUE(c.cells.back().local.is_zero());
    ASSERT_EQ(r.f.size(), c.cells.size());
    for (std::size_t k = 0; k < c.cells.size(); ++k) {
        EXPECT_EQ(r.f[k].m0, c.cells[k].order);
        EXPECT_EQ(r.f[k].lambda0, c.cells[k].anchor);
        if (k > 0) {
            EXPECT_EQ(c.cells[k].anchor, c.cells[k - 1].right);
            EXPECT_GT(c.cells[k].order - c.cells[k - 1].order, c.plan.gap);
        }
        EXPECT_GT(c.cells[k].margin.to_double(), 0.0);
        EXPECT_LT(c.cells[k].bound.to_double(), 1.0 / c.plan.in.s0);
    }
    EXPECT_LT(c.closeness.bound.to_double(), c.plan.eps0);
    EXPECT_LT(c.closeness.analytic.to_double(), c.plan.eps0);
}

TEST(Stage, AnchorsObserveOnlyTheTail)
{
    const StageResult& r = small_stage();
    for (std::size_t k = 0; k < r.cert.cells.size(); k += 7) {
        const auto& c = r.cert.cells[k];
        const auto e = evaluate_error(r.f, k, Dilation(c.anchor), r.cert.plan.in.p, r.cert.plan.R0);
        EXPECT_LE(e.total().to_double(), c.tail.to_double() * (1 + 1e-9) + 1e-13) << k;
    }
}

TEST(Stage, CertificateSoundnessRandomLambdas)
{
    const StageResult& r = small_stage();
    VerifyOptions o;
    o.grid = 1;
    o.random = 10000;
    o.seed = 2024;
    o.anchors_and_midpoints = false;
    std::vector<VerifySample> s;
    const auto v = verify_stage(r.f, r.cert, o, &s);
    EXPECT_TRUE(v.pass);
    EXPECT_EQ(s.size(), 10001u);
    for (const auto& x : s) EXPECT_LT(x.observed.to_double(), 0.1);
}

TEST(Stage, VerifyGridIncludesAnchorsAndMidpoints)
{
    const StageResult& r = small_stage();
    VerifyOptions o;
    o.grid = 100;
    const auto v = verify_stage(r.f, r.cert, o);
    EXPECT_EQ(v.samples, 100 + 2 * r.cert.cells.size() - 1);
    EXPECT_TRUE(v.pass);
    o.grid = 0;
    EXPECT_THROW(verify_stage(r.f, r.cert, o), PreconditionError);
}

TEST(Stage, VerifyCatchesTamperedBound)
{
    StageCertificate c = small_stage().cert;
    c.cells[3].bound = c.cells[3].bound * XReal(1e-6);
    VerifyOptions o;
    o.grid = 10;
    const auto v = verify_stage(small_stage().f, c, o);
    EXPECT_FALSE(v.pass);
    EXPECT_GE(v.failures, 1u);
}

TEST(Stage, DegreeViolationPropagates)
{
    BlockSum Q;
    Q.append_group({solve_block(100, 1.0, parse_polynomial("1"))}, "q");
    const StagePlan plan = plan_stage(inputs("z", 1.01));
    EXPECT_THROW(build_stage(plan, Q), DegreeViolation);
}

TEST(Stage, BuildIsDeterministic)
{
    const StagePlan plan = plan_stage(inputs("1+z", 1.005));
    const auto a = io::to_json(build_stage(plan).cert).dump();
    const auto b = io::to_json(build_stage(plan).cert).dump();
    EXPECT_EQ(a, b);
}

TEST(Json, RoundTrip)
{
    const StageResult& r = small_stage();
    const io::json cj = io::to_json(r.cert);
    const StageCertificate c2 = io::certificate_from_json(io::json::parse(cj.dump()));
    EXPECT_EQ(io::to_json(c2).dump(), cj.dump());
    const io::json fj = io::to_json(r.f);
    const BlockSum f2 = io::blocksum_from_json(io::json::parse(fj.dump()));
    ASSERT_EQ(f2.size(), r.f.size());
    for (std::size_t k = 0; k < f2.size(); ++k) {
        EXPECT_EQ(f2[k].m0, r.f[k].m0);
        EXPECT_EQ(f2[k].lambda0, r.f[k].lambda0);
    }
    VerifyOptions o;
    o.grid = 200;
    EXPECT_TRUE(verify_stage(f2, c2, o).pass);
    EXPECT_TRUE(cj.at("cells").at(0).at("anchor").is_string());
}

TEST(Pipeline, ParseSchedule)
{
    const auto s = parse_schedule("1,1.05,1,10;2,1.5,#7,20");
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[1].n, 2u);
    EXPECT_EQ(*s[1].j, 7u);
    EXPECT_DOUBLE_EQ(s[1].s, 20.0);
    EXPECT_THROW(parse_schedule("1,1.05,1"), PreconditionError);
    EXPECT_EQ(default_schedule().size(), 3u);
}

TEST(Pipeline, SingleStageReducesToBuildStage)
{
    PipelineOptions o;
    o.verify.grid = 100;
    const auto r = run_pipeline(parse_schedule("1,1.01,z,10"), o);
    ASSERT_TRUE(r.pass);
    const StageResult& s = small_stage();
    EXPECT_EQ(r.certs[0].cells.size(), s.cert.cells.size());
    EXPECT_EQ(r.certs[0].m0, s.cert.m0);
    EXPECT_TRUE(r.cauchy.empty());
}

TEST(Pipeline, TwoStagesPersist)
{
    PipelineOptions o;
    o.verify.grid = 500;
    const auto r = run_pipeline(parse_schedule("1,1.01,1,10;1,1.002,z,10"), o);
    ASSERT_EQ(r.certs.size(), 2u);
    EXPECT_TRUE(r.pass);
    EXPECT_GT(r.certs[0].allowance.to_double(), 0.0);
    EXPECT_LE(r.certs[0].allowance.to_double(), 0.25 * r.certs[0].min_margin().to_double());
    EXPECT_GT(r.certs[1].cells.front().order, r.certs[0].m0);
    EXPECT_LE(r.eps1[1], 0.25);
    for (const auto& v : r.final_verify) EXPECT_TRUE(v.pass);
    ASSERT_EQ(r.cauchy.size(), 1u);
    EXPECT_LT(r.cauchy[0].metric, 0.5);
}

TEST(Pipeline, CrossBudgetBoundsEveryEarlierCertificate)
{
    std::vector<StageCertificate> certs{small_stage().cert};
    const Target t(parse_polynomial("1+z"));
    for (double frac : {0.5, 0.1, 1e-6}) {
        const auto res = reserve_cross_budget(certs, t.log2_C(), 1.0 / 1.01, frac, small_stage().f.degree());
        EXPECT_GE(res.floor, small_stage().f.degree());
        ASSERT_EQ(res.increments.size(), 1u);
        EXPECT_LE(res.increments[0].to_double(), frac * certs[0].surviving_margin().to_double());
    }
    certs[0].allowance = certs[0].min_margin();
    EXPECT_THROW(reserve_cross_budget(certs, t.log2_C(), 1.0, 0.5, 0), MarginExhausted);
}

TEST(Pipeline, TowerKeepsStageCertified)
{
    StageResult s = small_stage();
    std::vector<StageCertificate> certs{s.cert};
    const auto tower = anchor_tower(s.f, certs, s.cert.plan.in.p, 1.0, 1, 0.07, 64);
    EXPECT_EQ(tower.candidates.size(), 64u);
    for (const auto& c : tower.candidates) EXPECT_LT(c.certified_error, 0.07);
    EXPECT_GT(certs[0].allowance.to_double(), 0.0);
    VerifyOptions o;
    o.grid = 300;
    EXPECT_TRUE(verify_stage(s.f, certs[0], o).pass);
}

TEST(Dichotomy, Examples)
{
    const Polynomial one = parse_polynomial("1");
    const auto sq = dichotomy_probe(parse_sequence("n^2"), 1.5, one);
    EXPECT_EQ(sq.verdict, DichotomyReport::Verdict::Infeasible);
    ASSERT_TRUE(sq.supremum.has_value());
    EXPECT_LT(*sq.supremum, sq.required);
    EXPECT_EQ(sq.divergence.verdict, DivergenceReport::Verdict::Convergent);
    for (const char* s : {"n", "2n"}) {
        const auto r = dichotomy_probe(parse_sequence(s), 1.5, one);
        EXPECT_EQ(r.verdict, DichotomyReport::Verdict::Feasible) << s;
        EXPECT_EQ(r.divergence.verdict, DivergenceReport::Verdict::Divergent);
        ASSERT_TRUE(r.log10_N0.has_value());
    }
    const auto tiny = dichotomy_probe(parse_sequence("n"), 1.0001, one);
    EXPECT_EQ(tiny.verdict, DichotomyReport::Verdict::Feasible);
    ASSERT_TRUE(tiny.N0.has_value());
    EXPECT_GT(tiny.achieved, tiny.required);
}
