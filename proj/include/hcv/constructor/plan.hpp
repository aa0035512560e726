#pragma once

// Stage planning: every constant needed to build one block stage over the
// dilation interval [1/rho0, rho0], in either the faithful or the optimized mode.

#include "hcv/blocks/pi_function.hpp"
#include "hcv/blocks/solution_block.hpp"
#include "hcv/core/errors.hpp"
#include "hcv/core/wide.hpp"
#include "hcv/core/xreal.hpp"
#include "hcv/poly/polynomial.hpp"
#include "hcv/sequences/subsequence.hpp"
#include "hcv/sequences/targets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hcv {

enum class Mode { Faithful, Optimized };

inline const char* to_string(Mode m) { return m == Mode::Faithful ? "faithful" : "optimized"; }

inline Mode parse_mode(std::string_view s)
{
    if (s == "faithful") return Mode::Faithful;
    if (s == "optimized") return Mode::Optimized;
    throw PreconditionError("mode must be faithful or optimized");
}

struct StageInputs {
    std::uint64_t n0 = 1;
    double rho0 = 1.05;
    Polynomial p;                   // target; filled from j0 when j0 is set
    std::optional<std::uint64_t> j0;
    double s0 = 10.0;
    double eps1 = 0.25;
    Mode mode = Mode::Optimized;
    SequenceSpec base = SequenceSpec::affine(1, 0);
    double R0 = 0.0;                // 0: 1.05 * n0
    double delta0 = 0.0;            // faithful step scale; 0: half the admissible maximum
    std::uint64_t cap = 1000000;    // cells / coverage terms
    std::uint64_t order_floor = 0;  // first order must exceed this (cross-stage budget)
    unsigned exact_tail_blocks = kDefaultExactTailBlocks;
    bool allow_rho_below_2 = false; // faithful mode only
};

/// What the faithful constants would cost: log10 of the coverage index.
struct FaithfulEstimate {
    double delta0 = 0;
    std::uint64_t gap = 0;         // floor(v3)
    double required = 0;           // rho0 - 1/rho0
    double required_sum = 0;       // required / delta0
    std::optional<double> log10_N0;
    CoverageResult::Extrapolation extrapolation = CoverageResult::Extrapolation::None;
    std::optional<double> supremum;
};

struct StagePlan {
    StageInputs in;
    std::string target_text;
    double eps0 = 0;
    double R0 = 0;
    unsigned ell = 0;
    XReal M0, M1, M1_sharp;
    double delta0 = 0;      // faithful
    double delta0_max = 0;  // (1/rho0) log(1 + eps0/4M1)
    std::uint64_t v0 = 0, v1 = 0, v2 = 0;
    double v3 = 0;          // faithful gap bound
    std::uint64_t N0_prime = 0; // gamma threshold at 2 R0 (no rho0 factor)
    std::uint64_t gap = 0;  // subsequence gap M: consecutive orders differ by more than M
    std::uint64_t order_floor = 0; // mu_1 > order_floor
    std::uint64_t q_degree = 0;
    bool q_zero = true;
    std::uint64_t N0 = 0;   // faithful: from coverage; optimized: set by build
    FaithfulEstimate faithful;
    std::vector<std::string> deviations;

    TargetPtr target() const { return make_target(in.p); }
    double tau() const { return (1.0 - 1.0 / 16.0) / in.s0; } // optimized per-cell budget
};

namespace detail {

/// Minimal v >= 1 with (1 + eps0/2M1)^{v/(v+ell)} > 1 + eps0/4M1.
inline std::uint64_t threshold_v0(const XReal& M1, double eps0, unsigned ell)
{
    const wide x = static_cast<wide>(eps0) / M1.to_wide();
    const wide lhs = log1pq(x / 2);
    const wide rhs = log1pq(x / 4);
    for (std::uint64_t v = 1;; ++v) {
        if (static_cast<wide>(v) / static_cast<wide>(v + ell) * lhs > rhs) return v;
        if (v > 1000000000ULL) throw BudgetExceeded("v0 scan did not terminate");
    }
}

/// Minimal v such that (1 + rho0 delta0/k_w)^{k_w} < 1 + eps0/4M1 for 16 consecutive w >= v.
inline std::uint64_t threshold_v1(const SequenceSpec& base, double rho0, double delta0, const XReal& M1, double eps0)
{
    const wide rhs = log1pq(static_cast<wide>(eps0) / (4 * M1.to_wide()));
    const wide x = static_cast<wide>(rho0) * static_cast<wide>(delta0);
    std::uint64_t run = 0;
    for (std::uint64_t v = 1; v <= 1000000; ++v) {
        const auto k = base.term(v);
        if (!k) break;
        const wide kk = static_cast<wide>(*k);
        const bool ok = kk * log1pq(x / kk) < rhs;
        run = ok ? run + 1 : 0;
        if (run == 16) return v - 15;
    }
    throw BudgetExceeded("no stable v1 within the first 10^6 sequence terms");
}

} // namespace detail

/// Faithful-mode cost: closed form for linear bases, otherwise a scan of at most
/// scan_cap terms (none when scan_cap is 0).
inline FaithfulEstimate faithful_estimate(const StagePlan& plan, std::uint64_t scan_cap)
{
    FaithfulEstimate e;
    e.delta0 = plan.delta0;
    e.gap = static_cast<std::uint64_t>(std::floor(plan.v3));
    e.required = plan.in.rho0 - 1.0 / plan.in.rho0;
    e.required_sum = e.required / plan.delta0;
    Subsequence sub = extract_subsequence(plan.in.base, e.gap, std::max(e.gap, plan.in.order_floor));
    const SequenceSpec& b = plan.in.base;
    const bool linear = b.kind == SequenceSpec::Kind::Affine || (b.kind == SequenceSpec::Kind::Power && b.c == 1);
    if (linear) {
        const SequenceSpec lin = b.kind == SequenceSpec::Kind::Affine ? b : SequenceSpec::affine(1, 0);
        const double s = static_cast<double>(detail::affine_subsequence_step(lin, e.gap));
        e.log10_N0 = detail::affine_log10_terms(static_cast<double>(sub.mu(1)), s, e.required_sum);
        e.extrapolation = CoverageResult::Extrapolation::DivergesEventually;
        return e;
    }
    if (scan_cap == 0) return e;
    CoverageResult c = coverage_N0(sub, plan.delta0, plan.in.rho0, scan_cap);
    e.extrapolation = c.extrapolation;
    e.supremum = c.supremum;
    if (c.reached) e.log10_N0 = c.N0 == 0 ? 0.0 : std::log10(static_cast<double>(c.N0));
    return e;
}

/// Computes every constant of the stage. In faithful mode this also fixes N0 by
/// scanning the coverage sum, refusing up front when the estimate exceeds 10^10.
inline StagePlan plan_stage(StageInputs in, std::uint64_t q_degree = 0, bool q_zero = true)
{
    require(in.n0 >= 1, "disk index n0 must be >= 1");
    require(std::isfinite(in.rho0) && in.rho0 > 1.0, "rho0 must exceed 1");
    require(in.s0 >= 1.0, "s0 must be >= 1");
    require(in.eps1 > 0.0, "eps1 must be positive");
    require(in.cap >= 1, "cap must be >= 1");
    if (in.mode == Mode::Faithful && in.rho0 < 2.0 && !in.allow_rho_below_2) {
        throw PreconditionError("faithful mode needs rho0 >= 2");
    }
    if (in.j0) in.p = to_float(enumerate_targets(*in.j0));
    require(!in.p.is_zero(), "target polynomial must be nonzero");

    StagePlan plan;
    plan.target_text = to_string(in.p);
    plan.q_degree = q_degree;
    plan.q_zero = q_zero;
    plan.eps0 = std::min(in.eps1, 1.0 / in.s0);
    plan.R0 = in.R0 > 0.0 ? in.R0 : 1.05 * static_cast<double>(in.n0);
    require(plan.R0 > 1.0 && plan.R0 >= static_cast<double>(in.n0), "R0 must exceed 1 and contain the n0-disk");

    const Target t(in.p);
    plan.ell = t.ell;
    plan.M0 = t.M0;
    plan.M1 = t.M1(plan.R0);
    plan.M1_sharp = t.M1_sharp(plan.R0);
    const wide ratio = static_cast<wide>(plan.eps0) / (4 * plan.M1.to_wide());
    plan.delta0_max = static_cast<double>(log1pq(ratio) / static_cast<wide>(in.rho0));
    plan.delta0 = in.delta0 > 0.0 ? in.delta0 : plan.delta0_max / 2.0;
    require(plan.delta0 > 0.0 && plan.delta0 < plan.delta0_max, "delta0 must lie in (0, (1/rho0) log(1 + eps0/4M1))");

    plan.v0 = detail::threshold_v0(plan.M1, plan.eps0, plan.ell);
    plan.v1 = detail::threshold_v1(in.base, in.rho0, plan.delta0, plan.M1, plan.eps0);
    plan.v2 = gamma_threshold(t.log2_C(), 2.0 * in.rho0 * plan.R0);
    plan.N0_prime = gamma_threshold(t.log2_C(), 2.0 * plan.R0);
    const double log_eps = 3.0 + std::log2(1.0 / plan.eps0);
    plan.v3 = std::max({static_cast<double>(plan.v0), static_cast<double>(plan.v1), static_cast<double>(plan.v2),
                        static_cast<double>(plan.ell), static_cast<double>(q_degree), log_eps}) + 1.0;

    if (in.mode == Mode::Faithful) {
        plan.gap = static_cast<std::uint64_t>(std::floor(plan.v3));
        plan.order_floor = std::max(plan.gap, in.order_floor);
    } else {
        const double g = std::max({static_cast<double>(plan.v0), static_cast<double>(plan.v1),
                                   static_cast<double>(plan.v2), static_cast<double>(plan.ell),
                                   3.0 + std::log2(in.s0)}) + 1.0;
        plan.gap = static_cast<std::uint64_t>(std::floor(g));
        const double closeness = 2.0 + std::log2(1.0 / plan.eps0);
        plan.order_floor = std::max({plan.gap, q_zero ? 0 : q_degree, in.order_floor,
                                     static_cast<std::uint64_t>(std::floor(closeness))});
        plan.deviations.push_back("optimized: per-cell maximal steps with the sharp constant sum |beta_j| R0^j");
        plan.deviations.push_back("optimized: tails bounded by exact images of the next blocks plus the analytic remainder");
        plan.deviations.push_back("optimized: deg Q enters the first-order floor, not the gap");
        plan.deviations.push_back("optimized: the final cell is the single point rho0 with its own block, so m0 = mu_{N0+1}");
        if (!(in.rho0 > 2.0)) plan.deviations.push_back("rho0 > 2 relaxed to rho0 > 1");
    }

    plan.in = std::move(in);
    const bool faithful = plan.in.mode == Mode::Faithful;
    plan.faithful = faithful_estimate(plan, faithful ? 0 : std::min<std::uint64_t>(plan.in.cap, 100000));

    if (faithful) {
        if (!(plan.in.rho0 > 2.0)) plan.deviations.push_back("rho0 > 2 relaxed to rho0 > 1");
        const auto& est = plan.faithful;
        CoverageResult diag;
        diag.required = est.required;
        diag.extrapolation = est.extrapolation;
        diag.supremum = est.supremum;
        diag.log10_N0_estimate = est.log10_N0;
        if (est.log10_N0 && *est.log10_N0 > 10.0) {
            throw CoverageExceeded("faithful coverage needs about 10^" + std::to_string(*est.log10_N0) +
                                       " cells (required sum of 1/mu_n: " + std::to_string(est.required_sum) + ")",
                                   diag);
        }
        Subsequence sub = extract_subsequence(plan.in.base, plan.gap, plan.order_floor);
        CoverageResult c = coverage_N0(sub, plan.delta0, plan.in.rho0, plan.in.cap);
        if (!est.log10_N0) {
            plan.faithful.extrapolation = c.extrapolation;
            plan.faithful.supremum = c.supremum;
            if (c.reached) plan.faithful.log10_N0 = c.N0 == 0 ? 0.0 : std::log10(static_cast<double>(c.N0));
        }
        if (!c.reached) {
            std::string msg = "coverage " + std::to_string(c.required) + " not reached within " +
                              std::to_string(plan.in.cap) + " terms (achieved " + std::to_string(c.achieved) + ")";
            if (c.supremum) msg += "; attainable supremum " + std::to_string(*c.supremum);
            throw CoverageExceeded(msg, c);
        }
        plan.N0 = c.N0;
    }
    return plan;
}

} // namespace hcv
