#pragma once

// Feasibility of the coverage condition for a base sequence: with the default
// step scale the partition closes exactly when sum 1/k_n diverges.

#include "hcv/constructor/plan.hpp"
#include "hcv/sequences/sequence.hpp"
#include "hcv/sequences/subsequence.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace hcv {

struct DichotomyReport {
    std::string sequence;
    double rho0 = 0;
    double delta0 = 0;
    std::uint64_t gap = 0;
    double required = 0;       // rho0 - 1/rho0
    double achieved = 0;       // delta0 * partial sum reached
    enum class Verdict { Feasible, Infeasible, Undetermined } verdict = Verdict::Undetermined;
    std::optional<std::uint64_t> N0;      // exact, when coverage was reached by scanning
    std::optional<double> log10_N0;       // predicted cost otherwise
    std::optional<double> supremum;       // attainable sup of delta0 * sum 1/mu_n
    CoverageResult::Extrapolation extrapolation = CoverageResult::Extrapolation::None;
    DivergenceReport divergence;
    std::string message;
};

inline const char* to_string(DichotomyReport::Verdict v)
{
    switch (v) {
    case DichotomyReport::Verdict::Feasible: return "feasible";
    case DichotomyReport::Verdict::Infeasible: return "infeasible";
    case DichotomyReport::Verdict::Undetermined: return "undetermined";
    }
    return "undetermined";
}

/// Runs the faithful planner (rho0 > 1 allowed) and classifies the outcome.
inline DichotomyReport dichotomy_probe(const SequenceSpec& base, double rho0, const Polynomial& p, double s0 = 10.0,
                                       double eps1 = 0.25, std::uint64_t n0 = 1, std::uint64_t cap = 1000000)
{
    StageInputs in;
    in.base = base;
    in.rho0 = rho0;
    in.p = p;
    in.s0 = s0;
    in.eps1 = eps1;
    in.n0 = n0;
    in.cap = cap;
    in.mode = Mode::Faithful;
    in.allow_rho_below_2 = true;

    DichotomyReport r;
    r.sequence = base.text;
    r.rho0 = rho0;
    r.required = rho0 - 1.0 / rho0;
    r.divergence = divergence_report(base, std::min<std::uint64_t>(cap, 100000));
    try {
        const StagePlan plan = plan_stage(in);
        r.delta0 = plan.delta0;
        r.gap = plan.gap;
        r.N0 = plan.N0;
        r.log10_N0 = plan.faithful.log10_N0;
        Subsequence sub = extract_subsequence(base, plan.gap, plan.order_floor);
        r.achieved = plan.delta0 * sub.prefix(plan.N0 + 1);
        r.verdict = DichotomyReport::Verdict::Feasible;
        r.message = "coverage reached with N0 = " + std::to_string(plan.N0);
    } catch (const CoverageExceeded& e) {
        const CoverageResult& c = e.result;
        // constants are deterministic, so recompute them without the coverage step
        in.mode = Mode::Optimized;
        const StagePlan consts = plan_stage(in);
        r.delta0 = consts.delta0;
        r.gap = consts.faithful.gap;
        r.achieved = c.achieved;
        r.log10_N0 = c.log10_N0_estimate;
        r.supremum = c.supremum;
        r.extrapolation = c.extrapolation;
        r.message = e.what();
        if (c.extrapolation == CoverageResult::Extrapolation::DivergesEventually) {
            r.verdict = DichotomyReport::Verdict::Feasible;
        } else if (c.extrapolation == CoverageResult::Extrapolation::BoundedAbove && c.supremum &&
                   *c.supremum < r.required) {
            r.verdict = DichotomyReport::Verdict::Infeasible;
        }
    }
    return r;
}

} // namespace hcv
