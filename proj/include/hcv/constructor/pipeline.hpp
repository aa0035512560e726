#pragma once

// Finite sequence of stages f_1, f_2, ... with f_t = f_{t-1} + (new blocks).
// Blocks added at stage t are placed high enough that their effect on every
// earlier certificate is bounded by 2^{-t} times that certificate's surviving
// margin; the bound is booked as the certificate's allowance.

#include "hcv/blocks/block_sum.hpp"
#include "hcv/constructor/plan.hpp"
#include "hcv/constructor/stage.hpp"
#include "hcv/core/errors.hpp"
#include "hcv/poly/norms.hpp"
#include "hcv/weyl/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hcv {

struct ScheduleEntry {
    std::uint64_t n = 1;
    double rho = 1.05;
    Polynomial p;
    std::optional<std::uint64_t> j;
    double s = 10.0;
};

/// Parses "n,rho,target,s;n,rho,target,s;..."; a target of the form "#j" selects p_j.
inline std::vector<ScheduleEntry> parse_schedule(std::string_view text)
{
    std::vector<ScheduleEntry> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find(';', pos), text.size());
        const std::string_view item = text.substr(pos, end - pos);
        if (!item.empty()) {
            std::vector<std::string> f;
            std::size_t q = 0;
            while (true) {
                const std::size_t c = item.find(',', q);
                f.emplace_back(item.substr(q, c == std::string_view::npos ? std::string_view::npos : c - q));
                if (c == std::string_view::npos) break;
                q = c + 1;
            }
            if (f.size() != 4) throw PreconditionError("schedule entries need four fields: n,rho,target,s");
            ScheduleEntry e;
            e.n = std::stoull(f[0]);
            e.rho = static_cast<double>(parse_wide_decimal(f[1]));
            if (!f[2].empty() && f[2][0] == '#') {
                e.j = std::stoull(f[2].substr(1));
            } else {
                e.p = parse_polynomial(f[2]);
            }
            e.s = static_cast<double>(parse_wide_decimal(f[3]));
            out.push_back(std::move(e));
        }
        pos = end + 1;
    }
    require(!out.empty(), "empty schedule");
    return out;
}

/// The three-stage demonstration schedule: targets 1, z, 1+z with s = 10.
inline std::vector<ScheduleEntry> default_schedule()
{
    return parse_schedule("1,1.05,1,10;1,1.005,z,10;1,1.005,1+z,10");
}

struct CrossReservation {
    std::uint64_t floor = 0;        // new orders must exceed this
    std::vector<XReal> increments;  // per earlier certificate
};

/// Smallest order floor S such that a new group with constant C = 2^{log2C} and
/// anchors >= min_anchor perturbs each earlier certificate s by at most
/// fraction * surviving_s, and S >= deg f.
inline CrossReservation reserve_cross_budget(const std::vector<StageCertificate>& certs, wide log2C, double min_anchor,
                                             double fraction, std::uint64_t degree)
{
    CrossReservation r;
    r.floor = degree;
    for (std::size_t s = 0; s < certs.size(); ++s) {
        const StageCertificate& c = certs[s];
        const XReal target = c.surviving_margin() * XReal(fraction);
        if (!(target > XReal(0.0))) throw MarginExhausted("certificate " + c.label + " has no surviving margin");
        const double Lambda = c.rho0() / min_anchor;
        const wide log2L = wide_log2(static_cast<wide>(Lambda));
        const std::uint64_t m = c.top_order();
        // start past the peak of x^v/v!, where the bound decreases in d
        std::uint64_t d = static_cast<std::uint64_t>(std::ceil(Lambda * c.plan.R0)) + 1;
        while (!(closure_bound(log2C, log2L, m, c.plan.R0, d) <= target)) {
            d += std::max<std::uint64_t>(1, d / 64);
        }
        r.floor = std::max(r.floor, m + d);
    }
    for (const auto& c : certs) {
        const double Lambda = c.rho0() / min_anchor;
        const std::uint64_t m = c.top_order();
        r.increments.push_back(
            closure_bound(log2C, wide_log2(static_cast<wide>(Lambda)), m, c.plan.R0, r.floor + 1 - m));
    }
    return r;
}

inline void book_allowances(std::vector<StageCertificate>& certs, const CrossReservation& r)
{
    for (std::size_t s = 0; s < certs.size(); ++s) certs[s].allowance += r.increments[s];
}

struct CauchyEntry {
    std::size_t t = 0;  // metric between f_t and f_{t+1}
    double metric = 0;
    double bound = 0;   // 2^{-t}
    bool ok = false;
};

struct PipelineOptions {
    Mode mode = Mode::Optimized;
    SequenceSpec base = SequenceSpec::affine(1, 0);
    std::uint64_t cap = 1000000;
    unsigned exact_tail_blocks = kDefaultExactTailBlocks;
    VerifyOptions verify;
};

struct PipelineResult {
    BlockSum f;
    std::vector<StageCertificate> certs;
    std::vector<double> eps1;            // per stage, after retries
    std::vector<unsigned> retries;
    std::vector<CauchyEntry> cauchy;
    std::vector<VerifyReport> final_verify;
    bool pass = false;
};

/// Truncation of the metric series; the dropped tail is at most this.
inline constexpr double kMetricTol = 1e-12;

/// rho(g, g + h) where h is the block range of one group.
inline double group_metric(const BlockSum& f, std::size_t group)
{
    const auto& g = f.groups()[group];
    return metric_rho_from([&](double R) { return f.blocks_upper_norm(g.begin, g.end, R); }, kMetricTol);
}

inline PipelineResult run_pipeline(const std::vector<ScheduleEntry>& schedule, const PipelineOptions& opt)
{
    require(!schedule.empty(), "empty schedule");
    PipelineResult out;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const std::size_t t = k + 1;
        const ScheduleEntry& e = schedule[k];
        StageInputs in;
        in.n0 = e.n;
        in.rho0 = e.rho;
        in.p = e.p;
        in.j0 = e.j;
        in.s0 = e.s;
        in.mode = opt.mode;
        in.base = opt.base;
        in.cap = opt.cap;
        in.exact_tail_blocks = opt.exact_tail_blocks;
        in.allow_rho_below_2 = true;
        double eps1 = std::ldexp(1.0, -static_cast<int>(t));
        for (const auto& c : out.certs) eps1 = std::min(eps1, 0.5 * c.surviving_margin().to_double());
        if (!(eps1 > 0.0)) throw MarginExhausted("no surviving margin left for stage " + std::to_string(t));

        const Polynomial target = e.j ? to_float(enumerate_targets(*e.j)) : e.p;
        const CrossReservation res = reserve_cross_budget(out.certs, Target(target).log2_C(), 1.0 / e.rho,
                                                          std::ldexp(1.0, -static_cast<int>(t)), out.f.degree());
        in.order_floor = res.floor;

        std::optional<StageResult> built;
        unsigned retries = 0;
        for (; retries < 2 && !built; ++retries) {
            in.eps1 = eps1;
            try {
                const StagePlan plan = plan_stage(in, out.f.degree(), out.f.size() == 0 && out.f.base().is_zero());
                StageResult r = build_stage(plan, out.f, "stage " + std::to_string(t));
                if (r.cert.pass) built = std::move(r);
            } catch (const BudgetExceeded&) {
            } catch (const CertificationFailure&) {
            }
            if (!built) eps1 /= 2;
        }
        if (!built) throw MarginExhausted("stage " + std::to_string(t) + " does not fit under the surviving margins");
        book_allowances(out.certs, res);
        out.f = std::move(built->f);
        out.certs.push_back(std::move(built->cert));
        out.eps1.push_back(in.eps1);
        out.retries.push_back(retries - 1);
    }
    for (std::size_t g = 1; g < out.f.groups().size(); ++g) {
        CauchyEntry c;
        c.t = g;
        c.metric = group_metric(out.f, g);
        c.bound = std::ldexp(1.0, -static_cast<int>(g));
        c.ok = c.metric + kMetricTol < c.bound;
        out.cauchy.push_back(c);
    }
    out.pass = true;
    for (const auto& c : out.certs) {
        out.final_verify.push_back(verify_stage(out.f, c, opt.verify));
        out.pass = out.pass && c.pass && out.final_verify.back().pass;
    }
    for (const auto& c : out.cauchy) out.pass = out.pass && c.ok;
    return out;
}

struct TowerResult {
    std::size_t group = 0;
    std::uint64_t floor = 0;
    std::uint64_t gap = 0;
    std::vector<WitnessCandidate> candidates;
};

/// Appends blocks (m, lambda0, p) above f at gap N1 + 1 (at least 3 + log2(1/eps1)),
/// books the cross budget on the certificates, and returns the tower orders
/// with their recomputed errors at lambda0 on the n0-disk.
inline TowerResult anchor_tower(BlockSum& f, std::vector<StageCertificate>& certs, const Polynomial& p, double lambda0,
                                std::uint64_t n0, double eps1, std::size_t count, std::uint64_t min_floor = 0,
                                unsigned B = kDefaultExactTailBlocks)
{
    require(count >= 1, "tower needs at least one block");
    require(eps1 > 0.0 && eps1 < 1.0, "eps1 must lie in (0,1)");
    const TargetPtr t = make_target(p);
    const double R = static_cast<double>(n0);
    const std::uint64_t N1 = std::max<std::uint64_t>(gamma_threshold(t->log2_C(), 2.0 * R), t->ell) + 1;
    TowerResult out;
    out.gap = std::max<std::uint64_t>(N1 + 1, static_cast<std::uint64_t>(std::ceil(3.0 + std::log2(1.0 / eps1))));
    const CrossReservation res = reserve_cross_budget(certs, t->log2_C(), lambda0, 0.5, std::max(f.degree(), min_floor));
    out.floor = res.floor;
    std::vector<SolutionBlock> blocks;
    for (std::size_t k = 0; k < count; ++k) {
        blocks.push_back(SolutionBlock{out.floor + 1 + k * out.gap, lambda0, t});
    }
    out.group = f.append_group(std::move(blocks), "tower");
    book_allowances(certs, res);
    const auto& g = f.groups()[out.group];
    out.candidates.resize(g.end - g.begin);
    parallel_for(out.candidates.size(), [&](std::size_t k) {
        const std::size_t idx = g.begin + k;
        out.candidates[k] = {idx, f[idx].m0, evaluate_error(f, idx, Dilation(lambda0), p, R, B).total().to_double()};
    });
    return out;
}

struct StageRotation {
    RotationWitness witness;
    TowerResult tower;
};

/// Rotation witness for the stage certs.front() at lambda0: the stage cell
/// containing lambda0 plus an anchor tower of `tower_blocks` blocks above f.
inline StageRotation rotate_stage(BlockSum& f, std::vector<StageCertificate>& certs, wide theta0, double lambda0,
                                  double eps0, std::size_t tower_blocks, std::size_t search_cap)
{
    require(!certs.empty(), "rotation needs a stage certificate");
    const StageCertificate& c = certs.front();
    require(lambda0 >= c.cells.front().anchor && lambda0 <= c.rho0(), "lambda0 must lie in the stage interval");
    const Polynomial p = c.plan.in.p;
    const std::uint64_t n0 = c.plan.in.n0;
    const RotationParams params = rotation_params(upper_norm(p, static_cast<double>(n0)).to_double(), eps0);
    const std::size_t cell = c.locate(lambda0);
    std::vector<WitnessCandidate> cand;
    const std::size_t idx = f.find_order(c.cells[cell].order);
    cand.push_back({idx, c.cells[cell].order,
                    evaluate_error(f, idx, Dilation(lambda0), p, static_cast<double>(n0)).total().to_double()});
    StageRotation out;
    out.tower = anchor_tower(f, certs, p, lambda0, n0, params.eps1, tower_blocks);
    cand.insert(cand.end(), out.tower.candidates.begin(), out.tower.candidates.end());
    out.witness = rotation_witness(f, cand, theta0, lambda0, p, eps0, n0, search_cap);
    return out;
}

} // namespace hcv
