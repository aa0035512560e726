#pragma once

// One stage: partition [1/rho0, rho0] into cells, put a block (mu_i, a_i, p) on
// each, and certify every cell with upper-norm bounds.

#include "hcv/blocks/block_sum.hpp"
#include "hcv/blocks/pi_function.hpp"
#include "hcv/constructor/plan.hpp"
#include "hcv/core/errors.hpp"
#include "hcv/core/xreal.hpp"
#include "hcv/sequences/partition.hpp"
#include "hcv/sequences/subsequence.hpp"
#include "hcv/util/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace hcv {

struct CellRecord {
    std::uint64_t i = 0;
    double anchor = 0; // a_i, also the block anchor
    double right = 0;  // a_{i+1}; equals anchor for the single-point final cell
    std::uint64_t order = 0;
    XReal local;       // perturbation bound over the cell
    XReal tail;        // bound for all later blocks of the stage
    XReal bound;       // local + tail
    XReal margin;      // 1/s0 - bound
};

struct ClosenessRecord {
    XReal bound;       // sum of block upper norms on the R0-disk
    XReal analytic;    // 1/2^{mu_1 - 2}
    double eps0 = 0;
    XReal margin;      // eps0 - max(bound, analytic)
};

struct StageCertificate {
    StagePlan plan;
    std::string label;
    std::uint64_t m0 = 0;
    EndpointFlag flag = EndpointFlag::Optimized;
    std::vector<CellRecord> cells;
    ClosenessRecord closeness;
    XReal allowance;   // budget reserved for blocks added by later stages
    bool pass = false;

    XReal min_margin() const
    {
        XReal m = cells.front().margin;
        for (const auto& c : cells) m = min(m, c.margin);
        return m;
    }
    XReal surviving_margin() const { return min_margin() - allowance; }
    std::uint64_t top_order() const { return cells.back().order; }
    double rho0() const { return plan.in.rho0; }

    /// Cell containing lambda: the last one whose anchor is <= lambda.
    std::size_t locate(double lambda) const
    {
        if (!(lambda >= cells.front().anchor && lambda <= plan.in.rho0)) {
            throw PreconditionError("lambda outside the certified interval");
        }
        const auto it = std::upper_bound(cells.begin(), cells.end(), lambda,
                                         [](double x, const CellRecord& c) { return x < c.anchor; });
        return static_cast<std::size_t>(it - cells.begin()) - 1;
    }
};

struct StageResult {
    BlockSum f;
    StageCertificate cert;
};

namespace detail {

/// Later-block bound at ratio |lambda|/anchor <= 1: exact images of the next B
/// orders plus the analytic remainder. Orders past the stage end are included,
/// which only enlarges the bound.
inline XReal stage_tail(const std::vector<std::uint64_t>& mu, std::size_t i, const TargetPtr& t, double R, unsigned B)
{
    const std::uint64_t m = mu[i];
    XReal s;
    for (std::size_t j = i + 1; j <= i + B; ++j) s += block_image_upper_norm_log2ratio(SolutionBlock{mu[j], 1.0, t}, m, 0, R);
    s += XReal::exp2(-static_cast<wide>(mu[i + B + 1] - m) + 2);
    return s;
}

inline void finish_certificate(StageCertificate& cert, const BlockSum& f, std::size_t group)
{
    const auto& g = f.groups()[group];
    const StagePlan& plan = cert.plan;
    cert.m0 = cert.cells.back().order;
    cert.closeness.eps0 = plan.eps0;
    cert.closeness.bound = f.blocks_upper_norm(g.begin, g.end, plan.R0);
    cert.closeness.analytic = XReal::exp2(-static_cast<wide>(cert.cells.front().order) + 2);
    cert.closeness.margin = XReal(plan.eps0) - max(cert.closeness.bound, cert.closeness.analytic);
    bool ok = cert.closeness.margin > XReal(0.0);
    for (const auto& c : cert.cells) ok = ok && c.margin > XReal(0.0);
    cert.pass = ok;
}

inline StageResult build_optimized(const StagePlan& plan, BlockSum f, std::string label)
{
    const double rho0 = plan.in.rho0;
    const double R = plan.R0;
    const unsigned B = plan.in.exact_tail_blocks;
    const TargetPtr t = plan.target();
    const wide M1 = plan.M1_sharp.to_wide();
    const wide tau = static_cast<wide>(plan.tau());
    const std::uint64_t ell = plan.ell;
    Subsequence sub = extract_subsequence(plan.in.base, plan.gap, plan.order_floor);

    StageCertificate cert;
    cert.plan = plan;
    cert.label = std::move(label);
    cert.flag = EndpointFlag::Optimized;
    std::vector<XReal> tails;
    constexpr std::size_t kChunk = 2048;

    double a = 1.0 / rho0;
    for (std::size_t i = 0;; ++i) {
        if (i >= plan.in.cap) {
            throw BudgetExceeded("stage needs more than " + std::to_string(plan.in.cap) + " cells");
        }
        if (i >= tails.size()) {
            // tails depend only on the order sequence, so a chunk is computed in parallel
            const std::size_t from = tails.size();
            const std::size_t to = from + kChunk;
            if (!sub.ensure(to + B + 1)) throw BudgetExceeded("base sequence exhausted");
            const auto& mu = sub.memo();
            tails.resize(to);
            parallel_for(kChunk, [&](std::size_t k) { tails[from + k] = stage_tail(mu, from + k, t, R, B); });
        }
        CellRecord c;
        c.i = i + 1;
        c.anchor = a;
        c.order = sub.memo()[i];
        c.tail = tails[i];
        const wide budget = tau - c.tail.to_wide();
        if (!(budget > 0)) throw BudgetExceeded("tail bound exceeds the per-cell budget at cell " + std::to_string(c.i));
        const wide e = static_cast<wide>(c.order + ell);
        if (a >= rho0) {
            c.anchor = rho0;
            c.right = rho0;
            c.local = XReal(0.0);
        } else {
            const wide step = log1pq(budget / M1) / e * (1 - static_cast<wide>(1e-9));
            double b = static_cast<double>(static_cast<wide>(a) * expq(step));
            if (b >= rho0) b = rho0;
            c.right = b;
            const wide lr = logq(static_cast<wide>(b)) - logq(static_cast<wide>(a));
            c.local = XReal::from_wide(M1 * expm1q(e * lr) * (1 + static_cast<wide>(1e-12)));
        }
        c.bound = c.local + c.tail;
        c.margin = XReal(1.0 / plan.in.s0) - c.bound;
        const bool last = c.right >= rho0 && c.anchor >= rho0;
        a = c.right;
        cert.cells.push_back(std::move(c));
        if (last) break;
    }
    cert.plan.N0 = cert.cells.size() - 1;

    std::vector<SolutionBlock> blocks;
    blocks.reserve(cert.cells.size());
    for (const auto& c : cert.cells) blocks.push_back(SolutionBlock{c.order, c.anchor, t});
    const std::size_t gid = f.append_group(std::move(blocks), cert.label);
    finish_certificate(cert, f, gid);
    return {std::move(f), std::move(cert)};
}

inline StageResult build_faithful(const StagePlan& plan, BlockSum f, std::string label)
{
    const TargetPtr t = plan.target();
    Subsequence sub = extract_subsequence(plan.in.base, plan.gap, plan.order_floor);
    const Partition part = partition_points(sub, plan.delta0, plan.in.rho0, plan.N0);
    const std::uint64_t cells = plan.N0 + 1;
    sub.ensure(cells);
    const auto& mu = sub.memo();
    const wide M1 = plan.M1.to_wide();
    const double half = plan.eps0 / 2.0;

    StageCertificate cert;
    cert.plan = plan;
    cert.label = std::move(label);
    cert.flag = part.flag;
    cert.cells.resize(cells);
    parallel_for(cells, [&](std::size_t k) {
        CellRecord& c = cert.cells[k];
        c.i = k + 1;
        c.anchor = part.anchor(c.i);
        c.right = c.i < part.points.size() ? part.points[c.i] : part.rho0;
        c.order = mu[k];
        const wide e = static_cast<wide>(c.order + plan.ell);
        const wide lr = logq(static_cast<wide>(c.right)) - logq(static_cast<wide>(c.anchor));
        c.local = XReal::from_wide(M1 * expm1q(e * lr) * (1 + static_cast<wide>(1e-12)));
        c.tail = c.i < cells ? XReal::exp2(-static_cast<wide>(mu[k + 1] - mu[k]) + 2) : XReal(0.0);
        c.bound = c.local + c.tail;
        c.margin = XReal(1.0 / plan.in.s0) - c.bound;
    });
    for (const auto& c : cert.cells) {
        if (!(c.local < XReal(half)) || !(c.tail < XReal(half))) {
            throw CertificationFailure("faithful cell " + std::to_string(c.i) + " misses the eps0/2 budget");
        }
    }
    std::vector<SolutionBlock> blocks;
    blocks.reserve(cells);
    for (const auto& c : cert.cells) blocks.push_back(SolutionBlock{c.order, c.anchor, t});
    const std::size_t gid = f.append_group(std::move(blocks), cert.label);
    finish_certificate(cert, f, gid);
    return {std::move(f), std::move(cert)};
}

} // namespace detail

/// Builds the stage on top of Q (the zero function by default).
inline StageResult build_stage(const StagePlan& plan, BlockSum Q = BlockSum(), std::string label = "stage")
{
    StageResult r = plan.in.mode == Mode::Faithful ? detail::build_faithful(plan, std::move(Q), std::move(label))
                                                   : detail::build_optimized(plan, std::move(Q), std::move(label));
    for (std::size_t k = 1; k < r.cert.cells.size(); ++k) {
        if (r.cert.cells[k].anchor != r.cert.cells[k - 1].right) throw CertificationFailure("cells leave a gap");
    }
    if (r.cert.cells.front().anchor != 1.0 / plan.in.rho0 || r.cert.cells.back().right != plan.in.rho0) {
        throw CertificationFailure("cells do not cover [1/rho0, rho0]");
    }
    return r;
}

struct VerifyOptions {
    std::uint64_t grid = 10000;   // log-spaced points, endpoints included
    std::uint64_t random = 0;     // extra uniform samples
    std::uint64_t seed = 1;
    bool anchors_and_midpoints = true;
};

struct VerifySample {
    double lambda = 0;
    std::uint64_t cell = 0;
    std::uint64_t order = 0;
    XReal certified;
    XReal observed;
    bool ok = false;
};

struct VerifyReport {
    std::uint64_t samples = 0;
    std::uint64_t failures = 0;
    XReal max_observed;
    XReal min_margin;     // 1/s0 - observed, minimized
    double worst_ratio = 0; // max observed / (certified + allowance)
    std::vector<VerifySample> first_failures;
    bool pass = false;
};

/// Relative and absolute slack for comparing a recomputed bound with the certified one.
inline constexpr double kVerifyRelSlack = 1e-9;
inline constexpr double kVerifyAbsSlack = 1e-13;

/// Recomputes the error at each sampled lambda from the blocks of f and checks
/// it against the cell bound (plus the allowance) and against 1/s0.
inline VerifyReport verify_stage(const BlockSum& f, const StageCertificate& cert, const VerifyOptions& opt,
                                 std::vector<VerifySample>* out = nullptr)
{
    require(opt.grid >= 1, "grid must be >= 1");
    const double rho0 = cert.plan.in.rho0;
    const double lo = cert.cells.front().anchor;
    std::vector<double> lambdas;
    if (opt.grid == 1) {
        lambdas.push_back(1.0);
    } else {
        const double l0 = std::log(lo), l1 = std::log(rho0);
        for (std::uint64_t k = 0; k < opt.grid; ++k) {
            lambdas.push_back(std::exp(l0 + (l1 - l0) * static_cast<double>(k) / static_cast<double>(opt.grid - 1)));
        }
        lambdas.front() = lo;
        lambdas.back() = rho0;
    }
    if (opt.anchors_and_midpoints) {
        for (const auto& c : cert.cells) {
            lambdas.push_back(c.anchor);
            if (c.right > c.anchor) lambdas.push_back(c.anchor + (c.right - c.anchor) / 2);
        }
    }
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(lo, rho0);
    for (std::uint64_t k = 0; k < opt.random; ++k) lambdas.push_back(u(rng));
    for (auto& l : lambdas) l = std::clamp(l, lo, rho0);

    const Polynomial& p = cert.plan.in.p;
    const double R = cert.plan.R0;
    const unsigned B = cert.plan.in.exact_tail_blocks;
    const XReal limit(1.0 / cert.plan.in.s0);
    const XReal abs_slack(kVerifyAbsSlack * std::max(1.0, cert.plan.M1_sharp.to_double()));
    std::vector<VerifySample> s(lambdas.size());
    parallel_for(lambdas.size(), [&](std::size_t k) {
        VerifySample& v = s[k];
        v.lambda = lambdas[k];
        const std::size_t c = cert.locate(v.lambda);
        v.cell = cert.cells[c].i;
        v.order = cert.cells[c].order;
        v.certified = cert.cells[c].bound;
        const std::size_t idx = f.find_order(v.order);
        if (idx == BlockSum::npos) throw CertificationFailure("f has no block of order " + std::to_string(v.order));
        v.observed = evaluate_error(f, idx, Dilation(v.lambda), p, R, B).total();
        const XReal allowed = v.certified * XReal(1.0 + kVerifyRelSlack) + cert.allowance + abs_slack;
        v.ok = v.observed <= allowed && v.observed < limit;
    });

    VerifyReport r;
    r.samples = s.size();
    r.min_margin = limit;
    for (const auto& v : s) {
        r.max_observed = max(r.max_observed, v.observed);
        r.min_margin = min(r.min_margin, limit - v.observed);
        const XReal denom = v.certified + cert.allowance;
        if (!denom.is_zero()) r.worst_ratio = std::max(r.worst_ratio, (v.observed / denom).to_double());
        if (!v.ok) {
            ++r.failures;
            if (r.first_failures.size() < 10) r.first_failures.push_back(v);
        }
    }
    r.pass = r.failures == 0;
    if (out) *out = std::move(s);
    return r;
}

} // namespace hcv
