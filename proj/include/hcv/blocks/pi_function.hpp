#pragma once

// Pi = Q + sum_i f_i with f_i the (m_i, delta_i, p_i) solution blocks, plus the
// tail estimates that keep cross terms T_{m_i0,lambda}(f_j), j > i0, small.

#include "hcv/blocks/solution_block.hpp"
#include "hcv/core/errors.hpp"
#include "hcv/core/wide.hpp"
#include "hcv/core/xreal.hpp"
#include "hcv/poly/norms.hpp"
#include "hcv/poly/operator.hpp"
#include "hcv/poly/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace hcv {

inline constexpr unsigned kDefaultExactTailBlocks = 8;

/// Minimal v with C x^w / w! < 1 for every w >= v, with log2C = log2 C.
/// The terms rise until w ~ x and then fall, so the scan stops once it is past
/// the peak and below 1.
inline std::uint64_t gamma_threshold(wide log2C, double x)
{
    require(x > 0.0 && std::isfinite(x), "gamma_threshold needs x > 0");
    const wide lx = wide_log2(static_cast<wide>(x));
    std::uint64_t last_bad = 0;
    bool any_bad = false;
    wide lfact = 0;
    for (std::uint64_t w = 0;; ++w) {
        if (w > 0) lfact += wide_log2(static_cast<wide>(w));
        const wide t = log2C + lx * static_cast<wide>(w) - lfact;
        if (t >= 0) {
            last_bad = w;
            any_bad = true;
        } else if (static_cast<double>(w) > x) {
            break;
        }
    }
    return any_bad ? last_bad + 1 : 0;
}

/// log2 of an upper bound for sum_{v >= d} x^v / v!.
inline wide log2_exp_tail(wide log2x, std::uint64_t d)
{
    const wide x = wide_exp2(log2x);
    const wide dd = static_cast<wide>(d);
    if (dd + 1 > x) {
        const wide head = log2x * dd - log2_factorial(d);
        return head - wide_log2(1 - x / (dd + 1));
    }
    return x / wide_ln2();
}

/// Bound for sum over later blocks of upper_norm(T_{m,lambda}(f_j), R) when
/// every such block has |lambda|/delta_j <= r = 2^{log2r}, k! |beta_k| <= C and
/// the exponents v = k + m_j - m are distinct and >= d:
///   C r^m sum_{v >= d} (rR)^v / v!.
inline XReal closure_bound(wide log2C, wide log2r, std::uint64_t m, double R, std::uint64_t d)
{
    const wide log2x = log2r + wide_log2(static_cast<wide>(R));
    return XReal::exp2(log2C + log2r * static_cast<wide>(m) + log2_exp_tail(log2x, d));
}

struct PiFunction {
    Polynomial Q;
    std::vector<SolutionBlock> blocks;
    double R0 = 2.0;
    std::uint64_t N0_prime = 0; // gamma threshold at 2 R0
    std::uint64_t N1 = 0;

    std::size_t size() const { return blocks.size(); }
    /// 1-based block access, matching cell numbering.
    const SolutionBlock& block(std::size_t i) const { return blocks.at(i - 1); }
};

/// Builds Pi and checks deg Q < m_1, m_1 > N1, m_{i+1} - m_i > N1, where
/// N1 = max{N0', deg Q, ell} + 1 and N0' is the gamma threshold for (2 R0).
inline PiFunction assemble_pi(Polynomial Q, std::vector<SolutionBlock> blocks, double R0)
{
    require(R0 > 1.0, "R0 must exceed 1");
    require(!blocks.empty(), "Pi needs at least one block");
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        if (blocks[i].m0 <= blocks[i - 1].m0) throw PreconditionError("block orders must be strictly increasing");
    }
    wide log2C = blocks.front().target->log2_C();
    unsigned ell = 0;
    for (const auto& b : blocks) {
        log2C = std::max(log2C, b.target->log2_C());
        ell = std::max(ell, b.target->ell);
    }
    PiFunction pi;
    pi.N0_prime = gamma_threshold(log2C, 2.0 * R0);
    const std::uint64_t degQ = Q.degree() < 0 ? 0 : static_cast<std::uint64_t>(Q.degree());
    pi.N1 = std::max<std::uint64_t>({pi.N0_prime, degQ, ell}) + 1;
    if (Q.degree() >= 0 && static_cast<std::uint64_t>(Q.degree()) >= blocks.front().m0) {
        throw DegreeViolation("deg Q = " + std::to_string(Q.degree()) + " must be below m_1 = " +
                              std::to_string(blocks.front().m0));
    }
    if (blocks.front().m0 <= pi.N1) {
        throw GapViolation("m_1 = " + std::to_string(blocks.front().m0) + " must exceed N1 = " + std::to_string(pi.N1));
    }
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        const std::uint64_t gap = blocks[i].m0 - blocks[i - 1].m0;
        if (gap <= pi.N1) {
            throw GapViolation("gap m_" + std::to_string(i + 1) + " - m_" + std::to_string(i) + " = " +
                               std::to_string(gap) + " must exceed N1 = " + std::to_string(pi.N1));
        }
    }
    pi.Q = std::move(Q);
    pi.blocks = std::move(blocks);
    pi.R0 = R0;
    return pi;
}

/// 1 / 2^{m_{i0+1} - m_{i0} - 2}; zero for the last block. Needs
/// |lambda| <= delta_j for every j > i0.
inline XReal tail_bound(const PiFunction& pi, std::size_t i0, const Dilation& lambda)
{
    require(i0 >= 1 && i0 <= pi.size(), "cell index out of range");
    if (i0 == pi.size()) return {};
    for (std::size_t j = i0 + 1; j <= pi.size(); ++j) {
        if (lambda.modulus > pi.block(j).lambda0) {
            throw PreconditionError("|lambda| exceeds the anchor of a later block; the tail bound does not apply");
        }
    }
    const std::uint64_t gap = pi.block(i0 + 1).m0 - pi.block(i0).m0;
    return XReal::exp2(-static_cast<wide>(gap) + 2);
}

/// Exact upper norms of blocks i0+1 .. i0+B at the given |lambda|, plus the
/// analytic bound from block i0+B+1 on.
inline XReal hybrid_tail(const PiFunction& pi, std::size_t i0, const Dilation& lambda,
                         unsigned B = kDefaultExactTailBlocks)
{
    require(i0 >= 1 && i0 <= pi.size(), "cell index out of range");
    tail_bound(pi, i0, lambda); // precondition check
    const std::uint64_t m = pi.block(i0).m0;
    XReal s;
    const std::size_t last_exact = std::min(pi.size(), i0 + B);
    for (std::size_t j = i0 + 1; j <= last_exact; ++j) s += block_image_upper_norm(pi.block(j), m, lambda.modulus, pi.R0);
    if (last_exact < pi.size()) {
        s += XReal::exp2(-static_cast<wide>(pi.block(last_exact + 1).m0 - m) + 2);
    }
    return s;
}

/// Direct sum of upper_norm(T_{m_i0,lambda}(f_j), R0) over all j > i0.
inline XReal measured_tail(const PiFunction& pi, std::size_t i0, const Dilation& lambda)
{
    require(i0 >= 1 && i0 <= pi.size(), "cell index out of range");
    XReal s;
    for (std::size_t j = i0 + 1; j <= pi.size(); ++j) {
        s += block_image_upper_norm(pi.block(j), pi.block(i0).m0, lambda.modulus, pi.R0);
    }
    return s;
}

/// Rigorous bound for upper_norm(T_{m_i,lambda}(Pi) - p, R0) on cell i:
/// local perturbation + |p_i - p| + analytic tail. lambda must lie in
/// [delta_i, delta_{i+1}) or equal the last anchor.
inline XReal pi_error_bound(const PiFunction& pi, std::size_t i, const Dilation& lambda, const Polynomial& p)
{
    require(i >= 1 && i <= pi.size(), "cell index out of range");
    const SolutionBlock& b = pi.block(i);
    const double lo = b.lambda0;
    const bool last = i == pi.size();
    const bool inside = last ? lambda.modulus == lo : (lambda.modulus >= lo && lambda.modulus < pi.block(i + 1).lambda0);
    if (!inside) throw PreconditionError("lambda lies outside cell " + std::to_string(i));
    XReal bound = perturbation_upper_norm(b, lambda, pi.R0);
    if (!(b.p() == p)) bound += upper_norm(b.p() - p, pi.R0);
    bound += tail_bound(pi, i, lambda);
    return bound;
}

/// Dense Pi, for oracles at small degrees.
inline Polynomial materialize(const PiFunction& pi)
{
    Polynomial f = pi.Q;
    for (const auto& b : pi.blocks) f = f + materialize(b);
    return f;
}

} // namespace hcv
