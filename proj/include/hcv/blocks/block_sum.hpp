#pragma once

// f = base + sum of solution blocks, organised in contiguous groups (one per
// stage or witness tower). Orders increase strictly across the whole list.
// Used for every error evaluation at orders too large to materialize.

#include "hcv/blocks/pi_function.hpp"
#include "hcv/blocks/solution_block.hpp"
#include "hcv/core/errors.hpp"
#include "hcv/core/xreal.hpp"
#include "hcv/poly/norms.hpp"
#include "hcv/poly/operator.hpp"
#include "hcv/poly/polynomial.hpp"

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

namespace hcv {

struct BlockGroup {
    std::size_t begin = 0; // index range [begin, end) into BlockSum::blocks
    std::size_t end = 0;
    wide log2C = 0;        // max log2(ell! M0) over the group
    unsigned ell = 0;      // max target degree over the group
    std::string label;
};

class BlockSum {
public:
    BlockSum() = default;
    explicit BlockSum(Polynomial base) : base_(std::move(base)) {}

    const Polynomial& base() const { return base_; }
    const std::vector<SolutionBlock>& blocks() const { return blocks_; }
    const std::vector<BlockGroup>& groups() const { return groups_; }
    std::size_t size() const { return blocks_.size(); }
    const SolutionBlock& operator[](std::size_t j) const { return blocks_[j]; }
    std::size_t group_of(std::size_t j) const { return group_id_[j]; }
    double suffix_min_anchor(std::size_t j) const { return suffix_min_[j]; }
    unsigned max_ell() const { return max_ell_; }

    /// Degree of f (0 for the zero function).
    std::uint64_t degree() const
    {
        std::uint64_t d = base_.degree() < 0 ? 0 : static_cast<std::uint64_t>(base_.degree());
        for (const auto& b : blocks_) d = std::max(d, b.degree());
        return d;
    }

    /// Largest block order, or the base degree when there are no blocks.
    std::uint64_t top_order() const
    {
        if (!blocks_.empty()) return blocks_.back().m0;
        return base_.degree() < 0 ? 0 : static_cast<std::uint64_t>(base_.degree());
    }

    /// Appends a group; its orders must continue the strictly increasing list
    /// and lie above every existing degree. Returns the group id.
    std::size_t append_group(std::vector<SolutionBlock> group, std::string label)
    {
        require(!group.empty(), "empty block group");
        const std::uint64_t floor = degree();
        if (!(blocks_.empty() && base_.is_zero()) && group.front().m0 <= floor) {
            throw DegreeViolation("new group starts at order " + std::to_string(group.front().m0) +
                                  " but f already has degree " + std::to_string(floor));
        }
        BlockGroup g;
        g.begin = blocks_.size();
        g.label = std::move(label);
        g.log2C = group.front().target->log2_C();
        for (std::size_t k = 0; k < group.size(); ++k) {
            if (k > 0 && group[k].m0 <= group[k - 1].m0) throw PreconditionError("block orders must increase");
            if (k > 0 && group[k].m0 - group[k - 1].m0 <= group[k - 1].target->ell) {
                throw GapViolation("blocks overlap in degree");
            }
            g.log2C = std::max(g.log2C, group[k].target->log2_C());
            g.ell = std::max(g.ell, group[k].target->ell);
        }
        const std::size_t id = groups_.size();
        for (auto& b : group) {
            blocks_.push_back(std::move(b));
            group_id_.push_back(id);
        }
        g.end = blocks_.size();
        suffix_min_.resize(blocks_.size());
        double run = blocks_.back().lambda0;
        for (std::size_t j = g.end; j-- > g.begin;) {
            run = std::min(run, blocks_[j].lambda0);
            suffix_min_[j] = run;
        }
        max_ell_ = std::max(max_ell_, g.ell);
        groups_.push_back(std::move(g));
        return id;
    }

    /// Index of the block with order m0, or npos.
    std::size_t find_order(std::uint64_t m0) const
    {
        const auto it = std::lower_bound(blocks_.begin(), blocks_.end(), m0,
                                         [](const SolutionBlock& b, std::uint64_t m) { return b.m0 < m; });
        if (it == blocks_.end() || it->m0 != m0) return npos;
        return static_cast<std::size_t>(it - blocks_.begin());
    }

    /// sum over blocks in [from, to) of upper_norm(f_j, R).
    XReal blocks_upper_norm(std::size_t from, std::size_t to, double R) const
    {
        XReal s;
        for (std::size_t j = from; j < to && j < blocks_.size(); ++j) s += block_upper_norm(blocks_[j], R);
        return s;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    Polynomial base_;
    std::vector<SolutionBlock> blocks_;
    std::vector<std::size_t> group_id_;
    std::vector<double> suffix_min_;
    std::vector<BlockGroup> groups_;
    unsigned max_ell_ = 0;
};

/// Pieces of a rigorous bound for upper_norm(T_{m_i,lambda}(f) - target, R).
struct ErrorBreakdown {
    XReal local;       // upper_norm of (lower terms + own block image - target)
    XReal exact_tail;  // next B blocks, exact image norms
    XReal closure;     // remaining blocks, per-group closure bound
    XReal total() const { return local + exact_tail + closure; }
};

/// Evaluates the error at block index i (0-based) and dilation lambda.
/// Lower blocks and the base contribute only when their degree reaches m_i.
inline ErrorBreakdown evaluate_error(const BlockSum& f, std::size_t i, const Dilation& lambda,
                                     const Polynomial& target, double R, unsigned B = kDefaultExactTailBlocks)
{
    require(i < f.size(), "block index out of range");
    const SolutionBlock& own = f[i];
    const std::uint64_t m = own.m0;
    ErrorBreakdown out;

    Polynomial local = block_image(own, m, lambda) - target;
    if (f.base().degree() >= 0 && static_cast<std::uint64_t>(f.base().degree()) >= m) {
        local = local + apply_op(OperatorSpec(m, lambda), f.base());
    }
    for (std::size_t j = i; j-- > 0;) {
        if (f[j].m0 + f.max_ell() < m) break;
        if (f[j].degree() >= m) local = local + block_image(f[j], m, lambda);
    }
    out.local = upper_norm(local, R);

    const std::size_t last_exact = std::min(f.size(), i + 1 + B);
    for (std::size_t j = i + 1; j < last_exact; ++j) {
        out.exact_tail += block_image_upper_norm(f[j], m, lambda.modulus, R);
    }
    std::size_t j = last_exact;
    while (j < f.size()) {
        const BlockGroup& g = f.groups()[f.group_of(j)];
        const wide log2r = wide_log2(static_cast<wide>(lambda.modulus)) -
                           wide_log2(static_cast<wide>(f.suffix_min_anchor(j)));
        out.closure += closure_bound(g.log2C, log2r, m, R, f[j].m0 - m);
        j = g.end;
    }
    return out;
}

/// upper_norm(f - base, R) computed from the blocks.
inline XReal distance_from_base(const BlockSum& f, double R) { return f.blocks_upper_norm(0, f.size(), R); }

/// Materializes f when every degree is small enough.
inline Polynomial materialize(const BlockSum& f)
{
    Polynomial out = f.base();
    for (const auto& b : f.blocks()) out = out + materialize(b);
    return out;
}

} // namespace hcv
