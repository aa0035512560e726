#pragma once

// Greedy gap subsequence (mu_n) of a base sequence:
//   mu_1 = first term > max(M, floor),  mu_{n+1} = first term > mu_n + M,
// with memoized compensated prefix sums of 1/mu_n.

#include "hcv/core/errors.hpp"
#include "hcv/sequences/sequence.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hcv {

class Subsequence {
public:
    Subsequence(SequenceSpec base, std::uint64_t gap, std::uint64_t floor = 0)
        : base_(std::move(base)), gap_(gap), floor_(floor)
    {
    }

    const SequenceSpec& base() const { return base_; }
    std::uint64_t gap() const { return gap_; }
    std::uint64_t floor() const { return floor_; }

    /// Extends the memo to n terms; false if the base sequence ran out.
    bool ensure(std::uint64_t n)
    {
        while (mu_.size() < n) {
            const std::uint64_t threshold = mu_.empty() ? std::max(gap_, floor_) : mu_.back() + gap_;
            const auto idx = base_.first_index_above(threshold);
            if (!idx) return false;
            const auto t = base_.term(*idx);
            if (!t) return false;
            mu_.push_back(*t);
            acc_.add(1.0 / static_cast<double>(*t));
            prefix_.push_back(acc_.value());
        }
        return true;
    }

    /// mu_n (1-based); throws BudgetExceeded when the base list is exhausted.
    std::uint64_t mu(std::uint64_t n)
    {
        require(n >= 1, "subsequence index starts at 1");
        if (!ensure(n)) throw BudgetExceeded("base sequence exhausted after " + std::to_string(mu_.size()) + " selected terms");
        return mu_[n - 1];
    }

    /// sum_{j<=n} 1/mu_j (n may be 0).
    double prefix(std::uint64_t n)
    {
        if (n == 0) return 0.0;
        mu(n);
        return prefix_[n - 1];
    }

    std::size_t memo_size() const { return mu_.size(); }
    const std::vector<std::uint64_t>& memo() const { return mu_; }

private:
    SequenceSpec base_;
    std::uint64_t gap_;
    std::uint64_t floor_;
    std::vector<std::uint64_t> mu_;
    std::vector<double> prefix_;
    CompensatedSum acc_;
};

/// gap 0 selects every term (plain prefix sums); subsequence extraction needs M >= 1.
inline Subsequence extract_subsequence(const SequenceSpec& base, std::uint64_t M, std::uint64_t floor = 0)
{
    require(M >= 1, "gap M must be >= 1");
    return Subsequence(base, M, floor);
}

struct CoverageResult {
    bool reached = false;
    std::uint64_t N0 = 0;        // minimal N0 when reached
    double required = 0.0;       // rho0 - 1/rho0
    double achieved = 0.0;       // delta0 * partial sum at N0+1 terms, or at the cap
    std::uint64_t terms_used = 0;
    enum class Extrapolation { None, DivergesEventually, BoundedAbove, Unknown } extrapolation = Extrapolation::None;
    std::optional<double> supremum;        // attainable sup of delta0 * sum 1/mu_n (bounded case)
    std::optional<double> log10_N0_estimate; // divergent case
};

inline const char* to_string(CoverageResult::Extrapolation e)
{
    switch (e) {
    case CoverageResult::Extrapolation::None: return "none";
    case CoverageResult::Extrapolation::DivergesEventually: return "diverges-eventually";
    case CoverageResult::Extrapolation::BoundedAbove: return "bounded-above";
    case CoverageResult::Extrapolation::Unknown: return "unknown";
    }
    return "unknown";
}

/// Carries the coverage diagnostic out of plan construction.
struct CoverageExceeded : BudgetExceeded {
    CoverageResult result;
    CoverageExceeded(const std::string& what, CoverageResult r) : BudgetExceeded(what), result(std::move(r)) {}
};

namespace detail {

/// For affine bases the greedy subsequence is itself affine: mu_n = mu_1 + s (n-1).
inline std::uint64_t affine_subsequence_step(const SequenceSpec& base, std::uint64_t gap)
{
    const auto a = static_cast<std::uint64_t>(base.a);
    return a * (gap / a + 1);
}

/// log10 of the smallest N with sum_{n<=N} 1/(mu1 + s(n-1)) > target. The sum
/// is (psi(c + N) - psi(c))/s with c = mu1/s, and psi(x) ~ log(x - 1/2).
inline double affine_log10_terms(double mu1, double s, double target)
{
    const double c = mu1 / s;
    const double l = s * target + boost::math::digamma(c); // log(c + N - 1/2)
    if (l > 30) return l / std::log(10.0);
    return std::log10(std::max(1.0, std::exp(l) - c + 0.5));
}

/// Upper bound for sum over selected terms of the power sequence n^c, c >= 2:
/// every mu_n is some k^c with k^c > M.
inline double power_subsequence_sup(unsigned c, std::uint64_t start_above)
{
    const double k0 = std::floor(std::pow(static_cast<double>(start_above), 1.0 / c)) + 1.0;
    // sum_{k >= k0} k^{-c} <= k0^{-c} + integral_{k0}^{inf} x^{-c} dx
    return std::pow(k0, -static_cast<double>(c)) + std::pow(k0, 1.0 - c) / (c - 1.0);
}

} // namespace detail

/// Minimal N0 with delta0 * sum_{n=1}^{N0+1} 1/mu_n > rho0 - 1/rho0, scanning at most cap+1 terms.
inline CoverageResult coverage_N0(Subsequence& sub, double delta0, double rho0, std::uint64_t cap)
{
    require(cap >= 1, "cap must be >= 1");
    require(delta0 > 0.0, "delta0 must be positive");
    require(rho0 > 1.0, "rho0 must exceed 1");
    CoverageResult r;
    r.required = rho0 - 1.0 / rho0;
    std::uint64_t n = 0;
    for (; n <= cap; ++n) {
        if (!sub.ensure(n + 1)) break;
        const double v = delta0 * sub.prefix(n + 1);
        r.achieved = v;
        r.terms_used = n + 1;
        if (v > r.required) {
            r.reached = true;
            r.N0 = n;
            return r;
        }
    }
    const SequenceSpec& base = sub.base();
    if (base.kind == SequenceSpec::Kind::Affine ||
        (base.kind == SequenceSpec::Kind::Power && base.c == 1)) {
        r.extrapolation = CoverageResult::Extrapolation::DivergesEventually;
        const SequenceSpec lin = base.kind == SequenceSpec::Kind::Affine ? base : SequenceSpec::affine(1, 0);
        const double s = static_cast<double>(detail::affine_subsequence_step(lin, sub.gap()));
        r.log10_N0_estimate = detail::affine_log10_terms(static_cast<double>(sub.mu(1)), s, r.required / delta0);
    } else if (base.kind == SequenceSpec::Kind::Power) {
        const double sup = delta0 * detail::power_subsequence_sup(base.c, std::max(sub.gap(), sub.floor()));
        r.supremum = sup;
        r.extrapolation = sup <= r.required ? CoverageResult::Extrapolation::BoundedAbove
                                            : CoverageResult::Extrapolation::Unknown;
    } else {
        r.extrapolation = CoverageResult::Extrapolation::Unknown;
    }
    return r;
}

} // namespace hcv
