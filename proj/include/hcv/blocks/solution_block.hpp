#pragma once

// Closed-form solutions f of T_{m0,lambda0}(f) = p,
//   f(z) = sum_j j!/(j+m0)! * beta_j / lambda0^{j+m0} * z^{j+m0},
// kept symbolic so that orders far beyond materializable degrees stay cheap.

#include "hcv/core/errors.hpp"
#include "hcv/core/rational.hpp"
#include "hcv/core/wide.hpp"
#include "hcv/core/xcomplex.hpp"
#include "hcv/core/xreal.hpp"
#include "hcv/poly/norms.hpp"
#include "hcv/poly/operator.hpp"
#include "hcv/poly/polynomial.hpp"

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <utility>
#include <vector>

namespace hcv {

inline constexpr std::uint64_t kMaxMaterializedDegree = 100000;

/// A target polynomial together with the per-coefficient logs every block needs.
struct Target {
    Polynomial p;
    std::vector<wide> log2_abs;  // log2 |beta_k|, meaningless where beta_k == 0
    std::vector<wide> arg_turns; // arg(beta_k) / 2pi
    std::vector<bool> nonzero;
    std::vector<wide> log2_fact; // log2 k!
    XReal M0;                    // max |beta_k|
    unsigned ell = 0;            // degree

    explicit Target(Polynomial poly) : p(std::move(poly))
    {
        require(!p.is_zero(), "target polynomial must be nonzero");
        ell = static_cast<unsigned>(p.degree());
        for (std::size_t k = 0; k < p.size(); ++k) {
            const XComplex& b = p.coeffs()[k];
            nonzero.push_back(!b.is_zero());
            log2_fact.push_back(log2_factorial(k));
            if (b.is_zero()) {
                log2_abs.push_back(0);
                arg_turns.push_back(0);
                continue;
            }
            log2_abs.push_back(b.abs().log2_abs());
            const std::complex<double> m = b.mantissa();
            double t = std::atan2(m.imag(), m.real()) / (2.0 * std::numbers::pi);
            if (t < 0) t += 1.0;
            arg_turns.push_back(static_cast<wide>(t));
            M0 = max(M0, b.abs());
        }
    }

    /// sum_k R^k * M0 (the coarse constant used by the stability interval).
    XReal M1(double R) const
    {
        XReal s;
        XReal pw(1.0);
        for (unsigned k = 0; k <= ell; ++k) {
            s += pw;
            pw *= XReal(R);
        }
        return M0 * s;
    }

    /// sum_k |beta_k| R^k = upper_norm(p, R).
    XReal M1_sharp(double R) const { return upper_norm(p, R); }

    /// log2(ell! * M0), the constant of the analytic tail estimates.
    wide log2_C() const { return log2_factorial(ell) + M0.log2_abs(); }
};

using TargetPtr = std::shared_ptr<const Target>;

inline TargetPtr make_target(Polynomial p) { return std::make_shared<const Target>(std::move(p)); }

struct SolutionBlock {
    std::uint64_t m0 = 1;
    double lambda0 = 1.0;
    TargetPtr target;

    std::uint64_t degree() const { return m0 + target->ell; }
    const Polynomial& p() const { return target->p; }
};

inline SolutionBlock solve_block(std::uint64_t m0, double lambda0, TargetPtr target)
{
    require(m0 >= 1, "block order m0 must be >= 1");
    require(lambda0 > 0.0 && std::isfinite(lambda0), "anchor lambda0 must be positive");
    require(target != nullptr && !target->p.is_zero(), "target polynomial must be nonzero");
    return SolutionBlock{m0, lambda0, std::move(target)};
}

inline SolutionBlock solve_block(std::uint64_t m0, double lambda0, const Polynomial& p)
{
    if (p.is_zero()) throw PreconditionError("target polynomial must be nonzero");
    return solve_block(m0, lambda0, make_target(p));
}

/// Dense coefficients of f; refuses degrees above kMaxMaterializedDegree.
inline Polynomial materialize(const SolutionBlock& b)
{
    if (b.degree() > kMaxMaterializedDegree) {
        throw BudgetExceeded("refusing to materialize a block of degree " + std::to_string(b.degree()));
    }
    const Target& t = *b.target;
    std::vector<XComplex> c(b.degree() + 1);
    const wide l2lam = wide_log2(static_cast<wide>(b.lambda0));
    for (unsigned j = 0; j <= t.ell; ++j) {
        if (!t.nonzero[j]) continue;
        const std::uint64_t e = j + b.m0;
        const wide l2 = t.log2_abs[j] - log2_factorial_ratio(j, b.m0) - l2lam * static_cast<wide>(e);
        c[e] = XComplex::from_log2_polar(l2, t.arg_turns[j]);
    }
    return Polynomial(std::move(c));
}

/// Sum of the block's coefficient moduli times R^power: upper_norm(f_block, R).
inline XReal block_upper_norm(const SolutionBlock& b, double R)
{
    const Target& t = *b.target;
    XReal acc;
    const wide l2 = wide_log2(static_cast<wide>(R)) - wide_log2(static_cast<wide>(b.lambda0));
    for (unsigned j = 0; j <= t.ell; ++j) {
        if (!t.nonzero[j]) continue;
        const std::uint64_t e = j + b.m0;
        acc += XReal::exp2(t.log2_abs[j] - log2_factorial_ratio(j, b.m0) + l2 * static_cast<wide>(e));
    }
    return acc;
}

struct ImageTerm {
    std::uint64_t power;
    XComplex coeff;
};

/// Nonzero terms of T_{m,lambda}(f_block):
///   sum_k k! beta_k (lambda/delta)^{k+m0} z^{k+m0-m} / (k+m0-m)!
inline std::vector<ImageTerm> block_image_terms(const SolutionBlock& b, std::uint64_t m, const Dilation& lambda)
{
    require(m >= 1, "operator order must be >= 1");
    const Target& t = *b.target;
    std::vector<ImageTerm> out;
    const wide l2ratio = wide_log2(static_cast<wide>(lambda.modulus)) - wide_log2(static_cast<wide>(b.lambda0));
    for (unsigned k = 0; k <= t.ell; ++k) {
        if (!t.nonzero[k]) continue;
        const std::uint64_t e = k + b.m0;
        if (e < m) continue;
        const std::uint64_t v = e - m;
        const wide l2 = t.log2_fact[k] + t.log2_abs[k] + l2ratio * static_cast<wide>(e) - log2_factorial(v);
        const wide ph = t.arg_turns[k] + lambda.turns * static_cast<wide>(e);
        out.push_back({v, XComplex::from_log2_polar(l2, ph)});
    }
    return out;
}

inline Polynomial block_image(const SolutionBlock& b, std::uint64_t m, const Dilation& lambda)
{
    if (m + kMaxMaterializedDegree < b.degree()) {
        throw BudgetExceeded("block image degree too large to materialize");
    }
    const auto terms = block_image_terms(b, m, lambda);
    if (terms.empty()) return {};
    std::uint64_t top = 0;
    for (const auto& t : terms) top = std::max(top, t.power);
    std::vector<XComplex> c(top + 1);
    for (const auto& t : terms) c[t.power] = t.coeff;
    return Polynomial(std::move(c));
}

/// upper_norm(T_{m,lambda}(f_block), R); only |lambda| / delta matters.
/// `log2_ratio` is log2(|lambda| / delta).
inline XReal block_image_upper_norm_log2ratio(const SolutionBlock& b, std::uint64_t m, wide log2_ratio, double R)
{
    const Target& t = *b.target;
    const wide l2R = wide_log2(static_cast<wide>(R));
    XReal acc;
    for (unsigned k = 0; k <= t.ell; ++k) {
        if (!t.nonzero[k]) continue;
        const std::uint64_t e = k + b.m0;
        if (e < m) continue;
        const std::uint64_t v = e - m;
        const wide l2 = t.log2_fact[k] + t.log2_abs[k] + log2_ratio * static_cast<wide>(e) -
                        log2_factorial(v) + l2R * static_cast<wide>(v);
        acc += XReal::exp2(l2);
    }
    return acc;
}

inline XReal block_image_upper_norm(const SolutionBlock& b, std::uint64_t m, double lambda_modulus, double R)
{
    const wide lr = wide_log2(static_cast<wide>(lambda_modulus)) - wide_log2(static_cast<wide>(b.lambda0));
    return block_image_upper_norm_log2ratio(b, m, lr, R);
}

/// |w^e - 1| for w = r e^{2 pi i t}, r = 2^{log2r}; accurate near w^e = 1.
inline XReal power_minus_one_abs(wide log2r, wide turns, std::uint64_t e)
{
    const wide x = log2r * static_cast<wide>(e) * wide_ln2(); // natural log of |w^e|
    const wide ph = frac(turns * static_cast<wide>(e));
    if (x > 700) return XReal::exp2(x / wide_ln2()) + XReal(1.0); // upper bound, exact enough here
    const wide em1 = expm1q(x);
    if (ph == 0) return XReal::from_wide(wide_abs(em1));
    const wide s = sinq(static_cast<wide>(M_PIq) * ph);
    const wide r = expq(x);
    return XReal::from_wide(wide_sqrt(em1 * em1 + 4 * r * s * s));
}

/// upper_norm(T_{m0,delta}(f) - T_{m0,lambda}(f), R) computed term by term:
///   sum_k |beta_k| |(lambda/delta)^{k+m0} - 1| R^k.
inline XReal perturbation_upper_norm(const SolutionBlock& b, const Dilation& lambda, double R)
{
    const Target& t = *b.target;
    const wide lr = wide_log2(static_cast<wide>(lambda.modulus)) - wide_log2(static_cast<wide>(b.lambda0));
    const wide l2R = wide_log2(static_cast<wide>(R));
    XReal acc;
    for (unsigned k = 0; k <= t.ell; ++k) {
        if (!t.nonzero[k]) continue;
        const XReal d = power_minus_one_abs(lr, lambda.turns, k + b.m0);
        if (d.is_zero()) continue;
        acc += d * XReal::exp2(t.log2_abs[k] + l2R * static_cast<wide>(k));
    }
    return acc;
}

struct StabilityInterval {
    double lo = 0;
    double hi = 0;   // half-open: [lo, hi)
    XReal M0;
    XReal M1;
    std::uint64_t N0 = 0;

    bool contains(double lambda) const { return lambda >= lo && lambda < hi; }
};

namespace detail {
inline StabilityInterval stability_with(const SolutionBlock& b, double eps0, double R0, const XReal& M1)
{
    require(eps0 > 0.0 && eps0 < 1.0, "eps0 must lie in (0,1)");
    require(R0 > 1.0, "R0 must exceed 1");
    StabilityInterval s;
    s.lo = b.lambda0;
    s.M0 = b.target->M0;
    s.M1 = M1;
    s.N0 = b.degree();
    // lambda0 * (1 + eps0/M1)^{1/N0}
    const wide q = static_cast<wide>((XReal(eps0) / M1).to_double());
    const wide hi = static_cast<wide>(b.lambda0) * expq(log1pq(q) / static_cast<wide>(s.N0));
    s.hi = static_cast<double>(hi);
    if (static_cast<wide>(s.hi) > hi) s.hi = std::nextafter(s.hi, 0.0);
    return s;
}
} // namespace detail

/// [lambda0, lambda0 (1 + eps0/M1)^{1/N0}) with M1 = M0 * sum_{j<=ell} R0^j.
inline StabilityInterval stability_interval(const SolutionBlock& b, double eps0, double R0)
{
    return detail::stability_with(b, eps0, R0, b.target->M1(R0));
}

/// Same shape with the smaller constant sum_j |beta_j| R0^j; still rigorous
/// since |(lambda/lambda0)^{k+m0} - 1| <= (lambda/lambda0)^{N0} - 1 termwise.
inline StabilityInterval stability_interval_sharp(const SolutionBlock& b, double eps0, double R0)
{
    return detail::stability_with(b, eps0, R0, b.target->M1_sharp(R0));
}

// ---------------------------------------------------------------------------
// Exact mode.

inline ExactPolynomial solve_block_exact(std::uint64_t m0, const GaussianRational& lambda0, const ExactPolynomial& p)
{
    require(m0 >= 1, "block order m0 must be >= 1");
    require(!lambda0.is_zero(), "anchor must be nonzero");
    if (p.is_zero()) throw PreconditionError("target polynomial must be nonzero");
    const std::size_t ell = static_cast<std::size_t>(p.degree());
    std::vector<GaussianRational> c(ell + m0 + 1);
    for (std::size_t j = 0; j <= ell; ++j) {
        if (p[j].is_zero()) continue;
        BigInt ff = 1; // (j+m0)!/j!
        for (std::uint64_t i = 1; i <= m0; ++i) ff *= BigInt(j + i);
        c[j + m0] = p[j] / (GaussianRational(Rational(ff)) * pow(lambda0, static_cast<unsigned>(j + m0)));
    }
    return ExactPolynomial(std::move(c));
}

} // namespace hcv
