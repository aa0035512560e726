#pragma once

// T_{n,lambda} f(z) = lambda^n f^{(n)}(lambda z).

#include "hcv/core/errors.hpp"
#include "hcv/core/rational.hpp"
#include "hcv/core/wide.hpp"
#include "hcv/core/xcomplex.hpp"
#include "hcv/poly/polynomial.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace hcv {

/// Nonzero complex dilation modulus * e^{2 pi i turns}, turns in [0, 1).
struct Dilation {
    double modulus = 1.0;
    wide turns = 0;

    Dilation() = default;
    Dilation(double mod, wide t = 0) : modulus(mod), turns(frac(t)) // NOLINT
    {
        require(std::isfinite(mod) && mod > 0.0, "dilation modulus must be positive and finite");
    }

    XComplex value() const { return XComplex::polar(XReal(modulus), turns); }
    bool is_real_positive() const { return turns == 0; }

    /// lambda^e with the exponent and phase reduced in wide precision.
    XComplex power(std::uint64_t e) const
    {
        const wide l2 = wide_log2(static_cast<wide>(modulus)) * static_cast<wide>(e);
        return XComplex::from_log2_polar(l2, turns * static_cast<wide>(e));
    }
};

struct OperatorSpec {
    std::uint64_t order = 1;
    Dilation lambda;

    OperatorSpec() = default;
    OperatorSpec(std::uint64_t n, Dilation l) : order(n), lambda(l)
    {
        require(n >= 1, "operator order must be at least 1");
    }
};

/// Route (b): c'_k = lambda^{n+k} (k+n)!/k! c_{k+n}.
inline Polynomial apply_op_direct(const OperatorSpec& spec, const Polynomial& f)
{
    const std::uint64_t n = spec.order;
    if (f.degree() < static_cast<long>(n)) return {};
    const std::size_t out = f.size() - n;
    std::vector<XComplex> c(out);
    const wide l2mod = wide_log2(static_cast<wide>(spec.lambda.modulus));
    for (std::size_t k = 0; k < out; ++k) {
        const XComplex& src = f.coeffs()[k + n];
        if (src.is_zero()) continue;
        const wide e = static_cast<wide>(n + k);
        const wide l2 = l2mod * e + log2_factorial_ratio(k, n);
        c[k] = XComplex::from_log2_polar(l2, spec.lambda.turns * e) * src;
    }
    return Polynomial(std::move(c));
}

/// Route (a): differentiate n times, dilate, scale. Powers by repeated products.
inline Polynomial apply_op_iterated(const OperatorSpec& spec, const Polynomial& f)
{
    Polynomial g = f;
    for (std::uint64_t j = 0; j < spec.order && !g.is_zero(); ++j) g = g.derivative();
    if (g.is_zero()) return {};
    const XComplex lam = spec.lambda.value();
    std::vector<XComplex> c = g.coeffs();
    XComplex lam_n(1.0);
    for (std::uint64_t j = 0; j < spec.order; ++j) lam_n *= lam;
    XComplex pw = lam_n;
    for (auto& a : c) {
        a *= pw;
        pw *= lam;
    }
    return Polynomial(std::move(c));
}

inline Polynomial apply_op(const OperatorSpec& spec, const Polynomial& f)
{
    return apply_op_direct(spec, f);
}

/// Exact version; lambda may be any nonzero Gaussian rational.
inline ExactPolynomial apply_op(std::uint64_t n, const GaussianRational& lambda, const ExactPolynomial& f)
{
    require(n >= 1, "operator order must be at least 1");
    require(!lambda.is_zero(), "dilation must be nonzero");
    if (f.degree() < static_cast<long>(n)) return {};
    const std::size_t out = f.size() - n;
    std::vector<GaussianRational> c(out);
    GaussianRational pw = pow(lambda, static_cast<unsigned>(n));
    for (std::size_t k = 0; k < out; ++k) {
        BigInt ff = 1;
        for (std::uint64_t j = 1; j <= n; ++j) ff *= BigInt(k + j);
        c[k] = pw * GaussianRational(Rational(ff)) * f.coeffs()[k + n];
        pw *= lambda;
    }
    return ExactPolynomial(std::move(c));
}

} // namespace hcv
