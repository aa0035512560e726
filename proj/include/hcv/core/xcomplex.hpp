#pragma once

#include "hcv/core/wide.hpp"
#include "hcv/core/xreal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace hcv {

/// Complex m * 2^e with max(|Re m|, |Im m|) in [0.5, 1) (or m == 0).
class XComplex {
public:
    XComplex() = default;
    XComplex(double re) : XComplex(std::complex<double>(re, 0.0)) {} // NOLINT
    XComplex(std::complex<double> v) { assign(v, 0); }                 // NOLINT
    XComplex(const XReal& r) { assign({r.mantissa(), 0.0}, r.exponent()); } // NOLINT

    static XComplex from_parts(std::complex<double> mant, std::int64_t exp2)
    {
        XComplex c;
        c.assign(mant, exp2);
        return c;
    }

    /// magnitude * e^{2 pi i turns}; turns reduced in wide precision first.
    static XComplex polar(const XReal& magnitude, wide turns)
    {
        if (magnitude.is_zero()) return {};
        const double t = static_cast<double>(frac(turns));
        const double ang = 2.0 * std::numbers::pi * t;
        return from_parts(std::polar(magnitude.mantissa(), ang), magnitude.exponent());
    }

    /// 2^{log2mag} * e^{2 pi i turns}
    static XComplex from_log2_polar(wide log2mag, wide turns)
    {
        return polar(XReal::exp2(log2mag), turns);
    }

    std::complex<double> mantissa() const { return mant_; }
    std::int64_t exponent() const { return exp_; }
    bool is_zero() const { return mant_ == std::complex<double>(0.0, 0.0); }

    XReal real() const { return XReal::from_parts(mant_.real(), exp_); }
    XReal imag() const { return XReal::from_parts(mant_.imag(), exp_); }
    XReal abs() const { return XReal::from_parts(std::abs(mant_), exp_); }

    /// Saturating conversion.
    std::complex<double> to_complex() const { return {real().to_double(), imag().to_double()}; }

    XComplex operator-() const { return from_parts(-mant_, exp_); }
    XComplex conj() const { return from_parts(std::conj(mant_), exp_); }

    friend XComplex operator*(const XComplex& a, const XComplex& b)
    {
        if (a.is_zero() || b.is_zero()) return {};
        return from_parts(a.mant_ * b.mant_, a.exp_ + b.exp_);
    }

    friend XComplex operator/(const XComplex& a, const XComplex& b)
    {
        if (b.is_zero()) throw std::domain_error("XComplex division by zero");
        if (a.is_zero()) return {};
        return from_parts(a.mant_ / b.mant_, a.exp_ - b.exp_);
    }

    friend XComplex operator+(const XComplex& a, const XComplex& b)
    {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        const XComplex& big = a.exp_ >= b.exp_ ? a : b;
        const XComplex& small = a.exp_ >= b.exp_ ? b : a;
        const std::int64_t shift = small.exp_ - big.exp_;
        if (shift < -1100) return big;
        const double s = std::ldexp(1.0, static_cast<int>(shift));
        return from_parts(big.mant_ + small.mant_ * s, big.exp_);
    }

    friend XComplex operator-(const XComplex& a, const XComplex& b) { return a + (-b); }

    XComplex& operator+=(const XComplex& o) { return *this = *this + o; }
    XComplex& operator-=(const XComplex& o) { return *this = *this - o; }
    XComplex& operator*=(const XComplex& o) { return *this = *this * o; }
    XComplex& operator/=(const XComplex& o) { return *this = *this / o; }

    friend bool operator==(const XComplex& a, const XComplex& b)
    {
        return a.mant_ == b.mant_ && a.exp_ == b.exp_;
    }

private:
    std::complex<double> mant_{0.0, 0.0};
    std::int64_t exp_ = 0;

    void assign(std::complex<double> m, std::int64_t exp2)
    {
        if (!std::isfinite(m.real()) || !std::isfinite(m.imag())) {
            throw std::domain_error("XComplex from non-finite value");
        }
        const double big = std::max(std::fabs(m.real()), std::fabs(m.imag()));
        if (big == 0.0) {
            mant_ = {0.0, 0.0};
            exp_ = 0;
            return;
        }
        int k = 0;
        std::frexp(big, &k);
        mant_ = {std::ldexp(m.real(), -k), std::ldexp(m.imag(), -k)};
        exp_ = exp2 + k;
    }
};

inline XReal abs(const XComplex& z) { return z.abs(); }

/// |a - b| / max(|a|, |b|); 0 when both vanish.
inline double relative_difference(const XComplex& a, const XComplex& b)
{
    const XReal scale = max(a.abs(), b.abs());
    if (scale.is_zero()) return 0.0;
    return ((a - b).abs() / scale).to_double();
}

} // namespace hcv
