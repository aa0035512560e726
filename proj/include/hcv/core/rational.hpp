#pragma once

// Exact Gaussian rationals for oracle tests and the exact-mode polynomial.

#include "hcv/core/xcomplex.hpp"
#include "hcv/core/xreal.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace hcv {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Accepts "p", "p/q", and plain decimals such as "-1.25".
inline Rational parse_rational(std::string_view text)
{
    std::string s(text);
    auto trim = [](std::string& t) {
        const auto b = t.find_first_not_of(" \t");
        const auto e = t.find_last_not_of(" \t");
        t = b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
    };
    trim(s);
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    try {
        if (const auto slash = s.find('/'); slash != std::string::npos) {
            std::string n = s.substr(0, slash);
            std::string d = s.substr(slash + 1);
            trim(n);
            trim(d);
            const BigInt den(d);
            if (den == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
            return Rational(BigInt(n), den);
        }
        if (const auto dot = s.find('.'); dot != std::string::npos) {
            const std::string digits = s.substr(0, dot) + s.substr(dot + 1);
            const std::size_t frac_len = s.size() - dot - 1;
            BigInt scale = 1;
            for (std::size_t i = 0; i < frac_len; ++i) scale *= 10;
            return Rational(BigInt(digits.empty() || digits == "-" ? digits + "0" : digits), scale);
        }
        return Rational(BigInt(s));
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed rational literal: " + s);
    }
}

inline std::string to_string(const Rational& q)
{
    return boost::multiprecision::numerator(q).str() +
           (boost::multiprecision::denominator(q) == 1
                ? std::string()
                : "/" + boost::multiprecision::denominator(q).str());
}

/// Correctly scaled conversion even when numerator/denominator overflow double.
inline XReal to_xreal(const Rational& q)
{
    using boost::multiprecision::msb;
    BigInt n = boost::multiprecision::numerator(q);
    BigInt d = boost::multiprecision::denominator(q);
    if (n == 0) return {};
    const bool neg = n < 0;
    if (neg) n = -n;
    const auto top = [](BigInt v, std::int64_t& shift) {
        const auto bits = static_cast<std::int64_t>(msb(v)) + 1;
        shift = bits > 60 ? bits - 60 : 0;
        if (shift > 0) v >>= static_cast<unsigned>(shift);
        return v.convert_to<double>();
    };
    std::int64_t sn = 0;
    std::int64_t sd = 0;
    const double nm = top(n, sn);
    const double dm = top(d, sd);
    XReal r = XReal::from_parts(nm / dm, sn - sd);
    return neg ? -r : r;
}

class GaussianRational {
public:
    GaussianRational() = default;
    GaussianRational(Rational re, Rational im = 0) : re_(std::move(re)), im_(std::move(im)) {} // NOLINT
    GaussianRational(long long re) : re_(re) {}                                                 // NOLINT

    const Rational& real() const { return re_; }
    const Rational& imag() const { return im_; }
    bool is_zero() const { return re_ == 0 && im_ == 0; }

    friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b)
    {
        return {a.re_ + b.re_, a.im_ + b.im_};
    }
    friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b)
    {
        return {a.re_ - b.re_, a.im_ - b.im_};
    }
    GaussianRational operator-() const { return {-re_, -im_}; }
    friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b)
    {
        return {a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_};
    }
    friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b)
    {
        const Rational den = b.re_ * b.re_ + b.im_ * b.im_;
        if (den == 0) throw std::domain_error("GaussianRational division by zero");
        return {(a.re_ * b.re_ + a.im_ * b.im_) / den, (a.im_ * b.re_ - a.re_ * b.im_) / den};
    }
    GaussianRational& operator+=(const GaussianRational& o) { return *this = *this + o; }
    GaussianRational& operator-=(const GaussianRational& o) { return *this = *this - o; }
    GaussianRational& operator*=(const GaussianRational& o) { return *this = *this * o; }
    GaussianRational& operator/=(const GaussianRational& o) { return *this = *this / o; }

    friend bool operator==(const GaussianRational& a, const GaussianRational& b)
    {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }

    XComplex to_xcomplex() const
    {
        const XReal r = to_xreal(re_);
        const XReal i = to_xreal(im_);
        if (i.is_zero()) return XComplex(r);
        if (r.is_zero()) return XComplex(i) * XComplex(std::complex<double>(0.0, 1.0));
        // align both parts on the larger exponent
        const std::int64_t e = std::max(r.exponent(), i.exponent());
        const double rm = std::ldexp(r.mantissa(), static_cast<int>(std::max<std::int64_t>(r.exponent() - e, -1100)));
        const double im = std::ldexp(i.mantissa(), static_cast<int>(std::max<std::int64_t>(i.exponent() - e, -1100)));
        return XComplex::from_parts({rm, im}, e);
    }

private:
    Rational re_{0};
    Rational im_{0};
};

inline GaussianRational pow(GaussianRational x, unsigned n)
{
    GaussianRational acc(1LL);
    while (n) {
        if (n & 1U) acc *= x;
        x *= x;
        n >>= 1U;
    }
    return acc;
}

/// n! as an exact rational.
inline Rational factorial_q(unsigned n)
{
    BigInt acc = 1;
    for (unsigned k = 2; k <= n; ++k) acc *= k;
    return Rational(acc);
}

} // namespace hcv
