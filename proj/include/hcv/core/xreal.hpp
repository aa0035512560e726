#pragma once

#include "hcv/core/wide.hpp"

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hcv {

/// Real number m * 2^e with a double mantissa (|m| in [0.5, 1) or m == 0)
/// and a 64-bit exponent. Covers magnitudes far outside double range
/// (2^+-1e6 and beyond) at double relative precision.
class XReal {
public:
    constexpr XReal() = default;
    XReal(double v) { assign(v, 0); } // NOLINT(google-explicit-constructor)

    static XReal from_parts(double mant, std::int64_t exp2)
    {
        XReal r;
        r.assign(mant, exp2);
        return r;
    }

    /// 2^x for a wide exponent (the workhorse for huge powers and factorials).
    static XReal exp2(wide x)
    {
        const wide fl = wide_floor(x);
        const double fr = static_cast<double>(wide_exp2(x - fl));
        return from_parts(fr, static_cast<std::int64_t>(fl));
    }

    static XReal from_wide(wide v)
    {
        if (v == 0) return {};
        int e = 0;
        const wide m = frexpq(v, &e);
        return from_parts(static_cast<double>(m), e);
    }

    double mantissa() const { return mant_; }
    std::int64_t exponent() const { return exp_; }

    bool is_zero() const { return mant_ == 0.0; }
    int sign() const { return (mant_ > 0) - (mant_ < 0); }

    /// Converts to double; saturates to +-inf / 0 outside double range.
    double to_double() const
    {
        if (mant_ == 0.0) return 0.0;
        if (exp_ > 2000) return mant_ > 0 ? std::numeric_limits<double>::infinity()
                                          : -std::numeric_limits<double>::infinity();
        if (exp_ < -2000) return mant_ > 0 ? 0.0 : -0.0;
        return std::ldexp(mant_, static_cast<int>(exp_));
    }

    wide to_wide() const
    {
        if (mant_ == 0.0) return 0;
        return ldexpq(static_cast<wide>(mant_), static_cast<int>(exp_));
    }

    /// log2|x|; -inf for zero.
    wide log2_abs() const
    {
        if (mant_ == 0.0) return -std::numeric_limits<double>::infinity();
        return wide_log2(static_cast<wide>(std::fabs(mant_))) + static_cast<wide>(exp_);
    }

    XReal abs() const { return from_parts(std::fabs(mant_), exp_); }
    XReal operator-() const { return from_parts(-mant_, exp_); }

    friend XReal operator*(const XReal& a, const XReal& b)
    {
        if (a.is_zero() || b.is_zero()) return {};
        return from_parts(a.mant_ * b.mant_, a.exp_ + b.exp_);
    }

    friend XReal operator/(const XReal& a, const XReal& b)
    {
        if (b.is_zero()) throw std::domain_error("XReal division by zero");
        if (a.is_zero()) return {};
        return from_parts(a.mant_ / b.mant_, a.exp_ - b.exp_);
    }

    friend XReal operator+(const XReal& a, const XReal& b)
    {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        const XReal& big = a.exp_ >= b.exp_ ? a : b;
        const XReal& small = a.exp_ >= b.exp_ ? b : a;
        const std::int64_t shift = small.exp_ - big.exp_;
        if (shift < -1100) return big;
        return from_parts(big.mant_ + std::ldexp(small.mant_, static_cast<int>(shift)), big.exp_);
    }

    friend XReal operator-(const XReal& a, const XReal& b) { return a + (-b); }

    XReal& operator+=(const XReal& o) { return *this = *this + o; }
    XReal& operator-=(const XReal& o) { return *this = *this - o; }
    XReal& operator*=(const XReal& o) { return *this = *this * o; }
    XReal& operator/=(const XReal& o) { return *this = *this / o; }

    friend bool operator==(const XReal& a, const XReal& b)
    {
        return a.mant_ == b.mant_ && a.exp_ == b.exp_;
    }

    friend std::partial_ordering operator<=>(const XReal& a, const XReal& b)
    {
        const int sa = a.sign();
        const int sb = b.sign();
        if (sa != sb) return sa <=> sb;
        if (sa == 0) return std::partial_ordering::equivalent;
        if (a.exp_ != b.exp_) {
            // normalized mantissas: larger exponent means larger magnitude
            const auto mag = a.exp_ <=> b.exp_;
            return sa > 0 ? std::partial_ordering(mag) : std::partial_ordering(0 <=> mag);
        }
        return a.mant_ <=> b.mant_;
    }

    /// x^n by repeated squaring (n >= 0).
    friend XReal pow(XReal x, std::uint64_t n)
    {
        XReal acc(1.0);
        while (n) {
            if (n & 1U) acc *= x;
            x *= x;
            n >>= 1U;
        }
        return acc;
    }

private:
    double mant_ = 0.0;
    std::int64_t exp_ = 0;

    void assign(double mant, std::int64_t exp2)
    {
        if (mant == 0.0 || !std::isfinite(mant)) {
            if (!std::isfinite(mant)) throw std::domain_error("XReal from non-finite value");
            mant_ = 0.0;
            exp_ = 0;
            return;
        }
        int k = 0;
        mant_ = std::frexp(mant, &k);
        exp_ = exp2 + k;
    }
};

inline XReal max(const XReal& a, const XReal& b) { return a < b ? b : a; }
inline XReal min(const XReal& a, const XReal& b) { return b < a ? b : a; }

/// Decimal rendering; plain %.17g inside double range, otherwise
/// "d.dddddddddddddddde+EEEEEE" with the exponent computed in wide precision.
inline std::string to_decimal(const XReal& x)
{
    if (x.is_zero()) return "0";
    if (x.exponent() > -1000 && x.exponent() < 1000) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", x.to_double());
        return buf;
    }
    const wide l10 = x.log2_abs() / wide_log2_10();
    const wide e10 = wide_floor(l10);
    double m = static_cast<double>(wide_exp2((l10 - e10) * wide_log2_10()));
    std::int64_t e = static_cast<std::int64_t>(e10);
    if (m >= 10.0) {
        m /= 10.0;
        ++e;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s%.16fe%+lld", x.sign() < 0 ? "-" : "", m,
                  static_cast<long long>(e));
    return buf;
}

/// Parses decimal strings with arbitrarily large exponents.
inline XReal parse_xreal(std::string_view text)
{
    std::string s(text);
    const auto epos = s.find_first_of("eE");
    std::int64_t e10 = 0;
    std::string mant = s;
    if (epos != std::string::npos) {
        mant = s.substr(0, epos);
        const std::string es = s.substr(epos + 1);
        std::size_t used = 0;
        try {
            e10 = std::stoll(es, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("malformed exponent in '" + s + "'");
        }
        if (used != es.size()) throw std::invalid_argument("malformed exponent in '" + s + "'");
    }
    const wide m = parse_wide_decimal(mant);
    if (m == 0) return {};
    if (e10 == 0) return XReal::from_wide(m);
    const wide l2 = wide_log2(wide_abs(m)) + static_cast<wide>(e10) * wide_log2_10();
    XReal r = XReal::exp2(l2);
    return m < 0 ? -r : r;
}

} // namespace hcv
