#pragma once

// 113-bit binary floating point used wherever double loses the digits that
// matter: log-factorials at degrees ~1e5, fractional parts of theta*k for
// k up to 1e9, and decimal <-> extended-exponent conversion.

#include <quadmath.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hcv {

using wide = __float128;

inline wide wide_floor(wide x) { return floorq(x); }
inline wide wide_log(wide x) { return logq(x); }
inline wide wide_log2(wide x) { return log2q(x); }
inline wide wide_exp2(wide x) { return exp2q(x); }
inline wide wide_sqrt(wide x) { return sqrtq(x); }
inline wide wide_abs(wide x) { return fabsq(x); }
inline wide wide_lgamma(wide x) { return lgammaq(x); }

inline const wide& wide_ln2()
{
    static const wide v = logq(static_cast<wide>(2));
    return v;
}

inline const wide& wide_log2_10()
{
    static const wide v = log2q(static_cast<wide>(10));
    return v;
}

/// Fractional part in [0, 1).
inline wide frac(wide x)
{
    wide f = x - floorq(x);
    if (f >= 1) f -= 1;
    return f;
}

/// log2(n!) to ~1e-30 absolute for every n representable here.
inline wide log2_factorial(std::uint64_t n)
{
    if (n < 2) return 0;
    return lgammaq(static_cast<wide>(n) + 1) / wide_ln2();
}

/// log2 of the rising product (k+1)(k+2)...(k+n) = (k+n)!/k!.
inline wide log2_factorial_ratio(std::uint64_t k, std::uint64_t n)
{
    if (n == 0) return 0;
    if (n <= 16) {
        // short products are computed directly to stay exact for small k
        wide acc = 1;
        for (std::uint64_t j = 1; j <= n; ++j) acc *= static_cast<wide>(k + j);
        return log2q(acc);
    }
    return log2_factorial(k + n) - log2_factorial(k);
}

inline std::string to_string(wide x, int digits = 36)
{
    char buf[128];
    const std::string fmt = "%." + std::to_string(digits) + "Qg";
    quadmath_snprintf(buf, sizeof buf, fmt.c_str(), x);
    return buf;
}

/// Parses a plain decimal literal ("-1.25e-3"). Locale independent.
inline wide parse_wide_decimal(std::string_view text)
{
    const std::string s(text);
    if (s.empty()) throw std::invalid_argument("empty numeric literal");
    char* end = nullptr;
    const wide v = strtoflt128(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        throw std::invalid_argument("malformed numeric literal: " + s);
    }
    return v;
}

} // namespace hcv
