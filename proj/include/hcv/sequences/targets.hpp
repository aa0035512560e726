#pragma once

// Deterministic enumeration p_1, p_2, ... of all nonzero polynomials with
// Gaussian-rational coefficients.
//
// height(p/q) = max(|p|, q) for reduced p/q, height(0) = 1; the height of a
// Gaussian rational is the max over real and imaginary parts. G(H) is the
// set of Gaussian rationals of height <= H sorted by (height, re, im).
// A polynomial of degree d whose largest coefficient height is H sits at
// level L = max(d+1, H). Order: level, then degree, then H, then
// lexicographic over (c_0, ..., c_d) by index in G(H).

#include "hcv/core/errors.hpp"
#include "hcv/core/rational.hpp"
#include "hcv/poly/polynomial.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <mutex>
#include <numeric>
#include <vector>

namespace hcv {

namespace detail {

using u128 = unsigned __int128;
inline constexpr u128 kSaturate = static_cast<u128>(1) << 120;

inline u128 sat_mul(u128 a, u128 b)
{
    if (a == 0 || b == 0) return 0;
    if (a >= kSaturate / b) return kSaturate;
    return a * b;
}

inline u128 sat_pow(u128 base, std::uint64_t e)
{
    u128 r = 1;
    for (std::uint64_t i = 0; i < e; ++i) r = sat_mul(r, base);
    return r;
}

inline unsigned rational_height(const Rational& q)
{
    if (q == 0) return 1;
    const BigInt n = boost::multiprecision::abs(boost::multiprecision::numerator(q));
    const BigInt d = boost::multiprecision::denominator(q);
    const BigInt h = n > d ? n : d;
    return h > 1000000 ? 1000001U : h.convert_to<unsigned>();
}

inline unsigned gaussian_height(const GaussianRational& z)
{
    return std::max(rational_height(z.real()), rational_height(z.imag()));
}

struct GEntry {
    unsigned height;
    GaussianRational value;
};

inline bool g_less(const GEntry& a, const GEntry& b)
{
    if (a.height != b.height) return a.height < b.height;
    if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
    return a.value.imag() < b.value.imag();
}

/// Rationals of height <= h in increasing order.
inline std::vector<Rational> rationals_upto(unsigned h)
{
    std::vector<Rational> rats;
    for (unsigned q = 1; q <= h; ++q) {
        for (long p = -static_cast<long>(h); p <= static_cast<long>(h); ++p) {
            if (p == 0 && q != 1) continue;
            if (p != 0 && std::gcd(static_cast<unsigned long>(p < 0 ? -p : p), static_cast<unsigned long>(q)) != 1) continue;
            rats.emplace_back(BigInt(p), BigInt(q));
        }
    }
    std::sort(rats.begin(), rats.end());
    return rats;
}

/// Number of rationals of height <= h: 1 + 2 * #{(p, q) coprime, 1 <= p, q <= h}.
inline u128 rational_count(unsigned h)
{
    if (h == 0) return 0;
    u128 n = 1;
    for (unsigned q = 1; q <= h; ++q) {
        for (unsigned p = 1; p <= h; ++p) {
            if (std::gcd(p, q) == 1) n += 2;
        }
    }
    return n;
}

/// G(H), cached. Only small heights are ever tabulated (enumeration by index).
inline const std::vector<GEntry>& gaussian_table(unsigned H)
{
    static std::mutex mu;
    static std::map<unsigned, std::vector<GEntry>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(H);
    if (it != cache.end()) return it->second;
    const std::vector<Rational> rats = rationals_upto(H);
    std::vector<GEntry> g;
    g.reserve(rats.size() * rats.size());
    for (const auto& re : rats) {
        for (const auto& im : rats) {
            GaussianRational z(re, im);
            g.push_back({gaussian_height(z), z});
        }
    }
    std::sort(g.begin(), g.end(), g_less);
    return cache.emplace(H, std::move(g)).first->second;
}

inline u128 g_size(unsigned H)
{
    const u128 r = rational_count(H);
    return r * r;
}

/// Position of z in G(H) for any H >= height(z), without tabulating G(H).
inline u128 g_index(const GaussianRational& z)
{
    const unsigned h = gaussian_height(z);
    const u128 all_h = rational_count(h);
    const u128 exact_h = all_h - rational_count(h - 1); // rationals of height exactly h
    u128 idx = g_size(h - 1);
    const bool re_top = rational_height(z.real()) == h;
    const std::vector<Rational> rats = rationals_upto(h);
    for (const auto& r : rats) {
        if (!(r < z.real())) break;
        idx += rational_height(r) == h ? all_h : exact_h;
    }
    for (const auto& r : rats) {
        if (!(r < z.imag())) break;
        if (re_top || rational_height(r) == h) ++idx;
    }
    return idx;
}

inline std::size_t zero_index(unsigned H)
{
    const auto& g = gaussian_table(H);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i].value.is_zero()) return i;
    }
    throw Error("zero missing from G(H)");
}

/// Count of (d+1)-tuples over G(H), nonzero leading entry, with at least one
/// entry outside G(H-1).
inline u128 group_count(std::uint64_t d, unsigned H)
{
    const u128 g = g_size(H);
    const u128 gl = g_size(H - 1);
    const u128 all = sat_mul(sat_pow(g, d), g - 1);
    const u128 low = gl == 0 ? 0 : sat_mul(sat_pow(gl, d), gl - 1);
    return all >= kSaturate ? kSaturate : all - low;
}

/// Completions of positions k+1..d given the state after position k.
inline u128 completions(std::uint64_t d, std::uint64_t k, bool high, unsigned H)
{
    if (k == d) return high ? 1 : 0;
    const u128 g = g_size(H);
    const u128 gl = g_size(H - 1);
    const std::uint64_t free = d - k - 1;
    const u128 all = sat_mul(sat_pow(g, free), g - 1);
    if (high) return all;
    const u128 low = gl == 0 ? 0 : sat_mul(sat_pow(gl, free), gl - 1);
    return all >= kSaturate ? kSaturate : all - low;
}

template <class F>
void for_each_group(F&& f)
{
    for (unsigned L = 1;; ++L) {
        for (std::uint64_t d = 0; d + 1 <= L; ++d) {
            if (d + 1 < L) {
                if (!f(d, L)) return;
            } else {
                for (unsigned H = 1; H <= L; ++H) {
                    if (!f(d, H)) return;
                }
            }
        }
    }
}

} // namespace detail

/// p_j for j >= 1.
inline ExactPolynomial enumerate_targets(std::uint64_t j)
{
    require(j >= 1, "target index starts at 1");
    detail::u128 r = j - 1;
    std::uint64_t deg = 0;
    unsigned height = 0;
    detail::for_each_group([&](std::uint64_t d, unsigned H) {
        const detail::u128 c = detail::group_count(d, H);
        if (r < c) {
            deg = d;
            height = H;
            return false;
        }
        r -= c;
        return true;
    });
    const auto& g = detail::gaussian_table(height);
    const std::size_t gl = static_cast<std::size_t>(detail::g_size(height - 1));
    const std::size_t z0 = detail::zero_index(height);
    std::vector<GaussianRational> coeffs(deg + 1);
    bool high = false;
    for (std::uint64_t k = 0; k <= deg; ++k) {
        bool placed = false;
        for (std::size_t v = 0; v < g.size(); ++v) {
            if (k == deg && v == z0) continue;
            const bool h2 = high || v >= gl;
            const detail::u128 c = detail::completions(deg, k, h2, height);
            if (r < c) {
                coeffs[k] = g[v].value;
                high = h2;
                placed = true;
                break;
            }
            r -= c;
        }
        if (!placed) throw Error("target enumeration out of range");
    }
    return ExactPolynomial(std::move(coeffs));
}

/// Inverse of enumerate_targets.
inline std::uint64_t target_rank(const ExactPolynomial& p)
{
    require(!p.is_zero(), "the zero polynomial is not enumerated");
    const auto deg = static_cast<std::uint64_t>(p.degree());
    unsigned H = 1;
    for (const auto& c : p.coeffs()) H = std::max(H, detail::gaussian_height(c));
    detail::u128 r = 0;
    detail::for_each_group([&](std::uint64_t d, unsigned h) {
        if (d == deg && h == H) return false;
        r += detail::group_count(d, h);
        return r < detail::kSaturate;
    });
    const detail::u128 gl = detail::g_size(H - 1);
    const detail::u128 z0 = detail::g_index(GaussianRational());
    bool high = false;
    for (std::uint64_t k = 0; k <= deg; ++k) {
        const detail::u128 idx = detail::g_index(p[k]);
        // values below idx: those in G(H-1) and those outside it, counted in bulk
        const detail::u128 low_before = std::min(idx, gl);
        const detail::u128 high_before = idx - low_before;
        detail::u128 low_n = low_before;
        detail::u128 high_n = high_before;
        if (k == deg && z0 < idx) (z0 < gl ? low_n : high_n) -= 1; // zero is not allowed on top
        r += detail::sat_mul(low_n, detail::completions(deg, k, high, H));
        r += detail::sat_mul(high_n, detail::completions(deg, k, true, H));
        if (r >= detail::kSaturate) break;
        high = high || idx >= gl;
    }
    if (r >= static_cast<detail::u128>(UINT64_MAX)) throw BudgetExceeded("target rank exceeds 64 bits");
    return static_cast<std::uint64_t>(r) + 1;
}

} // namespace hcv
