#pragma once

// Uniform distribution mod 1: counting function, star discrepancy and an
// empirical test for (theta * k_n) mod 1.

#include "hcv/core/errors.hpp"
#include "hcv/core/wide.hpp"
#include "hcv/sequences/sequence.hpp"
#include "hcv/util/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hcv {

/// {theta k_n} for n = 1..N, reduced in 113-bit precision.
inline std::vector<double> fractional_parts(wide theta, const SequenceSpec& seq, std::uint64_t N)
{
    require(N >= 1, "need at least one sample");
    std::vector<double> out(N);
    parallel_for(N, [&](std::size_t i) {
        const auto k = seq.term(i + 1);
        if (!k) throw BudgetExceeded("sequence exhausted before N terms");
        out[i] = static_cast<double>(frac(theta * static_cast<wide>(*k)));
        if (out[i] >= 1.0) out[i] = std::nextafter(1.0, 0.0);
    });
    return out;
}

/// A([a,b); N; omega): number of n <= N with {x_n} in [a, b).
inline std::uint64_t counting(double a, double b, std::uint64_t N, std::span<const double> omega)
{
    require(0.0 <= a && a < b && b <= 1.0, "counting needs 0 <= a < b <= 1");
    require(N >= 1 && N <= omega.size(), "N must be in [1, len(omega)]");
    std::uint64_t c = 0;
    for (std::uint64_t n = 0; n < N; ++n) {
        const double x = omega[n] - std::floor(omega[n]);
        if (x >= a && x < b) ++c;
    }
    return c;
}

/// D*_N = max_i max(i/N - x_(i), x_(i) - (i-1)/N) over the sorted parts.
inline double discrepancy(std::span<const double> omega, std::uint64_t N)
{
    require(N >= 1 && N <= omega.size(), "N must be in [1, len(omega)]");
    std::vector<double> x(omega.begin(), omega.begin() + static_cast<std::ptrdiff_t>(N));
    for (auto& v : x) v -= std::floor(v);
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(N);
    double d = 0.0;
    for (std::uint64_t i = 0; i < N; ++i) {
        d = std::max({d, static_cast<double>(i + 1) / n - x[i], x[i] - static_cast<double>(i) / n});
    }
    return std::min(d, 1.0);
}

struct UdReport {
    std::string theta;
    std::string sequence;
    std::uint64_t N = 0;
    unsigned bins = 0;
    double tol = 0.0;
    double max_bin_deviation = 0.0; // max_j |A(bin_j)/N - 1/bins|
    double star_discrepancy = 0.0;
    bool pass = false;
};

inline UdReport ud_test(wide theta, std::string theta_text, const SequenceSpec& seq, std::uint64_t N, unsigned bins,
                        double tol)
{
    require(bins >= 2 && N >= bins, "ud_test needs N >= bins >= 2");
    require(tol > 0.0, "tolerance must be positive");
    const std::vector<double> x = fractional_parts(theta, seq, N);
    std::vector<std::uint64_t> count(bins, 0);
    for (double v : x) {
        auto b = static_cast<std::size_t>(v * bins);
        if (b >= bins) b = bins - 1;
        ++count[b];
    }
    UdReport r;
    r.theta = std::move(theta_text);
    r.sequence = seq.text;
    r.N = N;
    r.bins = bins;
    r.tol = tol;
    const double n = static_cast<double>(N);
    for (auto c : count) r.max_bin_deviation = std::max(r.max_bin_deviation, std::fabs(static_cast<double>(c) / n - 1.0 / bins));
    r.star_discrepancy = discrepancy(x, N);
    r.pass = r.max_bin_deviation < tol;
    return r;
}

} // namespace hcv
