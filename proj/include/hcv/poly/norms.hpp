#pragma once

#include "hcv/core/errors.hpp"
#include "hcv/core/xcomplex.hpp"
#include "hcv/core/xreal.hpp"
#include "hcv/poly/polynomial.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

namespace hcv {

/// sum_k |c_k| R^k, the certification norm on the closed disk of radius R.
inline XReal upper_norm(const Polynomial& f, double R)
{
    require(R > 0.0 && std::isfinite(R), "upper_norm needs R > 0");
    XReal acc;
    XReal pw(1.0);
    const XReal r(R);
    for (const auto& c : f.coeffs()) {
        if (!c.is_zero()) acc += c.abs() * pw;
        pw *= r;
    }
    return acc;
}

inline XComplex eval(const Polynomial& f, std::complex<double> z)
{
    const XComplex zz(z);
    XComplex acc;
    for (auto it = f.coeffs().rbegin(); it != f.coeffs().rend(); ++it) acc = acc * zz + *it;
    return acc;
}

/// Max |f| over G equispaced points of |z| = R. Cross-check only.
inline XReal grid_norm(const Polynomial& f, double R, int G)
{
    require(G >= 8, "grid_norm needs G >= 8");
    require(R > 0.0, "grid_norm needs R > 0");
    XReal best;
    for (int j = 0; j < G; ++j) {
        const double ang = 2.0 * std::numbers::pi * j / G;
        best = max(best, eval(f, std::polar(R, ang)).abs());
    }
    return best;
}

/// sum_{n>=1} 2^{-n} u_n/(1+u_n) with u_n = norm_on_disk(n), truncated once
/// the remaining geometric tail 2^{-N} drops below tol.
inline double metric_rho_from(const std::function<XReal(double)>& norm_on_disk, double tol)
{
    require(tol > 0.0, "metric tolerance must be positive");
    double sum = 0.0;
    double w = 0.5;
    for (int n = 1; n <= 1100; ++n, w *= 0.5) {
        const XReal u = norm_on_disk(static_cast<double>(n));
        double q = 0.0;
        if (!u.is_zero()) {
            // u/(1+u) without overflow
            q = u.exponent() > 60 ? 1.0 : (u / (u + XReal(1.0))).to_double();
        }
        sum += w * q;
        if (w <= tol) break; // remaining tail sum_{m>n} 2^{-m} = w
    }
    return sum;
}

inline double metric_rho(const Polynomial& f, const Polynomial& g, double tol = 1e-12)
{
    const Polynomial d = f - g;
    return metric_rho_from([&](double R) { return upper_norm(d, R); }, tol);
}

} // namespace hcv
