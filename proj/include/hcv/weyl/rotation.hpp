#pragma once

// Transfer of a witness at a positive dilation lambda0 to lambda0 e^{2 pi i theta0}:
// pick a certified order k whose {theta0 k} falls in a small arc around 0, so that
//   |T_{k, lambda0 e^{2 pi i theta0}}(f) - p(e^{2 pi i theta0} z)|
//     <= |e^{2 pi i theta0 k} - 1| (eps1 + M0) + eps1 < eps0.

#include "hcv/blocks/block_sum.hpp"
#include "hcv/core/errors.hpp"
#include "hcv/core/wide.hpp"
#include "hcv/core/xreal.hpp"
#include "hcv/poly/norms.hpp"
#include "hcv/poly/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <cstdint>
#include <sstream>
#include <vector>

namespace hcv {

/// Positive root of x^2 + (M0+1) x - eps0, in the cancellation-free form.
inline double trinomial_root(double M0, double eps0)
{
    const double b = M0 + 1.0;
    return 2.0 * eps0 / (b + std::sqrt(b * b + 4.0 * eps0));
}

/// |e^{2 pi i theta v} - 1| = 2 |sin(pi {theta v})|, reduced in wide precision.
inline double unit_root_distance(wide theta, std::uint64_t v)
{
    const wide f = frac(theta * static_cast<wide>(v));
    return static_cast<double>(2 * fabsq(sinq(M_PIq * f)));
}

struct RotationParams {
    double M0 = 0;    // upper_norm(p, n0)
    double eps0 = 0;
    double rho2 = 0;  // trinomial root
    double eps1 = 0;  // rho2 / 2
    double phi0 = 0;  // sin(phi0) = eps1 / 2
    double arc = 0;   // phi0 / pi, half-width of the accepted arc in turns
};

inline RotationParams rotation_params(double M0, double eps0)
{
    if (!(eps0 > 0.0 && eps0 < 1.0)) throw InvalidEps("eps0 must lie in (0,1)");
    require(M0 >= 0.0, "M0 must be nonnegative");
    RotationParams r;
    r.M0 = M0;
    r.eps0 = eps0;
    r.rho2 = trinomial_root(M0, eps0);
    r.eps1 = r.rho2 / 2.0;
    r.phi0 = std::asin(r.eps1 / 2.0);
    r.arc = r.phi0 / std::numbers::pi;
    return r;
}

/// An order of f known to satisfy |T_{order, lambda0}(f) - p| < certified_error on the n0-disk.
struct WitnessCandidate {
    std::size_t block_index = 0; // index into the BlockSum
    std::uint64_t order = 0;
    double certified_error = 0;
};

struct RotationWitness {
    double theta0 = 0;
    double lambda0 = 1;
    Polynomial target;
    RotationParams params;
    std::uint64_t n0 = 1;
    std::uint64_t order = 0;          // k_{v0}
    std::size_t candidate_rank = 0;   // 1-based position among the eligible candidates
    std::size_t scanned = 0;
    double frac_part = 0;             // {theta0 k}
    double root_distance = 0;         // |e^{2 pi i theta0 k} - 1|
    double base_error = 0;            // certified error at lambda0
    double certified_error = 0;       // |e - 1|(eps1 + M0) + eps1
    double recomputed_error = 0;      // independent evaluation at the complex dilation
};

/// p(e^{2 pi i theta} z).
inline Polynomial rotate_target(const Polynomial& p, wide theta)
{
    std::vector<XComplex> c(p.coeffs());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = c[k] * XComplex::polar(XReal(1.0), theta * static_cast<wide>(k));
    return Polynomial(std::move(c));
}

/// Scans the candidates in ascending order; those with certified error >= eps1 are
/// skipped. Throws NotFound after search_cap eligible candidates.
inline RotationWitness rotation_witness(const BlockSum& f, std::vector<WitnessCandidate> candidates, wide theta0,
                                        double lambda0, const Polynomial& p, double eps0, std::uint64_t n0,
                                        std::size_t search_cap, unsigned exact_tail_blocks = kDefaultExactTailBlocks)
{
    require(n0 >= 1, "disk index n0 must be >= 1");
    require(lambda0 > 0.0, "lambda0 must be positive");
    RotationWitness w;
    w.params = rotation_params(upper_norm(p, static_cast<double>(n0)).to_double(), eps0);
    w.theta0 = static_cast<double>(frac(theta0));
    w.lambda0 = lambda0;
    w.target = p;
    w.n0 = n0;
    std::sort(candidates.begin(), candidates.end(),
              [](const WitnessCandidate& a, const WitnessCandidate& b) { return a.order < b.order; });
    const double arc = w.params.arc;
    double best = 2.0;
    std::size_t eligible = 0;
    for (const auto& c : candidates) {
        ++w.scanned;
        if (!(c.certified_error < w.params.eps1)) continue;
        if (++eligible > search_cap) break;
        const double fp = static_cast<double>(frac(theta0 * static_cast<wide>(c.order)));
        const double dist = unit_root_distance(theta0, c.order);
        best = std::min(best, dist);
        if (!(fp < arc || fp > 1.0 - arc)) continue;
        w.order = c.order;
        w.candidate_rank = eligible;
        w.frac_part = fp;
        w.root_distance = dist;
        w.base_error = c.certified_error;
        w.certified_error = dist * (w.params.eps1 + w.params.M0) + w.params.eps1;
        const Polynomial rotated = rotate_target(p, theta0);
        const ErrorBreakdown e = evaluate_error(f, c.block_index, Dilation(lambda0, theta0), rotated,
                                                static_cast<double>(n0), exact_tail_blocks);
        w.recomputed_error = e.total().to_double();
        if (!(w.certified_error < eps0) || !(w.recomputed_error < eps0)) {
            std::ostringstream os;
            os << "accepted order " << c.order << " but the rotated error is not below eps0 (certified "
               << w.certified_error << ", recomputed " << w.recomputed_error << ")";
            throw CertificationFailure(os.str());
        }
        return w;
    }
    std::ostringstream os;
    os << "no rotation witness among " << std::min(eligible, search_cap) << " eligible candidates; best |e^{2 pi i theta k} - 1| = "
       << best << ", needed < " << w.params.eps1;
    throw NotFound(os.str());
}

} // namespace hcv
