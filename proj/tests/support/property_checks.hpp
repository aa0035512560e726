#pragma once

// Randomised property checks for the block layer. Each returns a summary with
// a violation count so unit tests and the acceptance binary share one oracle.

#include "hcv/blocks/pi_function.hpp"
#include "hcv/blocks/solution_block.hpp"
#include "hcv/poly/norms.hpp"
#include "hcv/poly/operator.hpp"
#include "support/random_inputs.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace hcv::testkit {

struct CheckSummary {
    std::size_t cases = 0;
    std::size_t violations = 0;
    double worst = 0.0; // worst relative error or worst ratio, check-specific
    std::uint64_t degree = 0; // largest materialized degree, when one is built
    std::string note;
    bool ok() const { return cases > 0 && violations == 0; }
};

/// Exact residual T_{m0,lambda0}(f) - p == 0, and the float residual below 1e-10
/// relative per coefficient.
inline CheckSummary check_solution_exactness(std::size_t count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> md(1, 20);
    CheckSummary s;
    for (std::size_t c = 0; c < count; ++c) {
        const auto m0 = static_cast<std::uint64_t>(md(rng));
        const Rational lam = random_positive_rational(rng, 10, 12);
        const ExactPolynomial p = random_exact_poly(rng, 5);
        const ExactPolynomial f = solve_block_exact(m0, GaussianRational(lam), p);
        const ExactPolynomial back = apply_op(m0, GaussianRational(lam), f);
        ++s.cases;
        if (!(back - p).is_zero()) ++s.violations;

        const Polynomial pf = to_float(p);
        const SolutionBlock b = solve_block(m0, to_xreal(lam).to_double(), pf);
        const Polynomial img = apply_op(OperatorSpec(m0, Dilation(b.lambda0)), materialize(b));
        // the float anchor is lam rounded to double; compare against the exact
        // image at that anchor rather than at lam itself
        const double rel = max_relative_difference(img, block_image(b, m0, Dilation(b.lambda0)));
        const double rel_p = max_relative_difference(img, pf);
        s.worst = std::max({s.worst, rel, rel_p});
        if (rel >= 1e-10 || rel_p >= 1e-10) ++s.violations;
    }
    return s;
}

/// The two apply_op routes agree within 1e-12 relative on random inputs.
inline CheckSummary check_route_equivalence(std::size_t count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> nd(1, 10);
    std::uniform_real_distribution<double> lm(std::log(0.1), std::log(10.0));
    std::uniform_real_distribution<double> ph(0.0, 1.0);
    CheckSummary s;
    for (std::size_t c = 0; c < count; ++c) {
        const Polynomial f = random_unit_poly(rng, 30);
        const OperatorSpec spec(nd(rng), Dilation(std::exp(lm(rng)), static_cast<wide>(ph(rng))));
        const Polynomial a = apply_op_iterated(spec, f);
        const Polynomial b = apply_op_direct(spec, f);
        const double rel = a.degree() == b.degree() ? max_relative_difference(a, b) : 1.0;
        s.worst = std::max(s.worst, rel);
        ++s.cases;
        if (!(rel < 1e-12)) ++s.violations;
    }
    return s;
}

/// Random blocks and lambda samples inside the stability interval: the
/// perturbation (measured from the materialized block) stays below eps0.
inline CheckSummary check_stability(std::size_t blocks, std::size_t samples, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> md(1, 40);
    std::uniform_real_distribution<double> lam(0.2, 5.0);
    std::uniform_real_distribution<double> eps(0.01, 0.99);
    std::uniform_real_distribution<double> rad(1.01, 3.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CheckSummary s;
    for (std::size_t c = 0; c < blocks; ++c) {
        const SolutionBlock b = solve_block(md(rng), lam(rng), random_unit_poly(rng, 5));
        const double e0 = eps(rng);
        const double R0 = rad(rng);
        const StabilityInterval iv = stability_interval(b, e0, R0);
        const Polynomial f = materialize(b);
        const Polynomial at_anchor = apply_op(OperatorSpec(b.m0, Dilation(b.lambda0)), f);
        for (std::size_t k = 0; k < samples; ++k) {
            // include the anchor and points crowding the open right end
            double l = b.lambda0 + (iv.hi - iv.lo) * (k == 0 ? 0.0 : (k == 1 ? 1.0 - 1e-12 : u(rng)));
            if (!iv.contains(l)) l = iv.lo;
            const Polynomial d = apply_op(OperatorSpec(b.m0, Dilation(l)), f) - at_anchor;
            const double ratio = (upper_norm(d, R0) / XReal(e0)).to_double();
            s.worst = std::max(s.worst, ratio);
            ++s.cases;
            if (!(ratio < 1.0)) ++s.violations;
        }
    }
    return s;
}

/// Pi with five blocks at minimal legal gaps. For every cell and `samples`
/// lambda per cell: measured error <= pi_error_bound, measured tail <= tail_bound.
inline CheckSummary check_pi_bound(std::size_t samples, std::uint64_t seed, const Polynomial& p, double R0)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto target = make_target(p);
    // gap floor from a probe assembly
    const PiFunction probe = assemble_pi(Polynomial(), {solve_block(1000, 1.0, target)}, R0);
    const std::uint64_t N1 = probe.N1;
    const std::vector<double> anchors{0.7, 0.85, 1.0, 1.2, 1.45};
    std::vector<SolutionBlock> blocks;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        blocks.push_back(solve_block(N1 + 1 + i * (N1 + 1), anchors[i], target));
    }
    const PiFunction pi = assemble_pi(Polynomial(), blocks, R0);
    const Polynomial dense = materialize(pi);
    // floating-point slack for the dense recomputation; the exact endpoint case has bound 0
    const XReal slack = XReal(1e-12) * max(XReal(1.0), upper_norm(p, R0));
    CheckSummary s;
    s.degree = dense.degree();
    s.note = "N1=" + std::to_string(pi.N1) + " top degree=" + std::to_string(dense.degree());
    for (std::size_t i = 1; i <= pi.size(); ++i) {
        const bool last = i == pi.size();
        for (std::size_t k = 0; k < (last ? 1 : samples); ++k) {
            const double lo = pi.block(i).lambda0;
            const double l = last ? lo : lo + (pi.block(i + 1).lambda0 - lo) * (k == 0 ? 0.0 : u(rng));
            const Dilation lam(l);
            const std::uint64_t m = pi.block(i).m0;
            const XReal measured = upper_norm(apply_op(OperatorSpec(m, lam), dense) - p, R0);
            const XReal bound = pi_error_bound(pi, i, lam, p);
            const XReal mt = measured_tail(pi, i, lam);
            const XReal tb = tail_bound(pi, i, lam);
            ++s.cases;
            if (measured > bound + slack) ++s.violations;
            if (mt > tb) ++s.violations;
            if (!bound.is_zero()) s.worst = std::max(s.worst, (measured / bound).to_double());
        }
    }
    return s;
}

} // namespace hcv::testkit
