#pragma once

// Partition of [1/rho0, rho0] into cells [a_i, a_{i+1}).
// Cell indices are 1-based here, matching the certificate records; the final
// index N0+1 also owns the right endpoint rho0.

#include "hcv/core/errors.hpp"
#include "hcv/core/wide.hpp"
#include "hcv/sequences/subsequence.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace hcv {

enum class EndpointFlag {
    Exact,     // a_{N0+1} == rho0; the last cell is the single point rho0
    Appended,  // a_{N0+2} := rho0 appended; last cell [a_{N0+1}, rho0]
    Optimized  // steps chosen per cell; last point rho0
};

inline const char* to_string(EndpointFlag f)
{
    switch (f) {
    case EndpointFlag::Exact: return "exact";
    case EndpointFlag::Appended: return "appended";
    case EndpointFlag::Optimized: return "optimized";
    }
    return "?";
}

struct Partition {
    double rho0 = 2.0;
    double delta0 = 0.0; // 0 in optimized mode
    std::uint64_t N0 = 0;
    EndpointFlag flag = EndpointFlag::Appended;
    std::vector<double> points; // a_1 = 1/rho0 < ... < last = rho0

    double left() const { return points.front(); }
    double right() const { return points.back(); }
    std::uint64_t cell_count() const { return N0 + 1; }

    /// Left anchor of cell i (1-based).
    double anchor(std::uint64_t i) const { return points.at(i - 1); }

    /// Right end of cell i: a_{i+1}, or rho0 for the final cell.
    double right_end(std::uint64_t i) const
    {
        return i < points.size() ? points[i] : rho0;
    }
};

/// a_1 = 1/rho0, a_{i+1} = a_i + delta0/mu_i for i = 1..N0, then the endpoint rule.
inline Partition partition_points(Subsequence& sub, double delta0, double rho0, std::uint64_t N0)
{
    require(rho0 > 1.0 && delta0 > 0.0, "partition needs rho0 > 1 and delta0 > 0");
    const double required = rho0 - 1.0 / rho0;
    const double before = delta0 * sub.prefix(N0);
    const double after = delta0 * sub.prefix(N0 + 1);
    if (!(before <= required && after > required)) {
        throw PreconditionError("N0 is not the minimal coverage index for this subsequence");
    }
    Partition p;
    p.rho0 = rho0;
    p.delta0 = delta0;
    p.N0 = N0;
    p.points.reserve(N0 + 2);
    const wide w_delta = static_cast<wide>(delta0);
    wide a = static_cast<wide>(1.0) / static_cast<wide>(rho0);
    p.points.push_back(static_cast<double>(a));
    for (std::uint64_t i = 1; i <= N0; ++i) {
        a += w_delta / static_cast<wide>(sub.mu(i));
        p.points.push_back(static_cast<double>(a));
    }
    if (p.points.back() >= rho0) {
        p.points.back() = rho0;
        p.flag = EndpointFlag::Exact;
    } else {
        p.points.push_back(rho0);
        p.flag = EndpointFlag::Appended;
    }
    return p;
}

/// Unique i with lambda in [a_i, a_{i+1}); rho0 itself maps to N0+1.
inline std::uint64_t locate_cell(const Partition& p, double lambda)
{
    if (!(lambda >= p.left() && lambda <= p.rho0)) {
        throw PreconditionError("lambda outside the partitioned interval");
    }
    if (lambda >= p.rho0) return p.N0 + 1;
    // last point <= lambda
    const auto it = std::upper_bound(p.points.begin(), p.points.end(), lambda);
    auto i = static_cast<std::uint64_t>(it - p.points.begin());
    return std::min<std::uint64_t>(i, p.N0 + 1);
}

} // namespace hcv
