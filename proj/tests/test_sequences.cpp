#include "hcv/sequences/partition.hpp"
#include "hcv/sequences/sequence.hpp"
#include "hcv/sequences/subsequence.hpp"
#include "hcv/sequences/targets.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

using namespace hcv;

namespace {

std::vector<std::uint64_t> take(SequenceGenerator g, std::size_t n)
{
    std::vector<std::uint64_t> out;
    while (out.size() < n) {
        const auto t = g.next();
        if (!t) break;
        out.push_back(*t);
    }
    return out;
}

std::vector<std::uint64_t> take(Subsequence& s, std::size_t n)
{
    std::vector<std::uint64_t> out;
    for (std::size_t i = 1; i <= n; ++i) out.push_back(s.mu(i));
    return out;
}

} // namespace

TEST(Sequence, Generators)
{
    EXPECT_EQ(take(make_sequence(SequenceSpec::affine(1, 0)), 4), (std::vector<std::uint64_t>{1, 2, 3, 4}));
    EXPECT_EQ(take(make_sequence(SequenceSpec::power(2)), 4), (std::vector<std::uint64_t>{1, 4, 9, 16}));
    EXPECT_EQ(take(make_sequence(SequenceSpec::explicit_list({2, 3, 5, 7})), 10), (std::vector<std::uint64_t>{2, 3, 5, 7}));
    EXPECT_THROW(SequenceSpec::explicit_list({2, 2, 5}), std::invalid_argument);
    EXPECT_THROW(SequenceSpec::explicit_list({0, 1}), std::invalid_argument);
}

TEST(Sequence, MiniLanguage)
{
    const SequenceSpec a = parse_sequence("2n+1");
    EXPECT_EQ(a.kind, SequenceSpec::Kind::Affine);
    EXPECT_EQ(*a.term(1), 3U);
    EXPECT_EQ(*parse_sequence("n^2").term(5), 25U);
    EXPECT_EQ(*parse_sequence("n").term(7), 7U);
    EXPECT_EQ(*parse_sequence("3n").term(2), 6U);
    EXPECT_THROW(parse_sequence("n+n"), std::invalid_argument);
    EXPECT_THROW(parse_sequence(""), std::invalid_argument);

    const auto path = std::filesystem::temp_directory_path() / "hcv_seq_test.txt";
    {
        std::ofstream out(path);
        out << "2\n3\n5\n7\n11\n";
    }
    const SequenceSpec e = parse_sequence("@" + path.string());
    EXPECT_EQ(e.kind, SequenceSpec::Kind::Explicit);
    EXPECT_EQ(e.length(), 5U);
    std::filesystem::remove(path);
}

TEST(Sequence, FirstIndexAboveMatchesScan)
{
    for (const SequenceSpec& s : {SequenceSpec::affine(3, 2), SequenceSpec::power(3), SequenceSpec::power(1),
                                  SequenceSpec::explicit_list({4, 9, 10, 40})}) {
        for (std::uint64_t x = 0; x < 200; ++x) {
            std::optional<std::uint64_t> scan;
            for (std::uint64_t n = 1; n < 1000; ++n) {
                const auto t = s.term(n);
                if (!t) break;
                if (*t > x) {
                    scan = n;
                    break;
                }
            }
            EXPECT_EQ(s.first_index_above(x), scan) << s.text << " x=" << x;
        }
    }
}

TEST(Subsequence, SpecExamples)
{
    Subsequence a = extract_subsequence(SequenceSpec::affine(1, 0), 3);
    EXPECT_EQ(take(a, 4), (std::vector<std::uint64_t>{4, 8, 12, 16}));
    Subsequence b = extract_subsequence(SequenceSpec::affine(1, 0), 1);
    EXPECT_EQ(take(b, 3), (std::vector<std::uint64_t>{2, 4, 6}));
    EXPECT_THROW(extract_subsequence(SequenceSpec::affine(1, 0), 0), PreconditionError);
    Subsequence c = extract_subsequence(SequenceSpec::power(2), 5);
    EXPECT_EQ(take(c, 3), (std::vector<std::uint64_t>{9, 16, 25}));
    Subsequence d = extract_subsequence(SequenceSpec::explicit_list({2, 3, 5, 7, 11}), 2);
    EXPECT_EQ(d.mu(1), 3U);
    EXPECT_EQ(d.mu(2), 7U);
    EXPECT_EQ(d.mu(3), 11U);
    EXPECT_THROW(d.mu(4), BudgetExceeded);
}

TEST(Subsequence, GapPropertiesHold)
{
    for (const SequenceSpec& base : {SequenceSpec::affine(1, 0), SequenceSpec::affine(3, 1), SequenceSpec::power(2)}) {
        for (std::uint64_t M : {1U, 2U, 7U, 30U}) {
            Subsequence s = extract_subsequence(base, M, 50);
            ASSERT_TRUE(s.ensure(500));
            const auto& mu = s.memo();
            EXPECT_GT(mu[0], std::max<std::uint64_t>(M, 50));
            for (std::size_t i = 1; i < mu.size(); ++i) {
                EXPECT_GT(mu[i] - mu[i - 1], M);
                // every term comes from the base sequence
                const auto idx = base.first_index_above(mu[i] - 1);
                ASSERT_TRUE(idx.has_value());
                EXPECT_EQ(*base.term(*idx), mu[i]);
            }
        }
    }
}

TEST(Subsequence, GreedyDensityLowerBound)
{
    for (std::uint64_t M : {1U, 3U, 10U}) {
        Subsequence s = extract_subsequence(SequenceSpec::affine(1, 0), M);
        double H = 0;
        for (std::uint64_t n = 1; n <= 10000; ++n) {
            H += 1.0 / static_cast<double>(n);
            EXPECT_LE(s.mu(n), (M + 1) * n + M);
            // 1/mu_n >= 1/((M+1)(n+1)), summed: prefix >= (H_{n+1} - 1)/(M+1)
            if (n % 1000 == 0) {
                EXPECT_GE(s.prefix(n), (H + 1.0 / (n + 1.0) - 1.0) / (M + 1.0));
            }
        }
    }
}

TEST(Coverage, SpecExamples)
{
    Subsequence all(SequenceSpec::affine(1, 0), 0);
    const CoverageResult a = coverage_N0(all, 1.0, 2.0, 100);
    ASSERT_TRUE(a.reached);
    EXPECT_EQ(a.N0, 2U);

    Subsequence sq(SequenceSpec::power(2), 0);
    const CoverageResult b = coverage_N0(sq, 0.01, 2.0, 100000);
    EXPECT_FALSE(b.reached);
    EXPECT_EQ(b.extrapolation, CoverageResult::Extrapolation::BoundedAbove);
    ASSERT_TRUE(b.supremum.has_value());
    EXPECT_LT(*b.supremum, 1.5);
    EXPECT_GE(*b.supremum, 0.01 * std::numbers::pi * std::numbers::pi / 6 - 1e-12);

    Subsequence one(SequenceSpec::affine(1, 0), 0);
    const CoverageResult c = coverage_N0(one, 2.0, 2.0, 10);
    ASSERT_TRUE(c.reached);
    EXPECT_EQ(c.N0, 0U);
}

TEST(Coverage, MinimalityProperty)
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> d(0.1, 0.5);
    std::uniform_real_distribution<double> r(1.01, 1.1);
    for (int k = 0; k < 100; ++k) {
        Subsequence s = extract_subsequence(SequenceSpec::affine(1 + k % 3, 0), 1 + k % 5);
        const double delta0 = d(rng);
        const double rho0 = r(rng);
        const CoverageResult c = coverage_N0(s, delta0, rho0, 10000000);
        ASSERT_TRUE(c.reached);
        const double need = rho0 - 1.0 / rho0;
        EXPECT_LE(delta0 * s.prefix(c.N0), need);
        EXPECT_GT(delta0 * s.prefix(c.N0 + 1), need);
    }
}

TEST(Coverage, AffineExtrapolationTracksTruth)
{
    // unreachable under the cap, but the estimate should be near the true count
    Subsequence s = extract_subsequence(SequenceSpec::affine(1, 0), 4);
    const CoverageResult small = coverage_N0(s, 0.2, 1.2, 100);
    ASSERT_FALSE(small.reached);
    EXPECT_EQ(small.extrapolation, CoverageResult::Extrapolation::DivergesEventually);
    ASSERT_TRUE(small.log10_N0_estimate.has_value());
    Subsequence t = extract_subsequence(SequenceSpec::affine(1, 0), 4);
    const CoverageResult full = coverage_N0(t, 0.2, 1.2, 10000000);
    ASSERT_TRUE(full.reached);
    EXPECT_NEAR(*small.log10_N0_estimate, std::log10(static_cast<double>(full.N0)), 0.05);
}

TEST(Partition, SpecExamples)
{
    Subsequence all(SequenceSpec::affine(1, 0), 0);
    const Partition p = partition_points(all, 1.0, 2.0, 2);
    EXPECT_EQ(p.points, (std::vector<double>{0.5, 1.5, 2.0}));
    EXPECT_EQ(p.flag, EndpointFlag::Exact);
    EXPECT_EQ(locate_cell(p, 1.7), 2U);
    EXPECT_EQ(locate_cell(p, 0.5), 1U);
    EXPECT_EQ(locate_cell(p, 2.0), 3U);
    EXPECT_THROW(locate_cell(p, 2.5), PreconditionError);
    EXPECT_THROW(locate_cell(p, 0.4), PreconditionError);
    EXPECT_THROW(partition_points(all, 1.0, 2.0, 1), PreconditionError);
}

TEST(Partition, TelescopingAndLocate)
{
    std::mt19937_64 rng(32);
    Subsequence s = extract_subsequence(SequenceSpec::affine(1, 0), 3);
    const double delta0 = 0.37;
    const double rho0 = 1.3;
    const CoverageResult c = coverage_N0(s, delta0, rho0, 1000000);
    ASSERT_TRUE(c.reached);
    const Partition p = partition_points(s, delta0, rho0, c.N0);
    EXPECT_DOUBLE_EQ(p.left(), 1.0 / rho0);
    EXPECT_DOUBLE_EQ(p.right(), rho0);
    for (std::size_t i = 1; i < p.points.size(); ++i) EXPECT_LT(p.points[i - 1], p.points[i]);
    for (std::uint64_t i = 1; i < c.N0; ++i) {
        EXPECT_NEAR(p.points[i] - p.points[i - 1], delta0 / static_cast<double>(s.mu(i)), 1e-15);
    }
    if (p.flag == EndpointFlag::Appended) {
        EXPECT_NEAR(p.points[c.N0] - p.points[0], delta0 * s.prefix(c.N0), 1e-12);
    }
    std::uniform_real_distribution<double> u(1.0 / rho0, rho0);
    for (int k = 0; k < 10000; ++k) {
        const double l = u(rng);
        std::uint64_t scan = 0;
        for (std::size_t i = 0; i < p.points.size(); ++i) {
            if (p.points[i] <= l) scan = i + 1;
        }
        scan = std::min<std::uint64_t>(scan, p.N0 + 1);
        EXPECT_EQ(locate_cell(p, l), scan);
    }
}

TEST(Targets, FirstTermsAndPositions)
{
    std::set<std::string> seen;
    std::uint64_t pos_one = 0, pos_z = 0, pos_1z = 0;
    for (std::uint64_t j = 1; j <= 2000; ++j) {
        const ExactPolynomial p = enumerate_targets(j);
        ASSERT_FALSE(p.is_zero());
        const std::string s = to_string(p);
        EXPECT_TRUE(seen.insert(s).second) << "duplicate " << s << " at " << j;
        EXPECT_EQ(target_rank(p), j);
        if (p == parse_exact_polynomial("1")) pos_one = j;
        if (p == parse_exact_polynomial("z")) pos_z = j;
        if (p == parse_exact_polynomial("1+z")) pos_1z = j;
    }
    EXPECT_GT(pos_one, 0U);
    EXPECT_GT(pos_z, 0U);
    EXPECT_GT(pos_1z, 0U);
    // level 1 is the 8 nonzero Gaussian integers of height 1, ordered by (re, im)
    EXPECT_EQ(pos_one, 7U);
    EXPECT_LT(pos_z, pos_1z);
}

TEST(Targets, RankIsInverse)
{
    for (const char* s : {"1", "z", "1+z", "-i", "(1/2+i)z^2 - 3", "2z^4", "z^3/4+z"}) {
        const ExactPolynomial p = parse_exact_polynomial(s);
        EXPECT_EQ(enumerate_targets(target_rank(p)), p) << s;
    }
    // level 48 lies far beyond 64-bit positions
    EXPECT_THROW(target_rank(parse_exact_polynomial("z^3/48")), BudgetExceeded);
    EXPECT_THROW(target_rank(ExactPolynomial()), PreconditionError);
    EXPECT_THROW(enumerate_targets(0), PreconditionError);
}

TEST(Divergence, Classification)
{
    const DivergenceReport a = divergence_report(SequenceSpec::affine(1, 0), 1000);
    EXPECT_EQ(a.verdict, DivergenceReport::Verdict::Divergent);
    EXPECT_NEAR(a.partial_sum, 7.485470860550345, 1e-12);
    const DivergenceReport b = divergence_report(SequenceSpec::power(2), 1000);
    EXPECT_EQ(b.verdict, DivergenceReport::Verdict::Convergent);
    ASSERT_TRUE(b.limit_bound.has_value());
    EXPECT_NEAR(*b.limit_bound, std::numbers::pi * std::numbers::pi / 6, 1e-12);
    EXPECT_LT(b.partial_sum, *b.limit_bound);
    const DivergenceReport c = divergence_report(SequenceSpec::explicit_list({2, 3, 5}), 1000);
    EXPECT_EQ(c.verdict, DivergenceReport::Verdict::Unknown);
    EXPECT_EQ(c.terms, 3U);
}
