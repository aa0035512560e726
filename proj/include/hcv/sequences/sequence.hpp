#pragma once

#include "hcv/core/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hcv {

/// Strictly increasing sequence of positive integers k_1 < k_2 < ...
struct SequenceSpec {
    enum class Kind { Affine, Power, Explicit };

    Kind kind = Kind::Affine;
    std::int64_t a = 1; // affine slope
    std::int64_t b = 0; // affine offset
    unsigned c = 1;     // power exponent
    std::vector<std::uint64_t> list;
    std::string text; // original description

    static SequenceSpec affine(std::int64_t a, std::int64_t b)
    {
        require(a >= 1, "affine sequence needs slope >= 1");
        require(a + b >= 1, "affine sequence must start at a positive integer");
        SequenceSpec s;
        s.kind = Kind::Affine;
        s.a = a;
        s.b = b;
        s.text = describe_affine(a, b);
        return s;
    }

    static SequenceSpec power(unsigned c)
    {
        require(c >= 1, "power exponent must be >= 1");
        SequenceSpec s;
        s.kind = Kind::Power;
        s.c = c;
        s.text = c == 1 ? "n" : "n^" + std::to_string(c);
        return s;
    }

    static SequenceSpec explicit_list(std::vector<std::uint64_t> terms, std::string text = "explicit")
    {
        for (std::size_t i = 0; i < terms.size(); ++i) {
            if (terms[i] == 0) throw std::invalid_argument("explicit sequence terms must be positive");
            if (i > 0 && terms[i] <= terms[i - 1]) {
                throw std::invalid_argument("explicit sequence must be strictly increasing");
            }
        }
        SequenceSpec s;
        s.kind = Kind::Explicit;
        s.list = std::move(terms);
        s.text = std::move(text);
        return s;
    }

    bool is_finite() const { return kind == Kind::Explicit; }

    /// Number of terms, or max for infinite sequences.
    std::uint64_t length() const
    {
        return kind == Kind::Explicit ? list.size() : std::numeric_limits<std::uint64_t>::max();
    }

    /// k_n for n >= 1; nullopt past the end of an explicit list or on overflow.
    std::optional<std::uint64_t> term(std::uint64_t n) const
    {
        if (n == 0) throw std::invalid_argument("sequence index starts at 1");
        switch (kind) {
        case Kind::Affine: {
            const long double v = static_cast<long double>(a) * n + b;
            if (v > 9.0e18L) return std::nullopt;
            return static_cast<std::uint64_t>(a * static_cast<std::int64_t>(n) + b);
        }
        case Kind::Power: {
            std::uint64_t v = 1;
            for (unsigned i = 0; i < c; ++i) {
                if (v > std::numeric_limits<std::uint64_t>::max() / n) return std::nullopt;
                v *= n;
            }
            return v;
        }
        case Kind::Explicit:
            if (n > list.size()) return std::nullopt;
            return list[n - 1];
        }
        return std::nullopt;
    }

    /// Smallest n with k_n > x; nullopt if no such term exists.
    std::optional<std::uint64_t> first_index_above(std::uint64_t x) const
    {
        switch (kind) {
        case Kind::Affine: {
            // a n + b > x  <=>  n > (x - b)/a
            const std::int64_t num = static_cast<std::int64_t>(x) - b;
            std::int64_t n = num < 0 ? 1 : num / a + 1;
            return static_cast<std::uint64_t>(std::max<std::int64_t>(n, 1));
        }
        case Kind::Power: {
            auto n = static_cast<std::uint64_t>(std::floor(std::pow(static_cast<long double>(x), 1.0L / c)));
            if (n > 0) --n;
            for (;; ++n) {
                if (n == 0) continue;
                const auto v = term(n);
                if (!v) return std::nullopt;
                if (*v > x) return n;
            }
        }
        case Kind::Explicit: {
            const auto it = std::upper_bound(list.begin(), list.end(), x);
            if (it == list.end()) return std::nullopt;
            return static_cast<std::uint64_t>(it - list.begin()) + 1;
        }
        }
        return std::nullopt;
    }

private:
    static std::string describe_affine(std::int64_t a, std::int64_t b)
    {
        std::string s = a == 1 ? "n" : std::to_string(a) + "n";
        if (b > 0) s += "+" + std::to_string(b);
        if (b < 0) s += std::to_string(b);
        return s;
    }
};

/// Mini-language: "n", "2n+1", "3n-2", "n^2", "@file.txt".
inline SequenceSpec parse_sequence(std::string_view text)
{
    std::string s;
    for (char ch : text) {
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    }
    if (s.empty()) throw std::invalid_argument("empty sequence description");
    if (s[0] == '@') {
        std::ifstream in(s.substr(1));
        if (!in) throw std::invalid_argument("cannot open sequence file " + s.substr(1));
        std::vector<std::uint64_t> terms;
        std::string line;
        while (std::getline(in, line)) {
            const auto b = line.find_first_not_of(" \t\r");
            if (b == std::string::npos) continue;
            std::size_t used = 0;
            const unsigned long long v = std::stoull(line.substr(b), &used);
            terms.push_back(v);
        }
        return SequenceSpec::explicit_list(std::move(terms), std::string(text));
    }
    const auto fail = [&]() -> SequenceSpec {
        throw std::invalid_argument("unrecognized sequence '" + std::string(text) + "'");
    };
    const auto npos = s.find('n');
    if (npos == std::string::npos || s.find('n', npos + 1) != std::string::npos) return fail();
    if (s.size() > npos + 1 && s[npos + 1] == '^') {
        if (npos != 0) return fail();
        const std::string e = s.substr(npos + 2);
        if (e.empty() || !std::all_of(e.begin(), e.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
            return fail();
        }
        return SequenceSpec::power(static_cast<unsigned>(std::stoul(e)));
    }
    std::int64_t a = 1;
    if (npos > 0) {
        std::string coef = s.substr(0, npos);
        if (!coef.empty() && coef.back() == '*') coef.pop_back();
        if (coef.empty() || !std::all_of(coef.begin(), coef.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
            return fail();
        }
        a = std::stoll(coef);
    }
    std::int64_t b = 0;
    const std::string rest = s.substr(npos + 1);
    if (!rest.empty()) {
        if (rest[0] != '+' && rest[0] != '-') return fail();
        const std::string digits = rest.substr(1);
        if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
            return fail();
        }
        b = std::stoll(digits) * (rest[0] == '-' ? -1 : 1);
    }
    SequenceSpec spec = SequenceSpec::affine(a, b);
    spec.text = std::string(text);
    return spec;
}

/// Lazily iterates the terms of a sequence.
class SequenceGenerator {
public:
    explicit SequenceGenerator(SequenceSpec spec) : spec_(std::move(spec)) {}
    std::optional<std::uint64_t> next() { return spec_.term(++n_); }

private:
    SequenceSpec spec_;
    std::uint64_t n_ = 0;
};

inline SequenceGenerator make_sequence(SequenceSpec spec) { return SequenceGenerator(std::move(spec)); }

/// Neumaier compensated accumulator.
class CompensatedSum {
public:
    void add(double x)
    {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// zeta(c) for integer c >= 2, to double precision (partial sum + Euler-Maclaurin tail).
inline double zeta_int(unsigned c)
{
    require(c >= 2, "zeta needs c >= 2");
    CompensatedSum s;
    const int n = 1000;
    for (int k = 1; k < n; ++k) s.add(std::pow(static_cast<double>(k), -static_cast<double>(c)));
    const double N = n;
    s.add(std::pow(N, 1.0 - c) / (c - 1.0) + 0.5 * std::pow(N, -static_cast<double>(c)) +
          c / 12.0 * std::pow(N, -static_cast<double>(c) - 1.0));
    return s.value();
}

struct DivergenceReport {
    std::string sequence;
    std::uint64_t terms = 0;
    double partial_sum = 0.0;
    enum class Verdict { Divergent, Convergent, Unknown } verdict = Verdict::Unknown;
    std::optional<double> limit_bound; // upper bound on the full series when convergent
    std::vector<std::pair<std::uint64_t, double>> checkpoints;
};

inline const char* to_string(DivergenceReport::Verdict v)
{
    switch (v) {
    case DivergenceReport::Verdict::Divergent: return "divergent";
    case DivergenceReport::Verdict::Convergent: return "convergent";
    case DivergenceReport::Verdict::Unknown: return "unknown";
    }
    return "unknown";
}

inline DivergenceReport divergence_report(const SequenceSpec& base, std::uint64_t cap)
{
    require(cap >= 1, "cap must be >= 1");
    DivergenceReport r;
    r.sequence = base.text;
    CompensatedSum s;
    std::uint64_t next_cp = 10;
    for (std::uint64_t n = 1; n <= cap; ++n) {
        const auto t = base.term(n);
        if (!t) break;
        s.add(1.0 / static_cast<double>(*t));
        r.terms = n;
        if (n == next_cp) {
            r.checkpoints.emplace_back(n, s.value());
            next_cp *= 10;
        }
    }
    r.partial_sum = s.value();
    switch (base.kind) {
    case SequenceSpec::Kind::Affine:
        r.verdict = DivergenceReport::Verdict::Divergent;
        break;
    case SequenceSpec::Kind::Power:
        if (base.c <= 1) {
            r.verdict = DivergenceReport::Verdict::Divergent;
        } else {
            r.verdict = DivergenceReport::Verdict::Convergent;
            r.limit_bound = zeta_int(base.c);
        }
        break;
    case SequenceSpec::Kind::Explicit:
        r.verdict = DivergenceReport::Verdict::Unknown;
        break;
    }
    return r;
}

} // namespace hcv
