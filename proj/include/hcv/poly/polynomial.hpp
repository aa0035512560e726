#pragma once

#include "hcv/core/rational.hpp"
#include "hcv/core/xcomplex.hpp"

#include <cctype>
#include <cstddef>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hcv {

/// Dense polynomial, index = power of z. Trailing zeros are always trimmed,
/// so the zero polynomial is the empty coefficient list (degree -1).
template <class T>
class BasicPolynomial {
public:
    BasicPolynomial() = default;
    explicit BasicPolynomial(std::vector<T> coeffs) : c_(std::move(coeffs)) { trim(); }
    BasicPolynomial(std::initializer_list<T> coeffs) : c_(coeffs) { trim(); }

    static BasicPolynomial monomial(T coeff, std::size_t power)
    {
        std::vector<T> c(power + 1);
        c[power] = std::move(coeff);
        return BasicPolynomial(std::move(c));
    }

    long degree() const { return static_cast<long>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    std::size_t size() const { return c_.size(); }
    const std::vector<T>& coeffs() const { return c_; }

    /// Coefficient of z^k; zero above the degree.
    T operator[](std::size_t k) const { return k < c_.size() ? c_[k] : T{}; }

    /// Index of the lowest nonzero coefficient; -1 for zero.
    long valuation() const
    {
        for (std::size_t k = 0; k < c_.size(); ++k) {
            if (!c_[k].is_zero()) return static_cast<long>(k);
        }
        return -1;
    }

    friend BasicPolynomial operator+(const BasicPolynomial& a, const BasicPolynomial& b)
    {
        std::vector<T> c(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = a[k] + b[k];
        return BasicPolynomial(std::move(c));
    }

    friend BasicPolynomial operator-(const BasicPolynomial& a, const BasicPolynomial& b)
    {
        std::vector<T> c(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = a[k] - b[k];
        return BasicPolynomial(std::move(c));
    }

    BasicPolynomial operator-() const
    {
        std::vector<T> c(c_.size());
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = -c_[k];
        return BasicPolynomial(std::move(c));
    }

    friend BasicPolynomial operator*(const T& s, const BasicPolynomial& a)
    {
        std::vector<T> c(a.c_.size());
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = s * a.c_[k];
        return BasicPolynomial(std::move(c));
    }

    friend BasicPolynomial operator*(const BasicPolynomial& a, const BasicPolynomial& b)
    {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<T> c(a.c_.size() + b.c_.size() - 1);
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            if (a.c_[i].is_zero()) continue;
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        }
        return BasicPolynomial(std::move(c));
    }

    BasicPolynomial& operator+=(const BasicPolynomial& o) { return *this = *this + o; }
    BasicPolynomial& operator-=(const BasicPolynomial& o) { return *this = *this - o; }

    friend bool operator==(const BasicPolynomial& a, const BasicPolynomial& b) { return a.c_ == b.c_; }

    BasicPolynomial derivative() const
    {
        if (c_.size() <= 1) return {};
        std::vector<T> c(c_.size() - 1);
        for (std::size_t k = 1; k < c_.size(); ++k) c[k - 1] = T(static_cast<double>(k)) * c_[k];
        return BasicPolynomial(std::move(c));
    }

private:
    std::vector<T> c_;

    void trim()
    {
        while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
    }
};

using Polynomial = BasicPolynomial<XComplex>;
using ExactPolynomial = BasicPolynomial<GaussianRational>;

template <>
inline ExactPolynomial ExactPolynomial::derivative() const
{
    if (c_.size() <= 1) return {};
    std::vector<GaussianRational> c(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) {
        c[k - 1] = GaussianRational(Rational(static_cast<long long>(k))) * c_[k];
    }
    return ExactPolynomial(std::move(c));
}

inline Polynomial to_float(const ExactPolynomial& p)
{
    std::vector<XComplex> c;
    c.reserve(p.size());
    for (const auto& a : p.coeffs()) c.push_back(a.to_xcomplex());
    return Polynomial(std::move(c));
}

/// Largest coefficient modulus (M0 for a target polynomial).
inline XReal max_coeff_abs(const Polynomial& p)
{
    XReal m;
    for (const auto& a : p.coeffs()) m = max(m, a.abs());
    return m;
}

/// Coefficientwise max relative difference, scaled by the larger coefficient.
inline double max_relative_difference(const Polynomial& a, const Polynomial& b)
{
    double worst = 0.0;
    const std::size_t n = std::max(a.size(), b.size());
    for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, relative_difference(a[k], b[k]));
    return worst;
}

// ---------------------------------------------------------------------------
// Text form.

namespace detail {

class PolyParser {
public:
    explicit PolyParser(std::string_view s) : s_(s) {}

    ExactPolynomial parse()
    {
        ExactPolynomial p = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return p;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& why) const
    {
        throw std::invalid_argument("cannot parse polynomial '" + std::string(s_) + "' at " +
                                    std::to_string(pos_) + ": " + why);
    }
    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    char peek()
    {
        skip();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    ExactPolynomial expr()
    {
        ExactPolynomial acc;
        bool first = true;
        for (;;) {
            const char c = peek();
            int sign = 1;
            if (c == '+' || c == '-') {
                sign = c == '-' ? -1 : 1;
                ++pos_;
            } else if (!first) {
                return acc;
            }
            ExactPolynomial t = term();
            acc = sign > 0 ? acc + t : acc - t;
            first = false;
        }
    }

    static bool starts_factor(char c)
    {
        return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'z' || c == 'i' ||
               c == '(';
    }

    ExactPolynomial term()
    {
        ExactPolynomial acc = power();
        for (;;) {
            const char c = peek();
            if (c == '*') {
                ++pos_;
                acc = acc * power();
            } else if (c == '/') {
                ++pos_;
                const ExactPolynomial d = power();
                if (d.degree() != 0) fail("division by a non-constant");
                const GaussianRational inv = GaussianRational(Rational(1)) / d[0];
                acc = inv * acc;
            } else if (starts_factor(c)) {
                acc = acc * power();
            } else {
                return acc;
            }
        }
    }

    ExactPolynomial power()
    {
        ExactPolynomial base = atom();
        if (peek() == '^') {
            ++pos_;
            skip();
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (start == pos_) fail("expected exponent");
            const unsigned long e = std::stoul(std::string(s_.substr(start, pos_ - start)));
            if (e > 100000) fail("exponent too large");
            ExactPolynomial r{GaussianRational(Rational(1))};
            if (base.degree() == 1 && base[0].is_zero()) {
                return ExactPolynomial::monomial(pow(base[1], static_cast<unsigned>(e)), e);
            }
            for (unsigned long k = 0; k < e; ++k) r = r * base;
            return r;
        }
        return base;
    }

    ExactPolynomial atom()
    {
        const char c = peek();
        if (c == '(') {
            ++pos_;
            ExactPolynomial e = expr();
            if (peek() != ')') fail("expected ')'");
            ++pos_;
            return e;
        }
        if (c == 'z') {
            ++pos_;
            return ExactPolynomial::monomial(GaussianRational(Rational(1)), 1);
        }
        if (c == 'i') {
            ++pos_;
            return ExactPolynomial{GaussianRational(Rational(0), Rational(1))};
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
                ++pos_;
            }
            return ExactPolynomial{GaussianRational(parse_rational(s_.substr(start, pos_ - start)))};
        }
        fail("expected a number, 'z', 'i' or '('");
    }
};

inline std::string format_xreal_coeff(const XComplex& c)
{
    const XReal re = c.real();
    const XReal im = c.imag();
    if (im.is_zero()) return to_decimal(re);
    if (re.is_zero()) return to_decimal(im) + "i";
    std::string s = "(" + to_decimal(re);
    s += im.sign() < 0 ? "-" : "+";
    s += to_decimal(im.abs()) + "i)";
    return s;
}

inline std::string format_exact_coeff(const GaussianRational& c)
{
    if (c.imag() == 0) return to_string(c.real());
    if (c.real() == 0) return to_string(c.imag()) + "i";
    std::string s = "(" + to_string(c.real());
    s += c.imag() < 0 ? "-" : "+";
    s += to_string(c.imag() < 0 ? Rational(-c.imag()) : c.imag()) + "i)";
    return s;
}

template <class T, class F>
std::string format_poly(const BasicPolynomial<T>& p, F&& coeff_str)
{
    if (p.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k].is_zero()) continue;
        if (!first) os << " + ";
        first = false;
        os << coeff_str(p[k]);
        if (k >= 1) os << "*z";
        if (k >= 2) os << "^" << k;
    }
    return os.str();
}

} // namespace detail

/// Parses "z^3/48", "1+z", "(1/2+i)z^2 - 3", decimals allowed.
inline ExactPolynomial parse_exact_polynomial(std::string_view text)
{
    return detail::PolyParser(text).parse();
}

inline Polynomial parse_polynomial(std::string_view text)
{
    return to_float(parse_exact_polynomial(text));
}

inline std::string to_string(const Polynomial& p)
{
    return detail::format_poly(p, detail::format_xreal_coeff);
}

inline std::string to_string(const ExactPolynomial& p)
{
    return detail::format_poly(p, detail::format_exact_coeff);
}

} // namespace hcv
