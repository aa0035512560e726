#pragma once

// Tiny arithmetic expression evaluator over `wide`, used for CLI inputs
// such as "sqrt(5)-2", "(sqrt(5)-1)/2" or plain decimals.
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ('+'|'-') factor | number | 'sqrt' '(' expr ')' | '(' expr ')'

#include "hcv/core/wide.hpp"

#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hcv {

namespace detail {

class WideExprParser {
public:
    explicit WideExprParser(std::string_view src) : src_(src) {}

    wide parse()
    {
        const wide v = expr();
        skip_ws();
        if (pos_ != src_.size()) fail("trailing characters");
        return v;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const
    {
        throw std::invalid_argument("cannot parse '" + std::string(src_) + "': " + what);
    }

    void skip_ws()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    wide expr()
    {
        wide v = term();
        for (;;) {
            if (accept('+')) v += term();
            else if (accept('-')) v -= term();
            else return v;
        }
    }

    wide term()
    {
        wide v = factor();
        for (;;) {
            if (accept('*')) {
                v *= factor();
            } else if (accept('/')) {
                const wide d = factor();
                if (d == 0) fail("division by zero");
                v /= d;
            } else {
                return v;
            }
        }
    }

    wide factor()
    {
        if (accept('+')) return factor();
        if (accept('-')) return -factor();
        if (accept('(')) {
            const wide v = expr();
            if (!accept(')')) fail("expected ')'");
            return v;
        }
        skip_ws();
        if (src_.substr(pos_, 4) == "sqrt") {
            pos_ += 4;
            if (!accept('(')) fail("expected '(' after sqrt");
            const wide v = expr();
            if (!accept(')')) fail("expected ')'");
            if (v < 0) fail("sqrt of negative value");
            return wide_sqrt(v);
        }
        return number();
    }

    wide number()
    {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
            ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
            if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
                pos_ = p;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            }
        }
        if (start == pos_) fail("expected a number");
        return parse_wide_decimal(src_.substr(start, pos_ - start));
    }
};

} // namespace detail

inline wide parse_wide_expr(std::string_view text)
{
    return detail::WideExprParser(text).parse();
}

} // namespace hcv
