#pragma once

#include <stdexcept>
#include <string>

namespace hcv {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PreconditionError : Error {
    using Error::Error;
};

/// A finite search (coverage sum, witness scan, degree) ran past its cap.
struct BudgetExceeded : Error {
    using Error::Error;
};

struct GapViolation : Error {
    using Error::Error;
};

struct DegreeViolation : Error {
    using Error::Error;
};

struct CertificationFailure : Error {
    using Error::Error;
};

struct MarginExhausted : Error {
    using Error::Error;
};

struct InvalidEps : Error {
    using Error::Error;
};

struct NotFound : Error {
    using Error::Error;
};

inline void require(bool cond, const std::string& what)
{
    if (!cond) throw PreconditionError(what);
}

} // namespace hcv
