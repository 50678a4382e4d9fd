#ifndef CBD_ERRORS_HPP
#define CBD_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include <gmpxx.h>

namespace cbd {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownVariableError : public Error {
public:
    using Error::Error;
};

/// Raised when an LP or enumeration would exceed the configured cap.
/// The offending count is kept exact; it can exceed 64 bits.
class SizeGuardError : public Error {
public:
    SizeGuardError(const std::string& what_for, mpz_class count, mpz_class cap)
        : Error(what_for + ": " + count.get_str() + " exceeds the cap of " + cap.get_str()),
          count_(std::move(count)), cap_(std::move(cap)) {}

    const mpz_class& count() const { return count_; }
    const mpz_class& cap() const { return cap_; }

private:
    mpz_class count_;
    mpz_class cap_;
};

/// Connection-probability queries are defined for pairwise connections only.
class ArityError : public Error {
public:
    using Error::Error;
};

/// The system does not have the shape an operation needs (e.g. not 2x2 binary).
class ShapeError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

}  // namespace cbd

#endif
