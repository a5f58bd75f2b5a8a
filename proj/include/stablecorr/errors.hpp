#pragma once

#include <stdexcept>
#include <string>

namespace stablecorr {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Violated precondition or malformed configuration.
class InvalidArgument : public Error
{
public:
    using Error::Error;
};

class DimensionMismatch : public InvalidArgument
{
public:
    using InvalidArgument::InvalidArgument;
};

// The requested moment or expectation is infinite or undefined.
class NonexistentExpectation : public InvalidArgument
{
public:
    using InvalidArgument::InvalidArgument;
};

// Quadrature nonconvergence, inversion failure and similar.
class NumericalFailure : public Error
{
public:
    using Error::Error;
};

class ResourceError : public Error
{
public:
    using Error::Error;
};

}  // namespace stablecorr
