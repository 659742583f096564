#pragma once

#include <stdexcept>
#include <string>

namespace isospec {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Geometry that violates the PlanarDomain invariants.
class InvalidDomain : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

// A configured size cap (node count, lattice enumeration bound, ...) was hit.
class ResourceError : public Error {
public:
    using Error::Error;
};

class GenerationFailure : public Error {
public:
    using Error::Error;
};

class MeshError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

// The shift passed to an inertia count sits on (or numerically at) an eigenvalue.
class ShiftOnEigenvalue : public SolverError {
public:
    ShiftOnEigenvalue(const std::string& what, double shift)
        : SolverError(what), shift_(shift) {}
    double shift() const noexcept { return shift_; }

private:
    double shift_;
};

// Argument outside the domain of a special function.
class DomainError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

// Root bracketing failed; carries the interval that was tried.
class SearchError : public Error {
public:
    SearchError(const std::string& what, double lo, double hi)
        : Error(what), lo_(lo), hi_(hi) {}
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }

private:
    double lo_;
    double hi_;
};

}  // namespace isospec
