#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lcks {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- expression DSL ---

struct SyntaxError : Error {
    SyntaxError(std::size_t position, std::string expected)
        : Error("syntax error at position " + std::to_string(position) + ": expected " + expected),
          position(position),
          expected(std::move(expected)) {}
    std::size_t position;
    std::string expected;
};

struct UnknownVariable : Error {
    explicit UnknownVariable(std::string name)
        : Error("unknown variable '" + name + "'"), name(std::move(name)) {}
    std::string name;
};

struct UnknownFunction : Error {
    explicit UnknownFunction(std::string name)
        : Error("unknown function '" + name + "'"), name(std::move(name)) {}
    std::string name;
};

struct DomainError : Error {
    DomainError(std::string function, double argument)
        : Error("domain error in '" + function + "' at argument " + std::to_string(argument)),
          function(std::move(function)),
          argument(argument) {}
    std::string function;
    double argument;
};

// --- chart calculus ---

struct DegreeOverflow : Error {
    explicit DegreeOverflow(int degree)
        : Error("form degree " + std::to_string(degree) + " out of supported range"), degree(degree) {}
    int degree;
};

struct DegreeUnderflow : Error {
    DegreeUnderflow() : Error("interior product of a 0-form") {}
};

struct DimensionMismatch : Error {
    DimensionMismatch(int expected, int got)
        : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " + std::to_string(got)),
          expected(expected),
          got(got) {}
    int expected;
    int got;
};

// --- structures / dynamics ---

struct NotClosed : Error {
    NotClosed(std::vector<double> worst_point, double residual)
        : Error("one-form is not closed: d-residual " + std::to_string(residual)),
          worst_point(std::move(worst_point)),
          residual(residual) {}
    std::vector<double> worst_point;
    double residual;
};

struct Inconsistent : Error {
    explicit Inconsistent(double residual)
        : Error("linear system inconsistent: residual " + std::to_string(residual)), residual(residual) {}
    double residual;
};

struct OutOfRange : Error {
    explicit OutOfRange(double residual)
        : Error("right-hand side not in range of the flat map: residual " + std::to_string(residual)),
          residual(residual) {}
    double residual;
};

struct DomainEscape : Error {
    explicit DomainEscape(std::vector<double> point)
        : Error("point left the chart domain"), point(std::move(point)) {}
    std::vector<double> point;
};

// --- atlas ---

struct EmptyOverlap : Error {
    EmptyOverlap() : Error("no samples found in triple patch overlaps") {}
};

struct NotExactOnPatch : Error {
    explicit NotExactOnPatch(double residual)
        : Error("Lee form is not d(sigma) on this patch: residual " + std::to_string(residual)),
          residual(residual) {}
    double residual;
};

struct PreconditionFailed : Error {
    PreconditionFailed(std::string which, double residual)
        : Error("precondition failed: " + which + " (residual " + std::to_string(residual) + ")"),
          which(std::move(which)),
          residual(residual) {}
    std::string which;
    double residual;
};

}  // namespace lcks
