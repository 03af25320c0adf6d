#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cohomfield {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Expression language -------------------------------------------------------

struct SyntaxError : Error {
    SyntaxError(const std::string& msg, std::size_t offset, std::string expected)
        : Error(msg + " at offset " + std::to_string(offset) + " (expected " + expected + ")"),
          offset(offset),
          expected(std::move(expected)) {}
    std::size_t offset;
    std::string expected;
};

// Evaluation left the natural domain (ln/sqrt of a negative, division by zero).
struct DomainFault : Error {
    DomainFault(const std::string& msg, std::string subtree)
        : Error(msg + " in `" + subtree + "`"), subtree(std::move(subtree)) {}
    std::string subtree;
};

struct NonDifferentiable : DomainFault {
    NonDifferentiable(const std::string& msg, std::string subtree)
        : DomainFault(msg, std::move(subtree)) {}
};

// Scenario / config files ----------------------------------------------------

struct ParseError : Error {
    ParseError(const std::string& msg, int line)
        : Error("line " + std::to_string(line) + ": " + msg), line(line) {}
    int line;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

struct UnknownScenario : Error {
    explicit UnknownScenario(const std::string& name) : Error("unknown scenario: " + name) {}
};

// Geometry / numerics --------------------------------------------------------

struct DegenerateTransversal : Error {
    explicit DegenerateTransversal(const std::string& msg) : Error(msg) {}
};

struct OutsideImage : Error {
    explicit OutsideImage(const std::string& msg) : Error(msg) {}
};

struct NoConvergence : Error {
    NoConvergence(const std::string& msg, double best_residual)
        : Error(msg + " (best residual " + std::to_string(best_residual) + ")"),
          best_residual(best_residual) {}
    double best_residual;
};

struct NoCrossing : Error {
    explicit NoCrossing(const std::string& msg) : Error(msg) {}
};

struct OnSeparatrix : Error {
    explicit OnSeparatrix(const std::string& msg) : Error(msg) {}
};

struct QuadratureFailure : Error {
    explicit QuadratureFailure(const std::string& msg) : Error(msg) {}
};

struct TooFewSamples : Error {
    explicit TooFewSamples(const std::string& msg) : Error(msg) {}
};

struct ParameterOutOfRange : Error {
    explicit ParameterOutOfRange(const std::string& msg) : Error(msg) {}
};

} // namespace cohomfield
