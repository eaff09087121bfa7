#pragma once

#include <stdexcept>
#include <string>

namespace wgmconv {

// Base class for all toolkit errors so callers can catch one type at the
// CLI boundary and still get specific types in tests.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class UnknownMaterial : public Error {
public:
    explicit UnknownMaterial(const std::string& name)
        : Error("unknown material: '" + name + "'") {}
};

class CouplingImpossible : public Error {
public:
    explicit CouplingImpossible(const std::string& msg) : Error(msg) {}
};

class InvalidGeometry : public Error {
public:
    explicit InvalidGeometry(const std::string& msg) : Error(msg) {}
};

class MeshFailure : public Error {
public:
    explicit MeshFailure(const std::string& msg) : Error(msg) {}
};

class AssemblyFailure : public Error {
public:
    explicit AssemblyFailure(const std::string& msg) : Error(msg) {}
};

class ConvergenceFailure : public Error {
public:
    ConvergenceFailure(const std::string& msg, double residual)
        : Error(msg + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

class OutOfWindow : public Error {
public:
    OutOfWindow(double r, double z)
        : Error("probe point (" + std::to_string(r) + ", " + std::to_string(z) +
                ") m lies outside the computation window") {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& file, int line, const std::string& msg)
        : Error(file + ":" + std::to_string(line) + ": " + msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class MonotonicityError : public Error {
public:
    explicit MonotonicityError(const std::string& msg) : Error(msg) {}
};

class FitDiverged : public Error {
public:
    explicit FitDiverged(const std::string& msg) : Error(msg) {}
};

class AmbiguousLabel : public Error {
public:
    explicit AmbiguousLabel(const std::string& msg) : Error(msg) {}
};

class SearchFailure : public Error {
public:
    explicit SearchFailure(const std::string& msg) : Error(msg) {}
};

class StepFailure : public Error {
public:
    explicit StepFailure(const std::string& msg) : Error(msg) {}
};

class DegenerateTuning : public Error {
public:
    explicit DegenerateTuning(const std::string& msg) : Error(msg) {}
};

class DegenerateCoupling : public Error {
public:
    explicit DegenerateCoupling(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace wgmconv
