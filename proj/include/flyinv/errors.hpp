#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace flyinv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Violation {
    std::string field;  // dotted path, e.g. "circuit.source.u_dc"
    std::string rule;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations)
        : Error(format(violations)), violations_(std::move(violations)) {}

    const std::vector<Violation>& violations() const noexcept { return violations_; }

    bool has_field(const std::string& field) const {
        for (const auto& v : violations_)
            if (v.field == field) return true;
        return false;
    }

private:
    static std::string format(const std::vector<Violation>& vs) {
        std::string msg = "invalid configuration:";
        for (const auto& v : vs) msg += "\n  " + v.field + ": " + v.rule;
        return msg;
    }

    std::vector<Violation> violations_;
};

class ConfigParseError : public Error {
public:
    using Error::Error;
};

class NumericalDivergence : public Error {
public:
    NumericalDivergence(double t, const std::string& what)
        : Error("numerical divergence at t=" + std::to_string(t) + " s: " + what), time_(t) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class ResonanceSingularity : public Error {
public:
    using Error::Error;
};

class InfeasibleDesign : public Error {
public:
    using Error::Error;
};

class PlacementError : public Error {
public:
    using Error::Error;
};

class NonIntegerSpan : public Error {
public:
    using Error::Error;
};

class ZeroFundamental : public Error {
public:
    using Error::Error;
};

class ZeroInputPower : public Error {
public:
    using Error::Error;
};

class TargetUnreachable : public Error {
public:
    using Error::Error;
};

class MalformedTable : public Error {
public:
    MalformedTable(std::size_t row, std::size_t column, const std::string& what)
        : Error("malformed table at row " + std::to_string(row) + ", column " +
                std::to_string(column) + ": " + what),
          row_(row), column_(column) {}
    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

}  // namespace flyinv
