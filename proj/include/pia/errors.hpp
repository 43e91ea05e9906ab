#pragma once

#include <stdexcept>
#include <string>

namespace pia {

class Error : public std::runtime_error {
public:
    Error(std::string stage, const std::string& what)
        : std::runtime_error(what), stage_(std::move(stage)) {}
    [[nodiscard]] const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

class ParseError : public Error {
public:
    ParseError(int line, int column, const std::string& msg)
        : Error("parse", std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          line_(line), column_(column) {}
    [[nodiscard]] int line() const { return line_; }
    [[nodiscard]] int column() const { return column_; }

private:
    int line_;
    int column_;
};

struct CapExceeded : Error {
    explicit CapExceeded(const std::string& m) : Error("concrete", m) {}
};

struct TooLarge : Error {
    explicit TooLarge(const std::string& m) : Error("explore", m) {}
};

struct SolverError : Error {
    explicit SolverError(const std::string& m) : Error("smt", m) {}
};

}  // namespace pia
