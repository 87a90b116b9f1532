#pragma once

#include <stdexcept>
#include <string>

namespace conmap {

/// File/format error carrying the 1-based line where parsing failed (0 if unknown).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& path, int line, const std::string& what)
        : std::runtime_error(path + (line > 0 ? ":" + std::to_string(line) : "") + ": " + what),
          line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

/// Randomized construction exhausted its restart budget.
class GenerationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Iterative solver hit its iteration cap before reaching tolerance.
class ConvergenceError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace conmap
