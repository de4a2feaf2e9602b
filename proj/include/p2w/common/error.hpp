#pragma once

#include <stdexcept>
#include <string>

namespace p2w {

// Exit codes used by the command-line front end.
enum class ExitCode : int { Ok = 0, Usage = 1, Validation = 2, Numerical = 3 };

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

// Tensor or matrix dimensions disagree with what an operation expects.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error(ExitCode::Validation, what) {}
};

// Configuration, file contents or dataset contents are unusable.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ExitCode::Validation, what) {}
};

// A non-finite value appeared during a computation.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ExitCode::Numerical, what) {}
};

} // namespace p2w
