#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gict {

// Error categories map onto CLI exit codes:
//   Io/Parse/Schema -> 1, Semantic/Constraint -> 2, Resource -> 3.
enum class ErrorKind {
    Io,
    Parse,
    Schema,
    Semantic,
    Constraint,
    Resource,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    int exit_code() const noexcept {
        switch (kind_) {
            case ErrorKind::Io:
            case ErrorKind::Parse:
            case ErrorKind::Schema:
                return 1;
            case ErrorKind::Semantic:
            case ErrorKind::Constraint:
                return 2;
            case ErrorKind::Resource:
                return 3;
        }
        return 1;
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace gict
