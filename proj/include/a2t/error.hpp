#ifndef A2T_ERROR_HPP
#define A2T_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace a2t {

// Error categories double as CLI exit codes.
enum class ErrorKind : int {
    Usage = 1,
    Data = 2,
    Infeasible = 3,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string reason, const std::string& message)
        : std::runtime_error(message), kind_(kind), reason_(std::move(reason)) {}

    ErrorKind kind() const noexcept { return kind_; }

    // Stable machine-readable tag, e.g. "best_worst_overlap".
    const std::string& reason() const noexcept { return reason_; }

    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
    std::string reason_;
};

[[noreturn]] inline void fail_data(std::string reason, const std::string& message) {
    throw Error(ErrorKind::Data, std::move(reason), message);
}

[[noreturn]] inline void fail_infeasible(std::string reason, const std::string& message) {
    throw Error(ErrorKind::Infeasible, std::move(reason), message);
}

[[noreturn]] inline void fail_usage(std::string reason, const std::string& message) {
    throw Error(ErrorKind::Usage, std::move(reason), message);
}

} // namespace a2t

#endif // A2T_ERROR_HPP
