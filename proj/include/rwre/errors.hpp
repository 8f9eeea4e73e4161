#pragma once

#include <stdexcept>
#include <string>

namespace rwre {

// Every error carries a short kind tag (stable, machine-readable) and the
// process exit code the CLI maps it to: 2 for configuration/domain errors,
// 3 for schedule-out-of-reach, 1 for internal failures.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg, int exit_code)
        : std::runtime_error(msg), kind_(std::move(kind)), exit_code_(exit_code) {}
    const std::string& kind() const { return kind_; }
    int exit_code() const { return exit_code_; }

private:
    std::string kind_;
    int exit_code_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg, const std::string& kind = "ConfigError")
        : Error(kind, msg, 2) {}
};

struct SupportOutsideUnitInterval : ConfigError {
    explicit SupportOutsideUnitInterval(const std::string& msg)
        : ConfigError(msg, "SupportOutsideUnitInterval") {}
};
struct ProbSumMismatch : ConfigError {
    explicit ProbSumMismatch(const std::string& msg) : ConfigError(msg, "ProbSumMismatch") {}
};
struct EllipticityViolated : ConfigError {
    explicit EllipticityViolated(const std::string& msg) : ConfigError(msg, "EllipticityViolated") {}
};
struct NotTransientRight : ConfigError {
    explicit NotTransientRight(const std::string& msg) : ConfigError(msg, "NotTransientRight") {}
};
struct NoRootBelowCap : ConfigError {
    explicit NoRootBelowCap(const std::string& msg) : ConfigError(msg, "NoRootBelowCap") {}
};
struct DegenerateLaw : ConfigError {
    explicit DegenerateLaw(const std::string& msg) : ConfigError(msg, "DegenerateLaw") {}
};
struct EpsilonOutOfRange : ConfigError {
    explicit EpsilonOutOfRange(const std::string& msg) : ConfigError(msg, "EpsilonOutOfRange") {}
};
struct WindowTooSmall : ConfigError {
    explicit WindowTooSmall(const std::string& msg) : ConfigError(msg, "WindowTooSmall") {}
};
struct DegenerateFit : ConfigError {
    explicit DegenerateFit(const std::string& msg) : ConfigError(msg, "DegenerateFit") {}
};
struct RangeError : ConfigError {
    explicit RangeError(const std::string& msg) : ConfigError(msg, "RangeError") {}
};

struct ScheduleOutOfReach : Error {
    explicit ScheduleOutOfReach(const std::string& msg) : Error("ScheduleOutOfReach", msg, 3) {}
};

struct QuadratureNotConverged : Error {
    explicit QuadratureNotConverged(const std::string& msg)
        : Error("QuadratureNotConverged", msg, 1) {}
};

struct InternalError : Error {
    explicit InternalError(const std::string& msg) : Error("InternalError", msg, 1) {}
};

} // namespace rwre
