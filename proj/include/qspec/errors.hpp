#ifndef QSPEC_ERRORS_HPP
#define QSPEC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qspec {

/// Argument violates a documented precondition (size, range, finiteness).
struct invalid_input : std::invalid_argument {
    explicit invalid_input(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Lag window is not admissible for the requested estimator.
struct unsupported_kernel : std::invalid_argument {
    explicit unsupported_kernel(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Frequency (or its ordinate window) falls outside the open interval (0, pi).
struct boundary_error : std::invalid_argument {
    explicit boundary_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// A generator could not produce an admissible sample path.
struct simulation_error : std::runtime_error {
    explicit simulation_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed cell or value in an input file; message carries row/column.
struct parse_error : std::runtime_error {
    explicit parse_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Structurally valid file that does not match the expected schema.
struct schema_error : std::runtime_error {
    explicit schema_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace qspec

#endif  // QSPEC_ERRORS_HPP
