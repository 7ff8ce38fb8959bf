#ifndef PCGP_ERRORS_HPP
#define PCGP_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcgp {

/// Caller handed us inconsistent or invalid arguments (shape mismatch,
/// non-finite values, out-of-range sizes).
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// A numerical procedure failed (factorization breakdown after jitter
/// escalation, non-finite intermediate, singular system).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A serialized file is malformed. Carries the byte offset where parsing
/// gave up.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& msg, std::size_t byte_offset)
        : std::runtime_error(msg + " (byte offset " + std::to_string(byte_offset) + ")"),
          offset(byte_offset) {}
    std::size_t offset;
};

} // namespace pcgp

#endif
