#pragma once

#include <stdexcept>
#include <string>

namespace spiralforge {

enum class ErrorCode {
    invalid_immersion,
    invalid_variation,
    invalid_invariants,
    degenerate_axis,
    unsupported_parameter,
    invalid_cutoff,
    grid_mismatch,
    graph_too_large,
    no_u0_profile,
    rejected_parameters,
    non_convergence,
    io,
    internal,
};

const char* error_name(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode c, const std::string& what)
        : std::runtime_error(std::string(error_name(c)) + ": " + what), code_(c) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace spiralforge
