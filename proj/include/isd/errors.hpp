#pragma once

#include <stdexcept>
#include <string>

namespace isd {

struct invalid_bandwidth : std::invalid_argument {
    explicit invalid_bandwidth(double h)
        : std::invalid_argument("bandwidth must be positive, got " + std::to_string(h)) {}
};

struct sample_too_small : std::invalid_argument {
    explicit sample_too_small(std::size_t n)
        : std::invalid_argument("need at least 2 observations, got " + std::to_string(n)) {}
};

struct grid_infeasible : std::runtime_error {
    explicit grid_infeasible(const std::string& why)
        : std::runtime_error("grid infeasible: " + why) {}
};

struct malformed_input : std::runtime_error {
    explicit malformed_input(const std::string& why)
        : std::runtime_error("malformed input: " + why) {}
};

struct quadrature_failure : std::runtime_error {
    explicit quadrature_failure(const std::string& why)
        : std::runtime_error("quadrature failed: " + why) {}
};

} // namespace isd
