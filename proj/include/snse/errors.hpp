#pragma once

#include <stdexcept>
#include <string>

namespace snse {

// Bad or inconsistent configuration / input files. CLI maps this to exit 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A requested construction cannot be realized at the given resolution
// (e.g. the small-data tail target is unreachable within the dealias band).
// CLI maps this to exit 2.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, double best_achievable, int suggested_n_per_axis)
        : std::runtime_error(what),
          best_achievable(best_achievable),
          suggested_n_per_axis(suggested_n_per_axis) {}

    double best_achievable = 0.0;
    int suggested_n_per_axis = 0;
};

// Numerical failure at runtime: blow-up threshold exceeded, non-finite values,
// or an invariant that the scheme is supposed to enforce was observed broken.
// CLI maps this to exit 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, double t = -1.0)
        : std::runtime_error(what), t(t) {}

    double t;  // simulation time of the failure, -1 if not applicable
};

}  // namespace snse
