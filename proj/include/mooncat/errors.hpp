#pragma once

#include <atomic>
#include <iostream>
#include <stdexcept>
#include <string>

namespace mooncat {

// Precondition violations (bad dimensions, invalid model parameters, ...).
struct invalid_argument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A requested Fock truncation cannot represent the state/operator.
struct truncation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Nonlinear fit did not converge within the iteration budget.
struct fit_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Time integration collapsed its step size (stiff rate hierarchy).
struct stiffness_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Monte Carlo / sweep configuration out of the supported range.
struct model_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Posterior mass underflowed to zero during a Bayesian update.
struct underflow_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {
inline std::atomic<bool>& warnings_flag() {
    static std::atomic<bool> enabled{true};
    return enabled;
}
}  // namespace detail

inline void set_warnings_enabled(bool on) { detail::warnings_flag() = on; }

// Advisory diagnostics (truncation margins, under-resolved grids).
// Never fatal; silenced in bulk sweeps via set_warnings_enabled(false).
inline void warn(const std::string& message) {
    if (detail::warnings_flag()) std::cerr << "[mooncat] warning: " << message << "\n";
}

}  // namespace mooncat
