#pragma once

#include <stdexcept>
#include <string>

namespace mamdp {

/// Base class for all solver/model errors raised by this library.
struct MdpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A kernel row does not sum to 1 within tolerance.
struct NonStochasticRow : MdpError {
    int state, action;
    double row_sum;
    NonStochasticRow(int s, int a, double sum)
        : MdpError("kernel row (state=" + std::to_string(s) + ", action=" + std::to_string(a) +
                   ") sums to " + std::to_string(sum) + ", expected 1"),
          state(s), action(a), row_sum(sum) {}
};

struct NegativeProbability : MdpError {
    using MdpError::MdpError;
};

struct NonFiniteReward : MdpError {
    using MdpError::MdpError;
};

/// Iterative solver failed to reach the requested tolerance.
struct NoConvergence : MdpError {
    int max_iter;
    explicit NoConvergence(int iters)
        : MdpError("value iteration did not converge within " + std::to_string(iters) +
                   " iterations"),
          max_iter(iters) {}
};

/// The chain in question has more than one closed recurrent class, so the
/// long-run average (and the stationary distribution) is not unique.
struct NotErgodic : MdpError {
    using MdpError::MdpError;
    NotErgodic() : MdpError("chain is not ergodic (multiple closed recurrent classes)") {}
};

struct SingularSystem : MdpError {
    using MdpError::MdpError;
};

/// Group-inverse construction produced residuals above tolerance.
struct IdentityCheckFailed : MdpError {
    double max_residual;
    explicit IdentityCheckFailed(double r)
        : MdpError("group-inverse identities violated, max residual " + std::to_string(r)),
          max_residual(r) {}
};

struct LengthMismatch : MdpError {
    using MdpError::MdpError;
};

struct NotADistribution : MdpError {
    using MdpError::MdpError;
};

struct NotSquare : MdpError {
    using MdpError::MdpError;
};

struct ComponentOutOfRange : MdpError {
    using MdpError::MdpError;
};

/// Conditioning event has probability zero; the conditional is undefined.
struct ZeroProbabilityConditioning : MdpError {
    using MdpError::MdpError;
};

struct BudgetExceeded : MdpError {
    using MdpError::MdpError;
};

/// Exhaustive policy enumeration would exceed the caller's cap.
struct CapExceeded : MdpError {
    long long count;
    explicit CapExceeded(long long n)
        : MdpError("policy tuple count " + std::to_string(n) + " exceeds cap"), count(n) {}
};

struct AllSampledPoliciesNonErgodic : MdpError {
    AllSampledPoliciesNonErgodic() : MdpError("every sampled policy induced a non-ergodic chain") {}
};

/// Configuration file problem; the message names the offending field.
struct ConfigError : std::runtime_error {
    std::string field;
    ConfigError(std::string field_path, const std::string& what)
        : std::runtime_error(field_path + ": " + what), field(std::move(field_path)) {}
};

}  // namespace mamdp
