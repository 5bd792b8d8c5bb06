#pragma once

#include <stdexcept>
#include <string>

namespace pomdpnac {

/// Every failure the toolkit can raise, grouped by how the CLI should exit:
/// input/validation problems exit with code 2, numerical/runtime failures
/// with code 3.
enum class ErrorKind {
    validation,  // bad inputs, bad files, bad configs
    numerical,   // solver / sampling / model-consistency failures at runtime
};

/// Common base so call sites can catch one type and map it to an exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return kind_ == ErrorKind::validation ? 2 : 3; }

private:
    ErrorKind kind_;
};

/// Inputs with incompatible shapes (vector lengths, matrix dims, index sets).
struct DimensionMismatch final : Error {
    explicit DimensionMismatch(const std::string& what) : Error(ErrorKind::validation, "DimensionMismatch: " + what) {}
};

/// Model/policy/config content violates a documented invariant.
struct ValidationError final : Error {
    explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, "ValidationError: " + what) {}
};

/// A structured-text file failed to parse against the strict schema.
struct ParseError final : Error {
    explicit ParseError(const std::string& what) : Error(ErrorKind::validation, "ParseError: " + what) {}
};

/// A requested tabular feature map would exceed the configured dimension cap.
struct SizeOverflow final : Error {
    explicit SizeOverflow(const std::string& what) : Error(ErrorKind::validation, "SizeOverflow: " + what) {}
};

/// Brute-force search space larger than the enumerable cap.
struct SearchSpaceTooLarge final : Error {
    explicit SearchSpaceTooLarge(const std::string& what) : Error(ErrorKind::validation, "SearchSpaceTooLarge: " + what) {}
};

/// An observation with zero probability under the predicted belief: the model
/// and the observation stream disagree. Raised instead of silently resetting.
struct DegenerateObservation final : Error {
    explicit DegenerateObservation(const std::string& what) : Error(ErrorKind::numerical, "DegenerateObservation: " + what) {}
};

/// A realized history has zero probability from some hidden state where a
/// conditional kernel row was requested.
struct DegenerateHistory final : Error {
    explicit DegenerateHistory(const std::string& what) : Error(ErrorKind::numerical, "DegenerateHistory: " + what) {}
};

/// A dense linear solve hit an ill-conditioned system (cond > 1e12).
struct SolveFailure final : Error {
    explicit SolveFailure(const std::string& what) : Error(ErrorKind::numerical, "SolveFailure: " + what) {}
};

/// Action supports differ across (y,z), so no persistence-of-excitation
/// reference measure exists.
struct SupportMismatch final : Error {
    explicit SupportMismatch(const std::string& what) : Error(ErrorKind::numerical, "SupportMismatch: " + what) {}
};

/// A block transition table has an entry reachable from one source state but
/// not another, so no minorization-majorization constant exists.
struct NotErgodic final : Error {
    explicit NotErgodic(const std::string& what) : Error(ErrorKind::numerical, "NotErgodic: " + what) {}
};

/// A likelihood-ratio expectation with zero-mass denominator under positive
/// numerator mass.
struct UnboundedRatio final : Error {
    explicit UnboundedRatio(const std::string& what) : Error(ErrorKind::numerical, "UnboundedRatio: " + what) {}
};

}  // namespace pomdpnac
