#pragma once

#include <stdexcept>
#include <string>

namespace fieldcal {

// Input outside an operation's declared domain (bad parameter, bad index,
// oversubscribed sensor counts, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input files.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Base for everything that goes wrong inside a solve.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SizeCapExceeded : public SolverError {
public:
    using SolverError::SolverError;
};

class AssemblyError : public SolverError {
public:
    using SolverError::SolverError;
};

// Cholesky of the dense system failed; H is PD by construction, so this
// means the inputs were corrupted upstream.
class FactorizationError : public SolverError {
public:
    using SolverError::SolverError;
};

class RankDeficiencyError : public SolverError {
public:
    using SolverError::SolverError;
};

class InvariantViolation : public SolverError {
public:
    using SolverError::SolverError;
};

} // namespace fieldcal
