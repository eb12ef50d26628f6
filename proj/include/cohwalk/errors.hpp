#pragma once

#include <stdexcept>
#include <string>

namespace cohwalk {

/// Raised when a caller-supplied value violates a precondition
/// (bad angle range, undersized lattice, malformed config section, ...).
class invalid_input : public std::runtime_error {
public:
    explicit invalid_input(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a numerical contract is violated at runtime: a quantity that
/// is exactly equal in theory disagrees beyond tolerance, a state fails its
/// density-matrix invariants, or a renormalization becomes degenerate.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cohwalk
