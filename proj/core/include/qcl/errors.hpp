#pragma once

#include <stdexcept>
#include <string>

namespace qcl {

// Bad values passed to a library call (out-of-range sizes, non-finite
// inputs, mismatched dimensions).
class invalid_argument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Persisted data that fails validation: malformed CSV/JSON, missing
// fields, inconsistent shapes, non-orthonormal loadings.
class schema_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// API misuse that indicates a caller bug, e.g. stepping an episode
// that already reported done.
class contract_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace qcl
