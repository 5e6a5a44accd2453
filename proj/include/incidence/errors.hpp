#pragma once

#include <stdexcept>
#include <string>

namespace incidence {

// Base of every error raised by the library. Each named failure mode gets
// its own type so callers (and the CLI) can map them to exit codes.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class invalid_modulus : public error {
public:
    using error::error;
};

class division_by_zero : public error {
public:
    division_by_zero() : error("division by zero in F_q") {}
};

class invalid_dimension : public error {
public:
    using error::error;
};

class space_too_large : public error {
public:
    using error::error;
};

class empty_config : public error {
public:
    empty_config() : error("configuration needs at least one point and one sphere") {}
};

class empty_input : public error {
public:
    using error::error;
};

class basis_too_large : public error {
public:
    using error::error;
};

class degenerate_refinement : public error {
public:
    using error::error;
};

class invalid_spec : public error {
public:
    using error::error;
};

class sizes_exceed_space : public invalid_spec {
public:
    using invalid_spec::invalid_spec;
};

class zero_pin : public error {
public:
    zero_pin() : error("pin must be a nonzero vector") {}
};

// Malformed JSON document or a field of the wrong shape.
class parse_error : public error {
public:
    using error::error;
};

// A checked postcondition did not hold. Never expected on valid inputs.
class invariant_violation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline void require(bool ok, const std::string& what)
{
    if (!ok) throw invariant_violation(what);
}

} // namespace incidence
