#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include "errors.hpp"

namespace incidence {

// Canonical residue in [0, q).
using Fe = std::uint32_t;

enum class FieldOp { add, sub, mul, div };

/// Arithmetic in the prime field F_q, q an odd prime below 2^16.
///
/// With q < 2^16 every product of two residues fits in 32 bits, so no
/// widening is needed anywhere.
class PrimeField {
public:
    static constexpr std::uint32_t max_modulus = 1u << 16;

    explicit PrimeField(std::uint32_t q) : q_(q)
    {
        if (q < 3 || q >= max_modulus)
            throw invalid_modulus("q must satisfy 3 <= q < 65536, got " + std::to_string(q));
        if (q % 2 == 0)
            throw invalid_modulus("q must be odd, got " + std::to_string(q));
        for (std::uint32_t p = 3; p * p <= q; p += 2)
            if (q % p == 0)
                throw invalid_modulus("q must be prime, got " + std::to_string(q));
    }

    std::uint32_t modulus() const noexcept { return q_; }

    Fe reduce(std::int64_t v) const noexcept
    {
        auto r = v % static_cast<std::int64_t>(q_);
        return static_cast<Fe>(r < 0 ? r + q_ : r);
    }

    Fe add(Fe a, Fe b) const noexcept
    {
        Fe s = a + b;
        return s >= q_ ? s - q_ : s;
    }
    Fe sub(Fe a, Fe b) const noexcept { return a >= b ? a - b : a + q_ - b; }
    Fe neg(Fe a) const noexcept { return a == 0 ? 0 : q_ - a; }
    Fe mul(Fe a, Fe b) const noexcept { return (a * b) % q_; }

    Fe pow(Fe base, std::uint64_t e) const noexcept
    {
        Fe result = 1 % q_;
        while (e) {
            if (e & 1) result = mul(result, base);
            base = mul(base, base);
            e >>= 1;
        }
        return result;
    }

    // Fermat: b^(q-2).
    Fe inv(Fe b) const
    {
        if (b == 0) throw division_by_zero();
        return pow(b, q_ - 2);
    }

    Fe div(Fe a, Fe b) const { return mul(a, inv(b)); }

    Fe apply(FieldOp op, Fe a, Fe b) const
    {
        switch (op) {
        case FieldOp::add: return add(a, b);
        case FieldOp::sub: return sub(a, b);
        case FieldOp::mul: return mul(a, b);
        case FieldOp::div: return div(a, b);
        }
        return 0;
    }

    // Legendre symbol: 1 for nonzero squares, q-1 for non-squares, 0 for 0.
    Fe legendre(Fe a) const noexcept { return pow(a, (q_ - 1) / 2); }

    bool operator==(const PrimeField&) const = default;

private:
    std::uint32_t q_;
};

} // namespace incidence
