#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "happy/params.hpp"

namespace happy::core {

// Base-b digits of n, least significant first. n = 0 yields {0}.
std::vector<std::uint32_t> digits_of(u64 n, std::uint32_t b);

// Sum of e-th powers of the base-b digits of n. Rejects n = 0.
u64 power_digit_sum(u64 n, const Params& params);

enum class Terminal { ReachedOne, EnteredCycle };

struct Trajectory {
    u64 start = 0;
    std::vector<u64> steps;  // T(n), T^2(n), ...
    Terminal terminal = Terminal::ReachedOne;
    u64 cycle_entry = 0;  // meaningful when terminal == EnteredCycle
};

Trajectory trajectory(u64 n, const Params& params);

// Least power of b above which the map strictly contracts:
// B = b^k for the least k >= 1 with (b-1)^e * (k+1) < b^k.
// Then T(n) < n for all n >= B and T(n) < B for all n in [1, B).
u64 contraction_bound(const Params& params);

struct CycleSet {
    Params params;
    std::vector<u64> members;  // sorted
    u64 bound = 0;             // contraction bound used to compute it

    bool contains(u64 x) const;
};

// All values lying on cycles of T (including the fixed point 1),
// found by walking the functional graph below the contraction bound.
CycleSet cycle_set(const Params& params);

// Happy/unhappy classification memoized below a cap (default: the
// contraction bound, extended as needed). Build once, then read-only.
class ClassifierCache {
public:
    explicit ClassifierCache(const Params& params, u64 cap = 0);

    // True iff iterating T from n reaches 1. Any n >= 1.
    bool is_happy(u64 n) const;

    u64 cap() const { return cap_; }
    const Params& params() const { return params_; }

private:
    Params params_;
    u64 cap_;
    std::vector<std::uint8_t> table_;  // 1 = happy, indexed by n < cap_
};

struct ConditionResult {
    bool holds = false;
    u64 failing_prime = 0;  // least failing prime when holds == false

    explicit operator bool() const { return holds; }
};

// True iff no prime p dividing b-1 satisfies e == 1 (mod p-1).
// Exactly when this fails, happiness forces n == 1 (mod p) and
// consecutive happy pairs cannot exist.
ConditionResult condition_holds(const Params& params);

// Self-test surface: with p | b-1 and e == 1 (mod p-1), checks
// T(n) == n (mod p) for all n in [1, limit].
bool residue_invariance_witness(const Params& params, u64 p, u64 limit);

}  // namespace happy::core
