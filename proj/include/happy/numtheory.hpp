#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "happy/params.hpp"

namespace happy::nt {

struct FactoredModulus {
    u64 n = 1;
    std::vector<std::pair<u64, std::uint32_t>> factors;  // (prime, multiplicity)
};

// Complete prime factorization by trial division.
FactoredModulus factorize(u64 n);

u64 euler_phi(u64 n);

// base^exp mod m by square-and-multiply. m >= 1.
u64 mod_pow(u64 base, u64 exp, u64 m);

// Inverse of a mod m; requires gcd(a, m) = 1.
u64 mod_inverse(u64 a, u64 m);

// Least primitive root of p^k for an odd prime p.
u64 primitive_root(u64 p, std::uint32_t k);

// Least t >= 0 with g^t == a (mod pk), by baby-step giant-step.
// Requires gcd(a, pk) = 1 and g a generator of the units mod pk.
u64 discrete_log(u64 g, u64 a, u64 pk);

// Least non-negative x with x == r_i (mod m_i) for all i.
// Moduli must be pairwise coprime.
u64 crt_solve(std::span<const std::pair<u64, u64>> congruences);

// For odd n >= 3 and a == 1 (mod n) with gcd(a, n) = 1, finds r >= 1
// with (n+1)^r == a (mod n^k). Works per prime power of n: discrete
// logs of n+1 and a to a primitive root of p^(alpha*k), both divisible
// by phi(p^alpha); the quotient congruence is solved mod p^(alpha(k-1))
// and the solutions are combined by CRT.
u64 power_congruence_solve(u64 n, u64 a, std::uint32_t k);

}  // namespace happy::nt
