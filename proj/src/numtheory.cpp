#include "happy/numtheory.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace happy::nt {

FactoredModulus factorize(u64 n) {
    if (n < 1)
        throw std::invalid_argument("factorize: n must be >= 1");
    FactoredModulus out;
    out.n = n;
    for (u64 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p == 0) {
            std::uint32_t mult = 0;
            while (n % p == 0) {
                n /= p;
                ++mult;
            }
            out.factors.emplace_back(p, mult);
        }
    }
    if (n > 1)
        out.factors.emplace_back(n, 1);
    return out;
}

u64 euler_phi(u64 n) {
    u64 result = n;
    for (const auto& [p, mult] : factorize(n).factors) {
        result -= result / p;
    }
    return result;
}

u64 mod_pow(u64 base, u64 exp, u64 m) {
    if (m == 0)
        throw std::invalid_argument("mod_pow: modulus must be >= 1");
    if (m == 1)
        return 0;
    u64 result = 1;
    base %= m;
    while (exp) {
        if (exp & 1)
            result = static_cast<u64>(static_cast<u128>(result) * base % m);
        base = static_cast<u64>(static_cast<u128>(base) * base % m);
        exp >>= 1;
    }
    return result;
}

u64 mod_inverse(u64 a, u64 m) {
    // extended Euclid on (a mod m, m)
    std::int64_t t = 0, new_t = 1;
    std::int64_t r = static_cast<std::int64_t>(m), new_r = static_cast<std::int64_t>(a % m);
    while (new_r != 0) {
        std::int64_t q = r / new_r;
        t = std::exchange(new_t, t - q * new_t);
        r = std::exchange(new_r, r - q * new_r);
    }
    if (r != 1)
        throw std::invalid_argument("mod_inverse: arguments not coprime");
    if (t < 0)
        t += static_cast<std::int64_t>(m);
    return static_cast<u64>(t);
}

static u64 checked_pow(u64 p, std::uint32_t k) {
    u128 v = 1;
    for (std::uint32_t i = 0; i < k; ++i) {
        v *= p;
        if (v > ~u64{0})
            throw std::overflow_error("prime power exceeds 64 bits");
    }
    return static_cast<u64>(v);
}

u64 primitive_root(u64 p, std::uint32_t k) {
    if (p == 2)
        throw std::invalid_argument("primitive_root: p must be an odd prime");
    if (k < 1)
        throw std::invalid_argument("primitive_root: k must be >= 1");
    const u64 pk = checked_pow(p, k);
    const u64 phi = pk / p * (p - 1);
    const auto phi_factors = factorize(phi).factors;
    for (u64 g = 2; g < pk; ++g) {
        if (g % p == 0)
            continue;
        bool ok = true;
        for (const auto& [q, mult] : phi_factors) {
            if (mod_pow(g, phi / q, pk) == 1) {
                ok = false;
                break;
            }
        }
        if (ok)
            return g;
    }
    throw std::logic_error("primitive_root: no generator found");
}

u64 discrete_log(u64 g, u64 a, u64 pk) {
    a %= pk;
    if (a == 0)
        throw std::invalid_argument("discrete_log: a must be a unit");
    if (a == 1)
        return 0;
    const u64 order_bound = pk;  // order divides phi(pk) < pk
    const u64 step = static_cast<u64>(std::ceil(std::sqrt(static_cast<double>(order_bound)))) + 1;
    std::unordered_map<u64, u64> baby;  // g^j -> least j
    baby.reserve(static_cast<std::size_t>(step));
    u64 cur = 1;
    for (u64 j = 0; j < step; ++j) {
        baby.emplace(cur, j);
        cur = static_cast<u64>(static_cast<u128>(cur) * g % pk);
    }
    // giant steps: a * (g^-step)^i
    const u64 giant = mod_pow(mod_inverse(g, pk), step, pk);
    u64 probe = a;
    for (u64 i = 0; i <= step; ++i) {
        if (auto it = baby.find(probe); it != baby.end())
            return i * step + it->second;
        probe = static_cast<u64>(static_cast<u128>(probe) * giant % pk);
    }
    throw std::invalid_argument("discrete_log: no solution (a not in <g>)");
}

u64 crt_solve(std::span<const std::pair<u64, u64>> congruences) {
    u64 x = 0, m = 1;
    for (const auto& [r, mi] : congruences) {
        if (mi == 0)
            throw std::invalid_argument("crt_solve: modulus must be >= 1");
        if (std::gcd(m, mi) != 1)
            throw std::invalid_argument("crt_solve: moduli not pairwise coprime");
        // x' = x (mod m), x' = r (mod mi)
        const u64 ri = r % mi;
        const u64 diff = (ri + mi - x % mi) % mi;
        const u64 t = static_cast<u64>(static_cast<u128>(diff) * mod_inverse(m % mi, mi) % mi);
        x += m * t;
        m *= mi;
    }
    return x;
}

u64 power_congruence_solve(u64 n, u64 a, std::uint32_t k) {
    if (n < 3 || n % 2 == 0)
        throw std::invalid_argument("power_congruence_solve: n must be odd and >= 3");
    if (k < 1)
        throw std::invalid_argument("power_congruence_solve: k must be >= 1");
    const u64 nk = checked_pow(n, k);
    a %= nk;
    if (a % n != 1 % n)
        throw std::invalid_argument("power_congruence_solve: a must be 1 (mod n)");
    if (std::gcd(a, n) != 1)
        throw std::invalid_argument("power_congruence_solve: a must be coprime to n");

    std::vector<std::pair<u64, u64>> congruences;
    for (const auto& [p, alpha] : factorize(n).factors) {
        const u64 modulus = checked_pow(p, alpha * (k - 1));  // p^(alpha(k-1))
        if (modulus == 1)
            continue;
        const u64 pak = checked_pow(p, alpha * k);
        const u64 g = primitive_root(p, alpha * k);
        const u64 beta = discrete_log(g, (n + 1) % pak, pak);
        const u64 gamma = discrete_log(g, a % pak, pak);
        const u64 phi_small = checked_pow(p, alpha) / p * (p - 1);  // phi(p^alpha)
        if (beta % phi_small != 0 || gamma % phi_small != 0)
            throw std::logic_error("power_congruence_solve: log not divisible by phi(p^alpha)");
        const u64 coeff = (beta / phi_small) % modulus;
        const u64 rhs = (gamma / phi_small) % modulus;
        // coeff is a unit mod p^(alpha(k-1)) since p does not divide beta/phi
        const u64 r_i = static_cast<u64>(
            static_cast<u128>(rhs) * mod_inverse(coeff, modulus) % modulus);
        congruences.emplace_back(r_i, modulus);
    }

    u64 r = congruences.empty() ? 0 : crt_solve(congruences);
    if (r == 0) {
        // (n+1)^(n^(k-1)) == 1 (mod n^k); shift to a positive exponent
        r = checked_pow(n, k - 1);
    }
    if (mod_pow(n + 1, r, nk) != a)
        throw std::logic_error("power_congruence_solve: constructed r fails verification");
    return r;
}

}  // namespace happy::nt
