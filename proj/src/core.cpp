#include "happy/core.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "happy/numtheory.hpp"

namespace happy::core {

std::vector<std::uint32_t> digits_of(u64 n, std::uint32_t b) {
    if (b < 2)
        throw std::invalid_argument("digits_of: base must be >= 2");
    std::vector<std::uint32_t> digits;
    do {
        digits.push_back(static_cast<std::uint32_t>(n % b));
        n /= b;
    } while (n);
    return digits;
}

namespace {

u64 digit_power(std::uint32_t d, std::uint32_t e) {
    u128 v = 1;
    for (std::uint32_t i = 0; i < e; ++i) {
        v *= d;
        if (v > ~u64{0})
            throw std::overflow_error("digit power exceeds 64 bits");
    }
    return static_cast<u64>(v);
}

}  // namespace

u64 power_digit_sum(u64 n, const Params& params) {
    if (n == 0)
        throw std::invalid_argument("power_digit_sum: n must be >= 1");
    u64 sum = 0;
    while (n) {
        sum += digit_power(static_cast<std::uint32_t>(n % params.b), params.e);
        n /= params.b;
    }
    return sum;
}

Trajectory trajectory(u64 n, const Params& params) {
    if (n == 0)
        throw std::invalid_argument("trajectory: n must be >= 1");
    Trajectory traj;
    traj.start = n;
    std::unordered_set<u64> seen;
    u64 x = n;
    while (true) {
        if (x == 1) {
            traj.terminal = Terminal::ReachedOne;
            return traj;
        }
        if (!seen.insert(x).second) {
            traj.terminal = Terminal::EnteredCycle;
            traj.cycle_entry = x;
            return traj;
        }
        x = power_digit_sum(x, params);
        traj.steps.push_back(x);
    }
}

u64 contraction_bound(const Params& params) {
    const u128 pow_part = [&] {
        u128 v = 1;
        for (std::uint32_t i = 0; i < params.e; ++i)
            v *= params.b - 1;
        return v;
    }();
    u128 bk = params.b;
    for (std::uint32_t k = 1;; ++k) {
        if (pow_part * (k + 1) < bk) {
            if (bk > ~u64{0})
                throw std::overflow_error("contraction bound exceeds 64 bits");
            return static_cast<u64>(bk);
        }
        bk *= params.b;
        if (k > 256)
            throw std::overflow_error("contraction bound search failed");
    }
}

bool CycleSet::contains(u64 x) const {
    return std::binary_search(members.begin(), members.end(), x);
}

CycleSet cycle_set(const Params& params) {
    const u64 bound = contraction_bound(params);
    CycleSet out{params, {}, bound};

    // Color marking over the dense domain [1, bound): 0 unvisited,
    // 1 on the current path, 2 finished.
    std::vector<std::uint8_t> color(bound, 0);
    std::vector<std::uint8_t> on_cycle(bound, 0);
    std::vector<u64> path;
    for (u64 n = 1; n < bound; ++n) {
        if (color[n] != 0)
            continue;
        path.clear();
        u64 x = n;
        while (color[x] == 0) {
            color[x] = 1;
            path.push_back(x);
            x = power_digit_sum(x, params);
        }
        if (color[x] == 1) {
            // found a new cycle; everything from x onward in path lies on it
            auto it = std::find(path.begin(), path.end(), x);
            for (auto jt = it; jt != path.end(); ++jt)
                on_cycle[*jt] = 1;
        }
        for (u64 v : path)
            color[v] = 2;
    }
    for (u64 n = 1; n < bound; ++n)
        if (on_cycle[n])
            out.members.push_back(n);
    return out;
}

ClassifierCache::ClassifierCache(const Params& params, u64 cap)
    : params_(params), cap_(cap == 0 ? contraction_bound(params) : cap) {
    const u64 min_cap = contraction_bound(params);
    if (cap_ < min_cap)
        cap_ = min_cap;
    table_.assign(cap_, 0);
    // Every value below cap maps into [1, contraction_bound) <= cap, so a
    // single marking pass classifies the whole table.
    std::vector<std::uint8_t> state(cap_, 0);  // 0 unknown, 1 in progress, 2 done
    std::vector<u64> path;
    for (u64 n = 1; n < cap_; ++n) {
        if (state[n] != 0)
            continue;
        path.clear();
        u64 x = n;
        bool result = false;
        while (true) {
            if (x == 1) {
                result = true;
                break;
            }
            if (state[x] == 2) {
                result = table_[x] != 0;
                break;
            }
            if (state[x] == 1) {
                result = false;  // closed a non-trivial cycle
                break;
            }
            state[x] = 1;
            path.push_back(x);
            x = power_digit_sum(x, params_);
        }
        for (u64 v : path) {
            state[v] = 2;
            table_[v] = result ? 1 : 0;
        }
    }
    table_[1 % cap_] = 1;
    state.clear();
}

bool ClassifierCache::is_happy(u64 n) const {
    if (n == 0)
        throw std::invalid_argument("is_happy: n must be >= 1");
    while (n >= cap_)
        n = power_digit_sum(n, params_);
    return table_[n] != 0;
}

ConditionResult condition_holds(const Params& params) {
    if (params.b == 2)
        return {true, 0};  // b-1 = 1 has no prime divisor
    for (const auto& [p, mult] : nt::factorize(params.b - 1).factors) {
        if ((params.e - 1) % (p - 1) == 0)
            return {false, p};
    }
    return {true, 0};
}

bool residue_invariance_witness(const Params& params, u64 p, u64 limit) {
    if (p < 2 || (params.b - 1) % p != 0 || (params.e - 1) % (p - 1) != 0)
        throw std::invalid_argument(
            "residue_invariance_witness: need p | b-1 and e == 1 (mod p-1)");
    for (u64 n = 1; n <= limit; ++n) {
        if (power_digit_sum(n, params) % p != n % p)
            return false;
    }
    return true;
}

}  // namespace happy::core
