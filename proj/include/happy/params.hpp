#pragma once

#include <cstdint>
#include <stdexcept>

namespace happy {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

// Exponent/base pair (e, b) for the digit-power map. e >= 1, b >= 2.
struct Params {
    std::uint32_t e;
    std::uint32_t b;

    Params(std::uint32_t e_, std::uint32_t b_) : e(e_), b(b_) {
        if (e < 1)
            throw std::invalid_argument("Params: exponent must be >= 1");
        if (b < 2)
            throw std::invalid_argument("Params: base must be >= 2");
    }

    bool operator==(const Params&) const = default;
};

}  // namespace happy
