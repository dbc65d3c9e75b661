#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "happy/params.hpp"
#include "json.hpp"

namespace happy::sym {

struct DepthLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an operation would need to compare or combine two deep
// symbolic values whose relative order is not structurally evident.
struct IncomparableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Run-length base-b numeral whose run counts are themselves TowerNats.
// Immutable value type; cheap to copy (shared nodes).
class TowerNat {
public:
    struct Seg;

    TowerNat();  // Small(0)

    static TowerNat small(u64 v);
    // Canonical run form of a machine natural (Runs for n >= 1, Small(0) for 0).
    static TowerNat from_natural(u64 n, std::uint32_t base);
    // Builds a Runs value from least-significant-first segments.
    // Canonicalizes: drops zero-count runs, merges adjacent equal digits,
    // strips most-significant zeros, collapses counts that fit u64 to Small.
    static TowerNat runs(std::uint32_t base, std::vector<Seg> segments);

    bool is_small() const;
    u64 small_value() const;  // requires is_small()
    bool is_zero() const;
    std::uint32_t base() const;  // requires !is_small()
    std::span<const Seg> segments() const;
    int depth() const;  // 0 for Small, 1 + max count depth for Runs

    // Exact value when it fits a u64. Deep values never fit (counts are
    // collapsed to Small whenever they do, so a surviving deep count
    // always exceeds the u64 range).
    std::optional<u64> value_u64() const;

    // Total number of digits, when that number fits a u64.
    // `base` is used only for Small values.
    std::optional<u64> digit_count_u64(std::uint32_t base) const;

    bool operator==(const TowerNat& other) const;

    nlohmann::json to_json() const;
    static TowerNat from_json(const nlohmann::json& j);

private:
    struct Node;
    explicit TowerNat(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> node_;
};

struct TowerNat::Seg {
    std::uint32_t digit;
    TowerNat count;  // value >= 1
};

// Configurable nesting depth limit (default 8). Construction of deeper
// values throws DepthLimitError.
int depth_limit();
void set_depth_limit(int limit);

struct DepthLimitGuard {
    explicit DepthLimitGuard(int limit) : prev_(depth_limit()) { set_depth_limit(limit); }
    ~DepthLimitGuard() { set_depth_limit(prev_); }
    DepthLimitGuard(const DepthLimitGuard&) = delete;

private:
    int prev_;
};

// `count` ones followed by `shift` zeros: sum of b^(shift+j), j < count.
TowerNat pad_ones(u64 shift, const TowerNat& count, std::uint32_t base);

// `count` copies of digit d followed by `shift` zeros. 1 <= d < base.
TowerNat pad_run(std::uint32_t digit, u64 shift, const TowerNat& count,
                 std::uint32_t base);

// Digit-disjoint addition: y < b^shift and the low `shift` digit
// positions of t must all be zero. Deliberately does not carry.
TowerNat add_disjoint(const TowerNat& t, u64 y, u64 shift, std::uint32_t base);

// Full addition with carries.
TowerNat add(const TowerNat& a, const TowerNat& b, std::uint32_t base);

// t - y; requires t >= y.
TowerNat sub_small(const TowerNat& t, u64 y, std::uint32_t base);

// t * c for c < base^2 (one carry limb).
TowerNat scale(const TowerNat& t, u64 c, std::uint32_t base);

// t * c for arbitrary u64 c, by base^2-limb decomposition of c.
TowerNat mul_small(const TowerNat& t, u64 c, std::uint32_t base);

// t * b^s.
TowerNat shift_up(const TowerNat& t, u64 s, std::uint32_t base);

// Sum of e-th powers of all digits: for each run, digit^e * count.
TowerNat power_digit_sum(const TowerNat& t, const Params& params);

// value(t) mod m. Run counts are reduced recursively: a count c is
// needed only through (b^c, repunit(c)) mod m, which is eventually
// periodic in c with period m * ord(b mod coprime-part(m)).
u64 mod_value(const TowerNat& t, u64 m);

// (b^c mod m, repunit(c) mod m) where repunit(j) = (b^j - 1)/(b - 1).
std::pair<u64, u64> pow_rep_mod(const TowerNat& c, std::uint32_t b, u64 m);

// Full digit expansion (most significant first) iff the total digit
// count is <= digit_cap; nullopt means "too large", not an error.
std::optional<std::string> materialize(const TowerNat& t, u64 digit_cap,
                                       std::uint32_t base);

}  // namespace happy::sym
