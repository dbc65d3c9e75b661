#include "happy/towernat.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>

#include "happy/core.hpp"
#include "happy/numtheory.hpp"

namespace happy::sym {

namespace {

std::atomic<int> g_depth_limit{8};

constexpr u64 kU64Max = ~u64{0};

u64 checked_add(u64 a, u64 b) {
    if (a > kU64Max - b)
        throw std::overflow_error("TowerNat: u64 addition overflow");
    return a + b;
}

}  // namespace

int depth_limit() { return g_depth_limit.load(); }
void set_depth_limit(int limit) {
    if (limit < 1)
        throw std::invalid_argument("depth limit must be >= 1");
    g_depth_limit.store(limit);
}

struct TowerNat::Node {
    bool small = true;
    u64 value = 0;          // Small payload
    std::uint32_t base = 0;  // Runs payload
    std::vector<Seg> segs;   // least significant first
    int depth = 0;
};

TowerNat::TowerNat() : node_(std::make_shared<Node>()) {}
TowerNat::TowerNat(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

TowerNat TowerNat::small(u64 v) {
    auto n = std::make_shared<Node>();
    n->value = v;
    return TowerNat(std::move(n));
}

bool TowerNat::is_small() const { return node_->small; }
u64 TowerNat::small_value() const {
    if (!node_->small)
        throw std::logic_error("small_value on Runs TowerNat");
    return node_->value;
}
bool TowerNat::is_zero() const { return node_->small && node_->value == 0; }
std::uint32_t TowerNat::base() const {
    if (node_->small)
        throw std::logic_error("base() on Small TowerNat");
    return node_->base;
}
std::span<const TowerNat::Seg> TowerNat::segments() const { return node_->segs; }
int TowerNat::depth() const { return node_->depth; }

std::optional<u64> TowerNat::value_u64() const {
    if (node_->small)
        return node_->value;
    // canonical form has a nonzero most significant digit, so more than
    // 65 digits can never fit a u64
    u64 total_digits = 0;
    for (const Seg& seg : node_->segs) {
        auto cnt = seg.count.value_u64();
        if (!cnt || *cnt > 65)
            return std::nullopt;
        total_digits += *cnt;
        if (total_digits > 65)
            return std::nullopt;
    }
    u128 total = 0;
    u128 place = 1;
    bool beyond = false;  // place exceeds the u64 range
    for (const Seg& seg : node_->segs) {
        const u64 cnt = *seg.count.value_u64();
        for (u64 i = 0; i < cnt; ++i) {
            if (seg.digit != 0) {
                if (beyond)
                    return std::nullopt;
                total += place * seg.digit;
                if (total > kU64Max)
                    return std::nullopt;
            }
            if (!beyond) {
                place *= node_->base;
                if (place > kU64Max)
                    beyond = true;
            }
        }
    }
    return static_cast<u64>(total);
}

std::optional<u64> TowerNat::digit_count_u64(std::uint32_t base) const {
    if (node_->small) {
        if (node_->value == 0)
            return 1;
        u64 n = node_->value, c = 0;
        while (n) {
            ++c;
            n /= base;
        }
        return c;
    }
    u64 total = 0;
    for (const Seg& seg : node_->segs) {
        auto cnt = seg.count.value_u64();
        if (!cnt)
            return std::nullopt;
        total = checked_add(total, *cnt);
    }
    return total;
}

TowerNat TowerNat::from_natural(u64 n, std::uint32_t base) {
    if (base < 2)
        throw std::invalid_argument("from_natural: base must be >= 2");
    if (n == 0)
        return TowerNat::small(0);
    std::vector<Seg> segs;
    while (n) {
        const auto d = static_cast<std::uint32_t>(n % base);
        n /= base;
        if (!segs.empty() && segs.back().digit == d)
            segs.back().count = TowerNat::small(segs.back().count.small_value() + 1);
        else
            segs.push_back(Seg{d, TowerNat::small(1)});
    }
    return runs(base, std::move(segs));
}

TowerNat TowerNat::runs(std::uint32_t base, std::vector<Seg> segments) {
    if (base < 2)
        throw std::invalid_argument("runs: base must be >= 2");
    std::vector<Seg> canon;
    int max_count_depth = -1;
    for (Seg& seg : segments) {
        if (seg.digit >= base)
            throw std::invalid_argument("runs: digit out of range");
        TowerNat count = seg.count;
        if (auto v = count.value_u64()) {
            if (*v == 0)
                continue;  // empty run
            count = TowerNat::small(*v);
        }
        if (!canon.empty() && canon.back().digit == seg.digit) {
            canon.back().count = add(canon.back().count, count, base);
        } else {
            canon.push_back(Seg{seg.digit, std::move(count)});
        }
    }
    while (!canon.empty() && canon.back().digit == 0)
        canon.pop_back();
    if (canon.empty())
        return TowerNat::small(0);
    for (const Seg& seg : canon)
        max_count_depth = std::max(max_count_depth, seg.count.depth());
    const int depth = 1 + max_count_depth;
    if (depth > depth_limit())
        throw DepthLimitError("TowerNat nesting depth " + std::to_string(depth) +
                              " exceeds limit " + std::to_string(depth_limit()));
    auto n = std::make_shared<Node>();
    n->small = false;
    n->base = base;
    n->segs = std::move(canon);
    n->depth = depth;
    return TowerNat(std::move(n));
}

bool TowerNat::operator==(const TowerNat& other) const {
    auto va = value_u64();
    auto vb = other.value_u64();
    if (va && vb)
        return *va == *vb;
    if (va.has_value() != vb.has_value())
        return false;  // one fits u64, the other is deep
    if (node_->base != other.node_->base || node_->segs.size() != other.node_->segs.size())
        return false;
    for (std::size_t i = 0; i < node_->segs.size(); ++i) {
        if (node_->segs[i].digit != other.node_->segs[i].digit)
            return false;
        if (!(node_->segs[i].count == other.node_->segs[i].count))
            return false;
    }
    return true;
}

nlohmann::json TowerNat::to_json() const {
    if (node_->small)
        return nlohmann::json{{"small", node_->value}};
    nlohmann::json runs_json = nlohmann::json::array();
    for (const Seg& seg : node_->segs)
        runs_json.push_back(
            nlohmann::json::array({nlohmann::json(seg.digit), seg.count.to_json()}));
    return nlohmann::json{{"base", node_->base}, {"runs", runs_json}};
}

TowerNat TowerNat::from_json(const nlohmann::json& j) {
    if (j.contains("small"))
        return TowerNat::small(j.at("small").get<u64>());
    const auto base = j.at("base").get<std::uint32_t>();
    std::vector<Seg> segs;
    for (const auto& entry : j.at("runs")) {
        segs.push_back(Seg{entry.at(0).get<std::uint32_t>(), from_json(entry.at(1))});
    }
    return runs(base, std::move(segs));
}

namespace {

// Reading cursor over a Runs value, consuming whole or partial segments.
class Cursor {
public:
    Cursor(std::span<const TowerNat::Seg> segs, std::uint32_t base)
        : segs_(segs), base_(base) {
        if (!segs_.empty())
            remaining_ = segs_[0].count;
    }

    bool done() const { return idx_ >= segs_.size(); }
    std::uint32_t digit() const { return segs_[idx_].digit; }
    const TowerNat& remaining() const { return remaining_; }

    void advance(const TowerNat& k) {
        if (auto kv = k.value_u64(); kv && *kv == 0)
            return;
        if (auto rv = remaining_.value_u64()) {
            auto kv = k.value_u64();
            if (!kv || *kv > *rv)
                throw std::logic_error("Cursor: consuming past segment end");
            if (*kv == *rv)
                next_segment();
            else
                remaining_ = TowerNat::small(*rv - *kv);
            return;
        }
        // deep remaining count
        if (auto kv = k.value_u64()) {
            remaining_ = sub_small(remaining_, *kv, base_);
            if (remaining_.is_zero())
                next_segment();
            return;
        }
        if (remaining_ == k) {
            next_segment();
            return;
        }
        throw IncomparableError("Cursor: cannot consume a deep count from a different deep count");
    }

private:
    void next_segment() {
        ++idx_;
        remaining_ = done() ? TowerNat::small(0) : segs_[idx_].count;
    }

    std::span<const TowerNat::Seg> segs_;
    std::uint32_t base_;
    std::size_t idx_ = 0;
    TowerNat remaining_;
};

// Building a canonical segment list least-significant-first.
class Builder {
public:
    explicit Builder(std::uint32_t base) : base_(base) {}

    void push(std::uint32_t digit, const TowerNat& count) {
        if (auto v = count.value_u64(); v && *v == 0)
            return;
        segs_.push_back(TowerNat::Seg{digit, count});
    }
    void push(std::uint32_t digit, u64 count) { push(digit, TowerNat::small(count)); }

    void copy_rest(Cursor& cur) {
        while (!cur.done()) {
            push(cur.digit(), cur.remaining());
            cur.advance(cur.remaining());
        }
    }

    TowerNat finish() { return TowerNat::runs(base_, std::move(segs_)); }

private:
    std::uint32_t base_;
    std::vector<TowerNat::Seg> segs_;
};

TowerNat to_runs(const TowerNat& t, std::uint32_t base) {
    if (!t.is_small())
        return t;
    return TowerNat::from_natural(t.small_value(), base);
}

// remaining-count comparison for the merge in add(): -1, 0, +1
int cnt_cmp(const TowerNat& a, const TowerNat& b) {
    auto va = a.value_u64();
    auto vb = b.value_u64();
    if (va && vb)
        return *va < *vb ? -1 : (*va > *vb ? 1 : 0);
    if (va)
        return -1;  // deep counts exceed the u64 range
    if (vb)
        return 1;
    if (a == b)
        return 0;
    throw IncomparableError("cannot order two distinct deep run counts");
}

}  // namespace

TowerNat pad_ones(u64 shift, const TowerNat& count, std::uint32_t base) {
    return pad_run(1, shift, count, base);
}

TowerNat pad_run(std::uint32_t digit, u64 shift, const TowerNat& count,
                 std::uint32_t base) {
    if (digit < 1 || digit >= base)
        throw std::invalid_argument("pad_run: digit must be in [1, base)");
    if (auto v = count.value_u64(); v && *v == 0)
        return TowerNat();
    std::vector<TowerNat::Seg> segs;
    if (shift > 0)
        segs.push_back(TowerNat::Seg{0, TowerNat::small(shift)});
    segs.push_back(TowerNat::Seg{digit, count});
    return TowerNat::runs(base, std::move(segs));
}

TowerNat add_disjoint(const TowerNat& t, u64 y, u64 shift, std::uint32_t base) {
    // y < base^shift
    {
        u128 cap = 1;
        bool huge = false;
        for (u64 i = 0; i < shift && !huge; ++i) {
            cap *= base;
            if (cap > kU64Max)
                huge = true;
        }
        if (!huge && y >= cap)
            throw std::invalid_argument("add_disjoint: y has more than `shift` digits");
    }
    if (t.is_zero())
        return y == 0 ? t : TowerNat::from_natural(y, base);
    const TowerNat tr = to_runs(t, base);
    Cursor cur(tr.segments(), base);
    // low `shift` positions of t must be zero
    if (shift > 0) {
        if (cur.digit() != 0)
            throw std::invalid_argument("add_disjoint: low digits of t are not zero");
        if (auto rv = cur.remaining().value_u64(); rv && *rv < shift)
            throw std::invalid_argument("add_disjoint: low digits of t are not zero");
        cur.advance(TowerNat::small(shift));
    }
    Builder out(base);
    u64 pos = 0;
    u64 yy = y;
    while (yy) {
        out.push(static_cast<std::uint32_t>(yy % base), 1);
        yy /= base;
        ++pos;
    }
    if (pos < shift)
        out.push(0, shift - pos);
    out.copy_rest(cur);
    return out.finish();
}

TowerNat add(const TowerNat& a, const TowerNat& b, std::uint32_t base) {
    if (a.is_small() && b.is_small()) {
        return TowerNat::small(checked_add(a.small_value(), b.small_value()));
    }
    const TowerNat ra = to_runs(a, base);
    const TowerNat rb = to_runs(b, base);
    if (ra.is_zero())
        return rb;
    if (rb.is_zero())
        return ra;
    if (ra.base() != base || rb.base() != base)
        throw std::invalid_argument("add: base mismatch");
    Cursor ca(ra.segments(), base);
    Cursor cb(rb.segments(), base);
    Builder out(base);
    std::uint32_t carry = 0;
    while (!ca.done() && !cb.done()) {
        const int cmp = cnt_cmp(ca.remaining(), cb.remaining());
        const TowerNat block = cmp <= 0 ? ca.remaining() : cb.remaining();
        const u64 ds = ca.digit() + cb.digit();
        // within a block of constant digit sums the carry stabilizes
        // after at most two positions
        const u64 s0 = ds + carry;
        const std::uint32_t c1 = static_cast<std::uint32_t>(s0 / base);
        const u64 s1 = ds + c1;
        const std::uint32_t c2 = static_cast<std::uint32_t>(s1 / base);
        auto bv = block.value_u64();
        if (bv && *bv == 1) {
            out.push(static_cast<std::uint32_t>(s0 % base), 1);
            carry = c1;
        } else {
            out.push(static_cast<std::uint32_t>(s0 % base), 1);
            if (c2 == c1) {
                out.push(static_cast<std::uint32_t>(s1 % base),
                         sub_small(block, 1, base));
                carry = c1;
            } else {
                const u64 s2 = ds + c2;
                out.push(static_cast<std::uint32_t>(s1 % base), 1);
                out.push(static_cast<std::uint32_t>(s2 % base),
                         sub_small(block, 2, base));
                carry = c2;
            }
        }
        ca.advance(block);
        cb.advance(block);
    }
    Cursor& rest = ca.done() ? cb : ca;
    while (carry && !rest.done()) {
        const std::uint32_t d = rest.digit();
        if (d == base - 1) {
            out.push(0, rest.remaining());
            rest.advance(rest.remaining());
        } else {
            out.push(d + 1, 1);
            rest.advance(TowerNat::small(1));
            carry = 0;
        }
    }
    out.copy_rest(rest);
    if (carry)
        out.push(carry, 1);
    return out.finish();
}

TowerNat sub_small(const TowerNat& t, u64 y, std::uint32_t base) {
    if (t.is_small()) {
        if (t.small_value() < y)
            throw std::invalid_argument("sub_small: result would be negative");
        return TowerNat::small(t.small_value() - y);
    }
    const auto ydigits = core::digits_of(y, base);
    Cursor cur(t.segments(), base);
    Builder out(base);
    std::uint32_t borrow = 0;
    for (std::size_t i = 0; i < ydigits.size(); ++i) {
        if (cur.done())
            throw std::invalid_argument("sub_small: result would be negative");
        const std::uint32_t d = cur.digit();
        const std::uint32_t sub = ydigits[i] + borrow;
        if (d >= sub) {
            out.push(d - sub, 1);
            borrow = 0;
        } else {
            out.push(d + base - sub, 1);
            borrow = 1;
        }
        cur.advance(TowerNat::small(1));
    }
    while (borrow) {
        if (cur.done())
            throw std::invalid_argument("sub_small: result would be negative");
        const std::uint32_t d = cur.digit();
        if (d == 0) {
            out.push(base - 1, cur.remaining());
            cur.advance(cur.remaining());
        } else {
            out.push(d - 1, 1);
            cur.advance(TowerNat::small(1));
            borrow = 0;
        }
    }
    out.copy_rest(cur);
    return out.finish();
}

TowerNat scale(const TowerNat& t, u64 c, std::uint32_t base) {
    if (c >= static_cast<u64>(base) * base)
        throw std::invalid_argument("scale: factor must be < base^2");
    if (c == 0 || t.is_zero())
        return TowerNat::small(0);
    if (t.is_small()) {
        const u128 prod = static_cast<u128>(t.small_value()) * c;
        if (prod <= kU64Max)
            return TowerNat::small(static_cast<u64>(prod));
        // spill into run form
        std::vector<TowerNat::Seg> segs;
        u128 v = prod;
        while (v) {
            segs.push_back(TowerNat::Seg{static_cast<std::uint32_t>(v % base),
                                         TowerNat::small(1)});
            v /= base;
        }
        return TowerNat::runs(base, std::move(segs));
    }
    Cursor cur(t.segments(), base);
    Builder out(base);
    u64 carry = 0;
    while (!cur.done()) {
        const u64 val = static_cast<u64>(cur.digit()) * c;
        int guard = 0;
        while (!cur.done() && cur.digit() * static_cast<u64>(c) == val) {
            const u64 s = val + carry;
            const std::uint32_t dig = static_cast<std::uint32_t>(s % base);
            const u64 next_carry = s / base;
            if (next_carry == carry) {
                // carry fixed point: the rest of this run scales uniformly
                out.push(dig, cur.remaining());
                cur.advance(cur.remaining());
                break;
            }
            out.push(dig, 1);
            cur.advance(TowerNat::small(1));
            carry = next_carry;
            if (++guard > 200)
                throw std::logic_error("scale: carry failed to stabilize");
        }
    }
    while (carry) {
        out.push(static_cast<std::uint32_t>(carry % base), 1);
        carry /= base;
    }
    return out.finish();
}

TowerNat shift_up(const TowerNat& t, u64 s, std::uint32_t base) {
    if (s == 0 || t.is_zero())
        return t;
    const TowerNat tr = to_runs(t, base);
    std::vector<TowerNat::Seg> segs;
    segs.push_back(TowerNat::Seg{0, TowerNat::small(s)});
    for (const auto& seg : tr.segments())
        segs.push_back(seg);
    return TowerNat::runs(base, std::move(segs));
}

TowerNat mul_small(const TowerNat& t, u64 c, std::uint32_t base) {
    if (c == 0 || t.is_zero())
        return TowerNat::small(0);
    const u64 limb_base = static_cast<u64>(base) * base;
    TowerNat acc = TowerNat::small(0);
    u64 shift = 0;
    while (c) {
        const u64 limb = c % limb_base;
        c /= limb_base;
        if (limb)
            acc = add(acc, shift_up(scale(t, limb, base), shift, base), base);
        shift += 2;
    }
    return acc;
}

TowerNat power_digit_sum(const TowerNat& t, const Params& params) {
    if (t.is_zero())
        throw std::invalid_argument("power_digit_sum: value must be >= 1");
    if (t.is_small())
        return TowerNat::small(core::power_digit_sum(t.small_value(), params));
    if (t.base() != params.b)
        throw std::invalid_argument("power_digit_sum: base mismatch");
    TowerNat acc = TowerNat::small(0);
    for (const auto& seg : t.segments()) {
        if (seg.digit == 0)
            continue;
        u64 de = 1;
        for (std::uint32_t i = 0; i < params.e; ++i) {
            if (de > kU64Max / seg.digit)
                throw std::overflow_error("power_digit_sum: digit power overflow");
            de *= seg.digit;
        }
        acc = add(acc, mul_small(seg.count, de, params.b), params.b);
    }
    return acc;
}

namespace {

u64 multiplicative_order(u64 b, u64 m) {
    if (m == 1)
        return 1;
    b %= m;
    if (std::gcd(b, m) != 1)
        throw std::invalid_argument("multiplicative_order: not a unit");
    u64 t = nt::euler_phi(m);
    for (const auto& [q, mult] : nt::factorize(t).factors) {
        while (t % q == 0 && nt::mod_pow(b, t / q, m) == 1)
            t /= q;
    }
    return t;
}

// (b^e mod m, repunit(e) mod m) by binary exponentiation of the affine
// step x -> b*x + 1.
std::pair<u64, u64> affine_pow(u64 b, u64 e, u64 m) {
    if (m == 1)
        return {0, 0};
    u64 rp = 1 % m, rr = 0;          // result: identity (e = 0)
    u64 sp = b % m, sr = 1 % m;      // single step
    while (e) {
        if (e & 1) {
            // result := step^bit applied after result
            rr = static_cast<u64>((static_cast<u128>(sp) * rr + sr) % m);
            rp = static_cast<u64>(static_cast<u128>(sp) * rp % m);
        }
        sr = static_cast<u64>((static_cast<u128>(sp) * sr + sr) % m);
        sp = static_cast<u64>(static_cast<u128>(sp) * sp % m);
        e >>= 1;
    }
    return {rp, rr};
}

}  // namespace

std::pair<u64, u64> pow_rep_mod(const TowerNat& c, std::uint32_t b, u64 m) {
    if (m == 0)
        throw std::invalid_argument("pow_rep_mod: modulus must be >= 1");
    if (m == 1)
        return {0, 0};
    if (auto v = c.value_u64())
        return affine_pow(b, *v, m);

    // deep exponent: reduce modulo the eventual period
    // m2 = largest divisor of m supported on primes dividing b
    u64 m2 = 1, m1 = m;
    for (const auto& [p, mult] : nt::factorize(m).factors) {
        if (b % p == 0) {
            for (std::uint32_t i = 0; i < mult; ++i) {
                m2 *= p;
                m1 /= p;
            }
        }
    }
    u64 preperiod = 0;
    {
        u64 x = 1 % m2;
        while (x != 0) {
            x = static_cast<u64>(static_cast<u128>(x) * b % m2);
            ++preperiod;
        }
    }
    const u64 ord = multiplicative_order(b, m1);
    // joint period of (b^c, repunit(c)) mod m for c >= preperiod:
    // the smallest multiple P of ord with repunit(P) = 0 (mod m1)
    u64 rep_ord = 0;
    {
        for (u64 i = 0; i < ord; ++i)
            rep_ord = static_cast<u64>((static_cast<u128>(rep_ord) * b + 1) % m1);
    }
    const u64 t = m1 / std::gcd(rep_ord, m1);
    if (ord > kU64Max / std::max<u64>(t, 1))
        throw std::overflow_error("pow_rep_mod: period overflow");
    const u64 period = std::max<u64>(ord * t, 1);
    const u64 cm = mod_value(c, period);
    // c exceeds u64 range, so certainly c >= preperiod
    const u64 reduced = preperiod + (cm + period - preperiod % period) % period;
    return affine_pow(b, reduced, m);
}

u64 mod_value(const TowerNat& t, u64 m) {
    if (m == 0)
        throw std::invalid_argument("mod_value: modulus must be >= 1");
    if (t.is_small())
        return t.small_value() % m;
    if (m == 1)
        return 0;
    const u64 b = t.base();
    u64 acc = 0;
    const auto segs = t.segments();
    for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
        const auto [pb, rr] = pow_rep_mod(it->count, static_cast<std::uint32_t>(b), m);
        acc = static_cast<u64>((static_cast<u128>(acc) * pb +
                                static_cast<u128>(it->digit) * rr) % m);
    }
    return acc;
}

std::optional<std::string> materialize(const TowerNat& t, u64 digit_cap,
                                       std::uint32_t base) {
    const std::uint32_t b = t.is_small() ? base : t.base();
    auto count = t.digit_count_u64(b);
    if (!count || *count > digit_cap)
        return std::nullopt;
    static constexpr char kAlphabet[] = "0123456789abcdefghijklmnopqrstuvwxyz";
    const bool compact = b <= 36;
    std::string out;
    auto emit = [&](std::uint32_t d) {
        if (compact)
            out.push_back(kAlphabet[d]);
        else {
            if (!out.empty())
                out.push_back('.');
            out += std::to_string(d);
        }
    };
    if (t.is_small()) {
        for (auto d : core::digits_of(t.small_value(), b))
            emit(d);
        std::reverse(out.begin(), out.end());
        return out;
    }
    const auto segs = t.segments();
    for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
        const u64 cnt = *it->count.value_u64();
        for (u64 i = 0; i < cnt; ++i)
            emit(it->digit);
    }
    return out;
}

}  // namespace happy::sym
