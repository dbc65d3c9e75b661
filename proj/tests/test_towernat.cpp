#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "happy/core.hpp"
#include "happy/towernat.hpp"

using namespace happy;
using namespace happy::sym;

namespace {

TowerNat tn(u64 v) { return TowerNat::small(v); }

// reference digit expansion (least significant first) for values and ops
std::vector<std::uint32_t> ref_digits(const TowerNat& t, std::uint32_t b) {
    auto s = materialize(t, 1 << 20, b);
    REQUIRE(s.has_value());
    std::vector<std::uint32_t> out;
    if (b <= 36) {
        for (auto it = s->rbegin(); it != s->rend(); ++it) {
            const char c = *it;
            out.push_back(c <= '9' ? c - '0' : c - 'a' + 10);
        }
    }
    return out;
}

u64 ref_value(const std::vector<std::uint32_t>& ds, std::uint32_t b) {
    u64 v = 0;
    for (auto it = ds.rbegin(); it != ds.rend(); ++it)
        v = v * b + *it;
    return v;
}

}  // namespace

TEST_CASE("canonical forms") {
    CHECK(TowerNat().is_zero());
    CHECK(tn(0) == TowerNat::small(0));
    CHECK(tn(42).value_u64() == 42);

    const auto n = TowerNat::from_natural(907, 10);
    CHECK(n.value_u64() == 907);
    CHECK(n.digit_count_u64(10) == 3);

    // runs canonicalization: merge equal digits, drop zero counts, strip
    // leading zeros, collapse small counts
    const auto merged = TowerNat::runs(
        10, {{3, tn(2)}, {3, tn(1)}, {7, tn(0)}, {5, tn(2)}, {0, tn(3)}});
    CHECK(merged == TowerNat::from_natural(55333, 10));

    CHECK(TowerNat::runs(10, {{0, tn(5)}}).is_zero());
    CHECK(TowerNat::runs(10, {{1, tn(3)}}).value_u64() == 111);
}

TEST_CASE("value and digit count overflow behavior") {
    const auto big = pad_ones(0, tn(100), 10);  // 100 ones
    CHECK_FALSE(big.value_u64().has_value());
    CHECK(big.digit_count_u64(10) == 100);

    const auto fits = pad_ones(0, tn(19), 10);
    CHECK(fits.value_u64() == 1111111111111111111ull);

    CHECK(tn(0).digit_count_u64(10) == 1);
    CHECK(tn(999).digit_count_u64(10) == 3);
    CHECK(tn(999).digit_count_u64(2) == 10);
}

TEST_CASE("depth limit") {
    CHECK(depth_limit() == 8);
    TowerNat deep = pad_ones(0, tn(~u64{0}), 10);  // depth 1 (count stays small)
    CHECK(deep.depth() == 1);
    {
        DepthLimitGuard guard(2);
        // count too large for u64 collapse, so nesting grows
        TowerNat deeper = pad_ones(1, deep, 10);
        CHECK(deeper.depth() == 2);
        CHECK_THROWS_AS(pad_ones(1, deeper, 10), DepthLimitError);
    }
    CHECK(depth_limit() == 8);
}

TEST_CASE("pads and shifts") {
    CHECK(pad_ones(2, tn(3), 10) == TowerNat::from_natural(11100, 10));
    CHECK(pad_ones(0, tn(0), 10).is_zero());
    CHECK(pad_run(9, 1, tn(2), 10) == TowerNat::from_natural(990, 10));
    CHECK(shift_up(tn(907), 3, 10) == TowerNat::from_natural(907000, 10));
    CHECK(shift_up(tn(0), 5, 10).is_zero());
}

TEST_CASE("disjoint addition") {
    const auto t = pad_ones(3, tn(4), 10);  // 1111000
    CHECK(add_disjoint(t, 958, 3, 10) == TowerNat::from_natural(1111958, 10));
    CHECK_THROWS_AS(add_disjoint(t, 1000, 3, 10), std::invalid_argument);
    CHECK_THROWS_AS(add_disjoint(TowerNat::from_natural(11, 10), 5, 1, 10),
                    std::invalid_argument);
}

TEST_CASE("general addition with carries") {
    auto check_add = [](u64 a, u64 b, std::uint32_t base) {
        const auto got = add(TowerNat::from_natural(a, base),
                             TowerNat::from_natural(b, base), base);
        CHECK(got.value_u64() == a + b);
    };
    check_add(999, 1, 10);
    check_add(999999, 999999, 10);
    check_add(12345, 98765, 10);
    check_add(0, 7, 10);
    check_add(255, 255, 16);
    check_add(194481, 2743, 14);

    // carry collapse across a long b-1 run: 6 + 999...9 run + 4 = 10^k
    const auto l = add_disjoint(pad_run(9, 1, tn(50), 10), 6, 1, 10);
    const auto collapsed = add(l, tn(4), 10);
    CHECK(collapsed == shift_up(tn(1), 51, 10));
}

TEST_CASE("subtraction of machine naturals") {
    CHECK(sub_small(TowerNat::from_natural(1000, 10), 1, 10) ==
          TowerNat::from_natural(999, 10));
    CHECK(sub_small(tn(7), 7, 10).is_zero());
    CHECK_THROWS(sub_small(tn(3), 4, 10));
    const auto big = pad_ones(0, tn(30), 10);  // 30 ones
    CHECK(sub_small(big, 112, 10) ==
          TowerNat::runs(10, {{9, tn(3)}, {0, tn(1)}, {1, tn(26)}}));
    CHECK(sub_small(big, 112, 10) ==
          add(shift_up(pad_ones(0, tn(26), 10), 4, 10),
              TowerNat::from_natural(999, 10), 10));
}

TEST_CASE("scaling") {
    auto check_scale = [](u64 v, u64 c, std::uint32_t base) {
        CHECK(scale(TowerNat::from_natural(v, base), c, base).value_u64() ==
              v * c);
    };
    check_scale(907, 81, 10);
    check_scale(999, 99, 10);
    check_scale(12345, 1, 10);
    check_scale(12345, 0, 10);
    check_scale(4095, 255, 16);
    CHECK_THROWS_AS(scale(tn(1), 100, 10), std::invalid_argument);

    CHECK(mul_small(TowerNat::from_natural(907, 10), 233192, 10).value_u64() ==
          907ull * 233192);
    CHECK(mul_small(pad_ones(0, tn(10), 10), 9, 10) ==
          pad_run(9, 0, tn(10), 10));
}

TEST_CASE("symbolic digit power sums") {
    const Params p(2, 10);
    // 233192 nines followed by 20958
    const auto h = add_disjoint(pad_run(9, 5, tn(233192), 10), 20958, 5, 10);
    const auto t = power_digit_sum(h, p);
    CHECK(t.value_u64() == 18888726);
    CHECK(mod_value(h, 9) == 6);
    CHECK(mod_value(h, 81) == 78);

    CHECK(power_digit_sum(tn(958), p).value_u64() ==
          core::power_digit_sum(958, p));
}

TEST_CASE("symbolic modulus") {
    CHECK(mod_value(TowerNat::from_natural(11111, 10), 7) == 2);
    CHECK(mod_value(tn(0), 5) == 0);
    CHECK(mod_value(pad_ones(0, tn(9), 10), 81) == 9);

    // deep counts: value has 10^30-ish digits, reduced via periodicity
    DepthLimitGuard guard(16);
    const auto big_count = pad_ones(0, tn(30), 10);  // 30 ones as a count
    const auto giant = pad_ones(2, big_count, 10);
    // repunit(c) mod 9 = c mod 9; c = repunit(30) = 3 (mod 9); times 10^2
    CHECK(mod_value(giant, 9) == 3);

    const auto [pw, rep] = pow_rep_mod(tn(9), 10, 81);
    CHECK(pw == 1);   // 10^9 mod 81
    CHECK(rep == 9);  // repunit(9) mod 81

    for (u64 c : {0ull, 1ull, 7ull, 12ull, 100ull}) {
        const auto [pc, rc] = pow_rep_mod(tn(c), 10, 73);
        u64 want_p = 1, want_r = 0;
        for (u64 i = 0; i < c; ++i) {
            want_r = (want_r * 10 + 1) % 73;
            want_p = want_p * 10 % 73;
        }
        CHECK(pc == want_p);
        CHECK(rc == want_r);
    }
}

TEST_CASE("materialization") {
    CHECK(materialize(TowerNat::from_natural(907, 10), 10, 10) == "907");
    CHECK(materialize(tn(255), 10, 16) == "ff");
    CHECK(materialize(pad_ones(1, tn(3), 10), 10, 10) == "1110");
    CHECK_FALSE(materialize(pad_ones(0, tn(100), 10), 50, 10).has_value());
    CHECK(materialize(tn(0), 10, 10) == "0");
}

TEST_CASE("json round trips") {
    const auto h = add_disjoint(pad_run(9, 5, tn(233192), 10), 20958, 5, 10);
    CHECK(TowerNat::from_json(h.to_json()) == h);
    CHECK(TowerNat::from_json(tn(907).to_json()) == tn(907));
    DepthLimitGuard guard(16);
    const auto deep = pad_ones(3, pad_ones(0, tn(40), 10), 10);
    CHECK(TowerNat::from_json(deep.to_json()) == deep);
}

TEST_CASE("randomized agreement with naive digit arithmetic") {
    std::mt19937_64 rng(20250823);
    for (int iter = 0; iter < 3000; ++iter) {
        const std::uint32_t base = 2 + rng() % 15;
        const u64 a = rng() % 1000000;
        const u64 b = rng() % 1000000;
        const auto ta = TowerNat::from_natural(a, base);
        const auto tb = TowerNat::from_natural(b, base);
        CHECK(add(ta, tb, base).value_u64() == a + b);
        if (a >= b)
            CHECK(sub_small(ta, b, base).value_u64() == a - b);
        const u64 c = rng() % (u64(base) * base);
        CHECK(scale(ta, c, base).value_u64() == a * c);
        const u64 m = 1 + rng() % 10000;
        CHECK(mod_value(ta, m) == a % m);
        const std::uint32_t e = 1 + rng() % 3;
        if (a >= 1)
            CHECK(power_digit_sum(ta, Params(e, base)).value_u64() ==
                  core::power_digit_sum(a, Params(e, base)));
    }
}

TEST_CASE("structured random run forms agree with materialized values") {
    std::mt19937_64 rng(424242);
    for (int iter = 0; iter < 300; ++iter) {
        const std::uint32_t base = 2 + rng() % 15;
        std::vector<TowerNat::Seg> segs;
        const int nseg = 1 + rng() % 6;
        for (int i = 0; i < nseg; ++i)
            segs.push_back({static_cast<std::uint32_t>(rng() % base),
                            tn(rng() % 40)});
        const auto t = TowerNat::runs(base, segs);
        const auto ds = ref_digits(t, base);
        // value check when it fits
        if (auto v = t.value_u64())
            CHECK(*v == ref_value(ds, base));
        // mod check against digit fold
        const u64 m = 1 + rng() % 500;
        u64 want = 0;
        for (auto it = ds.rbegin(); it != ds.rend(); ++it)
            want = (want * base + *it) % m;
        CHECK(mod_value(t, m) == want);
        // digit power sum against digits
        const Params p(2, base);
        u128 tsum = 0;
        for (auto d : ds)
            tsum += u64(d) * d;
        if (!t.is_zero())
            CHECK(power_digit_sum(t, p).value_u64() ==
                  static_cast<u64>(tsum));
        // addition of a machine natural
        const u64 y = rng() % 100000;
        const auto sum = add(t, TowerNat::from_natural(y, base), base);
        const auto sds = ref_digits(sum, base);
        u64 wm = 0;
        for (auto it = sds.rbegin(); it != sds.rend(); ++it)
            wm = (wm * base + *it) % 1000003;
        u64 em = mod_value(t, 1000003);
        em = (em + y) % 1000003;
        CHECK(wm == em);
    }
}
