#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <stdexcept>

#include "doctest.h"
#include "happy/core.hpp"

using namespace happy;
using namespace happy::core;

TEST_CASE("params validation") {
    CHECK_THROWS_AS(Params(0, 10), std::invalid_argument);
    CHECK_THROWS_AS(Params(2, 1), std::invalid_argument);
    CHECK(Params(2, 10) == Params(2, 10));
    CHECK_FALSE(Params(2, 10) == Params(3, 10));
}

TEST_CASE("digits and digit power sums") {
    CHECK(digits_of(0, 10) == std::vector<std::uint32_t>{0});
    CHECK(digits_of(907, 10) == std::vector<std::uint32_t>{7, 0, 9});
    CHECK(digits_of(255, 16) == std::vector<std::uint32_t>{15, 15});

    const Params p(2, 10);
    CHECK(power_digit_sum(7, p) == 49);
    CHECK(power_digit_sum(89, p) == 145);
    CHECK(power_digit_sum(100, p) == 1);
    CHECK(power_digit_sum(999, p) == 243);
    CHECK_THROWS_AS(power_digit_sum(0, p), std::invalid_argument);

    CHECK(power_digit_sum(255, Params(2, 16)) == 450);
    CHECK(power_digit_sum(13, Params(3, 14)) == 2197);
}

TEST_CASE("trajectories") {
    const Params p(2, 10);
    const auto t7 = trajectory(7, p);
    CHECK(t7.terminal == Terminal::ReachedOne);
    CHECK(t7.steps == std::vector<u64>{49, 97, 130, 10, 1});

    const auto t4 = trajectory(4, p);
    CHECK(t4.terminal == Terminal::EnteredCycle);
    CHECK(t4.cycle_entry == 4);
    CHECK(t4.steps == std::vector<u64>{16, 37, 58, 89, 145, 42, 20, 4});
}

TEST_CASE("contraction bound") {
    CHECK(contraction_bound(Params(2, 10)) == 1000);
    CHECK(contraction_bound(Params(3, 10)) == 10000);
    CHECK(contraction_bound(Params(1, 2)) == 4);
    CHECK(contraction_bound(Params(2, 16)) == 4096);
    CHECK(contraction_bound(Params(3, 14)) == 38416);
    CHECK(contraction_bound(Params(2, 12)) == 1728);
}

TEST_CASE("cycle sets") {
    const auto d10 = cycle_set(Params(2, 10));
    CHECK(d10.bound == 1000);
    CHECK(d10.members == std::vector<u64>{1, 4, 16, 20, 37, 42, 58, 89, 145});
    CHECK(d10.contains(145));
    CHECK_FALSE(d10.contains(146));

    CHECK(cycle_set(Params(2, 2)).members == std::vector<u64>{1});
    CHECK(cycle_set(Params(2, 4)).members == std::vector<u64>{1});
    CHECK(cycle_set(Params(1, 2)).members == std::vector<u64>{1});

    CHECK(cycle_set(Params(2, 16)).members ==
          std::vector<u64>{1, 13, 50, 85, 146, 169, 181});

    const auto d314 = cycle_set(Params(3, 14));
    CHECK(d314.members.size() == 49);
    CHECK(d314.members.front() == 1);
    CHECK(d314.members.back() == 4185);

    CHECK(cycle_set(Params(3, 10)).members ==
          std::vector<u64>{1, 55, 133, 136, 153, 160, 217, 244, 250, 352, 370,
                           371, 407, 919, 1459});

    const auto d12 = cycle_set(Params(2, 12));
    CHECK(d12.members ==
          std::vector<u64>{1, 5, 8, 20, 25, 26, 29, 34, 41, 50, 61, 64, 65, 66,
                           80, 100, 104, 125, 128, 164});

    // closure: T maps every member back into the set
    for (const Params p : {Params(2, 10), Params(2, 16), Params(3, 14)}) {
        const auto cs = cycle_set(p);
        for (u64 x : cs.members)
            CHECK(cs.contains(power_digit_sum(x, p)));
    }
}

TEST_CASE("classifier") {
    const Params p(2, 10);
    ClassifierCache cache(p);
    CHECK(cache.is_happy(1));
    CHECK(cache.is_happy(7));
    CHECK(cache.is_happy(10));
    CHECK(cache.is_happy(100));
    CHECK_FALSE(cache.is_happy(4));
    CHECK_FALSE(cache.is_happy(2));
    CHECK(cache.is_happy(44488));
    CHECK(cache.is_happy(44492));
    CHECK_FALSE(cache.is_happy(44493));
    CHECK_THROWS_AS(cache.is_happy(0), std::invalid_argument);

    // base 2: every number is happy
    ClassifierCache c2(Params(2, 2));
    for (u64 n = 1; n <= 64; ++n)
        CHECK(c2.is_happy(n));

    // agreement with trajectory on a dense range
    for (u64 n = 1; n <= 2000; ++n) {
        const bool via_traj =
            trajectory(n, p).terminal == Terminal::ReachedOne;
        CHECK(cache.is_happy(n) == via_traj);
    }
}

TEST_CASE("consecutive-pair condition") {
    CHECK(condition_holds(Params(2, 10)).holds);
    CHECK(condition_holds(Params(2, 16)).holds);
    CHECK(condition_holds(Params(3, 14)).holds);
    CHECK(condition_holds(Params(2, 2)).holds);

    const auto bad = condition_holds(Params(3, 10));
    CHECK_FALSE(bad.holds);
    CHECK(bad.failing_prime == 3);

    const auto bad7 = condition_holds(Params(7, 13));
    CHECK_FALSE(bad7.holds);
    CHECK(bad7.failing_prime == 2);
}

TEST_CASE("residue invariance when the condition fails") {
    CHECK(residue_invariance_witness(Params(3, 10), 3, 10000));
    CHECK_THROWS_AS(residue_invariance_witness(Params(2, 10), 3, 100),
                    std::invalid_argument);
    CHECK_THROWS_AS(residue_invariance_witness(Params(3, 10), 7, 100),
                    std::invalid_argument);
}
