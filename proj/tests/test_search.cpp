#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "happy/core.hpp"
#include "happy/search.hpp"

using namespace happy;
using namespace happy::scan;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) {
        path = (std::filesystem::temp_directory_path() / name).string();
        std::remove(path.c_str());
    }
    ~TempFile() { std::remove(path.c_str()); }
};

std::optional<RunRecord> naive_least_run(const Params& p, u64 m, u64 bound) {
    core::ClassifierCache cache(p);
    u64 len = 0;
    for (u64 n = 1; n <= bound; ++n) {
        if (cache.is_happy(n)) {
            ++len;
            if (len >= m)
                return RunRecord{n - m + 1, m};
        } else {
            len = 0;
        }
    }
    return std::nullopt;
}

}  // namespace

TEST_CASE("table-assisted classification matches the direct classifier") {
    for (const Params p : {Params(2, 10), Params(2, 16), Params(3, 14)}) {
        Happiness happy(p, 1 << 20);
        core::ClassifierCache cache(p);
        std::mt19937_64 rng(7);
        for (int i = 0; i < 20000; ++i) {
            const u64 n = 1 + rng() % (1 << 20);
            CHECK(happy(n) == cache.is_happy(n));
            CHECK(happy.t_value(n) == core::power_digit_sum(n, p));
        }
    }
}

TEST_CASE("least runs agree with a naive scan") {
    for (const Params p : {Params(2, 10), Params(2, 16), Params(2, 12)}) {
        for (u64 m = 1; m <= 6; ++m) {
            const auto naive = naive_least_run(p, m, 100000);
            const auto fast = find_least_run(p, m, 100000);
            CHECK(fast.run == naive);
        }
    }
}

TEST_CASE("known least runs") {
    const auto r5 = find_least_run(Params(2, 10), 5, 100000);
    REQUIRE(r5.run.has_value());
    CHECK(r5.run->start == 44488);
    CHECK(r5.run->length == 5);

    // no consecutive pair in base 12 below 10^6
    CHECK_FALSE(find_least_run(Params(2, 12), 2, 1000000).run.has_value());
}

TEST_CASE("residue class search") {
    CHECK(find_happy_in_residue(7, 9, Params(2, 10), 1000) == 7);
    CHECK(find_happy_in_residue(1, 9, Params(2, 10), 10) == 1);
    CHECK(find_happy_in_residue(36, 81, Params(2, 10), 1000000) == 1251);
    // condition fails for (3,10): happy numbers are never 0 mod 3
    CHECK_FALSE(
        find_happy_in_residue(0, 3, Params(3, 10), 100000).has_value());
}

TEST_CASE("cover search") {
    const auto cs2 = core::cycle_set(Params(2, 2));
    CHECK(find_cover_h(Params(2, 2), cs2, 100) == 1);
    const auto cs16 = core::cycle_set(Params(2, 16));
    CHECK(find_cover_h(Params(2, 16), cs16, 100000) == 51143);
}

TEST_CASE("determinism across chunking and worker counts") {
    const Params p(2, 10);
    const auto reference = find_least_run(p, 4, 300000);
    for (u64 chunk : {1000ull, 7000ull, 10000ull, 65536ull}) {
        for (unsigned workers : {1u, 2u, 8u}) {
            ScanOptions opts;
            opts.chunk_size = chunk;
            opts.workers = workers;
            const auto got = find_least_run(p, 4, 300000, opts);
            CHECK(got.run == reference.run);
        }
    }
}

TEST_CASE("checkpoint json round trip") {
    Checkpoint cp;
    cp.params = Params(2, 16);
    cp.mode = Mode::Run;
    cp.run_length = 9;
    cp.next_n = 123456;
    cp.open_run_start = 123450;
    cp.open_run_len = 6;
    cp.found.push_back({100, 9});
    const auto j = cp.to_json();
    CHECK(j.at("format_version") == 1);
    const auto back = Checkpoint::from_json(j);
    CHECK(back.params == cp.params);
    CHECK(back.next_n == cp.next_n);
    CHECK(back.open_run_start == cp.open_run_start);
    CHECK(back.open_run_len == cp.open_run_len);
    CHECK(back.found == cp.found);
    // open-run invariant
    CHECK(*cp.open_run_start + cp.open_run_len == cp.next_n);
}

TEST_CASE("interrupted scans resume identically") {
    const Params p(2, 10);
    const auto reference = find_least_run(p, 5, 100000);

    TempFile cp_path("happy_scan_test.json");
    // phase 1: scan only a prefix, leaving a checkpoint behind
    ScanOptions first;
    first.checkpoint_path = cp_path.path;
    first.checkpoint_every = 10000;
    const auto partial = find_least_run(p, 5, 30000, first);
    CHECK_FALSE(partial.run.has_value());
    CHECK(std::filesystem::exists(cp_path.path));

    // phase 2: resume to the full bound
    ScanOptions second;
    second.resume_path = cp_path.path;
    const auto resumed = find_least_run(p, 5, 100000, second);
    CHECK(resumed.run == reference.run);

    // resuming a finished scan returns the same record
    TempFile done_path("happy_scan_done.json");
    ScanOptions third;
    third.checkpoint_path = done_path.path;
    const auto full = find_least_run(p, 5, 100000, third);
    CHECK(full.run == reference.run);
    ScanOptions fourth;
    fourth.resume_path = done_path.path;
    const auto again = find_least_run(p, 5, 100000, fourth);
    CHECK(again.run == reference.run);
}

TEST_CASE("checkpoint rejects mismatched scans") {
    TempFile cp_path("happy_scan_mismatch.json");
    ScanOptions opts;
    opts.checkpoint_path = cp_path.path;
    (void)find_least_run(Params(2, 10), 2, 1000, opts);
    ScanOptions resume;
    resume.resume_path = cp_path.path;
    CHECK_THROWS_AS((void)find_least_run(Params(2, 16), 2, 1000, resume),
                    std::invalid_argument);
}
