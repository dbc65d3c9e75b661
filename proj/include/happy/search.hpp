#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "happy/core.hpp"
#include "happy/params.hpp"
#include "json.hpp"

namespace happy::scan {

struct RunRecord {
    u64 start = 0;
    u64 length = 0;

    bool operator==(const RunRecord&) const = default;
};

enum class Mode { Run, Residue, Cover };

// Resumable scan state. Serialized as JSON; written atomically
// (temp file + rename) so an interrupted scan never corrupts it.
struct Checkpoint {
    Params params{1, 2};
    Mode mode = Mode::Run;
    u64 run_length = 0;               // Run mode
    u64 residue = 0, modulus = 0;     // Residue mode
    std::vector<u64> cover_offsets;   // Cover mode: the x's to add
    u64 next_n = 1;
    std::optional<u64> open_run_start;
    u64 open_run_len = 0;
    std::vector<RunRecord> found;

    nlohmann::json to_json() const;
    static Checkpoint from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);
};

// Fast happiness test: T(n) is evaluated blockwise through a
// precomputed low-digit table, then classified through a frozen
// happy table over the (small) range of possible T values.
class Happiness {
public:
    // `bound` is the largest value the scan will probe (plus slack).
    Happiness(const Params& params, u64 bound);

    bool operator()(u64 n) const;
    u64 t_value(u64 n) const;  // table-assisted power digit sum

    const core::ClassifierCache& cache() const { return cache_; }
    const Params& params() const { return params_; }

private:
    Params params_;
    u64 block_size_;              // b^d
    std::vector<u64> low_t_;      // T over [0, b^d)
    core::ClassifierCache cache_;
};

struct ScanOptions {
    u64 chunk_size = 1u << 16;
    unsigned workers = 1;
    std::string checkpoint_path;  // empty: no checkpointing
    u64 checkpoint_every = 1'000'000;
    std::string resume_path;  // empty: fresh scan
};

struct ScanOutcome {
    std::optional<RunRecord> run;  // Run mode result
    std::optional<u64> value;      // Residue / Cover mode result
    Checkpoint final_state;
};

// Least start s <= bound-m+1 with s..s+m-1 all happy.
ScanOutcome find_least_run(const Params& params, u64 m, u64 bound,
                           const ScanOptions& opts = {});

// Least happy h <= bound with h == a (mod modulus).
std::optional<u64> find_happy_in_residue(u64 a, u64 modulus, const Params& params,
                                         u64 bound);
std::optional<u64> find_happy_in_residue(u64 a, u64 modulus, const Happiness& happy,
                                         u64 bound);

// Least h <= bound with h + x happy for every x in D.
std::optional<u64> find_cover_h(const Params& params, const core::CycleSet& cycle,
                                u64 bound);
std::optional<u64> find_cover_h(const Happiness& happy, const core::CycleSet& cycle,
                                u64 bound);

// Chunked scan with a deterministic single-threaded merge: results are
// identical to a sequential scan for every chunk size / worker count.
ScanOutcome parallel_scan(const Params& params, Mode mode, u64 mode_arg,
                          const std::vector<u64>& cover_offsets, u64 bound,
                          const ScanOptions& opts);

}  // namespace happy::scan
