#include "happy/search.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace happy::scan {

namespace {

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::Run: return "run";
        case Mode::Residue: return "residue";
        case Mode::Cover: return "cover";
    }
    return "run";
}

Mode mode_from_name(const std::string& s) {
    if (s == "run") return Mode::Run;
    if (s == "residue") return Mode::Residue;
    if (s == "cover") return Mode::Cover;
    throw std::invalid_argument("unknown scan mode: " + s);
}

}  // namespace

nlohmann::json Checkpoint::to_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["params"] = {{"e", params.e}, {"b", params.b}};
    nlohmann::json sm;
    sm["kind"] = mode_name(mode);
    if (mode == Mode::Run)
        sm["length"] = run_length;
    else if (mode == Mode::Residue) {
        sm["a"] = residue;
        sm["modulus"] = modulus;
    } else {
        sm["offsets"] = cover_offsets;
    }
    j["scan_mode"] = sm;
    j["next_n"] = next_n;
    if (open_run_start)
        j["open_run_start"] = *open_run_start;
    else
        j["open_run_start"] = nullptr;
    j["open_run_len"] = open_run_len;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : found)
        arr.push_back({{"start", r.start}, {"length", r.length}});
    j["found"] = arr;
    return j;
}

Checkpoint Checkpoint::from_json(const nlohmann::json& j) {
    if (j.at("format_version").get<int>() != 1)
        throw std::invalid_argument("unsupported checkpoint format_version");
    Checkpoint cp;
    cp.params = Params(j.at("params").at("e").get<std::uint32_t>(),
                       j.at("params").at("b").get<std::uint32_t>());
    const auto& sm = j.at("scan_mode");
    cp.mode = mode_from_name(sm.at("kind").get<std::string>());
    if (cp.mode == Mode::Run)
        cp.run_length = sm.at("length").get<u64>();
    else if (cp.mode == Mode::Residue) {
        cp.residue = sm.at("a").get<u64>();
        cp.modulus = sm.at("modulus").get<u64>();
    } else {
        cp.cover_offsets = sm.at("offsets").get<std::vector<u64>>();
    }
    cp.next_n = j.at("next_n").get<u64>();
    if (!j.at("open_run_start").is_null())
        cp.open_run_start = j.at("open_run_start").get<u64>();
    cp.open_run_len = j.at("open_run_len").get<u64>();
    for (const auto& r : j.at("found"))
        cp.found.push_back({r.at("start").get<u64>(), r.at("length").get<u64>()});
    return cp;
}

void Checkpoint::save(const std::string& path) const {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write checkpoint: " + tmp);
        out << to_json().dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read checkpoint: " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

Happiness::Happiness(const Params& params, u64 bound)
    : params_(params),
      cache_(params, [&] {
          // cap covers every possible T value over the scanned range,
          // with slack for probes slightly past the bound
          u64 digits = 0;
          u64 n = bound;
          do {
              ++digits;
              n /= params.b;
          } while (n);
          u64 pw = 1;
          for (std::uint32_t i = 0; i < params.e; ++i)
              pw *= params.b - 1;
          return std::max(core::contraction_bound(params), pw * (digits + 4) + 2);
      }()) {
    // low-digit block table; d = 4 digits balances size against speed
    const unsigned d = 4;
    block_size_ = 1;
    for (unsigned i = 0; i < d && block_size_ <= (u64{1} << 40); ++i)
        block_size_ *= params.b;
    low_t_.resize(block_size_);
    low_t_[0] = 0;
    std::vector<u64> pw(params.b);
    for (u64 dig = 0; dig < params.b; ++dig) {
        u64 v = 1;
        for (std::uint32_t i = 0; i < params.e; ++i)
            v *= dig;
        pw[dig] = v;
    }
    for (u64 n = 1; n < block_size_; ++n)
        low_t_[n] = low_t_[n / params.b] + pw[n % params.b];
}

u64 Happiness::t_value(u64 n) const {
    u64 sum = 0;
    while (n) {
        sum += low_t_[n % block_size_];
        n /= block_size_;
    }
    return sum;
}

bool Happiness::operator()(u64 n) const {
    if (n == 0)
        throw std::invalid_argument("happiness of 0 is undefined");
    if (n == 1)
        return true;
    u64 t = t_value(n);
    while (t >= cache_.cap())
        t = t_value(t);
    return cache_.is_happy(t);
}

namespace {

// Per-chunk scan fragments; merged sequentially so the outcome is
// independent of chunking and thread scheduling.
struct ChunkResult {
    u64 lo = 0, hi = 0;          // scanned interval [lo, hi)
    bool all_happy = false;      // whole chunk happy
    u64 prefix = 0;              // happy run touching lo
    u64 suffix = 0;              // happy run touching hi-1 (when !all_happy)
    std::vector<RunRecord> inner;  // maximal runs touching neither end
    std::optional<u64> first_match;  // Residue / Cover modes
};

struct ScanPlan {
    Mode mode;
    u64 run_length = 0;
    u64 residue = 0, modulus = 0;
    std::vector<u64> cover_offsets;
};

ChunkResult process_chunk(const Happiness& happy, const ScanPlan& plan, u64 lo,
                          u64 hi) {
    ChunkResult res;
    res.lo = lo;
    res.hi = hi;
    if (plan.mode == Mode::Residue) {
        u64 start = lo;
        const u64 M = plan.modulus;
        u64 rem = start % M;
        u64 first = start + (plan.residue + M - rem) % M;
        if (first == 0)
            first = M;  // n = 0 is outside the domain
        for (u64 n = first; n < hi; n += M) {
            if (happy(n)) {
                res.first_match = n;
                break;
            }
        }
        return res;
    }
    if (plan.mode == Mode::Cover) {
        for (u64 n = std::max<u64>(lo, 1); n < hi; ++n) {
            bool ok = true;
            for (u64 x : plan.cover_offsets) {
                if (!happy(n + x)) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                res.first_match = n;
                break;
            }
        }
        return res;
    }
    // Run mode: record the happy-run structure of the chunk.
    u64 open_start = 0, open_len = 0;
    bool prefix_open = true;
    for (u64 n = std::max<u64>(lo, 1); n < hi; ++n) {
        if (happy(n)) {
            if (open_len == 0)
                open_start = n;
            ++open_len;
            continue;
        }
        if (open_len) {
            if (prefix_open && open_start == lo)
                res.prefix = open_len;
            else
                res.inner.push_back({open_start, open_len});
            prefix_open = false;
            open_len = 0;
        } else {
            prefix_open = false;
        }
    }
    if (open_len) {
        if (prefix_open && open_start == lo) {
            res.all_happy = true;
            res.prefix = open_len;
        } else {
            res.suffix = open_len;
        }
    }
    return res;
}

// Folds chunk results, in order, into the running scan state.
struct Merger {
    const ScanPlan& plan;
    std::optional<u64> open_start;
    u64 open_len = 0;
    std::optional<RunRecord> result;
    std::optional<u64> match;

    void note_run(u64 start, u64 len) {
        if (!result && len >= plan.run_length)
            result = RunRecord{start, plan.run_length};
    }

    void feed(const ChunkResult& c) {
        if (plan.mode != Mode::Run) {
            if (!match && c.first_match)
                match = c.first_match;
            return;
        }
        if (c.all_happy) {
            if (!open_start) {
                open_start = std::max<u64>(c.lo, 1);
                open_len = c.prefix;
            } else {
                open_len += c.hi - c.lo;
            }
            note_run(*open_start, open_len);
            return;
        }
        // prefix closes whatever run was open
        if (open_start) {
            note_run(*open_start, open_len + c.prefix);
        } else if (c.prefix) {
            note_run(std::max<u64>(c.lo, 1), c.prefix);
        }
        open_start.reset();
        open_len = 0;
        for (const auto& r : c.inner)
            note_run(r.start, r.length);
        if (c.suffix) {
            open_start = c.hi - c.suffix;
            open_len = c.suffix;
            note_run(*open_start, open_len);
        }
    }

    bool done() const {
        return plan.mode == Mode::Run ? result.has_value() : match.has_value();
    }
};

}  // namespace

ScanOutcome parallel_scan(const Params& params, Mode mode, u64 mode_arg,
                          const std::vector<u64>& cover_offsets, u64 bound,
                          const ScanOptions& opts) {
    ScanPlan plan;
    plan.mode = mode;
    if (mode == Mode::Run)
        plan.run_length = mode_arg;
    plan.cover_offsets = cover_offsets;
    if (mode == Mode::Residue) {
        if (cover_offsets.size() != 1 || cover_offsets[0] < 1)
            throw std::invalid_argument("residue scan needs {modulus} in offsets");
        plan.modulus = cover_offsets[0];
        plan.cover_offsets.clear();
        plan.residue = mode_arg % plan.modulus;
    }
    if (mode == Mode::Run && plan.run_length == 0)
        throw std::invalid_argument("run length must be >= 1");

    Checkpoint cp;
    cp.params = params;
    cp.mode = mode;
    cp.run_length = plan.run_length;
    cp.residue = plan.residue;
    cp.modulus = plan.modulus;
    cp.cover_offsets = plan.cover_offsets;
    cp.next_n = 1;

    Merger merger{plan};
    if (!opts.resume_path.empty()) {
        Checkpoint prev = Checkpoint::load(opts.resume_path);
        if (!(prev.params == params) || prev.mode != mode)
            throw std::invalid_argument("checkpoint does not match this scan");
        cp.next_n = prev.next_n;
        merger.open_start = prev.open_run_start;
        merger.open_len = prev.open_run_len;
        if (!prev.found.empty()) {
            merger.result = prev.found.front();
            cp.found = prev.found;
        }
    }

    // The scan probes n+x for cover offsets; keep the classifier cap safe.
    u64 probe_max = bound;
    for (u64 x : plan.cover_offsets)
        probe_max = std::max(probe_max, bound + x);
    Happiness happy(params, probe_max);

    const u64 chunk = std::max<u64>(1, opts.chunk_size);
    const unsigned workers = std::max(1u, opts.workers);
    u64 last_save = cp.next_n;

    auto maybe_checkpoint = [&](u64 frontier, const Merger& m) {
        if (opts.checkpoint_path.empty())
            return;
        if (frontier - last_save < opts.checkpoint_every && frontier <= bound)
            return;
        cp.next_n = frontier;
        cp.open_run_start = m.open_start;
        cp.open_run_len = m.open_len;
        cp.found.clear();
        if (m.result)
            cp.found.push_back(*m.result);
        cp.save(opts.checkpoint_path);
        last_save = frontier;
    };

    u64 frontier = cp.next_n;
    const u64 end = bound + 1;  // scan domain is [1, bound]
    while (frontier < end && !merger.done()) {
        // one batch of chunks
        const u64 batch_chunks = workers == 1 ? 1 : u64{workers} * 4;
        std::vector<std::pair<u64, u64>> ranges;
        u64 pos = frontier;
        for (u64 i = 0; i < batch_chunks && pos < end; ++i) {
            u64 hi = pos + (chunk - pos % chunk);  // align to chunk grid
            hi = std::min(hi, end);
            ranges.emplace_back(pos, hi);
            pos = hi;
        }
        std::vector<ChunkResult> results(ranges.size());
        if (workers == 1 || ranges.size() == 1) {
            for (std::size_t i = 0; i < ranges.size(); ++i)
                results[i] = process_chunk(happy, plan, ranges[i].first, ranges[i].second);
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    while (true) {
                        std::size_t i = next.fetch_add(1);
                        if (i >= ranges.size())
                            return;
                        results[i] =
                            process_chunk(happy, plan, ranges[i].first, ranges[i].second);
                    }
                });
            }
            for (auto& t : pool)
                t.join();
        }
        for (std::size_t i = 0; i < results.size(); ++i) {
            merger.feed(results[i]);
            frontier = results[i].hi;
            if (merger.done())
                break;
            maybe_checkpoint(frontier, merger);
        }
    }

    ScanOutcome out;
    out.run = merger.result;
    out.value = merger.match;
    cp.next_n = merger.done() ? frontier : end;
    cp.open_run_start = merger.open_start;
    cp.open_run_len = merger.open_len;
    cp.found.clear();
    if (merger.result)
        cp.found.push_back(*merger.result);
    if (!opts.checkpoint_path.empty())
        cp.save(opts.checkpoint_path);
    out.final_state = cp;
    return out;
}

ScanOutcome find_least_run(const Params& params, u64 m, u64 bound,
                           const ScanOptions& opts) {
    return parallel_scan(params, Mode::Run, m, {}, bound, opts);
}

std::optional<u64> find_happy_in_residue(u64 a, u64 modulus, const Happiness& happy,
                                         u64 bound) {
    if (modulus == 0)
        throw std::invalid_argument("modulus must be >= 1");
    a %= modulus;
    u64 n = a == 0 ? modulus : a;
    for (; n <= bound; n += modulus)
        if (happy(n))
            return n;
    return std::nullopt;
}

std::optional<u64> find_happy_in_residue(u64 a, u64 modulus, const Params& params,
                                         u64 bound) {
    Happiness happy(params, bound);
    return find_happy_in_residue(a, modulus, happy, bound);
}

std::optional<u64> find_cover_h(const Happiness& happy, const core::CycleSet& cycle,
                                u64 bound) {
    for (u64 h = 1; h <= bound; ++h) {
        bool ok = true;
        for (u64 x : cycle.members) {
            if (!happy(h + x)) {
                ok = false;
                break;
            }
        }
        if (ok)
            return h;
    }
    return std::nullopt;
}

std::optional<u64> find_cover_h(const Params& params, const core::CycleSet& cycle,
                                u64 bound) {
    u64 probe_max = bound + (cycle.members.empty() ? 0 : cycle.members.back());
    Happiness happy(params, probe_max);
    return find_cover_h(happy, cycle, bound);
}

}  // namespace happy::scan
