#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "happy/constructor.hpp"
#include "happy/core.hpp"
#include "happy/params.hpp"
#include "happy/search.hpp"
#include "happy/towernat.hpp"
#include "json.hpp"

namespace {

using happy::Params;
using happy::u64;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitNotFound = 1;
constexpr int kExitBadParams = 2;
constexpr int kExitIo = 3;

struct Common {
    std::uint32_t e = 0;
    std::uint32_t b = 0;
    std::string format = "text";
    int depth_limit = 0;

    Params params() const { return Params(e, b); }
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--e", c.e, "digit power exponent")->required();
    cmd->add_option("--b", c.b, "numeral base")->required();
    cmd->add_option("--format", c.format, "output format")
        ->check(CLI::IsMember({"text", "json", "csv"}))
        ->capture_default_str();
    cmd->add_option("--depth-limit", c.depth_limit,
                    "symbolic nesting depth limit (0 = default)");
}

unsigned default_workers() {
    if (const char* env = std::getenv("HAPPY_THREADS")) {
        const long v = std::atol(env);
        if (v >= 1)
            return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

std::string show_witness(const happy::sym::TowerNat& w, std::uint32_t b) {
    if (auto v = w.value_u64())
        return std::to_string(*v);
    if (auto digits = happy::sym::materialize(w, 4096, b))
        return *digits;
    return w.to_json().dump();
}

int write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        std::cerr << "cannot write " << path << "\n";
        return kExitIo;
    }
    out << j.dump(2) << "\n";
    return out ? kExitOk : kExitIo;
}

int run_check_condition(const Common& c) {
    const auto res = happy::core::condition_holds(c.params());
    if (c.format == "json") {
        json j{{"holds", res.holds}};
        if (!res.holds)
            j["failing_prime"] = res.failing_prime;
        std::cout << j.dump() << "\n";
    } else if (res.holds) {
        std::cout << "holds\n";
    } else {
        std::cout << "fails: p=" << res.failing_prime << "\n";
    }
    return res.holds ? kExitOk : kExitBadParams;
}

int run_classify(const Common& c, u64 n) {
    const auto traj = happy::core::trajectory(n, c.params());
    const bool happy_n = traj.terminal == happy::core::Terminal::ReachedOne;
    if (c.format == "json") {
        json j{{"n", n},
               {"happy", happy_n},
               {"trajectory", traj.steps}};
        if (!happy_n)
            j["cycle_entry"] = traj.cycle_entry;
        std::cout << j.dump() << "\n";
    } else if (c.format == "csv") {
        std::cout << n << "," << (happy_n ? "happy" : "unhappy") << "\n";
    } else {
        std::cout << n << ": " << (happy_n ? "happy" : "unhappy") << "\n";
        std::cout << "trajectory:";
        std::cout << " " << n;
        for (u64 v : traj.steps)
            std::cout << " " << v;
        std::cout << "\n";
        if (!happy_n)
            std::cout << "cycle entered at " << traj.cycle_entry << "\n";
    }
    return kExitOk;
}

int run_cycle_set(const Common& c) {
    const auto cs = happy::core::cycle_set(c.params());
    if (c.format == "json") {
        std::cout << json{{"bound", cs.bound}, {"members", cs.members}}.dump()
                  << "\n";
    } else if (c.format == "csv") {
        for (u64 m : cs.members)
            std::cout << m << "\n";
    } else {
        std::cout << "contraction bound: " << cs.bound << "\n";
        std::cout << "members:";
        for (u64 m : cs.members)
            std::cout << " " << m;
        std::cout << "\n";
    }
    return kExitOk;
}

int run_find_runs(const Common& c, u64 len, u64 bound, unsigned workers,
                  const std::string& checkpoint, u64 every,
                  const std::string& resume) {
    happy::scan::ScanOptions opts;
    opts.workers = workers;
    opts.checkpoint_path = checkpoint;
    opts.checkpoint_every = every;
    opts.resume_path = resume;
    const auto outcome = happy::scan::find_least_run(c.params(), len, bound, opts);
    if (!outcome.run) {
        if (c.format == "json")
            std::cout << json{{"found", false}, {"bound", bound}}.dump() << "\n";
        else
            std::cout << "none below bound\n";
        return kExitNotFound;
    }
    if (c.format == "text") {
        std::cout << "run of " << outcome.run->length << " starting at "
                  << outcome.run->start << "\n";
    } else if (c.format == "csv") {
        std::cout << outcome.run->start << "," << outcome.run->length << "\n";
    } else {
        std::cout << json{{"start", outcome.run->start},
                          {"length", outcome.run->length},
                          {"params", {{"e", c.e}, {"b", c.b}}}}
                         .dump()
                  << "\n";
    }
    return kExitOk;
}

int emit_certificate_result(const Common& c, const happy::ctor::Certificate& cert,
                            const std::string& certify_path) {
    if (!certify_path.empty()) {
        const int rc = write_json_file(certify_path, cert.to_json());
        if (rc != kExitOk)
            return rc;
    }
    if (c.format == "json") {
        std::cout << json{{"witness", cert.witness.to_json()},
                          {"goal", cert.goal}}
                         .dump()
                  << "\n";
    } else {
        std::cout << "witness: " << show_witness(cert.witness, c.b) << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"generalized happy number toolkit"};
    app.require_subcommand(1);

    Common c_cond, c_classify, c_cycle, c_runs, c_res, c_cover, c_certify;
    u64 classify_n = 0;
    u64 runs_len = 2, runs_max = 10'000'000, runs_every = 1'000'000;
    unsigned runs_workers = default_workers();
    std::string runs_checkpoint, runs_resume;
    u64 res_a = 0, res_max = 10'000'000;
    bool res_lift = false, res_construct_only = false;
    std::string res_certify;
    u64 cover_max = 10'000'000;
    bool cover_construct_only = false;
    std::string cover_certify;
    u64 certify_len = 2, certify_max = 10'000'000;
    bool certify_construct_only = false;
    std::string certify_out;
    std::string verify_path;
    std::string verify_format = "text";

    auto* cond = app.add_subcommand("check-condition",
                                    "test the consecutive-happy criterion");
    add_common(cond, c_cond);

    auto* classify = app.add_subcommand("classify", "classify one number");
    classify->add_option("n", classify_n, "number to classify")->required();
    add_common(classify, c_classify);

    auto* cycle = app.add_subcommand("cycle-set", "print the cycle set");
    add_common(cycle, c_cycle);

    auto* runs = app.add_subcommand("find-runs", "scan for consecutive happy runs");
    add_common(runs, c_runs);
    runs->add_option("--len", runs_len, "run length")->required();
    runs->add_option("--max", runs_max, "scan bound")->capture_default_str();
    runs->add_option("--workers", runs_workers, "worker threads");
    runs->add_option("--checkpoint", runs_checkpoint, "checkpoint file path");
    runs->add_option("--every", runs_every, "checkpoint interval");
    runs->add_option("--resume", runs_resume, "resume from checkpoint");

    auto* res = app.add_subcommand("residue-witness",
                                   "happy witness in a residue class");
    add_common(res, c_res);
    res->add_option("--a", res_a, "target residue")->required();
    res->add_flag("--lift", res_lift, "use modulus (b-1)^e instead of b-1");
    res->add_option("--max", res_max, "search bound")->capture_default_str();
    res->add_flag("--construct-only", res_construct_only,
                  "skip search, force the constructive pipeline");
    res->add_option("--certify", res_certify, "write certificate to this path");

    auto* cover = app.add_subcommand("cover", "witness covering the cycle set");
    add_common(cover, c_cover);
    cover->add_option("--max", cover_max, "search bound")->capture_default_str();
    cover->add_flag("--construct-only", cover_construct_only,
                    "skip search, force the constructive pipeline");
    cover->add_option("--certify", cover_certify, "write certificate to this path");

    auto* certify = app.add_subcommand("certify-run",
                                       "emit a certificate for a happy run");
    add_common(certify, c_certify);
    certify->add_option("--len", certify_len, "run length")->required();
    certify->add_option("--max", certify_max, "search bound for concrete shortcuts")
        ->capture_default_str();
    certify->add_flag("--construct-only", certify_construct_only,
                      "skip search, force the constructive pipeline");
    certify->add_option("--out", certify_out, "certificate output path")->required();

    auto* verify = app.add_subcommand("verify", "verify a certificate file");
    verify->add_option("path", verify_path, "certificate file")->required();
    verify->add_option("--format", verify_format, "output format")
        ->check(CLI::IsMember({"text", "json", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)  // --help and friends
            return app.exit(e);
        app.exit(e);
        return kExitBadParams;
    }

    try {
        if (cond->parsed())
            return run_check_condition(c_cond);
        if (classify->parsed())
            return run_classify(c_classify, classify_n);
        if (cycle->parsed())
            return run_cycle_set(c_cycle);
        if (runs->parsed())
            return run_find_runs(c_runs, runs_len, runs_max, runs_workers,
                                 runs_checkpoint, runs_every, runs_resume);
        if (res->parsed()) {
            happy::ctor::BuildOptions opts;
            opts.search_bound = res_max;
            opts.construct_only = res_construct_only;
            if (c_res.depth_limit > 0)
                opts.depth_ceiling = c_res.depth_limit;
            happy::ctor::Constructor ctor(c_res.params(), opts);
            const auto cert = res_lift ? ctor.residue_witness_lifted(res_a)
                                       : ctor.residue_witness(res_a);
            return emit_certificate_result(c_res, cert, res_certify);
        }
        if (cover->parsed()) {
            happy::ctor::BuildOptions opts;
            opts.search_bound = cover_max;
            opts.construct_only = cover_construct_only;
            if (c_cover.depth_limit > 0)
                opts.depth_ceiling = c_cover.depth_limit;
            happy::ctor::Constructor ctor(c_cover.params(), opts);
            return emit_certificate_result(c_cover, ctor.cover_witness(),
                                           cover_certify);
        }
        if (certify->parsed()) {
            const auto condres = happy::core::condition_holds(c_certify.params());
            if (!condres) {
                std::cerr << "no consecutive happy numbers exist: every happy "
                             "number is 1 mod "
                          << condres.failing_prime << "\n";
                return kExitBadParams;
            }
            happy::ctor::BuildOptions opts;
            opts.search_bound = certify_max;
            opts.construct_only = certify_construct_only;
            if (c_certify.depth_limit > 0)
                opts.depth_ceiling = c_certify.depth_limit;
            happy::ctor::Constructor ctor(c_certify.params(), opts);
            const auto cert = ctor.run_witness(certify_len);
            const int rc = write_json_file(certify_out, cert.to_json());
            if (rc != kExitOk)
                return rc;
            std::cout << "certificate written to " << certify_out << "\n";
            return kExitOk;
        }
        if (verify->parsed()) {
            std::ifstream in(verify_path);
            if (!in) {
                std::cerr << "cannot read " << verify_path << "\n";
                return kExitIo;
            }
            json j;
            try {
                in >> j;
            } catch (const std::exception& ex) {
                std::cerr << "malformed certificate: " << ex.what() << "\n";
                return kExitNotFound;
            }
            const auto result = happy::ctor::verify_certificate(j);
            if (verify_format == "json") {
                std::cout << json{{"ok", result.ok},
                                  {"diagnostics", result.diagnostics}}
                                 .dump()
                          << "\n";
            } else {
                std::cout << (result.ok ? "valid" : "invalid") << "\n";
                for (const auto& d : result.diagnostics)
                    std::cout << d << "\n";
            }
            return result.ok ? kExitOk : kExitNotFound;
        }
    } catch (const std::invalid_argument& ex) {
        std::cerr << ex.what() << "\n";
        return kExitBadParams;
    } catch (const std::ios_base::failure& ex) {
        std::cerr << ex.what() << "\n";
        return kExitIo;
    } catch (const std::exception& ex) {
        std::cerr << ex.what() << "\n";
        return kExitBadParams;
    }
    return kExitBadParams;
}
