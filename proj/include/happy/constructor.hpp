#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "happy/core.hpp"
#include "happy/params.hpp"
#include "happy/towernat.hpp"
#include "json.hpp"

namespace happy::ctor {

using sym::TowerNat;

// Largest power digit sum attained on [1, m]; exact, via a
// most-significant-first digit walk (no scanning).
u64 max_digit_power_sum_upto(u64 m, const Params& params);
u64 max_digit_power_sum_upto(const TowerNat& m, const Params& params);

// h * b^(t*phi((b-1)^e)) for the least t making the value exceed
// min_value (or symbolic). Preserves happiness and the residue
// class mod (b-1)^e.
TowerNat inflate_happy(const TowerNat& h, const Params& params, u64 min_value);

// Residue descent mod b-1: the step map sending class a to class
// a - g_i + g_i^e per odd-prime-power coordinate of b-1, with
// coordinates already at 1 frozen there. Iterating reaches 1.
class ResidueDescent {
public:
    explicit ResidueDescent(const Params& params);  // rejects failing condition

    u64 step(u64 a) const;                  // one application, result in [0, b-2]
    u64 combined_root(u64 a) const;         // the digit g used to step from a
    std::vector<u64> orbit(u64 a) const;    // a, step(a), ..., first value == 1
    u64 steps_to_one(u64 a) const;          // orbit length - 1

    const std::vector<u64>& prime_powers() const { return prime_powers_; }
    const std::vector<u64>& roots() const { return roots_; }

private:
    Params params_;
    std::vector<u64> prime_powers_;  // p_i^alpha_i over b-1
    std::vector<u64> roots_;         // least primitive root of each
};

struct BuildOptions {
    u64 search_bound = 10'000'000;  // bounded concrete search at provider points
    bool construct_only = false;    // skip the search shortcuts
    int depth_ceiling = 4096;       // symbolic depth allowance during construction
};

struct Certificate {
    Params params{1, 2};
    nlohmann::json goal;
    nlohmann::json steps = nlohmann::json::array();
    TowerNat witness;

    nlohmann::json to_json() const;
    static Certificate from_json(const nlohmann::json& j);
};

struct VerifyResult {
    bool ok = false;
    std::vector<std::string> diagnostics;

    explicit operator bool() const { return ok; }
};

// Independent structural re-check of a certificate: every step is an
// instance of a small closed rule set (direct happiness of machine
// naturals, zero-append, pad identities, digit-run carry collapse,
// congruences via symbolic mod), and the final step must discharge
// the stated goal.
VerifyResult verify_certificate(const nlohmann::json& cert);

class Constructor {
public:
    explicit Constructor(const Params& params, BuildOptions opts = {});

    // happy witness == a (mod b-1)
    Certificate residue_witness(u64 a);
    // happy witness == a (mod (b-1)^e)
    Certificate residue_witness_lifted(u64 a);
    // witness l with l and l+x both happy
    Certificate pair_witness(u64 x);
    // witness h with h+x happy for every cycle set member x
    Certificate cover_witness();
    // witness l with l+1, ..., l+m all happy
    Certificate run_witness(u64 m);

    const core::CycleSet& cycle() const { return cycle_; }
    const BuildOptions& options() const { return opts_; }

private:
    struct Emitted {
        std::size_t id;
        TowerNat value;
    };

    // digit-run carry-collapse witness: value and value + x are happy,
    // value + x = b^(s+k), value = (b^s - x) plus k digits b-1 at shift s
    struct PairParts {
        std::size_t id = 0;
        TowerNat value;
        u64 x = 0, s = 0, k = 0, xstar = 0, h = 0;
    };

    Certificate begin(nlohmann::json goal) const;

    Emitted emit_leaf(Certificate& cert, u64 n);
    Emitted emit_shift(Certificate& cert, const Emitted& premise, u64 zeros);
    Emitted emit_congruence(Certificate& cert, const Emitted& premise, u64 modulus);
    // happy target == descent-step(a); returns happy witness == a (mod b-1)
    Emitted emit_residue_step(Certificate& cert, const Emitted& target, u64 a);
    Emitted emit_lift(Certificate& cert, const Emitted& happy_h, u64 a);
    PairParts emit_pair(Certificate& cert, u64 x);  // witness l; l, l+x happy
    // cover over S (sorted, S[0] == 1); returns fact h_S with h_S+y happy, y in S
    Emitted emit_cover(Certificate& cert, const std::vector<u64>& S);
    Emitted emit_pad_chain(Certificate& cert, const TowerNat& x, const TowerNat& m,
                           u64 r);
    Emitted emit_residue_chain(Certificate& cert, u64 a);  // descent to class a

    u64 steps_to_cycle(u64 n) const;  // least j >= 0 with T^j(n) in the cycle set
    u64 find_happy_mod(u64 a, u64 modulus, u64 floor) const;  // escalating bounds

    Params params_;
    BuildOptions opts_;
    core::CycleSet cycle_;
    core::ClassifierCache classifier_;
    ResidueDescent descent_;
};

// Nested pad construction: value l with T^r(l+y) = value(x) + T^r(y)
// for all 0 <= y <= m. Levels record (shift, range bound) outermost
// first, as embedded in certificates.
struct AdditivePad {
    TowerNat value;
    std::vector<std::pair<u64, TowerNat>> levels;
};
AdditivePad additive_pad(const TowerNat& x, const TowerNat& m, u64 r,
                         const Params& params);

}  // namespace happy::ctor
