#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "happy/constructor.hpp"
#include "happy/core.hpp"
#include "happy/numtheory.hpp"

namespace happy::ctor {

namespace {

using sym::TowerNat;

struct Fact {
    TowerNat value;
    bool happy = false;
    std::optional<std::pair<u64, u64>> congruent;  // (residue, modulus)
    struct PairInfo {
        u64 x, s, k, xstar, h;
    };
    std::optional<PairInfo> pair;
    struct AdditiveInfo {
        TowerNat x;
        TowerNat m;
        u64 r;
    };
    std::optional<AdditiveInfo> additive;
    std::optional<std::vector<u64>> cover;  // value + y happy for each y
    std::optional<u64> run;                 // value+1 .. value+run happy
};

struct Checker {
    Params params{1, 2};
    std::optional<core::ClassifierCache> classifier;
    std::vector<Fact> facts;
    std::vector<std::string> diags;
    std::size_t at = 0;

    void fail(const std::string& msg) {
        std::ostringstream os;
        os << "step " << at << ": " << msg;
        diags.push_back(os.str());
        throw std::runtime_error(diags.back());
    }

    const Fact& premise(const nlohmann::json& step, const char* field) {
        const auto idx = step.at(field).get<std::size_t>();
        if (idx >= facts.size())
            fail(std::string(field) + " refers to a later or missing step");
        return facts[idx];
    }

    bool is_happy(u64 n) {
        if (!classifier)
            classifier.emplace(params);
        return classifier->is_happy(n);
    }

    TowerNat stated_value(const nlohmann::json& step) {
        return TowerNat::from_json(step.at("value"));
    }

    void require_equal(const TowerNat& stated, const TowerNat& expected,
                       const char* what) {
        if (!(stated == expected))
            fail(std::string(what) + " does not match its construction");
    }

    u64 power_of_digits(u64 d) {
        u128 v = 1;
        for (std::uint32_t i = 0; i < params.e; ++i) {
            v *= d;
            if (v > ~u64{0})
                fail("digit power overflow");
        }
        return static_cast<u64>(v);
    }

    // T applied r-1 further times after the structural first step
    u64 iterate_t(u64 v, u64 times) {
        for (u64 j = 0; j < times; ++j)
            v = core::power_digit_sum(v, params);
        return v;
    }

    Fact check_leaf(const nlohmann::json& step) {
        const u64 n = step.at("n").get<u64>();
        if (n == 0)
            fail("leaf value must be >= 1");
        if (!is_happy(n))
            fail("leaf value " + std::to_string(n) + " is not happy");
        Fact f;
        f.value = TowerNat::small(n);
        f.happy = true;
        return f;
    }

    Fact check_shift(const nlohmann::json& step) {
        const Fact& p = premise(step, "premise");
        if (!p.happy)
            fail("shift premise is not known happy");
        const u64 zeros = step.at("zeros").get<u64>();
        TowerNat value = stated_value(step);
        require_equal(value, sym::shift_up(p.value, zeros, params.b), "shift value");
        Fact f;
        f.value = std::move(value);
        f.happy = true;  // appended zeros leave the digit power sum unchanged
        return f;
    }

    Fact check_congruence(const nlohmann::json& step) {
        const Fact& p = premise(step, "premise");
        const u64 modulus = step.at("modulus").get<u64>();
        const u64 residue = step.at("residue").get<u64>();
        if (modulus == 0)
            fail("congruence modulus must be >= 1");
        if (sym::mod_value(p.value, modulus) != residue % modulus)
            fail("congruence claim fails under symbolic mod");
        Fact f = p;
        f.congruent = {residue % modulus, modulus};
        return f;
    }

    Fact check_residue_step(const nlohmann::json& step) {
        const Fact& target = premise(step, "target");
        if (!target.happy)
            fail("pad target is not known happy");
        TowerNat hprime = TowerNat::from_json(step.at("hprime"));
        const u64 s = step.at("s").get<u64>();
        const u64 modulus = step.at("modulus").get<u64>();
        const u64 residue = step.at("residue").get<u64>();
        const auto dc = hprime.digit_count_u64(params.b);
        if (!dc || *dc > s)
            fail("pad shift does not clear the low digits");
        const auto t = sym::power_digit_sum(hprime, params).value_u64();
        if (!t)
            fail("digit power sum of the low part must be a machine natural");
        TowerNat count;
        try {
            count = sym::sub_small(target.value, *t, params.b);
        } catch (const std::exception&) {
            fail("target is smaller than the digit power sum of the low part");
        }
        TowerNat value = stated_value(step);
        require_equal(value,
                      sym::add(sym::pad_ones(s, count, params.b), hprime, params.b),
                      "pad value");
        // T(value) = count + T(hprime) = target, which is happy
        require_equal(sym::add(count, TowerNat::small(*t), params.b), target.value,
                      "digit power sum of the pad");
        if (sym::mod_value(value, modulus) != residue % std::max<u64>(modulus, 1))
            fail("residue claim fails under symbolic mod");
        Fact f;
        f.value = std::move(value);
        f.happy = true;
        f.congruent = {residue % std::max<u64>(modulus, 1), modulus};
        return f;
    }

    Fact check_lift(const nlohmann::json& step) {
        const Fact& p = premise(step, "happy");
        if (!p.happy)
            fail("lift premise is not known happy");
        const u64 r = step.at("r").get<u64>();
        const u64 modulus = step.at("modulus").get<u64>();
        const u64 residue = step.at("residue").get<u64>();
        if (r == 0)
            fail("lift exponent r must be >= 1");
        TowerNat count;
        try {
            count = sym::sub_small(p.value, 1, params.b);
        } catch (const std::exception&) {
            fail("lift premise must be >= 1");
        }
        std::vector<TowerNat::Seg> segs;
        segs.push_back({0, TowerNat::small(1)});
        if (!count.is_zero())
            segs.push_back({1, count});
        segs.push_back({0, TowerNat::small(r)});
        segs.push_back({1, TowerNat::small(1)});
        TowerNat value = stated_value(step);
        require_equal(value, TowerNat::runs(params.b, std::move(segs)), "lift value");
        // T(value) = (h-1) + 1 = h, which is happy
        require_equal(sym::add(count, TowerNat::small(1), params.b), p.value,
                      "digit power sum of the lift");
        if (modulus == 0 || sym::mod_value(value, modulus) != residue % modulus)
            fail("lift residue claim fails under symbolic mod");
        Fact f;
        f.value = std::move(value);
        f.happy = true;
        f.congruent = {residue % modulus, modulus};
        return f;
    }

    Fact check_pair(const nlohmann::json& step) {
        const Fact& p = premise(step, "happy");
        if (!p.happy)
            fail("pair premise is not known happy");
        const auto hv = p.value.value_u64();
        if (!hv)
            fail("pair premise must be a machine natural");
        const u64 x = step.at("x").get<u64>();
        const u64 s = step.at("s").get<u64>();
        const u64 k = step.at("k").get<u64>();
        if (x == 0 || k == 0)
            fail("pair needs x >= 1 and k >= 1");
        u128 bs = 1;
        for (u64 i = 0; i < s; ++i) {
            bs *= params.b;
            if (bs > ~u64{0})
                fail("pair shift overflows");
        }
        if (bs <= x)
            fail("pair shift does not exceed x");
        const u64 xstar = static_cast<u64>(bs) - x;
        const u64 M = power_of_digits(params.b - 1);
        const u64 tstar = core::power_digit_sum(xstar, params);
        if (tstar + u128(k) * M != *hv)
            fail("pair run count does not reproduce the happy premise");
        TowerNat value = stated_value(step);
        require_equal(
            value,
            sym::add_disjoint(sym::pad_run(params.b - 1, s, TowerNat::small(k),
                                           params.b),
                              xstar, s, params.b),
            "pair value");
        // the carry collapse: value + x = b^(s+k)
        require_equal(sym::add(value, TowerNat::small(x), params.b),
                      sym::shift_up(TowerNat::small(1), s + k, params.b),
                      "pair carry collapse");
        Fact f;
        f.value = std::move(value);
        f.happy = true;  // T(value) = k(b-1)^e + T(xstar) = premise, happy
        f.pair = Fact::PairInfo{x, s, k, xstar, *hv};
        return f;
    }

    Fact check_pad_chain(const nlohmann::json& step) {
        TowerNat x = TowerNat::from_json(step.at("x"));
        if (x.is_zero())
            fail("pad target must be >= 1");
        const auto& levels = step.at("levels");
        if (!levels.is_array() || levels.empty())
            fail("pad chain needs at least one level");
        std::vector<std::pair<u64, TowerNat>> lv;
        for (const auto& level : levels)
            lv.emplace_back(level.at("s").get<u64>(),
                            TowerNat::from_json(level.at("bound")));
        for (std::size_t i = 0; i < lv.size(); ++i) {
            const auto dc = lv[i].second.digit_count_u64(params.b);
            if (!dc)
                fail("pad level bound has symbolic digit count");
            if (lv[i].first < *dc)
                fail("pad level shift does not clear its range bound");
            if (i + 1 < lv.size()) {
                const u64 need = max_digit_power_sum_upto(lv[i].second, params);
                const auto next = lv[i + 1].second.value_u64();
                if (next && *next < need)
                    fail("pad level bound does not cover the mapped range");
            }
        }
        TowerNat v = x;
        for (std::size_t i = lv.size(); i-- > 0;)
            v = sym::pad_ones(lv[i].first, v, params.b);
        require_equal(stated_value(step), v, "pad chain value");
        Fact f;
        f.value = std::move(v);
        f.additive = Fact::AdditiveInfo{std::move(x), lv.front().second,
                                        static_cast<u64>(lv.size())};
        return f;
    }

    Fact check_cover_single(const nlohmann::json& step) {
        const Fact& p = premise(step, "premise");
        if (!p.happy)
            fail("cover premise is not known happy");
        TowerNat value = stated_value(step);
        TowerNat back;
        try {
            back = sym::sub_small(p.value, 1, params.b);
        } catch (const std::exception&) {
            fail("cover premise must be >= 2");
        }
        require_equal(value, back, "cover value");
        Fact f;
        f.value = std::move(value);
        f.cover = std::vector<u64>{1};
        return f;
    }

    Fact check_cover_base(const nlohmann::json& step) {
        const Fact& p = premise(step, "pair");
        if (!p.pair)
            fail("cover base needs a pair premise");
        const auto set = step.at("set").get<std::vector<u64>>();
        if (set.size() != 2 || set[0] != 1 || set[1] < 2)
            fail("cover base set must be {1, x} with x >= 2");
        if (p.pair->x != set[1] - 1)
            fail("pair offset does not match the covered set");
        TowerNat value = stated_value(step);
        require_equal(value, sym::sub_small(p.value, 1, params.b), "cover value");
        Fact f;
        f.value = std::move(value);
        f.cover = set;
        return f;
    }

    Fact check_cover_step(const nlohmann::json& step) {
        const Fact& pf = premise(step, "pair");
        const Fact& inner = premise(step, "inner");
        const Fact& pad = premise(step, "pad");
        if (!pf.pair)
            fail("cover step needs a pair premise");
        if (!inner.cover)
            fail("cover step needs an inner cover premise");
        if (!pad.additive)
            fail("cover step needs a pad premise");
        const auto set = step.at("set").get<std::vector<u64>>();
        const u64 r = step.at("r").get<u64>();
        if (set.size() < 2 || set.front() != 1 ||
            !std::is_sorted(set.begin(), set.end()))
            fail("cover set must be sorted and contain 1");
        const u64 x = set.back();
        if (pf.pair->x != x - 1)
            fail("pair offset does not match the covered set");
        if (r == 0 || pad.additive->r != r)
            fail("pad depth does not match the iteration count");
        TowerNat h_x = sym::sub_small(pf.value, 1, params.b);
        require_equal(pad.additive->x, inner.value, "pad target");
        require_equal(pad.additive->m,
                      sym::add(h_x, TowerNat::small(x), params.b), "pad range");
        const u64 M = power_of_digits(params.b - 1);
        for (u64 y : set) {
            u64 d;
            if (y == x) {
                d = 1;  // h_x + x = b^(s+k), one step to 1
            } else {
                // h_x + y = xstar + (y-1) + the b-1 run; digit-disjoint
                const u64 low = pf.pair->xstar + y - 1;
                u64 v = core::power_digit_sum(low, params);
                v += pf.pair->k * M;
                d = iterate_t(v, r - 1);
            }
            if (!std::binary_search(inner.cover->begin(), inner.cover->end(), d))
                fail("iterated offset " + std::to_string(d) +
                     " is outside the inner cover");
        }
        TowerNat value = stated_value(step);
        require_equal(value, sym::add(pad.value, h_x, params.b), "cover value");
        Fact f;
        f.value = std::move(value);
        f.cover = set;
        return f;
    }

    Fact check_cover_concrete(const nlohmann::json& step) {
        const u64 h = step.at("h").get<u64>();
        const auto set = step.at("set").get<std::vector<u64>>();
        const auto ids = step.at("premises").get<std::vector<std::size_t>>();
        if (set.empty() || ids.size() != set.size() ||
            !std::is_sorted(set.begin(), set.end()))
            fail("cover premises must align with the sorted covered set");
        for (std::size_t i = 0; i < set.size(); ++i) {
            if (ids[i] >= facts.size())
                fail("cover premise refers to a later or missing step");
            const Fact& p = facts[ids[i]];
            if (!p.happy || !(p.value == TowerNat::small(h + set[i])))
                fail("cover premise does not certify h + " +
                     std::to_string(set[i]));
        }
        Fact f;
        f.value = TowerNat::small(h);
        f.cover = set;
        return f;
    }

    Fact check_run(const nlohmann::json& step) {
        const Fact& pad = premise(step, "pad");
        const Fact& cover = premise(step, "cover");
        if (!pad.additive)
            fail("run needs a pad premise");
        if (!cover.cover)
            fail("run needs a cover premise");
        const u64 m = step.at("length").get<u64>();
        if (m == 0)
            fail("run length must be >= 1");
        require_equal(pad.additive->x, cover.value, "pad target");
        const auto mr = pad.additive->m.value_u64();
        if (mr) {
            if (*mr < m)
                fail("pad range does not reach the run length");
        }
        const u64 r = pad.additive->r;
        for (u64 y = 1; y <= m; ++y) {
            const u64 d = iterate_t(y, r);
            if (!std::binary_search(cover.cover->begin(), cover.cover->end(), d))
                fail("iterated run member " + std::to_string(d) +
                     " is outside the cover");
        }
        Fact f;
        f.value = pad.value;
        f.run = m;
        return f;
    }

    Fact check_step(const nlohmann::json& step) {
        const std::string kind = step.at("kind").get<std::string>();
        if (kind == "leaf")
            return check_leaf(step);
        if (kind == "shift")
            return check_shift(step);
        if (kind == "congruence")
            return check_congruence(step);
        if (kind == "residue_step")
            return check_residue_step(step);
        if (kind == "lift")
            return check_lift(step);
        if (kind == "pair")
            return check_pair(step);
        if (kind == "pad_chain")
            return check_pad_chain(step);
        if (kind == "cover_single")
            return check_cover_single(step);
        if (kind == "cover_base")
            return check_cover_base(step);
        if (kind == "cover_step")
            return check_cover_step(step);
        if (kind == "cover_concrete")
            return check_cover_concrete(step);
        if (kind == "run")
            return check_run(step);
        fail("unknown step kind: " + kind);
        return {};
    }

    void check_goal(const nlohmann::json& goal) {
        if (facts.empty()) {
            diags.push_back("certificate has no steps");
            return;
        }
        const Fact& fin = facts.back();
        const std::string kind = goal.at("kind").get<std::string>();
        if (kind == "run") {
            if (!fin.run || *fin.run != goal.at("length").get<u64>())
                diags.push_back("final step does not certify the requested run");
        } else if (kind == "residue") {
            const u64 a = goal.at("a").get<u64>();
            const u64 modulus = goal.at("modulus").get<u64>();
            if (!fin.happy)
                diags.push_back("final step is not known happy");
            else if (!fin.congruent || fin.congruent->second != modulus ||
                     fin.congruent->first != a % std::max<u64>(modulus, 1))
                diags.push_back("final step does not certify the residue class");
        } else if (kind == "pair") {
            if (!fin.pair || fin.pair->x != goal.at("x").get<u64>())
                diags.push_back("final step does not certify the requested pair");
        } else if (kind == "cover") {
            if (!fin.cover || *fin.cover != core::cycle_set(params).members)
                diags.push_back("final step does not cover the cycle set");
        } else {
            diags.push_back("unknown goal kind: " + kind);
        }
    }
};

}  // namespace

VerifyResult verify_certificate(const nlohmann::json& cert) {
    VerifyResult out;
    Checker chk;
    try {
        if (cert.at("format_version").get<int>() != 1) {
            out.diagnostics.push_back("unsupported format_version");
            return out;
        }
        chk.params = Params(cert.at("params").at("e").get<std::uint32_t>(),
                            cert.at("params").at("b").get<std::uint32_t>());
        sym::DepthLimitGuard guard(1 << 20);
        const auto& steps = cert.at("steps");
        for (const auto& step : steps) {
            chk.at = chk.facts.size();
            chk.facts.push_back(chk.check_step(step));
        }
        chk.check_goal(cert.at("goal"));
        if (!chk.facts.empty() && cert.contains("witness")) {
            TowerNat w = TowerNat::from_json(cert.at("witness"));
            if (!(w == chk.facts.back().value))
                chk.diags.push_back("witness does not match the final step");
        }
    } catch (const std::exception& ex) {
        if (chk.diags.empty())
            chk.diags.push_back(std::string("verification error: ") + ex.what());
    }
    out.diagnostics = std::move(chk.diags);
    out.ok = out.diagnostics.empty();
    return out;
}

}  // namespace happy::ctor
