#include "happy/constructor.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "happy/numtheory.hpp"
#include "happy/search.hpp"

namespace happy::ctor {

namespace {

using sym::TowerNat;

u64 pow_u64_checked(u64 base, u64 exp) {
    u128 v = 1;
    for (u64 i = 0; i < exp; ++i) {
        v *= base;
        if (v > ~u64{0})
            throw std::overflow_error("power exceeds 64 bits");
    }
    return static_cast<u64>(v);
}

u64 digit_power_table(std::vector<u64>& pw, const Params& p) {
    pw.assign(p.b, 0);
    for (u64 d = 0; d < p.b; ++d)
        pw[d] = pow_u64_checked(d, p.e);
    return pw[p.b - 1];
}

u64 as_u64(u128 v, const char* what) {
    if (v > ~u64{0})
        throw std::overflow_error(what);
    return static_cast<u64>(v);
}

}  // namespace

u64 max_digit_power_sum_upto(u64 m, const Params& params) {
    if (m == 0)
        return 0;
    std::vector<u64> pw;
    const u64 top = digit_power_table(pw, params);
    const auto ds = core::digits_of(m, params.b);
    const u64 D = ds.size();
    u128 best = D >= 2 ? u128(D - 1) * top : 0;
    u128 prefix = 0;
    for (u64 i = D; i-- > 0;) {
        const std::uint32_t d = ds[i];
        if (d >= 1)
            best = std::max(best, prefix + pw[d - 1] + u128(i) * top);
        prefix += pw[d];
    }
    best = std::max(best, prefix);
    return as_u64(best, "digit power bound exceeds 64 bits");
}

u64 max_digit_power_sum_upto(const TowerNat& m, const Params& params) {
    if (auto v = m.value_u64())
        return max_digit_power_sum_upto(*v, params);
    std::vector<u64> pw;
    const u64 top = digit_power_table(pw, params);
    const auto dc = m.digit_count_u64(params.b);
    if (!dc)
        throw sym::IncomparableError("range bound has symbolic digit count");
    const u64 D = *dc;
    u128 best = u128(D - 1) * top;  // everything with fewer digits
    u128 prefix = 0;
    u64 consumed = 0;
    const auto segs = m.segments();
    for (std::size_t i = segs.size(); i-- > 0;) {  // most significant first
        const std::uint32_t d = segs[i].digit;
        const auto c = segs[i].count.value_u64();
        if (!c)
            throw sym::IncomparableError("run count has no machine value");
        if (d >= 1) {
            // dropping below m at the top position of this run is optimal
            // within the run: each position lower trades a free b-1 digit
            // for one more copy of d
            best = std::max(best, prefix + pw[d - 1] + u128(D - consumed - 1) * top);
        }
        prefix += u128(pw[d]) * *c;
        consumed += *c;
    }
    best = std::max(best, prefix);
    return as_u64(best, "digit power bound exceeds 64 bits");
}

TowerNat inflate_happy(const TowerNat& h, const Params& params, u64 min_value) {
    const u64 M = pow_u64_checked(params.b - 1, params.e);
    const u64 phi = nt::euler_phi(M);
    const auto v = h.value_u64();
    if (!v)
        return h;  // already beyond any machine floor
    if (*v == 0)
        throw std::invalid_argument("inflate_happy: value must be >= 1");
    u64 t = 0;
    u128 cur = *v;
    while (cur < min_value) {
        ++t;
        for (u64 i = 0; i < phi && cur <= ~u64{0}; ++i)
            cur *= params.b;
    }
    return t == 0 ? h : sym::shift_up(h, t * phi, params.b);
}

ResidueDescent::ResidueDescent(const Params& params) : params_(params) {
    const u64 n = params.b - 1;
    if (n == 1)
        return;
    const auto cond = core::condition_holds(params);
    if (!cond)
        throw std::invalid_argument(
            "residue descent does not terminate: the digit-power map fixes "
            "residues mod " +
            std::to_string(cond.failing_prime));
    for (const auto& [p, alpha] : nt::factorize(n).factors) {
        prime_powers_.push_back(pow_u64_checked(p, alpha));
        roots_.push_back(nt::primitive_root(p, alpha));
    }
}

u64 ResidueDescent::step(u64 a) const {
    const u64 n = params_.b - 1;
    if (n == 1)
        return 0;
    a %= n;
    std::vector<std::pair<u64, u64>> congruences;
    for (std::size_t i = 0; i < prime_powers_.size(); ++i) {
        const u64 pk = prime_powers_[i];
        const u64 g = roots_[i];
        if (a % pk == 1 % pk)
            congruences.emplace_back(1 % pk, pk);
        else
            congruences.emplace_back(
                (a % pk + pk - g % pk + nt::mod_pow(g, params_.e, pk)) % pk, pk);
    }
    return nt::crt_solve(congruences);
}

u64 ResidueDescent::combined_root(u64 a) const {
    const u64 n = params_.b - 1;
    if (n == 1)
        return 0;
    a %= n;
    std::vector<std::pair<u64, u64>> congruences;
    for (std::size_t i = 0; i < prime_powers_.size(); ++i) {
        const u64 pk = prime_powers_[i];
        congruences.emplace_back(a % pk == 1 % pk ? 1 % pk : roots_[i] % pk, pk);
    }
    return nt::crt_solve(congruences);
}

std::vector<u64> ResidueDescent::orbit(u64 a) const {
    const u64 n = params_.b - 1;
    std::vector<u64> out{n == 1 ? 0 : a % n};
    while (out.back() % std::max<u64>(n, 1) != 1 % std::max<u64>(n, 1)) {
        out.push_back(step(out.back()));
        if (out.size() > params_.b)
            throw std::logic_error("residue descent failed to reach 1");
    }
    return out;
}

u64 ResidueDescent::steps_to_one(u64 a) const { return orbit(a).size() - 1; }

nlohmann::json Certificate::to_json() const {
    nlohmann::json leaves = nlohmann::json::array();
    for (const auto& s : steps)
        if (s.at("kind") == "leaf")
            leaves.push_back(s.at("n"));
    return {{"format_version", 1},
            {"params", {{"e", params.e}, {"b", params.b}}},
            {"goal", goal},
            {"steps", steps},
            {"leaves", leaves},
            {"witness", witness.to_json()}};
}

Certificate Certificate::from_json(const nlohmann::json& j) {
    if (j.at("format_version").get<int>() != 1)
        throw std::invalid_argument("unsupported certificate format_version");
    Certificate c;
    c.params = Params(j.at("params").at("e").get<std::uint32_t>(),
                      j.at("params").at("b").get<std::uint32_t>());
    c.goal = j.at("goal");
    c.steps = j.at("steps");
    c.witness = TowerNat::from_json(j.at("witness"));
    return c;
}

Constructor::Constructor(const Params& params, BuildOptions opts)
    : params_(params),
      opts_(opts),
      cycle_(core::cycle_set(params)),
      classifier_(params),
      descent_(params) {}

Certificate Constructor::begin(nlohmann::json goal) const {
    Certificate cert;
    cert.params = params_;
    cert.goal = std::move(goal);
    return cert;
}

Constructor::Emitted Constructor::emit_leaf(Certificate& cert, u64 n) {
    if (!classifier_.is_happy(n))
        throw std::logic_error("leaf value is not happy: " + std::to_string(n));
    cert.steps.push_back({{"kind", "leaf"}, {"n", n}});
    return {cert.steps.size() - 1, TowerNat::small(n)};
}

Constructor::Emitted Constructor::emit_shift(Certificate& cert, const Emitted& premise,
                                             u64 zeros) {
    TowerNat value = sym::shift_up(premise.value, zeros, params_.b);
    cert.steps.push_back({{"kind", "shift"},
                          {"premise", premise.id},
                          {"zeros", zeros},
                          {"value", value.to_json()}});
    return {cert.steps.size() - 1, std::move(value)};
}

Constructor::Emitted Constructor::emit_congruence(Certificate& cert,
                                                  const Emitted& premise,
                                                  u64 modulus) {
    const u64 residue = sym::mod_value(premise.value, modulus);
    cert.steps.push_back({{"kind", "congruence"},
                          {"premise", premise.id},
                          {"residue", residue},
                          {"modulus", modulus}});
    return {cert.steps.size() - 1, premise.value};
}

Constructor::Emitted Constructor::emit_residue_step(Certificate& cert,
                                                    const Emitted& target, u64 a) {
    const u64 n = params_.b - 1;
    a %= n;
    const u64 g = descent_.combined_root(a);
    const u64 ones = a + n - g;
    const u64 t_exact = ones + pow_u64_checked(g, params_.e);
    Emitted l = target;
    if (auto lv = l.value.value_u64(); lv && *lv < t_exact) {
        // append zeros: happiness and the class mod b-1 are preserved,
        // and the value grows past T(h')
        u64 zeros = 1;
        u128 grown = *lv;
        while (grown < t_exact) {
            grown *= params_.b;
            ++zeros;
        }
        l = emit_shift(cert, l, zeros);
    }
    std::vector<TowerNat::Seg> hp_segs;
    hp_segs.push_back({static_cast<std::uint32_t>(g), TowerNat::small(1)});
    if (ones)
        hp_segs.push_back({1, TowerNat::small(ones)});
    TowerNat hprime = TowerNat::runs(params_.b, std::move(hp_segs));
    const u64 s = ones + 1;  // digit count of h'
    TowerNat count = sym::sub_small(l.value, t_exact, params_.b);
    TowerNat value =
        sym::add(sym::pad_ones(s, count, params_.b), hprime, params_.b);
    cert.steps.push_back({{"kind", "residue_step"},
                          {"target", l.id},
                          {"hprime", hprime.to_json()},
                          {"s", s},
                          {"value", value.to_json()},
                          {"residue", a},
                          {"modulus", n}});
    return {cert.steps.size() - 1, std::move(value)};
}

Constructor::Emitted Constructor::emit_residue_chain(Certificate& cert, u64 a) {
    const u64 n = params_.b - 1;
    const auto orbit = descent_.orbit(a);
    Emitted cur = emit_leaf(cert, 1);
    if (n == 1 || orbit.size() == 1)
        return cur;
    for (std::size_t i = orbit.size() - 1; i-- > 0;)
        cur = emit_residue_step(cert, cur, orbit[i]);
    return cur;
}

Certificate Constructor::residue_witness(u64 a) {
    const u64 n = params_.b - 1;
    a %= std::max<u64>(n, 1);
    Certificate cert =
        begin({{"kind", "residue"}, {"a", a}, {"modulus", std::max<u64>(n, 1)}});
    sym::DepthLimitGuard guard(opts_.depth_ceiling);
    if (!opts_.construct_only) {
        if (auto h = scan::find_happy_in_residue(a, std::max<u64>(n, 1), params_,
                                                 opts_.search_bound)) {
            Emitted leaf = emit_leaf(cert, *h);
            Emitted fin = emit_congruence(cert, leaf, std::max<u64>(n, 1));
            cert.witness = fin.value;
            return cert;
        }
    }
    Emitted chain = emit_residue_chain(cert, a);
    Emitted fin = emit_congruence(cert, chain, std::max<u64>(n, 1));
    cert.witness = fin.value;
    return cert;
}

Constructor::Emitted Constructor::emit_lift(Certificate& cert, const Emitted& happy_h,
                                            u64 a) {
    const u64 n = params_.b - 1;
    if (n % 2 == 0)
        throw std::invalid_argument(
            "the lifted residue construction needs an even base");
    const u64 M = pow_u64_checked(n, params_.e);
    a %= M;
    const auto [pw, rep] = sym::pow_rep_mod(happy_h.value, params_.b, M);
    const u64 sigma = (rep + M - 1) % M;  // sum of b^j, 1 <= j <= h-1, mod M
    const u64 x = (sigma + M - (a + M - 1) % M) % M;
    if (x % n != 0)
        throw std::logic_error("lift: pad sum is not congruent to a-1 mod b-1");
    const u64 k1 = x / n;
    const u64 y = static_cast<u64>(
        u128(nt::mod_inverse(pw, M)) * ((M + 1 - u128(k1) * n % M) % M) % M);
    if (y % n != 1 % n)
        throw std::logic_error("lift: inverse step left the unit class mod b-1");
    const u64 r = nt::power_congruence_solve(n, y == 0 ? M : y, params_.e);
    TowerNat count = sym::sub_small(happy_h.value, 1, params_.b);
    std::vector<TowerNat::Seg> segs;
    segs.push_back({0, TowerNat::small(1)});
    if (!count.is_zero())
        segs.push_back({1, count});
    if (r)
        segs.push_back({0, TowerNat::small(r)});
    segs.push_back({1, TowerNat::small(1)});
    TowerNat value = TowerNat::runs(params_.b, std::move(segs));
    if (sym::mod_value(value, M) != a)
        throw std::logic_error("lift: constructed value is in the wrong class");
    cert.steps.push_back({{"kind", "lift"},
                          {"happy", happy_h.id},
                          {"r", r},
                          {"value", value.to_json()},
                          {"residue", a},
                          {"modulus", M}});
    return {cert.steps.size() - 1, std::move(value)};
}

Certificate Constructor::residue_witness_lifted(u64 a) {
    const u64 n = params_.b - 1;
    const u64 M = pow_u64_checked(std::max<u64>(n, 1), params_.e);
    a %= M;
    Certificate cert = begin({{"kind", "residue"}, {"a", a}, {"modulus", M}});
    sym::DepthLimitGuard guard(opts_.depth_ceiling);
    if (!opts_.construct_only) {
        if (auto h = scan::find_happy_in_residue(a, M, params_, opts_.search_bound)) {
            Emitted leaf = emit_leaf(cert, *h);
            Emitted fin = emit_congruence(cert, leaf, M);
            cert.witness = fin.value;
            return cert;
        }
    }
    if (M == std::max<u64>(n, 1)) {
        Emitted chain = emit_residue_chain(cert, a);
        Emitted fin = emit_congruence(cert, chain, M);
        cert.witness = fin.value;
        return cert;
    }
    Emitted chain = emit_residue_chain(cert, a % n);
    Emitted fin = emit_lift(cert, chain, a);
    cert.witness = fin.value;
    return cert;
}

u64 Constructor::steps_to_cycle(u64 n) const {
    u64 j = 0;
    while (!cycle_.contains(n)) {
        n = core::power_digit_sum(n, params_);
        ++j;
        if (j > 1u << 20)
            throw std::logic_error("trajectory failed to reach the cycle set");
    }
    return j;
}

u64 Constructor::find_happy_mod(u64 a, u64 modulus, u64 floor) const {
    a %= modulus;
    for (u64 bound = opts_.search_bound;; bound *= 16) {
        u64 n = a == 0 ? modulus : a;
        if (n <= floor)
            n += (floor - n) / modulus * modulus + modulus;
        for (; n <= bound; n += modulus)
            if (classifier_.is_happy(n))
                return n;
        if (bound > u64{1} << 44)
            throw std::runtime_error(
                "no happy number found in the residue class within the "
                "search budget");
    }
}

Constructor::PairParts Constructor::emit_pair(Certificate& cert, u64 x) {
    const Params& params = params_;
    if (x == 0)
        throw std::invalid_argument("pair witness needs x >= 1");
    u64 s = 1;
    u128 bs = params.b;
    while (bs <= x) {
        bs *= params.b;
        ++s;
    }
    const u64 xstar = static_cast<u64>(bs) - x;
    const u64 t_star = core::power_digit_sum(xstar, params);
    const u64 M = pow_u64_checked(params.b - 1, params.e);
    const u64 h = find_happy_mod(t_star % M, M, t_star);
    const u64 k = (h - t_star) / M;
    Emitted leaf = emit_leaf(cert, h);
    TowerNat value = sym::add_disjoint(
        sym::pad_run(params.b - 1, s, TowerNat::small(k), params.b), xstar, s,
        params.b);
    cert.steps.push_back({{"kind", "pair"},
                          {"x", x},
                          {"s", s},
                          {"k", k},
                          {"happy", leaf.id},
                          {"value", value.to_json()}});
    PairParts pp;
    pp.id = cert.steps.size() - 1;
    pp.value = std::move(value);
    pp.x = x;
    pp.s = s;
    pp.k = k;
    pp.xstar = xstar;
    pp.h = h;
    return pp;
}

Certificate Constructor::pair_witness(u64 x) {
    Certificate cert = begin({{"kind", "pair"}, {"x", x}});
    sym::DepthLimitGuard guard(opts_.depth_ceiling);
    cert.witness = emit_pair(cert, x).value;
    return cert;
}

Constructor::Emitted Constructor::emit_pad_chain(Certificate& cert, const TowerNat& x,
                                                 const TowerNat& m, u64 r) {
    AdditivePad pad = additive_pad(x, m, r, params_);
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& [s, bound] : pad.levels)
        levels.push_back({{"s", s}, {"bound", bound.to_json()}});
    cert.steps.push_back({{"kind", "pad_chain"},
                          {"x", x.to_json()},
                          {"levels", levels},
                          {"value", pad.value.to_json()}});
    return {cert.steps.size() - 1, std::move(pad.value)};
}

Constructor::Emitted Constructor::emit_cover(Certificate& cert,
                                             const std::vector<u64>& S) {
    if (S.empty() || S.front() != 1)
        throw std::invalid_argument("cover subsets must contain 1");
    if (S.size() == 1) {
        // b itself is happy (T(b) = 1), so b-1 covers {1}
        Emitted leaf = emit_leaf(cert, params_.b);
        TowerNat value = TowerNat::small(params_.b - 1);
        cert.steps.push_back({{"kind", "cover_single"},
                              {"premise", leaf.id},
                              {"value", value.to_json()}});
        return {cert.steps.size() - 1, std::move(value)};
    }
    const u64 x = S.back();
    PairParts pp = emit_pair(cert, x - 1);
    if (S.size() == 2) {
        TowerNat value = sym::sub_small(pp.value, 1, params_.b);
        cert.steps.push_back({{"kind", "cover_base"},
                              {"pair", pp.id},
                              {"set", S},
                              {"value", value.to_json()}});
        return {cert.steps.size() - 1, std::move(value)};
    }
    const u64 M = pow_u64_checked(params_.b - 1, params_.e);
    u64 r = 1;
    for (u64 y : S) {
        if (y == x)
            continue;
        const u64 v1 = core::power_digit_sum(pp.xstar + y - 1, params_) + pp.k * M;
        r = std::max(r, 1 + steps_to_cycle(v1));
    }
    std::set<u64> sstar;
    for (u64 y : S) {
        if (y == x) {
            sstar.insert(1);
            continue;
        }
        u64 v = core::power_digit_sum(pp.xstar + y - 1, params_) + pp.k * M;
        for (u64 j = 1; j < r; ++j)
            v = core::power_digit_sum(v, params_);
        sstar.insert(v);
    }
    if (sstar.size() >= S.size())
        throw std::logic_error("cover induction did not shrink the subset");
    Emitted inner = emit_cover(cert, {sstar.begin(), sstar.end()});
    TowerNat h_x = sym::sub_small(pp.value, 1, params_.b);
    TowerNat m = sym::add(h_x, TowerNat::small(x), params_.b);
    Emitted pad = emit_pad_chain(cert, inner.value, m, r);
    TowerNat value = sym::add(pad.value, h_x, params_.b);
    cert.steps.push_back({{"kind", "cover_step"},
                          {"pair", pp.id},
                          {"inner", inner.id},
                          {"pad", pad.id},
                          {"r", r},
                          {"set", S},
                          {"value", value.to_json()}});
    return {cert.steps.size() - 1, std::move(value)};
}

Certificate Constructor::cover_witness() {
    Certificate cert = begin({{"kind", "cover"}});
    sym::DepthLimitGuard guard(opts_.depth_ceiling);
    Emitted fin = [&] {
        if (!opts_.construct_only) {
            scan::Happiness happy(params_,
                                  opts_.search_bound + cycle_.members.back() + 1);
            if (auto h = scan::find_cover_h(happy, cycle_, opts_.search_bound)) {
                nlohmann::json premises = nlohmann::json::array();
                for (u64 xx : cycle_.members)
                    premises.push_back(emit_leaf(cert, *h + xx).id);
                TowerNat value = TowerNat::small(*h);
                cert.steps.push_back({{"kind", "cover_concrete"},
                                      {"h", *h},
                                      {"set", cycle_.members},
                                      {"premises", premises}});
                return Emitted{cert.steps.size() - 1, std::move(value)};
            }
        }
        return emit_cover(cert, cycle_.members);
    }();
    cert.witness = fin.value;
    return cert;
}

Certificate Constructor::run_witness(u64 m) {
    if (m == 0)
        throw std::invalid_argument("run length must be >= 1");
    Certificate cert = begin({{"kind", "run"}, {"length", m}});
    sym::DepthLimitGuard guard(opts_.depth_ceiling);
    Certificate cover_cert = cover_witness();
    // splice the cover construction into this certificate
    for (auto& s : cover_cert.steps)
        cert.steps.push_back(std::move(s));
    Emitted cover{cert.steps.size() - 1, cover_cert.witness};
    u64 r = 1;
    for (u64 y = 1; y <= m; ++y)
        r = std::max(r, steps_to_cycle(y));
    Emitted pad = emit_pad_chain(cert, cover.value, TowerNat::small(m), r);
    cert.steps.push_back({{"kind", "run"},
                          {"pad", pad.id},
                          {"cover", cover.id},
                          {"length", m}});
    cert.witness = pad.value;
    return cert;
}

AdditivePad additive_pad(const TowerNat& x, const TowerNat& m, u64 r,
                         const Params& params) {
    if (r == 0)
        throw std::invalid_argument("pad depth r must be >= 1");
    if (x.is_zero())
        throw std::invalid_argument("pad target x must be >= 1");
    AdditivePad out;
    TowerNat bound = m;
    for (u64 i = 0; i < r; ++i) {
        const auto dc = bound.digit_count_u64(params.b);
        if (!dc)
            throw sym::IncomparableError("range bound has symbolic digit count");
        out.levels.emplace_back(*dc, bound);
        if (i + 1 < r)
            bound = TowerNat::small(max_digit_power_sum_upto(bound, params));
    }
    TowerNat v = x;
    for (std::size_t i = out.levels.size(); i-- > 0;)
        v = sym::pad_ones(out.levels[i].first, v, params.b);
    out.value = v;
    return out;
}

}  // namespace happy::ctor
