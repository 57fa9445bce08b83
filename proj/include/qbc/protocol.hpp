// Copyright 2026 The qbc-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file protocol.hpp
 * Commit (C1-C7) and unveil (U1-U5) state machines for the entanglement-based
 * bit commitment protocol.
 *
 * A run is simulated with both parties in one process. The parties' choices
 * are delegated to AlicePolicy / BobPolicy objects; the honest behaviour is
 * the default implementation and dishonest strategies override single steps.
 * The runner itself never special-cases dishonesty: every honest-party check
 * is always evaluated and recorded.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qbc/error.hpp"
#include "qbc/lincode.hpp"
#include "qbc/registers.hpp"
#include "qbc/rng.hpp"
#include "qbc/window.hpp"

namespace qbc::protocol {

using lincode::BitString;
using lincode::LinearCode;
using registers::BetaLabel;
using registers::PairState;

enum class LieLabel { TypeA, TypeB, TypeC, Honest, Deferred };

inline std::string_view to_string(LieLabel l) {
    switch (l) {
    case LieLabel::TypeA: return "TypeA";
    case LieLabel::TypeB: return "TypeB";
    case LieLabel::TypeC: return "TypeC";
    case LieLabel::Honest: return "Honest";
    case LieLabel::Deferred: return "Deferred";
    }
    return "?";
}

inline LieLabel lie_label_from_string(std::string_view s) {
    for (auto l : {LieLabel::TypeA, LieLabel::TypeB, LieLabel::TypeC, LieLabel::Honest, LieLabel::Deferred}) {
        if (to_string(l) == s) return l;
    }
    throw error(errc::parse_error, "unknown lie label '" + std::string(s) + "'");
}

/// The fake result Bob announces for an actual outcome under each lie type.
inline BetaLabel fake_for(LieLabel label, BetaLabel actual) {
    switch (label) {
    case LieLabel::TypeA: return {actual.basis, flip(actual.value)};
    case LieLabel::TypeB: return {flip(actual.basis), actual.value};
    case LieLabel::TypeC: return {flip(actual.basis), flip(actual.value)};
    case LieLabel::Honest: return actual;
    case LieLabel::Deferred: break;
    }
    throw error(errc::deferred_site, "deferred sites have no actual result");
}

/// Inverse of fake_for: the lie type relating a fake to an actual result.
inline LieLabel classify(BetaLabel fake, BetaLabel actual) {
    const bool same_basis = fake.basis == actual.basis;
    const bool same_value = fake.value == actual.value;
    if (same_basis) return same_value ? LieLabel::Honest : LieLabel::TypeA;
    return same_value ? LieLabel::TypeB : LieLabel::TypeC;
}

enum class CodeKind { Block, Random };

struct CodeRequest {
    CodeKind kind = CodeKind::Block;
    std::size_t k = 8;
    std::optional<std::size_t> d; ///< default: middle of the expected d-window
};

struct Params {
    std::size_t s = 0;
    std::vector<double> theta{std::numbers::pi / 4.0}; ///< one entry (fixed) or s entries
    double f_a = 0.0;
    double f_b = 0.0;
    double f_c = 0.0;
    std::size_t s_prime = 0;
    CodeRequest code;
    std::uint64_t seed = 0;
    double check_z = 4.0;

    [[nodiscard]] double theta_at(std::size_t i) const { return theta.size() == 1 ? theta[0] : theta.at(i); }
};

/// Validates Params. With `bob_honest`, also the lying-frequency constraints
/// Bob promises to respect: f_a + f_c < 1/2 and f_b > f_c.
inline void validate(const Params &p, bool bob_honest = true) {
    auto fail = [](const std::string &msg) { throw error(errc::invalid_params, msg); };
    if (p.s == 0) fail("s must be positive");
    if (p.theta.empty() || (p.theta.size() != 1 && p.theta.size() != p.s)) {
        fail("theta must be a single angle or one angle per register");
    }
    for (double t : p.theta) {
        if (!(t > 0.0 && t < std::numbers::pi / 2.0)) fail("theta must lie in (0, pi/2)");
    }
    for (double f : {p.f_a, p.f_b, p.f_c}) {
        if (!(f >= 0.0 && f <= 1.0)) fail("lying frequencies must lie in [0, 1]");
    }
    if (p.f_a + p.f_b + p.f_c > 1.0 + 1e-12) fail("f_a + f_b + f_c must not exceed 1");
    if (p.s_prime >= p.s) fail("s' must satisfy 0 <= s' < s");
    if (!(p.check_z > 0.0)) fail("z must be positive");
    if (bob_honest && !(p.f_a + p.f_c < 0.5 && p.f_b > p.f_c)) {
        fail("commit step C3 requires f_a + f_c < 1/2 and f_b > f_c");
    }
}

/// |observed - rate*s| <= z * sqrt(rate (1 - rate) s).
inline bool statistical_check(double observed, double expected_rate, double s, double z) {
    const double sigma = std::sqrt(expected_rate * (1.0 - expected_rate) * s);
    return std::abs(observed - expected_rate * s) <= z * sigma;
}

/// Round half to even, independent of the floating-point rounding mode.
inline long round_half_even(double x) {
    const double fl = std::floor(x);
    const double frac = x - fl;
    long r = static_cast<long>(fl);
    if (frac > 0.5 || (frac == 0.5 && (r % 2 != 0))) ++r;
    return r;
}

struct SiteRecord {
    double theta = 0.0;
    Bit q = 0;
    bool deferred = false;              ///< i in S'
    std::optional<BetaLabel> actual;    ///< Bob's real outcome, once measured
    BetaLabel fake;                     ///< announced (p'', q'')
    LieLabel label = LieLabel::Honest;
    bool alice_measured = false;
    std::optional<Bit> p;               ///< Alice's alpha result
};

struct Verdict {
    std::string name;
    bool pass;
};

struct Transcript {
    Params params;
    std::vector<SiteRecord> sites;
    std::vector<std::size_t> M, U, L, La, Lb, Lc, Sprime;
    BitString c0, r, c, c_prime;
    Bit b = 0;
    std::vector<Verdict> verdicts;
    std::optional<std::string> aborted_at;
    std::optional<LinearCode> code;

    /// S - L in ascending order: the positions carrying c0, c, c', r.
    [[nodiscard]] std::vector<std::size_t> kept_positions() const {
        std::vector<std::size_t> out;
        std::size_t li = 0;
        for (std::size_t i = 0; i < sites.size(); ++i) {
            while (li < L.size() && L[li] < i) ++li;
            if (li < L.size() && L[li] == i) continue;
            out.push_back(i);
        }
        return out;
    }

    [[nodiscard]] bool committed() const { return !aborted_at.has_value() && code.has_value(); }

    [[nodiscard]] bool passed(std::string_view check) const {
        return std::any_of(verdicts.begin(), verdicts.end(),
                           [&](const Verdict &v) { return v.name == check && v.pass; });
    }
};

/// A transcript together with the quantum registers it refers to.
struct CommitSession {
    Transcript transcript;
    std::vector<PairState> pairs;
};

/// Alice's unveil announcement (U1) and register hand-over (U2). Registers
/// for claimed-unmeasured positions are read from the session's pairs.
struct UnveilMessage {
    Bit b = 0;
    BitString c;
    BitString c0;
    std::vector<Bit> q;                   ///< per site in S
    std::vector<double> theta;            ///< per site in S
    std::vector<std::optional<Bit>> p;    ///< announced alpha results for claimed M
};

struct UnveilVerdict {
    bool accept = false;
    std::vector<Verdict> checks;
    std::vector<std::string> failed;
    std::size_t u3_registers = 0;          ///< registers projected in U3
    std::vector<std::size_t> u3_rejected;  ///< sites whose projection failed
    std::vector<double> u3_probability;    ///< per projected register, in site order
};

class AlicePolicy {
  public:
    explicit AlicePolicy(std::optional<Bit> bit = {}) : bit_(bit) {}
    virtual ~AlicePolicy() = default;

    /// The bit to commit; drawn uniformly when not fixed.
    virtual Bit commit_bit(Rng &rng) { return bit_ ? *bit_ : static_cast<Bit>(rng.bit()); }

    /// C1: prepare one pair.
    virtual PairState prepare(std::size_t /*i*/, double theta, Rng &rng) {
        return registers::make_pair_state(theta, static_cast<Bit>(rng.bit()));
    }

    /// C4: split S into M and U, measure alpha over M, and return L.
    virtual void detect_lies(CommitSession &session, Rng &rng) {
        auto &t = session.transcript;
        for (std::size_t i = 0; i < t.sites.size(); ++i) {
            auto &site = t.sites[i];
            if (site.fake.value != site.q) {
                t.M.push_back(i);
                if (!site.p) {
                    auto [p, next] = registers::measure_alpha(session.pairs[i], rng.uniform());
                    session.pairs[i] = std::move(next);
                    site.p = p;
                }
                site.alice_measured = true;
                if (*site.p == site.fake.basis) t.L.push_back(i);
            } else {
                t.U.push_back(i);
            }
        }
    }

    /// C7.2: a nonzero random n-bit string.
    virtual BitString choose_r(std::size_t n, Rng &rng) {
        BitString r(n);
        do {
            for (std::size_t i = 0; i < n; ++i) r.set(i, static_cast<Bit>(rng.bit()));
        } while (r.is_zero());
        return r;
    }

    /// U1: announce b, c, c0, all (q, theta) and p over M.
    virtual UnveilMessage unveil(CommitSession &session, Rng & /*rng*/) {
        const auto &t = session.transcript;
        UnveilMessage msg{t.b, t.c, t.c0, {}, {}, {}};
        for (const auto &site : t.sites) {
            msg.q.push_back(site.q);
            msg.theta.push_back(site.theta);
            msg.p.push_back(site.alice_measured ? site.p : std::nullopt);
        }
        return msg;
    }

  private:
    std::optional<Bit> bit_;
};

class BobPolicy {
  public:
    virtual ~BobPolicy() = default;

    /// C2 + C3: choose S', measure S'' and announce fake results.
    virtual void measure_and_announce(CommitSession &session, Rng &rng) {
        auto &t = session.transcript;
        const auto &p = t.params;
        std::vector<std::size_t> order(p.s);
        for (std::size_t i = 0; i < p.s; ++i) order[i] = i;
        rng.shuffle(std::span<std::size_t>(order));
        t.Sprime.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(p.s_prime));
        std::sort(t.Sprime.begin(), t.Sprime.end());
        std::vector<std::size_t> measured(order.begin() + static_cast<std::ptrdiff_t>(p.s_prime), order.end());
        std::sort(measured.begin(), measured.end());

        const double deferral = static_cast<double>(p.s_prime) / 4.0;
        auto count = [&](double f) {
            return static_cast<std::size_t>(std::max(0L, round_half_even(f * static_cast<double>(p.s) - deferral)));
        };
        const std::size_t na = count(p.f_a), nb = count(p.f_b), nc = count(p.f_c);
        if (na + nb + nc > measured.size()) {
            throw error(errc::infeasible_lie_counts,
                        std::to_string(na + nb + nc) + " lies requested but |S''| = " + std::to_string(measured.size()));
        }
        std::vector<std::size_t> placement = measured;
        rng.shuffle(std::span<std::size_t>(placement));
        std::vector<LieLabel> labels(p.s, LieLabel::Honest);
        for (std::size_t j = 0; j < placement.size(); ++j) {
            labels[placement[j]] = j < na ? LieLabel::TypeA
                                 : j < na + nb ? LieLabel::TypeB
                                 : j < na + nb + nc ? LieLabel::TypeC
                                                    : LieLabel::Honest;
        }
        for (auto i : t.Sprime) labels[i] = LieLabel::Deferred;

        for (std::size_t i = 0; i < p.s; ++i) {
            auto &site = t.sites[i];
            site.label = labels[i];
            if (labels[i] == LieLabel::Deferred) {
                site.deferred = true;
                site.fake = {static_cast<Bit>(rng.bit()), static_cast<Bit>(rng.bit())};
                continue;
            }
            const auto basis = static_cast<Bit>(rng.bit());
            auto [q_prime, next] = registers::measure_beta(session.pairs[i], basis, rng.uniform());
            session.pairs[i] = std::move(next);
            site.actual = BetaLabel{basis, q_prime};
            site.fake = fake_for(labels[i], *site.actual);
            switch (labels[i]) {
            case LieLabel::TypeA: t.La.push_back(i); break;
            case LieLabel::TypeB: t.Lb.push_back(i); break;
            case LieLabel::TypeC: t.Lc.push_back(i); break;
            default: break;
            }
        }
    }

    /// C7.1: choose the code once n is known. By default a block code whose
    /// distance sits in the middle of the expected d-window.
    virtual LinearCode choose_code(std::size_t n, const Transcript &t, Rng &rng) {
        const auto &p = t.params;
        std::size_t d = 0;
        if (p.code.d) {
            d = *p.code.d;
        } else {
            const auto w = analysis::d_window(p.f_a, p.f_b, p.f_c, static_cast<double>(p.s));
            d = static_cast<std::size_t>(std::max(1.0, std::floor((w.d_min + w.d_max) / 2.0)));
        }
        d = std::clamp<std::size_t>(d, 1, n);
        if (p.code.kind == CodeKind::Random) {
            return lincode::random_code(n, std::min(p.code.k, n), d, rng);
        }
        const std::size_t k = std::max<std::size_t>(1, std::min(p.code.k, n / d));
        return lincode::block_code(n, k, d, rng);
    }
};

inline double expected_detected_rate(const Params &p) { return p.f_a / 2.0 + p.f_b / 4.0 + p.f_c / 4.0; }
inline double expected_measured_rate(const Params &p) { return 0.25 + (p.f_a + p.f_c) / 2.0; }

/// Executes C1-C7. A failed check is recorded in `verdicts`, names the step
/// in `aborted_at`, and stops the run; the partial session is returned.
inline CommitSession run_commit(const Params &params, AlicePolicy &alice, BobPolicy &bob, Rng &rng,
                                const std::optional<LinearCode> &fixed_code = {}) {
    validate(params, /*bob_honest=*/false);
    CommitSession session;
    auto &t = session.transcript;
    t.params = params;
    const std::size_t s = params.s;
    const double sd = static_cast<double>(s);
    auto record = [&](const char *name, bool pass) {
        t.verdicts.push_back({name, pass});
        if (!pass && !t.aborted_at) t.aborted_at = name;
        return pass;
    };

    // C1
    t.sites.resize(s);
    session.pairs.reserve(s);
    for (std::size_t i = 0; i < s; ++i) {
        const double theta = params.theta_at(i);
        auto pair = alice.prepare(i, theta, rng);
        t.sites[i].theta = theta;
        t.sites[i].q = pair.q();
        t.sites[i].p = pair.alpha_measured();
        session.pairs.push_back(std::move(pair));
    }

    // C2, C3
    bob.measure_and_announce(session, rng);

    // C4
    alice.detect_lies(session, rng);
    const auto m = static_cast<double>(t.M.size());
    const auto l = static_cast<double>(t.L.size());
    if (!record("C4a", m < sd / 2.0)) return session;
    if (!record("C4b", m - l < sd / 4.0)) return session;

    // C5: Bob measures L n S' in the announced basis; none may match the fake.
    bool c5a = true;
    for (auto i : t.L) {
        auto &site = t.sites[i];
        if (!site.deferred) continue;
        auto [q_prime, next] = registers::measure_beta(session.pairs[i], site.fake.basis, rng.uniform());
        session.pairs[i] = std::move(next);
        site.actual = BetaLabel{site.fake.basis, q_prime};
        if (q_prime == site.fake.value) c5a = false;
    }
    if (!record("C5a", c5a)) return session;
    const bool c5b = std::all_of(t.L.begin(), t.L.end(), [&](std::size_t i) {
        return t.sites[i].deferred || t.sites[i].label != LieLabel::Honest;
    });
    if (!record("C5b", c5b)) return session;
    if (!record("C5c", statistical_check(l, expected_detected_rate(params), sd, params.check_z))) return session;

    // C6
    const auto kept = t.kept_positions();
    const std::size_t n = kept.size();
    if (n == 0) {
        record("C6", false);
        return session;
    }
    t.c0 = BitString(n);
    for (std::size_t j = 0; j < n; ++j) t.c0.set(j, t.sites[kept[j]].alice_measured ? 1 : 0);

    // C7
    if (fixed_code && fixed_code->n() != n) {
        throw error(errc::invalid_params, "supplied code has n=" + std::to_string(fixed_code->n()) +
                                              " but the run needs n=" + std::to_string(n));
    }
    t.code = fixed_code ? *fixed_code : bob.choose_code(n, t, rng);
    t.b = alice.commit_bit(rng);
    for (int attempt = 0;; ++attempt) {
        t.r = alice.choose_r(n, rng);
        try {
            t.c = lincode::sample_codeword(*t.code, t.r, t.b, rng);
            break;
        } catch (const error &e) {
            // Degenerate r (c.r constant on C): Alice announces a fresh r.
            if (e.code() != errc::unsatisfiable_bit || attempt > 256) throw;
        }
    }
    t.c_prime = t.c ^ t.c0;
    return session;
}

/// Executes U1-U5 against a committed session.
inline UnveilVerdict run_unveil(CommitSession &session, AlicePolicy &alice, Rng &rng) {
    auto &t = session.transcript;
    if (!t.committed()) throw error(errc::invalid_state, "transcript did not complete the commit phase");
    UnveilVerdict v;
    const auto msg = alice.unveil(session, rng);
    const auto &p = t.params;
    const auto kept = t.kept_positions();
    const std::size_t n = kept.size();
    auto record = [&](const char *name, bool pass) {
        v.checks.push_back({name, pass});
        if (!pass) v.failed.emplace_back(name);
    };

    // U3: the announcement must be self-consistent, then every register Bob
    // holds is projected onto the state Alice's announcement implies.
    bool u3 = msg.c.size() == n && msg.c0.size() == n && msg.q.size() == p.s && msg.theta.size() == p.s &&
              msg.p.size() == p.s;
    if (u3 && (msg.c ^ msg.c0) != t.c_prime) u3 = false;
    std::vector<std::size_t> claimed_m = t.L;
    if (u3) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t i = kept[j];
            const bool claims_measured = msg.c0[j] != 0;
            if (claims_measured) {
                claimed_m.push_back(i);
                if (!msg.p[i]) {
                    u3 = false;
                    continue;
                }
            }
            const registers::PairClaim claim{msg.theta[i], msg.q[i],
                                             claims_measured ? msg.p[i] : std::nullopt};
            const auto check = registers::joint_projection_check(session.pairs[i], claim,
                                                                 /*holds_alpha=*/!claims_measured, rng.uniform());
            ++v.u3_registers;
            v.u3_probability.push_back(check.success_probability);
            if (!check.accept) {
                v.u3_rejected.push_back(i);
                u3 = false;
            }
        }
    }
    std::sort(claimed_m.begin(), claimed_m.end());
    record("U3", u3);

    // U4
    record("U4a", statistical_check(static_cast<double>(claimed_m.size()), expected_measured_rate(p),
                                    static_cast<double>(p.s), p.check_z));
    std::vector<std::size_t> m_minus_l;
    std::set_difference(claimed_m.begin(), claimed_m.end(), t.L.begin(), t.L.end(), std::back_inserter(m_minus_l));
    std::vector<std::size_t> overlap;
    std::set_intersection(m_minus_l.begin(), m_minus_l.end(), t.Lb.begin(), t.Lb.end(), std::back_inserter(overlap));
    record("U4b", overlap.empty());

    // U5
    record("U5a", msg.c.size() == t.r.size() && msg.b == lincode::dot(msg.c, t.r));
    record("U5b", t.code->contains(msg.c));
    v.accept = v.failed.empty();
    return v;
}

} // namespace qbc::protocol
