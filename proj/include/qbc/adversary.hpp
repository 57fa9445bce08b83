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
 * @file adversary.hpp
 * Dishonest strategies for either party and their success metrics.
 *
 * Bob's attacks try to learn b after the commit phase; Alice's attacks try to
 * pass the unveil checks with something other than the honest opening.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qbc/analysis.hpp"
#include "qbc/error.hpp"
#include "qbc/protocol.hpp"
#include "qbc/registers.hpp"
#include "qbc/rng.hpp"

namespace qbc::adversary {

using analysis::SiteKind;
using analysis::SiteState;
using kernel::cplx;
using lincode::BitString;
using protocol::CommitSession;
using protocol::LieLabel;
using protocol::Params;
using protocol::Transcript;
using registers::BetaLabel;

struct AttackReport {
    std::string attack_name;
    std::size_t trials = 0;
    std::size_t success_count = 0;
    std::size_t detection_count = 0;
    double advantage = 0.0; ///< guess accuracy - 1/2, or unveil acceptance rate
    std::string notes;
};

inline nlohmann::ordered_json to_json(const AttackReport &r) {
    nlohmann::ordered_json j;
    j["attack_name"] = r.attack_name;
    j["trials"] = r.trials;
    j["success_count"] = r.success_count;
    j["detection_count"] = r.detection_count;
    j["advantage"] = r.advantage;
    j["notes"] = r.notes;
    return j;
}

// ---------------------------------------------------------------------------
// Projector attack

/// Oracle: Bob projects the state Alice's records imply, with the true lie
/// labels. Measured: Bob projects what he actually holds, measuring deferred
/// registers in the announced basis to fix their labels. Scrambled: as Oracle
/// but the labels used to build P_0 are redrawn for every codeword.
enum class ProjectorMode { Oracle, Measured, Scrambled };

inline std::string_view to_string(ProjectorMode m) {
    switch (m) {
    case ProjectorMode::Oracle: return "oracle";
    case ProjectorMode::Measured: return "measured";
    case ProjectorMode::Scrambled: return "scrambled";
    }
    return "?";
}

struct ProjectorGuess {
    Bit guess = 0;
    bool correct = false;
    double success_probability = 0.0; ///< Pr(P_0 clicks) on the projected state
    std::size_t coset_size = 0;       ///< feasible codewords with c.r = 0
};

namespace detail {

inline constexpr std::size_t max_dense_projector_sites = 10;

/// Pr(P_0 clicks) for a product state psi, P_0 projecting onto the span of
/// the supports of the given product states. Exact (dense) up to ten sites;
/// beyond that the per-codeword terms are summed, which is exact when those
/// supports are mutually orthogonal and an upper bound otherwise.
inline double coset_click_probability(const std::vector<std::vector<cplx>> &psi,
                                      const std::vector<std::vector<SiteState>> &coset) {
    if (coset.empty()) return 0.0;
    const std::size_t n = psi.size();
    if (n <= max_dense_projector_sites) {
        const std::size_t dim = std::size_t{1} << n;
        std::vector<Eigen::VectorXcd> cols;
        for (const auto &states : coset) {
            std::vector<Eigen::VectorXcd> acc{Eigen::VectorXcd::Ones(1)};
            for (const auto &st : states) {
                std::vector<Eigen::VectorXcd> next;
                for (const auto &u : analysis::support_basis(st)) {
                    for (const auto &a : acc) {
                        Eigen::VectorXcd t(a.size() * 2);
                        for (Eigen::Index x = 0; x < a.size(); ++x) {
                            t(2 * x) = a(x) * u[0];
                            t(2 * x + 1) = a(x) * u[1];
                        }
                        next.push_back(std::move(t));
                    }
                }
                acc = std::move(next);
            }
            cols.insert(cols.end(), acc.begin(), acc.end());
        }
        Eigen::MatrixXcd span(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j) span.col(static_cast<Eigen::Index>(j)) = cols[j];
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(span);
        qr.setThreshold(1e-10);
        const Eigen::Index rank = qr.rank();
        Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(span.rows(), rank);
        Eigen::VectorXcd v = Eigen::VectorXcd::Ones(1);
        for (const auto &p : psi) {
            Eigen::VectorXcd t(v.size() * 2);
            for (Eigen::Index x = 0; x < v.size(); ++x) {
                t(2 * x) = v(x) * p[0];
                t(2 * x + 1) = v(x) * p[1];
            }
            v = std::move(t);
        }
        return std::min(1.0, (q.adjoint() * v).squaredNorm());
    }
    double total = 0.0;
    for (const auto &states : coset) {
        double term = 1.0;
        for (std::size_t i = 0; i < n && term > 0.0; ++i) term *= analysis::support_weight(states[i], psi[i]);
        total += term;
        if (total >= 1.0) return 1.0;
    }
    return total;
}

inline std::vector<cplx> amplitudes_of(BetaLabel l) {
    const auto v = registers::beta_state(l);
    return {v[0], v[1]};
}

/// One draw from the state a site carries for c0 bit `bit`.
inline std::vector<cplx> sample_site(const SiteState &st, Rng &rng) {
    if (st.kind == SiteKind::Pure) return amplitudes_of(*st.pure_label);
    double u = rng.uniform();
    for (const auto &[w, l] : st.mixture) {
        if (u < w) return amplitudes_of(l);
        u -= w;
    }
    return amplitudes_of(st.mixture.back().second);
}

} // namespace detail

/// Bob's projection attack on one committed session. Guesses 0 when P_0
/// clicks and 1 otherwise.
inline ProjectorGuess bob_projector_attack(CommitSession &session, ProjectorMode mode, Rng &rng) {
    const auto &t = session.transcript;
    if (!t.committed()) throw error(errc::invalid_state, "projector attack needs a committed transcript");
    const auto kept = t.kept_positions();
    const std::size_t n = kept.size();

    std::vector<analysis::SiteSpec> spec(n);
    std::vector<std::vector<cplx>> psi(n);
    for (std::size_t j = 0; j < n; ++j) {
        auto &site = session.transcript.sites[kept[j]];
        spec[j] = {site.label, site.fake, site.theta};
        if (mode == ProjectorMode::Measured) {
            if (site.deferred && !site.actual) {
                if (session.pairs.size() <= kept[j]) throw error(errc::invalid_state, "session has no registers");
                auto [q_prime, next] = registers::measure_beta(session.pairs[kept[j]], site.fake.basis, rng.uniform());
                session.pairs[kept[j]] = std::move(next);
                site.actual = BetaLabel{site.fake.basis, q_prime};
            }
            spec[j].label = protocol::classify(site.fake, *site.actual);
            psi[j] = detail::amplitudes_of(*site.actual);
        } else {
            psi[j] = detail::sample_site(analysis::site_state(spec[j], t.c0[j]), rng);
        }
    }

    static constexpr std::array<LieLabel, 4> scramble_pool{LieLabel::TypeA, LieLabel::TypeB, LieLabel::TypeC,
                                                           LieLabel::Honest};
    std::vector<std::vector<SiteState>> coset;
    for (const auto &cw : t.code->codewords()) {
        if (lincode::dot(cw, t.r) != 0) continue;
        const auto c0 = cw ^ t.c_prime;
        std::vector<SiteState> states;
        states.reserve(n);
        bool feasible = true;
        for (std::size_t j = 0; j < n && feasible; ++j) {
            auto s = spec[j];
            if (mode == ProjectorMode::Scrambled) s.label = scramble_pool[rng.below(scramble_pool.size())];
            states.push_back(analysis::site_state(s, c0[j]));
            feasible = states.back().kind != SiteKind::Unavailable;
        }
        if (feasible) coset.push_back(std::move(states));
    }

    ProjectorGuess g;
    g.coset_size = coset.size();
    g.success_probability = detail::coset_click_probability(psi, coset);
    g.guess = rng.uniform() < g.success_probability ? 0 : 1;
    g.correct = g.guess == t.b;
    return g;
}

/// Runs honest commits and the projector attack on each; aborted commits count
/// as detections with a coin-flip guess.
inline AttackReport projector_attack_trials(const Params &params, ProjectorMode mode, std::size_t trials) {
    AttackReport rep{"projector-" + std::string(to_string(mode)), trials, 0, 0, 0.0, ""};
    std::size_t correct = 0;
    for (std::size_t k = 0; k < trials; ++k) {
        auto rng = Rng::for_trial(params.seed, k);
        protocol::AlicePolicy alice;
        protocol::BobPolicy bob;
        auto session = protocol::run_commit(params, alice, bob, rng);
        if (!session.transcript.committed()) {
            ++rep.detection_count;
            correct += rng.bit();
            continue;
        }
        const auto g = bob_projector_attack(session, mode, rng);
        if (g.correct) ++correct;
    }
    rep.success_count = correct;
    rep.advantage = static_cast<double>(correct) / static_cast<double>(trials) - 0.5;
    return rep;
}

/// The projector attack on synthetic instances: every site carries `label`,
/// announced results and c0 are uniform (c0 = 0 at type-b sites, the only
/// value such a site can carry), and b is uniform.
inline AttackReport synthetic_projector_trials(const lincode::LinearCode &code, LieLabel label, double theta,
                                               ProjectorMode mode, std::size_t trials, std::uint64_t seed) {
    AttackReport rep{"projector-" + std::string(to_string(mode)), trials, 0, 0, 0.0,
                     "synthetic n=" + std::to_string(code.n()) + " labels=" + std::string(protocol::to_string(label))};
    const std::size_t n = code.n();
    for (std::size_t k = 0; k < trials; ++k) {
        auto rng = Rng::for_trial(seed, k);
        std::vector<LieLabel> labels(n, label);
        std::vector<BetaLabel> fakes(n);
        BitString c0(n);
        for (std::size_t i = 0; i < n; ++i) {
            fakes[i] = {static_cast<Bit>(rng.bit()), static_cast<Bit>(rng.bit())};
            if (label != LieLabel::TypeB) c0.set(i, static_cast<Bit>(rng.bit()));
        }
        const auto b = static_cast<Bit>(rng.bit());
        BitString r(n), c(n);
        for (int attempt = 0;; ++attempt) {
            for (std::size_t i = 0; i < n; ++i) r.set(i, static_cast<Bit>(rng.bit()));
            if (r.is_zero()) continue;
            try {
                c = lincode::sample_codeword(code, r, b, rng);
                break;
            } catch (const error &e) {
                if (e.code() != errc::unsatisfiable_bit || attempt > 256) throw;
            }
        }
        CommitSession session{analysis::synthetic_transcript(code, labels, fakes, c, c0, r, theta), {}};
        if (bob_projector_attack(session, mode, rng).correct) ++rep.success_count;
    }
    rep.advantage = static_cast<double>(rep.success_count) / static_cast<double>(trials) - 0.5;
    return rep;
}

// ---------------------------------------------------------------------------
// Type-b flood

struct FloodResult {
    std::vector<BitString> candidates;
    std::size_t known = 0; ///< undetected type-b positions used as c0 = 0
    bool unique = false;
    Bit guess = 0;
    bool correct = false;
    bool success = false; ///< unique candidate and its dot with r equals b
};

/// Bob sets c0 = 0 at every surviving type-b position, reads c there off c'
/// and decodes the rest.
inline FloodResult bob_typeb_flood_attack(const Transcript &t, Rng &rng) {
    if (!t.committed()) throw error(errc::invalid_state, "flood attack needs a committed transcript");
    const auto kept = t.kept_positions();
    std::vector<lincode::KnownBit> known;
    for (std::size_t j = 0; j < kept.size(); ++j) {
        if (t.sites[kept[j]].label == LieLabel::TypeB) known.push_back({j, t.c_prime[j]});
    }
    FloodResult res;
    res.known = known.size();
    res.candidates = lincode::decode_from_partial(*t.code, known);
    res.unique = res.candidates.size() == 1;
    if (!res.candidates.empty()) {
        res.guess = lincode::dot(res.candidates[rng.below(res.candidates.size())], t.r);
    } else {
        res.guess = static_cast<Bit>(rng.bit());
    }
    res.correct = res.guess == t.b;
    res.success = res.unique && res.correct;
    return res;
}

inline AttackReport flood_attack_trials(const Params &params, std::size_t trials) {
    AttackReport rep{"typeb-flood", trials, 0, 0, 0.0, ""};
    std::size_t correct = 0, ambiguous = 0;
    for (std::size_t k = 0; k < trials; ++k) {
        auto rng = Rng::for_trial(params.seed, k);
        protocol::AlicePolicy alice;
        protocol::BobPolicy bob;
        auto session = protocol::run_commit(params, alice, bob, rng);
        if (!session.transcript.committed()) {
            ++rep.detection_count;
            correct += rng.bit();
            continue;
        }
        const auto r = bob_typeb_flood_attack(session.transcript, rng);
        if (r.success) ++rep.success_count;
        if (r.candidates.size() >= 2) ++ambiguous;
        if (r.correct) ++correct;
    }
    rep.advantage = static_cast<double>(correct) / static_cast<double>(trials) - 0.5;
    rep.notes = "ambiguous=" + std::to_string(ambiguous);
    return rep;
}

// ---------------------------------------------------------------------------
// Measure-early Alice

/// Measures every alpha at preparation, so each beta leaves as a pure
/// unentangled state; otherwise follows the honest policy.
class MeasureEarlyAlice : public protocol::AlicePolicy {
  public:
    using AlicePolicy::AlicePolicy;

    registers::PairState prepare(std::size_t /*i*/, double theta, Rng &rng) override {
        const auto pair = registers::make_pair_state(theta, static_cast<Bit>(rng.bit()));
        return registers::measure_alpha(pair, rng.uniform()).second;
    }
};

inline AttackReport alice_measure_early_attack(const Params &params, std::size_t trials) {
    AttackReport rep{"measure-early", trials, 0, 0, 0.0, ""};
    std::size_t commit_aborts = 0, u3_rejects = 0;
    for (std::size_t k = 0; k < trials; ++k) {
        auto rng = Rng::for_trial(params.seed, k);
        MeasureEarlyAlice alice;
        protocol::BobPolicy bob;
        auto session = protocol::run_commit(params, alice, bob, rng);
        if (!session.transcript.committed()) {
            ++commit_aborts;
            ++rep.detection_count;
            continue;
        }
        const auto v = protocol::run_unveil(session, alice, rng);
        if (v.accept) {
            ++rep.success_count;
        } else {
            ++rep.detection_count;
            if (!v.checks.empty() && !v.checks.front().pass) ++u3_rejects;
        }
    }
    rep.advantage = static_cast<double>(rep.success_count) / static_cast<double>(trials);
    rep.notes = "commit_aborts=" + std::to_string(commit_aborts) + " u3_rejects=" + std::to_string(u3_rejects);
    return rep;
}

/// Probability that one measure-early register passes U3 against an honest
/// Bob with no deferred sites, by enumerating every branch of preparation,
/// alpha result, Bob's basis and beta result through the registers module.
inline double measure_early_register_acceptance(double theta) {
    double accept = 0.0;
    for (Bit q = 0; q < 2; ++q) {
        const auto fresh = registers::make_pair_state(theta, q);
        const auto pa = registers::alpha_distribution(fresh);
        for (Bit a = 0; a < 2; ++a) {
            if (pa[a] <= 0.0) continue;
            const double draw_a = a == 0 ? 0.5 * pa[0] : pa[0] + 0.5 * pa[1];
            const auto measured = registers::measure_alpha(fresh, draw_a).second;
            for (Bit basis = 0; basis < 2; ++basis) {
                const auto pb = registers::beta_distribution(measured, basis);
                for (Bit qp = 0; qp < 2; ++qp) {
                    const double w = 0.5 * pa[a] * 0.5 * pb[qp];
                    if (w <= 0.0) continue;
                    const double draw_b = qp == 0 ? 0.5 * pb[0] : pb[0] + 0.5 * pb[1];
                    const auto pair = registers::measure_beta(measured, basis, draw_b).second;
                    const bool in_m = qp != q;
                    if (in_m && a == basis) {
                        accept += w; // detected: discarded before unveil
                        continue;
                    }
                    const registers::PairClaim claim{theta, q, in_m ? std::optional<Bit>(a) : std::nullopt};
                    accept += w * registers::projection_success_probability(pair, claim, /*holds_alpha=*/!in_m);
                }
            }
        }
    }
    return accept;
}

/// U3 rejection probability over s independent registers.
inline double measure_early_exact_rejection(double theta, std::size_t s) {
    return 1.0 - std::pow(measure_early_register_acceptance(theta), static_cast<double>(s));
}

// ---------------------------------------------------------------------------
// Bit flip

/// Unveils honestly except at one surviving position, where the claimed c0
/// bit and the codeword bit are both flipped so that c xor c0 still equals c'.
class BitflipAlice : public protocol::AlicePolicy {
  public:
    BitflipAlice(std::size_t kept_index, std::size_t site, Bit claimed_p)
        : j_(kept_index), site_(site), claimed_p_(claimed_p) {}

    protocol::UnveilMessage unveil(CommitSession &session, Rng &rng) override {
        auto msg = AlicePolicy::unveil(session, rng);
        const Bit now = flip(msg.c0[j_]);
        msg.c0.set(j_, now);
        msg.c.set(j_, flip(msg.c[j_]));
        msg.p[site_] = now != 0 ? std::optional<Bit>(claimed_p_) : std::nullopt;
        return msg;
    }

  private:
    std::size_t j_;
    std::size_t site_;
    Bit claimed_p_;
};

struct BitflipOutcome {
    AttackReport report;
    protocol::UnveilVerdict verdict;
    bool adjacent_codeword = false;
};

/// Flips the c0 bit at surviving position `flip_index` (an index into S - L)
/// and unveils. A missing adjacent codeword is recorded as NoAdjacentCodeword
/// in the notes; Alice then presents the non-codeword c xor e_j.
inline BitflipOutcome alice_bitflip_attack(CommitSession &session, std::size_t flip_index, Rng &rng) {
    const auto &t = session.transcript;
    if (!t.committed()) throw error(errc::invalid_state, "bit-flip attack needs a committed transcript");
    const auto kept = t.kept_positions();
    if (flip_index >= kept.size()) throw error(errc::invalid_params, "flip index outside S - L");
    const std::size_t site = kept[flip_index];
    const Bit from = t.c0[flip_index];

    BitflipOutcome out;
    auto adjusted = t.c;
    adjusted.set(flip_index, flip(adjusted[flip_index]));
    out.adjacent_codeword = t.code->contains(adjusted);

    BitflipAlice alice(flip_index, site, static_cast<Bit>(rng.bit()));
    out.verdict = protocol::run_unveil(session, alice, rng);

    auto &rep = out.report;
    rep.attack_name = "bitflip";
    rep.trials = 1;
    rep.success_count = out.verdict.accept ? 1 : 0;
    rep.detection_count = out.verdict.accept ? 0 : 1;
    rep.advantage = out.verdict.accept ? 1.0 : 0.0;
    std::ostringstream notes;
    notes << (from == 1 ? "1->0" : "0->1") << " at site " << site << " ("
          << protocol::to_string(t.sites[site].label) << ")";
    if (!out.adjacent_codeword) notes << "; " << to_string(errc::no_adjacent_codeword);
    if (!out.verdict.failed.empty()) {
        notes << "; failed:";
        for (const auto &f : out.verdict.failed) notes << ' ' << f;
    }
    rep.notes = notes.str();
    return out;
}

// ---------------------------------------------------------------------------
// Fidelity probe

/// F(rho_0, rho_1) from Alice's side. Dense for n <= 12; larger instances are
/// answered only when the supports are certified orthogonal (F = 0).
inline double alice_hjw_precondition_probe(const Transcript &t) {
    const auto spec = analysis::rho_spec_from_transcript(t);
    if (spec.sites.size() <= analysis::max_dense_sites) {
        return kernel::fidelity(analysis::rho_b_ensemble(spec, 0), analysis::rho_b_ensemble(spec, 1));
    }
    if (analysis::certify_orthogonality(spec).orthogonal) return 0.0;
    throw error(errc::invalid_params, "fidelity of non-orthogonal states is limited to n <= 12");
}

} // namespace qbc::adversary
