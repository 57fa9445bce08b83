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
 * @file analysis.hpp
 * Committed-bit density matrices as seen from Alice's side.
 *
 * Each surviving beta register is assigned a state that depends on the lie
 * type of Bob's announcement and on the c0 bit the register encodes. A
 * codeword c fixes c0 = c xor c' and hence a product state B(c); rho_b is the
 * uniform mixture of B(c) over the unveilable codewords with c . r = b.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qbc/error.hpp"
#include "qbc/kernel.hpp"
#include "qbc/lincode.hpp"
#include "qbc/protocol.hpp"
#include "qbc/registers.hpp"
#include "qbc/window.hpp"

namespace qbc::analysis {

using lincode::BitString;
using lincode::LinearCode;
using protocol::LieLabel;
using registers::BetaLabel;

enum class SiteKind { Pure, Mixture, Unavailable };

struct SiteState {
    SiteKind kind = SiteKind::Unavailable;
    std::optional<BetaLabel> pure_label;
    std::vector<std::pair<double, BetaLabel>> mixture;

    static SiteState pure(BetaLabel l) { return {SiteKind::Pure, l, {}}; }
    static SiteState unavailable() { return {}; }

    [[nodiscard]] kernel::Ensemble ensemble() const {
        if (kind == SiteKind::Pure) return {{1.0, registers::beta_state(*pure_label)}};
        if (kind == SiteKind::Mixture) {
            kernel::Ensemble e;
            for (const auto &[w, l] : mixture) e.push_back({w, registers::beta_state(l)});
            return e;
        }
        throw error(errc::invalid_state, "unavailable site has no state");
    }
};

/// Mixture of |0, value> and |1, value> with the weights obtained by tracing
/// alpha out of the unmeasured pair: cos^2(theta) and sin^2(theta).
inline SiteState basis_mixture(Bit value, double theta) {
    const double c2 = std::cos(theta) * std::cos(theta);
    return {SiteKind::Mixture, std::nullopt, {{c2, {0, value}}, {1.0 - c2, {1, value}}}};
}

/// State of a surviving beta register for a given lie type, announced fake
/// result and c0 bit.
inline SiteState table1_site_state(LieLabel label, BetaLabel fake, Bit c0, double theta) {
    const BetaLabel both_flipped{flip(fake.basis), flip(fake.value)};
    switch (label) {
    case LieLabel::TypeA:
        return c0 == 0 ? SiteState::pure({flip(fake.basis), fake.value}) : SiteState::pure(both_flipped);
    case LieLabel::TypeB:
        return c0 == 0 ? basis_mixture(fake.value, theta) : SiteState::unavailable();
    case LieLabel::TypeC:
        return c0 == 0 ? SiteState::pure(fake) : SiteState::pure(both_flipped);
    case LieLabel::Honest:
        return c0 == 0 ? basis_mixture(fake.value, theta) : SiteState::pure(both_flipped);
    case LieLabel::Deferred: break;
    }
    throw error(errc::deferred_site, "no actual result defines a lie type for a deferred site");
}

/// Orthonormal basis of the support of a site state (Gram-Schmidt over the
/// ensemble members).
inline std::vector<std::vector<kernel::cplx>> support_basis(const SiteState &s) {
    std::vector<std::vector<kernel::cplx>> q;
    for (const auto &ws : s.ensemble()) {
        std::vector<kernel::cplx> v(ws.state.amplitudes().begin(), ws.state.amplitudes().end());
        for (const auto &u : q) {
            kernel::cplx c = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) c += std::conj(u[i]) * v[i];
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * u[i];
        }
        double n2 = 0.0;
        for (auto x : v) n2 += std::norm(x);
        if (n2 < 1e-20) continue;
        for (auto &x : v) x /= std::sqrt(n2);
        q.push_back(std::move(v));
    }
    return q;
}

/// <psi| Pi_support |psi> for a single-site vector psi.
inline double support_weight(const SiteState &s, std::span<const kernel::cplx> psi) {
    double w = 0.0;
    for (const auto &u : support_basis(s)) {
        kernel::cplx c = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) c += std::conj(u[i]) * psi[i];
        w += std::norm(c);
    }
    return std::min(1.0, w);
}

/// Largest |<u|v>| over unit vectors u, v in the supports of the two sites;
/// zero exactly when the supports are orthogonal.
inline double support_overlap(const SiteState &a, const SiteState &b) {
    const auto qa = support_basis(a);
    const auto qb = support_basis(b);
    Eigen::MatrixXcd g(static_cast<Eigen::Index>(qa.size()), static_cast<Eigen::Index>(qb.size()));
    for (std::size_t i = 0; i < qa.size(); ++i) {
        for (std::size_t j = 0; j < qb.size(); ++j) {
            kernel::cplx c = 0.0;
            for (std::size_t t = 0; t < qa[i].size(); ++t) c += std::conj(qa[i][t]) * qb[j][t];
            g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
        }
    }
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g);
    const double s = svd.singularValues()(0);
    return s < 1e-14 ? 0.0 : std::min(1.0, s);
}

/// Per-site description sufficient to assign a state for either c0 bit.
struct SiteSpec {
    LieLabel label = LieLabel::Honest;
    BetaLabel fake;
    double theta = 0.785398163397448;
};

/// Deferred sites have no lie type; they enter as the maximally mixed state,
/// i.e. an overlap-1 factor whichever c0 bit they carry.
inline SiteState site_state(const SiteSpec &site, Bit c0) {
    if (site.label == LieLabel::Deferred) {
        return {SiteKind::Mixture, std::nullopt, {{0.5, {0, 0}}, {0.5, {0, 1}}}};
    }
    return table1_site_state(site.label, site.fake, c0, site.theta);
}

struct RhoSpec {
    std::vector<SiteSpec> sites;
    LinearCode code;
    BitString r;
    BitString c_prime;
};

inline RhoSpec rho_spec_from_transcript(const protocol::Transcript &t) {
    if (!t.committed()) throw error(errc::invalid_state, "transcript has no commitment");
    RhoSpec spec{{}, *t.code, t.r, t.c_prime};
    for (auto i : t.kept_positions()) {
        const auto &s = t.sites[i];
        spec.sites.push_back({s.label, s.fake, s.theta});
    }
    return spec;
}

/// A committed transcript with no detected sites, fixed lie labels and
/// announced results, carrying codeword c with c0 = c xor c'. Used to study
/// rho_b without running the commit phase.
inline protocol::Transcript synthetic_transcript(const LinearCode &code, const std::vector<LieLabel> &labels,
                                                 const std::vector<BetaLabel> &fakes, const BitString &c,
                                                 const BitString &c0, const BitString &r, double theta) {
    const std::size_t n = code.n();
    if (labels.size() != n || fakes.size() != n || c.size() != n || c0.size() != n || r.size() != n) {
        throw error(errc::length_mismatch, "synthetic transcript inputs must all have length n");
    }
    protocol::Transcript t;
    t.params.s = n;
    t.params.theta = {theta};
    t.sites.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto &site = t.sites[i];
        site.theta = theta;
        site.label = labels[i];
        site.fake = fakes[i];
        site.deferred = labels[i] == LieLabel::Deferred;
        // Each lie map is an involution, so it also recovers the actual result.
        if (!site.deferred) site.actual = protocol::fake_for(labels[i], fakes[i]);
        site.alice_measured = c0[i] != 0;
        // q is fixed by membership: i in M iff the announced value differs.
        site.q = c0[i] != 0 ? flip(fakes[i].value) : fakes[i].value;
        (site.alice_measured ? t.M : t.U).push_back(i);
        if (labels[i] == LieLabel::TypeA) t.La.push_back(i);
        if (labels[i] == LieLabel::TypeB) t.Lb.push_back(i);
        if (labels[i] == LieLabel::TypeC) t.Lc.push_back(i);
        if (site.deferred) t.Sprime.push_back(i);
    }
    t.c0 = c0;
    t.r = r;
    t.c = c;
    t.c_prime = c ^ c0;
    t.b = lincode::dot(c, r);
    t.code = code;
    return t;
}

struct BState {
    BitString c0;
    std::vector<SiteState> sites;
    bool feasible = true;
};

/// Per-site states of B(c) for c0 = c xor c'. Infeasible when any site is
/// unavailable for its c0 bit, i.e. c cannot be unveiled.
inline BState build_B_state(const BitString &c, const BitString &c_prime, const RhoSpec &spec) {
    if (c.size() != c_prime.size() || c.size() != spec.sites.size()) {
        throw error(errc::length_mismatch, "codeword, c' and site list must have length n");
    }
    BState out{c ^ c_prime, {}, true};
    out.sites.reserve(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        out.sites.push_back(site_state(spec.sites[i], out.c0[i]));
        if (out.sites.back().kind == SiteKind::Unavailable) out.feasible = false;
    }
    return out;
}

/// Product of per-site support overlaps.
inline double pair_overlap(const BState &x, const BState &y) {
    if (!x.feasible || !y.feasible) throw error(errc::invalid_state, "pair_overlap needs feasible states");
    double prod = 1.0;
    for (std::size_t i = 0; i < x.sites.size() && prod > 0.0; ++i) {
        if (x.c0[i] == y.c0[i]) continue; // identical site states
        prod *= support_overlap(x.sites[i], y.sites[i]);
    }
    return prod;
}

struct Certificate {
    bool orthogonal = true;
    std::optional<std::pair<BitString, BitString>> witness; ///< (c with c.r=0, c* with c.r=1)
    double witness_overlap = 0.0;
    std::size_t feasible0 = 0;
    std::size_t feasible1 = 0;
};

/// Feasible codewords of C with c . r = b, ascending.
inline std::vector<BitString> feasible_codewords(const RhoSpec &spec, Bit b) {
    std::vector<BitString> out;
    for (auto &cw : spec.code.codewords()) {
        if (lincode::dot(cw, spec.r) != b) continue;
        if (build_B_state(cw, spec.c_prime, spec).feasible) out.push_back(std::move(cw));
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// rho_0 is orthogonal to rho_1 iff every feasible pair (c, c*) across the
/// two cosets has pair_overlap 0. A site contributes a zero factor exactly
/// when its two c0 states have orthogonal supports and the pair's c0 bits
/// differ there, so pairs are grouped by their restriction to those sites;
/// the lexicographically smallest failing pair is the witness.
inline Certificate certify_orthogonality(const RhoSpec &spec) {
    const std::size_t n = spec.sites.size();
    std::vector<bool> separating(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const auto s0 = site_state(spec.sites[i], 0);
        const auto s1 = site_state(spec.sites[i], 1);
        if (s0.kind == SiteKind::Unavailable || s1.kind == SiteKind::Unavailable) continue;
        separating[i] = support_overlap(s0, s1) == 0.0;
    }
    auto key = [&](const BitString &cw) {
        const auto c0 = cw ^ spec.c_prime;
        std::string k;
        for (std::size_t i = 0; i < n; ++i) {
            if (separating[i]) k.push_back(c0[i] ? '1' : '0');
        }
        return k;
    };
    const auto f0 = feasible_codewords(spec, 0);
    const auto f1 = feasible_codewords(spec, 1);
    Certificate cert;
    cert.feasible0 = f0.size();
    cert.feasible1 = f1.size();
    std::map<std::string, const BitString *> first1;
    for (const auto &cw : f1) first1.emplace(key(cw), &cw); // f1 ascending: first is smallest
    for (const auto &cw : f0) {
        const auto it = first1.find(key(cw));
        if (it == first1.end()) continue;
        cert.orthogonal = false;
        cert.witness = std::pair{cw, *it->second};
        cert.witness_overlap = pair_overlap(build_B_state(cw, spec.c_prime, spec),
                                            build_B_state(*it->second, spec.c_prime, spec));
        break;
    }
    return cert;
}

inline constexpr std::size_t max_dense_sites = 12;

/// rho_b as an explicit ensemble over the expanded product states.
inline kernel::Ensemble rho_b_ensemble(const RhoSpec &spec, Bit b) {
    const auto cws = feasible_codewords(spec, b);
    if (cws.empty()) throw error(errc::no_feasible_codeword, "no feasible codeword with c.r=" + std::to_string(b));
    if (spec.sites.size() > max_dense_sites) {
        throw error(errc::invalid_params, "dense construction is limited to n <= 12");
    }
    const double lambda = 1.0 / static_cast<double>(cws.size());
    kernel::Ensemble out;
    for (const auto &cw : cws) {
        const auto bs = build_B_state(cw, spec.c_prime, spec);
        kernel::Ensemble acc{{lambda, kernel::StateVector::basis(1, 0)}};
        for (const auto &site : bs.sites) {
            kernel::Ensemble next;
            for (const auto &a : acc) {
                for (const auto &m : site.ensemble()) next.push_back({a.weight * m.weight, kernel::tensor(a.state, m.state)});
            }
            acc = std::move(next);
        }
        out.insert(out.end(), acc.begin(), acc.end());
    }
    return out;
}

inline kernel::DensityMatrix rho_b(const RhoSpec &spec, Bit b) {
    return kernel::DensityMatrix::from_ensemble(rho_b_ensemble(spec, b));
}

struct ResidualCounts {
    std::size_t l_a_res = 0;
    std::size_t l_b_res = 0;
    std::size_t l_c_res = 0;
    std::size_t h_res = 0;
    std::size_t deferred = 0;
    std::size_t n = 0;
};

/// Undetected sites of each lie type over S - L.
inline ResidualCounts residual_accounting(const protocol::Transcript &t) {
    ResidualCounts rc;
    for (auto i : t.kept_positions()) {
        ++rc.n;
        switch (t.sites[i].label) {
        case LieLabel::TypeA: ++rc.l_a_res; break;
        case LieLabel::TypeB: ++rc.l_b_res; break;
        case LieLabel::TypeC: ++rc.l_c_res; break;
        case LieLabel::Honest: ++rc.h_res; break;
        case LieLabel::Deferred: ++rc.deferred; break;
        }
    }
    return rc;
}

struct LieTypeProbabilities {
    LieLabel label;
    double in_m;     ///< Pr(i in M)
    double detected; ///< Pr(i in L)
};

/// Exact Pr(i in M) and Pr(i in L) per lie type at angle theta, from the
/// Born distributions of the registers module (q, Bob's basis and, for
/// deferred sites, the fake result are uniform).
inline std::vector<LieTypeProbabilities> lie_type_probabilities(double theta) {
    std::vector<LieTypeProbabilities> out;
    for (auto label : {LieLabel::TypeA, LieLabel::TypeB, LieLabel::TypeC, LieLabel::Honest}) {
        double in_m = 0.0, det = 0.0;
        for (Bit q = 0; q < 2; ++q) {
            const auto pair = registers::make_pair_state(theta, q);
            for (Bit basis = 0; basis < 2; ++basis) {
                const auto dist = registers::beta_distribution(pair, basis);
                for (Bit qp = 0; qp < 2; ++qp) {
                    const double w = 0.25 * dist[qp];
                    if (w <= 0.0) continue;
                    const double draw = (qp == 0 ? 0.0 : dist[0]) + 0.5 * dist[qp];
                    const auto after = registers::measure_beta(pair, basis, draw).second;
                    const auto fake = protocol::fake_for(label, {basis, qp});
                    if (fake.value == q) continue;
                    in_m += w;
                    det += w * registers::alpha_distribution(after)[fake.basis];
                }
            }
        }
        out.push_back({label, in_m, det});
    }
    double in_m = 0.0, det = 0.0;
    for (Bit q = 0; q < 2; ++q) {
        const auto pair = registers::make_pair_state(theta, q);
        const auto ad = registers::alpha_distribution(pair);
        for (Bit fb = 0; fb < 2; ++fb) {
            for (Bit fv = 0; fv < 2; ++fv) {
                if (fv == q) continue;
                in_m += 0.125;
                det += 0.125 * ad[fb];
            }
        }
    }
    out.push_back({LieLabel::Deferred, in_m, det});
    return out;
}

} // namespace qbc::analysis
