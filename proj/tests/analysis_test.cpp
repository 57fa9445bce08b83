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


#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include <gtest/gtest.h>

#include "qbc/analysis.hpp"
#include "qbc/rng.hpp"

namespace {

using namespace qbc;
using namespace qbc::analysis;
using lincode::BitString;
using lincode::LinearCode;
using protocol::LieLabel;
using registers::BetaLabel;

const double kPi = std::numbers::pi;

// Independent restatement of the per-site states: 2x2 density matrix of a
// surviving register, or nullopt when the combination cannot occur.
std::optional<Eigen::Matrix2cd> site_oracle(LieLabel label, BetaLabel fake, Bit c0, double theta) {
    const double h = 1.0 / std::sqrt(2.0);
    auto ket = [&](Bit basis, Bit value) {
        Eigen::Vector2cd v;
        if (basis == 0) {
            v << (value == 0 ? 1.0 : 0.0), (value == 1 ? 1.0 : 0.0);
        } else {
            v << h, (value == 0 ? h : -h);
        }
        return v;
    };
    auto proj = [&](Bit basis, Bit value) -> Eigen::Matrix2cd {
        const auto v = ket(basis, value);
        return v * v.adjoint();
    };
    const Bit p = fake.basis, q = fake.value;
    const double c2 = std::cos(theta) * std::cos(theta);
    const Eigen::Matrix2cd mix = c2 * proj(0, q) + (1.0 - c2) * proj(1, q);
    switch (label) {
    case LieLabel::TypeA: return c0 == 0 ? proj(1 - p, q) : proj(1 - p, 1 - q);
    case LieLabel::TypeB: return c0 == 0 ? std::optional<Eigen::Matrix2cd>(mix) : std::nullopt;
    case LieLabel::TypeC: return c0 == 0 ? proj(p, q) : proj(1 - p, 1 - q);
    case LieLabel::Honest: return c0 == 0 ? mix : proj(1 - p, 1 - q);
    default: return std::nullopt;
    }
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// rho_b built from the oracle table; nullopt when no codeword is feasible.
std::optional<Eigen::MatrixXcd> rho_oracle(const RhoSpec &spec, Bit b) {
    const std::size_t n = spec.sites.size();
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(1 << n, 1 << n);
    int count = 0;
    for (const auto &cw : spec.code.codewords()) {
        if (lincode::dot(cw, spec.r) != b) continue;
        const auto c0 = cw ^ spec.c_prime;
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Ones(1, 1);
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            const auto s = site_oracle(spec.sites[i].label, spec.sites[i].fake, c0[i], spec.sites[i].theta);
            if (!s) ok = false;
            else m = kron(m, *s);
        }
        if (!ok) continue;
        sum += m;
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / count;
}

LinearCode random_code_small(std::size_t n, std::size_t k, Rng &rng) {
    for (;;) {
        std::vector<BitString> rows;
        for (std::size_t j = 0; j < k; ++j) {
            BitString row(n);
            for (std::size_t i = 0; i < n; ++i) row.set(i, static_cast<Bit>(rng.bit()));
            rows.push_back(row);
        }
        try {
            return LinearCode(rows);
        } catch (const error &) {
        }
    }
}

RhoSpec random_spec(std::size_t n, std::size_t k, const std::vector<LieLabel> &pool, Rng &rng, double theta = kPi / 4) {
    RhoSpec spec{{}, random_code_small(n, k, rng), BitString(n), BitString(n)};
    for (std::size_t i = 0; i < n; ++i) {
        spec.sites.push_back({pool[rng.below(pool.size())], {static_cast<Bit>(rng.bit()), static_cast<Bit>(rng.bit())}, theta});
        spec.c_prime.set(i, static_cast<Bit>(rng.bit()));
    }
    do {
        for (std::size_t i = 0; i < n; ++i) spec.r.set(i, static_cast<Bit>(rng.bit()));
    } while (spec.r.is_zero());
    return spec;
}

TEST(SiteStates, MatchTheOracleTable) {
    for (double theta : {kPi / 8, kPi / 4, 1.2}) {
        for (auto label : {LieLabel::TypeA, LieLabel::TypeB, LieLabel::TypeC, LieLabel::Honest}) {
            for (Bit p = 0; p < 2; ++p)
                for (Bit q = 0; q < 2; ++q)
                    for (Bit c0 = 0; c0 < 2; ++c0) {
                        const auto st = table1_site_state(label, {p, q}, c0, theta);
                        const auto oracle = site_oracle(label, {p, q}, c0, theta);
                        if (!oracle) {
                            EXPECT_EQ(st.kind, SiteKind::Unavailable);
                            continue;
                        }
                        const auto rho = kernel::DensityMatrix::from_ensemble(st.ensemble());
                        EXPECT_LT((rho.matrix() - *oracle).norm(), 1e-12);
                    }
        }
    }
}

TEST(SiteStates, HonestUnmeasuredIsEqualMixtureAtPiOverFour) {
    const auto st = table1_site_state(LieLabel::Honest, {0, 0}, 0, kPi / 4);
    ASSERT_EQ(st.kind, SiteKind::Mixture);
    ASSERT_EQ(st.mixture.size(), 2u);
    EXPECT_NEAR(st.mixture[0].first, 0.5, 1e-15);
    EXPECT_EQ(st.mixture[0].second.basis, 0);
    EXPECT_EQ(st.mixture[1].second.basis, 1);
    EXPECT_EQ(st.mixture[1].second.value, 0);
}

TEST(SiteStates, DeferredHasNoLieType) {
    try {
        table1_site_state(LieLabel::Deferred, {0, 0}, 0, kPi / 4);
        FAIL();
    } catch (const error &e) {
        EXPECT_EQ(e.code(), errc::deferred_site);
    }
}

TEST(SupportOverlap, PureAndMixed) {
    const auto a0 = SiteState::pure({0, 0});
    const auto a1 = SiteState::pure({0, 1});
    const auto plus = SiteState::pure({1, 0});
    EXPECT_EQ(support_overlap(a0, a1), 0.0);
    EXPECT_NEAR(support_overlap(a0, plus), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(support_overlap(basis_mixture(0, 0.3), a1), 1.0, 1e-12);
}

TEST(PairOverlap, FactorizedMatchesDenseOnPureSites) {
    Rng rng(41);
    const std::vector<LieLabel> pool{LieLabel::TypeA, LieLabel::TypeC};
    for (int it = 0; it < 100; ++it) {
        const std::size_t n = 2 + rng.below(7);
        auto spec = random_spec(n, 1 + rng.below(std::min<std::size_t>(n, 4)), pool, rng);
        const auto cws = spec.code.codewords();
        const auto &x = cws[rng.below(cws.size())];
        const auto &y = cws[rng.below(cws.size())];
        const auto bx = build_B_state(x, spec.c_prime, spec);
        const auto by = build_B_state(y, spec.c_prime, spec);
        // Dense: |<B(x)|B(y)>| of the full product vectors.
        auto product = [&](const BState &b) {
            auto v = kernel::StateVector::basis(1, 0);
            for (const auto &s : b.sites) v = kernel::tensor(v, registers::beta_state(*s.pure_label));
            return v;
        };
        const double dense = std::abs(kernel::overlap(product(bx), product(by)));
        EXPECT_NEAR(pair_overlap(bx, by), dense, 1e-12);
    }
}

TEST(Certificate, AgreesWithDenseTraceProduct) {
    Rng rng(42);
    const std::vector<LieLabel> pool{LieLabel::TypeA, LieLabel::TypeB, LieLabel::TypeC, LieLabel::Honest};
    int orthogonal = 0, overlapping = 0;
    for (int it = 0; it < 150; ++it) {
        const std::size_t n = 3 + rng.below(4);
        auto spec = random_spec(n, 1 + rng.below(3), pool, rng, 0.2 + rng.uniform());
        const auto r0 = rho_oracle(spec, 0);
        const auto r1 = rho_oracle(spec, 1);
        if (!r0 || !r1) continue;
        const double tp = (*r0 * *r1).trace().real();
        const auto cert = certify_orthogonality(spec);
        EXPECT_EQ(cert.orthogonal, tp < 1e-10) << "tp=" << tp;
        (cert.orthogonal ? orthogonal : overlapping) += 1;
        // Library rho_b matches the oracle.
        EXPECT_LT((rho_b(spec, 0).matrix() - *r0).norm(), 1e-10);
        EXPECT_NEAR(kernel::trace_product(rho_b(spec, 0), rho_b(spec, 1)), tp, 1e-10);
    }
    EXPECT_GT(orthogonal, 5);
    EXPECT_GT(overlapping, 5);
}

TEST(Certificate, WitnessIsLexicographicallySmallest) {
    Rng rng(43);
    const std::vector<LieLabel> pool{LieLabel::TypeC, LieLabel::Honest, LieLabel::TypeA};
    for (int it = 0; it < 60; ++it) {
        auto spec = random_spec(6, 3, pool, rng);
        const auto cert = certify_orthogonality(spec);
        // Brute force over feasible pairs with the oracle's dense overlap.
        std::optional<std::pair<BitString, BitString>> best;
        auto cws = spec.code.codewords();
        std::sort(cws.begin(), cws.end());
        for (const auto &x : cws) {
            if (lincode::dot(x, spec.r) != 0) continue;
            for (const auto &y : cws) {
                if (lincode::dot(y, spec.r) != 1) continue;
                const auto bx = build_B_state(x, spec.c_prime, spec);
                const auto by = build_B_state(y, spec.c_prime, spec);
                if (!bx.feasible || !by.feasible) continue;
                if (pair_overlap(bx, by) > 0.0 && !best) best = std::pair{x, y};
            }
        }
        EXPECT_EQ(cert.orthogonal, !best.has_value());
        if (best) {
            ASSERT_TRUE(cert.witness);
            EXPECT_EQ(cert.witness->first, best->first);
            EXPECT_EQ(cert.witness->second, best->second);
            EXPECT_GT(cert.witness_overlap, 0.0);
        }
    }
}

TEST(Certificate, DistanceAboveHonestPlusTypeCIsOrthogonal) {
    Rng rng(44);
    for (int it = 0; it < 40; ++it) {
        // Nine sites: three honest or type-c, six type-a or type-b; any code
        // with d > 3 separates the cosets.
        const std::size_t n = 9;
        std::vector<LieLabel> labels;
        for (int i = 0; i < 3; ++i) labels.push_back(rng.bit() ? LieLabel::Honest : LieLabel::TypeC);
        for (int i = 0; i < 6; ++i) labels.push_back(rng.bit() ? LieLabel::TypeA : LieLabel::TypeB);
        rng.shuffle(std::span<LieLabel>(labels));
        const auto code = lincode::random_code(n, 2, 4, rng, 5000);
        RhoSpec spec{{}, code, BitString(n), BitString(n)};
        BitString c0(n);
        for (std::size_t i = 0; i < n; ++i) {
            spec.sites.push_back({labels[i], {static_cast<Bit>(rng.bit()), static_cast<Bit>(rng.bit())}, kPi / 4});
            if (labels[i] != LieLabel::TypeB) c0.set(i, static_cast<Bit>(rng.bit()));
        }
        do {
            for (std::size_t i = 0; i < n; ++i) spec.r.set(i, static_cast<Bit>(rng.bit()));
        } while (spec.r.is_zero());
        const auto cws = code.codewords();
        spec.c_prime = cws[rng.below(cws.size())] ^ c0;
        const auto cert = certify_orthogonality(spec);
        EXPECT_TRUE(cert.orthogonal);
        if (cert.feasible0 > 0 && cert.feasible1 > 0) {
            EXPECT_LE(kernel::trace_product(rho_b(spec, 0), rho_b(spec, 1)), 1e-10);
        }
    }
}

TEST(Certificate, AllTypeCGivesWitness) {
    Rng rng(45);
    for (int it = 0; it < 20; ++it) {
        auto spec = random_spec(8, 3, {LieLabel::TypeC}, rng);
        // Both cosets must be non-empty for a witness to exist.
        while (std::all_of(spec.code.generator().begin(), spec.code.generator().end(),
                           [&](const BitString &g) { return lincode::dot(g, spec.r) == 0; })) {
            for (std::size_t i = 0; i < 8; ++i) spec.r.set(i, static_cast<Bit>(rng.bit()));
        }
        ASSERT_LE(spec.code.d(), 8u); // d <= h + l'_c = n
        const auto cert = certify_orthogonality(spec);
        ASSERT_FALSE(cert.orthogonal);
        const std::size_t dist = lincode::hamming_distance(cert.witness->first, cert.witness->second);
        EXPECT_NEAR(cert.witness_overlap, std::pow(1.0 / std::sqrt(2.0), static_cast<double>(dist)), 1e-12);
    }
}

TEST(RhoB, NoFeasibleCodeword) {
    // Single type-b site with c' = 1: c = 1 would need c0 = 0 but c = 0 needs c0 = 1.
    RhoSpec spec{{{LieLabel::TypeB, {0, 0}, kPi / 4}}, lincode::repetition_code(1), BitString::from_string("1"),
                 BitString::from_string("0")};
    // c = 0 (c.r = 0): c0 = 0, feasible. c = 1 (c.r = 1): c0 = 1, unavailable.
    EXPECT_NO_THROW(rho_b(spec, 0));
    try {
        rho_b(spec, 1);
        FAIL();
    } catch (const error &e) {
        EXPECT_EQ(e.code(), errc::no_feasible_codeword);
    }
}

TEST(LieTypes, ProbabilitiesAreThetaIndependent) {
    const double expect_m[] = {0.75, 0.25, 0.75, 0.25, 0.5};
    const double expect_l[] = {0.5, 0.25, 0.25, 0.0, 0.25};
    for (double theta : {kPi / 8, kPi / 4, 3 * kPi / 8, 0.1, 1.4}) {
        const auto table = lie_type_probabilities(theta);
        ASSERT_EQ(table.size(), 5u);
        for (std::size_t i = 0; i < 5; ++i) {
            EXPECT_NEAR(table[i].in_m, expect_m[i], 1e-12);
            EXPECT_NEAR(table[i].detected, expect_l[i], 1e-12);
        }
    }
}

TEST(Residuals, IdentityOnProtocolTranscripts) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        protocol::Params p;
        p.s = 600;
        p.f_a = 0.2;
        p.f_b = 0.75;
        p.s_prime = seed % 2 ? 60 : 0;
        auto rng = Rng::for_trial(seed, 0);
        protocol::AlicePolicy alice;
        protocol::BobPolicy bob;
        const auto t = protocol::run_commit(p, alice, bob, rng).transcript;
        ASSERT_TRUE(t.committed());
        const auto rc = residual_accounting(t);
        EXPECT_EQ(rc.l_a_res + rc.l_b_res + rc.l_c_res + rc.h_res + rc.deferred, rc.n);
        EXPECT_EQ(rc.n, t.c0.size());
        EXPECT_EQ(rc.l_a_res, t.La.size() - std::count_if(t.La.begin(), t.La.end(), [&](std::size_t i) {
                                  return std::binary_search(t.L.begin(), t.L.end(), i);
                              }));
    }
}

TEST(Synthetic, TranscriptIsConsistent) {
    Rng rng(46);
    const auto code = lincode::repetition_code(3);
    const auto c = BitString::from_string("111");
    const auto c0 = BitString::from_string("101");
    const auto r = BitString::from_string("100");
    const std::vector<LieLabel> labels(3, LieLabel::TypeA);
    const std::vector<BetaLabel> fakes{{0, 0}, {1, 1}, {0, 1}};
    const auto t = synthetic_transcript(code, labels, fakes, c, c0, r, kPi / 4);
    EXPECT_TRUE(t.committed());
    EXPECT_EQ(t.c_prime.to_string(), "010");
    EXPECT_EQ(t.b, 1);
    EXPECT_EQ(t.M, (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(t.sites[0].q, 1); // in M: q differs from the announced value
    EXPECT_EQ(t.sites[1].q, 1);
    EXPECT_TRUE(certify_orthogonality(rho_spec_from_transcript(t)).orthogonal);
}

} // namespace
