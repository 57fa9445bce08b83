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
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "qbc/protocol.hpp"
#include "qbc/rng.hpp"
#include "qbc/transcript_io.hpp"
#include "qbc/window.hpp"

namespace {

using namespace qbc;
using namespace qbc::protocol;

Params window_params(std::size_t s, std::uint64_t seed) {
    Params p;
    p.s = s;
    p.f_a = 0.2;
    p.f_b = 0.75;
    p.f_c = 0.0;
    p.seed = seed;
    return p;
}

/// Announces every measured position as a detected lie.
class OverreportingAlice : public AlicePolicy {
  public:
    void detect_lies(CommitSession &session, Rng &rng) override {
        AlicePolicy::detect_lies(session, rng);
        session.transcript.L = session.transcript.M;
    }
};

/// Unveils the opposite bit.
class WrongBitAlice : public AlicePolicy {
  public:
    UnveilMessage unveil(CommitSession &session, Rng &rng) override {
        auto msg = AlicePolicy::unveil(session, rng);
        msg.b = flip(msg.b);
        return msg;
    }
};

TEST(Validate, NamesTheViolatedConstraint) {
    auto p = window_params(100, 1);
    p.f_a = 0.3;
    p.f_b = 0.4;
    p.f_c = 0.3;
    try {
        validate(p);
        FAIL();
    } catch (const error &e) {
        EXPECT_EQ(e.code(), errc::invalid_params);
        EXPECT_NE(std::string(e.what()).find("C3"), std::string::npos);
    }
    EXPECT_NO_THROW(validate(p, /*bob_honest=*/false));
    p = window_params(100, 1);
    p.s_prime = 100;
    EXPECT_THROW(validate(p), error);
    p = window_params(100, 1);
    p.theta = {0.0};
    EXPECT_THROW(validate(p), error);
    p.theta = {0.3, 0.4};
    EXPECT_THROW(validate(p), error);
}

TEST(Helpers, RoundHalfEven) {
    EXPECT_EQ(round_half_even(0.5), 0);
    EXPECT_EQ(round_half_even(1.5), 2);
    EXPECT_EQ(round_half_even(2.5), 2);
    EXPECT_EQ(round_half_even(2.5000001), 3);
    EXPECT_EQ(round_half_even(-0.5), 0);
    EXPECT_EQ(round_half_even(-1.5), -2);
}

TEST(Helpers, StatisticalCheckBand) {
    // rate 1/2 over 100: sigma = 5.
    EXPECT_TRUE(statistical_check(70, 0.5, 100, 4.0));
    EXPECT_FALSE(statistical_check(71, 0.5, 100, 4.0));
    EXPECT_TRUE(statistical_check(30, 0.5, 100, 4.0));
}

TEST(Window, WorkedExamples) {
    const auto w = analysis::d_window(0.2, 0.75, 0.0, 1000);
    EXPECT_DOUBLE_EQ(w.d_min, 50.0);
    EXPECT_DOUBLE_EQ(w.d_max, 100.0);
    EXPECT_TRUE(w.window_nonempty);
    EXPECT_EQ(w.lowest_valid_d(), 51);
    EXPECT_EQ(w.highest_valid_d(), 99);
    EXPECT_FALSE(analysis::d_window(0.25, 0.25, 0.25, 1000).window_nonempty);
    EXPECT_FALSE(analysis::d_window(0.0, 0.5, 0.0, 1000).window_nonempty);
}

TEST(Window, WidthIdentityOnDyadicFrequencies) {
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
        const double fa = static_cast<double>(rng.below(513)) / 1024.0;
        const double fb = static_cast<double>(rng.below(1025 - static_cast<std::uint64_t>(fa * 1024))) / 1024.0;
        const double fc = static_cast<double>(rng.below(1025 - static_cast<std::uint64_t>((fa + fb) * 1024))) / 1024.0;
        const double s = 4096.0;
        const auto w = analysis::d_window(fa, fb, fc, s);
        const double width = (1.5 * fa + fb + 0.75 * fc - 1.0) * s;
        EXPECT_EQ(w.d_max - w.d_min, width);
        EXPECT_EQ(w.window_nonempty, 1.5 * fa + fb + 0.75 * fc > 1.0);
    }
}

TEST(Commit, HonestRunInvariants) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto p = window_params(800, seed);
        p.s_prime = seed == 3 ? 80 : 0;
        auto rng = Rng::for_trial(p.seed, 0);
        AlicePolicy alice;
        BobPolicy bob;
        auto session = run_commit(p, alice, bob, rng);
        const auto &t = session.transcript;
        ASSERT_TRUE(t.committed()) << t.aborted_at.value_or("");

        // M and U partition S; L is inside M.
        std::set<std::size_t> m(t.M.begin(), t.M.end()), u(t.U.begin(), t.U.end());
        EXPECT_EQ(m.size() + u.size(), p.s);
        for (auto i : t.U) EXPECT_FALSE(m.count(i));
        for (auto i : t.L) EXPECT_TRUE(m.count(i));
        EXPECT_TRUE(std::is_sorted(t.M.begin(), t.M.end()));
        EXPECT_TRUE(std::is_sorted(t.L.begin(), t.L.end()));

        // Lie counts follow f s - s'/4.
        const double dq = static_cast<double>(p.s_prime) / 4.0;
        EXPECT_EQ(static_cast<long>(t.La.size()), round_half_even(p.f_a * p.s - dq));
        EXPECT_EQ(static_cast<long>(t.Lb.size()), round_half_even(p.f_b * p.s - dq));
        EXPECT_EQ(t.Sprime.size(), p.s_prime);

        // Commitment strings.
        const std::size_t n = p.s - t.L.size();
        EXPECT_EQ(t.c0.size(), n);
        EXPECT_EQ(t.c_prime, t.c ^ t.c0);
        EXPECT_TRUE(t.code->contains(t.c));
        EXPECT_EQ(lincode::dot(t.c, t.r), t.b);
        EXPECT_FALSE(t.r.is_zero());
        const auto kept = t.kept_positions();
        for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(t.c0[j], m.count(kept[j]) ? 1 : 0);

        // Honest Bob never has an honest label among detected sites.
        for (auto i : t.L) EXPECT_NE(t.sites[i].label, LieLabel::Honest);

        const auto v = run_unveil(session, alice, rng);
        EXPECT_TRUE(v.accept);
        EXPECT_EQ(v.u3_registers, n);
    }
}

TEST(Commit, DefaultCodeSitsInTheWindow) {
    auto p = window_params(1000, 4);
    auto rng = Rng::for_trial(p.seed, 0);
    AlicePolicy alice;
    BobPolicy bob;
    const auto session = run_commit(p, alice, bob, rng);
    ASSERT_TRUE(session.transcript.committed());
    const auto w = analysis::d_window(p.f_a, p.f_b, p.f_c, 1000.0);
    EXPECT_GT(static_cast<double>(session.transcript.code->d()), w.d_min);
    EXPECT_LT(static_cast<double>(session.transcript.code->d()), w.d_max);
}

TEST(Commit, ReplayIsDeterministic) {
    const auto p = window_params(300, 9);
    auto once = [&] {
        auto rng = Rng::for_trial(p.seed, 5);
        AlicePolicy alice;
        BobPolicy bob;
        return io::to_json(run_commit(p, alice, bob, rng).transcript).dump();
    };
    EXPECT_EQ(once(), once());
}

TEST(Commit, MeasuredTooOftenAbortsAtC4) {
    auto p = window_params(2000, 6);
    p.f_a = 0.5;
    p.f_b = 0.2;
    p.f_c = 0.3; // Pr(M) = 0.65
    auto rng = Rng::for_trial(p.seed, 0);
    AlicePolicy alice;
    BobPolicy bob;
    const auto session = run_commit(p, alice, bob, rng);
    ASSERT_TRUE(session.transcript.aborted_at.has_value());
    EXPECT_EQ(*session.transcript.aborted_at, "C4a");
    EXPECT_FALSE(session.transcript.committed());
}

TEST(Commit, HonestLabelInLAbortsAtC5b) {
    auto p = window_params(1000, 7);
    auto rng = Rng::for_trial(p.seed, 0);
    OverreportingAlice alice;
    BobPolicy bob;
    const auto session = run_commit(p, alice, bob, rng);
    EXPECT_EQ(session.transcript.aborted_at.value_or(""), "C5b");
}

TEST(Commit, InfeasibleLieCounts) {
    auto p = window_params(400, 8);
    p.f_a = 0.25;
    p.f_b = 0.75;
    p.s_prime = 100;
    auto rng = Rng::for_trial(p.seed, 0);
    AlicePolicy alice;
    BobPolicy bob;
    try {
        run_commit(p, alice, bob, rng);
        FAIL();
    } catch (const error &e) {
        EXPECT_EQ(e.code(), errc::infeasible_lie_counts);
    }
}

TEST(Commit, DeferredSitesPassC5a) {
    auto p = window_params(2000, 10);
    p.s_prime = 200;
    auto rng = Rng::for_trial(p.seed, 0);
    AlicePolicy alice;
    BobPolicy bob;
    auto session = run_commit(p, alice, bob, rng);
    ASSERT_TRUE(session.transcript.committed()) << session.transcript.aborted_at.value_or("");
    EXPECT_TRUE(session.transcript.passed("C5a"));
    EXPECT_TRUE(run_unveil(session, alice, rng).accept);
}

TEST(Unveil, WrongBitFailsDotCheck) {
    auto p = window_params(600, 11);
    auto rng = Rng::for_trial(p.seed, 0);
    WrongBitAlice alice;
    BobPolicy bob;
    auto session = run_commit(p, alice, bob, rng);
    ASSERT_TRUE(session.transcript.committed());
    const auto v = run_unveil(session, alice, rng);
    EXPECT_FALSE(v.accept);
    EXPECT_EQ(v.failed, std::vector<std::string>{"U5a"});
}

TEST(Unveil, RejectsUncommittedSession) {
    CommitSession empty;
    AlicePolicy alice;
    Rng rng(1);
    EXPECT_THROW(run_unveil(empty, alice, rng), error);
}

TEST(Expectations, Aggregates) {
    const auto p = window_params(1, 0);
    EXPECT_DOUBLE_EQ(expected_measured_rate(p), 0.35);
    EXPECT_DOUBLE_EQ(expected_detected_rate(p), 0.2875);
}

} // namespace
