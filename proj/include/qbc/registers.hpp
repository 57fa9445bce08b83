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
 * @file registers.hpp
 * State preparation and measurement of one alpha (x) beta register pair.
 *
 * The pair lives in a 4-dimensional space ordered as
 *   { |x>|0,0>, |x>|0,1>, |y>|0,0>, |y>|0,1> },
 * i.e. alpha is the most significant factor with |x> = 0 and |y> = 1, and the
 * beta factor is written in its basis-0 (computational) states.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <utility>

#include "qbc/error.hpp"
#include "qbc/kernel.hpp"

namespace qbc {

using Bit = std::uint8_t;

constexpr Bit flip(Bit b) noexcept { return static_cast<Bit>(b ^ 1U); }

} // namespace qbc

namespace qbc::registers {

using kernel::cplx;
using kernel::StateVector;

/// |basis, value> for the beta register.
struct BetaLabel {
    Bit basis = 0;
    Bit value = 0;
    friend bool operator==(const BetaLabel &, const BetaLabel &) = default;
};

/// The four beta states: basis 0 is computational, basis 1 is the rotated
/// pair |1,0> = (|0,0> + |0,1>)/sqrt2, |1,1> = (|0,0> - |0,1>)/sqrt2.
inline StateVector beta_state(BetaLabel label) {
    if (label.basis == 0) return StateVector::basis(2, label.value);
    const double h = std::numbers::sqrt2 / 2.0;
    return StateVector({cplx(h), cplx(label.value == 0 ? h : -h)});
}

/// |x> (p = 0) or |y> (p = 1).
inline StateVector alpha_state(Bit p) { return StateVector::basis(2, p); }

/// cos(theta) |x>|0,q> + sin(theta) |y>|1,q>.
inline StateVector entangled_state(double theta, Bit q) {
    const auto x_part = kernel::tensor(alpha_state(0), beta_state({0, q}));
    const auto y_part = kernel::tensor(alpha_state(1), beta_state({1, q}));
    std::vector<cplx> amps(4);
    for (std::size_t i = 0; i < 4; ++i) amps[i] = std::cos(theta) * x_part[i] + std::sin(theta) * y_part[i];
    return StateVector::normalized(std::move(amps));
}

class PairState {
  public:
    [[nodiscard]] double theta() const noexcept { return theta_; }
    [[nodiscard]] Bit q() const noexcept { return q_; }
    [[nodiscard]] const StateVector &joint() const noexcept { return joint_; }
    [[nodiscard]] std::optional<Bit> alpha_measured() const noexcept { return alpha_; }
    [[nodiscard]] std::optional<BetaLabel> beta_outcome() const noexcept { return beta_; }

  private:
    PairState(double theta, Bit q, StateVector joint)
        : theta_(theta), q_(q), joint_(std::move(joint)) {}

    friend PairState make_pair_state(double theta, Bit q);
    friend std::pair<Bit, PairState> measure_beta(const PairState &, Bit, double);
    friend std::pair<Bit, PairState> measure_alpha(const PairState &, double);

    double theta_;
    Bit q_;
    StateVector joint_;
    std::optional<Bit> alpha_;
    std::optional<BetaLabel> beta_;
};

inline PairState make_pair_state(double theta, Bit q) {
    if (!(theta > 0.0 && theta < std::numbers::pi / 2.0)) {
        throw error(errc::theta_out_of_range, "theta must lie in (0, pi/2), got " + std::to_string(theta));
    }
    return PairState(theta, q, entangled_state(theta, q));
}

namespace detail {

inline std::array<kernel::Subspace, 2> beta_measurement(Bit basis) {
    std::array<kernel::Subspace, 2> out;
    for (Bit v = 0; v < 2; ++v) {
        const auto b = beta_state({basis, v});
        out[v].basis = {kernel::tensor(alpha_state(0), b), kernel::tensor(alpha_state(1), b)};
    }
    return out;
}

inline std::array<kernel::Subspace, 2> alpha_measurement() {
    std::array<kernel::Subspace, 2> out;
    for (Bit p = 0; p < 2; ++p) {
        out[p].basis = {kernel::tensor(alpha_state(p), beta_state({0, 0})),
                        kernel::tensor(alpha_state(p), beta_state({0, 1}))};
    }
    return out;
}

} // namespace detail

/// Exact distribution of q' when beta is measured in basis `p_prime`.
inline std::array<double, 2> beta_distribution(const PairState &pair, Bit p_prime) {
    const auto m = detail::beta_measurement(p_prime);
    const auto probs = kernel::outcome_probabilities(pair.joint(), m);
    return {probs[0], probs[1]};
}

inline std::pair<Bit, PairState> measure_beta(const PairState &pair, Bit p_prime, double draw) {
    if (pair.beta_) throw error(errc::already_measured, "beta register already measured");
    const auto m = detail::beta_measurement(p_prime);
    auto outcome = kernel::measure_projective(pair.joint(), m, draw);
    PairState next = pair;
    next.joint_ = std::move(outcome.post_state);
    const auto q_prime = static_cast<Bit>(outcome.outcome_index);
    next.beta_ = BetaLabel{p_prime, q_prime};
    return {q_prime, std::move(next)};
}

/// Exact distribution of Alice's result p (0 for |x>, 1 for |y>).
inline std::array<double, 2> alpha_distribution(const PairState &pair) {
    const auto m = detail::alpha_measurement();
    const auto probs = kernel::outcome_probabilities(pair.joint(), m);
    return {probs[0], probs[1]};
}

inline std::pair<Bit, PairState> measure_alpha(const PairState &pair, double draw) {
    if (pair.alpha_) throw error(errc::already_measured, "alpha register already measured");
    const auto m = detail::alpha_measurement();
    auto outcome = kernel::measure_projective(pair.joint(), m, draw);
    PairState next = pair;
    next.joint_ = std::move(outcome.post_state);
    const auto p = static_cast<Bit>(outcome.outcome_index);
    next.alpha_ = p;
    return {p, std::move(next)};
}

/// The alpha factor of a pair whose beta register has been measured.
inline StateVector alpha_factor(const PairState &pair) {
    if (!pair.beta_outcome()) throw error(errc::invalid_state, "beta not measured; pair may be entangled");
    const auto b = beta_state(*pair.beta_outcome());
    std::vector<cplx> a(2);
    for (std::size_t k = 0; k < 2; ++k) {
        a[k] = std::conj(b[0]) * pair.joint()[2 * k] + std::conj(b[1]) * pair.joint()[2 * k + 1];
    }
    return StateVector::normalized(std::move(a));
}

/// Joint law of (q', p) for "beta in basis p_prime, then alpha" and for
/// "alpha, then beta" on a fresh copy of `pair`, indexed [q'][p].
inline std::array<std::array<double, 2>, 2> outcome_law_beta_first(const PairState &pair, Bit p_prime) {
    std::array<std::array<double, 2>, 2> law{};
    const auto bd = beta_distribution(pair, p_prime);
    for (Bit qp = 0; qp < 2; ++qp) {
        if (bd[qp] <= 0.0) continue;
        // Draw inside the qp-th cumulative bucket to force that branch.
        const double draw = (qp == 0 ? 0.0 : bd[0]) + 0.5 * bd[qp];
        const auto after = measure_beta(pair, p_prime, draw).second;
        const auto ad = alpha_distribution(after);
        for (Bit p = 0; p < 2; ++p) law[qp][p] = bd[qp] * ad[p];
    }
    return law;
}

inline std::array<std::array<double, 2>, 2> outcome_law_alpha_first(const PairState &pair, Bit p_prime) {
    std::array<std::array<double, 2>, 2> law{};
    const auto ad = alpha_distribution(pair);
    for (Bit p = 0; p < 2; ++p) {
        if (ad[p] <= 0.0) continue;
        const double draw = (p == 0 ? 0.0 : ad[0]) + 0.5 * ad[p];
        const auto after = measure_alpha(pair, draw).second;
        const auto bd = beta_distribution(after, p_prime);
        for (Bit qp = 0; qp < 2; ++qp) law[qp][p] = ad[p] * bd[qp];
    }
    return law;
}

/// What Alice announces about one pair at unveil: the preparation (theta, q)
/// and, for a pair she claims to have measured, her alpha result.
struct PairClaim {
    double theta;
    Bit q;
    std::optional<Bit> alpha_outcome;
};

struct ProjectionCheck {
    bool accept;
    double success_probability;
};

/// Probability that the verifier's projection onto the claimed state succeeds.
///
/// The claimed state is the entangled preparation, or |p>|p,q> when an alpha
/// result is claimed. If beta was already measured, the claim is first
/// conditioned on the recorded outcome. The verifier projects the registers
/// it holds: both (holds_alpha) or beta alone. A verifier holding nothing
/// quantum (beta measured, alpha not handed over) can only check that the
/// recorded outcome is possible under the claim.
inline double projection_success_probability(const PairState &pair, const PairClaim &claim,
                                             bool holds_alpha) {
    std::vector<cplx> claimed(4);
    if (claim.alpha_outcome) {
        const auto v = kernel::tensor(alpha_state(*claim.alpha_outcome),
                                      beta_state({*claim.alpha_outcome, claim.q}));
        claimed.assign(v.amplitudes().begin(), v.amplitudes().end());
    } else {
        const auto v = entangled_state(claim.theta, claim.q);
        claimed.assign(v.amplitudes().begin(), v.amplitudes().end());
    }

    if (const auto out = pair.beta_outcome()) {
        const auto b = beta_state(*out);
        std::vector<cplx> cond(4);
        double n2 = 0.0;
        for (std::size_t a = 0; a < 2; ++a) {
            const cplx c = std::conj(b[0]) * claimed[2 * a] + std::conj(b[1]) * claimed[2 * a + 1];
            cond[2 * a] = c * b[0];
            cond[2 * a + 1] = c * b[1];
            n2 += std::norm(c);
        }
        if (n2 < kernel::norm_tolerance) return 0.0;
        if (!holds_alpha) return 1.0;
        claimed = std::move(cond);
    }

    const auto target = StateVector::normalized(claimed);
    if (holds_alpha) return std::min(1.0, std::norm(kernel::overlap(target, pair.joint())));

    // Beta only: project onto the support of the claimed beta marginal.
    const auto rho = kernel::DensityMatrix::pure(target);
    const std::array<std::size_t, 2> dims{2, 2};
    const std::array<std::size_t, 1> keep{1};
    const auto marginal = kernel::partial_trace(rho, dims, keep);
    const auto support = kernel::eigen_ensemble(marginal.matrix());
    double p = 0.0;
    for (const auto &ws : support) {
        for (Bit a = 0; a < 2; ++a) {
            p += std::norm(kernel::overlap(kernel::tensor(alpha_state(a), ws.state), pair.joint()));
        }
    }
    return std::min(1.0, p);
}

inline ProjectionCheck joint_projection_check(const PairState &pair, const PairClaim &claim,
                                              bool holds_alpha, double draw) {
    const double p = projection_success_probability(pair, claim, holds_alpha);
    return {draw < p, p};
}

} // namespace qbc::registers
