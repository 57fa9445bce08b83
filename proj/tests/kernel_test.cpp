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


#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "qbc/kernel.hpp"
#include "qbc/rng.hpp"

namespace {

using namespace qbc;
using kernel::cplx;
using kernel::DensityMatrix;
using kernel::StateVector;

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

StateVector random_state(std::size_t dim, Rng &rng) {
    std::vector<cplx> v(dim);
    for (auto &a : v) a = cplx(rng.uniform() - 0.5, rng.uniform() - 0.5);
    return StateVector::normalized(v);
}

DensityMatrix random_mixed(std::size_t dim, std::size_t rank, Rng &rng, kernel::Ensemble *out = nullptr) {
    kernel::Ensemble e;
    double total = 0.0;
    for (std::size_t i = 0; i < rank; ++i) {
        const double w = rng.uniform() + 0.05;
        total += w;
        e.push_back({w, random_state(dim, rng)});
    }
    for (auto &ws : e) ws.weight /= total;
    if (out) *out = e;
    return DensityMatrix::from_ensemble(e);
}

// 2x2 closed form: F = tr(rho sigma) + 2 sqrt(det rho det sigma).
double qubit_fidelity(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &b) {
    const double t = (a * b).trace().real();
    const double da = a.determinant().real();
    const double db = b.determinant().real();
    return t + 2.0 * std::sqrt(std::max(0.0, da * db));
}

TEST(StateVector, RejectsUnnormalized) {
    EXPECT_THROW(StateVector({1.0, 1.0}), error);
    EXPECT_NO_THROW(StateVector({kInvSqrt2, kInvSqrt2}));
    EXPECT_THROW(StateVector::normalized({0.0, 0.0}), error);
}

TEST(StateVector, TensorOrdersFirstFactorMostSignificant) {
    const auto v = kernel::tensor(StateVector::basis(2, 1), StateVector::basis(2, 0));
    ASSERT_EQ(v.dim(), 4u);
    EXPECT_EQ(v[2], cplx(1.0));
}

TEST(Measurement, BellStateOutcomes) {
    const StateVector bell({kInvSqrt2, 0.0, 0.0, kInvSqrt2});
    // Measure the first qubit: {|00>,|01>} vs {|10>,|11>}.
    const std::vector<kernel::Subspace> z1{{{StateVector::basis(4, 0), StateVector::basis(4, 1)}},
                                           {{StateVector::basis(4, 2), StateVector::basis(4, 3)}}};
    const auto p = kernel::outcome_probabilities(bell, z1);
    EXPECT_NEAR(p[0], 0.5, 1e-12);
    EXPECT_NEAR(p[1], 0.5, 1e-12);

    const auto low = kernel::measure_projective(bell, z1, 0.25);
    EXPECT_EQ(low.outcome_index, 0u);
    EXPECT_NEAR(std::norm(low.post_state[0]), 1.0, 1e-12);
    const auto high = kernel::measure_projective(bell, z1, 0.75);
    EXPECT_EQ(high.outcome_index, 1u);
    EXPECT_NEAR(std::norm(high.post_state[3]), 1.0, 1e-12);
}

TEST(Measurement, IncompleteProjectorsThrow) {
    const std::vector<kernel::Subspace> partial{{{StateVector::basis(2, 0)}}};
    try {
        kernel::outcome_probabilities(StateVector::basis(2, 0), partial);
        FAIL() << "expected IncompleteProjectors";
    } catch (const error &e) {
        EXPECT_EQ(e.code(), errc::incomplete_projectors);
    }
}

TEST(Measurement, SampledFrequenciesFollowBornRule) {
    const StateVector psi({std::sqrt(0.3), std::sqrt(0.7)});
    const std::vector<kernel::Subspace> z{{{StateVector::basis(2, 0)}}, {{StateVector::basis(2, 1)}}};
    Rng rng(5);
    int zeros = 0;
    const int shots = 20000;
    for (int i = 0; i < shots; ++i) zeros += kernel::measure_projective(psi, z, rng.uniform()).outcome_index == 0;
    const double sigma = std::sqrt(0.3 * 0.7 / shots);
    EXPECT_NEAR(zeros / static_cast<double>(shots), 0.3, 4 * sigma);
}

TEST(DensityMatrix, ValidatesInput) {
    Eigen::MatrixXcd m(2, 2);
    m << 1.2, 0.0, 0.0, -0.2;
    EXPECT_THROW(DensityMatrix{m}, error); // negative eigenvalue
    m << 0.5, 0.1, 0.2, 0.5;
    EXPECT_THROW(DensityMatrix{m}, error); // not Hermitian
    m << 0.6, 0.0, 0.0, 0.6;
    EXPECT_THROW(DensityMatrix{m}, error); // trace
    m << 0.5, 0.0, 0.0, 0.5;
    EXPECT_NO_THROW(DensityMatrix{m});
}

TEST(PartialTrace, BellMarginalIsMaximallyMixed) {
    const auto rho = DensityMatrix::pure(StateVector({kInvSqrt2, 0.0, 0.0, kInvSqrt2}));
    const std::vector<std::size_t> dims{2, 2};
    for (std::size_t keep : {0u, 1u}) {
        const std::vector<std::size_t> k{keep};
        const auto r = kernel::partial_trace(rho, dims, k);
        EXPECT_NEAR(std::abs(r.matrix()(0, 0) - 0.5), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(r.matrix()(1, 1) - 0.5), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(r.matrix()(0, 1)), 0.0, 1e-12);
    }
}

TEST(PartialTrace, ProductStateReturnsFactor) {
    Rng rng(9);
    const auto a = random_state(2, rng);
    const auto b = random_state(3, rng);
    const auto rho = DensityMatrix::pure(kernel::tensor(a, b));
    const std::vector<std::size_t> dims{2, 3};
    const std::vector<std::size_t> keep{1};
    const auto r = kernel::partial_trace(rho, dims, keep);
    const auto expect = DensityMatrix::pure(b);
    EXPECT_LT((r.matrix() - expect.matrix()).norm(), 1e-12);
}

TEST(Fidelity, IdenticalStatesGiveOne) {
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        kernel::Ensemble e;
        const auto rho = random_mixed(4, 3, rng, &e);
        EXPECT_NEAR(kernel::fidelity(rho, rho), 1.0, 1e-9);
        EXPECT_NEAR(kernel::fidelity(e, e), 1.0, 1e-9);
    }
}

TEST(Fidelity, OrthogonalSupportsGiveZero) {
    const auto r0 = DensityMatrix::pure(StateVector::basis(4, 0));
    const auto r1 = DensityMatrix::from_ensemble({{0.5, StateVector::basis(4, 2)}, {0.5, StateVector::basis(4, 3)}});
    EXPECT_EQ(kernel::fidelity(r0, r1), 0.0);
}

TEST(Fidelity, QubitClosedFormOracle) {
    Rng rng(21);
    for (int i = 0; i < 100; ++i) {
        kernel::Ensemble e0, e1;
        const auto r0 = random_mixed(2, 2, rng, &e0);
        const auto r1 = random_mixed(2, 2, rng, &e1);
        const double oracle = qubit_fidelity(r0.matrix(), r1.matrix());
        EXPECT_NEAR(kernel::fidelity(r0, r1), oracle, 1e-9);
        EXPECT_NEAR(kernel::fidelity(e0, e1), oracle, 1e-9);
    }
}

TEST(Fidelity, PureStatesReduceToOverlap) {
    Rng rng(22);
    for (int i = 0; i < 50; ++i) {
        const auto a = random_state(8, rng);
        const auto b = random_state(8, rng);
        const double oracle = std::norm(kernel::overlap(a, b));
        EXPECT_NEAR(kernel::fidelity(DensityMatrix::pure(a), DensityMatrix::pure(b)), oracle, 1e-9);
    }
}

TEST(Fidelity, DenseAndEnsembleRoutesAgree) {
    Rng rng(23);
    for (int i = 0; i < 30; ++i) {
        kernel::Ensemble e0, e1;
        const auto r0 = random_mixed(8, 1 + rng.below(4), rng, &e0);
        const auto r1 = random_mixed(8, 1 + rng.below(4), rng, &e1);
        EXPECT_NEAR(kernel::fidelity(r0, r1), kernel::fidelity(e0, e1), 1e-8);
    }
}

TEST(TraceProduct, MatchesDirectSum) {
    const auto r0 = DensityMatrix::from_ensemble({{0.25, StateVector::basis(2, 0)}, {0.75, StateVector::basis(2, 1)}});
    const auto r1 = DensityMatrix::pure(StateVector({kInvSqrt2, kInvSqrt2}));
    EXPECT_NEAR(kernel::trace_product(r0, r1), 0.5, 1e-12);
}

} // namespace
