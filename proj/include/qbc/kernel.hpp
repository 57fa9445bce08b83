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
 * @file kernel.hpp
 * Dense state-vector and density-matrix kernel for small Hilbert spaces.
 *
 * Index convention: in every tensor product the first-listed factor is the
 * most significant digit, i.e. |j>|k> sits at index j * dim(b) + k.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qbc/error.hpp"

namespace qbc::kernel {

using cplx = std::complex<double>;

inline constexpr double norm_tolerance = 1e-12;
inline constexpr double spectral_tolerance = 1e-10;
inline constexpr std::size_t max_dim = std::size_t{1} << 14;

class StateVector {
  public:
    /// Takes ownership of `amplitudes`; they must already be normalized.
    explicit StateVector(std::vector<cplx> amplitudes) : amps_(std::move(amplitudes)) {
        if (amps_.empty() || amps_.size() > max_dim) {
            throw error(errc::invalid_state, "state dimension " + std::to_string(amps_.size()));
        }
        if (std::abs(norm_squared() - 1.0) > norm_tolerance) {
            throw error(errc::invalid_state,
                        "state not normalized (|psi|^2 = " + std::to_string(norm_squared()) + ")");
        }
    }

    /// Rescales to unit norm. Throws if the vector is (numerically) zero.
    static StateVector normalized(std::vector<cplx> amplitudes) {
        double n2 = 0.0;
        for (const auto &a : amplitudes) n2 += std::norm(a);
        if (!(n2 > 1e-300)) throw error(errc::invalid_state, "cannot normalize a zero vector");
        const double inv = 1.0 / std::sqrt(n2);
        for (auto &a : amplitudes) a *= inv;
        return StateVector(std::move(amplitudes));
    }

    static StateVector basis(std::size_t dim, std::size_t k) {
        std::vector<cplx> v(dim, 0.0);
        v.at(k) = 1.0;
        return StateVector(std::move(v));
    }

    [[nodiscard]] std::size_t dim() const noexcept { return amps_.size(); }
    [[nodiscard]] const cplx &operator[](std::size_t i) const { return amps_[i]; }
    [[nodiscard]] std::span<const cplx> amplitudes() const noexcept { return amps_; }

    [[nodiscard]] double norm_squared() const {
        double n2 = 0.0;
        for (const auto &a : amps_) n2 += std::norm(a);
        return n2;
    }

  private:
    std::vector<cplx> amps_;
};

/// <a|b>, conjugating the first argument.
inline cplx overlap(const StateVector &a, const StateVector &b) {
    if (a.dim() != b.dim()) {
        throw error(errc::dimension_mismatch,
                    std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    }
    cplx acc = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

inline StateVector tensor(const StateVector &a, const StateVector &b) {
    std::vector<cplx> out(a.dim() * b.dim());
    for (std::size_t j = 0; j < a.dim(); ++j) {
        for (std::size_t k = 0; k < b.dim(); ++k) out[j * b.dim() + k] = a[j] * b[k];
    }
    return StateVector::normalized(std::move(out));
}

/// A subspace given by an orthonormal basis. A complete projective
/// measurement is a list of mutually orthogonal subspaces spanning the space.
struct Subspace {
    std::vector<StateVector> basis;
};

struct MeasurementOutcome {
    std::size_t outcome_index;
    double probability;
    StateVector post_state;
};

namespace detail {

inline Eigen::MatrixXcd projector(const Subspace &sub, std::size_t dim) {
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                                static_cast<Eigen::Index>(dim));
    for (const auto &v : sub.basis) {
        if (v.dim() != dim) throw error(errc::dimension_mismatch, "projector basis vector");
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = 0; c < dim; ++c) {
                p(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += v[r] * std::conj(v[c]);
            }
        }
    }
    return p;
}

inline void check_complete(std::span<const Subspace> subspaces, std::size_t dim) {
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                                  static_cast<Eigen::Index>(dim));
    for (const auto &s : subspaces) sum += projector(s, dim);
    const double dev = (sum - Eigen::MatrixXcd::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff();
    if (dev > norm_tolerance) {
        throw error(errc::incomplete_projectors,
                    "sum of projectors deviates from identity by " + std::to_string(dev));
    }
}

inline std::vector<cplx> project(const StateVector &state, const Subspace &sub) {
    std::vector<cplx> out(state.dim(), 0.0);
    for (const auto &v : sub.basis) {
        const cplx c = overlap(v, state);
        for (std::size_t i = 0; i < state.dim(); ++i) out[i] += c * v[i];
    }
    return out;
}

} // namespace detail

/// Born probabilities of every outcome (analytic mode of measure_projective).
inline std::vector<double> outcome_probabilities(const StateVector &state,
                                                 std::span<const Subspace> subspaces) {
    detail::check_complete(subspaces, state.dim());
    std::vector<double> probs;
    probs.reserve(subspaces.size());
    for (const auto &s : subspaces) {
        double p = 0.0;
        for (const auto &v : s.basis) p += std::norm(overlap(v, state));
        probs.push_back(p);
    }
    return probs;
}

/// Samples an outcome: outcome k is chosen when the cumulative probability
/// through k first exceeds `draw`.
inline MeasurementOutcome measure_projective(const StateVector &state,
                                             std::span<const Subspace> subspaces, double draw) {
    const auto probs = outcome_probabilities(state, subspaces);
    std::size_t k = 0;
    double cumulative = 0.0;
    std::size_t last_nonzero = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] > 0.0) last_nonzero = i;
    }
    for (k = 0; k < probs.size(); ++k) {
        cumulative += probs[k];
        if (probs[k] > 0.0 && draw < cumulative) break;
    }
    if (k >= probs.size()) k = last_nonzero; // rounding at the top of [0,1)
    return {k, probs[k], StateVector::normalized(detail::project(state, subspaces[k]))};
}

struct WeightedState {
    double weight;
    StateVector state;
};

/// Explicit mixture of pure states.
using Ensemble = std::vector<WeightedState>;

class DensityMatrix {
  public:
    /// Full validation: Hermitian, unit trace and positive semidefinite.
    explicit DensityMatrix(Eigen::MatrixXcd entries) : m_(std::move(entries)) {
        check_shape_and_trace();
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m_, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -spectral_tolerance) {
            throw error(errc::invalid_state, "density matrix has a negative eigenvalue");
        }
    }

    static DensityMatrix pure(const StateVector &psi) { return from_ensemble({{1.0, psi}}); }

    /// Sum of w |psi><psi|. Positive by construction, so only the trace and
    /// Hermiticity are checked.
    static DensityMatrix from_ensemble(const Ensemble &ensemble) {
        if (ensemble.empty()) throw error(errc::invalid_state, "empty ensemble");
        const auto n = static_cast<Eigen::Index>(ensemble.front().state.dim());
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
        for (const auto &[w, psi] : ensemble) {
            if (static_cast<Eigen::Index>(psi.dim()) != n) {
                throw error(errc::dimension_mismatch, "ensemble members differ in dimension");
            }
            if (w < 0.0) throw error(errc::invalid_state, "negative ensemble weight");
            const Eigen::Map<const Eigen::VectorXcd> v(psi.amplitudes().data(), n);
            m.noalias() += w * (v * v.adjoint());
        }
        return DensityMatrix(std::move(m), unchecked_tag{});
    }

    /// For matrices positive by construction (e.g. partial traces).
    static DensityMatrix from_positive(Eigen::MatrixXcd entries) {
        return DensityMatrix(std::move(entries), unchecked_tag{});
    }

    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    [[nodiscard]] const Eigen::MatrixXcd &matrix() const noexcept { return m_; }
    [[nodiscard]] double purity() const { return (m_ * m_).trace().real(); }

  private:
    struct unchecked_tag {};
    DensityMatrix(Eigen::MatrixXcd entries, unchecked_tag) : m_(std::move(entries)) {
        check_shape_and_trace();
    }

    void check_shape_and_trace() const {
        if (m_.rows() != m_.cols() || m_.rows() < 1) {
            throw error(errc::invalid_state, "density matrix must be square and non-empty");
        }
        if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > norm_tolerance) {
            throw error(errc::invalid_state, "density matrix is not Hermitian");
        }
        if (std::abs(m_.trace() - cplx(1.0)) > norm_tolerance) {
            throw error(errc::invalid_state, "density matrix trace differs from 1");
        }
    }

    Eigen::MatrixXcd m_;
};

/// Traces out every factor not listed in `keep`. The kept factors retain
/// their relative order.
inline DensityMatrix partial_trace(const DensityMatrix &rho, std::span<const std::size_t> dims,
                                   std::span<const std::size_t> keep) {
    const std::size_t total =
        std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
    if (total != rho.dim()) {
        throw error(errc::dimension_mismatch, "factor dimensions multiply to " +
                                                  std::to_string(total) + ", matrix is " +
                                                  std::to_string(rho.dim()));
    }
    std::vector<bool> kept(dims.size(), false);
    for (auto k : keep) {
        if (k >= dims.size()) throw error(errc::dimension_mismatch, "kept factor out of range");
        kept[k] = true;
    }
    std::size_t dim_keep = 1;
    std::size_t dim_trace = 1;
    for (std::size_t f = 0; f < dims.size(); ++f) (kept[f] ? dim_keep : dim_trace) *= dims[f];

    // Split a full index into (kept index, traced index), most significant first.
    auto split = [&](std::size_t idx) {
        std::size_t ki = 0, ti = 0, kscale = 1, tscale = 1;
        for (std::size_t f = dims.size(); f-- > 0;) {
            const std::size_t digit = idx % dims[f];
            idx /= dims[f];
            if (kept[f]) {
                ki += digit * kscale;
                kscale *= dims[f];
            } else {
                ti += digit * tscale;
                tscale *= dims[f];
            }
        }
        return std::pair{ki, ti};
    };

    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim_keep),
                                                  static_cast<Eigen::Index>(dim_keep));
    std::vector<std::pair<std::size_t, std::size_t>> parts(total);
    for (std::size_t i = 0; i < total; ++i) parts[i] = split(i);
    const auto &m = rho.matrix();
    for (std::size_t r = 0; r < total; ++r) {
        for (std::size_t c = 0; c < total; ++c) {
            if (parts[r].second != parts[c].second) continue;
            out(static_cast<Eigen::Index>(parts[r].first), static_cast<Eigen::Index>(parts[c].first)) +=
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
    }
    // Partial trace of a valid state is valid; skip the O(d^3) spectral check.
    return DensityMatrix::from_positive(std::move(out));
}

/// Spectral decomposition as an ensemble (eigenvalues below the spectral
/// tolerance are dropped).
inline Ensemble eigen_ensemble(const Eigen::MatrixXcd &m) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    Ensemble out;
    double kept_weight = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double w = es.eigenvalues()(i);
        if (w <= spectral_tolerance) continue;
        std::vector<cplx> v(es.eigenvectors().col(i).data(), es.eigenvectors().col(i).data() + m.rows());
        out.push_back({w, StateVector::normalized(std::move(v))});
        kept_weight += w;
    }
    for (auto &ws : out) ws.weight /= kept_weight;
    return out;
}

inline double trace_product(const DensityMatrix &a, const DensityMatrix &b) {
    if (a.dim() != b.dim()) throw error(errc::dimension_mismatch, "trace_product");
    // Tr(AB) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B.
    return (a.matrix().array() * b.matrix().conjugate().array()).sum().real();
}

namespace detail {

// Eigenvalues this small are rounding noise; their square roots would not be.
inline constexpr double root_floor = 1e-13;

inline Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd &m) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    const Eigen::VectorXd ev =
        es.eigenvalues().unaryExpr([](double x) { return x > root_floor ? std::sqrt(x) : 0.0; });
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace detail

/// Uhlmann fidelity F = (Tr sqrt(sqrt(r0) r1 sqrt(r0)))^2, evaluated as the
/// squared trace norm of sqrt(r0) sqrt(r1).
inline double fidelity(const DensityMatrix &r0, const DensityMatrix &r1) {
    if (r0.dim() != r1.dim()) throw error(errc::dimension_mismatch, "fidelity");
    const Eigen::MatrixXcd prod = detail::psd_sqrt(r0.matrix()) * detail::psd_sqrt(r1.matrix());
    const Eigen::BDCSVD<Eigen::MatrixXcd> svd(prod);
    const double tn = svd.singularValues().sum();
    const double f = tn * tn;
    return f < spectral_tolerance ? 0.0 : std::min(f, 1.0);
}

/// Fidelity from ensemble forms: with r0 = A A^dag and r1 = B B^dag (columns
/// sqrt(w)|psi>), sqrt(F) is the trace norm of A^dag B. Cost is set by the
/// ensemble sizes, not the Hilbert-space dimension.
inline double fidelity(const Ensemble &e0, const Ensemble &e1) {
    if (e0.empty() || e1.empty()) throw error(errc::invalid_state, "empty ensemble");
    Eigen::MatrixXcd gram(static_cast<Eigen::Index>(e0.size()), static_cast<Eigen::Index>(e1.size()));
    for (std::size_t i = 0; i < e0.size(); ++i) {
        for (std::size_t j = 0; j < e1.size(); ++j) {
            gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::sqrt(e0[i].weight * e1[j].weight) * overlap(e0[i].state, e1[j].state);
        }
    }
    const Eigen::BDCSVD<Eigen::MatrixXcd> svd(gram);
    const double tn = svd.singularValues().sum();
    const double f = tn * tn;
    return f < spectral_tolerance ? 0.0 : std::min(f, 1.0);
}

} // namespace qbc::kernel
