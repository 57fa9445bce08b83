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
 * @file lincode.hpp
 * Binary linear (n, k, d) codes with exhaustively verified minimum distance.
 */
#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qbc/error.hpp"
#include "qbc/registers.hpp"
#include "qbc/rng.hpp"

namespace qbc::lincode {

/// Fixed-length bit string, packed 64 bits per word. Unused high bits of the
/// last word are always zero.
class BitString {
  public:
    BitString() = default;
    explicit BitString(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

    static BitString from_string(std::string_view text) {
        BitString out(text.size());
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] == '1') {
                out.set(i, 1);
            } else if (text[i] != '0') {
                throw error(errc::parse_error, "bit string may only contain '0' and '1'");
            }
        }
        return out;
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }

    [[nodiscard]] Bit operator[](std::size_t i) const noexcept {
        return static_cast<Bit>((words_[i >> 6] >> (i & 63)) & 1U);
    }

    void set(std::size_t i, Bit v) noexcept {
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (v) {
            words_[i >> 6] |= mask;
        } else {
            words_[i >> 6] &= ~mask;
        }
    }

    [[nodiscard]] std::size_t weight() const noexcept {
        std::size_t w = 0;
        for (auto x : words_) w += static_cast<std::size_t>(std::popcount(x));
        return w;
    }

    [[nodiscard]] bool is_zero() const noexcept {
        return std::all_of(words_.begin(), words_.end(), [](auto x) { return x == 0; });
    }

    BitString &operator^=(const BitString &other) {
        if (other.n_ != n_) throw error(errc::length_mismatch, "xor of bit strings");
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
        return *this;
    }

    friend BitString operator^(BitString a, const BitString &b) { return a ^= b; }
    friend bool operator==(const BitString &, const BitString &) = default;
    friend auto operator<=>(const BitString &a, const BitString &b) {
        return a.to_string() <=> b.to_string();
    }

    [[nodiscard]] std::string to_string() const {
        std::string s(n_, '0');
        for (std::size_t i = 0; i < n_; ++i) s[i] = (*this)[i] ? '1' : '0';
        return s;
    }

    [[nodiscard]] const std::vector<std::uint64_t> &words() const noexcept { return words_; }

  private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

inline std::size_t hamming_distance(const BitString &a, const BitString &b) { return (a ^ b).weight(); }

/// c . r = XOR_i (c_i AND r_i).
inline Bit dot(const BitString &c, const BitString &r) {
    if (c.size() != r.size()) throw error(errc::length_mismatch, "dot product of unequal lengths");
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < c.words().size(); ++w) acc ^= c.words()[w] & r.words()[w];
    return static_cast<Bit>(std::popcount(acc) & 1);
}

inline constexpr std::size_t max_enumerable_k = 20;

namespace detail {

/// Rank over GF(2) by Gaussian elimination.
inline std::size_t rank(std::vector<BitString> rows) {
    std::size_t r = 0;
    const std::size_t n = rows.empty() ? 0 : rows.front().size();
    for (std::size_t col = 0; col < n && r < rows.size(); ++col) {
        auto pivot = std::find_if(rows.begin() + static_cast<std::ptrdiff_t>(r), rows.end(),
                                  [col](const BitString &row) { return row[col] != 0; });
        if (pivot == rows.end()) continue;
        std::swap(*pivot, rows[r]);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i != r && rows[i][col]) rows[i] ^= rows[r];
        }
        ++r;
    }
    return r;
}

/// Minimum weight over all 2^k - 1 nonzero codewords, visiting messages in
/// Gray-code order so each step is one row XOR.
inline std::size_t min_weight(const std::vector<BitString> &generator) {
    const std::size_t k = generator.size();
    std::size_t best = generator.front().size() + 1;
    BitString cw(generator.front().size());
    for (std::uint64_t i = 1; i < (std::uint64_t{1} << k); ++i) {
        cw ^= generator[static_cast<std::size_t>(std::countr_zero(i))];
        best = std::min(best, cw.weight());
    }
    return best;
}

} // namespace detail

class LinearCode {
  public:
    /// Validates rank k and computes the exact minimum distance.
    explicit LinearCode(std::vector<BitString> generator) : generator_(std::move(generator)) {
        if (generator_.empty()) throw error(errc::invalid_params, "code dimension k must be >= 1");
        if (generator_.size() > max_enumerable_k) {
            throw error(errc::invalid_params, "k > 20 cannot be verified exhaustively");
        }
        n_ = generator_.front().size();
        if (n_ == 0) throw error(errc::invalid_params, "code length n must be >= 1");
        for (const auto &row : generator_) {
            if (row.size() != n_) throw error(errc::length_mismatch, "generator rows differ in length");
        }
        if (detail::rank(generator_) != generator_.size()) {
            throw error(errc::invalid_params, "generator rows are linearly dependent");
        }
        d_ = detail::min_weight(generator_);
    }

    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] std::size_t k() const noexcept { return generator_.size(); }
    [[nodiscard]] std::size_t d() const noexcept { return d_; }
    [[nodiscard]] const std::vector<BitString> &generator() const noexcept { return generator_; }

    /// Codeword m G for the message whose bit j is bit j of `message`.
    [[nodiscard]] BitString encode(std::uint64_t message) const {
        BitString cw(n_);
        for (std::size_t j = 0; j < k(); ++j) {
            if ((message >> j) & 1U) cw ^= generator_[j];
        }
        return cw;
    }

    [[nodiscard]] std::vector<BitString> codewords() const {
        std::vector<BitString> out;
        out.reserve(std::size_t{1} << k());
        for (std::uint64_t m = 0; m < (std::uint64_t{1} << k()); ++m) out.push_back(encode(m));
        return out;
    }

    /// Membership test: solve m G = c over GF(2).
    [[nodiscard]] bool contains(const BitString &c) const {
        if (c.size() != n_) return false;
        auto rows = generator_;
        rows.push_back(c);
        return detail::rank(std::move(rows)) == k();
    }

  private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<BitString> generator_;
};

/// Rejection-samples random generator matrices until one has rank k and
/// minimum distance >= d_target. `d_max` optionally bounds the distance from
/// above (exclusive).
inline LinearCode random_code(std::size_t n, std::size_t k, std::size_t d_target, Rng &rng,
                              std::size_t attempts = 200, std::optional<std::size_t> d_max = {}) {
    if (k < 1 || k > max_enumerable_k || k > n) throw error(errc::invalid_params, "need 1 <= k <= min(n, 20)");
    if (d_target < 1 || d_target > n) throw error(errc::invalid_params, "need 1 <= d <= n");
    for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
        std::vector<BitString> rows;
        for (std::size_t j = 0; j < k; ++j) {
            BitString row(n);
            for (std::size_t i = 0; i < n; ++i) row.set(i, static_cast<Bit>(rng.bit()));
            rows.push_back(std::move(row));
        }
        if (detail::rank(rows) != k) continue;
        if (detail::min_weight(rows) < d_target) continue;
        LinearCode code(std::move(rows));
        if (d_max && code.d() >= *d_max) continue;
        return code;
    }
    throw error(errc::construction_failed, "no (" + std::to_string(n) + "," + std::to_string(k) + "," +
                                               std::to_string(d_target) + ") code found in " +
                                               std::to_string(attempts) + " attempts");
}

/// k rows with pairwise disjoint supports of weight w placed at random
/// coordinates; every nonzero codeword has weight >= w, so d = w exactly.
/// Gives low-distance codes at lengths where random codes have d near n/2.
inline LinearCode block_code(std::size_t n, std::size_t k, std::size_t w, Rng &rng) {
    if (k < 1 || k > max_enumerable_k || w < 1 || k * w > n) {
        throw error(errc::invalid_params, "block code needs 1 <= k <= 20, w >= 1, k*w <= n");
    }
    std::vector<std::size_t> coords(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    rng.shuffle(std::span<std::size_t>(coords));
    std::vector<BitString> rows;
    for (std::size_t j = 0; j < k; ++j) {
        BitString row(n);
        for (std::size_t t = 0; t < w; ++t) row.set(coords[j * w + t], 1);
        rows.push_back(std::move(row));
    }
    return LinearCode(std::move(rows));
}

/// The [n, 1, n] repetition code.
inline LinearCode repetition_code(std::size_t n) {
    if (n < 1) throw error(errc::invalid_params, "repetition code needs n >= 1");
    BitString row(n);
    for (std::size_t i = 0; i < n; ++i) row.set(i, 1);
    return LinearCode({row});
}

/// Uniform draw from {c in C | c . r = b}. The map m -> (mG) . r equals
/// m . g with g_j = G_j . r, so a uniform message is drawn and, if needed,
/// corrected by flipping one message bit with g_j = 1 (a bijection between
/// the two cosets).
inline BitString sample_codeword(const LinearCode &code, const BitString &r, Bit b, Rng &rng) {
    if (r.size() != code.n()) throw error(errc::length_mismatch, "r length differs from n");
    std::uint64_t g = 0;
    for (std::size_t j = 0; j < code.k(); ++j) g |= std::uint64_t{dot(code.generator()[j], r)} << j;
    std::uint64_t m = rng.next_u64() & ((std::uint64_t{1} << code.k()) - 1);
    if (g == 0) {
        if (b != 0) throw error(errc::unsatisfiable_bit, "every codeword has c.r = 0");
        return code.encode(m);
    }
    if ((std::popcount(m & g) & 1) != b) m ^= std::uint64_t{1} << std::countr_zero(g);
    return code.encode(m);
}

struct KnownBit {
    std::size_t index;
    Bit value;
};

/// All codewords agreeing with every known position, in ascending message
/// order of the affine solution set. Solved by elimination, not enumeration.
inline std::vector<BitString> decode_from_partial(const LinearCode &code, std::span<const KnownBit> known) {
    const std::size_t k = code.k();
    // Augmented system: for each known position i, sum_j m_j G_j[i] = value.
    std::vector<std::pair<std::uint64_t, Bit>> eqs;
    eqs.reserve(known.size());
    for (const auto &kb : known) {
        if (kb.index >= code.n()) throw error(errc::length_mismatch, "known position out of range");
        std::uint64_t row = 0;
        for (std::size_t j = 0; j < k; ++j) row |= std::uint64_t{code.generator()[j][kb.index]} << j;
        eqs.emplace_back(row, kb.value);
    }
    std::vector<int> pivot_of_col(k, -1);
    std::size_t r = 0;
    for (std::size_t col = 0; col < k; ++col) {
        const std::uint64_t bit = std::uint64_t{1} << col;
        std::size_t p = r;
        while (p < eqs.size() && !(eqs[p].first & bit)) ++p;
        if (p == eqs.size()) continue;
        std::swap(eqs[p], eqs[r]);
        for (std::size_t i = 0; i < eqs.size(); ++i) {
            if (i != r && (eqs[i].first & bit)) {
                eqs[i].first ^= eqs[r].first;
                eqs[i].second ^= eqs[r].second;
            }
        }
        pivot_of_col[col] = static_cast<int>(r);
        ++r;
    }
    for (std::size_t i = r; i < eqs.size(); ++i) {
        if (eqs[i].first == 0 && eqs[i].second) return {}; // inconsistent
    }
    std::vector<std::size_t> free_cols;
    for (std::size_t col = 0; col < k; ++col) {
        if (pivot_of_col[col] < 0) free_cols.push_back(col);
    }
    std::vector<BitString> out;
    out.reserve(std::size_t{1} << free_cols.size());
    for (std::uint64_t f = 0; f < (std::uint64_t{1} << free_cols.size()); ++f) {
        std::uint64_t m = 0;
        for (std::size_t t = 0; t < free_cols.size(); ++t) {
            if ((f >> t) & 1U) m |= std::uint64_t{1} << free_cols[t];
        }
        // Back-substitute pivots (reduced form: each pivot row has one pivot).
        for (std::size_t col = 0; col < k; ++col) {
            if (pivot_of_col[col] < 0) continue;
            const auto &[row, rhs] = eqs[static_cast<std::size_t>(pivot_of_col[col])];
            const std::uint64_t others = row & ~(std::uint64_t{1} << col);
            const Bit v = static_cast<Bit>(rhs ^ (std::popcount(others & m) & 1));
            if (v) m |= std::uint64_t{1} << col;
        }
        out.push_back(code.encode(m));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Text format: "n k d" on the first line, then k rows of n '0'/'1' characters.

inline void write_code(std::ostream &os, const LinearCode &code) {
    os << code.n() << ' ' << code.k() << ' ' << code.d() << '\n';
    for (const auto &row : code.generator()) os << row.to_string() << '\n';
}

inline LinearCode read_code(std::istream &is) {
    std::size_t n = 0, k = 0, d = 0;
    if (!(is >> n >> k >> d)) throw error(errc::parse_error, "code header must be 'n k d'");
    std::vector<BitString> rows;
    for (std::size_t j = 0; j < k; ++j) {
        std::string line;
        if (!(is >> line)) throw error(errc::parse_error, "missing generator row " + std::to_string(j));
        if (line.size() != n) throw error(errc::parse_error, "generator row length differs from n");
        rows.push_back(BitString::from_string(line));
    }
    LinearCode code(std::move(rows));
    if (code.d() != d) {
        throw error(errc::parse_error, "declared d=" + std::to_string(d) +
                                           " but exact minimum distance is " + std::to_string(code.d()));
    }
    return code;
}

} // namespace qbc::lincode
