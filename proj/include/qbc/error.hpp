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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qbc {

enum class errc {
    incomplete_projectors,
    dimension_mismatch,
    invalid_state,
    theta_out_of_range,
    already_measured,
    construction_failed,
    length_mismatch,
    unsatisfiable_bit,
    infeasible_lie_counts,
    no_adjacent_codeword,
    deferred_site,
    no_feasible_codeword,
    invalid_params,
    parse_error,
};

inline std::string_view to_string(errc e) {
    switch (e) {
    case errc::incomplete_projectors: return "IncompleteProjectors";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::invalid_state: return "InvalidState";
    case errc::theta_out_of_range: return "ThetaOutOfRange";
    case errc::already_measured: return "AlreadyMeasured";
    case errc::construction_failed: return "ConstructionFailed";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::unsatisfiable_bit: return "UnsatisfiableBit";
    case errc::infeasible_lie_counts: return "InfeasibleLieCounts";
    case errc::no_adjacent_codeword: return "NoAdjacentCodeword";
    case errc::deferred_site: return "DeferredSite";
    case errc::no_feasible_codeword: return "NoFeasibleCodeword";
    case errc::invalid_params: return "InvalidParams";
    case errc::parse_error: return "ParseError";
    }
    return "Unknown";
}

/// Every library failure is reported through this type; `code()` names the
/// failure kind, `what()` carries the human-readable detail.
class error : public std::runtime_error {
  public:
    error(errc code, const std::string &detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail),
          code_(code) {}

    [[nodiscard]] errc code() const noexcept { return code_; }

  private:
    errc code_;
};

} // namespace qbc
