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

#include <cmath>
#include <cstddef>

namespace qbc::analysis {

/// Expected residual (undetected) lie counts and the resulting admissible
/// range of code distances. All counts are expectations, not integers.
struct DWindow {
    double l_a_res = 0.0;
    double l_b_res = 0.0;
    double l_c_res = 0.0;
    double h = 0.0;
    double m = 0.0;     ///< expected |M|
    double d_min = 0.0; ///< Bob needs d > d_min for orthogonal committed states
    double d_max = 0.0; ///< Alice needs d < d_max against type-b flooding
    bool window_nonempty = false;

    /// Smallest and largest integer d strictly inside (d_min, d_max).
    [[nodiscard]] long lowest_valid_d() const { return static_cast<long>(std::floor(d_min)) + 1; }
    [[nodiscard]] long highest_valid_d() const { return static_cast<long>(std::ceil(d_max)) - 1; }
};

inline DWindow d_window(double f_a, double f_b, double f_c, double s) {
    DWindow w;
    w.l_a_res = f_a * s / 2.0;
    w.l_b_res = 3.0 * f_b * s / 4.0;
    w.l_c_res = 3.0 * f_c * s / 4.0;
    w.h = s - f_a * s - f_b * s - f_c * s;
    w.m = (0.25 + (f_a + f_c) / 2.0) * s;
    w.d_min = w.h + w.l_c_res;
    w.d_max = w.m - s / 4.0;
    // Equivalent to 3 f_a / 2 + f_b + 3 f_c / 4 > 1.
    w.window_nonempty = w.d_max > w.d_min;
    return w;
}

} // namespace qbc::analysis
