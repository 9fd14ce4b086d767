// SPDX-License-Identifier: Apache-2.0
//
// alignsim - Monte Carlo simulator for interference alignment with analog CSI feedback
// Copyright (C) 2026 the alignsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Reproducible random number streams. Every Monte Carlo trial derives its own
// substream seed from the master seed and a tuple of indices (point index,
// trial index, purpose tag), so results are bit-identical no matter how trials
// are scheduled across workers. The engine is std::mt19937_64, which the C++
// standard pins down exactly; Gaussian variates use an explicit Box-Muller map
// because std::normal_distribution is implementation-defined.

#pragma once

#include "util.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace alignsim {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Chains any number of indices into an independent substream seed.
template <typename... Ts>
constexpr std::uint64_t substream_seed(std::uint64_t master, Ts... idx) {
    std::uint64_t h = splitmix64(master);
    ((h = splitmix64(h ^ splitmix64(static_cast<std::uint64_t>(idx) + 0x632BE59BD9B4E019ULL))), ...);
    return h;
}

class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), eng_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Standard circularly-symmetric complex Gaussian, unit variance per entry
    // (i.e. real and imaginary parts are N(0, 1/2) each).
    cplx cgaussian() {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-std::log1p(-u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(phi), r * std::sin(phi)};
    }

    // Real N(0, 1).
    double gaussian() {
        const cplx z = cgaussian();
        return z.real() * std::numbers::sqrt2;
    }

    // Matrix with i.i.d. CN(0, var) entries, filled row by row.
    CMat cgaussian_matrix(Eigen::Index rows, Eigen::Index cols, double var = 1.0) {
        CMat m(rows, cols);
        const double s = std::sqrt(var);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = s * cgaussian();
        return m;
    }

    // Haar-distributed n x d semi-unitary frame (QR of a Gaussian matrix with
    // the R-diagonal phase fix).
    CMat haar_semiunitary(Eigen::Index n, Eigen::Index d) {
        CMat g = cgaussian_matrix(n, d);
        Eigen::HouseholderQR<CMat> qr(g);
        CMat q = qr.householderQ() * CMat::Identity(n, d);
        const CMat r = qr.matrixQR().topRows(d);
        for (Eigen::Index j = 0; j < d; ++j) {
            const double m = std::abs(r(j, j));
            if (m > 0.0) q.col(j) *= r(j, j) / m;
        }
        return q;
    }

  private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
};

}  // namespace alignsim
