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

#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace alignsim {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// K x K collection of per-link matrices, indexed [sink][source].
using ChannelSet = std::vector<std::vector<CMat>>;

// Removes the global phase ambiguity of a vector: the entry with the largest
// magnitude (lowest index on exact ties) is rotated onto the positive real
// axis. Keeps solver output reproducible across eigenvalue backends.
inline void canonicalize_phase(Eigen::Ref<CVec> v) {
    Eigen::Index best = 0;
    double best_mag = -1.0;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        const double m = std::abs(v(j));
        if (m > best_mag) {
            best_mag = m;
            best = j;
        }
    }
    if (best_mag <= 0.0) return;
    const cplx phase = v(best) / best_mag;
    v *= std::conj(phase);
}

inline void canonicalize_columns(CMat& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) canonicalize_phase(m.col(j));
}

// Numbers in CSV output carry 9 significant digits.
inline std::string format_g9(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
}

// Runs fn(i) for i in [0, n). Work items are claimed from an atomic counter,
// so any item may run on any worker; callers that need a deterministic result
// must write into per-index slots and reduce in index order afterwards.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    auto body = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load(std::memory_order_relaxed)) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int spawn = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), n));
    pool.reserve(static_cast<std::size_t>(spawn));
    for (int w = 0; w < spawn; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace alignsim
