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
// Interference alignment core. Precoders are found by alternating
// minimization of the total interference power leaking out of the
// least-interfered receive subspaces: the forward half-step picks, per sink,
// the d_i eigenvectors of the interference covariance with the smallest
// eigenvalues; the reverse half-step does the mirrored update for the
// precoders. Both half-steps never increase the leakage objective. Per-stream
// combiners are the least dominant left singular vector of the stacked
// interference seen by that stream, which zero-forces all cross terms exactly
// once the precoders have aligned the inter-user interference into an
// (Nr - d_i)-dimensional subspace.
//
// Alignment for user pair (i, m) means  |w_i^m* H[i][k] f_k^l| <= tol  for all
// (k, l) != (i, m), while the direct term |w_i^m* H[i][i] f_i^m| stays bounded
// away from zero; the realized minimum over streams is reported so the
// non-degeneracy of the direct links is observable.

#pragma once

#include "channel.hpp"
#include "rng.hpp"
#include "util.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace alignsim {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IaOptions {
    double leakage_tol = 1e-8;  // on max |w* H f| over cross terms (amplitude)
    int max_iters = 5000;
    std::uint64_t init_seed = 1;
    // Warm start: initial precoders (one Nt x d_i block per user). Overrides
    // the seeded random initialization when set.
    const std::vector<CMat>* init_precoders = nullptr;
    bool track_objective = false;  // record the leakage objective per iteration
    bool throw_on_failure = true;  // non-convergence throws instead of returning
};

struct IaSolution {
    std::vector<CMat> F;  // precoders, Nt x d_i, orthonormal columns
    std::vector<CMat> W;  // combiners, Nr x d_i, unit-norm columns (not orthogonal in general)
    std::vector<CMat> U;  // interference-minimizing receive subspaces (diagnostic)
    double residual_leakage = std::numeric_limits<double>::quiet_NaN();  // max cross |w* H f|
    double min_desired = std::numeric_limits<double>::quiet_NaN();      // min direct |w* H f|
    int iterations_used = 0;
    bool converged = false;
    bool degenerate_spectrum = false;  // a combiner had tied trailing singular values
    std::vector<double> objective_trace;
};

namespace detail {

inline CMat smallest_eigvecs(const CMat& q, int d, double* leak_sum = nullptr) {
    Eigen::SelfAdjointEigenSolver<CMat> es(q);
    if (es.info() != Eigen::Success) throw SolverError("eigendecomposition failed");
    CMat v = es.eigenvectors().leftCols(d);
    if (leak_sum) *leak_sum = es.eigenvalues().head(d).sum();
    canonicalize_columns(v);
    return v;
}

}  // namespace detail

// Combiner for stream m of sink i: the left singular vector of
//   M = [ H[i][k] F[k] (k != i) , H[i][i] F[i] without column m ]
// with the smallest singular value. Ties within 1e-12 of the smallest value
// are broken toward the lowest column index and reported through *degenerate.
// With no interference columns at all (single user, single stream) the
// matched filter H f / |H f| is returned instead.
inline CVec zf_combiner(const ChannelSet& H, const std::vector<CMat>& F, int i, int m,
                        bool* degenerate = nullptr) {
    const int K = static_cast<int>(H.size());
    const Eigen::Index Nr = H[i][i].rows();
    Eigen::Index cols = 0;
    for (int k = 0; k < K; ++k) cols += (k == i) ? F[k].cols() - 1 : F[k].cols();

    if (cols == 0) {
        CVec w = H[i][i] * F[i].col(m);
        const double n = w.norm();
        if (n <= 0.0) throw SolverError("matched filter undefined: H f vanished");
        w /= n;
        canonicalize_phase(w);
        return w;
    }

    CMat M(Nr, cols);
    Eigen::Index c = 0;
    for (int k = 0; k < K; ++k) {
        if (k == i) {
            for (Eigen::Index l = 0; l < F[k].cols(); ++l) {
                if (l == m) continue;
                M.col(c++) = H[i][k] * F[k].col(l);
            }
        } else {
            M.middleCols(c, F[k].cols()) = H[i][k] * F[k];
            c += F[k].cols();
        }
    }

    Eigen::JacobiSVD<CMat> svd(M, Eigen::ComputeFullU);
    // Pad implicit zero singular values when M has fewer columns than rows.
    Eigen::VectorXd sv = Eigen::VectorXd::Zero(Nr);
    sv.head(svd.singularValues().size()) = svd.singularValues();
    Eigen::Index pick = Nr - 1;
    const double smin = sv(Nr - 1);
    for (Eigen::Index j = 0; j < Nr; ++j) {
        if (sv(j) - smin <= 1e-12) {
            pick = j;  // lowest index among the tied trailing values
            break;
        }
    }
    if (degenerate && pick != Nr - 1) *degenerate = true;
    CVec w = svd.matrixU().col(pick);
    canonicalize_phase(w);
    return w;
}

// Max cross-term amplitude |w_i^m* H[i][k] f_k^l| over all (k,l) != (i,m),
// evaluated on an arbitrary channel set (e.g. the true channels underneath a
// solution computed from estimates).
inline double max_cross_leakage(const ChannelSet& H, const std::vector<CMat>& F,
                                const std::vector<CMat>& W) {
    const int K = static_cast<int>(H.size());
    double worst = 0.0;
    for (int i = 0; i < K; ++i) {
        for (Eigen::Index m = 0; m < W[i].cols(); ++m) {
            for (int k = 0; k < K; ++k) {
                const CVec cross = (W[i].col(m).adjoint() * H[i][k] * F[k]).transpose();
                for (Eigen::Index l = 0; l < cross.size(); ++l) {
                    if (k == i && l == m) continue;
                    worst = std::max(worst, std::abs(cross(l)));
                }
            }
        }
    }
    return worst;
}

inline double min_direct_gain(const ChannelSet& H, const std::vector<CMat>& F,
                              const std::vector<CMat>& W) {
    const int K = static_cast<int>(H.size());
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < K; ++i)
        for (Eigen::Index m = 0; m < W[i].cols(); ++m) {
            const cplx g = (W[i].col(m).adjoint() * H[i][i] * F[i].col(m)).value();
            worst = std::min(worst, std::abs(g));
        }
    return worst;
}

// Alternating minimization for the precoders (combiners are filled in too,
// they drive the convergence criterion). K = 1 short-circuits to the dominant
// right singular vectors of the direct channel.
inline IaSolution solve_precoders(const ChannelSet& H, const std::vector<int>& d,
                                  const IaOptions& opts = {}) {
    const int K = static_cast<int>(H.size());
    if (K < 1 || static_cast<int>(d.size()) != K)
        throw SolverError("solve_precoders: d must list one stream count per user");
    const Eigen::Index Nr = H[0][0].rows();
    const Eigen::Index Nt = H[0][0].cols();

    IaSolution sol;
    sol.F.resize(K);
    sol.W.resize(K);
    sol.U.resize(K);

    if (K == 1) {
        Eigen::JacobiSVD<CMat> svd(H[0][0], Eigen::ComputeFullU | Eigen::ComputeFullV);
        CMat f = svd.matrixV().leftCols(d[0]);
        CMat u = svd.matrixU().leftCols(d[0]);
        canonicalize_columns(f);
        canonicalize_columns(u);
        sol.F[0] = f;
        sol.U[0] = u;
        sol.W[0].resize(Nr, d[0]);
        for (int m = 0; m < d[0]; ++m)
            sol.W[0].col(m) = zf_combiner(H, sol.F, 0, m, &sol.degenerate_spectrum);
        sol.residual_leakage = max_cross_leakage(H, sol.F, sol.W);
        sol.min_desired = min_direct_gain(H, sol.F, sol.W);
        sol.converged = true;
        return sol;
    }

    if (opts.init_precoders) {
        if (static_cast<int>(opts.init_precoders->size()) != K)
            throw SolverError("warm start must provide one precoder block per user");
        sol.F = *opts.init_precoders;
    } else {
        RngStream init_rng(opts.init_seed);
        for (int k = 0; k < K; ++k) sol.F[k] = init_rng.haar_semiunitary(Nt, d[k]);
    }

    // Weighted interference covariance at sink i; the 1/d_k weights make the
    // forward and reverse half-steps minimize the same objective.
    auto forward_cov = [&](int i) {
        CMat q = CMat::Zero(Nr, Nr);
        for (int k = 0; k < K; ++k) {
            if (k == i) continue;
            const CMat t = H[i][k] * sol.F[k];
            q.noalias() += (1.0 / d[k]) * t * t.adjoint();
        }
        return q;
    };
    auto reverse_cov = [&](int k) {
        CMat q = CMat::Zero(Nt, Nt);
        for (int i = 0; i < K; ++i) {
            if (i == k) continue;
            const CMat t = H[i][k].adjoint() * sol.U[i];
            q.noalias() += (1.0 / d[k]) * t * t.adjoint();
        }
        return q;
    };

    auto residual_check = [&]() {
        bool degen = false;
        for (int i = 0; i < K; ++i) {
            sol.W[i].resize(Nr, d[i]);
            for (int m = 0; m < d[i]; ++m) sol.W[i].col(m) = zf_combiner(H, sol.F, i, m, &degen);
        }
        sol.degenerate_spectrum = degen;
        sol.residual_leakage = max_cross_leakage(H, sol.F, sol.W);
        return sol.residual_leakage <= opts.leakage_tol;
    };

    const double gate = opts.leakage_tol * opts.leakage_tol * 100.0;
    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        sol.iterations_used = iter;
        double objective = 0.0;
        for (int i = 0; i < K; ++i) {
            double leak = 0.0;
            sol.U[i] = detail::smallest_eigvecs(forward_cov(i), d[i], &leak);
            objective += leak;
        }
        for (int k = 0; k < K; ++k) sol.F[k] = detail::smallest_eigvecs(reverse_cov(k), d[k]);
        if (opts.track_objective) sol.objective_trace.push_back(objective);
        // Combiner construction is the expensive part of the check, so gate it
        // on the (free) subspace-leakage objective, with a periodic safety net.
        if (objective <= gate || iter % 64 == 0 || iter == opts.max_iters) {
            if (residual_check()) {
                sol.converged = true;
                break;
            }
        }
    }

    if (!sol.converged) {
        if (std::isnan(sol.residual_leakage)) residual_check();
        if (sol.residual_leakage <= opts.leakage_tol) {
            sol.converged = true;
        } else if (opts.throw_on_failure) {
            throw SolverError("alignment did not converge: residual " +
                              std::to_string(sol.residual_leakage) + " > tol " +
                              std::to_string(opts.leakage_tol) + " after " +
                              std::to_string(sol.iterations_used) + " iterations");
        }
    }
    sol.min_desired = min_direct_gain(H, sol.F, sol.W);
    return sol;
}

// Full solution: aligned precoders plus per-stream zero-forcing combiners.
inline IaSolution solve_ia(const ChannelSet& H, const std::vector<int>& d,
                           const IaOptions& opts = {}) {
    return solve_precoders(H, d, opts);
}

// Debug dump: matrices as row-major "re im" pairs, one matrix per block.
inline void dump_solution(const IaSolution& sol, std::ostream& os) {
    auto dump_mat = [&](const char* name, int idx, const CMat& m) {
        os << name << "[" << idx << "] " << m.rows() << "x" << m.cols() << "\n";
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                os << format_g9(m(r, c).real()) << " " << format_g9(m(r, c).imag());
                os << (c + 1 < m.cols() ? " " : "");
            }
            os << "\n";
        }
    };
    for (std::size_t i = 0; i < sol.F.size(); ++i) dump_mat("F", static_cast<int>(i), sol.F[i]);
    for (std::size_t i = 0; i < sol.W.size(); ++i) dump_mat("W", static_cast<int>(i), sol.W[i]);
    os << "residual_leakage " << format_g9(sol.residual_leakage) << "\n";
    os << "min_desired " << format_g9(sol.min_desired) << "\n";
    os << "iterations " << sol.iterations_used << "\n";
    os << "converged " << (sol.converged ? 1 : 0) << "\n";
}

}  // namespace alignsim
