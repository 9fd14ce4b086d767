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
// Analog CSI acquisition in two epochs on the reverse link.
//
// Reverse training (tau_p symbols, tau_p >= K*Nr): sinks transmit orthogonal
// pilots, source i receives  Y_i = sqrt(tau_p*Pf/Nr) * sum_k G[k][i] Phi_k + V_i
// and forms per-entry MMSE estimates of the reverse channels,
//   Ghat[k][i] = s/(sigma2 + s^2) * Y_i Phi_k^*,   s = sqrt(tau_p*Pf/Nr),
// leaving i.i.d. estimation error of variance sigma2/(sigma2 + tau_p*Pf/Nr).
//
// Analog feedback (tau_c symbols, tau_c >= K^2*Nt): sink i modulates its
// (perfectly known) forward channel row block H_i = [H[i][0] .. H[i][K-1]]
// onto a spreading matrix, X_i = sqrt(tau_c*Pf/(K*Nt*Nr)) * H_i * Psi_i, all
// sinks transmit simultaneously, and the sources despread and least-squares
// invert their reverse-channel estimates to recover every forward channel:
//   cooperative:  all K*Nt source antennas act as one receiver (one common
//                 estimate set),
//   centralized:  one node's Nt antennas recover the set, the alignment
//                 solution is then fed forward with noise (see
//                 centralized_feedforward),
//   distributed:  every source node inverts its own Nt rows (K estimate sets).
//
// The resulting column error, conditioned on the estimated reverse channel, is
// Gaussian with covariance proportional to (Ghat^* Ghat)^{-1}; averaging the
// inverse-Wishart diagonal gives the closed-form per-entry MSE implemented in
// theoretical_mse().

#pragma once

#include "channel.hpp"
#include "config.hpp"
#include "ia.hpp"
#include "rng.hpp"
#include "util.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace alignsim {

struct IllConditionedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class FeedbackMode { cooperative, centralized, distributed };

inline const char* to_string(FeedbackMode m) {
    switch (m) {
        case FeedbackMode::cooperative: return "cooperative";
        case FeedbackMode::centralized: return "centralized";
        case FeedbackMode::distributed: return "distributed";
    }
    return "?";
}

inline FeedbackMode parse_feedback_mode(const std::string& s) {
    if (s == "cooperative") return FeedbackMode::cooperative;
    if (s == "centralized") return FeedbackMode::centralized;
    if (s == "distributed") return FeedbackMode::distributed;
    throw ConfigError("unknown feedback mode: '" + s +
                      "' (expected cooperative, centralized or distributed)");
}

struct FeedbackParams {
    int tau_p = 0;  // reverse training length (symbols)
    int tau_c = 0;  // analog feedback length (symbols)
    FeedbackMode mode = FeedbackMode::cooperative;
};

inline FeedbackParams parse_feedback_params(const KeyValueFile& kv) {
    FeedbackParams fp;
    fp.tau_p = kv.get_int("tau_p");
    fp.tau_c = kv.get_int("tau_c");
    fp.mode = parse_feedback_mode(kv.get_string_or("mode", "cooperative"));
    return fp;
}

inline void validate_feedback_params(const NetworkConfig& cfg, const FeedbackParams& fp) {
    if (fp.tau_p < cfg.K * cfg.Nr)
        throw ConfigError("insufficient training length: tau_p=" + std::to_string(fp.tau_p) +
                          " < K*Nr=" + std::to_string(cfg.K * cfg.Nr));
    if (fp.tau_c < cfg.K * cfg.K * cfg.Nt)
        throw ConfigError("insufficient feedback length: tau_c=" + std::to_string(fp.tau_c) +
                          " < K^2*Nt=" + std::to_string(cfg.K * cfg.K * cfg.Nt));
    if (fp.mode != FeedbackMode::cooperative && cfg.Nt < cfg.Nr)
        throw ConfigError("per-node recovery needs Nt >= Nr: Nt=" + std::to_string(cfg.Nt) +
                          ", Nr=" + std::to_string(cfg.Nr));
}

// Stacked pilot/spreading blocks: users*rows_per_user rows of a DFT basis of
// size `length`, rotated by a seed-derived diagonal phase twist (exactly
// unitary, so the pairwise block products stay delta-orthogonal:
// block_i * block_k^* = I * delta_ik). Block i is rows [i*r, (i+1)*r).
inline CMat make_orthogonal_pilots(int rows_per_user, int users, int length, std::uint64_t seed) {
    const int total = rows_per_user * users;
    if (rows_per_user < 1 || users < 1)
        throw ConfigError("pilot construction needs rows_per_user >= 1 and users >= 1");
    if (length < total)
        throw ConfigError("insufficient pilot length: " + std::to_string(length) + " < " +
                          std::to_string(total) + " orthogonal rows required");
    RngStream rng(substream_seed(seed, 0x9110ULL));
    CMat pilots(total, length);
    const double scale = 1.0 / std::sqrt(static_cast<double>(length));
    for (int r = 0; r < total; ++r) {
        const double twist = rng.uniform();
        for (int c = 0; c < length; ++c) {
            // DFT row r evaluated at column c, plus the per-row phase twist.
            const double arg =
                -2.0 * std::numbers::pi * (static_cast<double>(r) * c / length + twist);
            pilots(r, c) = scale * cplx(std::cos(arg), std::sin(arg));
        }
    }
    return pilots;
}

namespace detail {

// Condition number of the Gram matrix A^* A, via the singular values of A.
inline double gram_condition(const CMat& a) {
    Eigen::JacobiSVD<CMat> svd(a);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double smax = svd.singularValues()(0);
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return (smax / smin) * (smax / smin);
}

constexpr double kGramConditionLimit = 1e12;

// X = (A^* A)^{-1} A^* B, guarded against a near-singular Gram matrix.
inline CMat ls_solve(const CMat& a, const CMat& b, const char* what) {
    if (gram_condition(a) > kGramConditionLimit)
        throw IllConditionedError(std::string(what) +
                                  ": Gram matrix condition number above 1e12, trial flagged");
    return a.colPivHouseholderQr().solve(b);
}

}  // namespace detail

// Reverse-link training. Returns the MMSE estimates Ghat[k][i] (same indexing
// as ChannelRealization::G). Pf = 0 yields the all-zero estimate.
inline ChannelSet reverse_train(const ChannelRealization& ch, const FeedbackParams& fp, double Pf,
                                double sigma2, RngStream& rng) {
    const int K = ch.users();
    const int Nr = ch.nr();
    const int Nt = ch.nt();
    if (fp.tau_p < K * Nr)
        throw ConfigError("insufficient training length: tau_p=" + std::to_string(fp.tau_p) +
                          " < K*Nr=" + std::to_string(K * Nr));
    const CMat pilots = make_orthogonal_pilots(Nr, K, fp.tau_p, 0);
    const double s = std::sqrt(fp.tau_p * Pf / Nr);
    const double gain = s / (sigma2 + s * s);

    ChannelSet g_hat(K, std::vector<CMat>(K));
    for (int i = 0; i < K; ++i) {
        CMat y = CMat::Zero(Nt, fp.tau_p);
        for (int k = 0; k < K; ++k)
            y.noalias() += s * ch.G[k][i] * pilots.middleRows(k * Nr, Nr);
        y += rng.cgaussian_matrix(Nt, fp.tau_p, sigma2);
        for (int k = 0; k < K; ++k)
            g_hat[k][i] = gain * y * pilots.middleRows(k * Nr, Nr).adjoint();
    }
    return g_hat;
}

struct FeedbackOutcome {
    // Estimated forward channel sets, indexed like ChannelRealization::H.
    // One common set for cooperative/centralized, one per source node for
    // distributed (h_hat[node][sink][source]).
    std::vector<ChannelSet> h_hat;
    std::vector<ChannelSet> h_err;  // h_hat - H, same shapes
    double sigma_f2_empirical = 0.0;  // realized per-entry error variance
    double feedforward_noise = 0.0;   // realized perturbation MSE (centralized only)
};

// Analog feedback epoch. Sinks transmit their true forward channels through
// the spreading blocks; sources despread and LS-invert their reverse-channel
// estimates. Throws IllConditionedError when a Gram matrix used for the
// inversion has condition number above 1e12 (the caller excludes the trial).
inline FeedbackOutcome feedback_csi(const ChannelRealization& ch, const ChannelSet& g_hat,
                                    const FeedbackParams& fp, double Pf, double sigma2,
                                    RngStream& rng) {
    const int K = ch.users();
    const int Nr = ch.nr();
    const int Nt = ch.nt();
    if (fp.tau_c < K * K * Nt)
        throw ConfigError("insufficient feedback length: tau_c=" + std::to_string(fp.tau_c) +
                          " < K^2*Nt=" + std::to_string(K * K * Nt));
    if (fp.mode != FeedbackMode::cooperative && Nt < Nr)
        throw ConfigError("per-node recovery needs Nt >= Nr");

    const CMat psi = make_orthogonal_pilots(K * Nt, K, fp.tau_c, 0);
    const double s = std::sqrt(fp.tau_c * Pf / (K * Nt * Nr));

    // Received feedback across all source antennas, stacked node-major.
    CMat yc = rng.cgaussian_matrix(K * Nt, fp.tau_c, sigma2);
    for (int i = 0; i < K; ++i) {
        CMat h_row(Nr, K * Nt);
        for (int k = 0; k < K; ++k) h_row.middleCols(k * Nt, Nt) = ch.H[i][k];
        CMat g_stack(K * Nt, Nr);  // reverse channel from sink i to every source
        for (int l = 0; l < K; ++l) g_stack.middleRows(l * Nt, Nt) = ch.G[i][l];
        yc.noalias() += s * g_stack * h_row * psi.middleRows(i * K * Nt, K * Nt);
    }

    const int sets = (fp.mode == FeedbackMode::distributed) ? K : 1;
    FeedbackOutcome out;
    out.h_hat.assign(sets, ChannelSet(K, std::vector<CMat>(K)));
    out.h_err.assign(sets, ChannelSet(K, std::vector<CMat>(K)));

    for (int i = 0; i < K; ++i) {
        const CMat despread = yc * psi.middleRows(i * K * Nt, K * Nt).adjoint();  // KNt x KNt
        for (int set = 0; set < sets; ++set) {
            CMat h_row_hat;  // Nr x KNt
            if (fp.mode == FeedbackMode::cooperative) {
                CMat g_hat_stack(K * Nt, Nr);
                for (int l = 0; l < K; ++l) g_hat_stack.middleRows(l * Nt, Nt) = g_hat[i][l];
                h_row_hat = detail::ls_solve(g_hat_stack, despread, "cooperative recovery") / s;
            } else {
                // Node `node` inverts its own antenna rows only.
                const int node = (fp.mode == FeedbackMode::distributed) ? set : 0;
                h_row_hat = detail::ls_solve(g_hat[i][node], despread.middleRows(node * Nt, Nt),
                                             "per-node recovery") /
                            s;
            }
            for (int k = 0; k < K; ++k) {
                out.h_hat[set][i][k] = h_row_hat.middleCols(k * Nt, Nt);
                out.h_err[set][i][k] = out.h_hat[set][i][k] - ch.H[i][k];
            }
        }
    }

    double sq = 0.0;
    std::size_t n = 0;
    for (const auto& set : out.h_err)
        for (const auto& row : set)
            for (const auto& m : row) {
                sq += m.squaredNorm();
                n += static_cast<std::size_t>(m.size());
            }
    out.sigma_f2_empirical = sq / static_cast<double>(n);
    return out;
}

// Closed-form per-entry MSE of the recovered forward channels. Exact at any
// SNR; high_snr = true drops the training-noise cross term (the eps factor).
// Cooperative mode inverts a K*Nt-row system, the per-node modes an Nt-row
// system, hence the different Wishart degrees of freedom in the divisor.
inline double theoretical_mse(int K, int Nt, int Nr, int tau_p, int tau_c, double Pf,
                              double sigma2, FeedbackMode mode, bool high_snr = false) {
    if (K < 1 || Nt < 1 || Nr < 1 || tau_p < 1 || tau_c < 1)
        throw ConfigError("theoretical_mse: dimensions and epochs must be positive");
    if (!(Pf > 0.0)) throw ConfigError("theoretical_mse: Pf > 0 required");
    const int cols = (mode == FeedbackMode::cooperative) ? K * Nt : Nt;
    if (cols <= Nr)
        throw ConfigError("theoretical_mse: receiver rows must exceed Nr (got " +
                          std::to_string(cols) + " vs Nr=" + std::to_string(Nr) + ")");
    const double eps = high_snr ? 0.0 : Nr * sigma2 / (tau_p * Pf);
    const double per_tau_p = static_cast<double>(Nr) * Nr / tau_p;
    const double per_tau_c = static_cast<double>(K) * Nt * Nr / tau_c * (1.0 + eps);
    return sigma2 / ((cols - Nr) * Pf) * (per_tau_p + per_tau_c);
}

struct FeedforwardResult {
    IaSolution solution;
    double realized_mse = 0.0;  // mean squared perturbation per entry, before renormalization
};

// Centralized mode: the computing node sends each node its precoder/combiner
// columns over the air once more. Models the extra hop as an additive
// CN(0, sigma2/Pf) perturbation per entry, after which columns are
// renormalized to unit norm.
inline FeedforwardResult centralized_feedforward(const IaSolution& sol, double Pf, double sigma2,
                                                 RngStream& rng) {
    if (!(Pf > 0.0)) throw ConfigError("centralized_feedforward: Pf > 0 required");
    const double var = sigma2 / Pf;
    FeedforwardResult out{sol, 0.0};
    double sq = 0.0;
    std::size_t n = 0;
    auto perturb = [&](std::vector<CMat>& mats) {
        for (auto& m : mats) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                CVec noise(m.rows());
                for (Eigen::Index r = 0; r < m.rows(); ++r) noise(r) = rng.cgaussian();
                noise *= std::sqrt(var);
                sq += noise.squaredNorm();
                n += static_cast<std::size_t>(noise.size());
                m.col(c) += noise;
                const double nn = m.col(c).norm();
                if (nn > 0.0) m.col(c) /= nn;
            }
        }
    };
    perturb(out.solution.F);
    perturb(out.solution.W);
    out.realized_mse = (n == 0) ? 0.0 : sq / static_cast<double>(n);
    return out;
}

}  // namespace alignsim
