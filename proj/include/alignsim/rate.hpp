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
// Sum-rate evaluation for a fixed precoder/combiner set on a realized
// channel, plus the closed-form upper bound on the average rate loss caused
// by estimated CSI.
//
// Per-stream (zero-forcing) rates treat every other stream as noise after the
// scalar combiner; the joint-decoder rate treats each receiver's residual
// interference as colored noise and evaluates the log-det capacity
// expression. Transmit power splits evenly across a user's streams.

#pragma once

#include "config.hpp"
#include "feedback.hpp"
#include "stats.hpp"
#include "util.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace alignsim {

struct ZfRates {
    double total = 0.0;                          // sum over users and streams, bit/s/Hz
    std::vector<std::vector<double>> desired;    // |w* H f|^2 per user/stream
    std::vector<std::vector<double>> leakage;    // residual interference power per user/stream
    double max_leakage = 0.0;                    // max over streams of the leakage power
    double max_cross_amp = 0.0;                  // max |w* H f| amplitude over cross pairs
};

// Per-stream rates with scalar combiners. H is the true channel the signal
// actually passes through; F/W may come from perfect or estimated CSI.
inline ZfRates sum_rate_zf(const ChannelSet& H, const std::vector<CMat>& F,
                           const std::vector<CMat>& W, double P, const std::vector<int>& d,
                           double sigma2) {
    const int K = static_cast<int>(F.size());
    if (static_cast<int>(W.size()) != K || static_cast<int>(d.size()) != K ||
        static_cast<int>(H.size()) != K)
        throw std::invalid_argument("sum_rate_zf: user-count mismatch");
    ZfRates out;
    out.desired.resize(K);
    out.leakage.resize(K);
    for (int i = 0; i < K; ++i) {
        out.desired[i].assign(d[i], 0.0);
        out.leakage[i].assign(d[i], 0.0);
        for (int m = 0; m < d[i]; ++m) {
            double interference = 0.0;
            for (int k = 0; k < K; ++k) {
                const CMat cross = W[i].col(m).adjoint() * H[i][k] * F[k];
                for (int l = 0; l < d[k]; ++l) {
                    const double a2 = std::norm(cross(0, l));
                    if (k == i && l == m) {
                        out.desired[i][m] = a2;
                    } else {
                        interference += (P / d[k]) * a2;
                        out.max_cross_amp = std::max(out.max_cross_amp, std::sqrt(a2));
                    }
                }
            }
            out.leakage[i][m] = interference;
            out.max_leakage = std::max(out.max_leakage, interference);
            out.total += std::log2(1.0 + (P / d[i]) * out.desired[i][m] /
                                             (interference + sigma2));
        }
    }
    return out;
}

// Joint-decoder sum rate: each receiver decodes its own streams jointly,
// treating the other users' signals as colored Gaussian noise.
//   R_i = log2 det(I + (P/d_i) H_ii F_i F_i^* H_ii^* (sigma2 I + S_i)^{-1}),
//   S_i = sum_{k != i} (P/d_k) H_ik F_k F_k^* H_ik^*.
// Evaluated as logdet(S_full) - logdet(S_noise) through Cholesky factors.
inline double sum_rate_joint(const ChannelSet& H, const std::vector<CMat>& F, double P,
                             const std::vector<int>& d, double sigma2) {
    const int K = static_cast<int>(F.size());
    if (static_cast<int>(d.size()) != K || static_cast<int>(H.size()) != K)
        throw std::invalid_argument("sum_rate_joint: user-count mismatch");
    const auto logdet = [](const CMat& a) {
        Eigen::LLT<CMat> llt(a);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("sum_rate_joint: covariance not positive definite");
        double acc = 0.0;
        const auto& l = llt.matrixLLT();
        for (Eigen::Index j = 0; j < l.rows(); ++j) acc += 2.0 * std::log2(std::real(l(j, j)));
        return acc;
    };
    double total = 0.0;
    for (int i = 0; i < K; ++i) {
        const int nr = static_cast<int>(H[i][i].rows());
        CMat noise = sigma2 * CMat::Identity(nr, nr);
        for (int k = 0; k < K; ++k) {
            if (k == i) continue;
            const CMat hf = H[i][k] * F[k];
            noise.noalias() += (P / d[k]) * hf * hf.adjoint();
        }
        const CMat hf = H[i][i] * F[i];
        CMat full = noise;
        full.noalias() += (P / d[i]) * hf * hf.adjoint();
        total += logdet(full) - logdet(noise);
    }
    return total;
}

// Which interference-gain constant enters the rate-loss bound. The `c`
// variant keeps the full Nt*Nr * mse * Pf / sigma2 product; the `c2` variant
// divides out Nt*Nr, tracking the per-entry estimation error only. The
// looser `c` form is what a worst-case norm argument yields; `c2` matches
// the average growth of the residual cross terms.
enum class BoundVariant { c, c2 };

inline const char* to_string(BoundVariant v) { return v == BoundVariant::c ? "c" : "c2"; }

// Closed-form upper bound on the mean sum-rate loss of zero-forcing streams
// designed from fed-back CSI, as a function of the training/feedback split
// and the forward/feedback power ratio alpha = P / Pf. Cooperative-recovery
// MSE enters the constant; high_snr drops the vanishing training cross term.
inline double rate_loss_bound(const NetworkConfig& cfg, int tau_p, int tau_c, double alpha,
                              BoundVariant variant, bool high_snr = false) {
    if (!(alpha > 0.0)) throw ConfigError("rate_loss_bound: alpha > 0 required");
    const double Pf = cfg.P / alpha;
    const double mse = theoretical_mse(cfg.K, cfg.Nt, cfg.Nr, tau_p, tau_c, Pf, cfg.sigma2,
                                       FeedbackMode::cooperative, high_snr);
    double c = cfg.Nt * cfg.Nr * mse * Pf / cfg.sigma2;
    if (variant == BoundVariant::c2) c /= cfg.Nt * cfg.Nr;
    double bound = 0.0;
    for (int i = 0; i < cfg.K; ++i)
        bound += cfg.d[i] *
                 std::log2(1.0 + alpha * c * (cfg.K - 1.0 / cfg.d[i]));
    return bound;
}

// One Monte Carlo record as written to the rate CSV tables.
struct RateReport {
    int trial = 0;
    double snr_dB = 0.0;
    FeedbackMode mode = FeedbackMode::cooperative;
    double r_perfect_zf = 0.0;
    double r_imperfect_zf = 0.0;
    double r_perfect_joint = 0.0;
    double r_imperfect_joint = 0.0;
    double bound_c = 0.0;
    double bound_c2 = 0.0;
    double max_leakage = 0.0;  // residual interference power under estimated CSI
    std::vector<std::vector<double>> desired;
    std::vector<std::vector<double>> leakage;
};

struct RateLossEstimate {
    double mean = 0.0;
    double ci95 = 0.0;  // half-width
    std::size_t trials = 0;
};

// Paired rate-loss estimator: averages (perfect - imperfect) per trial so the
// common channel randomness cancels from the variance.
inline RateLossEstimate empirical_rate_loss(const std::vector<RateReport>& reports) {
    std::vector<double> delta;
    delta.reserve(reports.size());
    for (const auto& r : reports) delta.push_back(r.r_perfect_zf - r.r_imperfect_zf);
    if (delta.size() < 2)
        throw std::invalid_argument("empirical_rate_loss: need at least two trials");
    RateLossEstimate e;
    e.mean = mean(delta);
    e.ci95 = ci95_halfwidth(delta);
    e.trials = delta.size();
    return e;
}

// Least-squares multiplexing-gain fit: slope of rate versus log2(SNR).
// Points are (snr_dB, mean rate); needs >= 3 points spanning >= 10 dB.
inline LinearFit multiplexing_gain_fit(const std::vector<double>& snr_dB,
                                       const std::vector<double>& rate) {
    if (snr_dB.size() != rate.size())
        throw std::invalid_argument("multiplexing_gain_fit: size mismatch");
    if (snr_dB.size() < 3)
        throw std::invalid_argument("multiplexing_gain_fit: need at least three points");
    double lo = snr_dB[0], hi = snr_dB[0];
    for (double v : snr_dB) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo < 10.0)
        throw std::invalid_argument("multiplexing_gain_fit: span at least 10 dB");
    std::vector<double> x(snr_dB.size());
    for (std::size_t i = 0; i < snr_dB.size(); ++i)
        x[i] = snr_dB[i] * std::log2(10.0) / 10.0;  // log2 of the linear SNR
    return fit_line(x, rate);
}

}  // namespace alignsim
