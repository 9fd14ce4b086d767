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
// Training/feedback overhead optimization over a frame of T symbols.
//
// Spending tau_p + tau_c symbols on CSI acquisition scales the remaining
// airtime by (T - tau_p - tau_c)/T but shrinks the rate-loss penalty, so the
// effective rate
//   R_eff(tau_p, tau_c) = ((T - tau_p - tau_c)/T) * (R_mean - loss(tau_p, tau_c))
// has an interior optimum. Splitting a fixed total x at the ratio
// tau_p : tau_c = Nr : sqrt(K*Nt*Nr) minimizes the loss constant, which then
// collapses to sum_i d_i log2(1 + gamma_i / x) with the per-user constants
// gamma_i below, and the optimal total solves a scalar stationarity equation
// handled by bisection (the derivative is strictly decreasing).

#pragma once

#include "config.hpp"
#include "rate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace alignsim {

struct OverheadModel {
    double T = 0.0;           // frame length in symbols
    double r_sum_mean = 0.0;  // mean perfect-CSI sum rate, bit/s/Hz
    double alpha = 1.0;       // forward/feedback power ratio P / Pf
};

inline int min_tau_p(const NetworkConfig& cfg) { return cfg.K * cfg.Nr; }
inline int min_tau_c(const NetworkConfig& cfg) { return cfg.K * cfg.K * cfg.Nt; }

// Per-user loss constants gamma_i, so that the loss at the optimally split
// total x is sum_i d_i log2(1 + gamma_i / x).
inline std::vector<double> overhead_gamma(const NetworkConfig& cfg, double alpha) {
    if (cfg.K * cfg.Nt <= cfg.Nr)
        throw ConfigError("overhead model needs K*Nt > Nr");
    if (!(alpha > 0.0)) throw ConfigError("overhead model: alpha > 0 required");
    const double root = std::sqrt(static_cast<double>(cfg.K) * cfg.Nt * cfg.Nr);
    const double front = (cfg.Nr + root) * (cfg.Nr + root) / (cfg.K * cfg.Nt - cfg.Nr);
    std::vector<double> g(cfg.K);
    for (int i = 0; i < cfg.K; ++i) g[i] = alpha * (cfg.K - 1.0 / cfg.d[i]) * front;
    return g;
}

// Effective rate of an integer split, clamped at zero when the loss exceeds
// the available rate. `clamped` (optional) reports whether the clamp fired.
inline double effective_rate(int tau_p, int tau_c, const OverheadModel& model,
                             const NetworkConfig& cfg, bool* clamped = nullptr) {
    if (tau_p < min_tau_p(cfg) || tau_c < min_tau_c(cfg))
        throw ConfigError("effective_rate: split below minimal epoch lengths (tau_p >= " +
                          std::to_string(min_tau_p(cfg)) + ", tau_c >= " +
                          std::to_string(min_tau_c(cfg)) + ")");
    if (tau_p + tau_c > model.T)
        throw ConfigError("effective_rate: tau_p + tau_c exceeds the frame length");
    const double loss =
        rate_loss_bound(cfg, tau_p, tau_c, model.alpha, BoundVariant::c2, true);
    const double airtime = (model.T - tau_p - tau_c) / model.T;
    const double r = airtime * (model.r_sum_mean - loss);
    if (clamped) *clamped = r < 0.0;
    return std::max(0.0, r);
}

struct SplitResult {
    int tau_p = 0;
    int tau_c = 0;
    double tau_p_cont = 0.0;  // continuous minimizer before rounding
    double c_opt = 0.0;       // loss constant achieved by the continuous split
    bool clamped = false;     // a minimal epoch length was binding
};

// Split a fixed total overhead between training and feedback so the loss
// constant Nr^2/tau_p + K*Nt*Nr/tau_c is smallest. Continuous optimum at
// tau_p = Nr/(Nr + sqrt(K*Nt*Nr)) * total; integers by convex neighbor check.
// A total below the minimal epoch lengths returns the minimal split, flagged.
inline SplitResult optimal_split(int total, int K, int Nt, int Nr) {
    if (K * Nt <= Nr)
        throw ConfigError("optimal_split: loss constant undefined for K*Nt <= Nr");
    if (total < 1) throw ConfigError("optimal_split: total must be positive");
    const int lo_p = K * Nr;
    const int lo_c = K * K * Nt;
    const double root = std::sqrt(static_cast<double>(K) * Nt * Nr);
    SplitResult out;
    out.tau_p_cont = Nr / (Nr + root) * total;
    out.c_opt = (Nr + root) * (Nr + root) / ((K * Nt - Nr) * static_cast<double>(total));
    if (total < lo_p + lo_c) {
        out.tau_p = lo_p;
        out.tau_c = lo_c;
        out.clamped = true;
        return out;
    }

    const auto objective = [&](int tp) {
        const int tc = total - tp;
        return static_cast<double>(Nr) * Nr / tp + static_cast<double>(K) * Nt * Nr / tc;
    };
    int tp = static_cast<int>(std::floor(out.tau_p_cont));
    if (tp < lo_p) {
        tp = lo_p;
        out.clamped = true;
    }
    if (total - tp < lo_c) {
        tp = total - lo_c;
        out.clamped = true;
    }
    // The objective is convex along the line tau_p + tau_c = total, so only
    // the in-range neighbor can improve on the rounded point.
    if (tp + 1 <= total - lo_c && tp + 1 >= lo_p && objective(tp + 1) < objective(tp)) ++tp;
    out.tau_p = tp;
    out.tau_c = total - tp;
    return out;
}

inline SplitResult optimal_split(int total, const NetworkConfig& cfg) {
    return optimal_split(total, cfg.K, cfg.Nt, cfg.Nr);
}

struct OverheadOptimum {
    double t_cont = 0.0;  // continuous stationary total (or frame bound if none)
    int tau_p = 0;
    int tau_c = 0;
    double r_eff = 0.0;
    bool boundary = false;  // minimal epoch lengths (or the degenerate clamp) bind
    double stationarity_residual = 0.0;
};

namespace detail {

// Derivative of ((T-x)/T) * (r_mean - sum_i d_i log2(1 + gamma_i/x)) in x.
inline double overhead_derivative(double x, const OverheadModel& model,
                                  const std::vector<int>& d, const std::vector<double>& gamma) {
    double loss = 0.0;
    double dloss = 0.0;  // -d/dx of the loss term
    for (std::size_t i = 0; i < d.size(); ++i) {
        loss += d[i] * std::log2(1.0 + gamma[i] / x);
        dloss += d[i] * gamma[i] / (x * (x + gamma[i]));
    }
    dloss /= std::numbers::ln2;
    return (loss - model.r_sum_mean) / model.T + (model.T - x) / model.T * dloss;
}

}  // namespace detail

// Optimal total overhead and split for the analytic effective-rate model.
// Returns the integer split maximizing the effective rate; t_cont carries the
// continuous stationary point for diagnostics. When the mean rate cannot pay
// for the loss even at maximal overhead, the minimal split with zero
// effective rate is returned and `boundary` is set.
inline OverheadOptimum optimize_total_overhead(const OverheadModel& model,
                                               const NetworkConfig& cfg) {
    const int lo_total = min_tau_p(cfg) + min_tau_c(cfg);
    if (model.T < lo_total)
        throw ConfigError("optimize_total_overhead: frame shorter than minimal overhead");
    if (!(model.r_sum_mean > 0.0))
        throw ConfigError("optimize_total_overhead: mean sum rate must be positive");
    const std::vector<double> gamma = overhead_gamma(cfg, model.alpha);

    OverheadOptimum out;
    const auto integer_candidates = [&](double t_target) {
        // Nearby integer totals, each at its own optimal split, scored by the
        // exact effective rate. Rounding the stationary point and rounding the
        // split interact, so scan a few totals on either side.
        const int hi_total = static_cast<int>(std::floor(model.T));
        const auto clamp_total = [&](int tot) {
            return std::min(std::max(tot, lo_total), hi_total);
        };
        const int first = clamp_total(static_cast<int>(std::floor(t_target)) - 4);
        const int last = clamp_total(static_cast<int>(std::ceil(t_target)) + 4);
        double best = -1.0;
        for (int tot = first; tot <= last; ++tot) {
            const SplitResult sp = optimal_split(tot, cfg);
            const double r = effective_rate(sp.tau_p, sp.tau_c, model, cfg);
            if (r > best) {
                best = r;
                out.tau_p = sp.tau_p;
                out.tau_c = sp.tau_c;
                out.r_eff = r;
            }
        }
    };

    // No interior stationary point when the loss at full overhead still
    // swallows the mean rate; every split then clamps to zero.
    double loss_at_T = 0.0;
    for (int i = 0; i < cfg.K; ++i)
        loss_at_T += cfg.d[i] * std::log2(1.0 + gamma[i] / model.T);
    if (model.r_sum_mean <= loss_at_T) {
        out.t_cont = model.T;
        out.boundary = true;
        integer_candidates(static_cast<double>(lo_total));
        out.stationarity_residual =
            std::abs(detail::overhead_derivative(out.t_cont, model, cfg.d, gamma));
        return out;
    }

    double lo = 1e-9 * model.T;
    while (detail::overhead_derivative(lo, model, cfg.d, gamma) <= 0.0 && lo > 1e-300) lo /= 16.0;
    double hi = model.T;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (detail::overhead_derivative(mid, model, cfg.d, gamma) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    out.t_cont = 0.5 * (lo + hi);
    out.stationarity_residual =
        std::abs(detail::overhead_derivative(out.t_cont, model, cfg.d, gamma));

    if (out.t_cont < lo_total) {
        out.boundary = true;
        integer_candidates(static_cast<double>(lo_total));
    } else {
        integer_candidates(out.t_cont);
    }
    return out;
}

}  // namespace alignsim
