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
// Training/feedback overhead model: effective rate, the fixed-total split,
// and the optimal total overhead per frame.

#include <catch2/catch_amalgamated.hpp>

#include "alignsim/config.hpp"
#include "alignsim/overhead.hpp"

#include <cmath>
#include <vector>

using namespace alignsim;

namespace {

NetworkConfig small_cfg() {
    NetworkConfig cfg;
    cfg.K = 3;
    cfg.Nt = 2;
    cfg.Nr = 2;
    cfg.d = {1, 1, 1};
    return cfg;
}

OverheadModel model_of(double T, double r_mean, double alpha) {
    OverheadModel m;
    m.T = T;
    m.r_sum_mean = r_mean;
    m.alpha = alpha;
    return m;
}

}  // namespace

TEST_CASE("minimal epoch lengths follow the geometry") {
    const NetworkConfig cfg = small_cfg();
    REQUIRE(min_tau_p(cfg) == 6);
    REQUIRE(min_tau_c(cfg) == 18);  // K^2 * Nt
    const std::vector<double> g = overhead_gamma(cfg, 1.0);
    REQUIRE(g.size() == 3);
    for (double v : g)
        REQUIRE(v == Catch::Approx(14.928203230275509).epsilon(1e-12));
    NetworkConfig bad = cfg;
    bad.K = 1;
    bad.d = {1};
    REQUIRE_THROWS_AS(overhead_gamma(bad, 1.0), ConfigError);  // K*Nt <= Nr
    REQUIRE_THROWS_AS(overhead_gamma(cfg, 0.0), ConfigError);
}

TEST_CASE("effective rate accounts for airtime and loss") {
    const NetworkConfig cfg = small_cfg();
    const OverheadModel m = model_of(24.0, 15.0, 1.0);
    REQUIRE(effective_rate(6, 18, m, cfg) == 0.0);  // no airtime left
    REQUIRE_THROWS_AS(effective_rate(7, 18, m, cfg), ConfigError);   // exceeds frame
    REQUIRE_THROWS_AS(effective_rate(5, 18, m, cfg), ConfigError);   // below minimum
    REQUIRE_THROWS_AS(effective_rate(6, 17, m, cfg), ConfigError);

    const OverheadModel big = model_of(1000.0, 15.0, 1.0);
    bool clamped = true;
    const double r = effective_rate(12, 36, big, cfg, &clamped);
    REQUIRE_FALSE(clamped);
    const double loss = rate_loss_bound(cfg, 12, 36, 1.0, BoundVariant::c2, true);
    REQUIRE(r == Catch::Approx((1000.0 - 48.0) / 1000.0 * (15.0 - loss)).epsilon(1e-12));

    // A mean rate too small to pay for the loss clamps to zero.
    const OverheadModel poor = model_of(1000.0, 0.05, 50.0);
    const double zero = effective_rate(6, 18, poor, cfg, &clamped);
    REQUIRE(zero == 0.0);
    REQUIRE(clamped);
}

TEST_CASE("effective rate does not depend on the absolute power level") {
    NetworkConfig cfg = small_cfg();
    const OverheadModel m = model_of(500.0, 12.0, 2.0);
    cfg.P = 1.0;
    const double a = effective_rate(10, 30, m, cfg);
    cfg.P = 500.0;
    const double b = effective_rate(10, 30, m, cfg);
    REQUIRE(a == b);  // the power ratio alpha is what matters
}

TEST_CASE("fixed-total split matches the closed-form ratio") {
    const SplitResult sp = optimal_split(60, 3, 2, 2);
    const double root = std::sqrt(12.0);
    REQUIRE(sp.tau_p + sp.tau_c == 60);
    REQUIRE(sp.tau_p_cont / (60.0 - sp.tau_p_cont) ==
            Catch::Approx(2.0 / root).epsilon(1e-12));
    REQUIRE(sp.c_opt ==
            Catch::Approx((2.0 + root) * (2.0 + root) / (4.0 * 60.0)).epsilon(1e-12));
    REQUIRE_FALSE(sp.clamped);
}

TEST_CASE("fixed-total split is the exact integer minimizer") {
    for (int total = 24; total <= 90; ++total) {
        const SplitResult sp = optimal_split(total, 3, 2, 2);
        const auto objective = [&](int tp) {
            return 4.0 / tp + 12.0 / (total - tp);
        };
        double best = 1e300;
        for (int tp = 6; tp <= total - 18; ++tp) best = std::min(best, objective(tp));
        REQUIRE(sp.tau_p >= 6);
        REQUIRE(sp.tau_c >= 18);
        REQUIRE(objective(sp.tau_p) <= best + 1e-15);
    }
}

TEST_CASE("fixed-total split maximizes the effective rate at that total") {
    const NetworkConfig cfg = small_cfg();
    const OverheadModel m = model_of(1000.0, 20.0, 1.0);
    const int total = 60;
    const SplitResult sp = optimal_split(total, cfg);
    const double chosen = effective_rate(sp.tau_p, sp.tau_c, m, cfg);
    for (int tp = 6; tp <= total - 18; ++tp)
        REQUIRE(chosen >= effective_rate(tp, total - tp, m, cfg) - 1e-12);
}

TEST_CASE("split edge cases") {
    REQUIRE_THROWS_AS(optimal_split(60, 1, 2, 2), ConfigError);  // K*Nt <= Nr
    REQUIRE_THROWS_AS(optimal_split(0, 3, 2, 2), ConfigError);
    const SplitResult sp = optimal_split(10, 3, 2, 2);  // below 6 + 18
    REQUIRE(sp.tau_p == 6);
    REQUIRE(sp.tau_c == 18);
    REQUIRE(sp.clamped);
}

TEST_CASE("optimal total overhead sits at a stationary point") {
    const NetworkConfig cfg = small_cfg();
    const OverheadModel m = model_of(1e4, 15.0, 1.0);
    const OverheadOptimum opt = optimize_total_overhead(m, cfg);
    REQUIRE_FALSE(opt.boundary);
    REQUIRE(opt.stationarity_residual <= 1e-9);
    REQUIRE(opt.t_cont > 24.0);
    REQUIRE(opt.t_cont < m.T);
    REQUIRE(opt.r_eff > 0.0);
}

TEST_CASE("optimal total overhead beats every integer total") {
    const NetworkConfig cfg = small_cfg();
    const OverheadModel m = model_of(1e4, 15.0, 1.0);
    const OverheadOptimum opt = optimize_total_overhead(m, cfg);
    double best = 0.0;
    for (int tot = 24; tot <= static_cast<int>(m.T); ++tot) {
        const SplitResult sp = optimal_split(tot, cfg);
        best = std::max(best, effective_rate(sp.tau_p, sp.tau_c, m, cfg));
    }
    REQUIRE(opt.r_eff >= best - 1e-12);
}

TEST_CASE("optimal total overhead grows like the square root of the frame") {
    const NetworkConfig cfg = small_cfg();
    std::vector<double> logT, logX;
    for (double T : {1e4, 1e5, 1e6, 1e7}) {
        const OverheadOptimum opt = optimize_total_overhead(model_of(T, 15.0, 1.0), cfg);
        REQUIRE_FALSE(opt.boundary);
        logT.push_back(std::log10(T));
        logX.push_back(std::log10(opt.t_cont));
    }
    const LinearFit fit = fit_line(logT, logX);
    REQUIRE(fit.slope > 0.45);
    REQUIRE(fit.slope < 0.55);
}

TEST_CASE("a larger mean rate shrinks the optimal overhead") {
    const NetworkConfig cfg = small_cfg();
    double prev = 1e300;
    for (double r_mean : {5.0, 10.0, 20.0, 40.0, 80.0}) {
        const OverheadOptimum opt = optimize_total_overhead(model_of(1e5, r_mean, 1.0), cfg);
        REQUIRE(opt.t_cont < prev);
        prev = opt.t_cont;
    }
}

TEST_CASE("a weaker feedback link demands more overhead") {
    // Cutting feedback power (larger alpha) raises every loss constant, so
    // the stationary total must grow to compensate.
    const NetworkConfig cfg = small_cfg();
    double prev = 0.0;
    for (double alpha : {1.0, 1.5, 2.0}) {
        const OverheadOptimum opt = optimize_total_overhead(model_of(1e5, 15.0, alpha), cfg);
        REQUIRE(opt.t_cont > prev);
        prev = opt.t_cont;
    }
}

TEST_CASE("short frames pin the overhead at the minimal split") {
    const NetworkConfig cfg = small_cfg();
    const OverheadOptimum opt = optimize_total_overhead(model_of(40.0, 15.0, 1.0), cfg);
    REQUIRE(opt.boundary);
    REQUIRE(opt.tau_p == 6);
    REQUIRE(opt.tau_c == 18);
    REQUIRE(opt.r_eff > 0.0);
    REQUIRE(opt.r_eff ==
            effective_rate(6, 18, model_of(40.0, 15.0, 1.0), cfg));
}

TEST_CASE("a loss that swallows the mean rate reports the frame bound") {
    const NetworkConfig cfg = small_cfg();
    const OverheadOptimum opt = optimize_total_overhead(model_of(100.0, 10.0, 100.0), cfg);
    REQUIRE(opt.boundary);
    REQUIRE(opt.t_cont == 100.0);
    REQUIRE(opt.r_eff == 0.0);
}

TEST_CASE("optimizer input validation") {
    const NetworkConfig cfg = small_cfg();
    REQUIRE_THROWS_AS(optimize_total_overhead(model_of(20.0, 15.0, 1.0), cfg),
                      ConfigError);  // frame shorter than 6 + 18
    REQUIRE_THROWS_AS(optimize_total_overhead(model_of(1e4, 0.0, 1.0), cfg), ConfigError);
}
