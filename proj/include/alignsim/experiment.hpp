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
// Experiment harness: wires channels, alignment, feedback and rate modules
// into seeded Monte Carlo scenarios and emits plot-ready CSV.
//
// Reproducibility contract: every random draw comes from a substream keyed by
// (master_seed, purpose, trial), so the output bytes depend only on the
// experiment spec and never on the worker count or scheduling. Trials with
// the same index share channel/noise randomness across SNR points and grid
// cells (common random numbers), which cancels the channel variance from
// curve comparisons without biasing any single point.

#pragma once

#include "channel.hpp"
#include "config.hpp"
#include "feedback.hpp"
#include "ia.hpp"
#include "overhead.hpp"
#include "rate.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace alignsim {

enum class Scenario {
    sumrate_sweep,
    rateloss_vs_overhead,
    overhead_vs_frame,
    overhead_vs_rate,
    effective_throughput,
    training_vs_feedback,
};

inline const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::sumrate_sweep: return "sumrate-sweep";
        case Scenario::rateloss_vs_overhead: return "rateloss-vs-overhead";
        case Scenario::overhead_vs_frame: return "overhead-vs-frame";
        case Scenario::overhead_vs_rate: return "overhead-vs-rate";
        case Scenario::effective_throughput: return "effective-throughput";
        case Scenario::training_vs_feedback: return "training-vs-feedback";
    }
    return "?";
}

inline Scenario parse_scenario(const std::string& s) {
    if (s == "sumrate-sweep") return Scenario::sumrate_sweep;
    if (s == "rateloss-vs-overhead") return Scenario::rateloss_vs_overhead;
    if (s == "overhead-vs-frame") return Scenario::overhead_vs_frame;
    if (s == "overhead-vs-rate") return Scenario::overhead_vs_rate;
    if (s == "effective-throughput") return Scenario::effective_throughput;
    if (s == "training-vs-feedback") return Scenario::training_vs_feedback;
    throw ConfigError("unknown scenario: '" + s + "'");
}

// How the feedback power tracks the forward power across an SNR sweep.
enum class FeedbackLaw { scaled, power_law, fixed };

inline const char* to_string(FeedbackLaw l) {
    switch (l) {
        case FeedbackLaw::scaled: return "scaled";
        case FeedbackLaw::power_law: return "power-law";
        case FeedbackLaw::fixed: return "fixed";
    }
    return "?";
}

inline FeedbackLaw parse_feedback_law(const std::string& s) {
    if (s == "scaled") return FeedbackLaw::scaled;
    if (s == "power-law") return FeedbackLaw::power_law;
    if (s == "fixed") return FeedbackLaw::fixed;
    throw ConfigError("unknown feedback law: '" + s +
                      "' (expected scaled, power-law or fixed)");
}

struct FeedbackLawSpec {
    FeedbackLaw kind = FeedbackLaw::scaled;
    double alpha = 2.0;  // scaled: Pf = P / alpha
    double beta = 0.5;   // power-law: Pf = P^beta
    double pf_dB = 5.0;  // fixed: Pf = sigma2 * 10^(pf_dB/10)

    double pf_of(double P, double sigma2) const {
        switch (kind) {
            case FeedbackLaw::scaled: return P / alpha;
            case FeedbackLaw::power_law: return std::pow(P, beta);
            case FeedbackLaw::fixed: return sigma2 * db_to_linear(pf_dB);
        }
        return P;
    }
};

struct ExperimentSpec {
    Scenario scenario = Scenario::sumrate_sweep;
    NetworkConfig config;
    FeedbackParams feedback;
    std::vector<double> snr_grid_dB;
    FeedbackLawSpec law;
    int trials = 100;
    std::uint64_t master_seed = 1;
    int workers = 0;  // 0: one per hardware thread

    // Overhead-model scenarios.
    double frame_T = 2000.0;
    double r_sum_mean = 0.0;  // user-supplied mean rate; 0 where it is measured
    std::vector<double> frame_grid;
    std::vector<double> r_grid;
    std::vector<int> tau_p_grid;
    std::vector<int> tau_c_grid;
};

struct RunResult {
    std::string csv_header;
    std::vector<std::string> csv_rows;
    std::vector<std::pair<std::string, std::string>> summary;
    std::vector<RateReport> reports;  // per-trial records for rate scenarios
    long total_trials = 0;
    long excluded_trials = 0;   // ill-conditioned feedback inversions
    long solver_failures = 0;   // alignment non-convergence
};

inline void emit_csv(const RunResult& result, std::ostream& os) {
    os << result.csv_header << '\n';
    for (const auto& row : result.csv_rows) os << row << '\n';
}

inline void emit_csv(const RunResult& result, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    emit_csv(result, f);
    f.flush();
    if (!f) throw std::runtime_error("write failed: " + path);
}

inline void validate_experiment(const ExperimentSpec& spec) {
    validate_config(spec.config);
    if (spec.trials < 1) throw ConfigError("trials must be >= 1");
    const bool needs_snr = spec.scenario == Scenario::sumrate_sweep ||
                           spec.scenario == Scenario::rateloss_vs_overhead ||
                           spec.scenario == Scenario::effective_throughput ||
                           spec.scenario == Scenario::training_vs_feedback;
    if (needs_snr) {
        if (spec.snr_grid_dB.empty()) throw ConfigError("snr_grid_dB must be non-empty");
        for (std::size_t i = 1; i < spec.snr_grid_dB.size(); ++i)
            if (spec.snr_grid_dB[i] <= spec.snr_grid_dB[i - 1])
                throw ConfigError("snr_grid_dB must be strictly ascending");
    }
    switch (spec.scenario) {
        case Scenario::sumrate_sweep:
            validate_feedback_params(spec.config, spec.feedback);
            break;
        case Scenario::rateloss_vs_overhead:
            if (spec.tau_p_grid.empty() || spec.tau_c_grid.empty())
                throw ConfigError("tau_p_grid and tau_c_grid must be non-empty");
            for (int tp : spec.tau_p_grid)
                if (tp < min_tau_p(spec.config))
                    throw ConfigError("tau_p_grid entry below minimal training length");
            for (int tc : spec.tau_c_grid)
                if (tc < min_tau_c(spec.config))
                    throw ConfigError("tau_c_grid entry below minimal feedback length");
            if (spec.trials < 2) throw ConfigError("rate-loss grids need trials >= 2");
            break;
        case Scenario::overhead_vs_frame:
            if (spec.frame_grid.empty()) throw ConfigError("frame_grid must be non-empty");
            if (!(spec.r_sum_mean > 0.0))
                throw ConfigError("overhead-vs-frame needs r_sum_mean > 0");
            break;
        case Scenario::overhead_vs_rate:
            if (spec.r_grid.empty()) throw ConfigError("r_grid must be non-empty");
            if (!(spec.frame_T > 0.0)) throw ConfigError("frame_T must be positive");
            break;
        case Scenario::effective_throughput:
            if (spec.tau_c_grid.empty()) throw ConfigError("tau_c_grid must be non-empty");
            if (spec.feedback.tau_p < min_tau_p(spec.config))
                throw ConfigError("tau_p below minimal training length");
            for (int tc : spec.tau_c_grid)
                if (tc < min_tau_c(spec.config))
                    throw ConfigError("tau_c_grid entry below minimal feedback length");
            break;
        case Scenario::training_vs_feedback:
            if (spec.tau_p_grid.empty() || spec.tau_c_grid.empty())
                throw ConfigError("tau_p_grid and tau_c_grid must be non-empty");
            break;
    }
}

namespace detail {

// Substream purposes; combined with the trial index they key every draw.
constexpr std::uint64_t kSeedChannel = 1;
constexpr std::uint64_t kSeedFeedback = 2;
constexpr std::uint64_t kSeedInit = 3;
constexpr std::uint64_t kSeedFeedforward = 4;

inline std::string join_csv(const std::vector<std::string>& fields) {
    std::string row;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) row += ',';
        row += fields[i];
    }
    return row;
}

struct TrialOutcome {
    bool kept = false;
    bool ill_conditioned = false;
    bool solver_failed = false;
    RateReport report;
};

// Channel realization and perfect-CSI alignment for one trial. Depends only
// on (master, trial), never on the operating point: with common random
// numbers across SNR points or grid cells this branch is shared.
struct PerfectBranch {
    bool solver_failed = false;
    ChannelRealization ch;
    IaSolution sol;
};

inline PerfectBranch solve_perfect_branch(const NetworkConfig& cfg, std::uint64_t master,
                                          int trial) {
    PerfectBranch pb;
    RngStream ch_rng(substream_seed(master, kSeedChannel, static_cast<std::uint64_t>(trial)));
    pb.ch = draw_channels(cfg, ch_rng);
    IaOptions opts;
    opts.init_seed = substream_seed(master, kSeedInit, static_cast<std::uint64_t>(trial));
    try {
        pb.sol = solve_ia(pb.ch.H, cfg.d, opts);
    } catch (const SolverError&) {
        pb.solver_failed = true;
    }
    return pb;
}

// Estimated-CSI branch and rate evaluation at one operating point. The
// estimated alignment is warm-started from the perfect solution so both
// branches live in the same solution basin and the paired rate difference
// isolates the CSI error. Feedback noise comes from a stream reseeded per
// call, so every operating point sees the same underlying draws.
inline TrialOutcome run_rate_point(const PerfectBranch& pb, const NetworkConfig& cfg,
                                   const FeedbackParams& fp, std::uint64_t master, int trial) {
    TrialOutcome out;
    if (pb.solver_failed) {
        out.solver_failed = true;
        return out;
    }

    RngStream fb_rng(substream_seed(master, kSeedFeedback, static_cast<std::uint64_t>(trial)));
    FeedbackOutcome fb;
    try {
        const ChannelSet g_hat = reverse_train(pb.ch, fp, cfg.Pf, cfg.sigma2, fb_rng);
        fb = feedback_csi(pb.ch, g_hat, fp, cfg.Pf, cfg.sigma2, fb_rng);
    } catch (const IllConditionedError&) {
        out.ill_conditioned = true;
        return out;
    }

    IaOptions warm;
    warm.init_precoders = &pb.sol.F;
    std::vector<CMat> f_hat, w_hat;
    try {
        if (fp.mode == FeedbackMode::distributed) {
            f_hat.resize(cfg.K);
            w_hat.resize(cfg.K);
            for (int node = 0; node < cfg.K; ++node) {
                const IaSolution sol = solve_ia(fb.h_hat[node], cfg.d, warm);
                f_hat[node] = sol.F[node];
                w_hat[node] = sol.W[node];
            }
        } else {
            IaSolution sol = solve_ia(fb.h_hat[0], cfg.d, warm);
            if (fp.mode == FeedbackMode::centralized) {
                RngStream ff_rng(substream_seed(master, kSeedFeedforward,
                                                static_cast<std::uint64_t>(trial)));
                sol = centralized_feedforward(sol, cfg.Pf, cfg.sigma2, ff_rng).solution;
            }
            f_hat = std::move(sol.F);
            w_hat = std::move(sol.W);
        }
    } catch (const SolverError&) {
        out.solver_failed = true;
        return out;
    }

    const ZfRates zf_perfect =
        sum_rate_zf(pb.ch.H, pb.sol.F, pb.sol.W, cfg.P, cfg.d, cfg.sigma2);
    const ZfRates zf_imperfect = sum_rate_zf(pb.ch.H, f_hat, w_hat, cfg.P, cfg.d, cfg.sigma2);

    RateReport& r = out.report;
    r.trial = trial;
    r.snr_dB = linear_to_db(cfg.P / cfg.sigma2);
    r.mode = fp.mode;
    r.r_perfect_zf = zf_perfect.total;
    r.r_imperfect_zf = zf_imperfect.total;
    r.r_perfect_joint = sum_rate_joint(pb.ch.H, pb.sol.F, cfg.P, cfg.d, cfg.sigma2);
    r.r_imperfect_joint = sum_rate_joint(pb.ch.H, f_hat, cfg.P, cfg.d, cfg.sigma2);
    r.bound_c = rate_loss_bound(cfg, fp.tau_p, fp.tau_c, cfg.alpha(), BoundVariant::c);
    r.bound_c2 = rate_loss_bound(cfg, fp.tau_p, fp.tau_c, cfg.alpha(), BoundVariant::c2);
    r.max_leakage = zf_imperfect.max_leakage;
    r.desired = zf_imperfect.desired;
    r.leakage = zf_imperfect.leakage;
    out.kept = true;
    return out;
}

// Mean perfect-CSI sum rate at one operating point, for the overhead model.
inline double measure_mean_rate(const ExperimentSpec& spec, const NetworkConfig& cfg,
                                long* solver_failures) {
    std::vector<double> rates(spec.trials);
    std::vector<char> ok(spec.trials, 0);
    parallel_for(spec.trials, spec.workers, [&](int t) {
        RngStream ch_rng(
            substream_seed(spec.master_seed, kSeedChannel, static_cast<std::uint64_t>(t)));
        const ChannelRealization ch = draw_channels(cfg, ch_rng);
        IaOptions opts;
        opts.init_seed =
            substream_seed(spec.master_seed, kSeedInit, static_cast<std::uint64_t>(t));
        try {
            const IaSolution sol = solve_ia(ch.H, cfg.d, opts);
            rates[t] = sum_rate_zf(ch.H, sol.F, sol.W, cfg.P, cfg.d, cfg.sigma2).total;
            ok[t] = 1;
        } catch (const SolverError&) {
        }
    });
    std::vector<double> kept;
    kept.reserve(rates.size());
    for (int t = 0; t < spec.trials; ++t) {
        if (ok[t])
            kept.push_back(rates[t]);
        else if (solver_failures)
            ++*solver_failures;
    }
    if (kept.empty()) throw std::runtime_error("no trial produced a converged alignment");
    return mean(kept);
}

inline NetworkConfig config_at(const ExperimentSpec& spec, double snr_dB) {
    NetworkConfig cfg = spec.config;
    cfg.P = cfg.sigma2 * db_to_linear(snr_dB);
    cfg.Pf = spec.law.pf_of(cfg.P, cfg.sigma2);
    return cfg;
}

inline RunResult run_sumrate_sweep(const ExperimentSpec& spec) {
    RunResult res;
    res.csv_header =
        "trial,snr_dB,mode,R_perfect_zf,R_imperfect_zf,R_perfect_joint,R_imperfect_joint,"
        "delta_R,bound_c,bound_c2,max_leakage";
    const int points = static_cast<int>(spec.snr_grid_dB.size());
    const int n = points * spec.trials;
    std::vector<TrialOutcome> slots(n);
    // Trial-major: the channel draw and perfect-CSI solve are shared by all
    // SNR points of a trial, only the estimated branch depends on the point.
    parallel_for(spec.trials, spec.workers, [&](int t) {
        const PerfectBranch pb =
            solve_perfect_branch(config_at(spec, spec.snr_grid_dB[0]), spec.master_seed, t);
        for (int p = 0; p < points; ++p) {
            const NetworkConfig cfg = config_at(spec, spec.snr_grid_dB[p]);
            slots[p * spec.trials + t] = run_rate_point(pb, cfg, spec.feedback,
                                                        spec.master_seed, t);
        }
    });

    std::vector<double> mean_perfect(points), mean_imperfect(points), mean_joint_p(points),
        mean_joint_i(points), mean_delta(points), ci_delta(points), bound_c_pt(points),
        bound_c2_pt(points);
    long bound_violations = 0;
    res.total_trials = n;
    for (int p = 0; p < points; ++p) {
        std::vector<double> delta;
        std::vector<double> rp, ri, jp, ji;
        for (int t = 0; t < spec.trials; ++t) {
            const TrialOutcome& o = slots[p * spec.trials + t];
            if (o.ill_conditioned) ++res.excluded_trials;
            if (o.solver_failed) ++res.solver_failures;
            if (!o.kept) continue;
            const RateReport& r = o.report;
            res.csv_rows.push_back(join_csv(
                {std::to_string(r.trial), format_g9(r.snr_dB), to_string(r.mode),
                 format_g9(r.r_perfect_zf), format_g9(r.r_imperfect_zf),
                 format_g9(r.r_perfect_joint), format_g9(r.r_imperfect_joint),
                 format_g9(r.r_perfect_zf - r.r_imperfect_zf), format_g9(r.bound_c),
                 format_g9(r.bound_c2), format_g9(r.max_leakage)}));
            res.reports.push_back(r);
            rp.push_back(r.r_perfect_zf);
            ri.push_back(r.r_imperfect_zf);
            jp.push_back(r.r_perfect_joint);
            ji.push_back(r.r_imperfect_joint);
            delta.push_back(r.r_perfect_zf - r.r_imperfect_zf);
            bound_c_pt[p] = r.bound_c;
            bound_c2_pt[p] = r.bound_c2;
        }
        if (delta.empty())
            throw std::runtime_error("no kept trials at one SNR point");
        mean_perfect[p] = mean(rp);
        mean_imperfect[p] = mean(ri);
        mean_joint_p[p] = mean(jp);
        mean_joint_i[p] = mean(ji);
        mean_delta[p] = mean(delta);
        ci_delta[p] = delta.size() >= 2 ? ci95_halfwidth(delta) : 0.0;
        if (mean_delta[p] + ci_delta[p] > bound_c_pt[p]) ++bound_violations;
    }

    res.summary.emplace_back("scenario", to_string(spec.scenario));
    res.summary.emplace_back("points", std::to_string(points));
    res.summary.emplace_back("trials_per_point", std::to_string(spec.trials));
    res.summary.emplace_back("excluded_trials", std::to_string(res.excluded_trials));
    res.summary.emplace_back("solver_failures", std::to_string(res.solver_failures));
    res.summary.emplace_back("bound_c_violations", std::to_string(bound_violations));

    // High-SNR slope fits in bits per log2 of the linear SNR.
    std::vector<double> hi_snr, hi_p, hi_i, hi_jp, hi_ji;
    for (int p = 0; p < points; ++p) {
        if (spec.snr_grid_dB[p] < 35.0) continue;
        hi_snr.push_back(spec.snr_grid_dB[p]);
        hi_p.push_back(mean_perfect[p]);
        hi_i.push_back(mean_imperfect[p]);
        hi_jp.push_back(mean_joint_p[p]);
        hi_ji.push_back(mean_joint_i[p]);
    }
    if (hi_snr.size() >= 3 && hi_snr.back() - hi_snr.front() >= 10.0) {
        res.summary.emplace_back("slope_perfect_zf",
                                 format_g9(multiplexing_gain_fit(hi_snr, hi_p).slope));
        res.summary.emplace_back("slope_imperfect_zf",
                                 format_g9(multiplexing_gain_fit(hi_snr, hi_i).slope));
        res.summary.emplace_back("slope_perfect_joint",
                                 format_g9(multiplexing_gain_fit(hi_snr, hi_jp).slope));
        res.summary.emplace_back("slope_imperfect_joint",
                                 format_g9(multiplexing_gain_fit(hi_snr, hi_ji).slope));
    }

    // Relative variation of the mean rate loss across the saturation band.
    std::vector<double> band;
    for (int p = 0; p < points; ++p)
        if (spec.snr_grid_dB[p] >= 40.0 && spec.snr_grid_dB[p] <= 55.0)
            band.push_back(mean_delta[p]);
    if (band.size() >= 2) {
        double lo = band[0], hi2 = band[0], acc = 0.0;
        for (double v : band) {
            lo = std::min(lo, v);
            hi2 = std::max(hi2, v);
            acc += v;
        }
        res.summary.emplace_back("deltaR_rel_variation_40_55",
                                 format_g9((hi2 - lo) / (acc / band.size())));
    }
    return res;
}

inline RunResult run_rateloss_grid(const ExperimentSpec& spec) {
    RunResult res;
    res.csv_header = "tau_p,tau_c,snr_dB,trials,delta_R,delta_R_ci95,bound_c,bound_c2";
    const double snr = spec.snr_grid_dB.front();
    const NetworkConfig cfg = config_at(spec, snr);
    const int n_tc = static_cast<int>(spec.tau_c_grid.size());
    const int cells = static_cast<int>(spec.tau_p_grid.size()) * n_tc;
    const int n = cells * spec.trials;
    std::vector<TrialOutcome> slots(n);
    // Trial-major: one perfect-CSI solve per trial serves every grid cell.
    parallel_for(spec.trials, spec.workers, [&](int t) {
        const PerfectBranch pb = solve_perfect_branch(cfg, spec.master_seed, t);
        for (int cell = 0; cell < cells; ++cell) {
            FeedbackParams fp = spec.feedback;
            fp.tau_p = spec.tau_p_grid[cell / n_tc];
            fp.tau_c = spec.tau_c_grid[cell % n_tc];
            slots[cell * spec.trials + t] = run_rate_point(pb, cfg, fp, spec.master_seed, t);
        }
    });
    res.total_trials = n;
    for (int cell = 0; cell < cells; ++cell) {
        const int tp = spec.tau_p_grid[cell / n_tc];
        const int tc = spec.tau_c_grid[cell % n_tc];
        std::vector<RateReport> kept;
        for (int t = 0; t < spec.trials; ++t) {
            const TrialOutcome& o = slots[cell * spec.trials + t];
            if (o.ill_conditioned) ++res.excluded_trials;
            if (o.solver_failed) ++res.solver_failures;
            if (o.kept) kept.push_back(o.report);
        }
        const RateLossEstimate est = empirical_rate_loss(kept);
        res.csv_rows.push_back(join_csv(
            {std::to_string(tp), std::to_string(tc), format_g9(snr),
             std::to_string(static_cast<long>(est.trials)), format_g9(est.mean),
             format_g9(est.ci95), format_g9(rate_loss_bound(cfg, tp, tc, cfg.alpha(),
                                                            BoundVariant::c)),
             format_g9(rate_loss_bound(cfg, tp, tc, cfg.alpha(), BoundVariant::c2))}));
        for (const auto& r : kept) res.reports.push_back(r);
    }
    res.summary.emplace_back("scenario", to_string(spec.scenario));
    res.summary.emplace_back("cells", std::to_string(cells));
    res.summary.emplace_back("trials_per_cell", std::to_string(spec.trials));
    res.summary.emplace_back("excluded_trials", std::to_string(res.excluded_trials));
    res.summary.emplace_back("solver_failures", std::to_string(res.solver_failures));
    return res;
}

inline RunResult run_overhead_vs_frame(const ExperimentSpec& spec) {
    RunResult res;
    res.csv_header = "T,T_total_star,tau_p,tau_c,R_eff";
    int boundary_points = 0;
    std::vector<double> log_T, log_star;
    for (double T : spec.frame_grid) {
        OverheadModel model{T, spec.r_sum_mean, spec.law.alpha};
        const OverheadOptimum opt = optimize_total_overhead(model, spec.config);
        if (opt.boundary) ++boundary_points;
        log_T.push_back(std::log(T));
        log_star.push_back(std::log(opt.t_cont));
        res.csv_rows.push_back(join_csv({format_g9(T), format_g9(opt.t_cont),
                                         std::to_string(opt.tau_p), std::to_string(opt.tau_c),
                                         format_g9(opt.r_eff)}));
    }
    res.summary.emplace_back("scenario", to_string(spec.scenario));
    res.summary.emplace_back("points", std::to_string(spec.frame_grid.size()));
    res.summary.emplace_back("boundary_points", std::to_string(boundary_points));
    if (log_T.size() >= 3)
        res.summary.emplace_back("loglog_slope", format_g9(fit_line(log_T, log_star).slope));
    return res;
}

inline RunResult run_overhead_vs_rate(const ExperimentSpec& spec) {
    RunResult res;
    res.csv_header = "r_sum_mean,T_total_star,tau_p,tau_c,R_eff";
    bool monotone = true;
    double prev = 0.0;
    bool first = true;
    for (double r_mean : spec.r_grid) {
        OverheadModel model{spec.frame_T, r_mean, spec.law.alpha};
        const OverheadOptimum opt = optimize_total_overhead(model, spec.config);
        if (!first && opt.t_cont > prev + 1e-9) monotone = false;
        prev = opt.t_cont;
        first = false;
        res.csv_rows.push_back(join_csv({format_g9(r_mean), format_g9(opt.t_cont),
                                         std::to_string(opt.tau_p), std::to_string(opt.tau_c),
                                         format_g9(opt.r_eff)}));
    }
    res.summary.emplace_back("scenario", to_string(spec.scenario));
    res.summary.emplace_back("points", std::to_string(spec.r_grid.size()));
    res.summary.emplace_back("t_star_nonincreasing", monotone ? "1" : "0");
    return res;
}

inline RunResult run_effective_throughput(const ExperimentSpec& spec) {
    RunResult res;
    res.csv_header = "snr_dB,tau_c,tau_p,R_eff";
    res.summary.emplace_back("scenario", to_string(spec.scenario));
    for (double snr : spec.snr_grid_dB) {
        const NetworkConfig cfg = config_at(spec, snr);
        const double r_mean = (spec.r_sum_mean > 0.0)
                                  ? spec.r_sum_mean
                                  : measure_mean_rate(spec, cfg, &res.solver_failures);
        res.total_trials += spec.trials;
        int best_tc = spec.tau_c_grid.front();
        double best_r = -1.0;
        for (int tc : spec.tau_c_grid) {
            double r_eff = 0.0;
            if (spec.feedback.tau_p + tc <= spec.frame_T) {
                const double loss = rate_loss_bound(cfg, spec.feedback.tau_p, tc,
                                                    cfg.alpha(), BoundVariant::c2);
                r_eff = std::max(0.0, (spec.frame_T - spec.feedback.tau_p - tc) /
                                          spec.frame_T * (r_mean - loss));
            }
            if (r_eff > best_r) {
                best_r = r_eff;
                best_tc = tc;
            }
            res.csv_rows.push_back(join_csv({format_g9(snr), std::to_string(tc),
                                             std::to_string(spec.feedback.tau_p),
                                             format_g9(r_eff)}));
        }
        res.summary.emplace_back("r_sum_mean@" + format_g9(snr), format_g9(r_mean));
        res.summary.emplace_back("argmax_tau_c@" + format_g9(snr), std::to_string(best_tc));
    }
    res.summary.emplace_back("min_tau_c", std::to_string(min_tau_c(spec.config)));
    res.summary.emplace_back("solver_failures", std::to_string(res.solver_failures));
    return res;
}

inline RunResult run_training_vs_feedback(const ExperimentSpec& spec) {
    RunResult res;
    res.csv_header = "tau_p,tau_c,snr_dB,R_eff";
    const double snr = spec.snr_grid_dB.front();
    const NetworkConfig cfg = config_at(spec, snr);
    const double r_mean = (spec.r_sum_mean > 0.0)
                              ? spec.r_sum_mean
                              : measure_mean_rate(spec, cfg, &res.solver_failures);
    res.total_trials = spec.trials;
    int best_tp = spec.tau_p_grid.front(), best_tc = spec.tau_c_grid.front();
    double best_r = -1.0;
    for (int tp : spec.tau_p_grid) {
        for (int tc : spec.tau_c_grid) {
            double r_eff = 0.0;
            if (tp + tc <= spec.frame_T && tp >= min_tau_p(spec.config) &&
                tc >= min_tau_c(spec.config)) {
                const double loss =
                    rate_loss_bound(cfg, tp, tc, cfg.alpha(), BoundVariant::c2);
                r_eff = std::max(0.0, (spec.frame_T - tp - tc) / spec.frame_T *
                                          (r_mean - loss));
            }
            if (r_eff > best_r) {
                best_r = r_eff;
                best_tp = tp;
                best_tc = tc;
            }
            res.csv_rows.push_back(join_csv({std::to_string(tp), std::to_string(tc),
                                             format_g9(snr), format_g9(r_eff)}));
        }
    }
    res.summary.emplace_back("scenario", to_string(spec.scenario));
    res.summary.emplace_back("r_sum_mean", format_g9(r_mean));
    res.summary.emplace_back("argmax_tau_p", std::to_string(best_tp));
    res.summary.emplace_back("argmax_tau_c", std::to_string(best_tc));
    res.summary.emplace_back("r_eff_max", format_g9(best_r));
    res.summary.emplace_back("solver_failures", std::to_string(res.solver_failures));
    return res;
}

}  // namespace detail

inline RunResult run(const ExperimentSpec& spec) {
    validate_experiment(spec);
    switch (spec.scenario) {
        case Scenario::sumrate_sweep: return detail::run_sumrate_sweep(spec);
        case Scenario::rateloss_vs_overhead: return detail::run_rateloss_grid(spec);
        case Scenario::overhead_vs_frame: return detail::run_overhead_vs_frame(spec);
        case Scenario::overhead_vs_rate: return detail::run_overhead_vs_rate(spec);
        case Scenario::effective_throughput: return detail::run_effective_throughput(spec);
        case Scenario::training_vs_feedback: return detail::run_training_vs_feedback(spec);
    }
    throw ConfigError("unsupported scenario");
}

// Experiment files are flat key=value text with schema_version 1. Unknown
// keys are rejected so stale fixtures fail loudly rather than silently.
inline ExperimentSpec parse_experiment_spec(const KeyValueFile& kv) {
    static const std::set<std::string> known = {
        "schema_version", "scenario", "K", "Nt", "Nr", "d", "P_dB", "Pf_dB", "sigma2",
        "tau_p", "tau_c", "mode", "snr_grid_dB", "feedback_law", "law_alpha", "law_beta",
        "law_pf_dB", "trials", "master_seed", "workers", "frame_T", "r_sum_mean",
        "frame_grid", "r_grid", "tau_p_grid", "tau_c_grid"};
    for (const auto& [key, value] : kv.entries())
        if (!known.count(key)) throw ConfigError("unknown key '" + key + "'");
    if (kv.get_int("schema_version") != 1)
        throw ConfigError("unsupported schema_version (expected 1)");

    ExperimentSpec spec;
    spec.scenario = parse_scenario(kv.get_string("scenario"));
    spec.config = parse_network_config(kv);
    if (kv.has("tau_p")) spec.feedback.tau_p = static_cast<int>(kv.get_int("tau_p"));
    if (kv.has("tau_c")) spec.feedback.tau_c = static_cast<int>(kv.get_int("tau_c"));
    spec.feedback.mode = parse_feedback_mode(kv.get_string_or("mode", "cooperative"));
    if (kv.has("snr_grid_dB")) spec.snr_grid_dB = kv.get_double_list("snr_grid_dB");
    spec.law.kind = parse_feedback_law(kv.get_string_or("feedback_law", "scaled"));
    spec.law.alpha = kv.get_double_or("law_alpha", spec.law.alpha);
    spec.law.beta = kv.get_double_or("law_beta", spec.law.beta);
    spec.law.pf_dB = kv.get_double_or("law_pf_dB", spec.law.pf_dB);
    spec.trials = static_cast<int>(kv.get_int_or("trials", spec.trials));
    spec.master_seed = static_cast<std::uint64_t>(kv.get_int_or("master_seed", 1));
    spec.workers = static_cast<int>(kv.get_int_or("workers", 0));
    spec.frame_T = kv.get_double_or("frame_T", spec.frame_T);
    spec.r_sum_mean = kv.get_double_or("r_sum_mean", 0.0);
    if (kv.has("frame_grid")) spec.frame_grid = kv.get_double_list("frame_grid");
    if (kv.has("r_grid")) spec.r_grid = kv.get_double_list("r_grid");
    if (kv.has("tau_p_grid")) spec.tau_p_grid = kv.get_int_list("tau_p_grid");
    if (kv.has("tau_c_grid")) spec.tau_c_grid = kv.get_int_list("tau_c_grid");
    return spec;
}

inline ExperimentSpec parse_experiment_file(const std::string& path) {
    return parse_experiment_spec(KeyValueFile::parse_file(path));
}

}  // namespace alignsim
