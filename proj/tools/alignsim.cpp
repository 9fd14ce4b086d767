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
// Command line front end. One subcommand per scenario; every run reads a
// key=value experiment file, executes the seeded Monte Carlo (or analytic
// sweep), writes plot-ready CSV and prints a short summary to stdout.

#include "alignsim/alignsim.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <iostream>
#include <string>

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_path;
    int trials = -1;
    long long seed = -1;
    int workers = -1;
};

int run_scenario(alignsim::Scenario scenario, const CliOptions& opt) {
    alignsim::ExperimentSpec spec = alignsim::parse_experiment_file(opt.config_path);
    if (spec.scenario != scenario)
        throw alignsim::ConfigError(std::string("config declares scenario '") +
                                    alignsim::to_string(spec.scenario) +
                                    "' but subcommand is '" + alignsim::to_string(scenario) +
                                    "'");
    if (opt.trials > 0) spec.trials = opt.trials;
    if (opt.seed >= 0) spec.master_seed = static_cast<std::uint64_t>(opt.seed);
    if (opt.workers >= 0) spec.workers = opt.workers;

    const alignsim::RunResult result = alignsim::run(spec);
    const std::string out =
        opt.out_path.empty() ? std::string(alignsim::to_string(scenario)) + ".csv"
                             : opt.out_path;
    alignsim::emit_csv(result, out);

    std::cout << "wrote " << result.csv_rows.size() << " rows to " << out << "\n";
    for (const auto& [key, value] : result.summary)
        std::cout << key << " = " << value << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Monte Carlo simulator for interference alignment with analog CSI feedback"};
    app.require_subcommand(1);

    static const alignsim::Scenario scenarios[] = {
        alignsim::Scenario::sumrate_sweep,        alignsim::Scenario::rateloss_vs_overhead,
        alignsim::Scenario::overhead_vs_frame,    alignsim::Scenario::overhead_vs_rate,
        alignsim::Scenario::effective_throughput, alignsim::Scenario::training_vs_feedback,
    };
    static const char* descriptions[] = {
        "Sum rate vs SNR under perfect and fed-back CSI",
        "Empirical rate loss over a training/feedback length grid",
        "Optimal total overhead vs frame length (analytic model)",
        "Optimal total overhead vs mean sum rate (analytic model)",
        "Effective throughput vs feedback length",
        "Effective throughput over a training/feedback grid",
    };

    CliOptions opt;
    int rc = 0;
    for (std::size_t i = 0; i < std::size(scenarios); ++i) {
        CLI::App* sub = app.add_subcommand(alignsim::to_string(scenarios[i]), descriptions[i]);
        sub->add_option("--config", opt.config_path, "experiment file (key = value)")
            ->required();
        sub->add_option("--out", opt.out_path, "output CSV path (default <scenario>.csv)");
        sub->add_option("--trials", opt.trials, "override trial count");
        sub->add_option("--seed", opt.seed, "override master seed");
        sub->add_option("--workers", opt.workers, "worker threads (0 = hardware)");
        const alignsim::Scenario scenario = scenarios[i];
        sub->callback([&opt, &rc, scenario]() { rc = run_scenario(scenario, opt); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
