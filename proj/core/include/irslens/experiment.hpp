// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef IRSLENS_EXPERIMENT_HPP
#define IRSLENS_EXPERIMENT_HPP

#include "irslens/baselines.hpp"
#include "irslens/scenario_io.hpp"

#include <filesystem>
#include <functional>

namespace irslens {

// Experiment kinds: `convergence` emits one row per outer iteration of a
// single run; the sweep kinds emit one terminal row per (seed, value) and
// vary n_elements / k_users / n_rf respectively.
enum class ExperimentKind { kConvergence, kSweepN, kSweepK, kSweepRf };

ExperimentKind parse_experiment_kind(const std::string& name);
std::string experiment_kind_name(ExperimentKind kind);

struct ExperimentConfig {
    Scenario scenario;
    ExperimentKind kind = ExperimentKind::kConvergence;
    std::vector<arma::uword> sweep;    // ignored for convergence runs
    std::vector<Scheme> schemes{Scheme::kProposed};
    std::vector<std::uint64_t> seeds{1};
    std::string out_dir = "results";
    bool measure_time = true;          // false writes 0 for byte-identical reruns
    unsigned jobs = 0;                 // 0: hardware concurrency
    BaselineOpts opts;

    void validate() const;
};

// Runs the full (scheme x sweep x seed) grid on a worker pool and writes one
// CSV per scheme plus a summary CSV with per-sweep-value means and standard
// errors. Rows are sorted before writing, so outputs are deterministic up to
// the wallclock column. Infeasible runs are skipped with a note on stderr.
// Returns the written file paths.
std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& config);

// Shared worker pool used by the experiment runner and the heavier tests.
void parallel_for(unsigned jobs, std::size_t count, const std::function<void(std::size_t)>& fn);

} // namespace irslens

#endif
