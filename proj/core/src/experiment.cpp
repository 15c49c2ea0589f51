// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "irslens/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace irslens {

ExperimentKind parse_experiment_kind(const std::string& name)
{
    if (name == "convergence")
        return ExperimentKind::kConvergence;
    if (name == "sweep-n")
        return ExperimentKind::kSweepN;
    if (name == "sweep-k")
        return ExperimentKind::kSweepK;
    if (name == "sweep-rf")
        return ExperimentKind::kSweepRf;
    throw config_error("unknown experiment kind: " + name);
}

std::string experiment_kind_name(ExperimentKind kind)
{
    switch (kind)
    {
        case ExperimentKind::kConvergence: return "convergence";
        case ExperimentKind::kSweepN: return "sweep-n";
        case ExperimentKind::kSweepK: return "sweep-k";
        case ExperimentKind::kSweepRf: return "sweep-rf";
    }
    throw std::invalid_argument("experiment_kind_name: unknown kind");
}

void ExperimentConfig::validate() const
{
    scenario.validate();
    if (seeds.empty())
        throw config_error("experiment: at least one seed is required");
    if (schemes.empty())
        throw config_error("experiment: at least one scheme is required");
    if (kind != ExperimentKind::kConvergence)
    {
        if (sweep.empty())
            throw config_error("experiment: sweep values are required for sweep kinds");
        for (std::size_t i = 0; i < sweep.size(); ++i)
        {
            if (sweep[i] == 0)
                throw config_error("experiment: sweep values must be positive");
            if (i > 0 && sweep[i] <= sweep[i - 1])
                throw config_error("experiment: sweep values must be strictly increasing");
        }
    }
}

void parallel_for(unsigned jobs, std::size_t count, const std::function<void(std::size_t)>& fn)
{
    if (jobs == 0)
        jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(count, 1)));

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (std::size_t i; (i = next.fetch_add(1)) < count;)
        {
            try
            {
                fn(i);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                    first_error = std::current_exception();
            }
        }
    };

    std::vector<std::thread> threads;
    for (unsigned j = 1; j < jobs; ++j)
        threads.emplace_back(worker);
    worker();
    for (auto& t : threads)
        t.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

namespace {

struct Row {
    std::uint64_t seed = 0;
    arma::uword sweep_value = 0;
    arma::uword iter = 0;
    double ee_per_hz = 0.0;
    double se_per_hz = 0.0;
    double power_w = 0.0;
    double margin_db = 0.0;
    double wallclock_s = 0.0;
};

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// dB headroom of the binding user over its floor. Exact for uniform floors;
// floors at 1e-12 keep rho = 0 configurations finite.
double margin_db_of(double margin_linear, double rho_ref)
{
    const double rho = std::max(rho_ref, 1e-12);
    const double ratio = std::max((margin_linear + rho) / rho, 1e-12);
    return 10.0 * std::log10(ratio);
}

Scenario scenario_at(const ExperimentConfig& config, arma::uword sweep_value)
{
    Scenario s = config.scenario;
    switch (config.kind)
    {
        case ExperimentKind::kConvergence: break;
        case ExperimentKind::kSweepN: s.n_elements = sweep_value; break;
        case ExperimentKind::kSweepK: s.k_users = sweep_value; break;
        case ExperimentKind::kSweepRf: s.n_rf = sweep_value; break;
    }
    s.validate();
    return s;
}

} // namespace

std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& config)
{
    config.validate();

    const std::vector<arma::uword> sweep =
        config.kind == ExperimentKind::kConvergence ? std::vector<arma::uword>{0} : config.sweep;

    struct Task {
        std::size_t scheme_idx, sweep_idx, seed_idx;
    };
    std::vector<Task> tasks;
    for (std::size_t c = 0; c < config.schemes.size(); ++c)
        for (std::size_t v = 0; v < sweep.size(); ++v)
            for (std::size_t s = 0; s < config.seeds.size(); ++s)
                tasks.push_back({c, v, s});

    std::vector<std::vector<Row>> rows_per_task(tasks.size());
    std::vector<std::string> skipped(tasks.size());

    parallel_for(config.jobs, tasks.size(), [&](std::size_t ti) {
        const Task& task = tasks[ti];
        const Scheme scheme = config.schemes[task.scheme_idx];
        const arma::uword sweep_value = sweep[task.sweep_idx];
        const std::uint64_t seed = config.seeds[task.seed_idx];

        const Scenario scenario = scenario_at(config, sweep_value);
        const double rho_ref = *std::max_element(scenario.rho.begin(), scenario.rho.end());

        const auto t0 = std::chrono::steady_clock::now();
        BaselineResult result;
        try
        {
            const ChannelSet channels = synth_channel_set(scenario, seed);
            result = run_baseline(scheme, channels, scenario, config.opts);
        }
        catch (const infeasible_error& err)
        {
            skipped[ti] = err.what();
            return;
        }
        const double wall =
            config.measure_time
                ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
                : 0.0;

        auto& rows = rows_per_task[ti];
        if (config.kind == ExperimentKind::kConvergence)
        {
            for (const TraceRecord& rec : result.trace.records)
                rows.push_back({seed, sweep_value, rec.iteration, rec.ee_per_hz,
                                rec.sum_rate_per_hz, rec.total_power_w,
                                margin_db_of(rec.min_sinr_margin, rho_ref), wall});
        }
        else
        {
            const arma::uword last_iter =
                result.trace.empty() ? 0 : result.trace.back().iteration;
            const double margin =
                result.trace.empty() ? 0.0 : result.trace.back().min_sinr_margin;
            rows.push_back({seed, sweep_value, last_iter,
                            result.ee_bits_per_joule / config.scenario.bandwidth_hz,
                            result.se_bits_per_hz, result.total_power_w,
                            margin_db_of(margin, rho_ref), wall});
        }
    });

    for (std::size_t ti = 0; ti < tasks.size(); ++ti)
        if (!skipped[ti].empty())
            std::cerr << "experiment: skipped infeasible run (scheme="
                      << scheme_name(config.schemes[tasks[ti].scheme_idx])
                      << ", sweep=" << sweep[tasks[ti].sweep_idx]
                      << ", seed=" << config.seeds[tasks[ti].seed_idx] << "): " << skipped[ti]
                      << "\n";

    std::filesystem::create_directories(config.out_dir);
    std::vector<std::filesystem::path> written;

    for (std::size_t c = 0; c < config.schemes.size(); ++c)
    {
        const std::filesystem::path path =
            std::filesystem::path(config.out_dir) / (scheme_name(config.schemes[c]) + ".csv");
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("experiment: cannot write " + path.string());
        out << "seed,sweep_value,iter,ee_per_hz,se_per_hz,power_w,min_sinr_margin_db,"
               "wallclock_s\r\n";
        for (std::size_t ti = 0; ti < tasks.size(); ++ti)
        {
            if (tasks[ti].scheme_idx != c)
                continue;
            for (const Row& r : rows_per_task[ti])
                out << r.seed << ',' << r.sweep_value << ',' << r.iter << ',' << fmt(r.ee_per_hz)
                    << ',' << fmt(r.se_per_hz) << ',' << fmt(r.power_w) << ','
                    << fmt(r.margin_db) << ',' << fmt(r.wallclock_s) << "\r\n";
        }
        written.push_back(path);
    }

    // Summary: terminal-row statistics per (scheme, sweep value).
    {
        const std::filesystem::path path = std::filesystem::path(config.out_dir) / "summary.csv";
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("experiment: cannot write " + path.string());
        out << "scheme,sweep_value,n_seeds,ee_per_hz_mean,ee_per_hz_stderr,se_per_hz_mean,"
               "se_per_hz_stderr\r\n";
        for (std::size_t c = 0; c < config.schemes.size(); ++c)
            for (std::size_t v = 0; v < sweep.size(); ++v)
            {
                std::vector<double> ee, se;
                for (std::size_t ti = 0; ti < tasks.size(); ++ti)
                {
                    if (tasks[ti].scheme_idx != c || tasks[ti].sweep_idx != v ||
                        rows_per_task[ti].empty())
                        continue;
                    ee.push_back(rows_per_task[ti].back().ee_per_hz);
                    se.push_back(rows_per_task[ti].back().se_per_hz);
                }
                auto mean = [](const std::vector<double>& x) {
                    double s = 0.0;
                    for (double e : x)
                        s += e;
                    return x.empty() ? 0.0 : s / static_cast<double>(x.size());
                };
                auto stderr_of = [&](const std::vector<double>& x) {
                    if (x.size() < 2)
                        return 0.0;
                    const double m = mean(x);
                    double ss = 0.0;
                    for (double e : x)
                        ss += (e - m) * (e - m);
                    return std::sqrt(ss / static_cast<double>(x.size() - 1)) /
                           std::sqrt(static_cast<double>(x.size()));
                };
                out << scheme_name(config.schemes[c]) << ',' << sweep[v] << ',' << ee.size()
                    << ',' << fmt(mean(ee)) << ',' << fmt(stderr_of(ee)) << ',' << fmt(mean(se))
                    << ',' << fmt(stderr_of(se)) << "\r\n";
            }
        written.push_back(path);
    }

    return written;
}

} // namespace irslens
