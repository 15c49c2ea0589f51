// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

// Experiment driver. Examples:
//
//   eesim --profile desk --experiment convergence --schemes proposed --seeds 1..5 --out run1
//   eesim --profile desk --experiment sweep-rf --sweep 4,8,16 --schemes proposed,fully-digital
//         --seeds 1..20 --out fig3
//   eesim --scenario my.json --print-scenario

#include "irslens/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& text)
{
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        const auto range = item.find("..");
        if (range != std::string::npos)
        {
            const std::uint64_t a = std::stoull(item.substr(0, range));
            const std::uint64_t b = std::stoull(item.substr(range + 2));
            if (b < a)
                throw irslens::config_error("seed range must be ascending: " + item);
            for (std::uint64_t s = a; s <= b; ++s)
                seeds.push_back(s);
        }
        else if (!item.empty())
        {
            seeds.push_back(std::stoull(item));
        }
    }
    if (seeds.empty())
        throw irslens::config_error("at least one seed is required");
    return seeds;
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"irslens energy-efficiency experiments"};

    std::string scenario_path, experiment = "convergence", sweep_text, schemes_text = "proposed";
    std::string seeds_text = "1", out_dir = "results", profile = "paper";
    unsigned jobs = 0;
    bool no_timing = false, print_scenario = false;

    app.add_option("--scenario", scenario_path, "Scenario JSON file (overlays the profile)");
    app.add_option("--experiment", experiment, "convergence | sweep-n | sweep-k | sweep-rf");
    app.add_option("--sweep", sweep_text, "Comma-separated sweep values (sweep kinds only)");
    app.add_option("--schemes", schemes_text,
                   "Comma-separated: proposed, zf-rbf, tbf-maxirs, fully-digital");
    app.add_option("--seeds", seeds_text, "Comma-separated seeds and a..b ranges");
    app.add_option("--out", out_dir, "Output directory for the CSV files");
    app.add_option("--profile", profile, "Base parameter profile: desk | paper");
    app.add_option("--jobs", jobs, "Worker threads (default: hardware concurrency)");
    app.add_flag("--no-timing", no_timing, "Write 0 wallclock for byte-identical reruns");
    app.add_flag("--print-scenario", print_scenario, "Echo the effective scenario JSON and exit");

    CLI11_PARSE(app, argc, argv);

    try
    {
        irslens::Scenario base;
        if (profile == "desk")
            base = irslens::desk_profile();
        else if (profile == "paper")
            base = irslens::paper_profile();
        else
            throw irslens::config_error("unknown profile: " + profile);

        irslens::ExperimentConfig config;
        config.scenario =
            scenario_path.empty() ? base : irslens::load_scenario(scenario_path, base);

        if (print_scenario)
        {
            std::cout << irslens::scenario_to_json(config.scenario) << "\n";
            return 0;
        }

        config.kind = irslens::parse_experiment_kind(experiment);
        for (const std::string& v : split_list(sweep_text))
            config.sweep.push_back(std::stoull(v));
        config.schemes.clear();
        for (const std::string& s : split_list(schemes_text))
            config.schemes.push_back(irslens::parse_scheme(s));
        config.seeds = parse_seeds(seeds_text);
        config.out_dir = out_dir;
        config.jobs = jobs;
        config.measure_time = !no_timing;

        const auto files = irslens::run_experiment(config);
        for (const auto& f : files)
            std::cout << f.string() << "\n";
        return 0;
    }
    catch (const irslens::config_error& err)
    {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    }
    catch (const std::invalid_argument& err)
    {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    }
    catch (const irslens::infeasible_error& err)
    {
        std::cerr << "infeasible: " << err.what() << "\n";
        return 3;
    }
    catch (const std::ios_base::failure& err)
    {
        std::cerr << "i/o error: " << err.what() << "\n";
        return 4;
    }
    catch (const std::exception& err)
    {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}
