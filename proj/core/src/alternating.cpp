// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "irslens/alternating.hpp"

namespace irslens {

namespace {

struct Snapshot {
    double ee_per_hz = 0.0;
    double rate_per_hz = 0.0;
    double power_w = 0.0;
    double margin = 0.0;
};

Snapshot snapshot(const ChannelSet& channels, const PhaseConfig& phases, const BeamMatrix& w,
                  const Scenario& scenario)
{
    Snapshot s;
    const arma::cx_mat combined = combined_channels(channels, phases);
    const arma::vec gammas = sinr(combined, w, scenario.sigma2_w);
    s.rate_per_hz = sum_rate(gammas, 1.0);
    s.power_w = total_power(w, scenario);
    s.ee_per_hz = s.rate_per_hz / s.power_w;
    s.margin = arma::datum::inf;
    for (arma::uword k = 0; k < gammas.n_elem; ++k)
        s.margin = std::min(s.margin, gammas[k] - scenario.rho_k(k));
    return s;
}

} // namespace

AlternatingResult alternating_optimize(const ChannelSet& channels, const Scenario& scenario,
                                       const AlternatingOpts& opts)
{
    scenario.validate();

    AlternatingResult result;
    result.phases = PhaseConfig::zeros(scenario.l_irs, scenario.n_elements, scenario.phase_bits);

    BeamMatrix w;
    bool have_w = false;
    double prev_ee = 0.0;

    for (arma::uword round = 1; round <= opts.outer_max; ++round)
    {
        // Transmit block. Warm-started from the incumbent beams; kept only
        // when it measures at least as good under the current phases.
        double eta = 0.0, kkt = 0.0;
        arma::uword inner = 0;
        try
        {
            auto [w_new, ttrace] =
                optimize_transmit(channels, result.phases, scenario, opts.transmit,
                                  have_w ? &w : nullptr);
            if (!ttrace.empty())
            {
                eta = ttrace.back().eta;
                kkt = ttrace.back().kkt_residual;
                for (const TraceRecord& rec : ttrace.records)
                    inner += rec.inner_iterations;
            }
            const double ee_new = snapshot(channels, result.phases, w_new, scenario).ee_per_hz;
            if (!have_w || ee_new >= snapshot(channels, result.phases, w, scenario).ee_per_hz)
            {
                w = std::move(w_new);
                have_w = true;
            }
        }
        catch (const infeasible_error& err)
        {
            throw infeasible_error("alternating round " + std::to_string(round) +
                                   " (transmit): " + err.what());
        }

        // Reflect block preserves QoS feasibility and never lowers the rate.
        arma::uword phase_changes = 0;
        {
            auto [phases_new, rtrace] =
                optimize_reflect(channels, w, result.phases, scenario, opts.reflect);
            for (const TraceRecord& rec : rtrace.records)
                phase_changes += rec.phase_changes;
            const double ee_new = snapshot(channels, phases_new, w, scenario).ee_per_hz;
            if (ee_new >= snapshot(channels, result.phases, w, scenario).ee_per_hz)
                result.phases = std::move(phases_new);
        }

        const Snapshot s = snapshot(channels, result.phases, w, scenario);
        TraceRecord rec;
        rec.iteration = round;
        rec.ee_per_hz = s.ee_per_hz;
        rec.sum_rate_per_hz = s.rate_per_hz;
        rec.total_power_w = s.power_w;
        rec.min_sinr_margin = s.margin;
        rec.phase_changes = phase_changes;
        rec.eta = eta;
        rec.kkt_residual = kkt;
        rec.inner_iterations = inner;
        result.trace.append(rec);

        const double rel = (s.ee_per_hz - prev_ee) / std::max(prev_ee, 1e-300);
        prev_ee = s.ee_per_hz;
        if (round > 1 && rel < opts.outer_tol)
            break;
    }

    result.w = w;

    // Final constraint audit.
    const Snapshot s = snapshot(channels, result.phases, result.w, scenario);
    const bool power_ok = result.w.total_tx_power() <= scenario.p_t_w + 1e-9;
    const bool qos_ok = s.margin >= -1e-6;
    const bool chains_ok = result.w.active_antennas() <= scenario.n_rf;
    result.trace.feasible = power_ok && qos_ok && chains_ok;
    if (!result.trace.feasible)
        result.trace.note = "constraint audit failed";
    return result;
}

} // namespace irslens
