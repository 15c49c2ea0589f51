// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "irslens/baselines.hpp"

#include "irslens/alternating.hpp"

#include <iostream>

namespace irslens {

std::string scheme_name(Scheme scheme)
{
    switch (scheme)
    {
        case Scheme::kProposed: return "proposed";
        case Scheme::kZfRbf: return "zf-rbf";
        case Scheme::kTbfMaxIrs: return "tbf-maxirs";
        case Scheme::kFullyDigital: return "fully-digital";
    }
    throw std::invalid_argument("scheme_name: unknown scheme");
}

Scheme parse_scheme(const std::string& name)
{
    if (name == "proposed")
        return Scheme::kProposed;
    if (name == "zf-rbf")
        return Scheme::kZfRbf;
    if (name == "tbf-maxirs")
        return Scheme::kTbfMaxIrs;
    if (name == "fully-digital")
        return Scheme::kFullyDigital;
    throw std::invalid_argument("unknown scheme: " + name);
}

BeamMatrix zf_precoder(const arma::cx_mat& combined, double p_t, bool* rank_warning)
{
    const arma::uword m_count = combined.n_rows;
    const arma::uword k_count = combined.n_cols;
    if (k_count > m_count)
        throw std::invalid_argument("zf_precoder: more users than antennas");
    if (!(p_t > 0.0))
        throw std::invalid_argument("zf_precoder: p_t must be positive");
    if (rank_warning != nullptr)
        *rank_warning = false;

    const arma::cx_mat gram = combined.t() * combined; // K x K
    arma::cx_mat f;
    bool ok = false;
    if (arma::rcond(gram) > 1e-12)
    {
        arma::cx_mat gram_inv;
        ok = arma::inv_sympd(gram_inv, gram) || arma::inv(gram_inv, gram);
        if (ok)
            f = combined * gram_inv;
    }
    if (!ok)
    {
        // Rank-deficient stacked channel: fall back to the pseudo-inverse.
        f = arma::pinv(combined.t());
        if (rank_warning != nullptr)
            *rank_warning = true;
        else
            std::cerr << "zf_precoder: rank-deficient channel, using pseudo-inverse\n";
    }

    BeamMatrix w;
    w.w.set_size(m_count, k_count);
    const double per_user = p_t / static_cast<double>(k_count);
    for (arma::uword k = 0; k < k_count; ++k)
    {
        const double nrm = arma::norm(f.col(k), 2);
        if (nrm > 0.0)
            w.w.col(k) = std::sqrt(per_user) * f.col(k) / nrm;
        else
            w.w.col(k).zeros();
    }
    return w;
}

PhaseConfig max_irs_phases(const ChannelSet& channels, const BeamMatrix& w,
                           const PhaseConfig& phases_init)
{
    phases_init.validate();
    const FpState state = make_fp_state(channels, w);
    const arma::uword k_count = state.users();
    const arma::uword total = state.stacked_len();
    const arma::uword n_per_irs = phases_init.indices.n_cols;

    const std::vector<double> phases_f = phase_set(phases_init.bits);
    std::vector<std::complex<double>> circle(phases_f.size());
    for (arma::uword qi = 0; qi < phases_f.size(); ++qi)
        circle[qi] = std::polar(1.0, phases_f[qi]);

    PhaseConfig out = phases_init;
    arma::cx_vec u = out.stacked_u();

    // Direct-link inner products t_k = u^H v_{k,k}; the objective is their
    // mean magnitude. Everything else in the state is ignored by design.
    arma::cx_vec direct(k_count);
    for (arma::uword k = 0; k < k_count; ++k)
        direct[k] = arma::cdot(u, state.v.slice(k).col(k));

    for (arma::uword sweep = 0; sweep < 100; ++sweep)
    {
        arma::uword changes = 0;
        for (arma::uword n = 0; n < total; ++n)
        {
            double best_val = 0.0;
            for (arma::uword k = 0; k < k_count; ++k)
                best_val += std::abs(direct[k]);

            arma::uword best_qi = 0;
            bool moved = false;
            for (arma::uword qi = 0; qi < circle.size(); ++qi)
            {
                const std::complex<double> delta = std::conj(circle[qi] - u[n]);
                double val = 0.0;
                for (arma::uword k = 0; k < k_count; ++k)
                    val += std::abs(direct[k] + delta * state.v.slice(k).col(k)[n]);
                if (val > best_val)
                {
                    best_val = val;
                    best_qi = qi;
                    moved = true;
                }
            }
            if (!moved)
                continue;

            const std::complex<double> delta = std::conj(circle[best_qi] - u[n]);
            for (arma::uword k = 0; k < k_count; ++k)
                direct[k] += delta * state.v.slice(k).col(k)[n];
            u[n] = circle[best_qi];
            out.indices(n / n_per_irs, n % n_per_irs) = best_qi;
            ++changes;
        }
        if (changes == 0)
            break;
    }
    return out;
}

namespace {

BaselineResult finalize(Scheme scheme, const ChannelSet& channels, const Scenario& scenario,
                        BeamMatrix w, PhaseConfig phases, RunTrace trace)
{
    BaselineResult res;
    res.scheme = scheme_name(scheme);
    const arma::cx_mat combined = combined_channels(channels, phases);
    const arma::vec gammas = sinr(combined, w, scenario.sigma2_w);
    res.se_bits_per_hz = sum_rate(gammas, 1.0);
    res.total_power_w = total_power(w, scenario);
    res.ee_bits_per_joule =
        sum_rate(gammas, scenario.bandwidth_hz) / res.total_power_w;

    bool qos_ok = true;
    for (arma::uword k = 0; k < gammas.n_elem; ++k)
        qos_ok = qos_ok && gammas[k] >= scenario.rho_k(k) - 1e-6;
    res.feasible = qos_ok && w.total_tx_power() <= scenario.p_t_w + 1e-9 &&
                   w.active_antennas() <= scenario.n_rf;
    trace.feasible = res.feasible;
    res.trace = std::move(trace);
    res.w = std::move(w);
    res.phases = std::move(phases);
    return res;
}

BaselineResult run_zf_rbf(const ChannelSet& channels, const Scenario& scenario,
                          const BaselineOpts& opts)
{
    PhaseConfig phases =
        PhaseConfig::zeros(scenario.l_irs, scenario.n_elements, scenario.phase_bits);
    BeamMatrix w = zf_precoder(combined_channels(channels, phases), scenario.p_t_w);

    RunTrace trace;
    double prev_ee = 0.0;
    const arma::uword rounds = opts.zf_single_shot ? 1 : opts.outer_max;
    for (arma::uword round = 1; round <= rounds; ++round)
    {
        auto [phases_new, rtrace] = optimize_reflect(channels, w, phases, scenario, opts.reflect);
        phases = std::move(phases_new);
        if (!opts.zf_single_shot)
            w = zf_precoder(combined_channels(channels, phases), scenario.p_t_w);

        const arma::cx_mat combined = combined_channels(channels, phases);
        const arma::vec gammas = sinr(combined, w, scenario.sigma2_w);
        TraceRecord rec;
        rec.iteration = round;
        rec.sum_rate_per_hz = sum_rate(gammas, 1.0);
        rec.total_power_w = total_power(w, scenario);
        rec.ee_per_hz = rec.sum_rate_per_hz / rec.total_power_w;
        rec.min_sinr_margin = arma::datum::inf;
        for (arma::uword k = 0; k < gammas.n_elem; ++k)
            rec.min_sinr_margin = std::min(rec.min_sinr_margin, gammas[k] - scenario.rho_k(k));
        for (const TraceRecord& r : rtrace.records)
            rec.phase_changes += r.phase_changes;
        trace.append(rec);

        const double rel = (rec.ee_per_hz - prev_ee) / std::max(prev_ee, 1e-300);
        prev_ee = rec.ee_per_hz;
        if (round > 1 && rel < opts.outer_tol)
            break;
    }
    return finalize(Scheme::kZfRbf, channels, scenario, std::move(w), std::move(phases),
                    std::move(trace));
}

BaselineResult run_tbf_maxirs(const ChannelSet& channels, const Scenario& scenario,
                              const BaselineOpts& opts)
{
    PhaseConfig phases =
        PhaseConfig::zeros(scenario.l_irs, scenario.n_elements, scenario.phase_bits);
    BeamMatrix w;
    bool have_w = false;

    RunTrace trace;
    double prev_ee = 0.0;
    for (arma::uword round = 1; round <= opts.outer_max; ++round)
    {
        arma::uword inner = 0;
        try
        {
            auto [w_new, ttrace] = optimize_transmit(channels, phases, scenario, opts.transmit,
                                                     have_w ? &w : nullptr);
            w = std::move(w_new);
            have_w = true;
            for (const TraceRecord& r : ttrace.records)
                inner += r.inner_iterations;
        }
        catch (const infeasible_error&)
        {
            if (!have_w)
                throw;
            break; // MaxIRS phases broke the QoS floors; keep the last iterate
        }
        phases = max_irs_phases(channels, w, phases);

        const arma::cx_mat combined = combined_channels(channels, phases);
        const arma::vec gammas = sinr(combined, w, scenario.sigma2_w);
        TraceRecord rec;
        rec.iteration = round;
        rec.sum_rate_per_hz = sum_rate(gammas, 1.0);
        rec.total_power_w = total_power(w, scenario);
        rec.ee_per_hz = rec.sum_rate_per_hz / rec.total_power_w;
        rec.min_sinr_margin = arma::datum::inf;
        for (arma::uword k = 0; k < gammas.n_elem; ++k)
            rec.min_sinr_margin = std::min(rec.min_sinr_margin, gammas[k] - scenario.rho_k(k));
        rec.inner_iterations = inner;
        trace.append(rec);

        const double rel = (rec.ee_per_hz - prev_ee) / std::max(prev_ee, 1e-300);
        prev_ee = rec.ee_per_hz;
        if (round > 1 && rel < opts.outer_tol)
            break;
    }
    return finalize(Scheme::kTbfMaxIrs, channels, scenario, std::move(w), std::move(phases),
                    std::move(trace));
}

} // namespace

BaselineResult run_baseline(Scheme scheme, const ChannelSet& channels,
                            const Scenario& scenario, const BaselineOpts& opts)
{
    switch (scheme)
    {
        case Scheme::kZfRbf:
            return run_zf_rbf(channels, scenario, opts);
        case Scheme::kTbfMaxIrs:
            return run_tbf_maxirs(channels, scenario, opts);
        case Scheme::kFullyDigital:
        {
            Scenario full = scenario;
            full.n_rf = full.m_antennas; // one chain per antenna, P_c follows
            AlternatingOpts aops{opts.outer_tol, opts.outer_max, opts.reflect, opts.transmit};
            AlternatingResult r = alternating_optimize(channels, full, aops);
            return finalize(Scheme::kFullyDigital, channels, full, std::move(r.w),
                            std::move(r.phases), std::move(r.trace));
        }
        case Scheme::kProposed:
        {
            AlternatingOpts aops{opts.outer_tol, opts.outer_max, opts.reflect, opts.transmit};
            AlternatingResult r = alternating_optimize(channels, scenario, aops);
            return finalize(Scheme::kProposed, channels, scenario, std::move(r.w),
                            std::move(r.phases), std::move(r.trace));
        }
    }
    throw std::invalid_argument("run_baseline: unknown scheme");
}

} // namespace irslens
