// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "irslens/metrics.hpp"

#include <cmath>

namespace irslens {

arma::cx_mat combined_channels(const ChannelSet& channels, const PhaseConfig& phases)
{
    const arma::uword l_count = channels.g.size();
    if (l_count == 0 || channels.h.size() != l_count)
        throw std::invalid_argument("combined_channels: empty or inconsistent channel set");
    if (phases.indices.n_rows != l_count || phases.indices.n_cols != channels.g[0].n_rows)
        throw std::invalid_argument("combined_channels: phase dimensions do not match channels");

    const arma::uword m_count = channels.g[0].n_cols;
    const arma::uword k_count = channels.h[0].size();

    arma::cx_mat combined(m_count, k_count, arma::fill::zeros);
    for (arma::uword l = 0; l < l_count; ++l)
    {
        const arma::uword n_count = channels.g[l].n_rows;
        arma::cx_vec phi(n_count);
        for (arma::uword n = 0; n < n_count; ++n)
            phi[n] = std::polar(1.0, -phases.phase(l, n)); // Phi^H applies e^{-j theta}

        for (arma::uword k = 0; k < k_count; ++k)
        {
            // row = H_lk^H Phi_l^H G_l; accumulate its conjugate transpose.
            const arma::cx_rowvec row =
                (arma::conj(channels.h[l][k]) % phi).st() * channels.g[l];
            combined.col(k) += row.t();
        }
    }
    return combined;
}

arma::vec sinr(const arma::cx_mat& combined, const BeamMatrix& w, double sigma2_w)
{
    if (!(sigma2_w > 0.0))
        throw std::invalid_argument("sinr: sigma2 must be positive");
    if (combined.n_rows != w.w.n_rows || combined.n_cols != w.w.n_cols)
        throw std::invalid_argument("sinr: dimension mismatch between channels and beams");

    const arma::uword k_count = combined.n_cols;
    // inner(k, i) = H_k^H w_i
    const arma::cx_mat inner = combined.t() * w.w;

    arma::vec gammas(k_count);
    for (arma::uword k = 0; k < k_count; ++k)
    {
        double interference = 0.0;
        for (arma::uword i = 0; i < k_count; ++i)
            if (i != k)
                interference += std::norm(inner(k, i));
        gammas[k] = std::norm(inner(k, k)) / (interference + sigma2_w);
    }
    return gammas;
}

double sum_rate(const arma::vec& gammas, double bandwidth_hz)
{
    double nats = 0.0;
    for (double g : gammas)
    {
        if (!(g >= 0.0))
            throw std::invalid_argument("sum_rate: SINR values must be nonnegative");
        nats += std::log1p(g);
    }
    return bandwidth_hz * nats / std::log(2.0);
}

double total_power(const BeamMatrix& w, const Scenario& scenario)
{
    return scenario.epsilon * w.total_tx_power() + scenario.static_power_w();
}

double energy_efficiency(const ChannelSet& channels, const PhaseConfig& phases,
                         const BeamMatrix& w, const Scenario& scenario)
{
    const arma::cx_mat combined = combined_channels(channels, phases);
    const arma::vec gammas = sinr(combined, w, scenario.sigma2_w);
    return sum_rate(gammas, scenario.bandwidth_hz) / total_power(w, scenario);
}

std::vector<double> phase_set(arma::uword bits)
{
    if (bits == 0 || bits > 30)
        throw std::domain_error("phase_set: bits must satisfy 1 <= bits <= 30");
    const arma::uword count = arma::uword(1) << bits;
    std::vector<double> phases(count);
    for (arma::uword q = 0; q < count; ++q)
        phases[q] = 2.0 * arma::datum::pi * static_cast<double>(q) / static_cast<double>(count);
    return phases;
}

} // namespace irslens
