// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef IRSLENS_METRICS_HPP
#define IRSLENS_METRICS_HPP

#include "irslens/channel.hpp"
#include "irslens/types.hpp"

namespace irslens {

// Combined BS-to-user channels through all IRSs. Column k holds H_k, i.e.
// H_k^H = sum_l H_lk^H Phi_l^H G_l with unit reflection amplitude, so the
// received inner products are H_k^H w_i = cdot(combined.col(k), w.col(i)).
arma::cx_mat combined_channels(const ChannelSet& channels, const PhaseConfig& phases);

// Per-user SINR gamma_k = |H_k^H w_k|^2 / (sum_{i != k} |H_k^H w_i|^2 + sigma2).
arma::vec sinr(const arma::cx_mat& combined, const BeamMatrix& w, double sigma2_w);

// Sum rate W * sum_k log2(1 + gamma_k) in bits/s. Rates use base-2 logs
// throughout; pass bandwidth 1 for per-Hz values.
double sum_rate(const arma::vec& gammas, double bandwidth_hz);

// Total consumed power: epsilon * transmit + N_RF*P_RF + L*N*P_N(B) + P_cir.
double total_power(const BeamMatrix& w, const Scenario& scenario);

// Energy efficiency in bits/joule (sum rate over total power).
double energy_efficiency(const ChannelSet& channels, const PhaseConfig& phases,
                         const BeamMatrix& w, const Scenario& scenario);

// The 2^bits available phase shifts {0, 2pi/2^B, ...}, ascending.
std::vector<double> phase_set(arma::uword bits);

} // namespace irslens

#endif
