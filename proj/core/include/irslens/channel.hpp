// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef IRSLENS_CHANNEL_HPP
#define IRSLENS_CHANNEL_HPP

#include "irslens/rng.hpp"
#include "irslens/types.hpp"

namespace irslens {

// One channel realization: g[l] is the N x M BS-to-IRS matrix of IRS l,
// h[l][k] the length-N IRS-to-user vector of (IRS l, user k). Immutable after
// synthesis; regenerating with the same (scenario, seed) is bit-identical.
struct ChannelSet {
    std::vector<arma::cx_mat> g;
    std::vector<std::vector<arma::cx_vec>> h;
    std::vector<std::array<double, 2>> user_positions;
    std::uint64_t seed = 0;
};

// Lens antenna array response: entry for antenna index m (ascending order,
// m = -(M-1)/2 .. (M-1)/2) is sqrt(A) * sinc(m - D~ * sin(aod)). Real-valued,
// returned as complex for uniform downstream handling.
// Throws std::invalid_argument for even m_count or nonpositive lens parameters.
arma::cx_vec lens_array_response(double aod_rad, arma::uword m_count,
                                 double aperture, double norm_dim);

// Half-wavelength ULA steering vector: entry n is exp(j*pi*n*sin(angle))/sqrt(N).
arma::cx_vec ula_steering(double angle_rad, arma::uword n_count);

// Draws the shadowed pathloss exponent kappa [dB] for one link.
double sample_kappa_db(double distance_m, const PathlossParams& params, Rng& rng);

// Complex channel gain: alpha * sqrt(g_t * g_r), alpha ~ CN(0, 10^(-0.1*kappa)),
// antenna gains converted from dBi. Throws std::domain_error for distance <= 0.
std::complex<double> pathloss_gain(double distance_m, const PathlossParams& params, Rng& rng);

// Geometric BS-to-IRS channel: LOS path from scenario geometry plus gp_paths
// NLOS paths with uniformly drawn angles. Consumes draws from rng in a fixed
// order, so equal sub-streams give equal matrices.
arma::cx_mat synth_bs_irs_channel(const Scenario& scenario, arma::uword irs_index, Rng& rng);

// LOS-only IRS-to-user channel beta * a_IRS(aod). Requires an explicit user
// position (scenario.geometry.user_positions must be populated).
arma::cx_vec synth_irs_user_channel(const Scenario& scenario, arma::uword irs_index,
                                    arma::uword user_index, Rng& rng);

// Synthesizes the full realization. User positions are taken from the geometry
// when present, otherwise drawn uniformly in the configured disk. Each channel
// entity consumes its own sub-stream of `seed`, so changing k_users does not
// perturb the BS-IRS matrices.
ChannelSet synth_channel_set(const Scenario& scenario, std::uint64_t seed);

} // namespace irslens

#endif
