// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "irslens/channel.hpp"

#include <cmath>

namespace irslens {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sinc(double x)
{
    const double px = kPi * x;
    if (std::abs(px) < 1e-8)
        return 1.0 - px * px / 6.0;
    return std::sin(px) / px;
}

double dist2d(const std::array<double, 2>& a, const std::array<double, 2>& b)
{
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

// Angle of the ray a -> b in the plane.
double bearing(const std::array<double, 2>& a, const std::array<double, 2>& b)
{
    return std::atan2(b[1] - a[1], b[0] - a[0]);
}

double dbi_to_linear(double dbi) { return std::pow(10.0, dbi / 10.0); }

} // namespace

arma::cx_vec lens_array_response(double aod_rad, arma::uword m_count,
                                 double aperture, double norm_dim)
{
    if (m_count == 0 || m_count % 2 == 0)
        throw std::invalid_argument("lens_array_response: antenna count must be odd");
    if (!(aperture > 0.0) || !(norm_dim > 0.0))
        throw std::invalid_argument("lens_array_response: aperture and norm_dim must be positive");

    const double half = (static_cast<double>(m_count) - 1.0) / 2.0;
    const double focus = norm_dim * std::sin(aod_rad);
    const double amp = std::sqrt(aperture);

    arma::cx_vec a(m_count);
    for (arma::uword p = 0; p < m_count; ++p)
    {
        const double m = static_cast<double>(p) - half;
        a[p] = std::complex<double>(amp * sinc(m - focus), 0.0);
    }
    return a;
}

arma::cx_vec ula_steering(double angle_rad, arma::uword n_count)
{
    if (n_count == 0)
        throw std::invalid_argument("ula_steering: element count must be positive");

    const double scale = 1.0 / std::sqrt(static_cast<double>(n_count));
    const double step = kPi * std::sin(angle_rad);
    arma::cx_vec a(n_count);
    for (arma::uword n = 0; n < n_count; ++n)
        a[n] = std::polar(scale, step * static_cast<double>(n));
    return a;
}

double sample_kappa_db(double distance_m, const PathlossParams& params, Rng& rng)
{
    if (!(distance_m > 0.0))
        throw std::domain_error("pathloss: distance must be strictly positive");
    const double kappa_c = params.sigma_c_db * rng.normal();
    return params.kappa_a_db + 10.0 * params.kappa_b * std::log10(distance_m) + kappa_c;
}

std::complex<double> pathloss_gain(double distance_m, const PathlossParams& params, Rng& rng)
{
    const double kappa_db = sample_kappa_db(distance_m, params, rng);
    const double variance = std::pow(10.0, -0.1 * kappa_db);
    const std::complex<double> alpha = rng.cnormal(variance);
    return alpha * std::sqrt(dbi_to_linear(params.tx_gain_dbi) * dbi_to_linear(params.rx_gain_dbi));
}

arma::cx_mat synth_bs_irs_channel(const Scenario& scenario, arma::uword irs_index, Rng& rng)
{
    if (irs_index >= scenario.l_irs)
        throw std::invalid_argument("synth_bs_irs_channel: irs_index out of range");

    const auto& geo = scenario.geometry;
    const double d = dist2d(geo.bs_position, geo.irs_positions[irs_index]);
    const double aperture = scenario.lens_aperture_eff();
    const double norm_dim = scenario.lens_norm_dim_eff();

    arma::cx_mat g_mat(scenario.n_elements, scenario.m_antennas, arma::fill::zeros);

    // LOS path: angles from geometry, LOS pathloss at the BS-IRS distance.
    {
        const std::complex<double> gain = pathloss_gain(d, scenario.pathloss_los, rng);
        const double aod = bearing(geo.bs_position, geo.irs_positions[irs_index]);
        const double aoa = bearing(geo.irs_positions[irs_index], geo.bs_position);
        const arma::cx_vec a_irs = ula_steering(aoa, scenario.n_elements);
        const arma::cx_vec a_laa = lens_array_response(aod, scenario.m_antennas, aperture, norm_dim);
        g_mat += gain * a_irs * a_laa.t();
    }

    // NLOS paths: independently drawn angles, NLOS pathloss statistics.
    for (arma::uword p = 0; p < scenario.gp_paths; ++p)
    {
        const double aoa = rng.uniform(-kPi / 2.0, kPi / 2.0);
        const double aod = rng.uniform(-kPi / 2.0, kPi / 2.0);
        const std::complex<double> gain = pathloss_gain(d, scenario.pathloss_nlos, rng);
        const arma::cx_vec a_irs = ula_steering(aoa, scenario.n_elements);
        const arma::cx_vec a_laa = lens_array_response(aod, scenario.m_antennas, aperture, norm_dim);
        g_mat += gain * a_irs * a_laa.t();
    }

    return g_mat;
}

arma::cx_vec synth_irs_user_channel(const Scenario& scenario, arma::uword irs_index,
                                    arma::uword user_index, Rng& rng)
{
    if (irs_index >= scenario.l_irs)
        throw std::invalid_argument("synth_irs_user_channel: irs_index out of range");
    if (user_index >= scenario.k_users)
        throw std::invalid_argument("synth_irs_user_channel: user_index out of range");
    if (scenario.geometry.user_positions.size() != scenario.k_users)
        throw std::invalid_argument("synth_irs_user_channel: user positions not realized");

    const auto& irs = scenario.geometry.irs_positions[irs_index];
    const auto& user = scenario.geometry.user_positions[user_index];
    const double d = dist2d(irs, user);

    const std::complex<double> beta = pathloss_gain(d, scenario.pathloss_los, rng);
    const double aod = bearing(irs, user);
    return beta * ula_steering(aod, scenario.n_elements);
}

ChannelSet synth_channel_set(const Scenario& scenario, std::uint64_t seed)
{
    scenario.validate();

    ChannelSet set;
    set.seed = seed;

    // Realize user positions first; each user has its own sub-stream so the
    // realization of user k is stable under changes of k_users.
    Scenario realized = scenario;
    if (realized.geometry.user_positions.empty())
    {
        realized.geometry.user_positions.resize(scenario.k_users);
        for (arma::uword k = 0; k < scenario.k_users; ++k)
        {
            Rng rng = Rng::substream(seed, Rng::kUserPosition, k);
            // Uniform over the disk via rejection-free polar sampling.
            const double r = scenario.geometry.user_disk_radius * std::sqrt(rng.uniform());
            const double phi = rng.uniform(0.0, 2.0 * kPi);
            realized.geometry.user_positions[k] = {
                scenario.geometry.user_disk_center[0] + r * std::cos(phi),
                scenario.geometry.user_disk_center[1] + r * std::sin(phi)};
        }
    }
    set.user_positions = realized.geometry.user_positions;

    set.g.resize(scenario.l_irs);
    for (arma::uword l = 0; l < scenario.l_irs; ++l)
    {
        Rng rng = Rng::substream(seed, Rng::kBsIrsChannel, l);
        set.g[l] = synth_bs_irs_channel(realized, l, rng);
    }

    set.h.resize(scenario.l_irs);
    for (arma::uword l = 0; l < scenario.l_irs; ++l)
    {
        set.h[l].resize(scenario.k_users);
        for (arma::uword k = 0; k < scenario.k_users; ++k)
        {
            Rng rng = Rng::substream(seed, Rng::kIrsUserChannel, l, k);
            set.h[l][k] = synth_irs_user_channel(realized, l, k, rng);
        }
    }

    return set;
}

} // namespace irslens
