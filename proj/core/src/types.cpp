// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "irslens/types.hpp"

#include <cmath>

namespace irslens {

namespace {

double dist2d(const std::array<double, 2>& a, const std::array<double, 2>& b)
{
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

} // namespace

void Scenario::validate() const
{
    if (m_antennas == 0 || m_antennas % 2 == 0)
        throw std::invalid_argument("m_antennas must be odd and positive");
    if (n_elements == 0)
        throw std::invalid_argument("n_elements must be positive");
    if (l_irs == 0)
        throw std::invalid_argument("l_irs must be positive");
    if (k_users == 0)
        throw std::invalid_argument("k_users must be positive");
    if (n_rf == 0 || n_rf > m_antennas)
        throw std::invalid_argument("n_rf must satisfy 1 <= n_rf <= m_antennas");
    if (phase_bits == 0 || phase_bits > 30)
        throw std::invalid_argument("phase_bits must satisfy 1 <= phase_bits <= 30");
    if (!(p_t_w > 0.0))
        throw std::invalid_argument("p_t_w must be positive");
    if (!(sigma2_w > 0.0))
        throw std::invalid_argument("sigma2_w must be positive");
    if (!(epsilon >= 1.0))
        throw std::invalid_argument("epsilon must be >= 1 (amplifier inefficiency)");
    if (p_rf_w < 0.0 || p_n_w < 0.0 || p_cir_w < 0.0)
        throw std::invalid_argument("component powers must be nonnegative");
    if (!(bandwidth_hz > 0.0))
        throw std::invalid_argument("bandwidth_hz must be positive");

    if (rho.empty())
        throw std::invalid_argument("rho must hold one value or one per user");
    if (rho.size() != 1 && rho.size() != k_users)
        throw std::invalid_argument("rho must hold one value or one per user");
    for (double r : rho)
        if (!(r >= 0.0) || !std::isfinite(r))
            throw std::invalid_argument("rho entries must be finite and >= 0");

    if (geometry.irs_positions.size() != l_irs)
        throw std::invalid_argument("geometry.irs_positions must list one position per IRS");
    if (!geometry.user_positions.empty() && geometry.user_positions.size() != k_users)
        throw std::invalid_argument("geometry.user_positions must be empty or list one position per user");
    if (!(geometry.user_disk_radius > 0.0) && geometry.user_positions.empty())
        throw std::invalid_argument("geometry.user_disk_radius must be positive when users are drawn");

    for (const auto& irs : geometry.irs_positions)
    {
        if (!(dist2d(irs, geometry.bs_position) > 0.0))
            throw std::invalid_argument("BS-IRS distance must be strictly positive");
        for (const auto& user : geometry.user_positions)
            if (!(dist2d(irs, user) > 0.0))
                throw std::invalid_argument("IRS-user distance must be strictly positive");
    }

    if (!(pathloss_los.kappa_b > 0.0) || !(pathloss_nlos.kappa_b > 0.0))
        throw std::invalid_argument("pathloss kappa_b must be positive");
    if (pathloss_los.sigma_c_db < 0.0 || pathloss_nlos.sigma_c_db < 0.0)
        throw std::invalid_argument("pathloss sigma_c_db must be nonnegative");
    if (lens_norm_dim < 0.0 || lens_aperture < 0.0)
        throw std::invalid_argument("lens parameters must be nonnegative (0 = auto)");
}

arma::cx_vec PhaseConfig::stacked_u() const
{
    const arma::uword l_count = indices.n_rows;
    const arma::uword n_count = indices.n_cols;
    arma::cx_vec u(l_count * n_count);
    for (arma::uword l = 0; l < l_count; ++l)
        for (arma::uword n = 0; n < n_count; ++n)
            u[l * n_count + n] = std::polar(1.0, phase(l, n));
    return u;
}

void PhaseConfig::validate() const
{
    if (bits == 0 || bits > 30)
        throw std::invalid_argument("PhaseConfig: bits must satisfy 1 <= bits <= 30");
    if (indices.n_elem == 0)
        throw std::invalid_argument("PhaseConfig: empty index matrix");
    if (indices.max() >= levels())
        throw std::invalid_argument("PhaseConfig: index out of range for resolution");
}

arma::uword BeamMatrix::active_antennas(double rel_threshold) const
{
    if (w.n_elem == 0)
        return 0;
    arma::vec row_max(w.n_rows);
    for (arma::uword m = 0; m < w.n_rows; ++m)
        row_max[m] = arma::abs(w.row(m)).max();
    const double cutoff = rel_threshold * row_max.max();
    if (!(row_max.max() > 0.0))
        return 0;
    return arma::uword(arma::sum(row_max > cutoff));
}

} // namespace irslens
