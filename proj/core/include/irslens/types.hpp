// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef IRSLENS_TYPES_HPP
#define IRSLENS_TYPES_HPP

#include <armadillo>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace irslens {

// QoS targets cannot be met under the transmit power budget.
class infeasible_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Large-scale fading parameters: kappa = kappa_a + 10*kappa_b*log10(d) + kappa_c,
// kappa_c ~ N(0, sigma_c^2), all in dB. Antenna gains enter the amplitude as
// sqrt of their linear values.
struct PathlossParams {
    double kappa_a_db = 61.4;
    double kappa_b = 2.0;
    double sigma_c_db = 5.8;
    double tx_gain_dbi = 9.82;
    double rx_gain_dbi = 0.0;
};

struct Geometry {
    std::array<double, 2> bs_position{0.0, 0.0};
    std::vector<std::array<double, 2>> irs_positions{{{50.0, 50.0}, {50.0, -50.0}}};
    // Empty: user positions are drawn uniformly in the disk per realization.
    std::vector<std::array<double, 2>> user_positions;
    std::array<double, 2> user_disk_center{100.0, 0.0};
    double user_disk_radius = 30.0;
};

// Full system configuration. Powers are stored in watts and SINR floors in
// linear scale; dBm/dB only exist at the config-file boundary.
struct Scenario {
    arma::uword m_antennas = 151; // M, must be odd (lens index set 0, +-1, ...)
    arma::uword n_elements = 80;  // N reflect elements per IRS
    arma::uword l_irs = 2;        // L
    arma::uword k_users = 12;     // K
    arma::uword n_rf = 20;        // RF chains at the BS
    arma::uword phase_bits = 6;   // B, phase resolution
    arma::uword gp_paths = 2;     // NLOS paths per BS-IRS link

    double p_t_w = 1.0;                           // max transmit power (30 dBm)
    double sigma2_w = 1.9952623149688828e-15;     // noise power (-117 dBm)
    double epsilon = 1.2;                         // amplifier inefficiency 1/xi
    double p_rf_w = 0.3;                          // per RF chain
    double p_n_w = 0.0078;                        // per IRS element at resolution B
    double p_cir_w = 0.2;                         // circuit power
    double bandwidth_hz = 500e6;

    // Per-user SINR floor, linear. Size 1 broadcasts to all users.
    std::vector<double> rho{1.0};

    Geometry geometry;
    PathlossParams pathloss_los{61.4, 2.0, 5.8, 9.82, 0.0};
    PathlossParams pathloss_nlos{72.0, 2.92, 8.7, 9.82, 0.0};

    // Lens parameters; 0 means derive defaults: D~ = (M-1)/2, A = D~.
    double lens_norm_dim = 0.0;
    double lens_aperture = 0.0;

    double lens_norm_dim_eff() const
    {
        return lens_norm_dim > 0.0 ? lens_norm_dim
                                   : (static_cast<double>(m_antennas) - 1.0) / 2.0;
    }
    double lens_aperture_eff() const
    {
        return lens_aperture > 0.0 ? lens_aperture : lens_norm_dim_eff();
    }

    double rho_k(arma::uword k) const
    {
        return rho.size() == 1 ? rho[0] : rho.at(k);
    }

    // P_c: everything except the amplifier term of the power model.
    double static_power_w() const
    {
        return static_cast<double>(n_rf) * p_rf_w +
               static_cast<double>(l_irs) * static_cast<double>(n_elements) * p_n_w +
               p_cir_w;
    }

    void validate() const; // throws std::invalid_argument with the field name
};

// Discrete phase-shift assignment theta_ln = 2*pi*indices(l,n)/2^bits.
struct PhaseConfig {
    arma::umat indices; // L x N, entries in [0, 2^bits)
    arma::uword bits = 6;

    static PhaseConfig zeros(arma::uword l_irs, arma::uword n_elements, arma::uword bits)
    {
        PhaseConfig p;
        p.indices.zeros(l_irs, n_elements);
        p.bits = bits;
        return p;
    }

    arma::uword levels() const { return arma::uword(1) << bits; }
    arma::uword total_elements() const { return indices.n_rows * indices.n_cols; }

    double phase(arma::uword l, arma::uword n) const
    {
        return 2.0 * arma::datum::pi * static_cast<double>(indices(l, n)) /
               static_cast<double>(levels());
    }

    // Stacked unit-modulus vector u with u[l*N + n] = exp(j*theta_ln).
    arma::cx_vec stacked_u() const;

    void validate() const;
};

// Transmit beamforming matrix; column k serves user k, row m drives antenna m.
struct BeamMatrix {
    arma::cx_mat w;

    static BeamMatrix zeros(arma::uword m, arma::uword k)
    {
        BeamMatrix b;
        b.w.zeros(m, k);
        return b;
    }

    double total_tx_power() const
    {
        return std::pow(arma::norm(arma::vectorise(w), 2), 2);
    }

    // Rows whose sup-norm exceeds rel_threshold times the largest row sup-norm
    // count as driven by an RF chain. Keeps numerical dust out of the l0 norm.
    arma::uword active_antennas(double rel_threshold = 1e-9) const;
};

// One per-iteration record of an optimization run. Rates and EE are reported
// per Hz; eta/kkt_residual are transmit-stage solver diagnostics.
struct TraceRecord {
    arma::uword iteration = 0;
    double ee_per_hz = 0.0;        // bits/J/Hz
    double sum_rate_per_hz = 0.0;  // bits/s/Hz
    double total_power_w = 0.0;
    double min_sinr_margin = 0.0;  // min_k (gamma_k - rho_k), linear
    arma::uword phase_changes = 0;
    double eta = 0.0;
    double kkt_residual = 0.0;
    arma::uword inner_iterations = 0;
};

struct RunTrace {
    std::vector<TraceRecord> records;
    bool feasible = true;
    std::string note;

    void append(TraceRecord rec)
    {
        if (!records.empty() && rec.iteration <= records.back().iteration)
            throw std::invalid_argument("RunTrace: iteration indices must be strictly increasing");
        if (!std::isfinite(rec.ee_per_hz))
            throw std::invalid_argument("RunTrace: non-finite EE value");
        records.push_back(rec);
    }

    const TraceRecord& back() const { return records.back(); }
    bool empty() const { return records.empty(); }
};

} // namespace irslens

#endif
