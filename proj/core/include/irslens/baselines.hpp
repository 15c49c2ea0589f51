// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef IRSLENS_BASELINES_HPP
#define IRSLENS_BASELINES_HPP

#include "irslens/reflect.hpp"
#include "irslens/transmit.hpp"

namespace irslens {

enum class Scheme {
    kProposed,
    kZfRbf,        // zero-forcing transmit + proposed reflect optimizer
    kTbfMaxIrs,    // proposed transmit + signal-strength-only reflect
    kFullyDigital, // proposed algorithm with one RF chain per antenna
};

// Stable CLI identifiers: proposed, zf-rbf, tbf-maxirs, fully-digital.
std::string scheme_name(Scheme scheme);
Scheme parse_scheme(const std::string& name);

struct BaselineResult {
    std::string scheme;
    BeamMatrix w;
    PhaseConfig phases;
    double ee_bits_per_joule = 0.0;
    double se_bits_per_hz = 0.0;
    double total_power_w = 0.0;
    bool feasible = true;
    RunTrace trace;
};

// Zero-forcing precoder on the combined channels with equal per-user power
// p_t / K (columns normalized first, so the allocation is exact). Falls back
// to the pseudo-inverse when the Gram matrix is rank deficient; the optional
// flag reports that condition.
BeamMatrix zf_precoder(const arma::cx_mat& combined, double p_t, bool* rank_warning = nullptr);

// Coordinate ascent on (1/K) sum_k |H_k^H w_k| over the discrete phase set,
// ignoring interference and QoS by construction. Sweeps until no single
// element move improves the objective.
PhaseConfig max_irs_phases(const ChannelSet& channels, const BeamMatrix& w,
                           const PhaseConfig& phases_init);

struct BaselineOpts {
    double outer_tol = 1e-3;
    arma::uword outer_max = 10;
    bool zf_single_shot = false; // compute ZF once instead of alternating
    ReflectOpts reflect;
    TransmitOpts transmit;
};

// Runs one comparison scheme end to end on a fixed channel realization.
BaselineResult run_baseline(Scheme scheme, const ChannelSet& channels,
                            const Scenario& scenario, const BaselineOpts& opts = {});

} // namespace irslens

#endif
