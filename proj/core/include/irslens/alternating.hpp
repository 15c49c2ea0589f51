// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef IRSLENS_ALTERNATING_HPP
#define IRSLENS_ALTERNATING_HPP

#include "irslens/reflect.hpp"
#include "irslens/transmit.hpp"

namespace irslens {

struct AlternatingOpts {
    double outer_tol = 1e-3;
    arma::uword outer_max = 20;
    ReflectOpts reflect;
    TransmitOpts transmit;
};

struct AlternatingResult {
    BeamMatrix w;
    PhaseConfig phases;
    RunTrace trace;
};

// Joint EE maximization: all-zero initial phases, then alternating transmit
// (SCA + antenna selection) and reflect (discrete coordinate descent) rounds
// until the per-Hz EE improvement falls below outer_tol. Each block update
// keeps the better of the incumbent and the new solution, so the recorded EE
// trace is nondecreasing. The returned solution satisfies the power ball, QoS
// floors, discrete phases and the RF chain budget; infeasibility propagates
// as infeasible_error tagged with the stage that detected it.
AlternatingResult alternating_optimize(const ChannelSet& channels, const Scenario& scenario,
                                       const AlternatingOpts& opts = {});

} // namespace irslens

#endif
