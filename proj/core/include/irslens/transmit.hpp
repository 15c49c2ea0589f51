// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef IRSLENS_TRANSMIT_HPP
#define IRSLENS_TRANSMIT_HPP

#include "irslens/metrics.hpp"

namespace irslens {

// First-order expansion of sqrt(x*y) around (x0, y0):
//   sqrt(x0 y0) + (1/2) sqrt(y0/x0) (x - x0) + (1/2) sqrt(x0/y0) (y - y0).
// Upper-bounds sqrt(x y) on the nonnegative orthant with equality at the
// expansion point. Throws std::domain_error for a nonpositive expansion point.
double sqrt_surrogate(double x, double y, double x0, double y0);

// Rotates each beam column by exp(-j arg(H_k^H w_k)) so the direct-link inner
// product is real nonnegative. SINRs are invariant; zero columns stay put.
BeamMatrix rotate_to_real(const arma::cx_mat& combined, const BeamMatrix& w);

// SCA state. Rates are per-Hz bits, so eta is the squared per-Hz EE and t the
// squared power in watts^2; b is in watts (>= sigma2).
struct ScaState {
    double eta = 0.0;
    double t = 0.0;
    arma::vec a; // per-user rate, bits/s/Hz
    arma::vec v; // SINR surrogate, v_k <= 1 + gamma_k
    arma::vec b; // interference-plus-noise surrogate, b_k >= sigma2
};

struct TransmitOpts {
    double tol = 1e-4;          // relative eta improvement stop (outer SCA)
    arma::uword max_iter = 30;  // SCA iterations
    double kkt_tol = 1e-6;      // stationarity residual target
    double gap_tol = 1e-9;      // barrier duality-gap target, relative
    double tau0 = 10.0;         // initial barrier weight
    double mu = 30.0;           // barrier weight growth factor
    arma::uword newton_max = 400; // Newton step budget per subproblem
};

// One convex subproblem: maximize eta subject to the power ball, per-user QoS
// cones, the exact log and interference constraints, and the two linearized
// sqrt constraints expanded at `expansion`. `w_start` is the (strictly
// feasible) iterate the expansion was evaluated at.
struct ConvexSubproblem {
    arma::cx_mat combined; // M x K, column k = H_k
    double p_t = 0.0;
    double sigma2 = 0.0;
    double epsilon = 1.0;
    double p_c = 0.0;
    arma::vec rho; // linear per-user SINR floors
    ScaState expansion;
    BeamMatrix w_start;
};

struct SubproblemResult {
    BeamMatrix w;
    ScaState state;
    double kkt_residual = 0.0;
    arma::uword newton_iters = 0;
};

// Log-barrier interior-point solve over real-parameterized beams. Throws
// infeasible_error when the expansion point violates the constraint system.
SubproblemResult solve_subproblem(const ConvexSubproblem& sub, const TransmitOpts& opts = {});

// Matched-beam initializer: directions H_k/||H_k||, per-user powers from the
// QoS power-control system, then scaled onto the power ball. Throws
// infeasible_error when the floors are unattainable under p_t.
BeamMatrix matched_init(const arma::cx_mat& combined, const Scenario& scenario);

// Iterates solve_subproblem per the SCA schedule until eta stalls. The trace
// carries measured metrics plus eta/KKT diagnostics per iteration; the
// returned beams are the best measured-EE iterate. `n_chains` is the RF chain
// count used in the power model (M for the fully digital stage).
std::pair<BeamMatrix, RunTrace> sca_loop(const arma::cx_mat& combined, const BeamMatrix& w_init,
                                         const Scenario& scenario, arma::uword n_chains,
                                         const TransmitOpts& opts = {});

// Indices of the n_rf rows with the largest power sum_k |w_mk|^2, ascending;
// ties prefer the lower antenna index.
std::vector<arma::uword> antenna_select(const BeamMatrix& w_full, arma::uword n_rf);

// Full transmit stage: fully digital SCA, power-based antenna selection, then
// a cold-started SCA restricted to the selected rows. Optional w_init warm
// start for the fully digital stage (alternation reuse).
std::pair<BeamMatrix, RunTrace> optimize_transmit(const ChannelSet& channels,
                                                  const PhaseConfig& phases,
                                                  const Scenario& scenario,
                                                  const TransmitOpts& opts = {},
                                                  const BeamMatrix* w_init = nullptr);

} // namespace irslens

#endif
