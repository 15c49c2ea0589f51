// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef IRSLENS_REFLECT_HPP
#define IRSLENS_REFLECT_HPP

#include "irslens/metrics.hpp"

#include <optional>

namespace irslens {

// Fractional-programming state for the fixed-W sum-rate maximization over the
// discrete IRS phase vector u.
//
// The surrogate chain works in natural-log units: with rate terms ln(1+gamma)
// the multiplier update lambda = gamma and the closed-form quadratic-transform
// auxiliary y are exact maximizers. Reported rates elsewhere are base-2; the
// argmax is the same.
struct FpState {
    arma::vec lambda; // K multipliers, lambda_k >= 0
    arma::cx_vec y;   // K quadratic-transform auxiliaries
    // v.slice(k).col(i) = v_{k,i}: stacked diag(H_lk^H) G_l w_i across l.
    arma::cx_cube v;

    arma::uword users() const { return v.n_slices; }
    arma::uword stacked_len() const { return v.n_rows; }
};

// Builds v_{k,i} for the current (channels, W); lambda and y start at zero.
// Must be rebuilt whenever W changes.
FpState make_fp_state(const ChannelSet& channels, const BeamMatrix& w);

// Per-user SINRs expressed through the stacked vectors:
// gamma_k = |u^H v_{k,k}|^2 / (sum_{i != k} |u^H v_{k,i}|^2 + sigma2).
arma::vec fp_sinr(const arma::cx_vec& u, const FpState& state, double sigma2_w);

// Multiplier update: the per-user optimum is lambda_k = gamma_k.
arma::vec update_lambda(const arma::vec& gammas);

// Closed-form auxiliary update
// y_k = sqrt(1+lambda_k) (u^H v_{k,k}) / (sum_i |u^H v_{k,i}|^2 + sigma2).
arma::cx_vec update_y(const arma::cx_vec& u, const FpState& state, double sigma2_w);

// Coefficients of the per-element quadratic surrogate
// f5(u) = -u^H A u + 2 Re{u^H B} + C and of the per-user QoS quadratics
// u^H D_k u >= rho_k sigma2.
struct QuadraticForms {
    arma::cx_mat a_mat;
    arma::cx_vec b_vec;
    double c_scalar = 0.0;
    std::vector<arma::cx_mat> d_mats;
};

QuadraticForms assemble_quadratics(const FpState& state, double sigma2_w,
                                   const arma::vec& rho);

// Phase-set indices q for which moving element `element_index` to phase
// phases[q] (all others fixed) keeps every u^H D_k u >= rho_k * sigma2.
// Evaluated with rank-1 incremental updates around the current u.
std::vector<arma::uword> qos_feasible_set(const arma::cx_vec& u, arma::uword element_index,
                                          const QuadraticForms& quad, const arma::vec& rho,
                                          double sigma2_w, const std::vector<double>& phases);

// Single-coordinate optimum: the feasible phase maximizing Re{u_n^* d_n} with
// d_n = B_n - sum_{j != n} A_{n,j} u_j. Ties resolve to the smallest phase
// index. Empty feasible set signals no-update (nullopt).
std::optional<arma::uword> update_element(arma::uword element_index, const QuadraticForms& quad,
                                          const arma::cx_vec& u,
                                          const std::vector<arma::uword>& feasible,
                                          const std::vector<double>& phases);

struct ReflectOpts {
    double tol = 1e-4;        // relative sum-rate improvement stop
    arma::uword max_iter = 50;
    bool randomized_order = false;
    std::uint64_t order_seed = 0;
    arma::uword multi_start = 1; // > 1 adds uniform-random restarts
    std::uint64_t start_seed = 0;
};

// Alternates (lambda, y) updates with full coordinate sweeps over the discrete
// phases until the sum rate stalls, then keeps sweeping at the final (lambda,
// y) until no single feasible element change improves the surrogate, so the
// returned configuration is a coordinate-wise maximum. An element keeps its
// current phase unless a candidate is strictly better; if the start violates
// QoS, one unconstrained sweep runs first and the trace is flagged.
std::pair<PhaseConfig, RunTrace> optimize_reflect(const ChannelSet& channels,
                                                  const BeamMatrix& w,
                                                  const PhaseConfig& phases_init,
                                                  const Scenario& scenario,
                                                  const ReflectOpts& opts = {});

} // namespace irslens

#endif
