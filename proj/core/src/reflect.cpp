// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "irslens/reflect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace irslens {

FpState make_fp_state(const ChannelSet& channels, const BeamMatrix& w)
{
    const arma::uword l_count = channels.g.size();
    if (l_count == 0 || channels.h.size() != l_count)
        throw std::invalid_argument("make_fp_state: empty or inconsistent channel set");

    const arma::uword n_count = channels.g[0].n_rows;
    const arma::uword k_count = channels.h[0].size();
    if (w.w.n_rows != channels.g[0].n_cols || w.w.n_cols != k_count)
        throw std::invalid_argument("make_fp_state: beam matrix dimensions do not match channels");

    FpState state;
    state.lambda.zeros(k_count);
    state.y.zeros(k_count);
    state.v.zeros(n_count * l_count, k_count, k_count);

    for (arma::uword l = 0; l < l_count; ++l)
    {
        const arma::cx_mat gw = channels.g[l] * w.w; // N x K, column i = G_l w_i
        for (arma::uword k = 0; k < k_count; ++k)
        {
            const arma::cx_vec hk_conj = arma::conj(channels.h[l][k]);
            for (arma::uword i = 0; i < k_count; ++i)
                state.v.slice(k).col(i).subvec(l * n_count, (l + 1) * n_count - 1) =
                    hk_conj % gw.col(i);
        }
    }
    return state;
}

arma::vec fp_sinr(const arma::cx_vec& u, const FpState& state, double sigma2_w)
{
    const arma::uword k_count = state.users();
    arma::vec gammas(k_count);
    for (arma::uword k = 0; k < k_count; ++k)
    {
        double signal = 0.0, interference = 0.0;
        for (arma::uword i = 0; i < k_count; ++i)
        {
            const double p = std::norm(arma::cdot(u, state.v.slice(k).col(i)));
            if (i == k)
                signal = p;
            else
                interference += p;
        }
        gammas[k] = signal / (interference + sigma2_w);
    }
    return gammas;
}

arma::vec update_lambda(const arma::vec& gammas)
{
    for (double g : gammas)
        if (!(g >= 0.0))
            throw std::invalid_argument("update_lambda: SINR values must be nonnegative");
    return gammas;
}

arma::cx_vec update_y(const arma::cx_vec& u, const FpState& state, double sigma2_w)
{
    const arma::uword k_count = state.users();
    arma::cx_vec y(k_count);
    for (arma::uword k = 0; k < k_count; ++k)
    {
        std::complex<double> direct{};
        double denom = sigma2_w;
        for (arma::uword i = 0; i < k_count; ++i)
        {
            const std::complex<double> t = arma::cdot(u, state.v.slice(k).col(i));
            denom += std::norm(t);
            if (i == k)
                direct = t;
        }
        y[k] = std::sqrt(1.0 + state.lambda[k]) * direct / denom;
    }
    return y;
}

QuadraticForms assemble_quadratics(const FpState& state, double sigma2_w, const arma::vec& rho)
{
    const arma::uword k_count = state.users();
    const arma::uword len = state.stacked_len();
    if (rho.n_elem != k_count)
        throw std::invalid_argument("assemble_quadratics: rho size mismatch");

    QuadraticForms quad;
    quad.a_mat.zeros(len, len);
    quad.b_vec.zeros(len);
    quad.c_scalar = 0.0;
    quad.d_mats.assign(k_count, arma::cx_mat(len, len, arma::fill::zeros));

    for (arma::uword k = 0; k < k_count; ++k)
    {
        const double y_sq = std::norm(state.y[k]);
        for (arma::uword i = 0; i < k_count; ++i)
        {
            const arma::cx_vec& vki = state.v.slice(k).col(i);
            const arma::cx_mat gram = vki * vki.t();
            quad.a_mat += y_sq * gram;
            if (i == k)
                quad.d_mats[k] += gram;
            else
                quad.d_mats[k] -= rho[k] * gram;
        }
        quad.b_vec += std::sqrt(1.0 + state.lambda[k]) * std::conj(state.y[k]) *
                      state.v.slice(k).col(k);
        quad.c_scalar -= y_sq * sigma2_w;
    }
    return quad;
}

std::vector<arma::uword> qos_feasible_set(const arma::cx_vec& u, arma::uword element_index,
                                          const QuadraticForms& quad, const arma::vec& rho,
                                          double sigma2_w, const std::vector<double>& phases)
{
    const arma::uword k_count = quad.d_mats.size();
    if (element_index >= u.n_elem)
        throw std::invalid_argument("qos_feasible_set: element index out of range");

    // Rank-1 update data: u'^H D u' = q + 2 Re{conj(delta) (Du)_n} + |delta|^2 D_nn.
    arma::vec q(k_count);
    arma::cx_vec du_n(k_count);
    arma::vec d_nn(k_count);
    for (arma::uword k = 0; k < k_count; ++k)
    {
        const arma::cx_vec du = quad.d_mats[k] * u;
        q[k] = std::real(arma::cdot(u, du));
        du_n[k] = du[element_index];
        d_nn[k] = std::real(quad.d_mats[k](element_index, element_index));
    }

    std::vector<arma::uword> feasible;
    feasible.reserve(phases.size());
    for (arma::uword qi = 0; qi < phases.size(); ++qi)
    {
        const std::complex<double> delta = std::polar(1.0, phases[qi]) - u[element_index];
        bool ok = true;
        for (arma::uword k = 0; k < k_count && ok; ++k)
        {
            const double val = q[k] + 2.0 * std::real(std::conj(delta) * du_n[k]) +
                               std::norm(delta) * d_nn[k];
            ok = val >= rho[k] * sigma2_w;
        }
        if (ok)
            feasible.push_back(qi);
    }
    return feasible;
}

std::optional<arma::uword> update_element(arma::uword element_index, const QuadraticForms& quad,
                                          const arma::cx_vec& u,
                                          const std::vector<arma::uword>& feasible,
                                          const std::vector<double>& phases)
{
    if (feasible.empty())
        return std::nullopt;
    if (element_index >= u.n_elem)
        throw std::invalid_argument("update_element: element index out of range");

    // (A u)_n through the Hermitian structure: row n of A is conj(col n)^T.
    const std::complex<double> au_n = arma::cdot(quad.a_mat.col(element_index), u);
    const std::complex<double> d_n = quad.b_vec[element_index] -
                                     (au_n - quad.a_mat(element_index, element_index) *
                                                 u[element_index]);

    arma::uword best = feasible.front();
    double best_val = -arma::datum::inf;
    for (arma::uword qi : feasible)
    {
        const double val = std::real(std::polar(1.0, -phases[qi]) * d_n);
        if (val > best_val)
        {
            best_val = val;
            best = qi;
        }
    }
    return best;
}

namespace {

struct SweepCaches {
    arma::cx_vec s;          // A * u
    std::vector<arma::cx_vec> du; // D_k * u
    arma::vec q;             // u^H D_k u
};

SweepCaches make_caches(const QuadraticForms& quad, const arma::cx_vec& u)
{
    SweepCaches c;
    c.s = quad.a_mat * u;
    const arma::uword k_count = quad.d_mats.size();
    c.du.resize(k_count);
    c.q.set_size(k_count);
    for (arma::uword k = 0; k < k_count; ++k)
    {
        c.du[k] = quad.d_mats[k] * u;
        c.q[k] = std::real(arma::cdot(u, c.du[k]));
    }
    return c;
}

// One coordinate sweep; returns the number of accepted phase changes. An
// element moves only when a feasible candidate is strictly better than the
// current phase.
arma::uword sweep_elements(const QuadraticForms& quad, const arma::vec& rho, double sigma2_w,
                           const std::vector<std::complex<double>>& circle,
                           const std::vector<arma::uword>& order, bool enforce_qos,
                           arma::cx_vec& u, arma::umat& indices, SweepCaches& caches)
{
    const arma::uword n_per_irs = indices.n_cols;
    const arma::uword k_count = quad.d_mats.size();
    arma::uword changes = 0;

    for (arma::uword n : order)
    {
        const std::complex<double> d_n =
            quad.b_vec[n] - (caches.s[n] - quad.a_mat(n, n) * u[n]);

        const double val_cur = std::real(std::conj(u[n]) * d_n);
        double best_val = val_cur;
        arma::uword best_qi = 0;
        bool moved = false;

        for (arma::uword qi = 0; qi < circle.size(); ++qi)
        {
            const double val = std::real(std::conj(circle[qi]) * d_n);
            if (val <= best_val)
                continue;
            if (enforce_qos)
            {
                const std::complex<double> delta = circle[qi] - u[n];
                bool ok = true;
                for (arma::uword k = 0; k < k_count && ok; ++k)
                {
                    const double cand = caches.q[k] +
                                        2.0 * std::real(std::conj(delta) * caches.du[k][n]) +
                                        std::norm(delta) *
                                            std::real(quad.d_mats[k](n, n));
                    ok = cand >= rho[k] * sigma2_w;
                }
                if (!ok)
                    continue;
            }
            best_val = val;
            best_qi = qi;
            moved = true;
        }

        if (!moved)
            continue;

        const std::complex<double> delta = circle[best_qi] - u[n];
        caches.s += quad.a_mat.col(n) * delta;
        for (arma::uword k = 0; k < k_count; ++k)
        {
            caches.q[k] += 2.0 * std::real(std::conj(delta) * caches.du[k][n]) +
                           std::norm(delta) * std::real(quad.d_mats[k](n, n));
            caches.du[k] += quad.d_mats[k].col(n) * delta;
        }
        u[n] = circle[best_qi];
        indices(n / n_per_irs, n % n_per_irs) = best_qi;
        ++changes;
    }
    return changes;
}

struct ReflectRun {
    PhaseConfig phases;
    RunTrace trace;
    double nats = 0.0;
    bool feasible = false;
};

ReflectRun run_single(const FpState& base_state, const PhaseConfig& start,
                      const Scenario& scenario, const ReflectOpts& opts, double power_w)
{
    const double sigma2 = scenario.sigma2_w;
    const arma::uword k_count = base_state.users();
    const arma::uword total = base_state.stacked_len();

    arma::vec rho(k_count);
    for (arma::uword k = 0; k < k_count; ++k)
        rho[k] = scenario.rho_k(k);

    const std::vector<double> phases_f = phase_set(start.bits);
    std::vector<std::complex<double>> circle(phases_f.size());
    for (arma::uword qi = 0; qi < phases_f.size(); ++qi)
        circle[qi] = std::polar(1.0, phases_f[qi]);

    FpState state = base_state;
    ReflectRun run;
    run.phases = start;
    arma::cx_vec u = start.stacked_u();

    std::vector<arma::uword> order(total);
    std::iota(order.begin(), order.end(), arma::uword(0));
    Rng order_rng(opts.order_seed);

    auto shuffle_order = [&]() {
        if (!opts.randomized_order)
            return;
        for (arma::uword i = total; i > 1; --i)
            std::swap(order[i - 1], order[order_rng.next_u64() % i]);
    };

    arma::vec gammas = fp_sinr(u, state, sigma2);
    auto nats_of = [](const arma::vec& g) {
        double s = 0.0;
        for (double x : g)
            s += std::log1p(x);
        return s;
    };
    auto margin_of = [&](const arma::vec& g) { return (g - rho).min(); };
    auto record = [&](arma::uword iter, arma::uword changes) {
        TraceRecord rec;
        rec.iteration = iter;
        rec.sum_rate_per_hz = sum_rate(gammas, 1.0);
        rec.ee_per_hz = rec.sum_rate_per_hz / power_w;
        rec.total_power_w = power_w;
        rec.min_sinr_margin = margin_of(gammas);
        rec.phase_changes = changes;
        run.trace.append(rec);
    };

    record(0, 0);

    const bool feasible_start = margin_of(gammas) >= 0.0;
    arma::uword iter = 0;

    // Infeasible start: one sweep ignoring the QoS filter to climb toward
    // feasibility before enforcement kicks in.
    if (!feasible_start)
    {
        run.trace.note = "infeasible start: one unconstrained sweep";
        state.lambda = update_lambda(gammas);
        state.y = update_y(u, state, sigma2);
        const QuadraticForms quad = assemble_quadratics(state, sigma2, rho);
        SweepCaches caches = make_caches(quad, u);
        shuffle_order();
        const arma::uword changes = sweep_elements(quad, rho, sigma2, circle, order,
                                                   false, u, run.phases.indices, caches);
        gammas = fp_sinr(u, state, sigma2);
        record(++iter, changes);
    }

    double prev_nats = nats_of(gammas);

    // Main loop plus certification: keep cycling until a full sweep accepts no
    // change, so the result is a coordinate-wise maximum at the final (lambda,
    // y). The extra budget past max_iter bounds the certification phase.
    const arma::uword hard_cap = opts.max_iter + 30;
    while (iter < hard_cap)
    {
        state.lambda = update_lambda(gammas);
        state.y = update_y(u, state, sigma2);
        const QuadraticForms quad = assemble_quadratics(state, sigma2, rho);
        SweepCaches caches = make_caches(quad, u);
        shuffle_order();
        const arma::uword changes = sweep_elements(quad, rho, sigma2, circle, order,
                                                   true, u, run.phases.indices, caches);
        gammas = fp_sinr(u, state, sigma2);
        record(++iter, changes);

        if (changes == 0)
            break; // coordinate-wise maximum certified

        const double nats = nats_of(gammas);
        const double rel = (nats - prev_nats) / std::max(std::abs(prev_nats), 1e-300);
        prev_nats = nats;
        if (iter >= opts.max_iter && rel >= opts.tol)
            break; // budget exhausted while still improving
    }

    run.nats = nats_of(gammas);
    run.feasible = margin_of(gammas) >= 0.0;
    run.trace.feasible = run.feasible;
    return run;
}

} // namespace

std::pair<PhaseConfig, RunTrace> optimize_reflect(const ChannelSet& channels,
                                                  const BeamMatrix& w,
                                                  const PhaseConfig& phases_init,
                                                  const Scenario& scenario,
                                                  const ReflectOpts& opts)
{
    phases_init.validate();
    if (phases_init.indices.n_rows != channels.g.size() ||
        phases_init.indices.n_cols != channels.g[0].n_rows)
        throw std::invalid_argument("optimize_reflect: phase dimensions do not match channels");

    const FpState state = make_fp_state(channels, w);
    const double power_w = total_power(w, scenario);

    ReflectRun best = run_single(state, phases_init, scenario, opts, power_w);

    Rng start_rng(opts.start_seed);
    for (arma::uword s = 1; s < opts.multi_start; ++s)
    {
        PhaseConfig random_start = phases_init;
        for (auto& idx : random_start.indices)
            idx = start_rng.next_u64() % random_start.levels();
        ReflectRun candidate = run_single(state, random_start, scenario, opts, power_w);
        const bool better = (candidate.feasible && !best.feasible) ||
                            (candidate.feasible == best.feasible && candidate.nats > best.nats);
        if (better)
            best = std::move(candidate);
    }

    return {std::move(best.phases), std::move(best.trace)};
}

} // namespace irslens
