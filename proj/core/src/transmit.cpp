// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "irslens/transmit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace irslens {

double sqrt_surrogate(double x, double y, double x0, double y0)
{
    if (!(x0 > 0.0) || !(y0 > 0.0))
        throw std::domain_error("sqrt_surrogate: expansion point must be strictly positive");
    return std::sqrt(x0 * y0) + 0.5 * std::sqrt(y0 / x0) * (x - x0) +
           0.5 * std::sqrt(x0 / y0) * (y - y0);
}

BeamMatrix rotate_to_real(const arma::cx_mat& combined, const BeamMatrix& w)
{
    if (combined.n_rows != w.w.n_rows || combined.n_cols != w.w.n_cols)
        throw std::invalid_argument("rotate_to_real: dimension mismatch");
    BeamMatrix out = w;
    for (arma::uword k = 0; k < w.w.n_cols; ++k)
    {
        const std::complex<double> z = arma::cdot(combined.col(k), w.w.col(k));
        const double mag = std::abs(z);
        if (mag > 0.0)
            out.w.col(k) *= std::conj(z) / mag;
    }
    return out;
}

namespace {

constexpr double kLn2 = 0.69314718055994530942;

// Variable layout of the real-parameterized subproblem:
// [x (2MK: per-column Re block then Im block) | eta | t | a (K) | v (K) | b~ (K)].
// Channels and the b surrogate are normalized by sigma (b~ = b / sigma^2) so
// all constraint functions live on comparable scales.
struct Layout {
    arma::uword m = 0, k = 0;
    arma::uword nx() const { return 2 * m * k; }
    arma::uword o_eta() const { return nx(); }
    arma::uword o_t() const { return nx() + 1; }
    arma::uword o_a() const { return nx() + 2; }
    arma::uword o_v() const { return o_a() + k; }
    arma::uword o_b() const { return o_v() + k; }
    arma::uword nz() const { return nx() + 2 + 3 * k; }
    arma::uword xoff(arma::uword col) const { return col * 2 * m; }
};

struct NormProb {
    Layout lay;
    arma::cx_mat hn;   // M x K, H_k / sigma
    arma::mat r, s;    // 2M x K real gradient backbones of Re/Im(hn_k^H w_i)
    double p_t = 0.0, eps = 1.0, p_c = 0.0;
    arma::vec rho;                    // linear floors
    std::vector<arma::uword> qos;     // users with rho_k > 0
    // Affine surrogate coefficients (value = c0 + cv * v + cb * b~ etc.).
    arma::vec fa_a_c0, fa_a_cv, fa_a_cb;
    double fa_b_c0 = 0.0, fa_b_ceta = 0.0, fa_b_ct = 0.0;
};

arma::cx_mat unpack_w(const NormProb& p, const arma::vec& z)
{
    const Layout& L = p.lay;
    arma::cx_mat w(L.m, L.k);
    for (arma::uword i = 0; i < L.k; ++i)
        for (arma::uword m = 0; m < L.m; ++m)
            w(m, i) = {z[L.xoff(i) + m], z[L.xoff(i) + L.m + m]};
    return w;
}

void pack_w(const NormProb& p, const arma::cx_mat& w, arma::vec& z)
{
    const Layout& L = p.lay;
    for (arma::uword i = 0; i < L.k; ++i)
        for (arma::uword m = 0; m < L.m; ++m)
        {
            z[L.xoff(i) + m] = w(m, i).real();
            z[L.xoff(i) + L.m + m] = w(m, i).imag();
        }
}

struct Eval {
    arma::cx_mat s_mat;  // K x K, (k,i) = hn_k^H w_i
    arma::vec interf;    // normalized interference per user
    double power = 0.0;  // sum ||w_k||^2 (physical watts)
    arma::vec g;         // all constraint values
    bool in_domain = true;
};

// Constraint vector order: gA (K) | gB | gC | gD (qos) | gE (K) | gF (K) | gG | gH | gJ (K).
struct ConstraintIdx {
    arma::uword a0, b, c, d0, e0, f0, g, h, j0, count;
    explicit ConstraintIdx(arma::uword k, arma::uword nq)
    {
        a0 = 0;
        b = k;
        c = k + 1;
        d0 = k + 2;
        e0 = d0 + nq;
        f0 = e0 + k;
        g = f0 + k;
        h = g + 1;
        j0 = h + 1;
        count = j0 + k;
    }
};

Eval evaluate(const NormProb& p, const ConstraintIdx& ci, const arma::vec& z)
{
    const Layout& L = p.lay;
    Eval ev;
    ev.g.set_size(ci.count);

    const double eta = z[L.o_eta()], t = z[L.o_t()];
    const arma::vec a = z.subvec(L.o_a(), L.o_a() + L.k - 1);
    const arma::vec v = z.subvec(L.o_v(), L.o_v() + L.k - 1);
    const arma::vec b = z.subvec(L.o_b(), L.o_b() + L.k - 1);

    if (!(t > 0.0) || v.min() <= 0.0)
    {
        ev.in_domain = false;
        return ev;
    }

    const arma::cx_mat w = unpack_w(p, z);
    ev.s_mat = p.hn.t() * w;
    ev.power = arma::dot(z.subvec(0, L.nx() - 1), z.subvec(0, L.nx() - 1));
    ev.interf.zeros(L.k);
    for (arma::uword k = 0; k < L.k; ++k)
        for (arma::uword i = 0; i < L.k; ++i)
            if (i != k)
                ev.interf[k] += std::norm(ev.s_mat(k, i));

    for (arma::uword k = 0; k < L.k; ++k)
        ev.g[ci.a0 + k] = p.fa_a_c0[k] + p.fa_a_cv[k] * v[k] + p.fa_a_cb[k] * b[k] -
                          ev.s_mat(k, k).real();
    ev.g[ci.b] = p.fa_b_c0 + p.fa_b_ceta * eta + p.fa_b_ct * t - arma::sum(a);
    ev.g[ci.c] = ev.power - p.p_t;
    for (arma::uword q = 0; q < p.qos.size(); ++q)
    {
        const arma::uword k = p.qos[q];
        ev.g[ci.d0 + q] = std::sqrt(ev.interf[k] + 1.0) -
                          ev.s_mat(k, k).real() / std::sqrt(p.rho[k]);
    }
    for (arma::uword k = 0; k < L.k; ++k)
        ev.g[ci.e0 + k] = a[k] - std::log2(v[k]);
    for (arma::uword k = 0; k < L.k; ++k)
        ev.g[ci.f0 + k] = 1.0 + ev.interf[k] - b[k];
    ev.g[ci.g] = p.eps * ev.power + p.p_c - std::sqrt(t);
    ev.g[ci.h] = -eta;
    for (arma::uword k = 0; k < L.k; ++k)
        ev.g[ci.j0 + k] = 1.0 - v[k];

    return ev;
}

double barrier_value(const Eval& ev, double tau, double eta)
{
    if (!ev.in_domain || ev.g.max() >= 0.0)
        return std::numeric_limits<double>::infinity();
    return -tau * eta - arma::sum(arma::log(-ev.g));
}

// Assembles gradient and Hessian of the barrier at z. Returns false when the
// point is outside the domain.
bool barrier_derivs(const NormProb& p, const ConstraintIdx& ci, const arma::vec& z,
                    double tau, arma::vec& grad, arma::mat& hess)
{
    const Layout& L = p.lay;
    const Eval ev = evaluate(p, ci, z);
    if (!ev.in_domain || ev.g.max() >= 0.0)
        return false;

    const double t = z[L.o_t()];
    const arma::vec v = z.subvec(L.o_v(), L.o_v() + L.k - 1);
    const arma::vec w1 = -1.0 / ev.g;     // 1 / (-g)
    const arma::vec w2 = 1.0 / arma::square(ev.g);

    grad.zeros(L.nz());
    hess.zeros(L.nz(), L.nz());
    grad[L.o_eta()] -= tau;

    arma::vec gvec(L.nz());
    auto add_constraint = [&](arma::uword idx) {
        grad += w1[idx] * gvec;
        hess += w2[idx] * (gvec * gvec.t());
    };

    // gA_k: affine in (v_k, b_k) minus Re S(k,k).
    for (arma::uword k = 0; k < L.k; ++k)
    {
        gvec.zeros();
        gvec.subvec(L.xoff(k), L.xoff(k) + 2 * L.m - 1) = -p.r.col(k);
        gvec[L.o_v() + k] = p.fa_a_cv[k];
        gvec[L.o_b() + k] = p.fa_a_cb[k];
        add_constraint(ci.a0 + k);
    }

    // gB: affine in (eta, t, a).
    {
        gvec.zeros();
        gvec[L.o_eta()] = p.fa_b_ceta;
        gvec[L.o_t()] = p.fa_b_ct;
        gvec.subvec(L.o_a(), L.o_a() + L.k - 1).fill(-1.0);
        add_constraint(ci.b);
    }

    // gC: power ball.
    {
        gvec.zeros();
        gvec.subvec(0, L.nx() - 1) = 2.0 * z.subvec(0, L.nx() - 1);
        add_constraint(ci.c);
        for (arma::uword i = 0; i < L.nx(); ++i)
            hess(i, i) += w1[ci.c] * 2.0;
    }

    // gD: second-order-cone QoS.
    arma::vec phi(p.qos.size());
    for (arma::uword q = 0; q < p.qos.size(); ++q)
    {
        const arma::uword k = p.qos[q];
        phi[q] = std::sqrt(ev.interf[k] + 1.0);
        gvec.zeros();
        for (arma::uword i = 0; i < L.k; ++i)
        {
            if (i == k)
                continue;
            const double re = ev.s_mat(k, i).real(), im = ev.s_mat(k, i).imag();
            gvec.subvec(L.xoff(i), L.xoff(i) + 2 * L.m - 1) =
                (re * p.r.col(k) + im * p.s.col(k)) / phi[q];
        }
        gvec.subvec(L.xoff(k), L.xoff(k) + 2 * L.m - 1) -=
            p.r.col(k) / std::sqrt(p.rho[k]);
        add_constraint(ci.d0 + q);

        // Negative-curvature rank-1 of the cone function; the grad_I vector.
        arma::vec grad_i(L.nz(), arma::fill::zeros);
        for (arma::uword i = 0; i < L.k; ++i)
        {
            if (i == k)
                continue;
            const double re = ev.s_mat(k, i).real(), im = ev.s_mat(k, i).imag();
            grad_i.subvec(L.xoff(i), L.xoff(i) + 2 * L.m - 1) =
                2.0 * (re * p.r.col(k) + im * p.s.col(k));
        }
        hess -= (w1[ci.d0 + q] / (4.0 * phi[q] * phi[q] * phi[q])) * (grad_i * grad_i.t());
    }

    // gE_k: a_k - log2(v_k).
    for (arma::uword k = 0; k < L.k; ++k)
    {
        gvec.zeros();
        gvec[L.o_a() + k] = 1.0;
        gvec[L.o_v() + k] = -1.0 / (v[k] * kLn2);
        add_constraint(ci.e0 + k);
        hess(L.o_v() + k, L.o_v() + k) += w1[ci.e0 + k] / (v[k] * v[k] * kLn2);
    }

    // gF_k: interference bound.
    for (arma::uword k = 0; k < L.k; ++k)
    {
        gvec.zeros();
        for (arma::uword i = 0; i < L.k; ++i)
        {
            if (i == k)
                continue;
            const double re = ev.s_mat(k, i).real(), im = ev.s_mat(k, i).imag();
            gvec.subvec(L.xoff(i), L.xoff(i) + 2 * L.m - 1) =
                2.0 * (re * p.r.col(k) + im * p.s.col(k));
        }
        gvec[L.o_b() + k] = -1.0;
        add_constraint(ci.f0 + k);
    }

    // gG: amplifier power versus sqrt(t).
    {
        gvec.zeros();
        gvec.subvec(0, L.nx() - 1) = 2.0 * p.eps * z.subvec(0, L.nx() - 1);
        gvec[L.o_t()] = -0.5 / std::sqrt(t);
        add_constraint(ci.g);
        for (arma::uword i = 0; i < L.nx(); ++i)
            hess(i, i) += w1[ci.g] * 2.0 * p.eps;
        hess(L.o_t(), L.o_t()) += w1[ci.g] * 0.25 / (t * std::sqrt(t));
    }

    // gH: eta > 0.
    {
        gvec.zeros();
        gvec[L.o_eta()] = -1.0;
        add_constraint(ci.h);
    }

    // gJ_k: v_k > 1.
    for (arma::uword k = 0; k < L.k; ++k)
    {
        gvec.zeros();
        gvec[L.o_v() + k] = -1.0;
        add_constraint(ci.j0 + k);
    }

    // Shared interference curvature of gF_k and gD_k: rank-2 per (k, i != k).
    for (arma::uword k = 0; k < L.k; ++k)
    {
        double coef = 2.0 * w1[ci.f0 + k];
        for (arma::uword q = 0; q < p.qos.size(); ++q)
            if (p.qos[q] == k)
                coef += w1[ci.d0 + q] / phi[q];
        const arma::mat rank2 = coef * (p.r.col(k) * p.r.col(k).t() +
                                        p.s.col(k) * p.s.col(k).t());
        for (arma::uword i = 0; i < L.k; ++i)
        {
            if (i == k)
                continue;
            hess.submat(L.xoff(i), L.xoff(i), L.xoff(i) + 2 * L.m - 1,
                        L.xoff(i) + 2 * L.m - 1) += rank2;
        }
    }

    return true;
}

struct CenterResult {
    double grad_inf = 0.0;
    arma::uword iters = 0;
};

CenterResult newton_center(const NormProb& p, const ConstraintIdx& ci, double tau,
                           arma::vec& z, arma::uword max_steps)
{
    arma::vec grad;
    arma::mat hess;
    CenterResult out;

    for (arma::uword it = 0; it < max_steps; ++it)
    {
        if (!barrier_derivs(p, ci, z, tau, grad, hess))
            throw std::runtime_error("barrier: iterate left the feasible domain");

        arma::vec step;
        bool solved = arma::solve(step, hess, -grad, arma::solve_opts::likely_sympd);
        if (!solved)
        {
            const double ridge = 1e-10 * (1.0 + arma::trace(hess) / hess.n_rows);
            solved = arma::solve(step, hess + ridge * arma::eye(hess.n_rows, hess.n_cols),
                                 -grad);
            if (!solved)
                throw std::runtime_error("barrier: Newton system solve failed");
        }

        const double decrement = -arma::dot(grad, step);
        out.grad_inf = arma::abs(grad).max();
        ++out.iters;

        const Eval ev0 = evaluate(p, ci, z);
        const double f0 = barrier_value(ev0, tau, z[p.lay.o_eta()]);
        if (decrement / 2.0 <= 1e-10 * (1.0 + std::abs(f0)))
            break;

        double alpha = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt)
        {
            const arma::vec trial = z + alpha * step;
            const Eval ev = evaluate(p, ci, trial);
            const double f = barrier_value(ev, tau, trial[p.lay.o_eta()]);
            if (f <= f0 - 0.01 * alpha * decrement)
            {
                z = trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted)
            break; // line search stalled at numerical precision
    }

    if (barrier_derivs(p, ci, z, tau, grad, hess))
        out.grad_inf = arma::abs(grad).max();
    return out;
}

// Nudges the slack variables of a (possibly boundary-tight) feasible point
// strictly inside. The x part is only scaled when the power ball is tight.
void make_strict_interior(const NormProb& p, const ConstraintIdx& ci, arma::vec& z)
{
    const Layout& L = p.lay;
    const double rel = 1e-6;

    // Power ball first: everything downstream depends on x.
    {
        const double power = arma::dot(z.subvec(0, L.nx() - 1), z.subvec(0, L.nx() - 1));
        if (power > p.p_t * (1.0 - rel))
            z.subvec(0, L.nx() - 1) *= std::sqrt(p.p_t * (1.0 - 2.0 * rel) / power);
    }

    Eval ev = evaluate(p, ci, z);

    for (arma::uword q = 0; q < p.qos.size(); ++q)
        if (ev.g[ci.d0 + q] >= 0.0)
            throw infeasible_error("subproblem: QoS cone violated at the expansion point");

    // b~ >= 1 + interference, strictly.
    for (arma::uword k = 0; k < L.k; ++k)
    {
        double& b = z[L.o_b() + k];
        b = std::max(b, (1.0 + ev.interf[k]) * (1.0 + rel));
    }
    // t covers the squared power, strictly.
    {
        const double pw = p.eps * ev.power + p.p_c;
        double& t = z[L.o_t()];
        t = std::max(t, pw * pw * (1.0 + rel) * (1.0 + rel));
    }
    // v: below 1 + gamma headroom expressed through gA, above the gJ floor.
    for (arma::uword k = 0; k < L.k; ++k)
    {
        double& v = z[L.o_v() + k];
        const double re = ev.s_mat(k, k).real();
        const double cap = (re - p.fa_a_c0[k] - p.fa_a_cb[k] * z[L.o_b() + k]) / p.fa_a_cv[k];
        v = std::min(v, cap - rel * (1.0 + std::abs(cap)));
        if (!(v > 1.0))
            throw infeasible_error("subproblem: degenerate user with vanishing SINR");
    }
    // a under log2(v), strictly.
    for (arma::uword k = 0; k < L.k; ++k)
    {
        double& a = z[L.o_a() + k];
        const double cap = std::log2(z[L.o_v() + k]);
        a = std::min(a, cap - rel * (1.0 + std::abs(cap)));
    }
    // eta last: gB is increasing in eta.
    {
        const double sum_a = arma::sum(z.subvec(L.o_a(), L.o_a() + L.k - 1));
        const double slack = rel * (1.0 + std::abs(sum_a));
        double& eta = z[L.o_eta()];
        const double cap = (sum_a - slack - p.fa_b_c0 - p.fa_b_ct * z[L.o_t()]) / p.fa_b_ceta;
        eta = std::min(eta, cap);
        if (!(eta > 0.0))
            throw infeasible_error("subproblem: nonpositive EE surrogate at the expansion point");
    }

    ev = evaluate(p, ci, z);
    if (!ev.in_domain || ev.g.max() >= 0.0)
        throw infeasible_error("subproblem: expansion point is not strictly feasible");
}

NormProb build_problem(const ConvexSubproblem& sub)
{
    if (sub.combined.n_cols == 0 || sub.combined.n_rows == 0)
        throw std::invalid_argument("subproblem: empty channel matrix");
    if (!(sub.sigma2 > 0.0) || !(sub.p_t > 0.0))
        throw std::invalid_argument("subproblem: sigma2 and p_t must be positive");
    const ScaState& e = sub.expansion;
    const arma::uword k_count = sub.combined.n_cols;
    if (e.a.n_elem != k_count || e.v.n_elem != k_count || e.b.n_elem != k_count)
        throw std::invalid_argument("subproblem: expansion state size mismatch");
    if (!(e.eta > 0.0) || !(e.t > 0.0))
        throw std::domain_error("subproblem: eta/t expansion must be strictly positive");

    NormProb p;
    p.lay = Layout{sub.combined.n_rows, k_count};
    const double sigma = std::sqrt(sub.sigma2);
    p.hn = sub.combined / sigma;
    p.p_t = sub.p_t;
    p.eps = sub.epsilon;
    p.p_c = sub.p_c;
    p.rho = sub.rho;

    p.r.set_size(2 * p.lay.m, k_count);
    p.s.set_size(2 * p.lay.m, k_count);
    for (arma::uword k = 0; k < k_count; ++k)
    {
        p.r.col(k).head(p.lay.m) = arma::real(p.hn.col(k));
        p.r.col(k).tail(p.lay.m) = arma::imag(p.hn.col(k));
        p.s.col(k).head(p.lay.m) = -arma::imag(p.hn.col(k));
        p.s.col(k).tail(p.lay.m) = arma::real(p.hn.col(k));
        if (p.rho[k] > 0.0)
            p.qos.push_back(k);
    }

    // Linearized sqrt constraints: coefficients of the affine overestimators.
    p.fa_a_c0.set_size(k_count);
    p.fa_a_cv.set_size(k_count);
    p.fa_a_cb.set_size(k_count);
    for (arma::uword k = 0; k < k_count; ++k)
    {
        const double v0 = e.v[k] - 1.0;
        const double b0 = e.b[k] / sub.sigma2;
        if (!(v0 > 0.0) || !(b0 > 0.0))
            throw std::domain_error("subproblem: v/b expansion outside the sqrt domain");
        p.fa_a_cv[k] = 0.5 * std::sqrt(b0 / v0);
        p.fa_a_cb[k] = 0.5 * std::sqrt(v0 / b0);
        // sqrt((v-1) b) expands around (v0+1, b0); fold the shift into c0.
        p.fa_a_c0[k] = std::sqrt(v0 * b0) - p.fa_a_cv[k] * (v0 + 1.0) - p.fa_a_cb[k] * b0;
    }
    p.fa_b_ceta = 0.5 * std::sqrt(e.t / e.eta);
    p.fa_b_ct = 0.5 * std::sqrt(e.eta / e.t);
    p.fa_b_c0 = std::sqrt(e.eta * e.t) - p.fa_b_ceta * e.eta - p.fa_b_ct * e.t;

    return p;
}

} // namespace

SubproblemResult solve_subproblem(const ConvexSubproblem& sub, const TransmitOpts& opts)
{
    NormProb p = build_problem(sub);
    const Layout& L = p.lay;
    const ConstraintIdx ci(L.k, p.qos.size());

    if (sub.w_start.w.n_rows != L.m || sub.w_start.w.n_cols != L.k)
        throw std::invalid_argument("subproblem: w_start dimension mismatch");

    arma::vec z(L.nz(), arma::fill::zeros);
    pack_w(p, sub.w_start.w, z);
    z[L.o_eta()] = sub.expansion.eta;
    z[L.o_t()] = sub.expansion.t;
    z.subvec(L.o_a(), L.o_a() + L.k - 1) = sub.expansion.a;
    z.subvec(L.o_v(), L.o_v() + L.k - 1) = sub.expansion.v;
    z.subvec(L.o_b(), L.o_b() + L.k - 1) = sub.expansion.b / sub.sigma2;

    {
        const Eval ev = evaluate(p, ci, z);
        if (!ev.in_domain)
            throw infeasible_error("subproblem: expansion point outside function domains");
    }
    // Tight-but-feasible expansions get nudged strictly inside; genuine
    // violations surface as infeasible_error from the nudge pass.
    make_strict_interior(p, ci, z);

    double tau = opts.tau0;
    arma::uword total_newton = 0;
    double kkt = std::numeric_limits<double>::infinity();
    for (int round = 0; round < 48; ++round)
    {
        const arma::uword budget =
            std::min<arma::uword>(60, opts.newton_max - std::min(opts.newton_max, total_newton));
        if (budget == 0)
            break;
        const CenterResult c = newton_center(p, ci, tau, z, budget);
        total_newton += c.iters;
        kkt = c.grad_inf / tau;

        const double gap = static_cast<double>(ci.count) / tau;
        if (gap <= opts.gap_tol * (1.0 + std::abs(z[L.o_eta()])) && kkt <= opts.kkt_tol)
            break;
        tau *= opts.mu;
    }

    SubproblemResult out;
    out.w.w = unpack_w(p, z);
    out.state.eta = z[L.o_eta()];
    out.state.t = z[L.o_t()];
    out.state.a = z.subvec(L.o_a(), L.o_a() + L.k - 1);
    out.state.v = z.subvec(L.o_v(), L.o_v() + L.k - 1);
    out.state.b = z.subvec(L.o_b(), L.o_b() + L.k - 1) * sub.sigma2;
    out.kkt_residual = kkt;
    out.newton_iters = total_newton;
    return out;
}

namespace {

// Minimum-power solve of gamma_k(p) >= target_k for fixed beam directions.
// Returns false when the interference-coupling system has no nonnegative
// solution (matched beams of correlated users typically fail here).
bool qos_power_control(const arma::cx_mat& combined, const arma::cx_mat& dirs,
                       const arma::vec& target, double sigma2, arma::vec& powers)
{
    const arma::uword k_count = combined.n_cols;
    arma::mat c(k_count, k_count);
    for (arma::uword k = 0; k < k_count; ++k)
        for (arma::uword i = 0; i < k_count; ++i)
            c(k, i) = std::norm(arma::cdot(combined.col(k), dirs.col(i)));
    if (!(c.diag().min() > 0.0))
        return false;

    arma::mat sys(k_count, k_count, arma::fill::eye);
    arma::vec rhs(k_count);
    for (arma::uword k = 0; k < k_count; ++k)
    {
        rhs[k] = target[k] * sigma2 / c(k, k);
        for (arma::uword i = 0; i < k_count; ++i)
            if (i != k)
                sys(k, i) = -target[k] * c(k, i) / c(k, k);
    }

    arma::vec p;
    if (!arma::solve(p, sys, rhs) || !p.is_finite() || p.min() < 0.0)
        return false;
    powers = p;
    return true;
}

} // namespace

BeamMatrix matched_init(const arma::cx_mat& combined, const Scenario& scenario)
{
    const arma::uword m_count = combined.n_rows;
    const arma::uword k_count = combined.n_cols;
    const double interior = 1.0 - 1e-6;

    arma::cx_mat matched(m_count, k_count);
    for (arma::uword k = 0; k < k_count; ++k)
    {
        const double nrm = arma::norm(combined.col(k), 2);
        if (!(nrm > 0.0))
            throw infeasible_error("matched_init: user with zero combined channel");
        matched.col(k) = combined.col(k) / nrm;
    }

    arma::vec rho(k_count);
    bool any_rho = false;
    for (arma::uword k = 0; k < k_count; ++k)
    {
        rho[k] = scenario.rho_k(k);
        any_rho = any_rho || rho[k] > 0.0;
    }

    arma::cx_mat dirs = matched;
    arma::vec powers(k_count);
    if (!any_rho)
    {
        powers.fill(interior * scenario.p_t_w / static_cast<double>(k_count));
    }
    else
    {
        // Margined floors; users without a floor still get a sliver of power
        // so downstream surrogates stay in their domains.
        arma::vec target(k_count);
        for (arma::uword k = 0; k < k_count; ++k)
            target[k] = std::max(rho[k] * (1.0 + 1e-6), 1e-6);

        bool solved = qos_power_control(combined, dirs, target, scenario.sigma2_w, powers);
        if (!solved)
        {
            // Matched directions cannot carry the floors (correlated users):
            // fall back to interference-nulling directions.
            arma::cx_mat f;
            const arma::cx_mat gram = combined.t() * combined;
            if (arma::rcond(gram) > 1e-12)
            {
                arma::cx_mat gram_inv;
                if (arma::inv(gram_inv, gram))
                    f = combined * gram_inv;
            }
            if (f.n_elem == 0)
                throw infeasible_error(
                    "matched_init: QoS floors unattainable (rank-deficient channels)");
            for (arma::uword k = 0; k < k_count; ++k)
            {
                const double nrm = arma::norm(f.col(k), 2);
                if (!(nrm > 0.0))
                    throw infeasible_error("matched_init: degenerate nulling direction");
                dirs.col(k) = f.col(k) / nrm;
            }
            solved = qos_power_control(combined, dirs, target, scenario.sigma2_w, powers);
        }
        if (!solved)
            throw infeasible_error("matched_init: QoS power control has no nonnegative solution");
        if (arma::sum(powers) > interior * scenario.p_t_w)
            throw infeasible_error("matched_init: QoS floors unattainable under the power budget");
        powers *= interior * scenario.p_t_w / arma::sum(powers);
    }

    BeamMatrix w;
    w.w.set_size(m_count, k_count);
    for (arma::uword k = 0; k < k_count; ++k)
        w.w.col(k) = std::sqrt(powers[k]) * dirs.col(k);
    w = rotate_to_real(combined, w);

    // Scaling onto the power ball keeps every SINR nondecreasing, so the
    // verification below only fails for ill-conditioned systems.
    const arma::vec gammas = sinr(combined, w, scenario.sigma2_w);
    for (arma::uword k = 0; k < k_count; ++k)
        if (gammas[k] < rho[k])
            throw infeasible_error("matched_init: QoS verification failed after power control");

    return w;
}

namespace {

struct Measured {
    double ee_per_hz = 0.0;
    double rate_per_hz = 0.0;
    double power_w = 0.0;
    double margin = 0.0;
    arma::vec gammas;
};

Measured measure(const arma::cx_mat& combined, const BeamMatrix& w, const Scenario& scenario,
                 double p_c)
{
    Measured m;
    m.gammas = sinr(combined, w, scenario.sigma2_w);
    m.rate_per_hz = sum_rate(m.gammas, 1.0);
    m.power_w = scenario.epsilon * w.total_tx_power() + p_c;
    m.ee_per_hz = m.rate_per_hz / m.power_w;
    m.margin = arma::datum::inf;
    for (arma::uword k = 0; k < m.gammas.n_elem; ++k)
        m.margin = std::min(m.margin, m.gammas[k] - scenario.rho_k(k));
    return m;
}

// Builds a strictly interior SCA state at the measured start point; interf_w
// holds the physical per-user interference powers.
ScaState initial_state(const Measured& m, const arma::vec& interf_w, const Scenario& scenario)
{
    const double rel = 1e-6;
    const arma::uword k_count = m.gammas.n_elem;
    ScaState st;
    st.a.set_size(k_count);
    st.v.set_size(k_count);
    st.b.set_size(k_count);
    for (arma::uword k = 0; k < k_count; ++k)
    {
        const double gamma = m.gammas[k];
        if (!(gamma > 0.0))
            throw infeasible_error("sca_loop: user with zero SINR at the start point");
        st.v[k] = 1.0 + gamma * (1.0 - 2.0 * rel);
        st.b[k] = (scenario.sigma2_w + interf_w[k]) * (1.0 + rel);
        st.a[k] = std::log2(st.v[k]) * (1.0 - rel) - 1e-12;
    }
    const double sum_a = arma::sum(st.a);
    st.t = std::pow(m.power_w * (1.0 + rel), 2);
    const double num = sum_a * (1.0 - rel);
    st.eta = (num * num) / st.t;
    return st;
}

} // namespace

std::pair<BeamMatrix, RunTrace> sca_loop(const arma::cx_mat& combined, const BeamMatrix& w_init,
                                         const Scenario& scenario, arma::uword n_chains,
                                         const TransmitOpts& opts)
{
    const arma::uword k_count = combined.n_cols;
    const double p_c = static_cast<double>(n_chains) * scenario.p_rf_w +
                       static_cast<double>(scenario.l_irs) *
                           static_cast<double>(scenario.n_elements) * scenario.p_n_w +
                       scenario.p_cir_w;

    BeamMatrix w = rotate_to_real(combined, w_init);
    Measured meas = measure(combined, w, scenario, p_c);
    if (meas.margin < 0.0)
        throw infeasible_error("sca_loop: start point violates the QoS floors");

    arma::vec interf(k_count, arma::fill::zeros);
    {
        const arma::cx_mat inner = combined.t() * w.w;
        for (arma::uword k = 0; k < k_count; ++k)
            for (arma::uword i = 0; i < k_count; ++i)
                if (i != k)
                    interf[k] += std::norm(inner(k, i));
    }
    ScaState state = initial_state(meas, interf, scenario);

    arma::vec rho(k_count);
    for (arma::uword k = 0; k < k_count; ++k)
        rho[k] = scenario.rho_k(k);

    RunTrace trace;
    auto record = [&](arma::uword iter, double kkt, arma::uword inner) {
        TraceRecord rec;
        rec.iteration = iter;
        rec.ee_per_hz = meas.ee_per_hz;
        rec.sum_rate_per_hz = meas.rate_per_hz;
        rec.total_power_w = meas.power_w;
        rec.min_sinr_margin = meas.margin;
        rec.eta = state.eta;
        rec.kkt_residual = kkt;
        rec.inner_iterations = inner;
        trace.append(rec);
    };
    record(0, 0.0, 0);

    BeamMatrix best_w = w;
    double best_ee = meas.ee_per_hz;
    double prev_eta = state.eta;

    for (arma::uword m = 1; m <= opts.max_iter; ++m)
    {
        ConvexSubproblem sub;
        sub.combined = combined;
        sub.p_t = scenario.p_t_w;
        sub.sigma2 = scenario.sigma2_w;
        sub.epsilon = scenario.epsilon;
        sub.p_c = p_c;
        sub.rho = rho;
        sub.expansion = state;
        sub.w_start = w;

        SubproblemResult res = solve_subproblem(sub, opts);
        w = rotate_to_real(combined, res.w);
        state = res.state;
        meas = measure(combined, w, scenario, p_c);
        record(m, res.kkt_residual, res.newton_iters);

        if (meas.ee_per_hz > best_ee)
        {
            best_ee = meas.ee_per_hz;
            best_w = w;
        }

        const double rel = (state.eta - prev_eta) / std::max(prev_eta, 1e-300);
        prev_eta = state.eta;
        if (rel < opts.tol)
            break;
    }

    trace.feasible = meas.margin >= 0.0;
    return {best_w, std::move(trace)};
}

std::vector<arma::uword> antenna_select(const BeamMatrix& w_full, arma::uword n_rf)
{
    const arma::uword m_count = w_full.w.n_rows;
    if (n_rf > m_count)
        throw std::invalid_argument("antenna_select: n_rf exceeds antenna count");

    std::vector<arma::uword> idx(m_count);
    std::iota(idx.begin(), idx.end(), arma::uword(0));
    arma::vec row_power(m_count);
    for (arma::uword m = 0; m < m_count; ++m)
        row_power[m] = std::pow(arma::norm(w_full.w.row(m), 2), 2);

    std::stable_sort(idx.begin(), idx.end(), [&](arma::uword a, arma::uword b) {
        return row_power[a] > row_power[b]; // ties keep the lower index first
    });
    idx.resize(n_rf);
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::pair<BeamMatrix, RunTrace> optimize_transmit(const ChannelSet& channels,
                                                  const PhaseConfig& phases,
                                                  const Scenario& scenario,
                                                  const TransmitOpts& opts,
                                                  const BeamMatrix* w_init)
{
    const arma::cx_mat combined = combined_channels(channels, phases);
    const arma::uword m_count = combined.n_rows;

    // Stage (i): fully digital SCA with all M antennas powered.
    BeamMatrix w0;
    bool warm = false;
    if (w_init != nullptr && w_init->w.n_rows == m_count &&
        w_init->w.n_cols == combined.n_cols)
    {
        BeamMatrix cand = rotate_to_real(combined, *w_init);
        const arma::vec gammas = sinr(combined, cand, scenario.sigma2_w);
        bool ok = cand.total_tx_power() < scenario.p_t_w * (1.0 - 1e-9) &&
                  cand.total_tx_power() > 0.0;
        for (arma::uword k = 0; k < gammas.n_elem && ok; ++k)
            ok = gammas[k] > scenario.rho_k(k) && gammas[k] > 0.0;
        if (ok)
        {
            w0 = cand;
            warm = true;
        }
    }
    if (!warm)
        w0 = matched_init(combined, scenario);

    auto [w_full, trace_full] = sca_loop(combined, w0, scenario, m_count, opts);

    // Stage (ii)+(iii): power-based selection, then a cold re-solve on the
    // reduced channel rows with the actual chain count in the power model.
    const std::vector<arma::uword> sel = antenna_select(w_full, scenario.n_rf);
    const arma::uvec rows(sel);
    const arma::cx_mat reduced = combined.rows(rows);

    BeamMatrix w0r = matched_init(reduced, scenario);
    auto [w_red, trace_red] = sca_loop(reduced, w0r, scenario, scenario.n_rf, opts);

    BeamMatrix w_out = BeamMatrix::zeros(m_count, combined.n_cols);
    for (arma::uword j = 0; j < rows.n_elem; ++j)
        w_out.w.row(rows[j]) = w_red.w.row(j);

    // At full chains both stages solve the same problem; keep the better one.
    if (scenario.n_rf == m_count)
    {
        const PhaseConfig& ph = phases;
        const double ee_full = energy_efficiency(channels, ph, w_full, scenario);
        const double ee_out = energy_efficiency(channels, ph, w_out, scenario);
        if (ee_full > ee_out)
            w_out = w_full;
    }

    RunTrace trace = std::move(trace_full);
    const arma::uword offset = trace.empty() ? 0 : trace.back().iteration + 1;
    for (const TraceRecord& rec : trace_red.records)
    {
        TraceRecord shifted = rec;
        shifted.iteration += offset;
        trace.append(shifted);
    }
    trace.feasible = trace_red.feasible;
    trace.note = "restricted stage starts at iteration " + std::to_string(offset);
    return {std::move(w_out), std::move(trace)};
}

} // namespace irslens
