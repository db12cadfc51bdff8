"""Elliptic evolution in the eigenbasis: exact mode solutions and norms.

A function u(x, t) = sum_j m_j(t) Phi_j(x) solves the homogeneous elliptic
evolution d_t^2 u = P u exactly when each amplitude satisfies
m_j'' = lambda_j m_j, i.e. m_j is a combination of e^{+-sqrt(lambda_j) t}.
From data u(., 0) = sum c_j Phi_j and d_t u(., 0) = sum d_j Phi_j,

    m_j(t) = (c_j + d_j/s_j)/2 e^{s_j t} + (c_j - d_j/s_j)/2 e^{-s_j t},

s_j = sqrt(lambda_j).  The forced system d_t^2 u = P u + f gains the
Duhamel convolution int_0^t sinh(s_j (t - tau))/s_j f_j(tau) dtau per
mode, evaluated in closed form when each forcing f_j is an exponential
sum; a forcing rate colliding with +-s_j produces the resonant
t e^{+-s_j t} terms (power-1 terms of the sum algebra).

Rectangle norms combine exact time integrals of amplitude products with
window Gram matrices in x, so refining the quadrature only moves the
spatial factor.  The interpolation check samples random data, takes the
three norms of the Hoelder estimate on nested rectangles, and reports the
smallest constant that makes the inequality hold on the sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import ExponentialSum, PrecisionContext
from .specineq import WindowQuadrature, gram_matrix
from .spectral import eval_eigenfunction


@dataclass(frozen=True)
class SpectralData:
    """Coefficient vectors of initial value (c) and initial slope (d)."""

    c: tuple
    d: tuple

    def __post_init__(self):
        if len(self.c) != len(self.d):
            raise ValueError(
                f"value/slope coefficient lengths differ: {len(self.c)} vs {len(self.d)}"
            )
        for v in (*self.c, *self.d):
            if not math.isfinite(float(v)):
                raise ValueError("spectral data must be finite")

    @property
    def n(self):
        return len(self.c)


@dataclass(frozen=True)
class EllipticSolution:
    """Per-mode amplitudes m_j and their time derivatives, with eigenpairs."""

    pairs: tuple
    modes: tuple
    modes_dt: tuple

    @property
    def n(self):
        return len(self.modes)


def _sqrt_lambda(pair, w):
    return w.sqrt(w.mpf(pair.lam))


def solve_homogeneous(data, pairs, ctx):
    """Free evolution from data: m_j as two-term sums with rates +-s_j."""
    if data.n != len(pairs):
        raise ValueError(f"data has {data.n} modes, eigensystem has {len(pairs)}")
    w = ctx.working(30)
    modes = []
    for cj, dj, pair in zip(data.c, data.d, pairs):
        s = _sqrt_lambda(pair, w)
        c, d = w.mpf(cj), w.mpf(dj)
        m = ExponentialSum(ctx, [((c + d / s) / 2, s), ((c - d / s) / 2, -s)])
        modes.append(m)
    return EllipticSolution(
        pairs=tuple(pairs),
        modes=tuple(modes),
        modes_dt=tuple(m.derivative() for m in modes),
    )


def _sinh_convolution_terms(coeff, rate, power, s, ctx):
    # int_0^t sinh(s (t - tau))/s * coeff tau^power e^{rate tau} dtau
    if power != 0:
        raise NotImplementedError(
            "forced modes support plain-exponential forcing terms only"
        )
    w = ctx.working(30)
    c, r = w.mpf(coeff), w.mpf(rate)
    tol = w.mpf(2) ** (-(ctx.bits // 2))
    scale = max(w.mpf(1), abs(r), s)
    if abs(r - s) <= tol * scale:
        # resonant with the growing rate: t e^{st}/(2s) - sinh(st)/(2s^2)
        return [
            (c / (2 * s), s, 1),
            (-c / (4 * s * s), s, 0),
            (c / (4 * s * s), -s, 0),
        ]
    if abs(r + s) <= tol * scale:
        return [
            (-c / (2 * s), -s, 1),
            (c / (4 * s * s), s, 0),
            (-c / (4 * s * s), -s, 0),
        ]
    return [
        (c / (r * r - s * s), r, 0),
        (-c / (2 * s * (r - s)), s, 0),
        (c / (2 * s * (r + s)), -s, 0),
    ]


def solve_duhamel_modes(data, forcing_modes, pairs, ctx):
    """Forced evolution d_t^2 m_j = lambda_j m_j + f_j from data.

    forcing_modes[j] is the full forcing on mode j (for a window control
    h = sum_k g_k(t) Phi_k(x) 1_window, that is sum_k (int_window
    Phi_j Phi_k) g_k, assembled by the caller).
    """
    if len(forcing_modes) != len(pairs):
        raise ValueError(
            f"{len(forcing_modes)} forcing modes for {len(pairs)} eigenpairs"
        )
    free = solve_homogeneous(data, pairs, ctx)
    w = ctx.working(30)
    modes = []
    for m_free, f, pair in zip(free.modes, forcing_modes, pairs):
        s = _sqrt_lambda(pair, w)
        terms = list(m_free.terms)
        for c, r, p in f.terms:
            terms.extend(_sinh_convolution_terms(c, r, p, s, ctx))
        modes.append(ExponentialSum(ctx, terms))
    return EllipticSolution(
        pairs=tuple(pairs),
        modes=tuple(modes),
        modes_dt=tuple(m.derivative() for m in modes),
    )


def solve_duhamel(data, forcing_modes, pairs, t, ctx):
    """State and slope coefficient vectors of the forced evolution at time t."""
    sol = solve_duhamel_modes(data, forcing_modes, pairs, ctx)
    state = [m.evaluate(t) for m in sol.modes]
    slope = [m.evaluate(t) for m in sol.modes_dt]
    return state, slope


def verify_mode_ode(sol, ctx):
    """Max relative coefficient residual of m_j'' - lambda_j m_j over modes."""
    w = ctx.working(30)
    worst = w.mpf(0)
    for m, pair in zip(sol.modes, sol.pairs):
        lam = w.mpf(pair.lam)
        residual = m.derivative().derivative() - m.scaled(lam)
        scale = max((abs(w.mpf(c)) * lam for c, _, _ in m.terms), default=w.mpf(1))
        for c, _, _ in residual.terms:
            worst = max(worst, abs(w.mpf(c)) / scale)
    return ctx.mpf(worst)


def eval_solution(sol, x, t, ctx):
    """u(x, t) = sum_j m_j(t) Phi_j(x)."""
    w = ctx.working(30)
    total = w.mpf(0)
    for m, pair in zip(sol.modes, sol.pairs):
        total += w.mpf(m.evaluate(t)) * w.mpf(eval_eigenfunction(pair, x, ctx))
    return ctx.mpf(total)


def norms_on_rectangle(sol, window, t_interval, ctx, *, nodes=16, grams=None):
    """Squared integrals of u, d_x u, d_t u over window x t_interval.

    Time integrals of amplitude products are exact; the x direction uses
    the shared window quadrature (pass nodes to refine it).  grams may
    carry precomputed (value, derivative) Gram matrices for the window.
    """
    t0, t1 = t_interval
    if not float(t0) < float(t1):
        raise ValueError(f"empty time interval {t_interval}")
    if grams is None:
        quad = WindowQuadrature(window, sol.pairs[-1].lam, ctx, nodes=nodes)
        gv = gram_matrix(sol.pairs, window, ctx, quad=quad)
        gd = gram_matrix(sol.pairs, window, ctx, derivative=True, quad=quad)
    else:
        gv, gd = grams
    w = ctx.working(30)
    n = sol.n
    value_int = {}
    slope_int = {}
    for j in range(n):
        for k in range(j + 1):
            value_int[(j, k)] = w.mpf((sol.modes[j] * sol.modes[k]).integral(t0, t1))
            slope_int[(j, k)] = w.mpf(
                (sol.modes_dt[j] * sol.modes_dt[k]).integral(t0, t1)
            )
    l2 = w.mpf(0)
    dx = w.mpf(0)
    dt = w.mpf(0)
    for j in range(n):
        for k in range(j + 1):
            fac = 1 if j == k else 2
            l2 += fac * value_int[(j, k)] * w.mpf(gv[j][k])
            dx += fac * value_int[(j, k)] * w.mpf(gd[j][k])
            dt += fac * slope_int[(j, k)] * w.mpf(gv[j][k])
    return {"l2": ctx.mpf(l2), "dx": ctx.mpf(dx), "dt": ctx.mpf(dt)}


def _quadratic_form(G, vec, w):
    n = len(vec)
    acc = w.mpf(0)
    for j in range(n):
        for k in range(n):
            acc += w.mpf(vec[j]) * w.mpf(G[j][k]) * w.mpf(vec[k])
    return acc


def draw_spectral_data(pairs, rng):
    """One random datum: independent normals scaled by 1/(1 + lambda_j)."""
    scales = [1.0 / (1.0 + float(p.lam)) for p in pairs]
    c = tuple(float(g) * s for g, s in zip(rng.standard_normal(len(pairs)), scales))
    d = tuple(float(g) * s for g, s in zip(rng.standard_normal(len(pairs)), scales))
    return SpectralData(c=c, d=d)


def interpolation_check(sample_count, pairs, window, horizon, delta_grid, seed, ctx):
    """Empirical Hoelder interpolation across nested rectangles.

    For random data, compare the solution's H^1 norm on the middle third
    of the window over (0, T/4) against
    c * ||u||_{H^1(window x (0,T))}^{1-delta} * (||u0||_{H^1(window)}
    + ||u1||_{L^2(window)})^delta.  For each delta in delta_grid, the
    minimal admissible c over the sample is recorded; returns the
    (delta, c) pair minimizing c together with the per-delta table.  Both
    sides are homogeneous of degree one in the data, so the result is
    scale-free.
    """
    if sample_count < 20:
        raise ValueError(f"need at least 20 samples, got {sample_count}")
    deltas = [float(d) for d in delta_grid]
    if not deltas or any(not 0 < d < 1 for d in deltas):
        raise ValueError("delta grid must be nonempty inside (0, 1)")
    a, b = float(window[0]), float(window[1])
    mid = ((2 * a + b) / 3, (a + 2 * b) / 3)
    T = float(horizon)

    lam_max = pairs[-1].lam
    quad_big = WindowQuadrature(window, lam_max, ctx)
    gv_big = gram_matrix(pairs, window, ctx, quad=quad_big)
    gd_big = gram_matrix(pairs, window, ctx, derivative=True, quad=quad_big)
    quad_mid = WindowQuadrature(mid, lam_max, ctx)
    gv_mid = gram_matrix(pairs, mid, ctx, quad=quad_mid)
    gd_mid = gram_matrix(pairs, mid, ctx, derivative=True, quad=quad_mid)

    w = ctx.working(30)
    rng = np.random.default_rng(seed)
    logs = []
    for _ in range(sample_count):
        data = draw_spectral_data(pairs, rng)
        sol = solve_homogeneous(data, pairs, ctx)
        near = norms_on_rectangle(
            sol, mid, (0, T / 4), ctx, grams=(gv_mid, gd_mid)
        )
        big = norms_on_rectangle(sol, window, (0, T), ctx, grams=(gv_big, gd_big))
        lhs_sq = w.mpf(near["l2"]) + w.mpf(near["dx"]) + w.mpf(near["dt"])
        mid_sq = w.mpf(big["l2"]) + w.mpf(big["dx"]) + w.mpf(big["dt"])
        h1_data = w.sqrt(_quadratic_form(gv_big, data.c, w) + _quadratic_form(gd_big, data.c, w))
        l2_slope = w.sqrt(_quadratic_form(gv_big, data.d, w))
        logs.append(
            (
                float(w.log(lhs_sq)) / 2,
                float(w.log(mid_sq)) / 2,
                float(w.log(h1_data + l2_slope)),
            )
        )

    table = []
    for d in deltas:
        log_c = max(l - (1 - d) * m - d * e for l, m, e in logs)
        table.append((d, math.exp(log_c)))
    best_delta, best_c = min(table, key=lambda row: row[1])
    if not math.isfinite(best_c):
        raise AssertionError("no finite interpolation constant on the sample")
    return {
        "delta": best_delta,
        "c": best_c,
        "max_violation": best_c,
        "table": table,
        "sample_count": sample_count,
        "seed": seed,
    }
