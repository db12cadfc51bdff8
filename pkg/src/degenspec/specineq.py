"""Observability of eigenfunction packets from an interior window.

For the first N eigenfunctions Phi_1..Phi_N and a window (a, b) in (0, 1),
the Gram matrix G_{jk} = int_a^b Phi_j Phi_k dx controls how much of a
packet y = sum_j y_j Phi_j the window sees:

    ||y||_{L^2(a,b)}^2 = y^T G y >= lambda_min(G) ||y||_{L^2(0,1)}^2.

The packet observability constant is C_obs(N) = 1 / lambda_min(G_N).  The
claim under test is its growth law: log C_obs(N) grows like a power of
lambda_N with exponent 1/2, uniformly in the degeneracy strength.

Gram entries do not depend on how many modes are requested, so a sweep
over N computes one Gram at N_max and reads each G_N off as the leading
N x N block; lambda_min then decreases in N by eigenvalue interlacing,
making C_obs(N) nondecreasing, which the sweep asserts.

Everything runs at context precision with a guard: a reported
lambda_min <= 2^{-bits/2} is below what the working width can support
and triggers escalation instead of being returned.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.special import jv as _jv_f64

from .numerics import (
    NotPositiveDefiniteError,
    PrecisionContext,
    SymmetricMatrix,
    escalating,
    gauss_legendre,
    min_eig_spd,
    panel_breakpoints,
)
from .spectral import eigensystem, eval_eigenfunction, eval_eigenfunction_derivative

WINDOW_PANEL_DIVISOR = 8
WINDOW_NODES = 16


class WindowQuadrature:
    """Composite Gauss-Legendre rule on a window, shared across integrands.

    Panel width resolves the fastest oscillation present: at most
    min((b-a)/8, 1/(4 sqrt(lam_max))).  Nodes are fixed once, so tables of
    eigenfunction values can be reused for every Gram entry.
    """

    def __init__(self, window, lam_max, ctx, *, nodes=WINDOW_NODES):
        a, b = window
        w = ctx.working(30)
        am, bm = w.mpf(repr(float(a))), w.mpf(repr(float(b)))
        if not 0 <= am < bm <= 1:
            raise ValueError(f"window must satisfy 0 <= a < b <= 1, got {window}")
        width = (bm - am) / WINDOW_PANEL_DIVISOR
        lam = w.mpf(lam_max)
        if lam > 0:
            width = min(width, 1 / (4 * w.sqrt(lam)))
        pts = panel_breakpoints(am, bm, ctx, panel_width=width)
        gl_x, gl_w = gauss_legendre(nodes, ctx)
        self.ctx = ctx
        self.window = (am, bm)
        self.points = []
        self.weights = []
        for lo, hi in zip(pts[:-1], pts[1:]):
            half = (w.mpf(hi) - w.mpf(lo)) / 2
            mid = (w.mpf(hi) + w.mpf(lo)) / 2
            for xk, wk in zip(gl_x, gl_w):
                self.points.append(mid + half * xk)
                self.weights.append(half * wk)

    def integrate_values(self, values):
        w = self.ctx.working(30)
        acc = w.mpf(0)
        for wk, vk in zip(self.weights, values):
            acc += wk * w.mpf(vk)
        return self.ctx.mpf(acc)


def _value_tables(pairs, quad, ctx, *, derivative=False):
    wide = PrecisionContext(ctx.bits + 30)
    ev = eval_eigenfunction_derivative if derivative else eval_eigenfunction
    return [[ev(p, x, wide) for x in quad.points] for p in pairs]


def gram_matrix(pairs, window, ctx, *, derivative=False, quad=None):
    """G_{jk} = int over the window of Phi_j Phi_k (or Phi_j' Phi_k')."""
    if not pairs:
        raise ValueError("need at least one eigenpair")
    if quad is None:
        quad = WindowQuadrature(window, pairs[-1].lam, ctx)
    tables = _value_tables(pairs, quad, ctx, derivative=derivative)
    w = ctx.working(30)
    n = len(pairs)
    rows = [[None] * n for _ in range(n)]
    for j in range(n):
        for k in range(j + 1):
            acc = w.mpf(0)
            for wk, vj, vk in zip(quad.weights, tables[j], tables[k]):
                acc += wk * w.mpf(vj) * w.mpf(vk)
            rows[j][k] = rows[k][j] = ctx.mpf(acc)
    return SymmetricMatrix(rows)


def eigenfunction_mass(pair, window, ctx):
    """int over the window of Phi_j^2."""
    return gram_matrix([pair], window, ctx)[0][0]


def _lambda_min_guarded(gram, ctx):
    lam_min = min_eig_spd(gram, ctx)
    guard = ctx.mpf(2) ** (-(ctx.bits // 2))
    if lam_min <= guard:
        raise NotPositiveDefiniteError(
            f"window Gram smallest eigenvalue {float(lam_min):.3e} at or below "
            f"the {ctx.bits}-bit trust floor {float(guard):.3e}"
        )
    return lam_min


def observability_constant(pairs, window, ctx, *, gram=None):
    """C_obs = 1 / lambda_min(G) for the given packet, with precision guard."""
    if gram is None:
        gram = gram_matrix(pairs, window, ctx)
    lam_min = _lambda_min_guarded(gram, ctx)
    return {
        "lambda_min": lam_min,
        "c_obs": ctx.mpf(1 / ctx.working(30).mpf(lam_min)),
        "gram": gram,
    }


def observability_sweep(alpha, n_values, window, ctx, *, method="bessel"):
    """C_obs(N) for each N in n_values, from one Gram at max(n_values).

    Escalates precision until every leading block clears the trust floor.
    Returns rows with N, lambda_N, lambda_min, c_obs, plus the per-mode
    window masses and the bit width that succeeded.
    """
    n_values = sorted(set(int(n) for n in n_values))
    if n_values[0] < 1:
        raise ValueError(f"mode counts must be >= 1, got {n_values}")
    n_max = n_values[-1]

    def attempt(c):
        pairs = eigensystem(alpha, n_max, c, method=method)
        gram = gram_matrix(pairs, window, c)
        rows = []
        for n in n_values:
            sub = SymmetricMatrix([row[:n] for row in gram.rows[:n]])
            lam_min = _lambda_min_guarded(sub, c)
            rows.append(
                {
                    "n": n,
                    "lam_n": pairs[n - 1].lam,
                    "lambda_min": lam_min,
                    "c_obs": c.mpf(1 / c.working(30).mpf(lam_min)),
                }
            )
        masses = [gram[j][j] for j in range(n_max)]
        return rows, masses, c.bits

    rows, masses, bits_used = escalating(attempt, ctx)
    for earlier, later in zip(rows, rows[1:]):
        # leading-block interlacing makes C_obs(N) nondecreasing
        if later["c_obs"] < earlier["c_obs"]:
            raise AssertionError(
                f"C_obs decreased from N={earlier['n']} to N={later['n']}"
            )
    return {
        "alpha": float(alpha),
        "window": (float(window[0]), float(window[1])),
        "rows": rows,
        "masses": masses,
        "bits_used": bits_used,
    }


# ---------------------------------------------------------------------------
# growth-law fits
# ---------------------------------------------------------------------------


def fit_observability_scaling(rows, *, p_fixed=None):
    """Fit log C_obs = c0 + C * lambda_N^p over sweep rows.

    With p_fixed the fit is linear least squares in (c0, C); otherwise p is
    chosen by golden-section search on the least-squares residual.  Returns
    floats (the fit is a diagnostic, not a certified quantity).
    """
    lam = [float(r["lam_n"]) for r in rows]
    logc = [math.log(float(r["c_obs"])) for r in rows]
    if len(lam) < 3:
        raise ValueError("need at least three sweep points to fit")

    def sse_at(p):
        feats = [x**p for x in lam]
        c0, cc = _linear_fit(feats, logc)
        err = sum((c0 + cc * f - y) ** 2 for f, y in zip(feats, logc))
        return err, c0, cc

    if p_fixed is not None:
        p = float(p_fixed)
        sse, c0, cc = sse_at(p)
    else:
        p = _golden_min(lambda q: sse_at(q)[0], 0.05, 1.2)
        sse, c0, cc = sse_at(p)
    mean = sum(logc) / len(logc)
    sst = sum((y - mean) ** 2 for y in logc)
    r2 = 1.0 - sse / sst if sst > 0 else 1.0
    return {"p": p, "coefficient": cc, "offset": c0, "r_squared": r2}


def _linear_fit(feats, ys):
    n = len(feats)
    sx = sum(feats)
    sy = sum(ys)
    sxx = sum(f * f for f in feats)
    sxy = sum(f * y for f, y in zip(feats, ys))
    denom = n * sxx - sx * sx
    if denom == 0:
        return sum(ys) / n, 0.0
    cc = (n * sxy - sx * sy) / denom
    c0 = (sy - cc * sx) / n
    return c0, cc


def _golden_min(f, lo, hi, *, tol=1e-6):
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def lr_constant(rows):
    """Smallest C1 with C_obs(N) <= e^{C1 (1 + sqrt(lambda_N))} for all rows."""
    return max(
        math.log(float(r["c_obs"])) / (1.0 + math.sqrt(float(r["lam_n"])))
        for r in rows
    )


def _window_nodes_f64(window, lam_max, nodes):
    # same panel layout as WindowQuadrature, assembled in float64
    a, b = float(window[0]), float(window[1])
    if not 0 <= a < b <= 1:
        raise ValueError(f"window must satisfy 0 <= a < b <= 1, got {window}")
    width = (b - a) / WINDOW_PANEL_DIVISOR
    if lam_max > 0:
        width = min(width, 1 / (4 * math.sqrt(lam_max)))
    count = max(1, math.ceil((b - a) / width))
    edges = a + (b - a) * np.arange(count + 1) / count
    gl_x, gl_w = npleg.leggauss(nodes)
    half = (edges[1:] - edges[:-1])[:, None] / 2
    mid = (edges[1:] + edges[:-1])[:, None] / 2
    return (mid + half * gl_x).ravel(), (half * gl_w).ravel()


def _eval_f64(pair, xs):
    # Phi_j(x) = c_j x^{(1-alpha)/2} J_nu(j_{nu,j} x^kappa), interior x only
    alpha = float(pair.alpha)
    return (
        float(pair.norm_const)
        * xs ** ((1 - alpha) / 2)
        * _jv_f64(float(pair.nu), float(pair.zero) * xs ** float(pair.kappa))
    )


def mass_floor(alphas, window, ctx, *, k_max=20, nodes=WINDOW_NODES):
    """rho_hat = min over the alpha grid and j <= k_max of mass_j / (2 - alpha).

    The window masses int_w Phi_j^2 admit a floor rho (2 - alpha) uniform in
    j; this reports the empirical floor constant.  nodes doubles for the
    quadrature-stability check.  The floor is an order-1 diagnostic with a
    10% stability contract, so the masses are integrated in float64 (the
    window is interior, the integrand smooth); only the eigenpairs come
    from the precision context.
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    per_alpha = []
    rho_hat = None
    for alpha in alphas:
        pairs = eigensystem(alpha, k_max, ctx)
        xs, ws = _window_nodes_f64(window, float(pairs[-1].lam), nodes)
        scale = 2.0 - float(alpha)
        rho = None
        for pair in pairs:
            mass = float(ws @ _eval_f64(pair, xs) ** 2)
            ratio = mass / scale
            rho = ratio if rho is None else min(rho, ratio)
        per_alpha.append({"alpha": float(alpha), "rho": float(rho)})
        rho_hat = rho if rho_hat is None else min(rho_hat, rho)
    return {
        "rho_hat": float(rho_hat),
        "per_alpha": per_alpha,
        "k_max": int(k_max),
        "nodes": int(nodes),
        "window": (float(window[0]), float(window[1])),
    }


def fit_lr_scaling(samples, *, p_cross=0.5):
    """Per-alpha growth fits plus the cross-alpha trend in (2 - alpha)^{-2}.

    samples: triples (lambda_N, alpha, c_obs).  Each alpha group gets the
    free-exponent fit log c_obs = c0 + C lambda_N^p; the cross-alpha
    comparison pins p = p_cross (comparing C across alphas is only
    meaningful at a shared exponent) and fits C against (2 - alpha)^{-2}.
    """
    groups = {}
    for lam_n, alpha, c_obs in samples:
        groups.setdefault(float(alpha), []).append(
            {"lam_n": float(lam_n), "c_obs": float(c_obs)}
        )
    for alpha, rows in groups.items():
        if len(rows) < 5:
            raise ValueError(
                f"need at least five samples per alpha, got {len(rows)} "
                f"at alpha={alpha}"
            )
    per_alpha = []
    for alpha in sorted(groups):
        rows = sorted(groups[alpha], key=lambda r: r["lam_n"])
        free = fit_observability_scaling(rows)
        pinned = fit_observability_scaling(rows, p_fixed=p_cross)
        per_alpha.append(
            {
                "alpha": alpha,
                "p_fit": free["p"],
                "C_fit": free["coefficient"],
                "r_squared": free["r_squared"],
                "C_at_p_cross": pinned["coefficient"],
                "r_squared_at_p_cross": pinned["r_squared"],
            }
        )
    cross = None
    if len(per_alpha) >= 2:
        feats = [(2.0 - rec["alpha"]) ** -2 for rec in per_alpha]
        ys = [rec["C_at_p_cross"] for rec in per_alpha]
        c0, cc = _linear_fit(feats, ys)
        sse = sum((c0 + cc * f - y) ** 2 for f, y in zip(feats, ys))
        mean = sum(ys) / len(ys)
        sst = sum((y - mean) ** 2 for y in ys)
        cross = {
            "slope": cc,
            "intercept": c0,
            "r_squared": 1.0 - sse / sst if sst > 0 else 1.0,
        }
    return {"per_alpha": per_alpha, "cross": cross, "p_cross": p_cross}
