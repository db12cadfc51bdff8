"""Finite moment problem: biorthogonal families and explicit null controls.

For the forced evolution d_t^2 u = P u + h with window control
h = sum_jk g_k(t) (int_w Phi_j Phi_k) Phi_j(x), steering packet data
(u0, u1) = (sum a_j Phi_j, sum b_j Phi_j) to u(T) = d_t u(T) = 0 reduces
to moment conditions on the g_k against the adjoint exponentials
e^{+-sqrt(lambda_j) t}.  The construction:

  * rates mu_n: sqrt(lambda_N) - sqrt(lambda_{N-(n-1)}) for n <= N and
    sqrt(lambda_N) + sqrt(lambda_{n-N}) for N < n <= 2N, so mu_1 = 0 and
    the root gaps sqrt(mu_{n+1}) - sqrt(mu_n) stay above
    r = varsigma / lambda_N^{1/4} with
    varsigma = min(gap_scale/(2 sqrt 2), 2 sqrt(lambda_1)/(1 + sqrt 2)),
    gap_scale the smallest root gap of the lambdas themselves;
  * theta_m: the minimal-L^2(0,T)-norm family biorthogonal to e^{mu_n t},
    i.e. theta_m = sum_k (G^{-1})_{mk} e^{mu_k t} with G the Gram of the
    exponentials, solved at extended precision (the norms
    ||theta_m||^2 = (G^{-1})_{mm} are minimal among all biorthogonal
    families, so any upper bound of the right shape must cover them);
  * sigma_k^0 = theta_{N+k} e^{sqrt(lambda_N) t} and
    sigma_k^1 = theta_{N-(k-1)} e^{sqrt(lambda_N) t}, giving the four
    moment identities against e^{+-sqrt(lambda_j) t};
  * g_k = alpha_k sigma_k^0 + beta_k sigma_k^1 with
    alpha_k = (-b_k + sqrt(lambda_k) a_k)/mass_k,
    beta_k = (-b_k - sqrt(lambda_k) a_k)/mass_k, mass_k the window mass
    of Phi_k.

Everything downstream is exact exponential-sum algebra: the control cost,
the terminal residual through the Duhamel solve, the duality pairing, and
the certified gain K (largest eigenvalue of per-mode 2x2 cost forms).
The abstract constant of the cost-bound shape is fitted empirically
by monotone bisection, never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .elliptic import SpectralData, solve_duhamel_modes, solve_homogeneous
from .numerics import (
    ExponentialSum,
    NotPositiveDefiniteError,
    PrecisionContext,
    PrecisionExhaustedError,
    SymmetricMatrix,
    inv_spd,
    max_eig_sym,
)
from .specineq import gram_matrix

BIORTHO_RESIDUAL_TOL = 1e-8
ZERO_MASS_FLOOR = 1e-14


class ZeroMassError(ValueError):
    """A window mass came out at the noise floor; window and modes clash."""


@dataclass(frozen=True)
class MuSequence:
    """Moment rates mu_1..mu_2N with their gap certificates."""

    values: tuple
    varsigma: object
    r_bound: object
    gap_sqrt: object
    lambdas: tuple

    @property
    def n(self):
        return len(self.values) // 2


def build_mu(lambdas, ctx, *, gamma_hat=None, alpha=None):
    """Moment rates from the first N eigenvalues, invariants enforced.

    gamma_hat (with alpha) optionally supplies the externally measured
    uniform root-gap constant; by default the gap scale is read off the
    lambdas themselves, which gives the same varsigma.
    """
    if not lambdas:
        raise ValueError("need at least one eigenvalue")
    w = ctx.working(30)
    lams = [w.mpf(l) for l in lambdas]
    if any(l <= 0 for l in lams):
        raise ValueError("eigenvalues must be positive")
    if any(b <= a for a, b in zip(lams, lams[1:])):
        raise ValueError("eigenvalues must be strictly increasing")
    sq = [w.sqrt(l) for l in lams]
    n = len(sq)
    mu = [sq[-1] - sq[n - 1 - k] for k in range(n)]
    mu += [sq[-1] + sq[k] for k in range(n)]
    if gamma_hat is not None:
        if alpha is None:
            raise ValueError("gamma_hat needs the matching alpha")
        gap_scale = w.mpf(gamma_hat) * (2 - w.mpf(alpha))
    elif n >= 2:
        gap_scale = min(b - a for a, b in zip(sq, sq[1:]))
    else:
        gap_scale = w.inf
    varsigma = min(gap_scale / (2 * w.sqrt(2)), 2 * sq[0] / (1 + w.sqrt(2)))
    quarter_root = w.sqrt(sq[-1])
    r_bound = varsigma / quarter_root
    sqmu = [w.sqrt(m) for m in mu]
    if mu[0] != 0:
        raise ValueError("mu_1 must vanish identically")
    if any(m < 0 for m in mu) or any(b <= a for a, b in zip(sqmu, sqmu[1:])):
        raise ValueError(
            "mu roots not strictly increasing: upstream eigenvalue error"
        )
    gap_sqrt = min(b - a for a, b in zip(sqmu, sqmu[1:]))
    slack = w.mpf("1e-12")
    if gap_sqrt < r_bound - slack * max(w.mpf(1), r_bound):
        raise ValueError(
            f"root gap {float(gap_sqrt):.6g} below certified bound "
            f"{float(r_bound):.6g}: upstream eigenvalue error"
        )
    cap = w.sqrt(2) * quarter_root
    if max(sqmu) > cap * (1 + slack):
        raise ValueError("mu exceeds the 2 sqrt(lambda_N) cap")
    return MuSequence(
        values=tuple(ctx.mpf(m) for m in mu),
        varsigma=ctx.mpf(varsigma),
        r_bound=ctx.mpf(r_bound),
        gap_sqrt=ctx.mpf(gap_sqrt),
        lambdas=tuple(ctx.mpf(l) for l in lams),
    )


def exponential_gram(mu, horizon, ctx):
    """G_{nk} = int_0^T e^{(mu_n + mu_k) t} dt in closed form."""
    w = ctx.working(30)
    T = w.mpf(horizon)
    if T <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    vals = [w.mpf(m) for m in mu.values]
    n = len(vals)
    rows = [[None] * n for _ in range(n)]
    for i in range(n):
        for k in range(i + 1):
            rate = vals[i] + vals[k]
            entry = T if rate == 0 else w.expm1(rate * T) / rate
            rows[i][k] = rows[k][i] = ctx.mpf(entry)
    return SymmetricMatrix(rows)


@dataclass(frozen=True)
class BiorthogonalFamily:
    """theta_m(t) = sum_k C_{mk} e^{mu_k t}, biorthogonal to e^{mu_n t}."""

    coefficients: tuple
    horizon: object
    norms_sq: tuple
    residual: object
    mu: MuSequence
    theta: tuple
    ctx: PrecisionContext


def biorthogonal_family(mu, horizon, ctx):
    """Minimal-norm biorthogonal family via the exponential Gram inverse.

    Retries once at doubled precision if the Gram loses definiteness or
    the verified residual misses the 1e-8 contract.
    """
    last = None
    for attempt_ctx in (ctx, ctx.widened()):
        try:
            fam = _family_at(mu, horizon, attempt_ctx)
        except NotPositiveDefiniteError as exc:
            last = f"{exc}"
            continue
        if float(fam.residual) <= BIORTHO_RESIDUAL_TOL:
            return fam
        last = f"residual {float(fam.residual):.3e}"
    raise PrecisionExhaustedError(
        f"precision exhausted for (N={mu.n}, T={float(horizon)}): {last}"
    )


def _family_at(mu, horizon, ctx):
    gram = exponential_gram(mu, horizon, ctx)
    inverse = inv_spd(gram, ctx)
    w = ctx.working(30)
    n = len(mu.values)
    theta = tuple(
        ExponentialSum(ctx, [(inverse[m][k], mu.values[k]) for k in range(n)])
        for m in range(n)
    )
    residual = w.mpf(0)
    for m in range(n):
        for i in range(n):
            probe = theta[m] * ExponentialSum.exponential(ctx, 1, mu.values[i])
            got = w.mpf(probe.integral(0, horizon))
            residual = max(residual, abs(got - (1 if m == i else 0)))
    return BiorthogonalFamily(
        coefficients=tuple(tuple(ctx.mpf(v) for v in row) for row in inverse),
        horizon=ctx.mpf(horizon),
        norms_sq=tuple(ctx.mpf(inverse[m][m]) for m in range(n)),
        residual=ctx.mpf(residual),
        mu=mu,
        theta=theta,
        ctx=ctx,
    )


def sigma_functions(fam, sqrt_lambda_n):
    """sigma_k^0 = theta_{N+k} e^{st}, sigma_k^1 = theta_{N-(k-1)} e^{st}."""
    ctx = fam.ctx
    w = ctx.working(30)
    s = w.mpf(sqrt_lambda_n)
    n = fam.mu.n

    def lifted(row):
        return ExponentialSum(
            ctx,
            [(c, w.mpf(r) + s) for c, r, _ in fam.theta[row].terms],
        )

    sigma0 = [lifted(n + k) for k in range(n)]
    sigma1 = [lifted(n - 1 - k) for k in range(n)]
    return sigma0, sigma1


def check_moment_identities(sigma0, sigma1, lambdas, horizon, ctx):
    """Max deviation across the four families of moment conditions."""
    w = ctx.working(30)
    worst = w.mpf(0)
    for j, lam in enumerate(lambdas):
        s = w.sqrt(w.mpf(lam))
        down = ExponentialSum.exponential(ctx, 1, -s)
        up = ExponentialSum.exponential(ctx, 1, s)
        for k in range(len(sigma0)):
            d = (sigma0[k] * down).integral(0, horizon)
            worst = max(worst, abs(w.mpf(d)))
            d = (sigma1[k] * down).integral(0, horizon) - (1 if j == k else 0)
            worst = max(worst, abs(w.mpf(d)))
            d = (sigma0[k] * up).integral(0, horizon) - (1 if j == k else 0)
            worst = max(worst, abs(w.mpf(d)))
            d = (sigma1[k] * up).integral(0, horizon)
            worst = max(worst, abs(w.mpf(d)))
    return ctx.mpf(worst)


@dataclass(frozen=True)
class ControlSynthesis:
    """The explicit window control and everything needed to audit it."""

    coeff_plus: tuple
    coeff_minus: tuple
    sigma0: tuple
    sigma1: tuple
    g_modes: tuple
    cost: object
    masses: tuple
    mu: MuSequence
    family: BiorthogonalFamily
    horizon: object
    window: tuple
    gram_window: SymmetricMatrix
    data: SpectralData
    ctx: PrecisionContext


def synthesize_control(data, pairs, window, horizon, ctx, *, gamma_hat=None):
    """Assemble g_k = alpha_k sigma_k^0 + beta_k sigma_k^1 with exact cost.

    gamma_hat optionally threads the externally measured uniform root-gap
    constant into varsigma (alpha is read off the eigenpairs).
    """
    if data.n != len(pairs):
        raise ValueError(f"data has {data.n} modes, eigensystem has {len(pairs)}")
    gram = gram_matrix(pairs, window, ctx)
    masses = tuple(gram[j][j] for j in range(len(pairs)))
    if any(float(m) <= ZERO_MASS_FLOOR for m in masses):
        raise ZeroMassError(
            f"window mass at the {ZERO_MASS_FLOOR} floor for window {window}"
        )
    mu = build_mu(
        [p.lam for p in pairs],
        ctx,
        gamma_hat=gamma_hat,
        alpha=pairs[0].alpha if gamma_hat is not None else None,
    )
    fam = biorthogonal_family(mu, horizon, ctx)
    eff = fam.ctx  # may be wider than ctx after escalation
    w = eff.working(30)
    sqrt_lam_n = w.sqrt(w.mpf(pairs[-1].lam))
    sigma0, sigma1 = sigma_functions(fam, sqrt_lam_n)
    alphas, betas, g_modes = [], [], []
    cost = w.mpf(0)
    for k, pair in enumerate(pairs):
        s = w.sqrt(w.mpf(pair.lam))
        a, b, m = w.mpf(data.c[k]), w.mpf(data.d[k]), w.mpf(masses[k])
        alpha_k = (-b + s * a) / m
        beta_k = (-b - s * a) / m
        g_k = sigma0[k].scaled(alpha_k) + sigma1[k].scaled(beta_k)
        alphas.append(eff.mpf(alpha_k))
        betas.append(eff.mpf(beta_k))
        g_modes.append(g_k)
        cost += w.mpf((g_k * g_k).integral(0, horizon))
    return ControlSynthesis(
        coeff_plus=tuple(alphas),
        coeff_minus=tuple(betas),
        sigma0=tuple(sigma0),
        sigma1=tuple(sigma1),
        g_modes=tuple(g_modes),
        cost=eff.mpf(cost),
        masses=masses,
        mu=mu,
        family=fam,
        horizon=eff.mpf(horizon),
        window=(float(window[0]), float(window[1])),
        gram_window=gram,
        data=data,
        ctx=eff,
    )


def verify_null_control(data, synthesis, pairs, window, horizon, ctx):
    """Drive the forced evolution by the synthesized control to time T.

    Returns the terminal state/slope norms, their size relative to the
    data norm, and per-mode terminal values.
    """
    if data.n != synthesis.data.n:
        raise ValueError("data does not match the synthesized control")
    if (float(window[0]), float(window[1])) != synthesis.window:
        raise ValueError(
            f"window {window} does not match synthesis window {synthesis.window}"
        )
    eff = synthesis.ctx
    w = eff.working(30)
    gram = synthesis.gram_window
    n = len(pairs)
    forcings = []
    for j in range(n):
        f = ExponentialSum.zero(eff)
        for k in range(n):
            f = f + synthesis.g_modes[k].scaled(w.mpf(gram[j][k]))
        forcings.append(f)
    sol = solve_duhamel_modes(data, forcings, pairs, eff)
    T = w.mpf(horizon)
    state = [w.mpf(m.evaluate(T)) for m in sol.modes]
    slope = [w.mpf(m.evaluate(T)) for m in sol.modes_dt]
    state_norm = w.sqrt(sum(v * v for v in state))
    slope_norm = w.sqrt(sum(v * v for v in slope))
    data_norm = w.sqrt(
        sum(w.mpf(v) ** 2 for v in data.c) + sum(w.mpf(v) ** 2 for v in data.d)
    )
    rel = (
        eff.mpf(0)
        if data_norm == 0
        else eff.mpf(max(state_norm, slope_norm) / data_norm)
    )
    return {
        "terminal_state_norm": eff.mpf(state_norm),
        "terminal_slope_norm": eff.mpf(slope_norm),
        "relative": rel,
        "per_mode_state": [eff.mpf(v) for v in state],
        "per_mode_slope": [eff.mpf(v) for v in slope],
    }


def check_duality(phi_data, synthesis, pairs, ctx):
    """Both sides of the transposition identity for adjoint data phi_data.

    LHS: -int u1 phi(., T) - int u0 d_t phi(., T) in coefficients;
    RHS: sum_jk (int_w Phi_k Phi_j) int_0^T g_k(t) phi_j(T - t) dt.
    """
    eff = synthesis.ctx
    w = eff.working(30)
    T = w.mpf(synthesis.horizon)
    phi = solve_homogeneous(phi_data, pairs, eff)
    lhs = w.mpf(0)
    for b_j, a_j, m, mdt in zip(
        synthesis.data.d, synthesis.data.c, phi.modes, phi.modes_dt
    ):
        lhs += -w.mpf(b_j) * w.mpf(m.evaluate(T)) - w.mpf(a_j) * w.mpf(
            mdt.evaluate(T)
        )
    rhs = w.mpf(0)
    gram = synthesis.gram_window
    for k in range(len(pairs)):
        for j in range(len(pairs)):
            pairing = (
                synthesis.g_modes[k] * phi.modes[j].time_reversed(T)
            ).integral(0, T)
            rhs += w.mpf(gram[k][j]) * w.mpf(pairing)
    diff = abs(lhs - rhs)
    scale = max(w.mpf(1), abs(lhs), abs(rhs))
    return {
        "lhs": eff.mpf(lhs),
        "rhs": eff.mpf(rhs),
        "diff": eff.mpf(diff),
        "relative": eff.mpf(diff / scale),
    }


def eval_B(horizon, r, c, ctx=None):
    """The kernel-bound shape B(T, r): (1/T + 1/(T^2 r^2)) e^{c/(T r^2)}
    for T <= 1/r^2, and c r^2 for T >= 1/r^2 (the branch taken at equality)."""
    w = (ctx or PrecisionContext(64)).working(30)
    T, rm, cm = w.mpf(horizon), w.mpf(r), w.mpf(c)
    if T <= 0 or rm <= 0 or cm <= 0:
        raise ValueError("eval_B needs positive T, r, c")
    if T >= 1 / rm**2:
        return cm * rm**2
    return (1 / T + 1 / (T**2 * rm**2)) * w.exp(cm / (T * rm**2))


def cost_vs_bound(synthesis, mu, pairs, window, horizon, c_universal, ctx):
    """Exact cost against the bound shape at a given universal constant.

    bound = 8 (1 + lambda_N) / (inf_j mass_j)^2 * c e^{2 sqrt(lambda_N) T}
            e^{c sqrt(2) sqrt(lambda_N) / varsigma} B(T, varsigma
            lambda_N^{-1/4}) * sum_j (a_j^2 + b_j^2).

    Also audits every ||theta_m||^2 against c e^{-2 mu_m T} e^{c sqrt(mu_m)/r}
    B(T, r), and reports the smallest constant for which both families of
    inequalities hold (monotone bisection; the bound increases in c).
    """
    w = ctx.working(30)
    record = {
        "cost": float(synthesis.cost),
        "lam_n": float(pairs[-1].lam),
        "inf_mass": min(float(m) for m in synthesis.masses),
        "varsigma": float(mu.varsigma),
        "r": float(mu.r_bound),
        "sum_data_sq": float(
            sum(w.mpf(v) ** 2 for v in synthesis.data.c)
            + sum(w.mpf(v) ** 2 for v in synthesis.data.d)
        ),
        "horizon": float(horizon),
        "mu_values": [float(m) for m in mu.values],
        "theta_norms_sq": [float(v) for v in synthesis.family.norms_sq],
    }
    bound = _cost_bound_at(record, c_universal, ctx)
    ratio = w.mpf(0) if bound == 0 else w.mpf(synthesis.cost) / bound
    theta_ok, theta_max = _theta_bounds_at(record, c_universal, ctx)
    return {
        "cost": synthesis.cost,
        "bound": ctx.mpf(bound),
        "ratio": ctx.mpf(ratio),
        "theta_bounds_hold": theta_ok,
        "theta_max_ratio": ctx.mpf(theta_max),
        "c_min": fit_universal_constant([record], ctx),
        "record": record,
    }


def _cost_bound_at(record, c, ctx):
    w = ctx.working(30)
    lam = w.mpf(record["lam_n"])
    cm = w.mpf(c)
    varsigma = w.mpf(record["varsigma"])
    T = w.mpf(record["horizon"])
    r = varsigma / lam ** w.mpf("0.25")
    return (
        8
        * (1 + lam)
        / w.mpf(record["inf_mass"]) ** 2
        * cm
        * w.exp(2 * w.sqrt(lam) * T)
        * w.exp(cm * w.sqrt(2) * w.sqrt(lam) / varsigma)
        * eval_B(T, r, cm, ctx)
        * w.mpf(record["sum_data_sq"])
    )


def _theta_bounds_at(record, c, ctx):
    w = ctx.working(30)
    cm = w.mpf(c)
    T = w.mpf(record["horizon"])
    r = w.mpf(record["r"])
    B = eval_B(T, r, cm, ctx)
    ok = True
    worst = w.mpf(0)
    for norm_sq, mu_m in zip(record["theta_norms_sq"], record["mu_values"]):
        bound = cm * w.exp(-2 * w.mpf(mu_m) * T) * w.exp(
            cm * w.sqrt(w.mpf(mu_m)) / r
        ) * B
        ratio = w.mpf(norm_sq) / bound
        worst = max(worst, ratio)
        if ratio > 1:
            ok = False
    return ok, worst


def fit_universal_constant(records, ctx, *, lo=1e-6, hi=1e6, iters=80):
    """Smallest c making the cost and theta bounds hold for every record."""

    def satisfied(c):
        for rec in records:
            bound = _cost_bound_at(rec, c, ctx)
            if rec["cost"] > bound * (1 + 1e-12):
                return False
            ok, _ = _theta_bounds_at(rec, c, ctx)
            if not ok:
                return False
        return True

    if not satisfied(hi):
        return float("inf")
    if satisfied(lo):
        return float(lo)
    log_lo, log_hi = math.log(lo), math.log(hi)
    for _ in range(iters):
        mid = (log_lo + log_hi) / 2
        if satisfied(math.exp(mid)):
            log_hi = mid
        else:
            log_lo = mid
    return math.exp(log_hi)


def certified_control_gain(pairs, window, horizon, ctx):
    """Exact K with cost <= K sum_j (a_j^2 + b_j^2) for every packet datum.

    The cost is a block-diagonal quadratic form in (a_j, b_j): with
    S = [[int s0 s0, int s0 s1], [int s0 s1, int s1 s1]] and the linear map
    (a, b) -> (alpha, beta) = ((s a - b)/mass, (-s a - b)/mass), K is the
    largest eigenvalue among the per-mode forms M^T S M.
    """
    zero = SpectralData(c=(0.0,) * len(pairs), d=(0.0,) * len(pairs))
    synthesis = synthesize_control(zero, pairs, window, horizon, ctx)
    eff = synthesis.ctx
    w = eff.working(30)
    T = w.mpf(horizon)
    worst = w.mpf(0)
    for k, pair in enumerate(pairs):
        s = w.sqrt(w.mpf(pair.lam))
        m = w.mpf(synthesis.masses[k])
        s00 = w.mpf((synthesis.sigma0[k] * synthesis.sigma0[k]).integral(0, T))
        s01 = w.mpf((synthesis.sigma0[k] * synthesis.sigma1[k]).integral(0, T))
        s11 = w.mpf((synthesis.sigma1[k] * synthesis.sigma1[k]).integral(0, T))
        # M columns act on (a, b); rows give alpha, beta
        m00, m01 = s / m, -1 / m
        m10, m11 = -s / m, -1 / m
        q00 = m00 * (s00 * m00 + s01 * m10) + m10 * (s01 * m00 + s11 * m10)
        q01 = m00 * (s00 * m01 + s01 * m11) + m10 * (s01 * m01 + s11 * m11)
        q11 = m01 * (s00 * m01 + s01 * m11) + m11 * (s01 * m01 + s11 * m11)
        lam_max = max_eig_sym(SymmetricMatrix([[q00, q01], [q01, q11]]), eff)
        worst = max(worst, w.mpf(lam_max))
    return eff.mpf(worst)


def verify_adjoint_observability(pairs, window, horizon, gain, sample_count, seed, ctx):
    """Observability through the certified control gain, on random packets.

    For adjoint solutions phi from random data, checks
    (||phi(T)||^2 + ||d_t phi(T)||^2) / int_0^T int_w phi^2 <= K (1 + 1e-6).
    """
    if sample_count < 1:
        raise ValueError("need at least one sample")
    w = ctx.working(30)
    T = w.mpf(horizon)
    gram = gram_matrix(pairs, window, ctx)
    rng = np.random.default_rng(seed)
    n = len(pairs)
    ratios = []
    for _ in range(sample_count):
        draws = rng.standard_normal(2 * n)
        data = SpectralData(c=tuple(draws[:n]), d=tuple(draws[n:]))
        phi = solve_homogeneous(data, pairs, ctx)
        num = sum(w.mpf(m.evaluate(T)) ** 2 for m in phi.modes)
        num += sum(w.mpf(m.evaluate(T)) ** 2 for m in phi.modes_dt)
        den = w.mpf(0)
        for j in range(n):
            for k in range(j + 1):
                fac = 1 if j == k else 2
                den += (
                    fac
                    * w.mpf(gram[j][k])
                    * w.mpf((phi.modes[j] * phi.modes[k]).integral(0, T))
                )
        ratios.append(float(num / den))
    max_ratio = max(ratios)
    return {
        "max_ratio": max_ratio,
        "gain": float(gain),
        "satisfied": max_ratio <= float(gain) * (1 + 1e-6),
        "sample_count": sample_count,
        "seed": seed,
    }
