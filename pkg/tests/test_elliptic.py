"""Elliptic mode evolution: closed forms, Duhamel vs quadrature, norms,
and the rectangle interpolation check."""

import math

import pytest

from degenspec.elliptic import (
    EllipticSolution,
    SpectralData,
    draw_spectral_data,
    eval_solution,
    interpolation_check,
    norms_on_rectangle,
    solve_duhamel,
    solve_duhamel_modes,
    solve_homogeneous,
    verify_mode_ode,
)
from degenspec.numerics import ExponentialSum, PrecisionContext, integrate
from degenspec.spectral import eigensystem

import numpy as np

CTX = PrecisionContext(128)
CTX64 = PrecisionContext(64)
CTX256 = PrecisionContext(256)


def test_value_data_gives_cosh():
    pairs = eigensystem(0.0, 2, CTX)
    sol = solve_homogeneous(SpectralData(c=(1.0, 0.0), d=(0.0, 0.0)), pairs, CTX)
    w = CTX.mp
    assert sol.modes[0].nterms == 2
    assert sol.modes[1].nterms == 0
    for t in ("0", "0.3", "1.1"):
        got = sol.modes[0].evaluate(w.mpf(t))
        assert abs(got - w.cosh(w.pi * w.mpf(t))) < CTX.mpf(10) ** -30


def test_slope_data_gives_sinh_over_rate():
    pairs = eigensystem(0.0, 1, CTX)
    sol = solve_homogeneous(SpectralData(c=(0.0,), d=(1.0,)), pairs, CTX)
    w = CTX.mp
    for t in ("0.25", "0.9"):
        got = sol.modes[0].evaluate(w.mpf(t))
        assert abs(got - w.sinh(w.pi * w.mpf(t)) / w.pi) < CTX.mpf(10) ** -30


def test_initial_conditions_recovered():
    pairs = eigensystem(0.7, 3, CTX)
    data = SpectralData(c=(0.4, -1.2, 0.05), d=(2.0, 0.0, -0.8))
    sol = solve_homogeneous(data, pairs, CTX)
    for j in range(3):
        assert abs(sol.modes[j].evaluate(0) - CTX.mpf(data.c[j])) < CTX.eps * 16
        assert abs(sol.modes_dt[j].evaluate(0) - CTX.mpf(data.d[j])) < CTX.eps * 64


def test_mode_ode_residual_vanishes():
    pairs = eigensystem(1.5, 3, CTX)
    data = SpectralData(c=(1.0, 2.0, -0.5), d=(0.0, 1.0, 3.0))
    sol = solve_homogeneous(data, pairs, CTX)
    assert verify_mode_ode(sol, CTX) < CTX.eps * 256


def test_spectral_data_validation():
    with pytest.raises(ValueError):
        SpectralData(c=(1.0, 2.0), d=(1.0,))
    with pytest.raises(ValueError):
        SpectralData(c=(float("nan"),), d=(1.0,))
    with pytest.raises(ValueError):
        SpectralData(c=(1.0,), d=(float("inf"),))


def test_zero_forcing_matches_free_evolution():
    pairs = eigensystem(0.5, 2, CTX)
    data = SpectralData(c=(1.0, -0.3), d=(0.2, 0.7))
    free = solve_homogeneous(data, pairs, CTX)
    zero = [ExponentialSum.zero(CTX)] * 2
    state, slope = solve_duhamel(data, zero, pairs, CTX.mpf("0.7"), CTX)
    for j in range(2):
        assert abs(state[j] - free.modes[j].evaluate(CTX.mpf("0.7"))) == 0
        assert abs(slope[j] - free.modes_dt[j].evaluate(CTX.mpf("0.7"))) == 0


def test_duhamel_at_zero_returns_data():
    pairs = eigensystem(0.5, 2, CTX)
    data = SpectralData(c=(0.9, -1.1), d=(0.4, 0.0))
    forcing = [
        ExponentialSum.exponential(CTX, 2.0, 0.3),
        ExponentialSum.exponential(CTX, -1.0, 1.7),
    ]
    state, slope = solve_duhamel(data, forcing, pairs, 0, CTX)
    for j in range(2):
        assert abs(state[j] - CTX.mpf(data.c[j])) < CTX.eps * 64
        assert abs(slope[j] - CTX.mpf(data.d[j])) < CTX.eps * 256


def test_duhamel_nonresonant_closed_form():
    # zero data, forcing e^{mu t}: m(t) = (e^{mu t} - cosh(s t) - (mu/s) sinh(s t))/(mu^2 - s^2)
    pairs = eigensystem(0.0, 1, CTX)
    data = SpectralData(c=(0.0,), d=(0.0,))
    mu = CTX.mpf(1)
    sol = solve_duhamel_modes(data, [ExponentialSum.exponential(CTX, 1, mu)], pairs, CTX)
    w = CTX.mp
    for t in ("0.35", "0.6", "1.4"):
        tm = w.mpf(t)
        exact = (w.exp(mu * tm) - w.cosh(w.pi * tm) - mu / w.pi * w.sinh(w.pi * tm)) / (
            mu * mu - w.pi**2
        )
        assert abs(sol.modes[0].evaluate(tm) - exact) < CTX.mpf(10) ** -32


def test_duhamel_resonant_produces_linear_term():
    pairs = eigensystem(0.0, 1, CTX)
    w = CTX.mp
    s = w.sqrt(CTX.mpf(pairs[0].lam))
    data = SpectralData(c=(0.0,), d=(0.0,))
    sol = solve_duhamel_modes(data, [ExponentialSum.exponential(CTX, 1, s)], pairs, CTX)
    linear = [term for term in sol.modes[0].terms if term[2] == 1]
    assert len(linear) == 1
    coeff, rate, _ = linear[0]
    assert abs(rate - s) < CTX.eps * 16
    assert abs(coeff - 1 / (2 * w.pi)) < CTX.mpf(10) ** -30


@pytest.mark.parametrize("rate", ["0.4", "resonant"])
def test_duhamel_matches_quadrature(rate):
    # spec invariant of the forced solve: closed form vs direct panel
    # quadrature of sinh-kernel convolution at 256 bits
    pairs = eigensystem(0.5, 1, CTX256)
    w = CTX256.mp
    s = w.sqrt(CTX256.mpf(pairs[0].lam))
    r = s if rate == "resonant" else w.mpf(rate)
    data = SpectralData(c=(0.3,), d=(-0.2,))
    sol = solve_duhamel_modes(
        data, [ExponentialSum.exponential(CTX256, 2, r)], pairs, CTX256
    )
    for t in ("0.8", "2.0"):
        tm = w.mpf(t)
        free = w.mpf("0.3") * w.cosh(s * tm) + w.mpf("-0.2") * w.sinh(s * tm) / s
        conv = integrate(
            lambda tau: w.sinh(s * (tm - tau)) / s * 2 * w.exp(r * tau),
            0,
            tm,
            CTX256,
        )
        exact = free + conv
        got = sol.modes[0].evaluate(tm)
        assert abs(got - exact) / abs(exact) < CTX256.mpf(10) ** -10


def test_norms_zero_solution():
    pairs = eigensystem(0.5, 2, CTX64)
    sol = solve_homogeneous(SpectralData(c=(0.0, 0.0), d=(0.0, 0.0)), pairs, CTX64)
    out = norms_on_rectangle(sol, (0.2, 0.8), (0, 1), CTX64)
    assert out["l2"] == 0 and out["dx"] == 0 and out["dt"] == 0


def test_norms_single_mode_closed_form():
    # cosh(pi t) sqrt(2) sin(pi x) over (0,1) x (0,1)
    pairs = eigensystem(0.0, 1, CTX)
    sol = solve_homogeneous(SpectralData(c=(1.0,), d=(0.0,)), pairs, CTX)
    out = norms_on_rectangle(sol, (0.0, 1.0), (0, 1), CTX)
    w = CTX.mp
    cosh_sq = w.mpf(1) / 2 + w.sinh(2 * w.pi) / (4 * w.pi)
    sinh_sq = -w.mpf(1) / 2 + w.sinh(2 * w.pi) / (4 * w.pi)
    tol = CTX.mpf(10) ** -25
    assert abs(out["l2"] - cosh_sq) / cosh_sq < tol
    assert abs(out["dx"] - cosh_sq * w.pi**2) / (cosh_sq * w.pi**2) < tol
    assert abs(out["dt"] - sinh_sq * w.pi**2) / (sinh_sq * w.pi**2) < tol


def test_norms_stable_under_quadrature_refinement():
    pairs = eigensystem(0.5, 3, CTX64)
    data = SpectralData(c=(1.0, 0.5, -0.3), d=(0.2, 0.1, 0.0))
    sol = solve_homogeneous(data, pairs, CTX64)
    coarse = norms_on_rectangle(sol, (0.2, 0.8), (0, 1), CTX64, nodes=16)
    fine = norms_on_rectangle(sol, (0.2, 0.8), (0, 1), CTX64, nodes=32)
    for key in ("l2", "dx", "dt"):
        rel = abs(coarse[key] - fine[key]) / fine[key]
        assert rel < 1e-8


def test_eval_solution_matches_modes():
    pairs = eigensystem(0.0, 2, CTX)
    sol = solve_homogeneous(SpectralData(c=(1.0, 0.0), d=(0.0, 2.0)), pairs, CTX)
    w = CTX.mp
    x, t = w.mpf("0.3"), w.mpf("0.5")
    exact = w.cosh(w.pi * t) * w.sqrt(2) * w.sin(w.pi * x) + w.sinh(
        2 * w.pi * t
    ) / w.pi * w.sqrt(2) * w.sin(2 * w.pi * x)
    assert abs(eval_solution(sol, x, t, CTX) - exact) < CTX.mpf(10) ** -28


def test_forcing_validation():
    pairs = eigensystem(0.5, 2, CTX)
    data = SpectralData(c=(0.0, 0.0), d=(0.0, 0.0))
    with pytest.raises(ValueError):
        solve_duhamel_modes(data, [ExponentialSum.zero(CTX)], pairs, CTX)
    ramp = ExponentialSum(CTX, [(1.0, 0.5, 1)])
    with pytest.raises(NotImplementedError):
        solve_duhamel_modes(data, [ramp, ramp], pairs, CTX)


def test_draw_spectral_data_reproducible():
    pairs = eigensystem(0.5, 3, CTX64)
    a = draw_spectral_data(pairs, np.random.default_rng(11))
    b = draw_spectral_data(pairs, np.random.default_rng(11))
    assert a == b
    assert all(abs(v) < 2.0 for v in a.c)  # scales 1/(1+lam) damp the tail


def test_interpolation_check_reports_finite_pair():
    pairs = eigensystem(0.0, 4, CTX64)
    out = interpolation_check(20, pairs, (0.2, 0.8), 1.0, [0.3, 0.5, 0.7], 7, CTX64)
    assert out["delta"] in (0.3, 0.5, 0.7)
    assert math.isfinite(out["c"]) and out["c"] > 0
    assert len(out["table"]) == 3
    again = interpolation_check(20, pairs, (0.2, 0.8), 1.0, [0.3, 0.5, 0.7], 7, CTX64)
    assert again["c"] == out["c"] and again["delta"] == out["delta"]


def test_interpolation_check_validation():
    pairs = eigensystem(0.0, 2, CTX64)
    with pytest.raises(ValueError):
        interpolation_check(5, pairs, (0.2, 0.8), 1.0, [0.5], 1, CTX64)
    with pytest.raises(ValueError):
        interpolation_check(20, pairs, (0.2, 0.8), 1.0, [1.5], 1, CTX64)


def test_interpolation_homogeneity():
    # both sides scale linearly, so the per-sample ratio is data-scale-free
    pairs = eigensystem(0.0, 3, CTX)
    data = SpectralData(c=(0.5, -0.2, 0.1), d=(0.0, 0.3, -0.4))
    scaled = SpectralData(
        c=tuple(10 * v for v in data.c), d=tuple(10 * v for v in data.d)
    )
    w = CTX.mp

    def ratio(datum):
        sol = solve_homogeneous(datum, pairs, CTX)
        near = norms_on_rectangle(sol, (0.4, 0.6), (0, 0.25), CTX)
        big = norms_on_rectangle(sol, (0.2, 0.8), (0, 1), CTX)
        lhs = w.sqrt(near["l2"] + near["dx"] + near["dt"])
        rhs = w.sqrt(big["l2"] + big["dx"] + big["dt"])
        return lhs / rhs

    r1, r2 = ratio(data), ratio(scaled)
    assert abs(r1 - r2) / r1 < CTX.mpf(10) ** -12