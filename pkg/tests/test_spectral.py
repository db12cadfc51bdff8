"""Eigenstructure checks: closed forms, the FEM oracle, and invariants.

The alpha = 0 case is classical (lambda_j = j^2 pi^2, Phi_j = sqrt(2)
sin(j pi x)) and pins the whole route exactly; degenerate alphas are
cross-validated against the finite-element oracle.
"""

import math

import numpy as np
import pytest

from degenspec.numerics import PrecisionContext, integrate
from degenspec.spectral import (
    LAMBDA1_BRACKET,
    RegimeError,
    boundary_flux,
    check_boundary_reduction,
    check_first_eigenvalue_bounds,
    check_hardy,
    check_spectral_gap,
    check_weak_form,
    eigensystem,
    eval_eigenfunction,
    eval_eigenfunction_derivative,
    fem_eigensystem,
    fem_grading,
    fem_reference_eigenvalues,
    oracle_equivalence,
    regime,
    validate_alpha,
)

CTX = PrecisionContext(128)
CTX64 = PrecisionContext(64)


def mpf(x):
    return CTX.mpf(x)


# ---------------------------------------------------------------------------
# alpha = 0: everything is exact
# ---------------------------------------------------------------------------


def test_alpha0_eigenvalues_are_squared_multiples_of_pi():
    pairs = eigensystem(0.0, 8, CTX)
    w = CTX.mp
    for j, p in enumerate(pairs, start=1):
        exact = (j * w.pi) ** 2
        assert abs(p.lam - exact) / exact < mpf(10) ** -25


def test_alpha0_eigenfunction_is_sine():
    pairs = eigensystem(0.0, 3, CTX)
    w = CTX.mp
    for j, p in enumerate(pairs, start=1):
        for x in ("0.1", "0.3", "0.725", "0.9"):
            got = eval_eigenfunction(p, mpf(x), CTX)
            exact = w.sqrt(2) * w.sin(j * w.pi * w.mpf(x))
            assert abs(got - exact) < mpf(10) ** -25


def test_alpha0_eigenfunction_derivative_is_cosine():
    p = eigensystem(0.0, 2, CTX)[1]
    w = CTX.mp
    for x in ("0.2", "0.55", "1"):
        got = eval_eigenfunction_derivative(p, mpf(x), CTX)
        exact = w.sqrt(2) * 2 * w.pi * w.cos(2 * w.pi * w.mpf(x))
        assert abs(got - exact) < mpf(10) ** -24


def test_alpha0_boundary_flux_closed_form():
    pairs = eigensystem(0.0, 2, CTX)
    w = CTX.mp
    # Phi_j'(1) = sqrt(2) j pi cos(j pi) = (-1)^j sqrt(2) j pi
    assert abs(boundary_flux(pairs[0], CTX) + w.sqrt(2) * w.pi) < mpf(10) ** -25
    assert abs(boundary_flux(pairs[1], CTX) - 2 * w.sqrt(2) * w.pi) < mpf(10) ** -25


def test_boundary_flux_matches_derivative_at_one():
    for alpha in (0.0, 0.5, 1.5):
        for p in eigensystem(alpha, 3, CTX):
            flux = boundary_flux(p, CTX)
            deriv = eval_eigenfunction_derivative(p, mpf(1), CTX)
            assert abs(flux - deriv) / abs(flux) < mpf(10) ** -30


# ---------------------------------------------------------------------------
# degenerate alphas: values and endpoint behavior
# ---------------------------------------------------------------------------


def test_alpha1_first_eigenvalue():
    # nu = 0, lambda_1 = (j_{0,1}/2)^2
    lam = eigensystem(1.0, 1, CTX)[0].lam
    assert abs(float(lam) - 1.4457964907366961) < 1e-12


def test_alpha19_first_eigenvalue_bracket():
    lam = float(eigensystem(1.9, 1, CTX)[0].lam)
    assert 0.44583 < lam < 0.44586


def test_weak_regime_vanishes_at_zero():
    p = eigensystem(0.5, 1, CTX)[0]
    assert eval_eigenfunction(p, mpf(0), CTX) == 0
    small = eval_eigenfunction(p, mpf(10) ** -8, CTX)
    assert 0 < small < mpf(10) ** -3


def test_strong_regime_positive_at_zero():
    p = eigensystem(1.5, 1, CTX)[0]
    at_zero = eval_eigenfunction(p, mpf(0), CTX)
    assert at_zero > 3  # c_1 j_{1,1} / 2 ~ 3.36
    near_zero = eval_eigenfunction(p, mpf(10) ** -28, CTX)
    assert abs(near_zero - at_zero) / at_zero < mpf(10) ** -10


def test_eigenfunction_vanishes_at_one():
    for alpha in (0.0, 0.5, 1.0, 1.5):
        for p in eigensystem(alpha, 2, CTX):
            assert abs(eval_eigenfunction(p, mpf(1), CTX)) < mpf(10) ** -30


def test_eigenfunction_positive_near_zero():
    # mode j first changes sign where zero_j x^kappa hits zero_1, which for
    # kappa = (2-alpha)/2 near 0 is tiny; probe below that point
    for alpha in (0.0, 0.5, 1.0, 1.5, 1.9):
        pairs = eigensystem(alpha, 4, CTX)
        first = pairs[0].zero
        for p in pairs:
            x_probe = ((first / 2) / p.zero) ** (1 / p.kappa)
            assert eval_eigenfunction(p, x_probe, CTX) > 0


def test_eigenvalues_strictly_increasing():
    for alpha in (0.0, 0.5, 1.0, 1.5, 1.9):
        lams = [p.lam for p in eigensystem(alpha, 6, CTX)]
        assert all(b > a for a, b in zip(lams, lams[1:]))


def test_eigensystem_deterministic():
    a = eigensystem(0.7, 4, CTX)
    b = eigensystem(0.7, 4, CTX)
    for pa, pb in zip(a, b):
        assert pa.lam == pb.lam
        assert pa.norm_const == pb.norm_const


def test_eigensystem_rejects_bad_arguments():
    with pytest.raises(RegimeError):
        eigensystem(2.0, 3, CTX)
    with pytest.raises(RegimeError):
        eigensystem(-0.1, 3, CTX)
    with pytest.raises(ValueError):
        eigensystem(0.5, 0, CTX)
    with pytest.raises(ValueError):
        eigensystem(0.5, 3, CTX, method="spectral-collocation")


def test_regime_classification():
    assert regime(0.0) == "weak"
    assert regime(0.999) == "weak"
    assert regime(1.0) == "strong"
    assert regime(1.9) == "strong"
    assert validate_alpha(0.3) == 0.3


# ---------------------------------------------------------------------------
# quadrature invariants: orthonormality, weak form, Hardy
# ---------------------------------------------------------------------------


def _l2_inner(pj, pk, ctx):
    wide = PrecisionContext(ctx.bits + 30)
    return integrate(
        lambda x: eval_eigenfunction(pj, x, wide) * eval_eigenfunction(pk, x, wide),
        0,
        1,
        ctx,
        graded=True,
    )


@pytest.mark.parametrize("alpha", [0.5, 1.5])
def test_orthonormal_in_l2(alpha):
    pairs = eigensystem(alpha, 3, CTX64)
    for j, k in [(0, 0), (0, 1), (1, 1), (1, 2)]:
        inner = _l2_inner(pairs[j], pairs[k], CTX64)
        target = 1 if j == k else 0
        assert abs(inner - target) < CTX64.mpf(10) ** -12


@pytest.mark.parametrize("alpha", [0.5, 1.5])
def test_weak_form_residual_small(alpha):
    p = eigensystem(alpha, 2, CTX64)[1]
    assert check_weak_form(p, CTX64) < CTX64.mpf(10) ** -12


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.5])
def test_hardy_inequality_holds(alpha):
    p = eigensystem(alpha, 1, CTX64)[0]
    out = check_hardy(p, CTX64)
    assert out["holds"]
    # lhs is the squared L^2 norm, so this doubles as a normalization check
    assert abs(out["lhs"] - 1) < CTX64.mpf(10) ** -12


def test_boundary_reduction_alpha0_energy_flux_ratio_is_one():
    for p in (eigensystem(0.0, 3, CTX64)[0], eigensystem(0.0, 3, CTX64)[2]):
        out = check_boundary_reduction(p, (0.2, 0.8), CTX64)
        assert abs(out["ratio_energy_flux"] - 1) < CTX64.mpf(10) ** -18


def test_boundary_reduction_window_ratio_bounded_in_j():
    ratios = []
    for p in eigensystem(0.5, 6, CTX64):
        out = check_boundary_reduction(p, (0.2, 0.8), CTX64)
        r = float(out["ratio_flux_window"])
        assert r > 0
        ratios.append(r)
    assert max(ratios) < 60 and min(ratios) > 0.5


def test_boundary_reduction_rejects_bad_window():
    p = eigensystem(0.5, 1, CTX64)[0]
    with pytest.raises(ValueError):
        check_boundary_reduction(p, (0.8, 0.2), CTX64)


# ---------------------------------------------------------------------------
# spectral gap and first-eigenvalue scan
# ---------------------------------------------------------------------------


def test_gap_alpha0_is_half_pi():
    out = check_spectral_gap(0.0, CTX, k_max=10)
    w = CTX.mp
    for g in out["gaps"]:
        assert abs(g - w.pi / 2) < mpf(10) ** -20


def test_gap_uniform_across_alpha():
    hats = []
    for alpha in (0.0, 0.5, 1.0, 1.5, 1.9):
        out = check_spectral_gap(alpha, CTX64, k_max=12)
        hats.append(float(out["gamma_hat"]))
    assert all(1.2 < h < 2.2 for h in hats)
    assert max(hats) / min(hats) < 4


def test_first_eigenvalue_scan_stays_in_bracket():
    alphas = [round(0.1 * k, 1) for k in range(20)]
    out = check_first_eigenvalue_bounds(alphas, CTX64)
    assert not out["any_flagged"]
    lo, hi = out["bracket"]
    assert LAMBDA1_BRACKET[0] < lo and hi < LAMBDA1_BRACKET[1]


# ---------------------------------------------------------------------------
# FEM oracle
# ---------------------------------------------------------------------------


def test_fem_grading_values():
    assert fem_grading(0.0) == 2.0
    assert fem_grading(0.5) == 4.0
    assert fem_grading(1.0) == 2.0
    assert fem_grading(1.5) == 4.0
    assert fem_grading(0.97) == 64.0  # capped


def test_fem_alpha0_matches_exact():
    sys = fem_eigensystem(0.0, 4, 512)
    for j in range(4):
        exact = ((j + 1) * math.pi) ** 2
        assert abs(sys["lambdas"][j] - exact) / exact < 1e-3
    ref = fem_reference_eigenvalues(0.0, 4, 512)
    for j in range(4):
        exact = ((j + 1) * math.pi) ** 2
        assert abs(ref["lambda_converged"][j] - exact) / exact < 1e-6


def test_fem_boundary_conditions_and_sign():
    weak = fem_eigensystem(0.5, 2, 256)
    assert weak["values"][0][0] == 0.0  # essential condition at 0
    assert weak["values"][0][-1] == 0.0
    strong = fem_eigensystem(1.5, 2, 256)
    assert strong["values"][0][0] > 0.0  # natural condition leaves the value free
    assert strong["values"][0][-1] == 0.0
    assert weak["values"][0][4] > 0 and strong["values"][0][4] > 0


@pytest.mark.parametrize("alpha", [0.5, 1.5])
def test_closed_form_agrees_with_fem(alpha):
    out = oracle_equivalence(alpha, 8, CTX64, mesh_size=2048)
    assert out["max_rel_diff"] < 1e-6


def test_fem_route_through_unified_interface():
    bess = eigensystem(0.5, 3, CTX64)
    fem = eigensystem(0.5, 3, CTX64, method="fem", mesh_size=1024)
    for pb, pf in zip(bess, fem):
        assert pf.provenance == "fem"
        assert abs(float(pb.lam) - float(pf.lam)) / float(pb.lam) < 1e-4
        vb = float(eval_eigenfunction(pb, CTX64.mpf("0.5"), CTX64))
        vf = float(eval_eigenfunction(pf, CTX64.mpf("0.5"), CTX64))
        assert abs(vb - vf) < 1e-3
        assert float(boundary_flux(pb, CTX64)) * float(boundary_flux(pf, CTX64)) > 0
