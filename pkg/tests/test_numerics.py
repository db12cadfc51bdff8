"""Tests for the extended-precision kernels.

Expected values are either closed forms or were computed with independent
oracles (mpmath's own Bessel implementation, brute-force quadrature) and
frozen here; the library code never calls those oracles.
"""

import mpmath
import pytest

from degenspec import numerics as nm

CTX = nm.PrecisionContext(128)
CTX256 = nm.PrecisionContext(256)


def as_float(x):
    return float(x)


# ---------------------------------------------------------------------------
# PrecisionContext
# ---------------------------------------------------------------------------


def test_context_floor():
    with pytest.raises(ValueError):
        nm.PrecisionContext(32)
    assert nm.PrecisionContext(64).bits == 64


def test_context_is_value():
    a = nm.PrecisionContext(128)
    b = nm.PrecisionContext(128)
    assert a == b
    assert a.mpf("0.1") == b.mpf("0.1")


def test_widened():
    assert CTX.widened().bits == 256


def test_escalating_gives_up():
    def always_bad(ctx):
        raise nm.NotPositiveDefiniteError("no")

    with pytest.raises(nm.PrecisionExhaustedError):
        nm.escalating(always_bad, CTX, max_bits=512)


# ---------------------------------------------------------------------------
# Bessel J
# ---------------------------------------------------------------------------


def test_bessel_trivial_values():
    assert nm.bessel_j(0, 0, CTX) == 1
    assert nm.bessel_j(1, 0, CTX) == 0
    assert nm.bessel_j("2.5", 0, CTX) == 0


def test_bessel_half_integer_closed_form():
    # J_{1/2}(x) = sqrt(2/(pi x)) sin x; at x = pi/2 this is 2/pi
    mp = CTX.mp
    x = mp.pi / 2
    val = nm.bessel_j("0.5", x, CTX)
    assert abs(val - 2 / mp.pi) < CTX.eps * 16


def test_bessel_three_halves_closed_form():
    # J_{3/2}(x) = sqrt(2/(pi x)) (sin x / x - cos x)
    mp = CTX.mp
    for xs in ("0.3", "1.0", "4.0", "11.0"):
        x = mp.mpf(xs)
        want = mp.sqrt(2 / (mp.pi * x)) * (mp.sin(x) / x - mp.cos(x))
        got = nm.bessel_j("1.5", x, CTX)
        assert abs(got - want) <= mp.mpf(2) ** (-CTX.bits + 16) * max(1, abs(want))


@pytest.mark.parametrize("nu", ["0", "0.5", "1", "3.3", "9"])
@pytest.mark.parametrize("x", ["0.01", "1.0", "7.5", "19.0", "55.0", "140.0"])
def test_bessel_against_independent_implementation(nu, x):
    got = nm.bessel_j(nu, x, CTX)
    with mpmath.workprec(220):
        ref = mpmath.besselj(mpmath.mpf(nu), mpmath.mpf(x))
    scale = max(mpmath.mpf(1), abs(ref))
    assert abs(got - ref) <= mpmath.mpf(2) ** (-CTX.bits + 16) * scale


def test_bessel_domain_errors():
    with pytest.raises(ValueError):
        nm.bessel_j(-1, 1.0, CTX)
    with pytest.raises(ValueError):
        nm.bessel_j(0, -0.5, CTX)


def test_bessel_precision_consistency():
    # same point at 128 and 256 bits agrees to the coarser width
    v1 = nm.bessel_j("0.7", "13.0", CTX)
    v2 = nm.bessel_j("0.7", "13.0", CTX256)
    assert abs(v1 - v2) <= CTX.mpf(2) ** (-CTX.bits + 8) * abs(v2)


def test_bessel_first_zero_j0():
    z = nm.bessel_zero(0, 1, CTX)
    assert abs(z - CTX.mpf("2.404825557695773")) < 1e-15


def test_bessel_zeros_half_order_are_multiples_of_pi():
    mp = CTX.mp
    for n in range(1, 8):
        z = nm.bessel_zero("0.5", n, CTX)
        assert abs(z - n * mp.pi) < mp.mpf(2) ** (-CTX.bits + 24) * n


def test_bessel_zero_is_a_zero():
    for nu in ("0", "1.7", "9"):
        z = nm.bessel_zero(nu, 3, CTX)
        assert abs(nm.bessel_j(nu, z, CTX)) < CTX.mpf(2) ** (-CTX.bits + 40) * z


@pytest.mark.parametrize("nu", ["0", "0.4", "1.0", "2.3"])
def test_bessel_zero_interlacing(nu):
    # j_{nu,n} < j_{nu+1,n} < j_{nu,n+1}
    mp = CTX.mp
    nu1 = mp.mpf(nu) + 1
    for n in range(1, 6):
        a = nm.bessel_zero(nu, n, CTX)
        b = nm.bessel_zero(nu1, n, CTX)
        c = nm.bessel_zero(nu, n + 1, CTX)
        assert a < b < c


def test_bessel_zero_strictly_increasing():
    zs = [nm.bessel_zero("3.3", n, CTX) for n in range(1, 10)]
    assert all(u < v for u, v in zip(zs, zs[1:]))


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


def test_gauss_legendre_degree_exactness():
    mp = CTX.mp
    xs, ws = nm.gauss_legendre(6, CTX)
    # exact for polynomials to degree 11: try t^10 over [-1,1] = 2/11
    val = sum(w * x**10 for x, w in zip(xs, ws))
    assert abs(val - mp.mpf(2) / 11) < CTX.eps * 32
    assert abs(sum(ws) - 2) < CTX.eps * 32


def test_integrate_polynomial():
    val = nm.integrate(lambda t: t * t, 0, 1, CTX)
    assert abs(val - CTX.mpf(1) / 3) < CTX.mpf("1e-30")


def test_integrate_sine():
    mp = CTX.mp
    val = nm.integrate(lambda t: mp.sin(mp.pi * t), 0, 1, CTX)
    assert abs(val - 2 / mp.pi) < CTX.mpf("1e-30")


def test_integrate_graded_inverse_quartic_root():
    # int_0^1 x^{-1/4} dx = 4/3, endpoint singularity handled by grading
    val = nm.integrate(lambda t: t ** CTX256.mpf("-0.25"), 0, 1, CTX256, graded=True)
    assert abs(val - CTX256.mpf(4) / 3) < CTX256.mpf("1e-25")


def test_integrate_oscillatory_panels():
    # resolved once panels are ~ quarter wavelength
    mp = CTX.mp
    val = nm.integrate(
        lambda t: mp.sin(40 * t), 0, 1, CTX, panel_width=CTX.mpf(1) / 32
    )
    want = (1 - mp.cos(mp.mpf(40))) / 40
    assert abs(val - want) < CTX.mpf("1e-25")


def test_integrate_empty_interval_rejected():
    with pytest.raises(ValueError):
        nm.integrate(lambda t: t, 1, 1, CTX)


# ---------------------------------------------------------------------------
# ExponentialSum
# ---------------------------------------------------------------------------


def test_expsum_example_integral():
    # 2 e^t + 2 e^{-t} over (0,1): 2(e-1) + 2(1 - 1/e) reversed sign form
    mp = CTX.mp
    es = nm.ExponentialSum(CTX, [(2, 1), (-2, -1)])
    want = 2 * (mp.e - 1) + 2 * (mp.exp(-1) - 1)
    assert abs(es.integral(0, 1) - want) < CTX.eps * 64


def test_expsum_zero_rate_integral():
    es = nm.ExponentialSum(CTX, [(5, 0)])
    assert abs(es.integral(0, "2.5") - CTX.mpf("12.5")) < CTX.eps * 16


def test_expsum_merges_equal_rates():
    es = nm.ExponentialSum(CTX, [(1, "1.0"), (2, "1.0"), (4, "2.0")])
    assert es.nterms == 2
    assert abs(es.evaluate(0) - 7) < CTX.eps * 16


def test_expsum_merges_nearby_rates():
    tol_gap = CTX.mpf(2) ** (-CTX.bits // 2 - 4)
    es = nm.ExponentialSum(CTX, [(1, 1), (1, 1 + tol_gap)])
    assert es.nterms == 1


def test_expsum_keeps_distinct_powers():
    es = nm.ExponentialSum(CTX, [(1, 1, 0), (1, 1, 1)])
    assert es.nterms == 2


def test_expsum_product_matches_quadrature():
    mp = CTX.mp
    a = nm.ExponentialSum(CTX, [(1, "0.5"), (-3, "-1.25")])
    b = nm.ExponentialSum(CTX, [(2, "0.75"), (1, 0)])
    prod = a * b
    quad = nm.integrate(
        lambda t: a.evaluate(t) * b.evaluate(t), 0, 1, CTX, panel_width=mp.mpf("0.125")
    )
    assert abs(prod.integral(0, 1) - quad) < CTX.mpf("1e-30")


def test_expsum_degree_one_integral():
    # t e^{2t} over (0,1) = (e^2 + 1)/4
    mp = CTX.mp
    es = nm.ExponentialSum(CTX, [(1, 2, 1)])
    want = (mp.e**2 + 1) / 4
    assert abs(es.integral(0, 1) - want) < CTX.eps * 64


def test_expsum_degree_two_closes_under_product():
    es = nm.ExponentialSum(CTX, [(1, 1, 1)])
    sq = es * es
    assert sq.terms[0][2] == 2
    # int t^2 e^{2t} over (0,1) = (e^2 - 1)/4... check by quadrature instead
    quad = nm.integrate(lambda t: es.evaluate(t) ** 2, 0, 1, CTX)
    assert abs(sq.integral(0, 1) - quad) < CTX.mpf("1e-30")


def test_expsum_power_cap():
    es = nm.ExponentialSum(CTX, [(1, 1, 2)])
    with pytest.raises(ValueError):
        es * es  # would need t^4


def test_expsum_derivative():
    # d/dt [3 t e^{1.5t}] = 3 e^{1.5t} + 4.5 t e^{1.5t}
    mp = CTX.mp
    es = nm.ExponentialSum(CTX, [(3, "1.5", 1)])
    d = es.derivative()
    t = mp.mpf("0.37")
    want = 3 * mp.exp(mp.mpf("1.5") * t) + mp.mpf("4.5") * t * mp.exp(
        mp.mpf("1.5") * t
    )
    assert abs(d.evaluate(t) - want) < CTX.eps * 64


def test_expsum_time_reversed():
    es = nm.ExponentialSum(CTX, [(2, "-0.8", 1), (1, "0.3", 0)])
    rev = es.time_reversed(1)
    for ts in ("0.1", "0.5", "0.93"):
        t = CTX.mpf(ts)
        assert abs(rev.evaluate(t) - es.evaluate(1 - t)) < CTX.eps * 64


def test_expsum_context_mixing_rejected():
    a = nm.ExponentialSum(CTX, [(1, 1)])
    b = nm.ExponentialSum(CTX256, [(1, 1)])
    with pytest.raises(ValueError):
        a + b


def test_expsum_tiny_rate_integral_is_stable():
    # rate barely above the merge threshold: integral ~ hi - lo
    r = CTX.mpf(2) ** (-CTX.bits // 2 + 2)
    es = nm.ExponentialSum(CTX, [(1, r)])
    val = es.integral(0, 1)
    assert abs(val - 1) < CTX.mpf(2) ** (-CTX.bits // 2 + 6)
    assert abs(val - 1) > 0  # not collapsed to the r=0 branch


# ---------------------------------------------------------------------------
# SPD linear algebra
# ---------------------------------------------------------------------------


def hilbert(n):
    return [[CTX.mpf(1) / (i + j + 1) for j in range(n)] for i in range(n)]


def test_solve_identity():
    eye = [[CTX.mpf(1 if i == j else 0) for j in range(4)] for i in range(4)]
    x = nm.solve_spd(eye, [1, 2, 3, 4], CTX)
    assert [float(v) for v in x] == [1.0, 2.0, 3.0, 4.0]


def test_solve_hilbert3():
    # exact: inv(H3) rows sum to (3, -24, 30)
    x = nm.solve_spd(hilbert(3), [1, 1, 1], CTX)
    want = (3, -24, 30)
    for got, ref in zip(x, want):
        assert abs(got - ref) < CTX.mpf("1e-30")


def test_solve_residual_small():
    H = hilbert(6)
    b = [CTX.mpf(k + 1) for k in range(6)]
    x = nm.solve_spd(H, b, CTX)
    res = max(
        abs(sum(H[i][j] * x[j] for j in range(6)) - b[i]) for i in range(6)
    )
    assert res < CTX.mpf("1e-25")


def test_exponential_gram_inverse_closed_form():
    # G = [[1, e-1], [e-1, (e^2-1)/2]]; (G^{-1})_{11} = (e+1)/(3-e)
    mp = CTX.mp
    G = [[mp.mpf(1), mp.e - 1], [mp.e - 1, (mp.e**2 - 1) / 2]]
    inv = nm.inv_spd(G, CTX)
    want = (mp.e + 1) / (3 - mp.e)
    assert abs(inv[0][0] - want) < CTX.mpf("1e-30")
    assert float(want) == pytest.approx(13.19859, abs=5e-4)


def test_not_positive_definite_raises():
    A = [[CTX.mpf(1), CTX.mpf(2)], [CTX.mpf(2), CTX.mpf(1)]]
    with pytest.raises(nm.NotPositiveDefiniteError):
        nm.cholesky(A, CTX)


def test_min_eig_diagonal():
    A = [[CTX.mpf(v) for v in row] for row in ((3, 0, 0), (0, 1, 0), (0, 0, 2))]
    assert abs(nm.min_eig_spd(A, CTX) - 1) < CTX.mpf("1e-30")
    assert abs(nm.max_eig_sym(A, CTX) - 3) < CTX.mpf("1e-30")


def test_min_eig_two_mode_window_gram():
    # [[1/2, 4/(3pi)], [4/(3pi), 1/2]] -> 1/2 - 4/(3pi)
    mp = CTX.mp
    off = 4 / (3 * mp.pi)
    A = [[mp.mpf(1) / 2, off], [off, mp.mpf(1) / 2]]
    got = nm.min_eig_spd(A, CTX)
    assert abs(got - (mp.mpf(1) / 2 - off)) < CTX.mpf("1e-30")
    assert float(got) == pytest.approx(0.0756, abs=2e-4)


def test_min_eig_matches_inverse_power_identity():
    # lambda_min(H4) via Sturm equals 1/lambda_max(inv(H4))
    H = hilbert(4)
    inv = nm.inv_spd(H, CTX)
    lam = nm.min_eig_spd(H, CTX)
    lam_via_inv = 1 / nm.max_eig_sym(inv, CTX)
    assert abs(lam - lam_via_inv) < CTX.mpf("1e-25")


def test_symmetric_matrix_wrapper():
    m = nm.SymmetricMatrix([[CTX.mpf(2), CTX.mpf(1)], [CTX.mpf(1), CTX.mpf(2)]])
    assert m.n == 2
    assert abs(nm.min_eig_spd(m, CTX) - 1) < CTX.mpf("1e-25")
    with pytest.raises(ValueError):
        nm.SymmetricMatrix([[1, 2, 3], [4, 5, 6]])
