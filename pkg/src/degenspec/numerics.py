"""Extended-precision numerical kernels.

Everything downstream (eigen-solves, Gram matrices, biorthogonal families)
is built on four primitives collected here:

  * PrecisionContext -- a value object selecting the significand width in
    bits of all arithmetic.  Contexts are immutable; mpmath contexts are
    cloned per width, never mutated globally, so results are deterministic
    for a fixed context and safe under concurrent use.
  * bessel_j / bessel_zero -- first-kind Bessel functions J_nu and their
    positive zeros, by ascending series with cancellation-absorbing guard
    bits and bisection-safeguarded Newton.
  * gauss_legendre / integrate -- composite Gauss-Legendre panel quadrature
    with optional geometric grading toward a left endpoint where integrands
    may be singular (x^{-1/2+eps} type).
  * ExponentialSum and dense SPD linear algebra (Cholesky solve, smallest
    eigenvalue by Sturm bisection) at context precision.

Exponential sums sum(c_i * t^p_i * e^{r_i t}) are closed under sum, product
and differentiation, and integrate in closed form; they carry the exact time
profiles used by the moment-method control construction, where coefficient
sizes like e^{2 mu_max T} make double precision useless.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import mpmath

MIN_BITS = 64

# Polynomial degree cap for exponential-sum terms.  Degree 1 arises from a
# resonant Duhamel convolution, degree 2 from squaring a degree-1 sum.
MAX_POWER = 2


class NotPositiveDefiniteError(ArithmeticError):
    """A Cholesky pivot was <= 0: the matrix is not numerically SPD at this
    precision.  Callers typically retry at doubled precision."""


class PrecisionExhaustedError(ArithmeticError):
    """Escalating the working precision did not cure an ill-conditioned
    solve; the computation is abandoned rather than silently degraded."""


@functools.lru_cache(maxsize=None)
def _mp(bits):
    ctx = mpmath.mp.clone()
    ctx.prec = bits
    return ctx


@dataclass(frozen=True)
class PrecisionContext:
    """Significand width (in bits) parameterizing all arithmetic.

    A PrecisionContext is a value, not shared mutable state: two operations
    run with equal contexts give bitwise-equal results.
    """

    bits: int = 128

    def __post_init__(self):
        if self.bits < MIN_BITS:
            raise ValueError(f"precision floor is {MIN_BITS} bits, got {self.bits}")

    @property
    def mp(self):
        return _mp(self.bits)

    def working(self, extra=0):
        """mpmath context with guard bits on top of the nominal width."""
        return _mp(self.bits + max(0, int(extra)))

    def mpf(self, x):
        return self.mp.mpf(x)

    @property
    def eps(self):
        return self.mp.mpf(2) ** (1 - self.bits)

    def widened(self, factor=2):
        return PrecisionContext(bits=self.bits * factor)


def escalating(fn, ctx, max_bits=4096):
    """Run fn(ctx), doubling precision on NotPositiveDefiniteError.

    Raises PrecisionExhaustedError once max_bits is exceeded.
    """
    c = ctx
    while True:
        try:
            return fn(c)
        except NotPositiveDefiniteError:
            if c.bits * 2 > max_bits:
                raise PrecisionExhaustedError(
                    f"still not positive definite at {c.bits} bits"
                )
            c = c.widened()


# ---------------------------------------------------------------------------
# Bessel functions of the first kind
# ---------------------------------------------------------------------------


def _series_guard_bits(x_float):
    # Ascending series for J_nu alternates with largest term ~ e^x against a
    # result of size ~ x^{-1/2}; 1.45*x guard bits absorb the cancellation.
    return int(1.45 * max(0.0, x_float)) + 40


def bessel_j(nu, x, ctx):
    """J_nu(x) for nu > -1 and x >= 0 by the ascending series.

    The series runs at bits + ~1.45*x guard bits so the returned value is
    correct to ~2^-bits relative regardless of x (used up to x ~ 200).
    """
    w = ctx.working(60)
    num = w.mpf(nu)
    xm = w.mpf(x)
    if num <= -1:
        raise ValueError(f"order must be > -1, got {nu}")
    if xm < 0:
        raise ValueError(f"argument must be >= 0, got {x}")
    if xm == 0:
        if num == 0:
            return ctx.mpf(1)
        return ctx.mpf(0) if num > 0 else ctx.mp.inf
    w = ctx.working(_series_guard_bits(float(xm)))
    num = w.mpf(nu)
    xm = w.mpf(x)
    z = xm / 2
    z2 = z * z
    term = w.power(z, num) / w.gamma(num + 1)
    total = term
    peak = abs(term)
    tiny = w.mpf(2) ** (-(w.prec + 10))
    k = 0
    while True:
        k += 1
        term = -term * z2 / (k * (num + k))
        total += term
        mag = abs(term)
        if mag > peak:
            peak = mag
        if mag < tiny * peak and k > 2:
            break
    return ctx.mpf(total)


def bessel_j_derivative(nu, x, ctx):
    """J_nu'(x) via the stable recurrence J_nu' = (nu/x) J_nu - J_{nu+1}."""
    w = ctx.working(40)
    xm = w.mpf(x)
    if xm == 0:
        # J_nu'(0): 1/2 for nu=1, 0 for nu>1, -inf/inf pattern not needed here
        if w.mpf(nu) == 1:
            return ctx.mpf("0.5")
        return ctx.mpf(0)
    val = w.mpf(nu) / xm * bessel_j(nu, xm, ctx) - bessel_j(w.mpf(nu) + 1, xm, ctx)
    return ctx.mpf(val)


# Zeros are cached per (order, bits) as a growing list so eigen-solves that
# revisit the same order pay for each zero once.
@functools.lru_cache(maxsize=None)
def _zero_list(nu_key, bits):
    return []


_SCAN_STEP = 0.7  # below the minimal spacing (~2.4) of J_nu zeros for nu > -1


def bessel_zero(nu, n, ctx):
    """n-th positive zero of J_nu (n >= 1), nu > -1.

    Brackets by sign scanning from below the first zero (J_nu > 0 on
    (0, j_{nu,1})), then polishes with bisection-safeguarded Newton at full
    precision.  Zeros come out strictly increasing by construction.
    """
    if n < 1:
        raise ValueError(f"zero index must be >= 1, got {n}")
    w = ctx.working(30)
    num = w.mpf(nu)
    if num <= -1:
        raise ValueError(f"order must be > -1, got {nu}")
    cache = _zero_list(num._mpf_, ctx.bits)
    scan_ctx = PrecisionContext(MIN_BITS)
    while len(cache) < n:
        if cache:
            lo = cache[-1] + w.mpf(_SCAN_STEP) / 8
            f_lo = bessel_j(num, lo, scan_ctx)
        else:
            lo = max(float(num), 0.05)
            lo = w.mpf(lo)
            f_lo = bessel_j(num, lo, scan_ctx)
            # J_nu(j_{nu,1}^-) > 0; step back if the start overshot
            while f_lo <= 0:
                lo = lo / 2
                f_lo = bessel_j(num, lo, scan_ctx)
        hi = lo
        f_hi = f_lo
        while f_lo * f_hi > 0:
            lo, f_lo = hi, f_hi
            hi = hi + w.mpf(_SCAN_STEP)
            f_hi = bessel_j(num, hi, scan_ctx)
        cache.append(_refine_bessel_zero(num, lo, hi, ctx))
    return ctx.mpf(cache[n - 1])


def _refine_bessel_zero(nu, lo, hi, ctx):
    w = ctx.working(60)
    lo, hi = w.mpf(lo), w.mpf(hi)
    wide = PrecisionContext(w.prec)
    f_lo = bessel_j(nu, lo, wide)
    x = (lo + hi) / 2
    tol = w.mpf(2) ** (-(ctx.bits + 20))
    for _ in range(ctx.bits + 40):
        f = bessel_j(nu, x, wide)
        if f == 0:
            break
        # keep the bracket [lo, hi] with a sign change
        if (f > 0) == (f_lo > 0):
            lo = x
        else:
            hi = x
        df = nu / x * f - bessel_j(nu + 1, x, wide)
        step = f / df
        x_new = x - step
        if not (lo < x_new < hi):
            x_new = (lo + hi) / 2
        if abs(x_new - x) <= tol * abs(x):
            x = x_new
            break
        x = x_new
    return w.mpf(x)


# ---------------------------------------------------------------------------
# Gauss-Legendre panel quadrature
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _gauss_legendre_cached(n, bits):
    w = _mp(bits + 30)
    one = w.mpf(1)
    nodes = [w.mpf(0)] * n
    weights = [w.mpf(0)] * n
    tol = w.mpf(2) ** (-(bits + 10))
    m = (n + 1) // 2
    for i in range(m):
        # Chebyshev-like initial guess, then Newton on P_n
        x = w.cos(w.pi * (4 * i + 3) / (4 * n + 2))
        for _ in range(200):
            p0, p1 = one, x
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = n * (x * p1 - p0) / (x * x - 1)
            dx = p1 / dp
            x -= dx
            if abs(dx) <= tol * max(abs(x), one):
                break
        p0, p1 = one, x
        for k in range(2, n + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        dp = n * (x * p1 - p0) / (x * x - 1)
        wt = 2 / ((1 - x * x) * dp * dp)
        nodes[i] = -x
        nodes[n - 1 - i] = x
        weights[i] = wt
        weights[n - 1 - i] = wt
    if n % 2 == 1:
        nodes[n // 2] = w.mpf(0)
    return tuple(nodes), tuple(weights)


def gauss_legendre(n, ctx):
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]."""
    if n < 1:
        raise ValueError(f"need at least one node, got {n}")
    nodes, weights = _gauss_legendre_cached(n, ctx.bits)
    return list(nodes), list(weights)


GRADE_RATIO = "0.5"


def panel_breakpoints(a, b, ctx, *, panel_width=None, graded=False):
    """Panel endpoints for composite quadrature on (a, b).

    graded=True lays geometrically shrinking panels toward a (ratio 1/2),
    for integrands with an endpoint singularity like x^{-1/2+eps} at a.
    The grading depth scales with the context: the innermost panel has
    relative width 2^{-max(40, 2*bits)}, so the uncovered sliver's
    contribution (~width^{1/2} for the worst integrable singularity) stays
    below the precision target.
    """
    w = ctx.working(30)
    a, b = w.mpf(a), w.mpf(b)
    if not b > a:
        raise ValueError("empty integration interval")
    length = b - a
    if graded:
        pts = [b]
        cut = length
        ratio = w.mpf(GRADE_RATIO)
        inner = length * w.mpf(2) ** (-max(40, 2 * ctx.bits))
        while cut > inner:
            cut = cut * ratio
            pts.append(a + cut)
        pts.append(a)
        return list(reversed(pts))
    if panel_width is None:
        count = 8
    else:
        count = max(1, int(w.ceil(length / w.mpf(panel_width))))
    return [a + length * k / count for k in range(count + 1)]


def integrate(f, a, b, ctx, *, nodes=16, panel_width=None, graded=False):
    """Composite Gauss-Legendre integral of f over (a, b) at context precision.

    f is a scalar callable taking and returning context-precision values.
    """
    if graded and nodes < 24:
        nodes = 24  # endpoint singularity: panels see x^{-s}, needs depth
    pts = panel_breakpoints(a, b, ctx, panel_width=panel_width, graded=graded)
    gl_x, gl_w = gauss_legendre(nodes, ctx)
    w = ctx.working(30)
    total = w.mpf(0)
    for lo, hi in zip(pts[:-1], pts[1:]):
        half = (w.mpf(hi) - w.mpf(lo)) / 2
        mid = (w.mpf(hi) + w.mpf(lo)) / 2
        acc = w.mpf(0)
        for xk, wk in zip(gl_x, gl_w):
            acc += wk * w.mpf(f(mid + half * xk))
        total += half * acc
    return ctx.mpf(total)


# ---------------------------------------------------------------------------
# Exponential sums  sum_i c_i t^{p_i} e^{r_i t}
# ---------------------------------------------------------------------------


class ExponentialSum:
    """Finite sum of terms c * t^p * e^{r t} with p in {0, 1, 2}.

    Closed under +, scalar and sum products, and d/dt; definite integrals
    are evaluated in closed form.  Terms are kept canonical: sorted by
    (rate, power), with rates closer than 2^{-bits/2} relative merged, so
    rate collisions produced by control constructions (e.g. a forcing rate
    equal to a mode's own exponent) collapse deterministically.
    """

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx, terms=(), *, _canonical=False):
        self.ctx = ctx
        if _canonical:
            self.terms = tuple(terms)
        else:
            self.terms = self._canonicalize(ctx, terms)

    @staticmethod
    def _canonicalize(ctx, terms):
        w = ctx.working(30)
        norm = []
        for item in terms:
            if len(item) == 2:
                c, r = item
                p = 0
            else:
                c, r, p = item
            if not 0 <= p <= MAX_POWER:
                raise ValueError(f"term power {p} outside 0..{MAX_POWER}")
            norm.append((w.mpf(c), w.mpf(r), int(p)))
        norm.sort(key=lambda t: (t[2], t[1]))
        tol = w.mpf(2) ** (-(ctx.bits // 2))
        merged = []
        for c, r, p in norm:
            if merged:
                c0, r0, p0 = merged[-1]
                if p == p0 and abs(r - r0) <= tol * max(w.mpf(1), abs(r), abs(r0)):
                    merged[-1] = (c0 + c, r0, p0)
                    continue
            merged.append((c, r, p))
        return tuple((ctx.mpf(c), ctx.mpf(r), p) for c, r, p in merged if c != 0)

    @classmethod
    def zero(cls, ctx):
        return cls(ctx, (), _canonical=True)

    @classmethod
    def constant(cls, ctx, c):
        return cls(ctx, [(c, 0, 0)])

    @classmethod
    def exponential(cls, ctx, c, r):
        """c * e^{r t}"""
        return cls(ctx, [(c, r, 0)])

    @property
    def nterms(self):
        return len(self.terms)

    def evaluate(self, t):
        w = self.ctx.working(30)
        tm = w.mpf(t)
        total = w.mpf(0)
        for c, r, p in self.terms:
            v = w.mpf(c) * w.exp(w.mpf(r) * tm)
            for _ in range(p):
                v *= tm
            total += v
        return self.ctx.mpf(total)

    def __add__(self, other):
        self._check(other)
        return ExponentialSum(self.ctx, self.terms + other.terms)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return self.scaled(-1)

    def scaled(self, c):
        w = self.ctx.working(30)
        cm = w.mpf(c)
        return ExponentialSum(
            self.ctx, [(w.mpf(ci) * cm, ri, pi) for ci, ri, pi in self.terms]
        )

    def __mul__(self, other):
        if not isinstance(other, ExponentialSum):
            return self.scaled(other)
        self._check(other)
        w = self.ctx.working(30)
        prod = []
        for c1, r1, p1 in self.terms:
            for c2, r2, p2 in other.terms:
                prod.append((w.mpf(c1) * w.mpf(c2), w.mpf(r1) + w.mpf(r2), p1 + p2))
        return ExponentialSum(self.ctx, prod)

    __rmul__ = __mul__

    def derivative(self):
        out = []
        for c, r, p in self.terms:
            out.append((c * r, r, p))
            if p > 0:
                out.append((c * p, r, p - 1))
        return ExponentialSum(self.ctx, out)

    def time_reversed(self, horizon):
        """The sum s(T - t) as a function of t, T = horizon."""
        w = self.ctx.working(30)
        T = w.mpf(horizon)
        out = []
        for c, r, p in self.terms:
            base = w.mpf(c) * w.exp(w.mpf(r) * T)
            # (T - t)^p expanded binomially, p <= 2
            if p == 0:
                out.append((base, -r, 0))
            elif p == 1:
                out.append((base * T, -r, 0))
                out.append((-base, -r, 1))
            else:
                out.append((base * T * T, -r, 0))
                out.append((-2 * base * T, -r, 1))
                out.append((base, -r, 2))
        return ExponentialSum(self.ctx, out)

    def integral(self, lo, hi):
        """Exact integral over [lo, hi]."""
        ctx = self.ctx
        total = ctx.working(30).mpf(0)
        for c, r, p in self.terms:
            total += _term_integral(ctx, c, r, p, lo, hi)
        return ctx.mpf(total)

    def _check(self, other):
        if self.ctx != other.ctx:
            raise ValueError("exponential sums built under different contexts")

    def __repr__(self):
        bits = self.ctx.bits
        return f"ExponentialSum({self.nterms} terms, {bits} bits)"


def _term_integral(ctx, c, r, p, lo, hi):
    # int t^p e^{rt}: antiderivatives
    #   p=0: e^{rt}/r          p=1: e^{rt}(t/r - 1/r^2)
    #   p=2: e^{rt}(t^2/r - 2t/r^2 + 2/r^3)
    # For r=0 the plain monomial; for small |r (hi-lo)| the difference of
    # antiderivatives cancels, so escalate the working precision by the
    # number of bits the cancellation eats.
    w = ctx.working(30)
    rm, lom, him = w.mpf(r), w.mpf(lo), w.mpf(hi)
    if rm == 0:
        return w.mpf(c) * (him ** (p + 1) - lom ** (p + 1)) / (p + 1)
    span = abs(rm) * max(abs(him - lom), w.mpf(2) ** (-ctx.bits))
    cancel = max(0, -mpmath.mag(span)) + 30
    w = ctx.working(cancel + 30)
    cm, rm, lom, him = w.mpf(c), w.mpf(r), w.mpf(lo), w.mpf(hi)
    if p == 0:
        # e^{r lo} * expm1(r (hi-lo)) / r is cancellation-free
        return cm * w.exp(rm * lom) * w.expm1(rm * (him - lom)) / rm

    def anti(t):
        if p == 1:
            return w.exp(rm * t) * (t / rm - 1 / rm**2)
        return w.exp(rm * t) * (t * t / rm - 2 * t / rm**2 + 2 / rm**3)

    return cm * (anti(him) - anti(lom))


# ---------------------------------------------------------------------------
# Dense symmetric linear algebra at context precision
# ---------------------------------------------------------------------------


class SymmetricMatrix:
    """Dense symmetric matrix with context-precision entries."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        n = len(rows)
        for row in rows:
            if len(row) != n:
                raise ValueError("matrix must be square")
        self.rows = [list(row) for row in rows]

    @property
    def n(self):
        return len(self.rows)

    def __getitem__(self, i):
        return self.rows[i]

    def __len__(self):
        return self.n

    def to_lists(self):
        return [list(row) for row in self.rows]


def _as_rows(A):
    if isinstance(A, SymmetricMatrix):
        return A.rows
    return A


def cholesky(A, ctx):
    """Lower-triangular L with L L^T = A; raises NotPositiveDefiniteError."""
    rows = _as_rows(A)
    n = len(rows)
    w = ctx.working(30)
    L = [[w.mpf(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = w.mpf(rows[i][j])
            for k in range(j):
                s -= L[i][k] * L[j][k]
            if i == j:
                if s <= 0:
                    raise NotPositiveDefiniteError(
                        f"pivot {i} is {mpmath.nstr(s, 8)} at {ctx.bits} bits"
                    )
                L[i][i] = w.sqrt(s)
            else:
                L[i][j] = s / L[j][j]
    return L


def solve_spd(A, b, ctx):
    """Solve A x = b for SPD A by Cholesky; b is a vector or list of vectors."""
    rows = _as_rows(A)
    n = len(rows)
    L = cholesky(rows, ctx)
    w = ctx.working(30)
    single = not isinstance(b[0], (list, tuple))
    cols = [b] if single else b
    outs = []
    for rhs in cols:
        if len(rhs) != n:
            raise ValueError("right-hand side length mismatch")
        y = [w.mpf(0)] * n
        for i in range(n):
            s = w.mpf(rhs[i])
            for k in range(i):
                s -= L[i][k] * y[k]
            y[i] = s / L[i][i]
        x = [w.mpf(0)] * n
        for i in reversed(range(n)):
            s = y[i]
            for k in range(i + 1, n):
                s -= L[k][i] * x[k]
            x[i] = s / L[i][i]
        outs.append([ctx.mpf(v) for v in x])
    return outs[0] if single else outs


def inv_spd(A, ctx):
    """Inverse of an SPD matrix, column by column."""
    n = len(_as_rows(A))
    eye = [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    cols = solve_spd(A, eye, ctx)
    # columns of the inverse; symmetric, so rows == columns
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def _householder_tridiagonal(A, ctx):
    """Symmetric Householder reduction; returns (diagonal, subdiagonal)."""
    w = ctx.working(30)
    rows = _as_rows(A)
    n = len(rows)
    a = [[w.mpf(x) for x in row] for row in rows]
    for k in range(n - 2):
        x = [a[i][k] for i in range(k + 1, n)]
        norm = w.sqrt(sum(v * v for v in x))
        if norm == 0:
            continue
        v = list(x)
        v[0] += norm if v[0] >= 0 else -norm
        vnorm2 = sum(t * t for t in v)
        if vnorm2 == 0:
            continue
        # apply P = I - 2 v v^T / (v^T v) on both sides of trailing block
        m = n - k - 1
        sub = [[a[k + 1 + i][k + 1 + j] for j in range(m)] for i in range(m)]
        Av = [sum(sub[i][j] * v[j] for j in range(m)) for i in range(m)]
        beta = w.mpf(2) / vnorm2
        gamma = beta * beta / 2 * sum(v[i] * Av[i] for i in range(m))
        u = [beta * Av[i] - gamma * v[i] for i in range(m)]
        for i in range(m):
            for j in range(m):
                sub[i][j] -= v[i] * u[j] + u[i] * v[j]
        for i in range(m):
            for j in range(m):
                a[k + 1 + i][k + 1 + j] = sub[i][j]
        head = -norm if x[0] >= 0 else norm
        a[k + 1][k] = head
        a[k][k + 1] = head
        for i in range(k + 2, n):
            a[i][k] = w.mpf(0)
            a[k][i] = w.mpf(0)
    diag = [a[i][i] for i in range(n)]
    sub = [a[i + 1][i] for i in range(n - 1)]
    return diag, sub


def _sturm_count(diag, sub, sigma, w):
    """Number of eigenvalues of the tridiagonal matrix strictly below sigma."""
    count = 0
    d = w.mpf(1)
    tiny = w.mpf(2) ** (-(w.prec * 2))
    for i in range(len(diag)):
        off = sub[i - 1] if i > 0 else w.mpf(0)
        d = (diag[i] - sigma) - (off * off) / d if d != 0 else (diag[i] - sigma) - (
            off * off
        ) / tiny
        if d < 0:
            count += 1
        elif d == 0:
            d = -tiny
            count += 1
    return count


def _eig_by_sturm(A, ctx, *, smallest, rel_tol=None):
    w = ctx.working(30)
    rows = _as_rows(A)
    n = len(rows)
    if n == 1:
        return ctx.mpf(rows[0][0])
    diag, sub = _householder_tridiagonal(rows, ctx)
    radius = [abs(sub[0])] + [
        (abs(sub[i - 1]) if i > 0 else 0) + (abs(sub[i]) if i < n - 1 else 0)
        for i in range(1, n)
    ]
    lo = min(diag[i] - radius[i] for i in range(n))
    hi = max(diag[i] + radius[i] for i in range(n))
    if rel_tol is None:
        rel_tol = w.mpf(2) ** (-(ctx.bits - 8))
    else:
        rel_tol = w.mpf(rel_tol)
    want = 1 if smallest else n  # index of the eigenvalue we bracket
    scale = max(abs(lo), abs(hi), w.mpf(2) ** (-ctx.bits))
    for _ in range(4 * ctx.bits):
        mid = (lo + hi) / 2
        if _sturm_count(diag, sub, mid, w) >= want:
            hi = mid
        else:
            lo = mid
        if hi - lo <= rel_tol * scale:
            break
    return ctx.mpf((lo + hi) / 2)


def min_eig_spd(A, ctx):
    """Smallest eigenvalue of a symmetric matrix by Sturm-sequence bisection.

    Relative accuracy ~2^{-bits+8} against the Gershgorin scale; intended for
    Gram matrices whose smallest eigenvalue is the observability constant's
    reciprocal.
    """
    return _eig_by_sturm(A, ctx, smallest=True)


def max_eig_sym(A, ctx):
    """Largest eigenvalue of a symmetric matrix (same bisection machinery)."""
    return _eig_by_sturm(A, ctx, smallest=False)
