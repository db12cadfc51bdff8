"""Batch experiment runner exposing every module as a subcommand.

Subcommands: `eig` (eigenvalues and boundary fluxes), `gram` (window Gram
matrices), `specineq` (observability sweep), `interp` (interior
interpolation constants), `control` (moment-method null control against
its exponential cost bound), `heat-obs` (measurable-time-set heat
observability), and `all` (default grid of each plus a summary mapping
every CSV to the claim it checks).

Configuration is line-oriented ``key = value`` text; every flag overrides
the file.  Each CSV starts with ``#`` comment lines carrying the tool
version, a hash of the effective configuration, and a plain-language
statement of the claim the file checks, so a row is always traceable to
the exact run that produced it.  Files are written atomically (temp +
rename), partial outputs are removed on failure, and reruns with the same
configuration and seed are byte-identical.  Unless ``--no-plots`` is set,
a PNG rendering is drawn beside each CSV.

Exit codes: 0 success, 1 validation error, 2 invariant violation (a
claimed inequality failed on the computed data), 3 precision exhausted.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .elliptic import draw_spectral_data, interpolation_check
from .heat import (
    MeasurableTimeSet,
    default_measurable_set,
    verify_measurable_observability,
)
from .moment import (
    _cost_bound_at,
    cost_vs_bound,
    fit_universal_constant,
    synthesize_control,
    verify_null_control,
)
from .numerics import PrecisionContext, PrecisionExhaustedError
from .specineq import gram_matrix, observability_sweep
from .spectral import boundary_flux, check_spectral_gap, eigensystem

SUBCOMMANDS = ("eig", "gram", "specineq", "interp", "control", "heat-obs", "all")

# keys that shape the computed numbers; out/no_plots only route the output
_SCIENCE_KEYS = (
    "alpha_grid",
    "bits",
    "delta_grid",
    "horizon",
    "measurable_set",
    "method",
    "n_max",
    "sample_count",
    "seed",
    "window",
)


@dataclass
class ExperimentConfig:
    """Effective run configuration; `measurable_set = None` means the
    default two-interval set of measure 5T/16."""

    alpha_grid: tuple = (0.0, 0.5, 1.0, 1.5)
    n_max: int = 6
    horizon: float = 1.0
    window: tuple = (0.2, 0.8)
    measurable_set: tuple = None
    bits: int = 256
    seed: int = 7
    sample_count: int = 50
    delta_grid: tuple = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    method: str = "bessel"
    out: str = "results"
    no_plots: bool = False

    def validated(self):
        """Resolved copy with every precondition checked; ValueError on
        the first violation."""
        for a in self.alpha_grid:
            if not 0 <= float(a) < 2:
                raise ValueError(f"alpha must lie in [0, 2), got {a}")
        if not self.alpha_grid:
            raise ValueError("alpha grid must be nonempty")
        if self.n_max < 1:
            raise ValueError(f"need at least one mode, got n_max = {self.n_max}")
        if self.horizon <= 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        a, b = self.window
        if not 0 <= a < b <= 1:
            raise ValueError(f"window must satisfy 0 <= a < b <= 1, got {self.window}")
        if self.bits < 53:
            raise ValueError(f"need at least 53 bits, got {self.bits}")
        if self.method not in ("bessel", "fem"):
            raise ValueError(f"method must be bessel or fem, got {self.method!r}")
        if self.sample_count < 1:
            raise ValueError(f"need at least one sample, got {self.sample_count}")
        if not self.delta_grid or any(not 0 < d < 1 for d in self.delta_grid):
            raise ValueError("delta grid must be nonempty inside (0, 1)")
        intervals = self.measurable_set
        if intervals is None:
            intervals = default_measurable_set(self.horizon).intervals
        E = MeasurableTimeSet(tuple(intervals))
        if E.end > self.horizon + 1e-12:
            raise ValueError(
                f"measurable set reaches {E.end}, beyond horizon {self.horizon}"
            )
        return dataclasses.replace(self, measurable_set=E.intervals)

    def dump(self):
        """`key = value` text, re-parsable as a config file."""
        values = {
            "alpha_grid": _fmt_list(self.alpha_grid),
            "bits": str(self.bits),
            "delta_grid": _fmt_list(self.delta_grid),
            "horizon": _fmt(self.horizon),
            "measurable_set": _fmt_intervals(self.measurable_set),
            "method": self.method,
            "n_max": str(self.n_max),
            "no_plots": str(self.no_plots).lower(),
            "out": self.out,
            "sample_count": str(self.sample_count),
            "seed": str(self.seed),
            "window": _fmt_list(self.window),
        }
        return "".join(f"{k} = {values[k]}\n" for k in sorted(values))

    def science_hash(self):
        """First 12 hex digits of the hash of every number-shaping key."""
        resolved = self.validated()
        lines = [
            line
            for line in resolved.dump().splitlines()
            if line.split(" = ")[0] in _SCIENCE_KEYS
        ]
        return hashlib.sha256("\n".join(lines).encode()).hexdigest()[:12]


def _fmt(v):
    return repr(float(v))


def _fmt_list(values):
    return ", ".join(_fmt(float(v)) for v in values)


def _fmt_intervals(intervals):
    if intervals is None:
        return "default"
    return "; ".join(f"{_fmt(float(a))},{_fmt(float(b))}" for a, b in intervals)


def _parse_floats(text):
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError as exc:
        raise ValueError(f"expected comma-separated numbers, got {text!r}") from exc


def _parse_pair(text):
    vals = _parse_floats(text)
    if len(vals) != 2:
        raise ValueError(f"expected exactly two numbers a,b, got {text!r}")
    return vals


def _parse_intervals(text):
    if text.strip() == "default":
        return None
    out = []
    for part in text.split(";"):
        out.append(_parse_pair(part.strip()))
    return tuple(out)


def _parse_bool(text):
    low = text.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"expected true/false, got {text!r}")


_COERCERS = {
    "alpha_grid": _parse_floats,
    "n_max": int,
    "horizon": float,
    "window": _parse_pair,
    "measurable_set": _parse_intervals,
    "bits": int,
    "seed": int,
    "sample_count": int,
    "delta_grid": _parse_floats,
    "method": str.strip,
    "out": str.strip,
    "no_plots": _parse_bool,
}


def parse_config_text(text):
    """`key = value` lines -> typed override dict; '#' starts a comment."""
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise ValueError(f"config line {lineno} is not `key = value`: {raw!r}")
        if key not in _COERCERS:
            raise ValueError(f"unknown config key {key!r} on line {lineno}")
        overrides[key] = _COERCERS[key](value.strip())
    return overrides


def _atomic_write_bytes(path, data):
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)


class _Emitter:
    """Atomic CSV/PNG writer that can undo everything it wrote."""

    def __init__(self, outdir, cfg):
        self.outdir = outdir
        self.cfg = cfg
        self.cfg_hash = cfg.science_hash()
        self.written = []
        self.claims = []

    def emit(self, name, columns, rows, claim, *, render=None, extra=()):
        buf = io.StringIO()
        buf.write(f"# degenspec {__version__} config {self.cfg_hash}\r\n")
        buf.write(f"# claim: {claim}\r\n")
        for line in extra:
            buf.write(f"# {line}\r\n")
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
        path = self.outdir / name
        _atomic_write_bytes(path, buf.getvalue().encode())
        self.written.append(path)
        self.claims.append((name, claim))
        if render is not None and not self.cfg.no_plots:
            from . import report

            png = path.with_suffix(".png")
            tmp = png.with_name(png.name + f".tmp{os.getpid()}")
            report.RENDERERS[render](rows, tmp)
            os.replace(tmp, png)
            self.written.append(png)

    def summary(self):
        lines = [f"# degenspec {__version__} config {self.cfg_hash}\r\n"]
        lines += [f"{name}: {claim}\r\n" for name, claim in self.claims]
        path = self.outdir / "summary.txt"
        _atomic_write_bytes(path, "".join(lines).encode())
        self.written.append(path)

    def cleanup(self):
        for path in self.written:
            path.unlink(missing_ok=True)


def _cell(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return repr(float(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def _run_eig(cfg, ctx, em):
    rows = []
    for alpha in cfg.alpha_grid:
        for pair in eigensystem(alpha, cfg.n_max, ctx, method=cfg.method):
            rows.append(
                (
                    alpha,
                    pair.index,
                    float(pair.lam),
                    float(boundary_flux(pair, ctx)),
                    pair.provenance,
                )
            )
    em.emit(
        "eig.csv",
        ("alpha", "j", "lambda", "flux_at_1", "provenance"),
        rows,
        "Eigenvalues and x=1 fluxes of -(x^alpha u')' on (0,1) with the "
        "degenerate boundary condition at 0; at alpha = 0 the j-th "
        "eigenvalue is (j pi)^2.",
        render="eig",
    )


def _run_gram(cfg, ctx, em):
    rows = []
    a, b = cfg.window
    for alpha in cfg.alpha_grid:
        pairs = eigensystem(alpha, cfg.n_max, ctx, method=cfg.method)
        G = gram_matrix(pairs, cfg.window, ctx)
        for j in range(cfg.n_max):
            for k in range(cfg.n_max):
                rows.append((alpha, cfg.n_max, a, b, j + 1, k + 1, float(G[j][k])))
    em.emit(
        "gram.csv",
        ("alpha", "N", "window_a", "window_b", "j", "k", "value"),
        rows,
        "Window Gram matrices int_w Phi_j Phi_k of the first N "
        "eigenfunctions; the smallest eigenvalue of G_N sets how "
        "observable N-mode packets are from the window.",
        render="gram",
    )


def _run_specineq(cfg, ctx, em):
    rows = []
    a, b = cfg.window
    for alpha in cfg.alpha_grid:
        sweep = observability_sweep(
            alpha, list(range(1, cfg.n_max + 1)), cfg.window, ctx, method=cfg.method
        )
        for r in sweep["rows"]:
            rows.append(
                (
                    alpha,
                    r["n"],
                    float(r["lam_n"]),
                    float(r["lambda_min"]),
                    math.log(float(r["c_obs"])),
                    a,
                    b,
                )
            )
    em.emit(
        "specineq.csv",
        ("alpha", "N", "lambda_N", "lambda_min_gram", "log_cost", "window_a", "window_b"),
        rows,
        "Observability of eigenfunction packets from the window: the cost "
        "1/lambda_min(G_N) grows no faster than exp(C sqrt(lambda_N)).",
        render="specineq",
    )


def _run_interp(cfg, ctx, em):
    rows = []
    for ai, alpha in enumerate(cfg.alpha_grid):
        pairs = eigensystem(alpha, cfg.n_max, ctx, method=cfg.method)
        res = interpolation_check(
            cfg.sample_count,
            pairs,
            cfg.window,
            cfg.horizon,
            cfg.delta_grid,
            cfg.seed + ai,
            ctx,
        )
        for delta, minimal_c in res["table"]:
            rows.append(
                (delta, minimal_c, cfg.sample_count, alpha, cfg.n_max, cfg.seed + ai)
            )
    em.emit(
        "interp.csv",
        ("delta", "minimal_c", "sample_count", "alpha", "N", "seed"),
        rows,
        "Interior interpolation: the solution's H1 norm on the middle "
        "third of the window over (0, T/4) is at most c times "
        "(global norm)^(1-delta) (data norm)^delta; minimal c per delta "
        "over the sample.",
        render="interp",
    )


def _run_control(cfg, ctx, em):
    cells = []
    records = []
    for ai, alpha in enumerate(cfg.alpha_grid):
        gamma_hat = check_spectral_gap(alpha, ctx)["gamma_hat"]
        pairs_full = eigensystem(alpha, cfg.n_max, ctx, method=cfg.method)
        for n in range(1, cfg.n_max + 1):
            pairs = pairs_full[:n]
            rng = np.random.default_rng((cfg.seed, ai, n))
            data = draw_spectral_data(pairs, rng)
            syn = synthesize_control(
                data, pairs, cfg.window, cfg.horizon, ctx, gamma_hat=gamma_hat
            )
            ver = verify_null_control(data, syn, pairs, cfg.window, cfg.horizon, ctx)
            cb = cost_vs_bound(
                syn, syn.mu, pairs, cfg.window, cfg.horizon, 1.0, ctx
            )
            records.append(cb["record"])
            cells.append(
                (
                    alpha,
                    n,
                    float(syn.cost),
                    float(ver["relative"]),
                    float(syn.family.residual),
                    cb["record"],
                )
            )
    c_star = fit_universal_constant(records, ctx)
    if not math.isfinite(c_star):
        raise AssertionError(
            "no single constant certifies the cost bounds across this grid"
        )
    rows = []
    for alpha, n, cost, terminal, biortho, record in cells:
        bound = float(_cost_bound_at(record, c_star, ctx))
        ratio = cost / bound if bound > 0 else math.inf
        if ratio > 1 + 1e-9:
            raise AssertionError(
                f"cost exceeds the fitted bound at (alpha={alpha}, N={n})"
            )
        rows.append(
            (alpha, n, cfg.horizon, cfg.bits, cost, ratio, terminal, biortho)
        )
    em.emit(
        "control.csv",
        (
            "alpha",
            "N",
            "T",
            "bits",
            "cost",
            "bound_ratio",
            "terminal_residual",
            "biortho_residual",
        ),
        rows,
        "Moment-method null control: random N-mode data steered exactly "
        "to rest at time T, with biorthogonal residual <= 1e-8 and cost "
        "below the fitted universal exponential bound.",
        render="control",
        extra=(f"fitted universal constant c = {c_star!r}",),
    )


def _run_heat(cfg, ctx, em):
    rows = []
    E = MeasurableTimeSet(cfg.measurable_set)
    for ai, alpha in enumerate(cfg.alpha_grid):
        pairs = eigensystem(alpha, cfg.n_max, ctx, method=cfg.method)
        out = verify_measurable_observability(
            cfg.sample_count, pairs, cfg.window, E, cfg.horizon, cfg.seed + ai, ctx
        )
        rows.append(
            (
                alpha,
                cfg.n_max,
                cfg.horizon,
                out["measure"],
                out["n_intervals"],
                out["fitted_K3"],
                cfg.seed + ai,
            )
        )
    em.emit(
        "heat.csv",
        ("alpha", "N", "T", "measure_E", "n_intervals", "fitted_K3", "seed"),
        rows,
        "Heat observability from a measurable time set: every sampled "
        "ratio ||e^{-TP} y0|| / int_{w x E} |y| is finite and K3 is their "
        "maximum.",
        render="heat",
    )


_RUNNERS = {
    "eig": _run_eig,
    "gram": _run_gram,
    "specineq": _run_specineq,
    "interp": _run_interp,
    "control": _run_control,
    "heat-obs": _run_heat,
}


def run(subcommand, config):
    """Execute one subcommand (or `all`); returns 0, writes under
    config.out.  Raises on validation or invariant failure; callers map
    exceptions to exit codes (see main)."""
    if subcommand not in SUBCOMMANDS:
        raise ValueError(f"unknown subcommand {subcommand!r}")
    cfg = config.validated()
    ctx = PrecisionContext(cfg.bits)
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    em = _Emitter(outdir, cfg)
    try:
        names = _RUNNERS if subcommand == "all" else (subcommand,)
        for name in names:
            _RUNNERS[name](cfg, ctx, em)
        if subcommand == "all":
            em.summary()
    except BaseException:
        em.cleanup()
        raise
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValueError(message)


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", metavar="A1,A2,...", help="alpha grid")
    common.add_argument("--n-max", type=int, metavar="N", help="modes per cell")
    common.add_argument("--horizon", type=float, metavar="T", help="time horizon")
    common.add_argument("--window", metavar="A,B", help="observation window")
    common.add_argument(
        "--measurable-set",
        metavar="T0,T1;T2,T3",
        help="observation time set for heat-obs (default: measure 5T/16)",
    )
    common.add_argument("--bits", type=int, metavar="B", help="working precision")
    common.add_argument("--seed", type=int, metavar="S", help="sampling seed")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--method", choices=("bessel", "fem"), help="eigensolver")
    common.add_argument("--config", metavar="FILE", help="key = value config file")
    common.add_argument(
        "--print-config",
        action="store_true",
        help="print the effective configuration and exit",
    )
    common.add_argument(
        "--no-plots", action="store_true", help="skip PNG rendering"
    )
    parser = _Parser(prog="degenspec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(
        dest="subcommand", required=True, parser_class=_Parser
    )
    descriptions = {
        "eig": "eigenvalues and boundary fluxes",
        "gram": "window Gram matrices",
        "specineq": "observability sweep over N",
        "interp": "interior interpolation constants",
        "control": "null control against the cost bound",
        "heat-obs": "measurable-time-set heat observability",
        "all": "every experiment plus a summary",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=descriptions[name])
    return parser


def _config_from_args(args):
    overrides = {}
    if args.config is not None:
        overrides.update(parse_config_text(Path(args.config).read_text()))
    flag_map = {
        "alpha": ("alpha_grid", _parse_floats),
        "n_max": ("n_max", None),
        "horizon": ("horizon", None),
        "window": ("window", _parse_pair),
        "measurable_set": ("measurable_set", _parse_intervals),
        "bits": ("bits", None),
        "seed": ("seed", None),
        "out": ("out", None),
        "method": ("method", None),
    }
    for attr, (key, coerce) in flag_map.items():
        value = getattr(args, attr)
        if value is not None:
            overrides[key] = coerce(value) if coerce else value
    if args.no_plots:
        overrides["no_plots"] = True
    return ExperimentConfig(**overrides)


def main(argv=None):
    try:
        args = _build_parser().parse_args(argv)
        cfg = _config_from_args(args)
        if args.print_config:
            sys.stdout.write(cfg.validated().dump())
            return 0
        return run(args.subcommand, cfg)
    except PrecisionExhaustedError as exc:
        return _fail("precision-exhausted", exc, 3)
    except (AssertionError, ArithmeticError) as exc:
        return _fail("invariant-violation", exc, 2)
    except (ValueError, OSError) as exc:
        return _fail("validation", exc, 1)


def _fail(kind, exc, code):
    message = " ".join(str(exc).split()) or exc.__class__.__name__
    print(f"error: {kind}: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
