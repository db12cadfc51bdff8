"""Figure rendering for the experiment runner.

One PNG is drawn beside each CSV the runner emits, on the Agg backend
with fixed geometry and no timestamp metadata so reruns are reproducible.
Rows arrive exactly as written to the CSV (same column order).
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

FIGSIZE = (6.4, 4.2)
DPI = 110


def _save(fig, path):
    # format pinned: the runner hands a temp name for the atomic rename
    fig.savefig(path, dpi=DPI, format="png", metadata={"Date": None})
    plt.close(fig)


def _by_alpha(rows, key_idx=0):
    groups = {}
    for row in rows:
        groups.setdefault(row[key_idx], []).append(row)
    return groups


def render_eig(rows, path):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for alpha, grp in _by_alpha(rows).items():
        ax.semilogy([r[1] for r in grp], [r[2] for r in grp], "o-",
                    label=f"alpha = {alpha}")
    ax.set_xlabel("mode index j")
    ax.set_ylabel("eigenvalue lambda_j")
    ax.set_title("Spectrum of -(x^alpha u')' on (0, 1)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def render_gram(rows, path):
    groups = _by_alpha(rows)
    fig, axes = plt.subplots(
        1, len(groups), figsize=(3.2 * len(groups), 3.4), squeeze=False
    )
    for ax, (alpha, grp) in zip(axes[0], groups.items()):
        n = max(r[4] for r in grp)
        mat = [[0.0] * n for _ in range(n)]
        for r in grp:
            mat[r[4] - 1][r[5] - 1] = math.log10(abs(r[6]) + 1e-300)
        im = ax.imshow(mat, origin="lower", extent=(0.5, n + 0.5, 0.5, n + 0.5))
        ax.set_title(f"alpha = {alpha}")
        ax.set_xlabel("k")
        ax.set_ylabel("j")
        fig.colorbar(im, ax=ax, shrink=0.8, label="log10 |G_jk|")
    fig.suptitle("Window Gram matrices")
    fig.tight_layout()
    _save(fig, path)


def render_specineq(rows, path):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for alpha, grp in _by_alpha(rows).items():
        ax.plot(
            [math.sqrt(r[2]) for r in grp],
            [r[4] for r in grp],
            "o-",
            label=f"alpha = {alpha}",
        )
    ax.set_xlabel("sqrt(lambda_N)")
    ax.set_ylabel("log observability cost  log(1/lambda_min)")
    ax.set_title("Spectral-inequality cost growth")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def render_interp(rows, path):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for alpha, grp in _by_alpha(rows, key_idx=3).items():
        ax.semilogy([r[0] for r in grp], [r[1] for r in grp], "o-",
                    label=f"alpha = {alpha}")
    ax.set_xlabel("delta")
    ax.set_ylabel("minimal constant c")
    ax.set_title("Interior interpolation constants")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def render_control(rows, path):
    fig, (ax_cost, ax_ratio) = plt.subplots(1, 2, figsize=(9.6, 4.2))
    for alpha, grp in _by_alpha(rows).items():
        ns = [r[1] for r in grp]
        ax_cost.semilogy(ns, [max(r[4], 1e-300) for r in grp], "o-",
                         label=f"alpha = {alpha}")
        ax_ratio.semilogy(ns, [max(r[5], 1e-300) for r in grp], "o-",
                          label=f"alpha = {alpha}")
    ax_cost.set_xlabel("modes steered N")
    ax_cost.set_ylabel("control cost")
    ax_cost.set_title("Null-control cost")
    ax_ratio.axhline(1.0, color="k", lw=0.8, ls="--")
    ax_ratio.set_xlabel("modes steered N")
    ax_ratio.set_ylabel("cost / fitted bound")
    ax_ratio.set_title("Cost against the exponential bound")
    for ax in (ax_cost, ax_ratio):
        ax.grid(True, alpha=0.3)
        ax.legend()
    fig.tight_layout()
    _save(fig, path)


def render_heat(rows, path):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    alphas = [r[0] for r in rows]
    k3 = [r[5] for r in rows]
    ax.semilogy(alphas, k3, "o-", label="fitted K3")
    if len(rows) > 1 and k3[0] > 0:
        guide = [k3[0] * ((2 - alphas[0]) / (2 - a)) ** 4 for a in alphas]
        ax.semilogy(alphas, guide, "--", label="(2 - alpha)^-4 guide")
    ax.set_xlabel("alpha")
    ax.set_ylabel("observability constant K3")
    ax.set_title("Measurable-time-set observability")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


RENDERERS = {
    "eig": render_eig,
    "gram": render_gram,
    "specineq": render_specineq,
    "interp": render_interp,
    "control": render_control,
    "heat": render_heat,
}
