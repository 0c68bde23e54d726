"""CSV, JSON and SVG emitters for the command-line reports.

SVG output is made reproducible by fixing matplotlib's hash salt and
dropping the date from the metadata, so identical inputs give identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

matplotlib.rcParams.update({
    "svg.hashsalt": "homfield",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
})

SVG_META = {"Date": None, "Creator": None}


def _plain(x):
    """Make numpy / complex values JSON-friendly."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_json(path: Path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_plain(payload), indent=2, sort_keys=True) + "\n")
    return path


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Rows are written with ``repr`` floats so the text round-trips exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def read_csv(path: Path) -> dict[str, np.ndarray]:
    with Path(path).open() as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], rows[1:]
    return {h: np.array([float(r[i]) for r in body]) for i, h in enumerate(head)}


def save_svg(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=SVG_META)
    plt.close(fig)
    return path


def _closed(x):
    x = np.asarray(x)
    return np.append(x, x[:1])


def plot_field(L, rays, path: Path) -> Path:
    """p, q and Re(q conj p) over the circle, with the characteristic rays marked."""
    th = L.p.theta
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
    ax = axes[0]
    for f, name in ((L.p, "p"), (L.q, "q")):
        ax.plot(th, f.samples.real, label=f"Re {name}")
        ax.plot(th, f.samples.imag, "--", label=f"Im {name}")
    ax.set_xlabel(r"$\theta$")
    ax.legend(fontsize=7, ncol=2)
    ax = axes[1]
    ax.plot(th, L.re_qpbar.samples.real, color="k")
    for r in rays:
        ax.axvline(r.theta, color="tab:red" if r.sign_change else "tab:orange", lw=0.8)
    ax.axhline(0, color="0.5", lw=0.6)
    ax.set_title(r"Re$(q\bar p)$ and characteristic rays")
    ax.set_xlabel(r"$\theta$")
    fig.tight_layout()
    return save_svg(fig, path)


def plot_first_integral(Z, path: Path) -> Path:
    from .integral import fi_eval

    th = Z.phi.theta
    z = fi_eval(Z, np.ones_like(th), th)
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
    axes[0].plot(th, np.abs(z), color="k")
    axes[0].set_title(r"$|Z|$ on the unit circle")
    axes[0].set_xlabel(r"$\theta$")
    axes[1].plot(_closed(z.real), _closed(z.imag), color="tab:blue")
    axes[1].set_aspect("equal", adjustable="datalim")
    axes[1].set_title(f"Z(unit circle), image: {Z.image}")
    fig.tight_layout()
    return save_svg(fig, path)


def plot_envelope(th, R_dom, R_env, z_dom, z_env, path: Path) -> Path:
    """Triptych: the domain, its envelope, and their common image under Z."""
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.8))
    for ax, R, title in ((axes[0], R_dom, "domain"), (axes[1], R_env, "envelope")):
        ax.fill(_closed(R * np.cos(th)), _closed(R * np.sin(th)), alpha=0.25)
        ax.plot(_closed(R * np.cos(th)), _closed(R * np.sin(th)), color="k")
        ax.set_aspect("equal", adjustable="datalim")
        ax.set_title(title)
    axes[1].plot(_closed(R_dom * np.cos(th)), _closed(R_dom * np.sin(th)), ":", color="0.4")
    ax = axes[2]
    ax.plot(_closed(z_dom.real), _closed(z_dom.imag), color="tab:blue", label="Z(domain)")
    ax.plot(_closed(z_env.real), _closed(z_env.imag), "--", color="tab:red", label="Z(envelope)")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_title("images")
    ax.legend(fontsize=7)
    fig.tight_layout()
    return save_svg(fig, path)


def plot_rh(sol, inp, path: Path, n: int = 161) -> Path:
    """|w| on a grid of the punctured disc and the boundary residual trace."""
    from .periodic import grid, pf_eval

    x = np.linspace(-1, 1, n)
    X, Y = np.meshgrid(x, x)
    Zg = X + 1j * Y
    inside = (np.abs(Zg) <= 1) & (np.abs(Zg) > 0.05)
    W = np.full(Zg.shape, np.nan)
    W[inside] = np.abs(sol(Zg[inside]))
    tau = grid(1024)
    w = sol(np.exp(1j * tau))
    res = (pf_eval(inp.Lambda2, tau) * w).real - pf_eval(inp.Phi2, tau).real
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.8))
    im = axes[0].imshow(np.log10(W + 1e-300), extent=(-1, 1, -1, 1), origin="lower",
                        cmap="viridis", interpolation="nearest")
    fig.colorbar(im, ax=axes[0], label=r"$\log_{10}|w|$")
    axes[0].set_aspect("equal")
    axes[0].set_title(rf"$\kappa$ = {sol.kappa}, n = {sol.n}")
    axes[1].plot(tau, res, color="k")
    axes[1].set_title(r"Re$(\Lambda_2 w) - \Phi_2$ on $|z| = 1$")
    axes[1].set_xlabel(r"$\tau$")
    fig.tight_layout()
    return save_svg(fig, path)


def plot_series(norms, C2, path: Path) -> Path:
    j = np.arange(len(norms))
    fig, ax = plt.subplots(figsize=(5, 3.4))
    good = np.asarray(norms) > 0
    ax.semilogy(j[good], np.asarray(norms)[good], "o-", ms=3, label=r"$\|v_j\|_\infty$")
    if C2 > 0:
        ax.semilogy(j, 10 * C2 ** j, ":", color="0.4", label=r"$10\,C_2^j$")
    ax.set_xlabel("degree j")
    ax.legend(fontsize=7)
    fig.tight_layout()
    return save_svg(fig, path)


def plot_ladder(rows, path: Path) -> Path:
    nodes = [r[0] for r in rows]
    errs = [max(r[1], 1e-18) for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.loglog(nodes, errs, "o-")
    ax.set_xlabel("quadrature nodes")
    ax.set_ylabel(r"$|\langle Lu,\Phi\rangle - \Phi(0)|$")
    fig.tight_layout()
    return save_svg(fig, path)
