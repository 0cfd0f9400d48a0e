"""Figures written next to the CSV/JSON outputs of a run."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "figure.dpi": 120,
    "savefig.bbox": "tight",
}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_slice(grid, path, axis: int = 2, index: int | None = None, title: str = ""):
    """|u| and Re u on one voxel plane."""
    if index is None:
        index = grid.resolution[axis] // 2
    vals = np.take(np.asarray(grid.values, complex), index, axis=axis)
    other = [i for i in range(3) if i != axis]
    lo, hi = np.array(grid.box.lo), np.array(grid.box.hi)
    extent = [lo[other[0]], hi[other[0]], lo[other[1]], hi[other[1]]]
    names = "xyz"
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 2, figsize=(8, 3.4))
        for ax, data, label in zip(axes, (np.abs(vals), vals.real), ("|u|", "Re u")):
            im = ax.imshow(data.T, origin="lower", extent=extent, cmap="viridis")
            ax.set_xlabel(names[other[0]])
            ax.set_ylabel(names[other[1]])
            ax.set_title(label)
            fig.colorbar(im, ax=ax, shrink=0.85)
        if title:
            fig.suptitle(title)
        return _save(fig, path)


def plot_probe_planes(points, values, path, reference=None):
    """|u| on each constant-z probe plane (and |u - reference| when given)."""
    zs = np.unique(np.round(points[:, 2], 12))
    ncol = 2 if reference is not None else 1
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(len(zs), ncol, figsize=(3.6 * ncol, 3.0 * len(zs)), squeeze=False)
        for row, z in enumerate(zs):
            sel = np.isclose(points[:, 2], z)
            p = points[sel]
            sc = axes[row, 0].scatter(p[:, 0], p[:, 1], c=np.abs(values[sel]), cmap="viridis", s=40)
            axes[row, 0].set_title(f"|u|, z = {z:g}")
            fig.colorbar(sc, ax=axes[row, 0])
            if reference is not None:
                sc = axes[row, 1].scatter(p[:, 0], p[:, 1], c=np.abs(values[sel] - reference[sel]),
                                          cmap="magma", s=40)
                axes[row, 1].set_title(f"|u - u_ref|, z = {z:g}")
                fig.colorbar(sc, ax=axes[row, 1])
            for ax in axes[row]:
                ax.set_aspect("equal")
                ax.set_xlabel("x")
                ax.set_ylabel("y")
        return _save(fig, path)


def plot_ensemble(centers, path, box=None):
    """Orthogonal projections of the particle centers."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 3, figsize=(9, 3))
        for ax, (i, j) in zip(axes, ((0, 1), (0, 2), (1, 2))):
            if len(centers):
                ax.plot(centers[:, i], centers[:, j], ".", ms=2, color="k")
            if box is not None:
                ax.set_xlim(box.lo[i], box.hi[i])
                ax.set_ylim(box.lo[j], box.hi[j])
            ax.set_xlabel("xyz"[i])
            ax.set_ylabel("xyz"[j])
            ax.set_aspect("equal")
        fig.suptitle(f"{len(centers)} particles")
        return _save(fig, path)


def plot_convergence(a_values, discrepancies, path, label="many-body vs homogenized", extra=None):
    """Log-log discrepancy against particle radius."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.2, 3.2))
        series_all = [np.asarray(discrepancies, float)] + [np.asarray(v, float) for v in (extra or {}).values()]
        ax.plot(a_values, discrepancies, "o-", label=label)
        for name, series in (extra or {}).items():
            ax.plot(a_values, series, "s--", label=name)
        ax.set_xscale("log")
        # all-zero data (e.g. an empty medium) stays on a linear axis
        if all(np.all(s > 0) for s in series_all):
            ax.set_yscale("log")
        ax.set_xlabel("particle radius a")
        ax.set_ylabel("sup-norm discrepancy")
        ax.invert_xaxis()
        ax.legend()
        ax.grid(True, which="both", alpha=0.3)
        return _save(fig, path)
