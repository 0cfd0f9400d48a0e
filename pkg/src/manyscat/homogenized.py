"""Volume integral equation of the homogenized medium on a voxel grid.

Solves u(x) + int_D G(x, y) q(y) u(y) dy = u0(x) with q = q0 + p, by the
Nystrom midpoint rule. The weakly singular self-cell integral is replaced by
the integral of G over a ball of the voxel's volume. Off-diagonal weights form
a three-level Toeplitz matrix, applied with zero-padded FFTs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.sparse.linalg as spla

from .geometry import GridField, voxel_centers
from .kernels import WaveContext
from .manybody import SolverError

log = logging.getLogger(__name__)

#: k * (largest voxel spacing) above which results carry a stability warning
STABLE_K_SPACING = 0.5
DENSE_THRESHOLD = 1000


@dataclass(frozen=True, eq=False)
class LSResult(GridField):
    """Solution grid plus solver diagnostics. ``q`` is the total potential used."""

    q: GridField | None = None
    residual_norm: float = 0.0
    iterations: int = 0
    solver_kind: str = "dense"
    stable: bool = True
    residual_history: tuple = ()


def self_term(voxel_volume: float, k: float) -> complex:
    """Integral of exp(ik|y|)/(4 pi |y|) over the ball of volume ``voxel_volume``.

    Closed form (exp(ikR)(1 - ikR) - 1)/k^2 with R the equivalent radius; a
    power series is used for small kR to avoid cancellation.
    """
    if not voxel_volume > 0:
        raise ValueError("voxel_volume must be positive")
    R = (3 * voxel_volume / (4 * np.pi)) ** (1 / 3)
    x = k * R
    if x < 0.1:
        # (1 - ix) e^{ix} - 1 = sum_{m>=2} (1 - m) (ix)^m / m!
        total = 0j
        fact = 2.0
        for m in range(2, 16):
            total += (1 - m) * (1j**m) * x ** (m - 2) / fact
            fact *= m + 1
        return complex(R**2 * total)
    return complex((np.exp(1j * x) * (1 - 1j * x) - 1) / k**2)


def _offset_kernel(resolution, spacing, k: float) -> np.ndarray:
    """Weights G(offset) * |voxel| on the doubled periodic grid, self term at 0."""
    vol = float(np.prod(spacing))
    axes = []
    for n, h in zip(resolution, spacing):
        idx = np.arange(2 * n)
        off = np.where(idx < n, idx, idx - 2 * n).astype(float)
        off[n] = 0.0  # wrap-around slot, never reached by a real offset
        axes.append(off * h)
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    r = np.sqrt(X**2 + Y**2 + Z**2)
    with np.errstate(divide="ignore", invalid="ignore"):
        K = np.exp(1j * k * r) / (4 * np.pi * r) * vol
    K[r == 0] = 0.0
    K[0, 0, 0] = self_term(vol, k)
    return K


class VolumeOperator:
    """v -> v + W (q v) on a voxel grid, W the Nystrom weight matrix."""

    def __init__(self, q: GridField, k: float, workers: int | None = None):
        self.q = q
        self.k = k
        self.res = q.resolution
        self.n = int(np.prod(self.res))
        self.workers = workers
        K = _offset_kernel(self.res, q.spacing, k)
        self._Khat = scipy.fft.fftn(K, workers=workers)
        self._qflat = q.flat().astype(complex)

    @property
    def shape(self):
        return (self.n, self.n)

    def convolve(self, s: np.ndarray) -> np.ndarray:
        """Sum_j W_ij s_j for a flat source vector ``s``."""
        nx, ny, nz = self.res
        pad = np.zeros((2 * nx, 2 * ny, 2 * nz), dtype=complex)
        pad[:nx, :ny, :nz] = s.reshape(self.res)
        out = scipy.fft.ifftn(scipy.fft.fftn(pad, workers=self.workers) * self._Khat, workers=self.workers)
        return out[:nx, :ny, :nz].reshape(-1)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=complex).reshape(-1)
        return v + self.convolve(self._qflat * v)

    def dense(self) -> np.ndarray:
        pts = self.q.centers()
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        vol = self.q.voxel_volume
        with np.errstate(divide="ignore", invalid="ignore"):
            W = np.exp(1j * self.k * d) / (4 * np.pi * d) * vol
        W[np.diag_indices_from(W)] = self_term(vol, self.k)
        return np.eye(self.n) + W * self._qflat[None, :]

    def as_linear_operator(self) -> spla.LinearOperator:
        return spla.LinearOperator(self.shape, matvec=self.matvec, dtype=complex)


def total_potential(p: GridField, ctx: WaveContext) -> GridField:
    """q = q0 + p; q0 comes from the context's background grid when present."""
    if ctx.n0sq is None:
        return p.with_values(p.values.astype(complex))
    if not ctx.n0sq.conformal(p):
        raise ValueError("background grid must be conformal with p")
    return p.with_values(p.values + ctx.q0().values)


def _plane_wave(ctx: WaveContext, pts: np.ndarray) -> np.ndarray:
    return np.exp(1j * ctx.k * (pts @ np.asarray(ctx.alpha)))


def ls_solve(
    p: GridField,
    ctx: WaveContext,
    tol: float = 1e-10,
    method: str = "auto",
    dense_threshold: int = DENSE_THRESHOLD,
    workers: int | None = None,
    restart: int = 60,
    maxiter: int = 100,
) -> LSResult:
    """Solve the discretized integral equation for the total field on p's grid."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    q = total_potential(p, ctx)
    stable = bool(ctx.k * np.max(p.spacing) <= STABLE_K_SPACING)
    if not stable:
        log.warning("k * spacing = %.3g exceeds %.2g; wavelength under-resolved",
                    ctx.k * np.max(p.spacing), STABLE_K_SPACING)
    u0 = _plane_wave(ctx, p.centers())
    op = VolumeOperator(q, ctx.k, workers)
    if method == "auto":
        method = "dense" if op.n <= dense_threshold else "iterative"

    history: list[float] = []
    if not np.any(q.values):
        u, method, iterations = u0.copy(), "identity", 0
    elif method == "dense":
        u = np.linalg.solve(op.dense(), u0)
        iterations = 1
    elif method == "iterative":
        u, info = spla.gmres(
            op.as_linear_operator(), u0, rtol=tol, atol=0.0,
            restart=restart, maxiter=maxiter,
            callback=history.append, callback_type="pr_norm",
        )
        iterations = len(history)
        if info < 0:
            raise SolverError(f"GMRES breakdown (info={info})", history)
    else:
        raise ValueError(f"unknown method {method!r}")

    residual = float(np.linalg.norm(op.matvec(u) - u0) / np.linalg.norm(u0))
    if not np.isfinite(residual) or residual > 10 * tol:
        raise SolverError(
            f"volume solve diverged: residual {residual:.3e} > tol {tol:g}", history
        )
    return LSResult(
        p.box, p.resolution, u.reshape(p.resolution),
        q=q, residual_norm=residual, iterations=iterations,
        solver_kind=method, stable=stable, residual_history=tuple(history),
    )


def _sources(result: LSResult) -> tuple[np.ndarray, np.ndarray]:
    pts = result.centers()
    s = result.q.flat() * result.flat() * result.voxel_volume
    keep = s != 0
    return pts[keep], s[keep]


def field_at(result: LSResult, ctx: WaveContext, points) -> np.ndarray:
    """Total field u0(x) - sum_j G(x, x_j) q_j u_j |voxel| at points off the grid support."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    src, s = _sources(result)
    u = _plane_wave(ctx, pts).astype(complex)
    for start in range(0, len(pts), 256):
        blk = pts[start : start + 256]
        d = np.linalg.norm(blk[:, None, :] - src[None, :, :], axis=-1)
        u[start : start + len(blk)] -= (np.exp(1j * ctx.k * d) / (4 * np.pi * d)) @ s
    return u


def far_field_amplitude(result: LSResult, ctx: WaveContext, directions) -> np.ndarray:
    """f(xhat) with u - u0 ~ f exp(ikr)/r."""
    xhat = np.atleast_2d(np.asarray(directions, dtype=float))
    src, s = _sources(result)
    return -(np.exp(-1j * ctx.k * xhat @ src.T) @ s) / (4 * np.pi)


def _sphere_rule(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    phi = 2 * np.pi * np.arange(2 * order) / (2 * order)
    ct, ph = np.meshgrid(x, phi, indexing="ij")
    st = np.sqrt(1 - ct**2)
    dirs = np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=-1).reshape(-1, 3)
    weights = (w[:, None] * np.full(len(phi), 2 * np.pi / len(phi))[None, :]).reshape(-1)
    return dirs, weights


def power_balance(result: LSResult, ctx: WaveContext, order: int = 24) -> dict:
    """Extinct, scattered and absorbed power of the discrete solution.

    Extinction 4 pi Im f(alpha) and scattering k * int |f|^2 come from the
    far field of the voxel sources; absorption is their difference and must
    be >= 0 for a passive medium. ``absorbed_volume`` is the independent
    estimate -sum Im(q) |u|^2 |voxel|.
    """
    dirs, w = _sphere_rule(order)
    f = far_field_amplitude(result, ctx, dirs)
    f_fwd = far_field_amplitude(result, ctx, np.asarray(ctx.alpha))[0]
    extinct = 4 * np.pi * f_fwd.imag
    scattered = ctx.k * float(np.sum(w * np.abs(f) ** 2))
    absorbed_volume = -float(np.sum(result.q.values.imag * np.abs(result.values) ** 2)) * result.voxel_volume
    return {
        "extinct": float(extinct),
        "scattered": scattered,
        "absorbed": float(extinct - scattered),
        "absorbed_volume": absorbed_volume,
    }


def laplacian(values: np.ndarray, spacing) -> np.ndarray:
    """7-point finite-difference Laplacian on the interior (one-voxel margin dropped)."""
    v = values
    hx, hy, hz = spacing
    c = v[1:-1, 1:-1, 1:-1]
    return (
        (v[2:, 1:-1, 1:-1] - 2 * c + v[:-2, 1:-1, 1:-1]) / hx**2
        + (v[1:-1, 2:, 1:-1] - 2 * c + v[1:-1, :-2, 1:-1]) / hy**2
        + (v[1:-1, 1:-1, 2:] - 2 * c + v[1:-1, 1:-1, :-2]) / hz**2
    )


def pde_residual(u: GridField, p: GridField, ctx: WaveContext, margin: int = 2, min_resolution: int = 16) -> float:
    """max |lap_h u + k^2 u - q u| / max |u| over voxels at least ``margin`` from the grid edge."""
    if min(u.resolution) < min_resolution:
        raise ValueError(f"pde_residual needs resolution >= {min_resolution} per axis, got {u.resolution}")
    if not u.conformal(p):
        raise ValueError("u and p must share a grid")
    q = total_potential(p, ctx).values
    lap = laplacian(u.values, u.spacing)
    m = margin - 1
    sl = (slice(m, lap.shape[0] - m), slice(m, lap.shape[1] - m), slice(m, lap.shape[2] - m))
    core = (slice(margin, -margin),) * 3
    r = lap[sl] + (ctx.k**2 - q[core]) * u.values[core]
    return float(np.max(np.abs(r)) / np.max(np.abs(u.values)))


def restrict(fine: GridField, factor: int = 2) -> np.ndarray:
    """Average blocks of ``factor**3`` fine voxels onto the coarse grid."""
    nx, ny, nz = fine.resolution
    f = factor
    v = fine.values.reshape(nx // f, f, ny // f, f, nz // f, f)
    return v.mean(axis=(1, 3, 5))


def refinement_error(p_func, box, ctx: WaveContext, n: int, tol: float = 1e-10, **kw) -> float:
    """Relative sup difference between the grid-n and grid-2n solutions (fine averaged onto coarse)."""
    coarse = ls_solve(GridField.from_function(box, n, p_func), ctx, tol, **kw)
    fine = ls_solve(GridField.from_function(box, 2 * n, p_func), ctx, tol, **kw)
    return float(np.max(np.abs(restrict(fine) - coarse.values)) / np.max(np.abs(fine.values)))


__all__ = [
    "LSResult", "VolumeOperator", "field_at", "far_field_amplitude", "laplacian",
    "ls_solve", "pde_residual", "power_balance", "refinement_error", "restrict",
    "self_term", "total_potential", "voxel_centers",
]
