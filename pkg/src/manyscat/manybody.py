"""Self-consistent effective field at the particle centers (point-source model).

Each ball is replaced by a point source of strength Q_m = -g_m u_e(x_m) at its
center. The effective fields solve

    u_j + sum_{m != j} G(x_j, x_m) g_m u_m = u0(x_j),   j = 1..M,

and the total field away from the balls is u0 + sum_m G(x, x_m) Q_m.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .ensemble import ParticleEnsemble
from .kernels import UnsupportedBackgroundError, WaveContext, green_matrix, incident_field
from .scaling import RegimeError, classify_regime, coupling, monopole_charge

log = logging.getLogger(__name__)

DENSE_THRESHOLD = 2000
NEAR_FIELD_GUARD = 3.0
_BLOCK = 256


class SolverError(RuntimeError):
    def __init__(self, message, residual_history=(), condition=None):
        super().__init__(message)
        self.residual_history = list(residual_history)
        self.condition = condition


class NearFieldError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class EffectiveFieldSolution:
    u_at_centers: np.ndarray = field(repr=False)
    charges: np.ndarray = field(repr=False)
    residual_norm: float
    iterations: int
    solver_kind: str
    leading_order: bool = False

    def __post_init__(self):
        for name in ("u_at_centers", "charges"):
            arr = np.array(getattr(self, name), dtype=complex)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


class CouplingOperator:
    """Matrix-free application of v -> v + G diag(g) v (self terms excluded).

    Rows are processed in fixed blocks. With ``deterministic=True`` the row
    reductions use numpy's own summation instead of BLAS, so results do not
    depend on the BLAS thread count.
    """

    def __init__(self, centers: np.ndarray, g: np.ndarray, k: float, deterministic: bool = False):
        self.centers = centers
        self.g = g
        self.k = k
        self.deterministic = deterministic
        self.shape = (len(centers), len(centers))

    def _block(self, start: int) -> np.ndarray:
        rows = self.centers[start : start + _BLOCK]
        G = green_matrix(rows, self.centers, self.k)
        # green_matrix zeroes r == 0 entries, which are exactly the diagonal here
        return G

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=complex).reshape(-1)
        w = self.g * v
        out = np.empty_like(v)
        for start in range(0, self.shape[0], _BLOCK):
            G = self._block(start)
            if self.deterministic:
                out[start : start + len(G)] = (G * w).sum(axis=1)
            else:
                out[start : start + len(G)] = G @ w
        return v + out

    def dense(self) -> np.ndarray:
        A = green_matrix(self.centers, self.centers, self.k) * self.g[None, :]
        A[np.diag_indices_from(A)] += 1.0
        return A

    def as_linear_operator(self) -> spla.LinearOperator:
        return spla.LinearOperator(self.shape, matvec=self.matvec, dtype=complex)


def _check_inputs(ensemble: ParticleEnsemble, ctx: WaveContext) -> None:
    if not ctx.free_space:
        raise UnsupportedBackgroundError("the many-body solver needs the free-space background")
    report = classify_regime(ensemble.law)
    if not report.approximation_valid:
        raise RegimeError(
            f"point-source model needs kappa1 < 1 (got kappa1={ensemble.law.kappa1})"
        )


def solve_effective_field(
    ensemble: ParticleEnsemble,
    ctx: WaveContext,
    tol: float = 1e-10,
    method: str = "auto",
    dense_threshold: int = DENSE_THRESHOLD,
    leading_order: bool = False,
    deterministic: bool = False,
    restart: int = 60,
    maxiter: int = 200,
) -> EffectiveFieldSolution:
    """Solve for u_e at all centers.

    ``method`` is ``"dense"``, ``"iterative"`` (restarted GMRES, matrix-free)
    or ``"auto"`` (dense up to ``dense_threshold`` particles).
    """
    _check_inputs(ensemble, ctx)
    M = len(ensemble)
    if M == 0:
        return EffectiveFieldSolution(np.zeros(0), np.zeros(0), 0.0, 0, "dense", leading_order)
    centers = ensemble.centers
    g = coupling(ensemble.law, centers, leading_order=leading_order)
    u0 = np.atleast_1d(incident_field(ctx, centers))
    op = CouplingOperator(centers, g, ctx.k, deterministic)
    if method == "auto":
        method = "dense" if M <= dense_threshold else "iterative"

    if method == "dense":
        A = op.dense()
        try:
            u = np.linalg.solve(A, u0)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"dense solve failed: {exc}", condition=np.inf) from exc
        iterations = 1
        history = []
    elif method == "iterative":
        history: list[float] = []
        u, info = spla.gmres(
            op.as_linear_operator(),
            u0,
            rtol=tol,
            atol=0.0,
            restart=min(restart, M),
            maxiter=maxiter,
            callback=history.append,
            callback_type="pr_norm",
        )
        iterations = len(history)
        if info < 0:
            raise SolverError(f"GMRES breakdown (info={info})", history)
    else:
        raise ValueError(f"unknown method {method!r}")

    residual = float(np.linalg.norm(op.matvec(u) - u0) / np.linalg.norm(u0))
    if not np.isfinite(residual) or residual > tol * 10:
        cond = float(np.linalg.cond(op.dense())) if M <= dense_threshold else None
        raise SolverError(
            f"{method} solve did not reach tol={tol:g} (residual {residual:.3e}, "
            f"condition estimate {cond})",
            history,
            cond,
        )
    if leading_order:
        charges = -g * u
    else:
        charges = monopole_charge(ensemble.law, centers, u)
    log.debug("solved M=%d with %s: residual %.3e, %d iterations", M, method, residual, iterations)
    return EffectiveFieldSolution(u, charges, residual, iterations, method, leading_order)


def evaluate_field(
    solution: EffectiveFieldSolution,
    ensemble: ParticleEnsemble,
    ctx: WaveContext,
    x,
    guard: float = NEAR_FIELD_GUARD,
):
    """u0(x) + sum_m G(x, x_m) Q_m at points at least ``guard * a`` from every center."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    u = np.atleast_1d(incident_field(ctx, pts)).astype(complex)
    if len(ensemble):
        for start in range(0, len(pts), _BLOCK):
            blk = pts[start : start + _BLOCK]
            d = np.linalg.norm(blk[:, None, :] - ensemble.centers[None, :, :], axis=-1)
            i, m = np.unravel_index(np.argmin(d), d.shape)
            if d[i, m] < guard * ensemble.a:
                raise NearFieldError(
                    f"point {blk[i].tolist()} lies within {guard:g}a of particle {m} "
                    f"at {ensemble.centers[m].tolist()}"
                )
            G = np.exp(1j * ctx.k * d) / (4 * np.pi * d)
            u[start : start + len(blk)] += G @ solution.charges
    return complex(u[0]) if np.ndim(x) == 1 else u


def far_field_amplitude(
    solution: EffectiveFieldSolution, ensemble: ParticleEnsemble, ctx: WaveContext, direction
):
    """Amplitude f with u - u0 ~ f exp(ikr)/r along the unit ``direction``."""
    xhat = np.atleast_2d(np.asarray(direction, dtype=float))
    phase = np.exp(-1j * ctx.k * xhat @ ensemble.centers.T)
    f = phase @ solution.charges / (4 * np.pi)
    return complex(f[0]) if np.ndim(direction) == 1 else f


def validity_ratio(ensemble: ParticleEnsemble, ctx: WaveContext | None = None) -> float:
    """Size of the neglected surface term relative to the monopole term, a**(1 - kappa1)."""
    return ensemble.a ** (1 - ensemble.law.kappa1)
