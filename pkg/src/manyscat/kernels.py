"""Free-space Helmholtz kernel, incident plane wave and sphere quadrature."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import GridField

#: relative distance (in units of the particle radius) below which two points coincide
COINCIDENT_RTOL = 1e-14

#: Gauss-Legendre order at which :func:`surface_self_integral` is accurate to 1e-6 * a
REFERENCE_QUADRATURE_ORDER = 16


class DomainError(ValueError):
    """Argument outside the domain of a kernel operation."""


class UnsupportedBackgroundError(ValueError):
    """Raised when an operation needs the free-space background."""


@dataclass(frozen=True, eq=False)
class WaveContext:
    """Wavenumber, incident direction and background medium.

    ``n0sq`` is ``None`` for the free-space background (n0^2 = 1 everywhere);
    otherwise a voxelized n0^2 used only by the homogenized solver.
    """

    k: float
    alpha: tuple[float, float, float] = (0.0, 0.0, 1.0)
    n0sq: GridField | None = None

    def __post_init__(self):
        k = float(self.k)
        if not np.isfinite(k) or k < 0:
            raise DomainError(f"wavenumber must be finite and >= 0, got {self.k}")
        alpha = np.asarray(self.alpha, dtype=float)
        if alpha.shape != (3,) or abs(np.linalg.norm(alpha) - 1.0) > 1e-12:
            raise DomainError(f"incident direction must be a unit 3-vector, got {self.alpha}")
        if self.n0sq is not None and np.any(np.imag(self.n0sq.values) < 0):
            raise DomainError("background must be passive: Im n0^2 >= 0")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "alpha", tuple(alpha))

    @property
    def free_space(self) -> bool:
        return self.n0sq is None

    def q0(self) -> GridField | None:
        """Background potential k^2 - k^2 n0^2 on the background grid."""
        if self.n0sq is None:
            return None
        return self.n0sq.with_values(self.k**2 * (1.0 - self.n0sq.values))

    def with_alpha(self, alpha) -> "WaveContext":
        return WaveContext(self.k, tuple(alpha), self.n0sq)


def green_free(x, y, k: float, scale: float = 1.0):
    """Outgoing free-space kernel exp(ik|x-y|) / (4 pi |x-y|).

    ``x`` and ``y`` broadcast against each other along leading axes; the last
    axis holds coordinates. ``scale`` sets the coincidence threshold
    ``|x - y| < 1e-14 * scale``.
    """
    r = np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float), axis=-1)
    if np.any(r < COINCIDENT_RTOL * scale):
        raise DomainError("green_free evaluated at coincident points")
    g = np.exp(1j * k * r) / (4 * np.pi * r)
    return g if np.ndim(g) else complex(g)


def green_gradient(x, y, k: float):
    """Gradient of :func:`green_free` with respect to ``x``."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = np.linalg.norm(d, axis=-1)
    if np.any(r < COINCIDENT_RTOL):
        raise DomainError("green_gradient evaluated at coincident points")
    g = np.exp(1j * k * r) / (4 * np.pi * r)
    return ((1j * k - 1.0 / r) * g / r)[..., None] * d


def green_matrix(targets: np.ndarray, sources: np.ndarray, k: float) -> np.ndarray:
    """Kernel matrix ``G[i, j] = green_free(targets[i], sources[j])``.

    Coincident pairs are set to zero (callers use this to drop self-interaction).
    """
    d = targets[:, None, :] - sources[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.exp(1j * k * r) / (4 * np.pi * r)
    g[r == 0] = 0.0
    return g


def incident_field(ctx: WaveContext, x):
    """Plane wave exp(ik alpha . x) at one point or an (n, 3) array of points."""
    if not ctx.free_space:
        raise UnsupportedBackgroundError(
            "incident_field is only defined for the free-space background"
        )
    x = np.asarray(x, dtype=float)
    u = np.exp(1j * ctx.k * (x @ np.asarray(ctx.alpha)))
    return u if np.ndim(u) else complex(u)


def _rotation_to(v: np.ndarray) -> np.ndarray:
    """Rotation matrix mapping the +z axis onto the unit vector ``v``."""
    z = np.array([0.0, 0.0, 1.0])
    c = float(np.dot(z, v))
    if c > 1 - 1e-15:
        return np.eye(3)
    if c < -1 + 1e-15:
        return np.diag([1.0, -1.0, -1.0])
    axis = np.cross(z, v)
    s = np.linalg.norm(axis)
    K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]]) / s
    return np.eye(3) + s * K + (1 - c) * (K @ K)


def surface_self_integral(
    a: float,
    t,
    quadrature_order: int = REFERENCE_QUADRATURE_ORDER,
    center=(0.0, 0.0, 0.0),
) -> float:
    """Integrate 1/(4 pi |s - t|) over the sphere |s - center| = a, with t on it.

    Product rule: Gauss-Legendre in the polar angle measured from ``t`` and the
    trapezoid rule in azimuth. With ``t`` at the pole the area element
    a^2 sin(theta) cancels the 1/|s - t| singularity, so the integrand is smooth.
    The exact value is ``a``.
    """
    if quadrature_order < 1:
        raise DomainError("quadrature_order must be >= 1")
    center = np.asarray(center, dtype=float)
    t = np.asarray(t, dtype=float)
    rel = t - center
    if abs(np.linalg.norm(rel) - a) > 1e-10 * max(a, 1.0):
        raise DomainError("t does not lie on the sphere")
    R = _rotation_to(rel / np.linalg.norm(rel))

    x, w = np.polynomial.legendre.leggauss(quadrature_order)
    theta = 0.5 * np.pi * (x + 1.0)
    w_theta = 0.5 * np.pi * w
    n_phi = 2 * quadrature_order
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    T, P = np.meshgrid(theta, phi, indexing="ij")
    local = a * np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1)
    s = local @ R.T + center
    dist = np.linalg.norm(s - t, axis=-1)
    integrand = a**2 * np.sin(T) / (4 * np.pi * dist)
    return float(np.sum(w_theta[:, None] * integrand) * (2 * np.pi / n_phi))
